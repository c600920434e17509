"""Tiles, Heesch numbers and finite-index constructions on Cayley graphs."""

from .errors import CayleyTilesError, ResourceCapError, SpecError
from .groups import (
    Element,
    GroupSpec,
    IDENTITY,
    ball,
    boundary,
    distance,
    element,
    grid_coords,
    grid_element,
    inverse,
    is_connected,
    length,
    mul,
    neighbors,
    normal_form,
    parse_word,
    set_distance,
    shortlex_key,
    sorted_elements,
    spec_digest,
    sphere,
    validate_rewriting,
)
from .subgroups import (
    CosetTable,
    FiniteHom,
    InjectivityRadius,
    SchreierBasis,
    basis_word_element,
    build_coset_table,
    check_c2,
    check_closure_invariance,
    injectivity_radius,
    kernel_contains,
    min_kernel_element,
    schreier_generators,
    schreier_rewrite,
)
from .heesch import (
    Exhausted,
    HeeschCertificate,
    LayerDecomposition,
    certificate_bytes,
    certificate_from_json,
    certificate_to_json,
    containment_radius,
    decompose_layers,
    find_periodic_witness,
    frontier,
    heesch_eval,
    heesch_ge,
    verify_certificate,
)
from .construct import (
    ConnectedSeed,
    ConstructionTrace,
    FixtureCandidate,
    PipelineResult,
    PremiseReport,
    SeedSet,
    StageRecord,
    TransversalReport,
    TriplePath,
    assemble_K,
    build_V0,
    check_premises,
    connect_V,
    extend_to_A,
    geodesic_chain,
    lift_tiling,
    run_pipeline,
    run_stage,
    search_premise_fixtures,
    verify_a1_a5,
)
from .polygons import LatticePolygon, polygonize
from .svgrender import RenderStyle, render_svg
from .tiling import (
    PartialTiling,
    PeriodicWitness,
    Tile,
    disjoint,
    make_tile,
    placement,
    tile_from_json,
    tile_to_json,
    tiling_from_json,
    tiling_to_json,
    verify_partition,
    verify_periodic,
)

__version__ = "0.1.0"
