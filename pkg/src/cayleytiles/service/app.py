"""HTTP service exposing the core operations as stateless JSON endpoints.

The handlers parse documents with the same loaders the library uses, call
the corresponding core operation, and wrap the answer in the response
envelope.  Domain-invalid input becomes HTTP 422 with a typed diagnostic;
resource caps become an "inconclusive" envelope, never a silent truncation.
"""

from itertools import product

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..construct import (
    check_premises,
    lift_tiling,
    run_pipeline,
    run_stage,
)
from ..errors import ResourceCapError, SpecError
from ..groups import GroupSpec, ball, element, grid_element
from ..heesch import (
    Exhausted,
    certificate_from_json,
    certificate_to_json,
    heesch_eval,
    heesch_ge,
    verify_certificate,
)
from ..polygons import polygonize
from ..subgroups import FiniteHom, build_coset_table
from ..svgrender import RenderStyle, render_svg
from ..tiling import make_tile, tiling_to_json
from .models import (
    Envelope,
    GroupValidateRequest,
    HeeschEvalRequest,
    HeeschGeRequest,
    HeeschVerifyRequest,
    LiftRequest,
    PipelineRequest,
    PolygonRequest,
    PremisesRequest,
    StageRequest,
    SvgRequest,
    TileRequest,
)


def _invalid(exc):
    return HTTPException(status_code=422,
                         detail={"type": "invalid-input", "message": str(exc)})


def _capped(exc):
    return Envelope(status="inconclusive", reason=str(exc))


def _load_tile(req: TileRequest):
    """Group and cells from either an inline pair or a tile document."""
    doc = req.tile
    if doc is not None:
        if not isinstance(doc, dict) or "cells" not in doc:
            raise SpecError("tile document needs a 'cells' field")
        group_doc = req.group if req.group is not None else doc.get("group")
        cells = doc["cells"]
    else:
        group_doc = req.group
        cells = req.cells
    if group_doc is None:
        raise SpecError("no group given, inline or inside the tile document")
    if cells is None:
        raise SpecError("no cells given, inline or inside the tile document")
    spec = GroupSpec.from_json(group_doc)
    return spec, [element(spec, w) for w in cells]


def _region_cells(spec, doc, max_ball):
    """A region document: explicit words, a metric ball, or a grid box."""
    if not isinstance(doc, dict):
        raise SpecError("region must be an object")
    if "words" in doc:
        return [element(spec, w) for w in doc["words"]]
    if "ball" in doc:
        b = doc["ball"]
        center = element(spec, b.get("center", ""))
        return ball(spec, center, int(b["radius"]), max_size=max_ball)
    if "box" in doc:
        if spec.model != "grid":
            raise SpecError("box regions are only defined for grid groups")
        lo, hi = doc["box"]["min"], doc["box"]["max"]
        if len(lo) != spec.dim or len(hi) != spec.dim:
            raise SpecError(f"box corners must have {spec.dim} coordinates")
        ranges = [range(int(a), int(b) + 1) for a, b in zip(lo, hi)]
        return [grid_element(spec, coords) for coords in product(*ranges)]
    raise SpecError("region needs a 'words', 'ball' or 'box' field")


def _style(doc):
    if doc is None:
        return None
    allowed = {"scale", "margin", "palette", "center_fill", "stroke",
               "stroke_width", "background"}
    unknown = set(doc) - allowed
    if unknown:
        raise SpecError(f"unknown style fields: {sorted(unknown)}")
    if "palette" in doc:
        doc = dict(doc, palette=tuple(doc["palette"]))
    return RenderStyle(**doc)


def create_app() -> FastAPI:
    app = FastAPI(title="cayleytiles", version=__version__)

    @app.get("/healthz", response_model=Envelope)
    def healthz():
        return Envelope(status="ok", result={"version": __version__})

    @app.post("/group/validate", response_model=Envelope)
    def group_validate(req: GroupValidateRequest):
        try:
            spec = GroupSpec.from_json(req.group)
        except SpecError as exc:
            return Envelope(status="refuted",
                            result={"valid": False, "message": str(exc)})
        return Envelope(status="ok",
                        result={"valid": True, "group": spec.to_json()})

    @app.post("/tile/check", response_model=Envelope)
    def tile_check(req: TileRequest):
        try:
            spec, cells = _load_tile(req)
        except SpecError as exc:
            raise _invalid(exc)
        try:
            tile = make_tile(spec, cells)
        except SpecError as exc:
            return Envelope(status="refuted",
                            result={"valid": False, "message": str(exc)})
        return Envelope(status="ok", result={
            "valid": True, "connected": tile.connected,
            "size": len(tile.cells)})

    @app.post("/heesch/eval", response_model=Envelope)
    def eval_layers(req: HeeschEvalRequest):
        try:
            spec, cells = _load_tile(req)
            tile = make_tile(spec, cells)
            kwargs = {}
            if req.max_nodes is not None:
                kwargs["max_nodes"] = req.max_nodes
            cert = heesch_eval(spec, tile, max_layers=req.max_layers,
                               period_bound=req.period_bound,
                               deterministic=req.deterministic,
                               threads=req.threads, **kwargs)
        except SpecError as exc:
            raise _invalid(exc)
        except ResourceCapError as exc:
            return _capped(exc)
        return Envelope(status="ok",
                        result={"certificate": certificate_to_json(cert)})

    @app.post("/heesch/ge", response_model=Envelope)
    def surround(req: HeeschGeRequest):
        try:
            spec, cells = _load_tile(req)
            tile = make_tile(spec, cells)
            kwargs = {}
            if req.max_nodes is not None:
                kwargs["max_nodes"] = req.max_nodes
            out = heesch_ge(spec, tile, req.n, radius_cap=req.radius_cap,
                            deterministic=req.deterministic,
                            threads=req.threads, **kwargs)
        except SpecError as exc:
            raise _invalid(exc)
        except ResourceCapError as exc:
            return _capped(exc)
        if isinstance(out, Exhausted):
            if out.conclusive:
                return Envelope(status="refuted",
                                result={"exhausted": out.to_json()})
            return Envelope(status="inconclusive",
                            result={"exhausted": out.to_json()},
                            reason="radius cap reached before refutation")
        return Envelope(status="ok",
                        result={"certificate": certificate_to_json(out)})

    @app.post("/heesch/verify", response_model=Envelope)
    def verify(req: HeeschVerifyRequest):
        try:
            cert = certificate_from_json(req.certificate)
            spec = (GroupSpec.from_json(req.group)
                    if req.group is not None else cert.group)
            good = verify_certificate(spec, cert)
        except SpecError as exc:
            return Envelope(status="refuted",
                            result={"valid": False, "message": str(exc)})
        if not good:
            return Envelope(status="refuted", result={"valid": False})
        return Envelope(status="ok", result={"valid": True})

    @app.post("/construct/premises", response_model=Envelope)
    def premises(req: PremisesRequest):
        try:
            spec = GroupSpec.from_json(req.group)
            report = check_premises(spec, s_cap=req.s_cap,
                                    max_size=req.max_ball)
        except SpecError as exc:
            raise _invalid(exc)
        except ResourceCapError as exc:
            return _capped(exc)
        status = "ok" if report.ok else "refuted"
        return Envelope(status=status, result={"report": report.to_json()})

    @app.post("/construct/pipeline", response_model=Envelope)
    def pipeline(req: PipelineRequest):
        try:
            spec = GroupSpec.from_json(req.group)
            hom = FiniteHom.from_json(spec, req.hom)
            kwargs = {}
            if req.extend_nodes is not None:
                kwargs["extend_nodes"] = req.extend_nodes
            if req.unique_nodes is not None:
                kwargs["unique_nodes"] = req.unique_nodes
            res = run_pipeline(spec, hom, s_cap=req.s_cap,
                               path_cap=req.path_cap,
                               R_unique=req.unique_radius,
                               max_size=req.max_ball, **kwargs)
        except SpecError as exc:
            raise _invalid(exc)
        except ResourceCapError as exc:
            return _capped(exc)
        return Envelope(status="ok", result={"result": res.to_json(spec)})

    @app.post("/construct/stage", response_model=Envelope)
    def stage(req: StageRequest):
        try:
            spec = GroupSpec.from_json(req.group)
            hom = FiniteHom.from_json(spec, req.hom)
            next_spec = (GroupSpec.from_json(req.next_group)
                         if req.next_group is not None else None)
            kwargs = {}
            if req.max_nodes is not None:
                kwargs["heesch_max_nodes"] = req.max_nodes
            rec = run_stage(spec, hom, req.p, stage=req.stage,
                            s_cap=req.s_cap, basis=req.basis,
                            r_prev=req.r_prev, next_spec=next_spec,
                            R_unique=req.unique_radius,
                            max_size=req.max_ball, **kwargs)
        except SpecError as exc:
            raise _invalid(exc)
        except ResourceCapError as exc:
            return _capped(exc)
        return Envelope(status="ok", result={"record": rec.to_json(spec)})

    @app.post("/lift", response_model=Envelope)
    def lift(req: LiftRequest):
        try:
            spec = GroupSpec.from_json(req.group)
            hom = FiniteHom.from_json(spec, req.hom)
            table = build_coset_table(hom)
            cells = [element(spec, w) for w in req.cells]
            centers = [c if isinstance(c, int) else element(spec, c)
                       for c in req.centers]
            region = _region_cells(spec, req.region, req.max_ball)
            tiling = lift_tiling(spec, table, cells, centers, region)
        except SpecError as exc:
            raise _invalid(exc)
        except ResourceCapError as exc:
            return _capped(exc)
        return Envelope(status="ok",
                        result={"tiling": tiling_to_json(spec, tiling)})

    @app.post("/export/polygon", response_model=Envelope)
    def export_polygon(req: PolygonRequest):
        try:
            spec, cells = _load_tile(req)
            poly = polygonize(spec, cells)
        except SpecError as exc:
            raise _invalid(exc)
        return Envelope(status="ok", result={"polygon": poly.to_json()})

    @app.post("/export/svg", response_model=Envelope)
    def export_svg(req: SvgRequest):
        try:
            style = _style(req.style)
            if req.kind == "certificate":
                if req.certificate is None:
                    raise SpecError("svg of kind 'certificate' needs a "
                                    "'certificate' field")
                scene = certificate_from_json(req.certificate)
                svg = render_svg(scene, style)
            else:
                spec, cells = _load_tile(
                    TileRequest(group=req.group, cells=req.cells,
                                tile=req.tile))
                if req.kind == "polygon":
                    svg = render_svg(polygonize(spec, cells), style)
                else:
                    svg = render_svg(make_tile(spec, cells), style, spec=spec)
        except SpecError as exc:
            raise _invalid(exc)
        return Envelope(status="ok", result={"svg": svg})

    return app


app = create_app()
