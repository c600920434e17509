"""Request and response bodies for the HTTP service.

Every endpoint answers with the same envelope: ``status`` is "ok" for a
positive verdict or a finished computation, "refuted" for a negative
verdict (invalid object, failed premises, conclusive non-surroundability,
rejected certificate), and "inconclusive" when a resource cap stopped the
search before an answer.  Malformed or domain-invalid input is an HTTP 422
with a typed diagnostic instead.
"""

from typing import Literal, Optional

from pydantic import BaseModel


class Envelope(BaseModel):
    status: Literal["ok", "refuted", "inconclusive"]
    result: Optional[dict] = None
    reason: Optional[str] = None


class GroupValidateRequest(BaseModel):
    group: dict


class TileRequest(BaseModel):
    """A tile, either inline (group + cells) or as a full tile document."""

    group: Optional[dict] = None
    cells: Optional[list] = None
    tile: Optional[dict] = None


class HeeschEvalRequest(TileRequest):
    max_layers: int = 3
    period_bound: int = 8
    deterministic: bool = True
    threads: int = 1
    max_nodes: Optional[int] = None


class HeeschGeRequest(TileRequest):
    n: int
    radius_cap: Optional[int] = None
    deterministic: bool = True
    threads: int = 1
    max_nodes: Optional[int] = None


class HeeschVerifyRequest(BaseModel):
    certificate: dict
    group: Optional[dict] = None


class PremisesRequest(BaseModel):
    group: dict
    s_cap: int = 8
    max_ball: Optional[int] = None


class PipelineRequest(BaseModel):
    group: dict
    hom: dict
    s_cap: int = 8
    path_cap: int = 16
    unique_radius: Optional[int] = None
    extend_nodes: Optional[int] = None
    unique_nodes: Optional[int] = None
    max_ball: Optional[int] = None


class StageRequest(BaseModel):
    group: dict
    hom: dict
    p: int
    stage: int = 0
    s_cap: int = 8
    basis: Optional[list] = None
    r_prev: Optional[int] = None
    next_group: Optional[dict] = None
    unique_radius: Optional[int] = None
    max_ball: Optional[int] = None
    max_nodes: Optional[int] = None


class LiftRequest(BaseModel):
    group: dict
    hom: dict
    cells: list
    centers: list
    region: dict
    max_ball: Optional[int] = None


class PolygonRequest(TileRequest):
    pass


class SvgRequest(BaseModel):
    kind: Literal["tile", "certificate", "polygon"]
    group: Optional[dict] = None
    cells: Optional[list] = None
    tile: Optional[dict] = None
    certificate: Optional[dict] = None
    style: Optional[dict] = None


__all__ = [
    "Envelope",
    "GroupValidateRequest",
    "HeeschEvalRequest",
    "HeeschGeRequest",
    "HeeschVerifyRequest",
    "LiftRequest",
    "PipelineRequest",
    "PolygonRequest",
    "PremisesRequest",
    "StageRequest",
    "SvgRequest",
    "TileRequest",
]
