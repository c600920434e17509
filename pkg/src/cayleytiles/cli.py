"""Command line client for the tiling service.

Every subcommand reads JSON documents, posts them to the HTTP service and
reports the response envelope.  By default the bundled application is
called in process; --server targets a running instance instead.

Exit codes: 0 success or verdict true, 1 verdict false or refuted,
2 error, 3 inconclusive (a resource cap stopped the search).  Errors
print one JSON diagnostic line to the error stream.  The environment
variable CAYLEYTILES_MAX_BALL sets the default cap on enumerated ball
sizes for in-process runs.
"""

import argparse
import asyncio
import json
import sys

import httpx

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_ERROR = 2
EXIT_INCONCLUSIVE = 3

_STATUS_CODES = {"ok": EXIT_OK, "refuted": EXIT_REFUTED,
                 "inconclusive": EXIT_INCONCLUSIVE}


class CliError(Exception):
    def __init__(self, kind, message):
        super().__init__(message)
        self.kind = kind


class Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors are machine readable."""

    def error(self, message):
        _diagnostic("usage", message)
        raise SystemExit(EXIT_ERROR)


def _diagnostic(kind, message):
    print(json.dumps({"error": {"type": kind, "message": message}}),
          file=sys.stderr)


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise CliError("parse", f"{path} is not valid JSON: {exc}")


def _call(server, path, payload):
    try:
        if server:
            resp = httpx.post(server.rstrip("/") + path, json=payload,
                              timeout=None)
            return resp.status_code, resp.json()

        async def go():
            from .service import create_app
            transport = httpx.ASGITransport(app=create_app())
            async with httpx.AsyncClient(transport=transport,
                                         base_url="http://cli") as client:
                return await client.post(path, json=payload, timeout=None)

        resp = asyncio.run(go())
        return resp.status_code, resp.json()
    except httpx.HTTPError as exc:
        raise CliError("transport", str(exc))


def _emit(text, out):
    if not text.endswith("\n"):
        text += "\n"
    if out:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise CliError("io", f"cannot write {out}: {exc}")
    else:
        sys.stdout.write(text)


def _finish(args, code, body, extract=None, raw=False):
    """Map the HTTP envelope onto output text and an exit code."""
    if code != 200:
        detail = body.get("detail", body)
        if isinstance(detail, dict) and "message" in detail:
            _diagnostic(detail.get("type", "invalid-input"),
                        detail["message"])
        else:
            _diagnostic("http", json.dumps(detail))
        return EXIT_ERROR
    status = body.get("status")
    if status not in _STATUS_CODES:
        _diagnostic("protocol", f"unexpected response status {status!r}")
        return EXIT_ERROR
    payload = extract(body) if extract is not None else body
    if payload is None:
        payload = body
    if raw and isinstance(payload, str):
        text = payload
    else:
        text = json.dumps(payload, indent=2)
    _emit(text, getattr(args, "out", None))
    if status == "inconclusive" and body.get("reason"):
        _diagnostic("resource-cap", body["reason"])
    return _STATUS_CODES[status]


def _tile_payload(args):
    payload = {"tile": _load_json(args.tile)}
    if getattr(args, "group", None):
        payload["group"] = _load_json(args.group)
    return payload


def _search_fields(args):
    threads = getattr(args, "threads", 1)
    return {"deterministic": bool(getattr(args, "deterministic", False)
                                  or threads <= 1),
            "threads": threads,
            "max_nodes": getattr(args, "max_nodes", None)}


# -- subcommand handlers ------------------------------------------------------------

def cmd_group_validate(args):
    code, body = _call(args.server, "/group/validate",
                       {"group": _load_json(args.group_file)})
    return _finish(args, code, body)


def cmd_tile_check(args):
    code, body = _call(args.server, "/tile/check", _tile_payload(args))
    return _finish(args, code, body)


def cmd_heesch_eval(args):
    payload = _tile_payload(args)
    payload.update(_search_fields(args))
    payload["max_layers"] = args.max_layers
    payload["period_bound"] = args.period_bound
    code, body = _call(args.server, "/heesch/eval", payload)
    return _finish(args, code, body,
                   extract=lambda b: (b.get("result") or {}).get("certificate"))


def cmd_heesch_ge(args):
    payload = _tile_payload(args)
    payload.update(_search_fields(args))
    payload["n"] = args.n
    payload["radius_cap"] = args.radius_cap
    code, body = _call(args.server, "/heesch/ge", payload)

    def extract(b):
        result = b.get("result") or {}
        return result.get("certificate") or result.get("exhausted")

    return _finish(args, code, body, extract=extract)


def cmd_heesch_verify(args):
    payload = {"certificate": _load_json(args.cert)}
    if args.group:
        payload["group"] = _load_json(args.group)
    code, body = _call(args.server, "/heesch/verify", payload)
    return _finish(args, code, body)


def cmd_construct_premises(args):
    payload = {"group": _load_json(args.group), "s_cap": args.s_cap,
               "max_ball": args.max_ball}
    code, body = _call(args.server, "/construct/premises", payload)
    return _finish(args, code, body)


def cmd_construct_pipeline(args):
    payload = {"group": _load_json(args.group), "hom": _load_json(args.hom),
               "s_cap": args.s_cap, "path_cap": args.path_cap,
               "unique_radius": args.unique_radius,
               "max_ball": args.max_ball}
    code, body = _call(args.server, "/construct/pipeline", payload)
    return _finish(args, code, body,
                   extract=lambda b: (b.get("result") or {}).get("result"))


def cmd_construct_stage(args):
    payload = {"group": _load_json(args.group), "hom": _load_json(args.hom),
               "p": args.p, "stage": args.stage, "s_cap": args.s_cap,
               "basis": args.basis, "r_prev": args.r_prev,
               "unique_radius": args.unique_radius,
               "max_ball": args.max_ball, "max_nodes": args.max_nodes}
    if args.next_group:
        payload["next_group"] = _load_json(args.next_group)
    code, body = _call(args.server, "/construct/stage", payload)
    return _finish(args, code, body,
                   extract=lambda b: (b.get("result") or {}).get("record"))


def cmd_lift(args):
    payload = {"group": _load_json(args.group), "hom": _load_json(args.hom),
               "cells": _load_json(args.tile_cells),
               "centers": _load_json(args.centers),
               "region": _load_json(args.region),
               "max_ball": args.max_ball}
    if isinstance(payload["cells"], dict):
        payload["cells"] = payload["cells"]["cells"]
    code, body = _call(args.server, "/lift", payload)
    return _finish(args, code, body,
                   extract=lambda b: (b.get("result") or {}).get("tiling"))


def cmd_export_svg(args):
    if args.cert:
        payload = {"kind": "certificate",
                   "certificate": _load_json(args.cert)}
    else:
        if not args.tile:
            raise CliError("usage", "export svg needs --tile or --cert")
        payload = {"kind": "polygon" if args.as_polygon else "tile"}
        payload.update(_tile_payload(args))
    if args.style:
        payload["style"] = _load_json(args.style)
    code, body = _call(args.server, "/export/svg", payload)
    return _finish(args, code, body, raw=True,
                   extract=lambda b: (b.get("result") or {}).get("svg"))


def cmd_export_polygon(args):
    code, body = _call(args.server, "/export/polygon", _tile_payload(args))
    return _finish(args, code, body,
                   extract=lambda b: (b.get("result") or {}).get("polygon"))


# -- parser -------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--server", default=None,
                        help="URL of a running service; default runs in process")
    common.add_argument("--deterministic", action="store_true",
                        help="force sequential search order even with --threads")
    common.add_argument("--threads", type=int, default=1, metavar="N",
                        help="parallel branches for engine searches")
    common.add_argument("--radius-cap", type=int, default=None, metavar="R",
                        dest="radius_cap", help="bound search radii")
    common.add_argument("--max-ball", type=int, default=None, metavar="M",
                        dest="max_ball", help="cap enumerated ball sizes")
    common.add_argument("--max-nodes", type=int, default=None, metavar="M",
                        dest="max_nodes", help="cap search tree nodes")
    common.add_argument("--out", default=None, metavar="FILE",
                        help="write the result document here instead of stdout")

    parser = Parser(
        prog="cayleytiles",
        description="Tiles, Heesch numbers and finite-index constructions "
                    "on Cayley graphs.",
        epilog="Exit codes: 0 success/verdict-true, 1 verdict-false/refuted, "
               "2 error, 3 inconclusive. CAYLEYTILES_MAX_BALL sets the "
               "default ball-size cap.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_group = sub.add_parser("group", help="group model operations")
    gsub = p_group.add_subparsers(dest="action", required=True)
    g_val = gsub.add_parser("validate", parents=[common],
                            help="validate a group document")
    g_val.add_argument("group_file", help="group JSON file")
    g_val.set_defaults(func=cmd_group_validate)

    p_tile = sub.add_parser("tile", help="tile operations")
    tsub = p_tile.add_subparsers(dest="action", required=True)
    t_chk = tsub.add_parser("check", parents=[common],
                            help="check cardinality and connectivity")
    t_chk.add_argument("tile", help="tile JSON file")
    t_chk.add_argument("--group", default=None, help="group JSON file")
    t_chk.set_defaults(func=cmd_tile_check)

    p_heesch = sub.add_parser("heesch", help="layer searches and certificates")
    hsub = p_heesch.add_subparsers(dest="action", required=True)
    h_eval = hsub.add_parser("eval", parents=[common],
                             help="evaluate the layer count")
    h_eval.add_argument("--tile", required=True, help="tile JSON file")
    h_eval.add_argument("--group", default=None, help="group JSON file")
    h_eval.add_argument("--max-layers", type=int, default=3,
                        dest="max_layers")
    h_eval.add_argument("--period-bound", type=int, default=8,
                        dest="period_bound")
    h_eval.set_defaults(func=cmd_heesch_eval)
    h_ge = hsub.add_parser("ge", parents=[common],
                           help="decide whether N layers fit")
    h_ge.add_argument("--tile", required=True, help="tile JSON file")
    h_ge.add_argument("--group", default=None, help="group JSON file")
    h_ge.add_argument("-N", "-n", type=int, required=True, dest="n",
                      help="layer target")
    h_ge.set_defaults(func=cmd_heesch_ge)
    h_ver = hsub.add_parser("verify", parents=[common],
                            help="re-check a certificate without searching")
    h_ver.add_argument("--cert", required=True, help="certificate JSON file")
    h_ver.add_argument("--group", default=None, help="group JSON file")
    h_ver.set_defaults(func=cmd_heesch_verify)

    p_con = sub.add_parser("construct", help="transversal construction")
    csub = p_con.add_subparsers(dest="action", required=True)
    c_pre = csub.add_parser("premises", parents=[common],
                            help="check girth and triple-path premises")
    c_pre.add_argument("--group", required=True, help="group JSON file")
    c_pre.add_argument("--s-cap", type=int, default=8, dest="s_cap")
    c_pre.set_defaults(func=cmd_construct_premises)
    c_pipe = csub.add_parser("pipeline", parents=[common],
                             help="build and verify a transversal and K")
    c_pipe.add_argument("--group", required=True, help="group JSON file")
    c_pipe.add_argument("--hom", required=True, help="quotient map JSON file")
    c_pipe.add_argument("--s-cap", type=int, default=8, dest="s_cap")
    c_pipe.add_argument("--path-cap", type=int, default=16, dest="path_cap")
    c_pipe.add_argument("--unique-radius", type=int, default=None,
                        dest="unique_radius")
    c_pipe.set_defaults(func=cmd_construct_pipeline)
    c_stage = csub.add_parser("stage", parents=[common],
                              help="run one stage with radius bookkeeping")
    c_stage.add_argument("--group", required=True, help="group JSON file")
    c_stage.add_argument("--hom", required=True, help="quotient map JSON file")
    c_stage.add_argument("-p", type=int, required=True, dest="p",
                         help="odd torsion exponent")
    c_stage.add_argument("--stage", type=int, default=0)
    c_stage.add_argument("--basis", nargs="+", default=None,
                         help="kernel basis words")
    c_stage.add_argument("--r-prev", type=int, default=None, dest="r_prev")
    c_stage.add_argument("--next-group", default=None, dest="next_group",
                         help="next stage group JSON file")
    c_stage.add_argument("--s-cap", type=int, default=8, dest="s_cap")
    c_stage.add_argument("--unique-radius", type=int, default=None,
                         dest="unique_radius")
    c_stage.set_defaults(func=cmd_construct_stage)

    p_lift = sub.add_parser("lift", parents=[common],
                            help="lift a quotient tiling to the group")
    p_lift.add_argument("--group", required=True, help="group JSON file")
    p_lift.add_argument("--hom", required=True, help="quotient map JSON file")
    p_lift.add_argument("--tile", required=True, dest="tile_cells",
                        help="tile JSON file (cells list or tile document)")
    p_lift.add_argument("--centers", required=True,
                        help="quotient centers JSON file")
    p_lift.add_argument("--region", required=True,
                        help="region JSON file (words, ball or box)")
    p_lift.set_defaults(func=cmd_lift)

    p_exp = sub.add_parser("export", help="polygons and SVG drawings")
    esub = p_exp.add_subparsers(dest="action", required=True)
    e_svg = esub.add_parser("svg", parents=[common],
                            help="render a tile, polygon or certificate")
    e_svg.add_argument("--tile", default=None, help="tile JSON file")
    e_svg.add_argument("--group", default=None, help="group JSON file")
    e_svg.add_argument("--cert", default=None, help="certificate JSON file")
    e_svg.add_argument("--as-polygon", action="store_true", dest="as_polygon",
                       help="draw the boundary polygon instead of squares")
    e_svg.add_argument("--style", default=None, help="style JSON file")
    e_svg.set_defaults(func=cmd_export_svg)
    e_poly = esub.add_parser("polygon", parents=[common],
                             help="boundary polygon of a grid tile")
    e_poly.add_argument("--tile", required=True, help="tile JSON file")
    e_poly.add_argument("--group", default=None, help="group JSON file")
    e_poly.set_defaults(func=cmd_export_polygon)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        _diagnostic(exc.kind, str(exc))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
