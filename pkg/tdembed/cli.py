"""
tdembed command line.

  python -m tdembed [--jobs N] [--out PATH] [--log-level L] <area> <command> ...

Every command prints one JSON report with a `digest` field. Exit codes:
0 success, 1 a check failed (the report carries the witness), 2 bad input, 3 too large.
"""
from __future__ import annotations
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ValidationError

from . import embedding as emb
from .audit import get_audit_payload, seal
from .config import SETTINGS
from .design import (
    LatinSquare,
    TransversalDesign,
    check_loop,
    check_orthogonal,
    find_transversals,
    loop_operation,
    mols_to_td,
    td_to_mols,
    validate_latin_square,
    validate_td,
)
from .errors import FormatError, TDEmbedError
from .exactalg import decode, descriptor
from .groupcat import (
    GeneratedGroup,
    additive_group,
    catalog,
    catalog_names,
    lemma_checks,
    multiplicative_group,
    require_certified,
    semidirect_group,
)
from .models import (
    EmbeddingPayload,
    FrameShape,
    GroupKind,
    GroupPayload,
    LatinSquarePayload,
    MOLSPayload,
    TDPayload,
    TransversalPointsReport,
)
from .oracle import PGSpace, brute_transversal_points, search_td_on_frame
from .projgeom import HomPoint, point
from .digest import canonical_json

log = logging.getLogger("tdembed.cli")

Report = Tuple[Dict[str, Any], int]


# ---------- input ----------
def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise FormatError(f"{path} is not JSON: {e.msg} at line {e.lineno}") from e


def _parse_json_arg(text: str, what: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"{what} is not JSON: {e.msg}") from e


def _validate(model, data: Any, source: str):
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(x) for x in first["loc"]) or "<root>"
        raise FormatError(f"{source}: {where}: {first['msg']}") from e


def _load_group(source: str) -> GeneratedGroup:
    """A group JSON file, or a catalog preset name."""
    if Path(source).is_file():
        g = GeneratedGroup.from_payload(_validate(GroupPayload, _read_json(source), source))
        require_certified(g)
        return g
    return catalog(source)


def _load_embedding(path: str) -> emb.EmbeddedTD:
    return emb.from_payload(_validate(EmbeddingPayload, _read_json(path), path))


def _load_td(path: str) -> TransversalDesign:
    data = _read_json(path)
    if isinstance(data, dict) and "part_hyperplanes" in data:
        return _load_embedding(path).td
    return TransversalDesign.from_payload(_validate(TDPayload, data, path))


def _read_point(f, text: str) -> HomPoint:
    coords = _parse_json_arg(text, "--point")
    if not isinstance(coords, list):
        raise FormatError("--point must be a JSON list of coordinates")
    return point(f, *[decode(f, c) for c in coords])


def _dump(model: BaseModel) -> Dict[str, Any]:
    return model.model_dump(mode="json")


# ---------- catalog ----------
def cmd_catalog_list(args) -> Report:
    return {"presets": catalog_names()}, 0


def _group_report(g: GeneratedGroup) -> Dict[str, Any]:
    cert = require_certified(g)
    out = _dump(g.to_payload())
    out.update(order=cert.order, abelian=cert.abelian)
    return out


def cmd_catalog_gen(args) -> Report:
    return _group_report(catalog(args.name)), 0


def cmd_catalog_lemmas(args) -> Report:
    report = lemma_checks(catalog(args.name))
    failed = "fail" in (report.sum_zero, report.no_order_p, report.shift_rigid) or not report.order_nonzero
    return _dump(report), 1 if failed else 0


def cmd_catalog_build(args) -> Report:
    f = descriptor(args.descriptor)
    gens = [_parse_json_arg(g, "--gen") for g in args.gen]
    kind = GroupKind(args.kind)
    if kind is GroupKind.additive:
        g = additive_group(f, args.dim, [[decode(f, c) for c in v] for v in gens], args.name)
    elif kind is GroupKind.multiplicative:
        g = multiplicative_group(f, [decode(f, c) for c in gens], args.name)
    else:
        g = semidirect_group(f, [(decode(f, c), [decode(f, x) for x in v]) for c, v in gens], args.dim, args.name)
    return _group_report(g), 0


# ---------- embeddings ----------
def cmd_embed_construct(args) -> Report:
    g = _load_group(args.group)
    if args.type == "additive":
        e = emb.construct_additive(g)
    elif args.type == "multiplicative":
        e = emb.construct_multiplicative(g, args.dim or 2)
    else:
        e = emb.construct_semidirect(g, args.dim)
    return _dump(emb.to_payload(e)), 0


def cmd_embed_verify(args) -> Report:
    report = emb.verify_embedding(_load_embedding(args.file))
    return _dump(report), 0 if report.ok else 1


def cmd_embed_transversal_points(args) -> Report:
    e = _load_embedding(args.file)
    tp = emb.transversal_points(e)
    report = TransversalPointsReport(description=tp.description, count=len(tp.points), dg_size=tp.dg.size,
                                     points=[p.encode() for p in tp.points])
    if not args.brute:
        return _dump(report), 0
    brute = brute_transversal_points(e)
    agree = set(brute) == set(tp.points)
    report.brute_force = [p.encode() for p in brute]
    report.agree = agree
    if not agree:
        log.warning("formula and brute force disagree: %d vs %d points", len(tp.points), len(brute))
    return _dump(report), 0 if agree else 1


def cmd_embed_attach(args) -> Report:
    e = _load_embedding(args.file)
    out = emb.attach_transversal_point(e, _read_point(e.descriptor, args.point))
    return _dump(emb.to_payload(out)), 0


def cmd_embed_extend(args) -> Report:
    out = emb.extend_to_max_td(_load_embedding(args.file))
    return _dump(emb.to_payload(out)), 0


def cmd_embed_classify(args) -> Report:
    report = emb.classify(_load_embedding(args.file))
    return _dump(report), 0 if all(c.holds for c in report.conclusions) else 1


def cmd_embed_improper(args) -> Report:
    e = _load_embedding(args.file)
    report = emb.check_improper_transversal(e, _read_point(e.descriptor, args.point))
    return _dump(report), 0


def cmd_embed_extract(args) -> Report:
    e = _load_embedding(args.file)
    co = emb.extract_group(e)
    out = _group_report(co.group)
    out.update(frame=co.frame.value, base_points=list(co.base_points), loop_matches_group=co.isomorphic)
    return out, 0 if co.isomorphic else 1


# ---------- designs ----------
def _mols_squares(data: Any, source: str) -> List[LatinSquare]:
    return [LatinSquare.from_payload(p) for p in _validate(MOLSPayload, data, source).root]


def cmd_design_validate(args) -> Report:
    data = _read_json(args.file)
    if isinstance(data, list):
        squares = _mols_squares(data, args.file)
        for i, ls in enumerate(squares):
            v = validate_latin_square(ls)
            if v is not None:
                return {"kind": "mols", "ok": False, "square": i, "violation": _dump(v)}, 1
        return {"kind": "mols", "ok": True, "squares": len(squares)}, 0
    if isinstance(data, dict) and "cells" in data:
        v = validate_latin_square(LatinSquare.from_payload(_validate(LatinSquarePayload, data, args.file)))
        kind = "latin_square"
    else:
        v = validate_td(_load_td(args.file))
        kind = "td"
    if v is None:
        return {"kind": kind, "ok": True}, 0
    return {"kind": kind, "ok": False, "violation": _dump(v)}, 1


def cmd_design_transversals(args) -> Report:
    ls = LatinSquare.from_payload(_validate(LatinSquarePayload, _read_json(args.file), args.file))
    found = find_transversals(ls, limit=args.limit, jobs=args.jobs)
    return {"n": ls.n, "count": len(found), "transversals": [list(t.sigma) for t in found]}, 0


def cmd_design_mols_check(args) -> Report:
    data = _read_json(args.file)
    if isinstance(data, dict):
        squares = td_to_mols(_load_td(args.file))
    else:
        squares = _mols_squares(data, args.file)
    for i in range(len(squares)):
        for j in range(i + 1, len(squares)):
            ok, v = check_orthogonal(squares[i], squares[j])
            if not ok:
                return {"ok": False, "pair": [i, j], "violation": _dump(v)}, 1
    td = mols_to_td(squares)
    return {"ok": True, "squares": len(squares), "n": squares[0].n if squares else 0, "td_k": td.k}, 0


def cmd_loop_extract(args) -> Report:
    td = _load_td(args.file)
    loop = loop_operation(td, args.one1, args.one2)
    v = check_loop(loop)
    out = {
        "elements": list(loop.elements),
        "table": [list(r) for r in loop.table],
        "identity": loop.identity,
        "associative": loop.associative,
        "abelian": loop.abelian,
        "violation": None if v is None else _dump(v),
    }
    return out, 0 if v is None else 1


# ---------- oracle ----------
def cmd_oracle_pg(args) -> Report:
    return _dump(PGSpace.enumerate(args.q, args.d).report()), 0


def cmd_oracle_scan(args) -> Report:
    report = search_td_on_frame(PGSpace.enumerate(args.q, args.d), FrameShape(args.frame), args.n)
    return _dump(report), 0


def cmd_audit(args) -> Report:
    report = get_audit_payload(_read_json(args.file))
    return report, 0 if report["is_verified"] else 1


# ---------- parser ----------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tdembed", description="Embeddings of Latin squares and TD(k,n) in projective spaces")
    parser.add_argument("--jobs", type=int, default=SETTINGS.jobs, help="worker cap for parallel searches")
    parser.add_argument("--out", help="write the report to this file instead of stdout")
    parser.add_argument("--log-level", default=SETTINGS.log_level, help="stderr log level")
    areas = parser.add_subparsers(dest="area", required=True)

    def command(sub, name: str, handler: Callable, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.set_defaults(handler=handler)
        return p

    cat = areas.add_parser("catalog", help="finite groups of skew fields").add_subparsers(dest="command", required=True)
    command(cat, "list", cmd_catalog_list, "list preset names")
    command(cat, "gen", cmd_catalog_gen, "build and certify a preset").add_argument("name")
    command(cat, "lemmas", cmd_catalog_lemmas, "run the finite-subgroup lemma checks").add_argument("name")
    p = command(cat, "build", cmd_catalog_build, "generate a group from explicit generators")
    p.add_argument("--kind", choices=[k.value for k in GroupKind], required=True)
    p.add_argument("--descriptor", required=True)
    p.add_argument("--dim", type=int, default=0)
    p.add_argument("--gen", action="append", default=[], help="generator as JSON (repeatable)")
    p.add_argument("--name")

    em = areas.add_parser("embed", help="embeddings in P^d(D)").add_subparsers(dest="command", required=True)
    p = command(em, "construct", cmd_embed_construct, "embed a TD(3,n) from a group")
    p.add_argument("--type", choices=["additive", "multiplicative", "semidirect"], required=True)
    p.add_argument("--group", required=True, help="group JSON file or catalog preset")
    p.add_argument("--dim", type=int)
    command(em, "verify", cmd_embed_verify, "check every embedding axiom").add_argument("file")
    p = command(em, "transversal-points", cmd_embed_transversal_points, "transversal points of a concurrent embedding")
    p.add_argument("file")
    p.add_argument("--brute", action="store_true", help="cross-check against an exhaustive scan")
    p = command(em, "attach", cmd_embed_attach, "attach a transversal point and its partition")
    p.add_argument("file")
    p.add_argument("--point", required=True, help="coordinates as JSON")
    command(em, "extend", cmd_embed_extend, "add every part x_d = a x_(d+1), a in D_G").add_argument("file")
    command(em, "classify", cmd_embed_classify, "flat dimension and the rules it forces").add_argument("file")
    p = command(em, "improper", cmd_embed_improper, "check a transversal point of a triangle embedding")
    p.add_argument("file")
    p.add_argument("--point", required=True, help="coordinates as JSON")
    command(em, "extract", cmd_embed_extract, "read the group off canonical coordinates").add_argument("file")

    de = areas.add_parser("design", help="Latin squares, MOLS and TDs").add_subparsers(dest="command", required=True)
    command(de, "validate", cmd_design_validate, "validate a Latin square, MOLS set or TD").add_argument("file")
    p = command(de, "transversals", cmd_design_transversals, "all transversals of a Latin square")
    p.add_argument("file")
    p.add_argument("--limit", type=int)
    command(de, "mols-check", cmd_design_mols_check, "pairwise orthogonality of a MOLS set or TD").add_argument("file")

    lo = areas.add_parser("loop", help="the loop on the first part").add_subparsers(dest="command", required=True)
    p = command(lo, "extract", cmd_loop_extract, "Cayley table of the loop of a TD")
    p.add_argument("file")
    p.add_argument("--one1", type=int)
    p.add_argument("--one2", type=int)

    orc = areas.add_parser("oracle", help="exhaustive scans over PG(d,q)").add_subparsers(dest="command", required=True)
    p = command(orc, "pg", cmd_oracle_pg, "point and hyperplane counts of PG(d,q)")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--d", type=int, default=2)
    p = command(orc, "scan", cmd_oracle_scan, "all TD(3,n) on a frame of PG(2,q)")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--frame", choices=[s.value for s in FrameShape], required=True)
    p.add_argument("--n", type=int, required=True)

    command(areas, "audit", cmd_audit, "recompute the digest of an emitted report").add_argument("file")
    return parser


def configure_logging(level: str) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("[%(name)s] %(message)s"))
    root = logging.getLogger("tdembed")
    root.handlers[:] = [handler]
    root.setLevel(level.upper() if isinstance(logging.getLevelName(level.upper()), int) else logging.WARNING)
    root.propagate = False


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    if args.jobs < 1:
        log.warning("--jobs %d is below 1, using 1", args.jobs)
        args.jobs = 1
    try:
        report, code = args.handler(args)
    except TDEmbedError as e:
        log.error("%s: %s", type(e).__name__, e.detail)
        report, code = e.to_payload(), e.exit_code
    text = canonical_json(seal(report), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code
