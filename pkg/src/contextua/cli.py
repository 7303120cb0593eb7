"""Command-line front end.

Subcommands cover the derivation pipeline (derive, vertices), membership
and facet queries, the two quantifiers, grid sweeps with figure output,
vertex transport, and validation of measurement-map files.  Exit codes:
0 success, 1 invalid input, 2 solver failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .imm import (
    TransportError,
    imm_from_json,
    imm_to_json,
    is_scenario_preserving,
    reduced_map,
    structural_checks,
    validate_imm,
    vertex_transport,
)
from .polytope import (
    VertexPolytope,
    facet_check,
    facet_member,
    kcbs_nc_polytope,
    kcbs_nd_polytope,
    member,
)
from .quantifiers import (
    IcConfig,
    contextual_fraction_lp,
    invasiveness_cost,
    sweep,
    sweep_csv,
)
from .scenario import (
    EmbeddingError,
    ScenarioError,
    derive_embedding,
    deterministic_vertices,
    embedding_to_json,
    format_rational,
    kcbs_embedding,
    kcbs_scenario,
    scenario_from_json,
)

DEFAULT_SEED = 0


class CliError(Exception):
    """Invalid input; maps to exit code 1."""


class SolverFailure(Exception):
    """A solver gave up; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):                      # argparse default exits 2
        raise CliError(message)


# ---------------------------------------------------------------------------
# Input helpers


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc


def _load_json(path: str):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(
            f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}:"
            f" {exc.msg}") from exc


def _load_q(path: str, expected: int):
    doc = _load_json(path)
    if isinstance(doc, dict):
        if "q" not in doc:
            raise CliError(f"{path}: expected a list or an object with field 'q'")
        doc = doc["q"]
    if not isinstance(doc, list):
        raise CliError(f"{path}: field 'q' must be a list of numbers")
    try:
        q = [Fraction(x) if isinstance(x, str) else Fraction(x) for x in doc]
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise CliError(f"{path}: bad entry in q: {exc}") from exc
    if len(q) != expected:
        raise CliError(
            f"{path}: q has {len(q)} entries; this scenario expects {expected}")
    return q


def _load_scenario(name: str):
    """Returns (scenario, embedding, is_builtin_kcbs)."""
    if name == "kcbs":
        return kcbs_scenario(), kcbs_embedding(), True
    doc_text = _read_text(name)
    try:
        json.loads(doc_text)
    except json.JSONDecodeError as exc:
        raise CliError(
            f"{name}: malformed JSON at line {exc.lineno} column {exc.colno}:"
            f" {exc.msg}") from exc
    try:
        sc = scenario_from_json(doc_text)
        emb = derive_embedding(sc)
    except (ScenarioError, EmbeddingError) as exc:
        raise CliError(f"{name}: {exc}") from exc
    return sc, emb, False


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("CONTEXTUA_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise CliError(f"CONTEXTUA_SEED must be an integer, got {env!r}") from exc
    return DEFAULT_SEED


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


def _emit_json(doc, out: str | None) -> None:
    _emit(json.dumps(doc, indent=2), out)


# ---------------------------------------------------------------------------
# Subcommand bodies


def _cmd_derive(args) -> int:
    sc, builtin_emb, is_kcbs = _load_scenario(args.scenario)
    try:
        emb = derive_embedding(sc, choice=args.choice)
    except EmbeddingError as exc:
        raise SolverFailure(str(exc)) from exc
    if is_kcbs and args.choice == "first" and emb != builtin_emb:
        raise SolverFailure(
            "derived embedding disagrees with the built-in kcbs matrices")
    _emit(embedding_to_json(emb), args.output)
    return 0


def _cmd_vertices(args) -> int:
    sc, emb, _ = _load_scenario(args.scenario)
    dv = deterministic_vertices(sc, emb)
    doc = {
        "count": len(dv.distinct),
        "assignments": [list(a) for a in dv.assignments],
        "vertices": [[format_rational(x) for x in v] for v in dv.distinct],
    }
    _emit_json(doc, args.output)
    return 0


def _membership_doc(poly: VertexPolytope, q, tol: float):
    res = member(poly, q, tol=tol)
    doc = {"status": res.status}
    doc["weights"] = None if res.weights is None else [float(x) for x in res.weights]
    if res.certificate is not None:
        h, h0 = res.certificate
        doc["certificate"] = {"h": [float(x) for x in h], "h0": float(h0),
                              "margin": res.margin}
    else:
        doc["certificate"] = None
    return doc


def _cmd_membership(args) -> int:
    sc, emb, is_kcbs = _load_scenario(args.scenario)
    q = _load_q(args.q, len(emb.indep_indices))
    if is_kcbs:
        nc, _ = kcbs_nc_polytope()
        doc = {
            "noncontextual": _membership_doc(nc, q, args.tol),
            "non_disturbance": _membership_doc(kcbs_nd_polytope(), q, args.tol),
        }
    else:
        nc = VertexPolytope(deterministic_vertices(sc, emb).distinct)
        doc = {"noncontextual": _membership_doc(nc, q, args.tol)}
    _emit_json(doc, args.output)
    return 0


def _cmd_facets(args) -> int:
    if args.scenario != "kcbs":
        raise CliError("facet data is available for the built-in kcbs scenario only")
    _, fs = kcbs_nc_polytope()
    q = _load_q(args.q, 10)
    slacks = facet_check(fs, q)
    doc = {
        "status": facet_member(fs, q, tol=args.tol),
        "slacks": [float(s) for s in slacks],
        "violated": [i + 1 for i, s in enumerate(slacks) if s > args.tol],
    }
    _emit_json(doc, args.output)
    return 0


def _family_q(args):
    from .quantum_kcbs import model_q

    has_pair = args.lam is not None and args.a is not None
    if args.q is not None:
        if args.lam is not None or args.a is not None:
            raise CliError("give either --q or the pair --lambda/--a, not both")
        return _load_q(args.q, 10)
    if not has_pair:
        raise CliError("either --q FILE or both --lambda and --a are required")
    if not (0.0 <= args.lam <= 1.0 and 0.0 <= args.a <= 1.0):
        raise CliError("--lambda and --a must lie in [0, 1]")
    return [float(x) for x in model_q(args.lam, args.a)]


def _cmd_ic(args) -> int:
    if args.scenario != "kcbs":
        raise CliError("the invasiveness cost runs on the built-in kcbs scenario only")
    from .quantum_kcbs import kcbs_value

    q = _family_q(args)
    cfg = IcConfig(starts=args.starts, seed=_resolve_seed(args),
                   feas_tol=args.tol)
    try:
        res = invasiveness_cost(q, cfg)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if res.status == "failed":
        raise SolverFailure("no start produced a feasible witness")
    doc = {
        "value": res.value,
        "kcbs_value": float(kcbs_value(q)),
        "residual": res.residual,
        "status": res.status,
        "membership": res.membership,
        "upper_bound": res.upper_bound,
        "lower_bound": res.lower_bound,
        "weights": None if res.weights is None
        else [float(x) for x in res.weights],
        "witness": None if res.witness is None
        else json.loads(imm_to_json(res.witness)),
    }
    _emit_json(doc, args.output)
    return 0


def _cmd_cf(args) -> int:
    if args.scenario != "kcbs":
        raise CliError("the contextual fraction runs on the built-in kcbs scenario only")
    from .quantum_kcbs import kcbs_value

    q = _family_q(args)
    try:
        res = contextual_fraction_lp(q)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    except RuntimeError as exc:
        raise SolverFailure(str(exc)) from exc
    doc = {
        "value": res.value,
        "kcbs_value": float(kcbs_value(q)),
        "formula_value": res.formula_value,
        "max_facet_index": res.max_facet_index,
        "lp_weights": [float(x) for x in res.lp_weights],
    }
    _emit_json(doc, args.output)
    return 0


def _parse_grid(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise CliError(f"--grid expects NxM, got {text!r}")
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise CliError(f"--grid expects NxM with integers, got {text!r}") from exc
    if n < 1 or m < 1:
        raise CliError("--grid dimensions must be at least 1")
    return n, m


def _cmd_sweep(args) -> int:
    if args.scenario != "kcbs":
        raise CliError("sweep runs on the built-in kcbs scenario only")
    n, m = _parse_grid(args.grid)
    lams = [i / (n - 1) if n > 1 else 1.0 for i in range(n)]
    avals = [j / (m - 1) if m > 1 else 1.0 for j in range(m)]
    cfg = IcConfig(starts=args.starts, seed=_resolve_seed(args))
    table = sweep(lams, avals, which=args.which, cfg=cfg,
                  cut_starts=args.cut_starts)
    out_path = Path(args.output)
    if args.format == "csv":
        out_path.write_text(sweep_csv(table))
    else:
        doc = [{"lambda": c.lam, "a": c.a, "kcbs_value": c.kcbs, "ic": c.ic,
                "cf": c.cf, "ic_status": c.ic_status,
                "ic_residual": c.ic_residual} for c in table.cells]
        out_path.write_text(json.dumps(doc, indent=2) + "\n")
    written = [out_path]
    if not args.no_figures:
        from .figures import render_sweep_figures

        written += render_sweep_figures(table, out_path.parent,
                                        stem=out_path.stem)
    failed = sum(1 for c in table.cells if c.ic_status == "failed")
    for p in written:
        print(p)
    if failed:
        print(f"warning: {failed} cell(s) failed", file=sys.stderr)
        return 2
    return 0


def _cmd_transport(args) -> int:
    if not (1 <= args.src <= 48 and 1 <= args.dst <= 48):
        raise CliError("--from and --to must be vertex indices in 1..48")
    try:
        w = vertex_transport(args.src, args.dst)
    except TransportError as exc:
        raise SolverFailure(str(exc)) from exc
    emb = kcbs_embedding()
    nd = kcbs_nd_polytope()
    rm = reduced_map(w, emb)
    import numpy as np

    e_a = np.array([float(x) for x in nd.vertices[args.src - 1]])
    e_b = np.array([float(x) for x in nd.vertices[args.dst - 1]])
    residual = float(np.max(np.abs(rm.z @ e_a + rm.v - e_b)))
    doc = {
        "from": args.src,
        "to": args.dst,
        "residual": residual,
        "scenario_preserving": bool(is_scenario_preserving(w, emb).ok),
        "witness": json.loads(imm_to_json(w)),
    }
    _emit_json(doc, args.output)
    return 0


def _cmd_check_imm(args) -> int:
    text = _read_text(args.file)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(
            f"{args.file}: malformed JSON at line {exc.lineno} column"
            f" {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or "blocks" not in doc:
        raise CliError(f"{args.file}: expected an object with field 'blocks'")
    try:
        w = imm_from_json(text)
    except (ValueError, TypeError, IndexError) as exc:
        raise CliError(f"{args.file}: bad map data: {exc}") from exc
    sizes = tuple(len(b) for b in w.blocks)
    if sizes != (4, 4, 4, 4, 4):
        raise CliError(
            f"{args.file}: block sizes {sizes} do not match the kcbs scenario"
            " (five 4x4 blocks)")
    val = validate_imm(w, tol=args.tol)
    pres = is_scenario_preserving(w, kcbs_embedding(), tol=args.tol)
    struct = structural_checks(w, tol=max(args.tol, 1e-12))
    report = {
        "valid": val.ok,
        "min_entry": val.min_entry,
        "column_sum_error": val.colsum_error,
        "scenario_preserving": pres.ok,
        "preservation_residuals": {k: v for k, v in pres.residuals},
        "identity_blocks": list(struct.identity_blocks),
        "non_identity_contiguous": struct.contiguous,
        "structural_max_residual": struct.max_residual,
    }
    _emit_json(report, args.output)
    return 0 if (val.ok and pres.ok) else 1


# ---------------------------------------------------------------------------
# Parser assembly


def build_parser() -> _Parser:
    parser = _Parser(prog="contextua",
                     description="Contextuality toolkit for marginal scenarios")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    def common(p, scenario=True, output=True, tol=True):
        if scenario:
            p.add_argument("--scenario", default="kcbs",
                           help="built-in name 'kcbs' or a scenario JSON path")
        if output:
            p.add_argument("--output", "-o", default=None,
                           help="output path (default: stdout)")
        if tol:
            p.add_argument("--tol", type=float, default=1e-9,
                           help="numeric tolerance")

    p = sub.add_parser("derive", help="emit the affine embedding (M, V, T)")
    common(p)
    p.add_argument("--choice", choices=("first", "last"), default="first",
                   help="independent-coordinate selection rule")
    p.set_defaults(func=_cmd_derive)

    p = sub.add_parser("vertices", help="emit the deterministic vertices")
    common(p)
    p.set_defaults(func=_cmd_vertices)

    p = sub.add_parser("membership", help="polytope membership of a vector")
    common(p)
    p.add_argument("--q", required=True, help="JSON file with the vector")
    p.set_defaults(func=_cmd_membership)

    p = sub.add_parser("facets", help="facet slacks of a vector")
    common(p)
    p.add_argument("--q", required=True, help="JSON file with the vector")
    p.set_defaults(func=_cmd_facets)

    for name, func, helptext in (
            ("ic", _cmd_ic, "invasiveness cost of a point"),
            ("cf", _cmd_cf, "contextual fraction of a point")):
        p = sub.add_parser(name, help=helptext)
        common(p, tol=False)
        p.add_argument("--q", default=None, help="JSON file with the vector")
        p.add_argument("--lambda", dest="lam", type=float, default=None,
                       help="mixing parameter of the qutrit family")
        p.add_argument("--a", type=float, default=None,
                       help="state parameter of the qutrit family")
        p.add_argument("--tol", type=float, default=1e-6,
                       help="witness feasibility tolerance")
        if name == "ic":
            p.add_argument("--starts", type=int, default=64,
                           help="multistart count")
            p.add_argument("--seed", type=int, default=None,
                           help="solver seed (default CONTEXTUA_SEED or 0)")
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="quantifier sweep over the (lambda, a) grid")
    common(p, output=False, tol=False)
    p.add_argument("--grid", required=True, help="grid size NxM")
    p.add_argument("--which", choices=("ic", "cf", "both"), default="both")
    p.add_argument("--starts", type=int, default=16,
                   help="multistarts per interior cell")
    p.add_argument("--cut-starts", type=int, default=64,
                   help="multistarts on the two cut lines")
    p.add_argument("--seed", type=int, default=None,
                   help="sweep seed (default CONTEXTUA_SEED or 0)")
    p.add_argument("--output", "-o", default="sweep.csv",
                   help="table path; figures land beside it")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--no-figures", action="store_true",
                   help="skip PNG rendering")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("transport", help="map one vertex to another")
    common(p, scenario=False, tol=False)
    p.add_argument("--from", dest="src", type=int, required=True,
                   help="source vertex index (1-based)")
    p.add_argument("--to", dest="dst", type=int, required=True,
                   help="target vertex index (1-based)")
    p.set_defaults(func=_cmd_transport)

    p = sub.add_parser("check-imm", help="validate a measurement-map JSON file")
    common(p, scenario=False)
    p.add_argument("--file", required=True, help="map JSON path")
    p.set_defaults(func=_cmd_check_imm)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        code = args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return code


if __name__ == "__main__":
    sys.exit(main())
