"""``qcorr`` command-line interface.

Exit codes: 0 success, 1 structural-invariant failure, 2 usage or validation
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .discovery import SearchPoint, SearchSpec, search, verify_point
from .errors import ConventionRequired, InvalidParams, QCorrError, ReplayMismatch, StateIOError, ValidationError
from .pairwise import koashi_winter_residual, pair_quantities
from .qmat import QState, trace_distance
from .states import (
    NAMED_STATES,
    PRINTED_POINT,
    FamilyParams,
    counterexample,
    haar_ket3,
    load_state,
    named_state,
    purification6,
    reduce_purification,
    state_to_json,
)
from .tripartite import (
    BUILTIN_POLICIES,
    MEASURE_FIRST,
    REPORTED_VALUES,
    POSITIVE_GAP_TOL,
    REPRODUCTION_POLICY,
    Discrepancy,
    SidePolicy,
    TripartiteAnalysis,
    claim_chain,
)

EXIT_OK, EXIT_STRUCTURAL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

PURIFICATION_TOL = 1e-12
ORACLE_TOL = 1e-10
KW_TOL = 1e-4
COINCIDENCE_TOL = 1e-3
ORDERING_TOL = 1e-4

_PI_EXPR = re.compile(r"^\s*([+-]?)\s*(\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


class UsageError(ValidationError):
    pass


def parse_number(text: str) -> float:
    """Parse a real literal or a pi-expression such as ``3pi/10``, ``-pi/4``, ``2*pi``."""
    m = _PI_EXPR.match(text.lower())
    if m:
        sign, coef, den = m.groups()
        value = (int(coef) if coef and Fraction(coef).denominator == 1 else float(coef or 1)) * math.pi
        if den:
            value = value / (int(den) if Fraction(den).denominator == 1 else float(den))
        return -value if sign == "-" else value
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse number {text!r}") from None


def resolve_state(spec: str) -> tuple[QState, dict]:
    """A state from a JSON file path or ``name[:p1,p2,...]``."""
    path = Path(spec)
    if path.suffix == ".json" or path.exists():
        return load_state(path), {"source": "file", "path": str(path)}
    name, _, rest = spec.partition(":")
    params = [parse_number(x) for x in rest.split(",")] if rest else []
    return named_state(name, *params), {"source": "named", "name": name.lower(), "params": params}


def _is_printed_point(info: dict) -> bool:
    return (
        info.get("name") == "counterexample"
        and len(info.get("params", [])) == 4
        and all(abs(a - b) <= 1e-12 for a, b in zip(info["params"], PRINTED_POINT.as_tuple()))
    )


def envelope(args, payload, *, seed=None, policy: SidePolicy | None = None, discrepancies=(), timing=None):
    return {
        "tool": "qcorr",
        "version": __version__,
        "command": getattr(args, "argv", []),
        "seed": seed,
        "policy": None if policy is None else policy.to_dict(),
        "base": "bits",
        "payload": payload,
        "discrepancies": [d.to_dict() for d in discrepancies],
        "timing": timing or {},
    }


def _write_json(path: str | None, obj) -> None:
    if not path:
        return
    try:
        Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise StateIOError(f"cannot write {path}: {exc}") from exc


def _fmt(x: float) -> str:
    return f"{x:.6f}"


# commands -------------------------------------------------------------------------

def cmd_pairwise(args) -> int:
    state, info = resolve_state(args.state)
    pair = tuple(args.pair)
    if len(pair) != 2:
        raise UsageError("--pair needs two labels, e.g. ab")
    q = pair_quantities(state, pair)
    x, y = q.pair
    if args.measured in ("both", None):
        sides = [x, y]
    elif args.measured in ("first", "second"):
        sides = [x] if args.measured == "first" else [y]
    elif args.measured in pair:
        sides = [args.measured]
    else:
        raise UsageError(f"--measured must be one of {x}, {y}, first, second, both")

    print(f"pair {x}{y}  (bits)")
    print(f"  I            {_fmt(q.mutual_info)}")
    for side in sides:
        print(f"  J | meas {side}   {_fmt(q.j(side))}")
        print(f"  D | meas {side}   {_fmt(q.d(side))}")
    print(f"  C            {_fmt(q.concurrence)}")
    print(f"  E            {_fmt(q.eof)}")

    discrepancies = []
    if _is_printed_point(info):
        key = "".join(sorted(pair))
        if f"I_{key}" in REPORTED_VALUES:
            discrepancies.append(Discrepancy(f"I_{key}", q.mutual_info, REPORTED_VALUES[f"I_{key}"]))
        if key == "ac":
            discrepancies.append(Discrepancy("E_ac", q.eof, REPORTED_VALUES["E_ac"]))
        _print_discrepancies(discrepancies)
    payload = {"state": info, "measured": sides, "pair_quantities": q.to_dict()}
    _write_json(args.json, envelope(args, payload, discrepancies=discrepancies))
    return EXIT_OK


def cmd_tripartite(args) -> int:
    state, info = resolve_state(args.state)
    policy = SidePolicy.parse(args.policy)
    if args.def2_split and not args.convention:
        raise ConventionRequired("--def2-split needs --convention conv-singleton")
    report = TripartiteAnalysis(state).report(policy, args.convention)
    print(f"policy {policy.name}  (bits)")
    print(f"  T            {_fmt(report.total_information)}")
    print(f"  T2           {_fmt(report.t2)}  [{''.join(report.t2_pair)}]")
    print(f"  T3           {_fmt(report.t3)}")
    print(f"  J2           {_fmt(report.j2)}  [{''.join(report.j2_pair)}]")
    print(f"  D2           {_fmt(report.d2)}  [{''.join(report.d2_pair)}]")
    print(f"  def1 total   {_fmt(report.def1_total)}")
    if report.def1_split:
        print(f"    J3' / D3'  {_fmt(report.def1_split[0])} / {_fmt(report.def1_split[1])}")
    print(f"  def2 sum     {_fmt(report.def2_sum)}")
    if report.def2_split:
        print(f"    J3'' / D3'' {_fmt(report.def2_split[0])} / {_fmt(report.def2_split[1])}  ({report.convention})")
    print(f"  gap delta    {_fmt(report.gap_delta)}")
    payload = {"state": info, "report": report.to_dict()}
    _write_json(args.json, envelope(args, payload, policy=policy))
    return EXIT_OK


def _print_discrepancies(rows) -> None:
    if not rows:
        return
    print("  reported values (tolerance 0.02):")
    for d in rows:
        flag = "match" if d.within_tolerance else "MISMATCH"
        print(f"    {d.quantity:<5} computed {_fmt(d.computed)}  reported {d.reported:.2f}  "
              f"signed {d.signed:+.6f}  {flag}")


def coincidence_suite(seed: int, count: int = 200) -> dict:
    """Pure-state gap under MeasureFirst after ordering labels so that I(ab) >= I(ac) >= I(bc)."""
    from .discovery import canonical_relabel

    violations = []
    ordering_violations = []
    max_gap = 0.0
    for i in range(count):
        s = canonical_relabel(haar_ket3(seed, i).density())
        an = TripartiteAnalysis(s)
        gap = an.gap_delta(MEASURE_FIRST)
        max_gap = max(max_gap, abs(gap))
        d_ab = an.pair(("a", "b")).d("a")
        d_other = max(an.pair(("a", "c")).d("a"), an.pair(("b", "c")).d("b"))
        if abs(gap) > COINCIDENCE_TOL:
            violations.append({"index": i, "gap_delta": gap, "state": state_to_json(s)})
        if d_ab < d_other - ORDERING_TOL:
            ordering_violations.append({"index": i, "D_ab|a": d_ab, "max_other": d_other})
    return {
        "seed": seed,
        "count": count,
        "policy": MEASURE_FIRST.to_dict(),
        "max_abs_gap": max_gap,
        "violations": violations,
        "ordering_violations": ordering_violations,
        "passed": not violations,
    }


def koashi_winter_suite(seed: int, count: int = 100) -> dict:
    residuals = [koashi_winter_residual(haar_ket3(seed, i), ("a", "b")) for i in range(count)]
    worst = max(range(count), key=lambda i: abs(residuals[i]))
    return {
        "seed": seed,
        "count": count,
        "max_abs_residual": abs(residuals[worst]),
        "worst_index": worst,
        "passed": abs(residuals[worst]) <= KW_TOL,
    }


def purification_check(params: FamilyParams) -> dict:
    target = counterexample(params)
    out = {}
    for mode, literal in (("corrected", False), ("literal", True)):
        psi = purification6(params, literal=literal)
        out[mode] = {"norm": psi.norm, "trace_distance": trace_distance(reduce_purification(psi), target)}
    return out


def cmd_reproduce(args) -> int:
    t0 = time.perf_counter()
    verdict = claim_chain(PRINTED_POINT, REPRODUCTION_POLICY, compare_reported=True)
    pur = purification_check(PRINTED_POINT)
    kw = koashi_winter_suite(args.seed)
    coin = coincidence_suite(args.seed)

    # gap identity at the printed point, every built-in policy
    an = TripartiteAnalysis(counterexample(PRINTED_POINT))
    t2, _ = an.t2()
    gap_identity = {}
    for pol in BUILTIN_POLICIES:
        j2, _, d2, _, _ = an.j2_d2(pol)
        gap_identity[pol.name] = abs((an.def1(split=False)[0] - an.def2_sum(pol)) - (j2 + d2 - t2))

    structural = {
        "zero_discord_on_b": verdict.claim("zero_discord_on_b").holds,
        "gap_identity": max(gap_identity.values()) <= 1e-12,
        "purification_corrected": pur["corrected"]["trace_distance"] <= PURIFICATION_TOL,
        "oracle_agreement": all(o["abs_diff"] <= ORACLE_TOL for o in verdict.oracles.values()),
    }
    elapsed = time.perf_counter() - t0

    print("counterexample claim chain at (0.1, 3pi/10, 0.7, pi/5), policy", REPRODUCTION_POLICY.name)
    for c in verdict.claims:
        print(f"  [{'PASS' if c.holds else 'FAIL'}] {c.name}: "
              + ", ".join(f"{k}={_fmt(v) if isinstance(v, float) else v}" for k, v in c.values.items()))
    print(f"  overall: {verdict.overall}")
    _print_discrepancies(verdict.reported_comparison)
    print("closed-form oracles:")
    for k, o in verdict.oracles.items():
        print(f"  {k}: closed form {o['closed_form']:.12f}  computed {o['computed']:.12f}  |diff| {o['abs_diff']:.1e}")
    print("purification reduction (trace distance to the family state):")
    for mode, r in pur.items():
        print(f"  {mode:<9} {r['trace_distance']:.3e}  (norm {r['norm']:.15f})")
    print(f"Koashi-Winter residual over {kw['count']} pure states: max {kw['max_abs_residual']:.2e} "
          f"[{'PASS' if kw['passed'] else 'FAIL'}]")
    print(f"pure-state coincidence over {coin['count']} states (MeasureFirst, ordered labels): "
          f"max |gap| {coin['max_abs_gap']:.2e}, {len(coin['violations'])} above {COINCIDENCE_TOL:g}, "
          f"{len(coin['ordering_violations'])} discord-ordering violations "
          f"[{'PASS' if coin['passed'] else 'FAIL'}]")
    print("structural invariants: " + ", ".join(f"{k}={'ok' if v else 'FAILED'}" for k, v in structural.items()))

    payload = {
        "claim_chain": verdict.to_dict(),
        "purification": pur,
        "koashi_winter": kw,
        "pure_state_coincidence": coin,
        "gap_identity": gap_identity,
        "structural": structural,
    }
    if args.literal_purification:
        payload["literal_purification_reduced_state"] = state_to_json(
            reduce_purification(purification6(PRINTED_POINT, literal=True))
        )
    _write_json(
        args.json,
        envelope(args, payload, seed=args.seed, policy=REPRODUCTION_POLICY,
                 discrepancies=verdict.reported_comparison, timing={"seconds": elapsed}),
    )
    return EXIT_OK if all(structural.values()) else EXIT_STRUCTURAL


_MODE_POLICY_DEFAULT = {"family-grid": "reproduction", "family-random": "reproduction", "mixed-random": "first"}


def cmd_search(args) -> int:
    policy = SidePolicy.parse(args.policy or _MODE_POLICY_DEFAULT[args.mode])
    spec = SearchSpec(
        mode=args.mode,
        steps=args.steps,
        samples=args.samples,
        seed=args.seed,
        policy=policy,
        objective=args.objective,
        workers=args.threads,
        rank=args.rank,
        canonical_order=not args.no_canonical_order,
    )
    result = search(spec)
    print(f"{spec.mode}: {result.evaluations} evaluations, {result.valid_count} valid, "
          f"{result.wall_time:.1f} s")
    if result.no_valid_point:
        print("  no valid point")
    else:
        b = result.best
        print(f"  best index {b.index}: gap {_fmt(b.gap)}")
        if b.params is not None:
            print("  params " + ", ".join(f"{k}={v:.6f}" for k, v in b.params.to_dict().items()))
    print(f"  max |gap| {result.max_abs_gap:.6e} at index {result.max_abs_gap_index}")
    if spec.mode == "mixed-random":
        print(f"  {len(result.violations)} samples with |gap| > {POSITIVE_GAP_TOL:g}")
    _write_json(
        args.json,
        envelope(args, result.to_dict(), seed=spec.seed, policy=policy,
                 timing={"seconds": result.wall_time, "threads": spec.workers}),
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        obj = json.loads(Path(args.report).read_text(encoding="utf-8"))
    except OSError as exc:
        raise StateIOError(str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid JSON: {exc}") from exc
    payload = obj.get("payload", obj)
    if not payload.get("best"):
        print("report has no best point to verify")
        return EXIT_OK
    policy_obj = payload["spec"]["policy"]
    policy = SidePolicy(policy_obj["kind"]) if policy_obj["kind"] != "explicit" else SidePolicy.explicit(policy_obj["map"])
    point = SearchPoint.from_dict(payload["best"])
    try:
        verdict = verify_point(point, policy)
    except ReplayMismatch as exc:
        print(f"replay mismatch: {exc}", file=sys.stderr)
        return EXIT_STRUCTURAL
    print(f"replayed index {point.index}: stored gap {point.gap:.12f}, recomputed {verdict.gap:.12f}")
    if hasattr(verdict, "claims"):
        print(f"  overall {verdict.overall}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcorr",
        description="Bipartite and tripartite quantum/classical correlations of few-qubit states.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="named states:\n" + "\n".join(f"  {k:<28} {v}" for k, v in NAMED_STATES.items()),
    )
    parser.add_argument("--version", action="version", version=f"qcorr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pairwise", help="I, J, D, C, E for one pair")
    p.add_argument("--state", required=True, help="state JSON file or name[:params]")
    p.add_argument("--pair", default="ab")
    p.add_argument("--measured", default="both", help="a label of the pair, first, second or both")
    p.add_argument("--json")
    p.set_defaults(func=cmd_pairwise)

    p = sub.add_parser("tripartite", help="full tripartite report")
    p.add_argument("--state", required=True)
    p.add_argument("--policy", required=True,
                   help="first | second | min | max | reproduction | explicit map like ab=b,bc=b,ac=min")
    p.add_argument("--convention", help="tripartite-total convention for the subtractive split (conv-singleton)")
    p.add_argument("--def2-split", action="store_true", help="require the subtractive split")
    p.add_argument("--json")
    p.set_defaults(func=cmd_tripartite)

    p = sub.add_parser("reproduce", help="run the full counterexample pipeline")
    p.add_argument("--json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--literal-purification", action="store_true",
                   help="also emit the reduced state of the printed-coefficient purification")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("search", help="search for disagreement witnesses")
    p.add_argument("--mode", choices=["family-grid", "family-random", "mixed-random"], default="family-grid")
    p.add_argument("--steps", type=int, default=9)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy")
    p.add_argument("--objective", choices=["max-gap", "first-valid"], default="max-gap")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--no-canonical-order", action="store_true",
                   help="mixed-random: keep sampled label order instead of ordering by pairwise MI")
    p.add_argument("--json")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", help="replay the best point of a search report")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    args.argv = argv
    try:
        return args.func(args)
    except StateIOError as exc:
        print(f"qcorr: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, InvalidParams) as exc:
        print(f"qcorr: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QCorrError as exc:
        print(f"qcorr: internal invariant failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STRUCTURAL


if __name__ == "__main__":
    sys.exit(main())
