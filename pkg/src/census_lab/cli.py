"""Command line front end.

Exit codes: 0 success, 1 identity mismatch, 2 usage or domain error,
3 resource cap exceeded, 4 statistical or trial-budget failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import __version__
from .asymptotics import compare_table, log_asymptotic, parse_l_rule
from .census import count_connected, max_complexity
from .config import current_caps
from .errors import (
    AcceptanceTooLow, BudgetExhausted, CapExceeded, CensusLabError, DomainError,
)
from .montecarlo import (
    estimate_a3, estimate_esc_left, estimate_esc_right, estimate_prob_tree, fresh_seed,
    sample_mstar_clt,
)
from .sampler import default_tilt, sample_connected_graphs
from .tilt import classify_regime, solve_tilt
from .walk import mstar_distribution, prob_tree_exact, survival_probability, verify_identity

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_CAP, EXIT_STAT = 0, 1, 2, 3, 4
TABLE_HEADER = ["k", "l", "log_exact", "log_asymptotic", "rel_log_error", "regime"]


def parse_p(text: str):
    """'a/b' or an integer gives an exact Fraction; a decimal gives a float."""
    text = text.strip()
    try:
        if "/" in text or text.isdigit():
            value = Fraction(text)
        else:
            value = float(text)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"cannot parse tilt {text!r}") from None
    if not 0 < value <= 1:
        raise DomainError(f"tilt must lie in (0, 1], got {text}")
    return value


def parse_p_exact(text: str) -> Fraction:
    value = parse_p(text)
    return value if isinstance(value, Fraction) else Fraction(text.strip())


def _int_list(text: str):
    return [int(x) for x in text.split(",") if x.strip()]


def _header(seed=None, mode="exact", **params):
    return {"tool": "census-lab", "version": __version__, "seed": seed,
            "arithmetic_mode": mode, "params": params}


def _emit(doc, out):
    out.write(json.dumps(doc, indent=2, default=str) + "\n")


def _fmt(x):
    return str(x) if isinstance(x, Fraction) else x


# -- subcommands ----------------------------------------------------------------

def cmd_count(args, out):
    k, l = args.k, args.l
    if k < 1:
        raise DomainError("k must be positive")
    caps = current_caps()
    exact = None
    within = k <= caps.census_vertices and k - 1 + l <= caps.census_edges
    if not args.asymptotic or within or l <= 0 or l > max_complexity(k):
        exact = str(count_connected(k, l))
    log_asym, regime = None, None
    if k >= 2 and 1 <= l <= max_complexity(k):
        regime = classify_regime(k, l).name
    if args.asymptotic and k >= 2 and 0 <= l <= max_complexity(k):
        log_asym = log_asymptotic(k, l).log_value
    doc = _header(mode="exact")
    doc.update({"k": k, "l": l, "exact": exact, "log_asymptotic": log_asym, "regime": regime})
    _emit(doc, out)
    return EXIT_OK


def cmd_verify_identity(args, out):
    ps = [parse_p_exact(x) for x in args.p_list.split(",") if x.strip()]
    if not ps:
        raise DomainError("empty p list")
    if args.k_max < 2:
        raise DomainError("k_max must be at least 2")
    rows = []
    for p in ps:
        for k in range(2, args.k_max + 1):
            dist = mstar_distribution(k, p, mode="exact")
            for l in range(max_complexity(k) + 1):
                rows.append(verify_identity(k, l, p, dist=dist))
    all_equal = all(r.equal for r in rows)
    fields = ["k", "l", "p", "a1", "a2", "a3", "lhs", "rhs", "equal"]
    if args.format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(fields)
        for r in rows:
            writer.writerow([_fmt(getattr(r, f)) for f in fields])
    else:
        doc = _header(mode="exact", k_max=args.k_max, p_list=[str(p) for p in ps])
        doc["rows"] = [{f: _fmt(getattr(r, f)) for f in fields} for r in rows]
        doc["all_equal"] = all_equal
        doc["failures"] = sum(not r.equal for r in rows)
        _emit(doc, out)
    return EXIT_OK if all_equal else EXIT_MISMATCH


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise DomainError(f"simulate {args.target} needs --{' --'.join(missing)}")


def cmd_simulate(args, out):
    seed = fresh_seed() if args.seed is None else args.seed
    target = args.target
    extra = {}
    if target == "tree":
        _need(args, "k", "p")
        p = parse_p(args.p)
        est = estimate_prob_tree(args.k, p, args.samples, seed, args.workers)
        if args.k <= current_caps().float_tree_k and args.k <= 2000:
            extra["reference"] = prob_tree_exact(args.k, float(p))
        result = est.to_dict()
    elif target in ("esc-left", "esc-right"):
        _need(args, "L")
        if args.lam is None and args.eps is None:
            raise DomainError(f"simulate {target} needs --lam or --eps")
        sign = 1 if target == "esc-left" else -1
        lam = args.lam if args.lam is not None else 1 + sign * args.eps
        if target == "esc-left":
            est = estimate_esc_left(lam, args.L, args.samples, seed, args.workers)
            extra["reference"] = survival_probability(lam)
        else:
            est = estimate_esc_right(lam, args.L, args.samples, seed, args.workers)
            if 0 < 1 - lam < 1:
                extra["reference"] = 1 - lam
        result = est.to_dict()
    elif target == "mstar":
        _need(args, "k", "p")
        p = parse_p(args.p)
        grid = [float(u) for u in args.u_grid.split(",") if u.strip()]
        result = sample_mstar_clt(args.k, p, args.samples, grid, seed, args.workers).to_dict()
        result["params"] = {"k": args.k, "p": str(p), "c": float(p) * args.k,
                            "epsilon": float(p) * args.k / 2}
    else:  # a3
        _need(args, "k", "l")
        p = parse_p(args.p) if args.p is not None else solve_tilt(args.k, args.l)
        est = estimate_a3(args.k, p, args.l, args.samples, seed, args.workers)
        result = est.to_dict()
    mode = "exact" if args.p is not None and isinstance(parse_p(args.p), Fraction) else "float"
    doc = _header(seed=seed, mode=mode, target=target, samples=args.samples,
                  workers=args.workers)
    doc["result"] = result
    doc.update(extra)
    _emit(doc, out)
    return EXIT_OK


def cmd_table(args, out):
    ks = _int_list(args.k_list)
    rule = parse_l_rule(args.l_rule)
    rows = compare_table(ks, rule)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TABLE_HEADER)
    for r in rows:
        writer.writerow([r.k, r.l, repr(r.log_exact), repr(r.log_asymptotic),
                         repr(r.rel_log_error), r.regime])
    return EXIT_OK


def cmd_sample_graph(args, out):
    seed = fresh_seed() if args.seed is None else args.seed
    p = float(parse_p(args.p)) if args.p is not None else default_tilt(args.k, args.l)
    graphs = sample_connected_graphs(args.k, args.l, args.count, seed=seed, p=p,
                                     workers=args.workers)
    if args.format == "json":
        doc = _header(seed=seed, mode="float", k=args.k, l=args.l, p=p, count=args.count,
                      workers=args.workers)
        doc["graphs"] = [g.to_dict() for g in graphs]
        _emit(doc, out)
    else:
        out.write("\n\n".join(g.to_edge_list() for g in graphs) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="census-lab",
                                     description="Connected graph counts by complexity.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="exact (and asymptotic) C(k, l)")
    p.add_argument("k", type=int)
    p.add_argument("l", type=int)
    p.add_argument("--asymptotic", action="store_true")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("verify-identity", help="check the counting identity exactly")
    p.add_argument("k_max", type=int)
    p.add_argument("p_list", help="comma separated tilts, e.g. 1/4,1/2,3/4")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_verify_identity)

    p = sub.add_parser("simulate", help="Monte Carlo estimators")
    p.add_argument("target", choices=["tree", "esc-left", "esc-right", "mstar", "a3"])
    p.add_argument("--k", type=int)
    p.add_argument("--p")
    p.add_argument("--l", type=int)
    p.add_argument("--lam", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--L", type=int)
    p.add_argument("--u-grid", default="-1,0,1")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("table", help="exact vs asymptotic log counts as CSV")
    p.add_argument("--k-list", default="")
    p.add_argument("--l-rule", default="pow:0.4")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("sample-graph", help="uniform random connected graphs")
    p.add_argument("k", type=int)
    p.add_argument("l", type=int)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--p")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=["edgelist", "json"], default="edgelist")
    p.set_defaults(func=cmd_sample_graph)
    return parser


def _glue_grid(argv):
    """Let ``--u-grid -1,0,1`` through; argparse would take -1,0,1 for a flag."""
    argv = list(sys.argv[1:] if argv is None else argv)
    out = []
    i = 0
    while i < len(argv):
        if argv[i] == "--u-grid" and i + 1 < len(argv):
            out.append(f"--u-grid={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(_glue_grid(argv))
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except (AcceptanceTooLow, BudgetExhausted) as exc:
        info = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, AcceptanceTooLow):
            info.update(pilot_draws=exc.pilot_draws, pilot_accepted=exc.pilot_accepted)
        print(json.dumps(info), file=sys.stderr)
        return EXIT_STAT
    except CapExceeded as exc:
        print(f"census-lab: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (DomainError, CensusLabError, ValueError) as exc:
        print(f"census-lab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
