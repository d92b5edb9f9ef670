"""Command-line front end: one subcommand per module, reports as JSON, CSV or text.

Exit status: 0 when every check passes, 1 when a check fails (an inequality
is violated or a result differs from the committed golden data), 2 for
usage and budget errors.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import os
import sys
from fractions import Fraction

import mpmath

from . import BudgetExceeded, HypothesisError, __version__

EXIT_OK, EXIT_FINDING, EXIT_USAGE = 0, 1, 2
LITERAL_N_MAX = 10**18
WORKERS_ENV = "RGVERIFY_WORKERS"


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------------
# Argument parsing.


def exact(text: str) -> Fraction:
    """Parse a decimal (``0.01``, ``1e18``, ``3/7``) exactly."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exact decimal: {text!r}")


def exact_int(text: str) -> int:
    q = exact(text)
    if q.denominator != 1:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(q)


def positive_int(text: str) -> int:
    n = exact_int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def precision(text: str) -> int:
    n = exact_int(text)
    if n < 30:
        raise argparse.ArgumentTypeError("precision must be >= 30 digits")
    return n


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(1, n)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv", "tty"], default="json")
    common.add_argument("--precision", type=precision, default=40, help="decimal digits (>= 30)")
    common.add_argument("--workers", type=positive_int, default=None, help=f"default from ${WORKERS_ENV} or 1")
    common.add_argument("--budget", type=positive_int, default=None, help="work budget (module default if omitted)")

    size = argparse.ArgumentParser(add_help=False)
    g = size.add_mutually_exclusive_group()
    g.add_argument("--n", type=exact_int, help=f"exact target, at most {LITERAL_N_MAX}")
    g.add_argument("--log-n", type=exact, help="log N as a decimal")
    g.add_argument("--loglog-n", type=exact, help="log log N as a decimal")

    ap = argparse.ArgumentParser(prog="rgverify", description="Repunit coincidence verification toolkit.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("solve", parents=[common], help="all representations of N")
    p.add_argument("--n", type=exact_int, required=True)
    p.add_argument("--min-m", type=int, choices=[2, 3], default=2)
    p.add_argument("--prime-only", action="store_true")

    p = sub.add_parser("coincidence", parents=[common], help="values with two length->=3 representations")
    p.add_argument("--base-limit", type=exact_int, default=10**3)
    p.add_argument("--value-cap", type=exact_int, default=10**18)

    p = sub.add_parser("certify", parents=[common, size], help="derivative structure and tabulated constants")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--table1", action="store_true")
    mode.add_argument("--ptable", action="store_true")
    mode.add_argument("--lemma31", action="store_true")
    mode.add_argument("--findings", action="store_true")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--m", type=exact, default=Fraction(10**5), help="evaluation point x for --lemma31")
    p.add_argument("--evidence", action="store_true", help="attach evidence to --findings (JSON only)")

    p = sub.add_parser("lattice", parents=[common], help="integers in [M, 2M] close to a curve")
    p.add_argument("--family", choices=["f_N", "power", "xlogx"], default="f_N")
    p.add_argument("--n", type=exact_int, help="N for the f_N family")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=1.5)
    p.add_argument("--m", type=exact, help="block start M")
    p.add_argument("--delta", type=exact)
    p.add_argument("--k", type=int, default=None, help="derivative order for the counting bound")
    p.add_argument("--random", type=positive_int, default=None, help="run this many randomized soundness cases")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("linform", parents=[common, size], help="linear forms from pairs of representations")
    p.add_argument("--min-m", type=int, choices=[2, 3], default=2)

    p = sub.add_parser("bounds", parents=[common, size], help="regime bounds for the reciprocal sums")
    p.add_argument("--theorem", choices=["1", "2", "both"], default="both")
    p.add_argument("--min-m", type=int, choices=[2, 3], default=2)
    p.add_argument("--prime-only", action="store_true", help="with --n, the exact tail over prime bases")
    p.add_argument("--sweep", metavar="CSV", help="write a log log N sweep to this file")
    p.add_argument("--points", type=positive_int, default=10_000)

    p = sub.add_parser("multdep", parents=[common], help="multiplicative dependence of (a, b, (b-1)/(a-1))")
    p.add_argument("--limit", type=exact_int, default=10**4)
    p.add_argument("--verify-known", action="store_true")
    p.add_argument("--pair", type=exact_int, nargs=2, metavar=("A", "B"))
    return ap


# ----------------------------------------------------------------------------
# Helpers.


def _num(x):
    """JSON-safe scalar."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return str(x)
    return float(x)


def _row(d: dict) -> dict:
    return {k: _num(v) for k, v in d.items()}


def _log_n(args, required: bool = True):
    from .analytic import LogScale

    if getattr(args, "n", None) is not None:
        if args.n > LITERAL_N_MAX:
            raise UsageError(f"--n above {LITERAL_N_MAX}; pass --log-n or --loglog-n instead")
        if args.n < 3:
            raise UsageError("--n must be >= 3")
        return LogScale.from_n(args.n)
    if getattr(args, "log_n", None) is not None:
        return LogScale.from_log(mpmath.mpf(args.log_n.numerator) / args.log_n.denominator)
    if getattr(args, "loglog_n", None) is not None:
        return LogScale.from_loglog(mpmath.mpf(args.loglog_n.numerator) / args.loglog_n.denominator)
    if required:
        raise UsageError("one of --n, --log-n, --loglog-n is required")
    return None


def _mpf(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


def _budget(args, default):
    return args.budget if args.budget is not None else default


# ----------------------------------------------------------------------------
# Subcommands.  Each returns (ok, rows, extra).


def cmd_solve(args):
    from .repunit import reciprocal_tail_sum, solutions_for

    if args.n > LITERAL_N_MAX or args.n < 3:
        raise UsageError(f"--n must lie in [3, {LITERAL_N_MAX}]")
    sols = solutions_for(args.n, args.min_m, args.prime_only)
    rows = [{"base": s.base, "length": s.length} for s in sols]
    tail = reciprocal_tail_sum(args.n, args.min_m, args.prime_only)
    items = [[s.base, s.length] for s in sols]
    return True, rows, {"target": args.n, "items": items, "tail_sum": str(tail)}


KNOWN_COINCIDENCES = {31, 8191}


def cmd_coincidence(args):
    from .repunit import DEFAULT_BUDGET, coincidence_search

    recs = coincidence_search(args.base_limit, args.value_cap, _budget(args, DEFAULT_BUDGET), args.workers)
    rows = [
        {"value": r.value, "representations": " ".join(f"{b}:{m}" for b, m in r.representations.pairs())}
        for r in recs
    ]
    values = [r.value for r in recs]
    unknown = sorted(set(values) - KNOWN_COINCIDENCES)
    return not unknown, rows, {"values": values, "unknown_values": unknown}


def cmd_certify(args):
    from . import analytic

    if args.table1:
        cert = analytic.constants_certificate()
        rows = [_row(r) for r in cert["rows"]]
        return bool(cert["pass"]), rows, {k: v for k, v in cert.items() if k != "rows"}
    if args.ptable:
        rows = analytic.closed_form_agreement(10, 6)
        disc1 = analytic.recurrence_discrepancies(6)
        disc_t = analytic.recurrence_discrepancies(6, (Fraction(0), Fraction(1)))
        extra = {
            "recurrence_discrepancies": disc1,
            "recurrence_discrepancies_seed_t": disc_t,
            "known_findings": ["recurrence-seed", "recurrence-middle-rows", "derivative-display-index"],
        }
        return all(r["match"] for r in rows), rows, extra
    if args.lemma31:
        L = _log_n(args, required=False) or analytic.LogScale(analytic.log_n_min())
        ks = [args.k] if args.k else list(range(1, 7))
        rows = []
        for k in ks:
            v = analytic.lemma31_check(k, L, _mpf(args.m), dps=args.precision)
            for name, (lo, hi) in v.bounds.items():
                rows.append(_row({
                    "k": k, "bound": name, "lower": lo, "g": v.g, "upper": hi,
                    "lower_margin": v.margins[name][0], "upper_margin": v.margins[name][1],
                    "holds": v.holds[name],
                }))
        return all(r["holds"] for r in rows), rows, {"x": str(args.m)}
    from .findings import FINDINGS

    rows = [f.as_dict(with_evidence=False) for f in FINDINGS]
    extra = {}
    if args.evidence:
        extra["evidence"] = {f.id: f.evidence() for f in FINDINGS if f.evidence is not None}
    return True, rows, extra


def cmd_lattice(args):
    from . import lattice

    if args.random:
        cases = lattice.random_soundness_cases(args.random, args.seed)
        rows = []
        for c in cases:
            rows.append(_row({
                "family": c.family, "params": json.dumps(c.params, sort_keys=True), "M": c.M, "delta": c.delta,
                "k": c.window.k, "lam": c.window.lam, "c": c.window.c,
                "count": c.count, "bound": c.bound, "applicable": c.applicable, "violated": c.violated,
            }))
        return not any(r["violated"] for r in rows), rows, {"cases": len(rows)}
    if args.m is None or args.delta is None:
        raise UsageError("lattice needs --m and --delta (or --random)")
    if args.family == "f_N":
        if args.n is None:
            raise UsageError("the f_N family needs --n")
        curve = lattice.FNCurve(args.n)
    else:
        curve = lattice.make_curve(args.family, {"c": args.c, "theta": args.theta})
    M, delta = float(args.m), float(args.delta)
    try:
        q = lattice.CloseSetQuery(curve, M, delta)
    except ValueError as exc:
        raise UsageError(str(exc))
    scan = lattice.scan_close(q, dps=args.precision, budget=_budget(args, lattice.DEFAULT_BUDGET), workers=args.workers)
    rows = [{"x": x, "status": "inside"} for x in scan.points] + [{"x": x, "status": "ambiguous"} for x in scan.ambiguous]
    extra = {"count": len(scan.points), "ambiguous": len(scan.ambiguous)}
    ok = True
    if args.k:
        w = curve.window(args.k, M)
        bound, applicable = lattice.lemma21_bound(w, M, delta)
        extra.update({"k": args.k, "lam": w.lam, "c": w.c, "bound": bound, "applicable": applicable})
        ok = not (applicable and len(scan.points) + len(scan.ambiguous) > bound)
    return ok, rows, extra


def cmd_linform(args):
    from . import linforms
    from .repunit import solutions_for

    extra = {"matveev_C3": float(linforms.matveev_constant(3)), "C3_printed": float(linforms.C3_PRINTED)}
    rows = []
    ok = True
    if args.n is not None:
        if not 3 <= args.n <= LITERAL_N_MAX:
            raise UsageError(f"--n must lie in [3, {LITERAL_N_MAX}]")
        sols = list(solutions_for(args.n, args.min_m))
        sols.sort(key=lambda s: s.base)
        for i in range(len(sols)):
            for j in range(i + 1, len(sols)):
                pair = linforms.SolutionPair(sols[i], sols[j], args.n)
                rep = linforms.lambda_for_pair(pair)
                form = pair.linear_form()
                mb = linforms.matveev_lower_bound(form)
                log_abs = form.exact_abs_log()
                mv_ok = mb.zero or log_abs > mb.log_bound
                ok = ok and rep.in_range and mv_ok
                rows.append(_row({
                    "x1": sols[i].base, "m1": sols[i].length, "x2": sols[j].base, "m2": sols[j].length,
                    "lambda_direct": rep.direct, "lambda_identity": rep.via_identity, "upper": rep.upper,
                    "in_range": rep.in_range, "log_abs_lambda": log_abs,
                    "matveev_log_bound": mb.log_bound, "matveev_holds": mv_ok,
                }))
    else:
        L = _log_n(args)
        try:
            thr, source = linforms.x2_threshold(L)
        except HypothesisError as exc:
            raise UsageError(str(exc))
        extra.update({"x2_threshold": float(thr), "x2_source": source})
        chk = linforms.lemma41_sides(L)
        rows.append(_row({
            "loglog": chk.loglog, "left": chk.left, "right": chk.right,
            "contradiction": chk.contradiction, "applies": chk.loglog >= linforms.LL_SWITCH,
        }))
        if chk.loglog >= linforms.LL_SWITCH:
            ok = chk.contradiction
    return ok, rows, extra


def cmd_bounds(args):
    from . import pipeline

    theorems = [1, 2] if args.theorem == "both" else [int(args.theorem)]
    extra = {"final_constants": pipeline.final_constants()}
    ok = all(v for k, v in extra["final_constants"].items() if isinstance(v, bool))
    rows = []
    L = _log_n(args, required=args.sweep is None)
    if L is not None:
        for t in theorems:
            rep = pipeline.theorem1_bound(L, args.min_m) if t == 1 else pipeline.theorem2_bound(L)
            d = rep.as_dict()
            d["findings"] = ";".join(d["findings"])
            if "covering" in d:
                d["covering"] = ";".join(d["covering"])
            if args.n is not None:
                prime = args.prime_only or t == 2
                from .repunit import reciprocal_tail_sum

                d["exact_tail"] = str(reciprocal_tail_sum(args.n, args.min_m if t == 1 else 3, prime))
            rows.append(_row(d))
            if rep.within is False:
                ok = False
    if args.sweep:
        sweep_rows = []
        violations = 0
        for t in theorems:
            part = pipeline.sweep(t, args.points)
            violations += len(pipeline.sweep_violations(part))
            sweep_rows += part
        with open(args.sweep, "w", newline="") as fh:
            fh.write(pipeline.rows_to_csv(sweep_rows))
        extra["sweep"] = {"path": args.sweep, "points": args.points, "violations": violations}
        ok = ok and violations == 0
    return ok, rows, extra


def cmd_multdep(args):
    from . import multdep

    if args.pair:
        a, b = args.pair
        try:
            v = multdep.is_dependent(a, b)
        except ValueError as exc:
            raise UsageError(str(exc))
        rows = [_flat_verdict(v)]
        ok = v.relation is None or v.relation_product() == 1
        return ok, rows, {"family_params": list(v.family_params) if v.family_params else None}
    found = multdep.search_exceptional(args.limit, _budget(args, multdep.DEFAULT_BUDGET), args.workers)
    rows = [_flat_verdict(v) for v in found]
    ok = all(v.relation_product() == 1 for v in found)
    extra = {"limit": args.limit, "count": len(rows)}
    if args.verify_known:
        golden = [(g["a"], g["b"]) for g in multdep.load_golden() if g["b"] <= args.limit]
        got = [(v.a, v.b) for v in found]
        matched = got == golden
        extra.update({"golden_count": len(golden), "golden_matched": matched})
        ok = ok and matched
    return ok, rows, extra


def _flat_verdict(v) -> dict:
    rec = v.as_record()
    rel = rec.pop("relation") or [None, None, None]
    rec.update({"e1": rel[0], "e2": rel[1], "e3": rel[2], "dependent": v.dependent, "exceptional": v.exceptional})
    return rec


COMMANDS = {
    "solve": cmd_solve,
    "coincidence": cmd_coincidence,
    "certify": cmd_certify,
    "lattice": cmd_lattice,
    "linform": cmd_linform,
    "bounds": cmd_bounds,
    "multdep": cmd_multdep,
}


# ----------------------------------------------------------------------------
# Output.


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def render_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    fields = []
    for r in rows:
        fields += [k for k in r if k not in fields]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _cell(r.get(k)) for k in fields})
    return buf.getvalue()


def render_tty(report: dict) -> str:
    lines = [f"rgverify {report['version']}  {report['subcommand']}  status: {report['status']}"]
    for k, v in report["extra"].items():
        lines.append(f"  {k}: {json.dumps(v) if isinstance(v, (dict, list)) else v}")
    rows = report["rows"]
    if rows:
        fields = []
        for r in rows:
            fields += [k for k in r if k not in fields]
        cells = [[_cell(r.get(k)) for k in fields] for r in rows]
        widths = [max(len(f), *(len(c[i]) for c in cells)) for i, f in enumerate(fields)]
        lines.append("  ".join(f.ljust(w) for f, w in zip(fields, widths)))
        for c in cells:
            lines.append("  ".join(x.ljust(w) for x, w in zip(c, widths)))
    return "\n".join(lines) + "\n"


def load_schema(subcommand: str) -> dict:
    from importlib.resources import files

    return json.loads(files("rgverify").joinpath(f"schemas/{subcommand}.schema.json").read_text())


def _config(args) -> dict:
    cfg = {k: _num(v) if not isinstance(v, list) else [_num(x) for x in v] for k, v in vars(args).items()}
    cfg["precision_digits"] = cfg.pop("precision")
    return cfg


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stderr(err):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.workers is None:
        args.workers = default_workers()
    try:
        with mpmath.workdps(args.precision):
            ok, rows, extra = COMMANDS[args.subcommand](args)
    except (UsageError, HypothesisError) as exc:
        parser.print_usage(err)
        print(f"rgverify: error: {exc}", file=err)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"rgverify: {exc}; raise --budget to proceed", file=err)
        return EXIT_USAGE
    report = {
        "tool": "rgverify",
        "version": __version__,
        "subcommand": args.subcommand,
        "config": _config(args),
        "status": "pass" if ok else "finding",
        "rows": rows,
        "extra": extra,
    }
    if args.format == "json":
        out.write(json.dumps(report, indent=2, default=_num) + "\n")
    elif args.format == "csv":
        out.write(render_csv(rows))
    else:
        out.write(render_tty(report))
    return EXIT_OK if ok else EXIT_FINDING


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
