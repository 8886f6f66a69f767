"""Command line front end.

Exit codes: 0 success, 1 invalid input, 2 refused (budget guard),
3 verification ran but did not pass.
"""

from __future__ import annotations

import argparse
import json
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

import numpy as np

from . import BUILD_ID, counting
from .analysis import clt_params, in_szekeres_range, szekeres_eval
from .limits import LimitLawSpec, clt_cdf, limit_pmf_k1
from .rng import make_rng
from .samplers import (
    GeometricMeasureSpec,
    RefusalError,
    dirichlet_measure,
    enumerate_array,
    sample_general,
    sample_geometric_partition,
)

EXIT_OK, EXIT_INVALID, EXIT_REFUSED, EXIT_FAILED = 0, 1, 2, 3
EXACT_COUNT_LIMIT = 200_000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _decimal(text: str) -> Decimal:
    try:
        d = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not d.is_finite():
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return d


def int_arg(text: str) -> int:
    d = _decimal(text)
    if d != d.to_integral_value():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(d)


def float_arg(text: str) -> float:
    d = _decimal(text)
    x = float(d)
    if d != 0 and abs(Decimal(x) - d) > abs(d) * Decimal("1e-15"):
        print(f"warning: {text} is not representable; using {x!r}", file=sys.stderr)
    return x


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, allow_abbrev=False)
    common.add_argument("--format", choices=["csv", "json", "pretty"], default="pretty",
                        help="output format (default: pretty)")
    common.add_argument("--out", help="write output to this file (verify: artifact directory)")

    p = _Parser(prog="partition-lab", allow_abbrev=False,
                description="Exact counts, exact samplers, asymptotics and limit-law checks "
                            "for random partitions with at most m parts.")
    p.add_argument("--version", action="version", version=BUILD_ID)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("count", parents=[common], allow_abbrev=False,
                       help="|P_n(m)|, or the count with largest part --k1")
    s.add_argument("--n", type=int_arg, required=True, help="total")
    s.add_argument("--m", type=int_arg, required=True, help="maximum number of parts")
    s.add_argument("--k1", type=int_arg, help="fix the largest part")

    s = sub.add_parser("asymptotic", parents=[common], allow_abbrev=False,
                       help="Szekeres estimate of |P_n(m)| (--n --m) or CLT constants (--q)")
    s.add_argument("--n", type=int_arg)
    s.add_argument("--m", type=int_arg)
    s.add_argument("--q", type=float_arg)

    s = sub.add_parser("sample", parents=[common], allow_abbrev=False,
                       help="exact draws: weight q^k1 (--q) or Dirichlet kernel density (--alpha)")
    s.add_argument("--n", type=int_arg, required=True)
    s.add_argument("--m", type=int_arg, required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--q", type=float_arg)
    g.add_argument("--alpha", type=float_arg)
    s.add_argument("--samples", type=int_arg, default=10)
    s.add_argument("--seed", type=int_arg, default=0)

    s = sub.add_parser("limit", parents=[common], allow_abbrev=False,
                       help="limit-law tables: k1 pmf, joint pmf, or normal CDF curve")
    s.add_argument("--kind", choices=["k1", "joint", "clt"], default="k1")
    s.add_argument("--m", type=int_arg)
    s.add_argument("--j", type=int_arg)
    s.add_argument("--q", type=float_arg, required=True)
    s.add_argument("--tol", type=float_arg, default=1e-12)

    from .verify import ExperimentId

    s = sub.add_parser("verify", parents=[common], allow_abbrev=False, help="run one seeded experiment")
    s.add_argument("--experiment", required=True, choices=[e.value for e in ExperimentId])
    s.add_argument("--seed", type=int_arg, default=0)
    s.add_argument("--samples", type=int_arg, help="override the sample count")
    s.add_argument("--n", type=int_arg)
    s.add_argument("--m", type=int_arg)
    s.add_argument("--q", type=float_arg)
    s.add_argument("--alpha", type=float_arg)
    s.add_argument("--tol", type=float_arg)
    s.add_argument("--workers", type=int_arg, default=1, help="worker processes (default 1)")

    s = sub.add_parser("report", parents=[common], allow_abbrev=False,
                       help="summarise the reports stored in a directory (--out)")
    return p


def _emit(args, text: str) -> None:
    if args.out and args.command != "verify":
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _need(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"{args.command} needs {' '.join(missing)}")


def cmd_count(args) -> int:
    if args.n < 0 or args.m < 0:
        raise ValueError("--n and --m must be nonnegative")
    if args.k1 is not None:
        value = counting.count_with_largest(args.n, args.m, args.k1)
    else:
        value = counting.count_at_most(args.n, args.m)
    fields = {"n": args.n, "m": args.m, "k1": args.k1, "count": value}
    if args.format == "json":
        _emit(args, json.dumps(fields) + "\n")
    elif args.format == "csv":
        _emit(args, "n,m,k1,count\n" + f"{args.n},{args.m},{'' if args.k1 is None else args.k1},{value}\n")
    else:
        _emit(args, f"{value}\n")
    return EXIT_OK


def cmd_asymptotic(args) -> int:
    if args.q is not None:
        c = clt_params(args.q)
        fields = {"q": c.q, "lambda": c.lam, "t0": c.t0, "gamma": c.gamma, "sigma2": c.sigma2,
                  "psi2_t0": c.psi2_t0, "sigma2_check": c.sigma2_from_psi}
    else:
        _need(args, "n", "m")
        if not 1 <= args.m <= args.n:
            raise ValueError("need 1 <= m <= n")
        ev = szekeres_eval(args.m / args.n ** 0.5, args.n)
        fields = {"n": args.n, "m": args.m, "u": ev.u, "v": ev.v, "f": ev.f_val, "g": ev.g_val,
                  "log_estimate": ev.log_estimate,
                  "in_uniform_range": in_szekeres_range(args.n, args.m),
                  "erdos_lehner_log": counting.erdos_lehner_log_estimate(args.n, args.m)}
        if args.n <= EXACT_COUNT_LIMIT:
            fields["log_exact"] = counting.log_int(counting.count_at_most(args.n, args.m))
    if args.format == "json":
        _emit(args, json.dumps(fields) + "\n")
    elif args.format == "csv":
        _emit(args, ",".join(fields) + "\n" + ",".join(repr(v) for v in fields.values()) + "\n")
    else:
        _emit(args, "".join(f"{k} = {v!r}\n" for k, v in fields.items()))
    return EXIT_OK


def cmd_sample(args) -> int:
    if args.samples < 1:
        raise ValueError("--samples must be positive")
    rng = make_rng(args.seed)
    if args.q is not None:
        draws = sample_geometric_partition(GeometricMeasureSpec(args.n, args.m, args.q), rng, args.samples)
    else:
        draws = sample_general(dirichlet_measure(args.n, args.m, args.alpha), rng, args.samples)
    rows = [[int(x) for x in r if x > 0] for r in draws]
    if args.format == "json":
        _emit(args, json.dumps({"n": args.n, "m": args.m, "seed": args.seed, "partitions": rows}) + "\n")
    elif args.format == "csv":
        head = ",".join(f"k{i + 1}" for i in range(args.m))
        _emit(args, head + "\n" + "".join(",".join(map(str, r)) + "\n" for r in draws.tolist()))
    else:
        _emit(args, "".join(" + ".join(map(str, r)) + "\n" for r in rows))
    return EXIT_OK


def _joint_rows(spec: LimitLawSpec):
    pmf = limit_pmf_k1(spec)
    m, j = spec.m, spec.j
    for l, p_l in enumerate(pmf.probs):
        completions = enumerate_array(m * (l + 1) - j, m - 1)
        share = float(p_l) / len(completions)
        for lam in completions:
            d = lam[::-1]
            yield (l,) + tuple(int(l - x) for x in d), share


def cmd_limit(args) -> int:
    if args.kind == "clt":
        sigma = clt_params(args.q).sigma
        xs = np.linspace(-4 * sigma, 4 * sigma, 161)
        ys = clt_cdf(xs, args.q)
        if args.format == "json":
            _emit(args, json.dumps({"kind": "clt", "q": args.q, "sigma": sigma,
                                    "x": xs.tolist(), "y": ys.tolist()}) + "\n")
        else:
            head = f"# curve=normal limit CDF of the standardised largest part\n# q={args.q!r}\n# sigma={sigma!r}\n"
            _emit(args, head + "x,y\n" + "".join(f"{float(x)!r},{float(y)!r}\n" for x, y in zip(xs, ys)))
        return EXIT_OK
    _need(args, "m", "j")
    spec = LimitLawSpec(args.m, args.j, args.q, args.tol)
    if args.kind == "k1":
        pmf = limit_pmf_k1(spec)
        if args.format == "json":
            _emit(args, json.dumps({"base_offset": pmf.base_offset, "tail_bound": pmf.tail_bound,
                                    "probs": pmf.probs.tolist(), **pmf.meta}) + "\n")
        elif args.format == "csv":
            _emit(args, pmf.to_csv())
        else:
            _emit(args, "".join(f"l={k}  {p:.12g}\n" for k, p in zip(pmf.support, pmf.probs)))
        return EXIT_OK
    rows = list(_joint_rows(spec))
    if args.format == "json":
        _emit(args, json.dumps([{"l": list(v), "probability": p} for v, p in rows]) + "\n")
    else:
        head = ",".join(f"l{i + 1}" for i in range(spec.m))
        _emit(args, head + ",probability\n" + "".join(",".join(map(str, v)) + f",{p!r}\n" for v, p in rows))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import ExperimentConfig, run_experiment

    params = {}
    for flag, key in [("samples", "sample_count"), ("n", "n"), ("m", "m"), ("q", "q"),
                      ("alpha", "alpha"), ("tol", "tol")]:
        val = getattr(args, flag)
        if val is not None:
            params[key] = val
    if args.workers < 1:
        raise ValueError("--workers must be positive")
    report = run_experiment(ExperimentConfig(args.experiment, params, args.seed), args.out, args.workers)
    if args.format == "json":
        sys.stdout.write(report.to_json())
    elif args.format == "csv":
        sys.stdout.write("name,value,threshold,direction,ok\n")
        for c in report.checks:
            sys.stdout.write(f"{c.name},{c.value!r},{c.threshold!r},{c.direction},{c.ok}\n")
    else:
        sys.stdout.write(report.to_text())
    if report.refused:
        print(f"refused: {report.refusal}", file=sys.stderr)
        return EXIT_REFUSED
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_report(args) -> int:
    _need(args, "out")
    paths = sorted(Path(args.out).glob("*.report.json"))
    if not paths:
        raise ValueError(f"no reports in {args.out}")
    rows = []
    for path in paths:
        d = json.loads(path.read_text())
        primary = d["checks"][0] if d["checks"] else {}
        rows.append({"experiment_id": d["experiment_id"], "pass": d["pass"], "refused": d["refused"],
                     "primary": d["primary"], "value": primary.get("value"),
                     "threshold": d["threshold"], "seed": d["seed"], "build": d["build"]})
    if args.format == "json":
        sys.stdout.write(json.dumps(rows, indent=2) + "\n")
    elif args.format == "csv":
        sys.stdout.write(",".join(rows[0]) + "\n")
        for r in rows:
            sys.stdout.write(",".join(str(v) for v in r.values()) + "\n")
    else:
        for r in rows:
            mark = "REFUSED" if r["refused"] else ("pass" if r["pass"] else "FAIL")
            sys.stdout.write(f"{r['experiment_id']:<22} {mark:<8} {r['primary']} = {r['value']} "
                             f"(threshold {r['threshold']})\n")
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_FAILED


COMMANDS = {"count": cmd_count, "asymptotic": cmd_asymptotic, "sample": cmd_sample,
            "limit": cmd_limit, "verify": cmd_verify, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except RefusalError as exc:
        print(f"error: refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (ValueError, ArithmeticError, OSError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
