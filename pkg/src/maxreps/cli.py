"""Command line: ``maxreps {runs,audit,sweep,density,fib}``.

Positions are 1-based everywhere. Rationals are printed as ``num/den``.
Exit codes: 0 clean, 1 audit failure in assert mode, 2 usage or input
error, 3 work budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import explorer
from .delta import buckets
from .errors import BudgetExceeded, DomainError
from .report import frac_str, jsonable
from .runs import enumerate_runs_fast, enumerate_runs_oracle

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
RUN_FIELDS = ("start", "end", "period", "center", "square_end", "exponent")


class UsageError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=("human", "json", "csv"), default="human")
    p.add_argument("--mode", choices=("assert", "survey"), default="assert")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    return p


def _input_args(p: argparse.ArgumentParser):
    p.add_argument("string", nargs="?", help="literal input, or - for stdin")
    p.add_argument("--file", help="read raw bytes from a file")
    p.add_argument("--alphabet-check", type=int, metavar="K", help="reject inputs with more than K symbols")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="maxreps", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("runs", parents=[common], help="list all runs of a string")
    _input_args(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--fast", dest="method", action="store_const", const="fast")
    g.add_argument("--oracle", dest="method", action="store_const", const="oracle")
    p.set_defaults(method="fast")

    p = sub.add_parser("audit", parents=[common], help="run audits on one string")
    _input_args(p)
    p.add_argument("--all", action="store_true", help="run every audit (default)")
    p.add_argument("--buckets", action="store_true", help="include per-bucket tallies")
    p.add_argument("--audits", help="comma-separated audit names")

    p = sub.add_parser("sweep", parents=[common], help="exhaustive or random sweep")
    p.add_argument("-k", type=int, required=True, help="alphabet size")
    p.add_argument("-n", type=int, required=True, help="max length (exhaustive) or length (random)")
    p.add_argument("--min-len", type=int, default=None)
    p.add_argument("--samples", type=int, default=None, help="random sweep with this many strings")
    p.add_argument("--audits", default="all")
    p.add_argument("--population", choices=("uniform", "periodic"), default="uniform")
    p.add_argument("--allow-large", action="store_true", help="raise the exhaustive work budget")

    p = sub.add_parser("density", parents=[common], help="max runs and exponent sums per length")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--allow-large", action="store_true")

    p = sub.add_parser("fib", parents=[common], help="Fibonacci word and its run density")
    p.add_argument("-m", type=int, required=True)
    p.add_argument("--stats", action="store_true")
    return parser


def read_input(args) -> bytes:
    sources = [s for s in (args.string, args.file) if s is not None]
    if len(sources) != 1:
        raise UsageError("give exactly one input: STRING, - (stdin) or --file")
    if args.file is not None:
        try:
            with open(args.file, "rb") as fh:
                data = _strip_newline(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc.strerror}") from exc
    elif args.string == "-":
        data = _strip_newline(sys.stdin.buffer.read())
    else:
        data = args.string.encode("utf-8")
    if not data:
        raise UsageError("input string is empty")
    if args.alphabet_check is not None and len(set(data)) > args.alphabet_check:
        raise UsageError(f"input uses {len(set(data))} symbols, more than {args.alphabet_check}")
    return data


def _strip_newline(data: bytes) -> bytes:
    if data.endswith(b"\r\n"):
        return data[:-2]
    if data.endswith(b"\n"):
        return data[:-1]
    return data


def dump_json(obj) -> str:
    return json.dumps(jsonable(obj), separators=(",", ":"), sort_keys=False)


def format_runs(runs, fmt: str) -> str:
    records = runs.records()
    if fmt == "json":
        return dump_json(records)
    if fmt == "csv":
        rows = [",".join(RUN_FIELDS)] + [",".join(str(r[f]) for f in RUN_FIELDS) for r in records]
        return "\n".join(rows)
    lines = [f"# n={runs.n} runs={len(runs)} (1-based positions)"]
    lines += [" ".join(f"{f}={r[f]}" for f in RUN_FIELDS) for r in records]
    return "\n".join(lines)


def cmd_runs(args) -> int:
    w = read_input(args)
    runs = enumerate_runs_oracle(w) if args.method == "oracle" else enumerate_runs_fast(w)
    print(format_runs(runs, args.format))
    return EXIT_OK


def cmd_audit(args) -> int:
    w = read_input(args)
    names = explorer.resolve_audits(args.audits if args.audits and not args.all else "all")
    skipped = []
    if "equivalence" in names and len(w) > explorer.ORACLE_MAX_LEN:
        names = tuple(a for a in names if a != "equivalence")
        skipped.append("equivalence")
    runs = enumerate_runs_fast(w)
    _, reports = explorer.analyze(w, names, runs)
    failed = [name for name, rep in reports.items() if not rep.passed]
    out = {
        "n": len(w),
        "runs": len(runs),
        "passed": not failed,
        "skipped": skipped,
        "audits": {name: rep.to_dict() for name, rep in reports.items()},
    }
    if args.buckets:
        out["buckets"] = [
            {
                "index": b.index,
                "delta": b.delta,
                "period_range": list(b.period_range),
                "runs": len(b.members),
                "cap": 3 * len(w) / b.delta,
            }
            for b in buckets(runs)
        ]
    if args.format == "json":
        print(dump_json(out))
    else:
        print(f"n={len(w)} runs={len(runs)}")
        for name, rep in reports.items():
            notes = {}
            for a in rep.annotations:
                notes[a["kind"]] = notes.get(a["kind"], 0) + 1
            extra = ", ".join(f"{k}={v}" for k, v in sorted(notes.items()))
            print(f"{'PASS' if rep.passed else 'FAIL'} {name}" + (f" [{extra}]" if extra else ""))
            for f in rep.failures[:5]:
                print(f"  {dump_json(f)}")
        for s in skipped:
            print(f"SKIP {s} (input longer than {explorer.ORACLE_MAX_LEN})")
        for b in out.get("buckets", []):
            print(
                f"bucket {b['index']} delta={frac_str(b['delta'])} periods=[{frac_str(b['period_range'][0])},"
                f"{frac_str(b['period_range'][1])}] runs={b['runs']} cap={frac_str(b['cap'])}"
            )
    return EXIT_FAIL if failed and args.mode == "assert" else EXIT_OK


def cmd_sweep(args) -> int:
    threads = max(1, args.threads)
    if args.samples is not None:
        if args.seed is None:
            raise UsageError("random sweeps need --seed")
        rep = explorer.random_sweep(
            args.k, args.n, args.samples, args.seed, args.audits, args.mode, threads, args.min_len,
            population=args.population,
        )
    else:
        budget = explorer.LARGE_BUDGET if args.allow_large else explorer.DEFAULT_BUDGET
        rep = explorer.exhaustive_sweep(
            args.k, args.n, args.audits, args.mode, threads, args.min_len or 1, budget
        )
    print(rep.to_json() if args.format == "json" else rep.to_text())
    return EXIT_FAIL if not rep.passed and args.mode == "assert" else EXIT_OK


def cmd_density(args) -> int:
    budget = explorer.LARGE_BUDGET if args.allow_large else explorer.DEFAULT_BUDGET
    rows = explorer.density_table(args.k, args.n, max(1, args.threads), budget)
    if args.format == "csv":
        print("n,max_runs,max_sum_exp_num,max_sum_exp_den,witness")
        for r in rows:
            print(r.csv())
    elif args.format == "json":
        print(dump_json([r.to_dict() for r in rows]))
    else:
        for r in rows:
            print(f"n={r.n} max_runs={r.max_runs} ({r.runs_witness}) max_sum_exp={frac_str(r.max_sum_exp)} ({r.sum_exp_witness})")
    return EXIT_OK


def cmd_fib(args) -> int:
    if not args.stats:
        print(explorer.fibonacci_word(args.m).decode())
        return EXIT_OK
    st = explorer.fibonacci_stats(args.m)
    if args.format == "json":
        print(dump_json(st.to_dict()))
    elif args.format == "csv":
        print("m,length,runs,ratio_num,ratio_den")
        print(f"{st.m},{st.length},{st.runs},{st.ratio.numerator},{st.ratio.denominator}")
    else:
        print(f"F_{st.m}: length={st.length} runs={st.runs} runs/n={frac_str(st.ratio)} (~{float(st.ratio):.4f})")
    return EXIT_OK


COMMANDS = {"runs": cmd_runs, "audit": cmd_audit, "sweep": cmd_sweep, "density": cmd_density, "fib": cmd_fib}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, DomainError) as exc:
        print(f"maxreps: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"maxreps: {exc}; pass --allow-large to proceed", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
