"""Command-line front end.

Three subcommands:

* ``check`` — parse a model file, compute the reachability function for
  every (initial state, target) pair with the chosen engine, optionally
  evaluate at a parameter point, export the validity constraints, and
  print statistics.
* ``constraints`` — just the SMT-LIB 2 validity constraints.
* ``gen`` — emit a benchmark model file.

Exit codes: 0 on success, 1 when the model itself is at fault (syntax,
probability sums, absorbing-target violations, …), 2 on usage errors
(unreadable input, malformed flags, unknown parameter or target names).

Result output is byte-deterministic for a fixed input, mode, and seed;
the optional ``--stats`` block (wall time, peak memory) is diagnostic
and exempt.
"""

from __future__ import annotations

import argparse
import os
import sys
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Sequence

from .benchgen import BenchSpec, Family, generate
from .elimination import EliminationOrder, Strategy, eliminate_all
from .errors import ParmreachError
from .factorizations import pool_stats, reset_pool
from .model import Pdtmc, parse_model, preprocess
from .polycore import reset_variables
from .ratfun import RationalFunction, rf_eval
from .scc_mc import (
    ReachabilityResult,
    collect_constraints,
    model_check,
    reset_abstraction_site_counter,
)

__all__ = ["main"]


class _UsageError(Exception):
    pass


def _read_file(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _UsageError(f"cannot read {path!r}: {exc.strerror}") from exc


def _parse_eval(text: str, m: Pdtmc) -> dict:
    point: dict = {}
    names = {str(v): v for v in m.params}
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        name, sep, value = piece.partition("=")
        name = name.strip()
        if not sep:
            raise _UsageError(f"--eval entry {piece!r} is not of the form name=value")
        if name not in names:
            raise _UsageError(f"--eval names unknown parameter {name!r}")
        try:
            point[names[name]] = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise _UsageError(f"--eval value for {name!r}: {exc}") from exc
    return point


def _approx(x: Fraction) -> str:
    with localcontext() as ctx:
        ctx.prec = 12
        return str(Decimal(x.numerator) / Decimal(x.denominator))


def _run_engine(m: Pdtmc, args: argparse.Namespace) -> ReachabilityResult:
    if args.mode == "scc":
        return model_check(m, parallel=getattr(args, "parallel", False))
    seed = int(os.environ.get("PARMREACH_SEED", "0"))
    order = EliminationOrder(Strategy(args.order), seed)
    return eliminate_all(m, order)


def _load(args: argparse.Namespace) -> Pdtmc:
    reset_variables()
    reset_pool(getattr(args, "pool_cap", None))
    reset_abstraction_site_counter()
    return preprocess(parse_model(_read_file(args.model)))


def _cmd_check(args: argparse.Namespace) -> int:
    m = _load(args)
    result = _run_engine(m, args)

    wanted = args.target or list(m.targets)
    for t in wanted:
        if t not in m.targets:
            raise _UsageError(f"--target {t!r} is not a target state of the model")
    point = _parse_eval(args.eval, m) if args.eval else None
    if point is not None:
        missing = [str(v) for v in m.params if v not in point]
        if missing:
            raise _UsageError(f"--eval leaves parameters unset: {', '.join(missing)}")
    at = (
        ", ".join(f"{v}={point[v]}" for v in m.params)
        if point is not None
        else ""
    )

    def render(f: RationalFunction) -> str:
        return f.factored_str() if args.factored else str(f)

    def show(label: str, f: RationalFunction) -> None:
        print(f"{label} = {render(f)}")
        if point is not None:
            value = rf_eval(f, point)
            print(f"  at {at}: {value} (approx. {_approx(value)})")

    for s in m.initial_states:
        for t in m.targets:
            if t in wanted:
                show(f"f({s}, {t})", result.per_pair[(s, t)])
    show("total", result.total)

    if args.constraints_out:
        with open(args.constraints_out, "w", encoding="utf-8") as fh:
            fh.write(collect_constraints(result, m) + "\n")

    if args.stats:
        stats = result.stats
        print("stats:")
        print(f"  engine: {args.mode}")
        print(f"  states after preprocessing: {len(m.states)}")
        print(f"  time: {stats.elapsed_seconds:.4f} s")
        print(f"  stored polynomials: {pool_stats().stored_polynomials}")
        print(f"  gcd kernel calls: {pool_stats().gcd_kernel_calls}")
        print(f"  abstraction sites checked: {stats.abstraction_sites}")
        print(f"  peak memory: {_peak_memory_mb()}")
    return 0


def _peak_memory_mb() -> str:
    try:
        import resource

        kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
        return f"{kb / 1024:.1f} MB"
    except Exception:  # pragma: no cover - platform-specific
        return "unavailable"


def _cmd_constraints(args: argparse.Namespace) -> int:
    m = _load(args)
    result = _run_engine(m, args)
    text = collect_constraints(result, m) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_gen(args: argparse.Namespace) -> int:
    family = Family(args.family)
    depth = args.max if family is Family.BRP else args.rounds
    text = generate(BenchSpec(family, args.n, depth))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parmreach",
        description="Exact parametric reachability for discrete-time Markov chains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def engine_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("model", help="model file to analyze")
        p.add_argument(
            "--mode",
            choices=["scc", "elim"],
            default="scc",
            help="engine: hierarchical component abstraction or state elimination",
        )
        p.add_argument(
            "--order",
            choices=[s.value for s in Strategy],
            default=Strategy.FEWEST_TRANSITIONS_FIRST.value,
            help="state-removal strategy for --mode elim "
            "(random uses PARMREACH_SEED)",
        )
        p.add_argument(
            "--pool-cap",
            type=int,
            default=None,
            metavar="N",
            help="stop memoizing factorizations after N pooled polynomials",
        )
        p.add_argument(
            "--parallel",
            action="store_true",
            help="solve sibling components in worker threads (--mode scc)",
        )

    check = sub.add_parser("check", help="compute reachability functions")
    engine_flags(check)
    check.add_argument(
        "--eval",
        metavar="ASSIGN",
        help="evaluate at a point, e.g. p=1/2,q=3/10",
    )
    check.add_argument(
        "--target",
        action="append",
        metavar="STATE",
        help="restrict output to this target (repeatable)",
    )
    check.add_argument(
        "--factored",
        action="store_true",
        help="print functions in factored form",
    )
    check.add_argument(
        "--constraints-out",
        metavar="PATH",
        help="also write the SMT-LIB validity constraints to PATH",
    )
    check.add_argument("--stats", action="store_true", help="print a statistics block")
    check.set_defaults(func=_cmd_check)

    cons = sub.add_parser("constraints", help="emit SMT-LIB validity constraints")
    engine_flags(cons)
    cons.add_argument("-o", "--output", metavar="PATH", help="write to PATH (default stdout)")
    cons.set_defaults(func=_cmd_constraints)

    gen = sub.add_parser("gen", help="generate a benchmark model file")
    gen.add_argument(
        "--family",
        choices=[f.value for f in Family],
        required=True,
    )
    gen.add_argument("--n", type=int, required=True, help="primary size")
    gen.add_argument(
        "--max",
        type=int,
        default=1,
        help="retransmissions per chunk (brp)",
    )
    gen.add_argument("--rounds", type=int, default=1, help="routing rounds (crowds)")
    gen.add_argument("-o", "--output", metavar="PATH", help="write to PATH (default stdout)")
    gen.set_defaults(func=_cmd_gen)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ParmreachError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
