"""Command-line entry point.

Exit codes: 0 success or SAT, 1 UNSAT or a failed check, 2 unreadable
instance file, 3 bad usage or unmet precondition.
"""

from __future__ import annotations

import argparse
import random
import sys

from .generators import SHAPES, GenParams, gen_instance
from .io import ParseError, format_instance, read_instance
from .kernel import (
    NotReducedError,
    format_trace,
    kernelize_full,
    structural_report,
    verify_kernel_bounds,
)
from .rules import ModeError
from .solver import ORACLE_MAX_EDGES, OracleTooLarge, brute_force_opt, solve
from .tree import TreeInstance, Verdict

EXIT_OK, EXIT_NO, EXIT_PARSE, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _fmt_edges(edges) -> str:
    return " ".join(f"{a + 1}-{b + 1}" for a, b in sorted(edges))


def decides_yes(inst: TreeInstance) -> bool:
    """Oracle answer for the instance budget, honouring decided verdicts."""
    if inst.verdict != Verdict.OPEN:
        return inst.verdict == Verdict.TRUE
    return brute_force_opt(inst, at_most=inst.k) <= inst.k


def cmd_kernelize(args) -> int:
    inst = read_instance(args.input)
    res = kernelize_full(inst, args.mode)
    ker = res.kernel
    _emit(args.output, format_instance(ker))
    if args.trace:
        _emit(args.trace, format_trace(res.trace))
    # keep stdout parseable when the kernel itself goes there
    out = sys.stderr if args.output == "-" else sys.stdout
    print(f"nodes_in={len(inst.nodes)} nodes_out={len(ker.nodes)} k_in={inst.k} "
          f"k_out={ker.k} verdict={ker.verdict.value}", file=out)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = read_instance(args.input)
    if args.k is not None and args.k < 0:
        raise UsageError("--k must be non-negative")
    cut = solve(inst, k=args.k, use_kernel=args.use_kernel, mode=args.mode)
    if cut is None:
        print("UNSAT")
        return EXIT_NO
    print(("SAT " + _fmt_edges(cut.edges)).rstrip())
    return EXIT_OK


def _verify_one(inst: TreeInstance, mode: str) -> bool:
    ker = kernelize_full(inst, mode).kernel
    return decides_yes(inst) == decides_yes(ker)


def _random_trial(rng: random.Random, max_n: int, mode: str) -> TreeInstance:
    n = rng.randint(2, max_n)
    shapes = ("path", "caterpillar") if mode == "caterpillar" else SHAPES
    pairs = n * (n - 1) // 2
    p = GenParams(n=(n, n), shape=shapes[rng.randrange(len(shapes))],
                  requests=rng.randint(1, min(pairs, 2 * n)),
                  length_bias=rng.randint(-2, 2), k=(0, 4), seed=rng.randrange(2**32))
    return gen_instance(p)


def cmd_verify(args) -> int:
    if args.input:
        insts = [read_instance(args.input)]
    else:
        if args.trials < 0:
            raise UsageError("--trials must be non-negative")
        if not 2 <= args.max_n <= ORACLE_MAX_EDGES + 1:
            raise UsageError(f"--max-n must lie in [2, {ORACLE_MAX_EDGES + 1}]")
        rng = random.Random(args.seed)
        insts = [_random_trial(rng, args.max_n, args.mode) for _ in range(args.trials)]
    passed = 0
    for i, inst in enumerate(insts):
        if _verify_one(inst, args.mode):
            passed += 1
        else:
            print(f"FAIL trial={i}")
    print(f"trials={len(insts)} pass={passed} fail={len(insts) - passed}")
    return EXIT_OK if passed == len(insts) else EXIT_NO


def cmd_stats(args) -> int:
    inst = read_instance(args.input)
    if not args.reduced:
        inst = kernelize_full(inst, args.mode).kernel
    report = structural_report(inst, args.mode)
    try:
        checks = verify_kernel_bounds(report)
    except NotReducedError as exc:
        raise UsageError(str(exc)) from None
    for key, val in report.as_dict().items():
        if isinstance(val, dict):
            val = ",".join(f"{a}:{b}" for a, b in sorted(val.items()))
        print(f"{key}={val}")
    for c in checks:
        print(f"claim={c.claim} bound={c.bound} observed={c.observed} "
              f"{'PASS' if c.ok else 'FAIL'}")
    return EXIT_OK if all(c.ok for c in checks) else EXIT_NO


def cmd_gen(args) -> int:
    requests = args.requests if args.requests is not None else args.n
    p = GenParams(n=(args.n, args.n), shape=args.shape, requests=requests,
                  length_bias=args.bias, k=(args.k, args.k), seed=args.seed)
    try:
        inst = gen_instance(p)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(args.output, format_instance(inst))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mckernel", description="Kernelize and solve multicut instances on trees.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def mode_flag(p):
        p.add_argument("--mode", choices=("general", "caterpillar"), default="general")

    p = sub.add_parser("kernelize", help="reduce an instance to its kernel")
    p.add_argument("input")
    p.add_argument("output", help="kernel file, '-' for stdout")
    p.add_argument("--trace", help="write the rule log here")
    mode_flag(p)
    p.set_defaults(func=cmd_kernelize)

    p = sub.add_parser("solve", help="decide an instance and print a multicut")
    p.add_argument("input")
    p.add_argument("--k", type=int, help="budget override")
    p.add_argument("--use-kernel", action=argparse.BooleanOptionalAction, default=True)
    mode_flag(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="compare kernel and input decisions with the oracle")
    p.add_argument("input", nargs="?")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-n", type=int, default=20)
    mode_flag(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("stats", help="structural report and bound checks")
    p.add_argument("input")
    p.add_argument("--reduced", action="store_true",
                   help="check the file as given; it must already be reduced")
    mode_flag(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("gen", help="write a seeded random instance")
    p.add_argument("--shape", choices=SHAPES, default="uniform-random")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--requests", type=int, help="default: n")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--bias", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"cannot read or write file: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (UsageError, ModeError, OracleTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
