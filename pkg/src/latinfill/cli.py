"""``latinfill`` command line.

Exit codes: 0 ok, 1 validation failure, 2 bad input, 3 infeasible,
4 no completion found.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .completion import CompletionConfig, Fallback, complete, max_feasible_delta
from .construct import build
from .errors import (
    CompletionFailed,
    GenerationFailed,
    Infeasible,
    LatinError,
    OracleFailed,
    UnsupportedOrder,
)
from .gridio import GridFormatError, read_grid, write_grid
from .model import LatinGrid, PartialGrid
from .verify import (
    density_profile,
    extends,
    first_conflict,
    first_disagreement,
    generate_pls,
    is_latin,
    is_partial_latin,
)

OK, INVALID, BAD_INPUT, INFEASIBLE, NO_COMPLETION = range(5)

CSV_FIELDS = ("n", "epsilon", "delta", "seed", "success", "trades", "disturbed", "max_per_fix", "ms")


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load(path):
    try:
        return read_grid(path)
    except (OSError, GridFormatError) as exc:
        _err(f"{path}: {exc}")
        return None


def cmd_construct(args) -> int:
    try:
        grid, smap = build(args.n)
    except UnsupportedOrder as exc:
        _err(str(exc))
        return BAD_INPUT
    write_grid(grid, args.out)
    print(f"construction_disturbed={len(smap.construction_disturbed)}")
    return OK


def cmd_complete(args) -> int:
    P = _load(args.input)
    if P is None:
        return BAD_INPUT
    if isinstance(P, LatinGrid):
        P = PartialGrid(P.cells, check=False)
    if not is_partial_latin(P):
        r, c, why = first_conflict(P)
        _err(f"input is not a partial latin square: ({r}, {c}) {why}")
        return BAD_INPUT
    cfg = CompletionConfig(
        epsilon=args.epsilon, delta=args.delta, seed=args.seed, fallback=args.fallback
    )
    try:
        grid, report = complete(P, cfg)
    except Infeasible as exc:
        _err(f"infeasible: {exc}")
        return INFEASIBLE
    except (OracleFailed, CompletionFailed) as exc:
        _err(f"no completion: {exc}")
        return NO_COMPLETION
    write_grid(grid, args.out)
    for key, value in report.as_pairs():
        if isinstance(value, bool):
            value = int(value)
        print(f"{key}={value}")
    return OK


def _print_profile(P) -> None:
    prof = density_profile(P)
    print(f"total_fill={prof.total_fill}")
    print(f"max_row_fill={prof.max_row_fill}")
    print(f"max_col_fill={prof.max_col_fill}")
    print(f"max_sym_fill={prof.max_sym_fill}")
    print(f"epsilon_actual={prof.epsilon_actual:.6g}")
    print(f"delta_actual={prof.delta_actual:.6g}")


def cmd_verify(args) -> int:
    grids = [_load(p) for p in args.paths]
    if any(g is None for g in grids):
        return BAD_INPUT
    for path, g in zip(args.paths, grids):
        ok = is_latin(g) if isinstance(g, LatinGrid) else is_partial_latin(g)
        if not ok:
            r, c, why = first_conflict(g)
            print(f"{path}: invalid at ({r}, {c}): {why}")
            return INVALID
        if isinstance(g, PartialGrid):
            _print_profile(g)
    if len(grids) == 2:
        parts = [g for g in grids if isinstance(g, PartialGrid)]
        fulls = [g for g in grids if isinstance(g, LatinGrid)]
        if len(parts) != 1 or len(fulls) != 1:
            _err("two-file verify expects one PLS file and one LS file")
            return BAD_INPUT
        P, L = parts[0], fulls[0]
        if P.order != L.order:
            print(f"order mismatch: {P.order} vs {L.order}")
            return INVALID
        if not extends(L, P):
            r, c = first_disagreement(L, P)
            print(f"disagreement at ({r}, {c}): PLS has {P[(r, c)]}, LS has {L[(r, c)]}")
            return INVALID
    print("ok")
    return OK


def cmd_generate(args) -> int:
    try:
        P = generate_pls(args.n, args.epsilon, args.delta, seed=args.seed)
    except (ValueError, GenerationFailed) as exc:
        _err(str(exc))
        return BAD_INPUT
    write_grid(P, args.out)
    print(f"filled={P.fill_count}")
    return OK


@dataclass(frozen=True)
class BenchCase:
    n: int
    epsilon: float
    delta: float
    seed: int
    fallback: str


def resolve_delta(n: int, epsilon: float, text: str) -> float:
    """``auto`` picks the largest fill count the sufficient condition admits."""
    if text != "auto":
        return float(text)
    best = max_feasible_delta(n, epsilon)
    if best <= 0:
        return 0.0
    return math.floor(best * n * n) / (n * n)


def run_case(case: BenchCase) -> dict:
    row = {
        "n": case.n, "epsilon": case.epsilon, "delta": case.delta, "seed": case.seed,
        "success": 0, "trades": 0, "disturbed": 0, "max_per_fix": 0, "ms": 0.0,
    }
    t0 = time.perf_counter()
    try:
        P = generate_pls(case.n, case.epsilon, case.delta, seed=case.seed)
        cfg = CompletionConfig(
            epsilon=case.epsilon, delta=case.delta, seed=case.seed, fallback=case.fallback
        )
        grid, report = complete(P, cfg)
        row["success"] = int(is_latin(grid) and extends(grid, P))
        row["trades"] = report.trades
        row["disturbed"] = report.total_disturbed
        row["max_per_fix"] = report.max_cells_per_fix
    except (LatinError, ValueError):
        pass
    row["ms"] = round((time.perf_counter() - t0) * 1000, 1)
    return row


def cmd_bench(args) -> int:
    if args.delta != "auto":
        try:
            float(args.delta)
        except ValueError:
            _err(f"bad --delta {args.delta!r}")
            return BAD_INPUT
    cases = [
        BenchCase(n, args.epsilon, resolve_delta(n, args.epsilon, args.delta), args.seed + rep, args.fallback)
        for n in args.n
        for rep in range(args.reps)
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(run_case, cases))
    else:
        rows = [run_case(c) for c in cases]
    out = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return OK


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latinfill", description="Complete sparse partial latin squares.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="write the structured square of order n")
    c.add_argument("n", type=int)
    c.add_argument("out")
    c.set_defaults(func=cmd_construct)

    c = sub.add_parser("complete", help="complete a PLS file")
    c.add_argument("input")
    c.add_argument("out")
    c.add_argument("--epsilon", type=float, default=None)
    c.add_argument("--delta", type=float, default=None)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--fallback", choices=[f.value for f in Fallback], default="oracle")
    c.set_defaults(func=cmd_complete)

    c = sub.add_parser("verify", help="validate a grid file, or check that an LS extends a PLS")
    c.add_argument("paths", nargs="+", metavar="path")
    c.set_defaults(func=cmd_verify)

    c = sub.add_parser("generate", help="write a seeded random PLS file")
    c.add_argument("n", type=int)
    c.add_argument("out")
    c.add_argument("--epsilon", type=float, required=True)
    c.add_argument("--delta", type=float, required=True)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_generate)

    c = sub.add_parser("bench", help="generate and complete many instances, emit CSV")
    c.add_argument("--n", type=_int_list, default=[500, 1000], help="orders, e.g. 500,1000")
    c.add_argument("--epsilon", type=float, default=0.005)
    c.add_argument("--delta", default="auto", help="density, or 'auto'")
    c.add_argument("--reps", type=int, default=5)
    c.add_argument("--seed", type=int, default=0, help="seed of the first repetition")
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--fallback", choices=[f.value for f in Fallback], default="fail")
    c.add_argument("--csv", default=None, help="output path (stdout if omitted)")
    c.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    if getattr(args, "command", None) == "verify" and len(args.paths) > 2:
        _err("verify takes one or two paths")
        return BAD_INPUT
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
