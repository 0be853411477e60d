"""Turn a structured square into a completion of a sparse partial square,
one filled cell at a time.

A single fix makes ``L(r1, c1) = P(r1, c1)``. Writing ``s1 = L(r1, c1)`` and
``s2 = P(r1, c1)``, pick a cell ``(r4, c4)`` holding ``s1``; this fixes
``r2, r3`` (rows of ``s2`` in columns ``c1, c4``) and ``c2, c3`` (columns of
``s2`` in rows ``r1, r4``). Four row/column swaps that avoid ``s1`` and ``s2``
plant a helper symbol ``s3`` at ``(r1, c4)``, ``(r3, c2)`` and ``s4`` at
``(r4, c1)``, ``(r2, c3)``. The 2x2 trades ``s2/s3`` and ``s2/s4`` then
carry ``s2`` to ``(r1, c4)`` and ``(r4, c1)``, and the final ``s1/s2`` trade
on rows ``r1, r4`` and columns ``c1, c4`` lands ``s2`` in the target cell.
That is at most 4 x 16 swap cells plus 6 more, 70 in all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .construct import build
from .errors import CompletionFailed, Infeasible, NoEligibleTrade, OracleFailed
from .model import DisturbanceLedger, LatinGrid, PartialGrid, TradeDelta
from .trades import SwapContext, _find, _record
from .verify import ORACLE_CAP, backtrack_complete, density_profile

MAX_FIX_CELLS = 70
PER_FIX_OTHER = 69


class Fallback(str, Enum):
    ORACLE = "oracle"
    FAIL = "fail"


@dataclass
class CompletionConfig:
    epsilon: float | None = None
    delta: float | None = None
    d_override: float | None = None
    seed: int = 0
    max_retries_per_cell: int = 8
    fallback: Fallback = Fallback.ORACLE
    oracle_cap: int = ORACLE_CAP
    # run the trade path even when the sufficient condition fails
    require_feasible: bool = True

    def __post_init__(self):
        self.fallback = Fallback(self.fallback)
        if self.epsilon is not None and self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.delta is not None and self.delta < 0:
            raise ValueError("delta must be non-negative")


@dataclass
class CompletionReport:
    fixed_cells: int = 0
    total_disturbed: int = 0
    max_cells_per_fix: int = 0
    trades: int = 0
    fallback_used: bool = False
    construction_disturbed: int = 0
    feasible: bool = False
    feasible_compact: bool = False
    retries: int = 0
    fix_sizes: list[int] = field(default_factory=list, repr=False)

    def as_pairs(self) -> list[tuple[str, object]]:
        keys = (
            "fixed_cells", "total_disturbed", "max_cells_per_fix", "trades",
            "fallback_used", "construction_disturbed", "feasible", "feasible_compact",
            "retries",
        )
        return [(k, getattr(self, k)) for k in keys]


def choose_d(k: float, d_override: float | None = None) -> float:
    """Overload fraction ``d``; the square root of the disturbed fraction."""
    if d_override is not None:
        return float(d_override)
    if not 0 < k < 1:
        raise ValueError(f"k must lie in (0, 1), got {k}")
    return math.sqrt(k)


def fix_feasible(n: int, k: float, epsilon: float) -> bool:
    return 20 <= n - 12 * n * math.sqrt(k) - 12 * epsilon * n


def feasibility_slack(n: int, epsilon: float, delta: float) -> float:
    return n - 12 * math.sqrt(69 * delta * n * n + 3 * n + 7) - 12 * epsilon * n - 20


def completion_feasible(n: int, epsilon: float, delta: float) -> bool:
    return feasibility_slack(n, epsilon, delta) >= 0


def delta_bound_long(n: int, epsilon: float) -> float:
    """Sufficient density bound with all lower-order terms kept."""
    g = 1 - 12 * epsilon
    return (g * g - 40 * g / n + 400 / n**2 - 432 / n - 1008 / n**2) / 9936


def delta_bound_compact(epsilon: float) -> float:
    return (1 - 12 * epsilon) ** 2 / 10409


def max_feasible_delta(n: int, epsilon: float) -> float:
    """Largest ``delta`` for which :func:`completion_feasible` holds (may be < 0)."""
    room = (n - 12 * epsilon * n - 20) / 12
    if room < 0:
        return -1.0
    return (room * room - 3 * n - 7) / (69 * n * n)


def planned_k(n: int, fills: int) -> float:
    """Worst-case disturbed fraction after fixing ``fills`` cells."""
    return (PER_FIX_OTHER * fills + 3 * n + 7 + fills) / (n * n)


# ---------------------------------------------------------------------------
# one fix


class _Journal:
    """Sub-trades applied during one fix, with their ledger undo tokens."""

    def __init__(self, ctx: SwapContext):
        self.ctx = ctx
        self.entries: list[tuple[dict, object]] = []

    def commit(self, changes) -> None:
        g = self.ctx.grid
        for (r, c), (_, a) in changes.items():
            g._put(r, c, a)
        self.entries.append((changes, _record(self.ctx, changes)))

    def rollback(self, mark: int = 0) -> None:
        g = self.ctx.grid
        while len(self.entries) > mark:
            changes, token = self.entries.pop()
            for (r, c), (b, _) in changes.items():
                g._put(r, c, b)
            self.ctx.ledger._undo(token)

    def composite(self) -> dict:
        out = {}
        for changes, _ in self.entries:
            for cell, (b, a) in changes.items():
                out[cell] = (out[cell][0], a) if cell in out else (b, a)
        return out


def _swap2x2(journal: _Journal, rows, cols, x, y) -> bool:
    L = journal.ctx.grid.cells
    (ra, rb), (ca, cb) = rows, cols
    if not (L[ra, ca] == x and L[rb, cb] == x and L[ra, cb] == y and L[rb, ca] == y):
        return False
    journal.commit({(ra, ca): (x, y), (rb, cb): (x, y), (ra, cb): (y, x), (rb, ca): (y, x)})
    return True


def _plant(ctx, journal, symbol, first, second, transposed, protect, forbidden):
    """Put ``symbol`` into ``first`` and into ``second`` with two line swaps.

    ``first`` and ``second`` are ``(line, position)`` pairs in the frame's
    orientation; the symbol is fetched from elsewhere in that line.
    """
    g = ctx.grid
    pos = g.colpos if transposed else g.rowpos
    ctx.forbidden = forbidden
    placed = []
    for line, at in (first, second):
        src = int(pos[line, symbol])
        if src != at:
            ctx.protected = set(protect) | set(placed)
            try:
                changes = _find(ctx, transposed, line, at, src)
            except NoEligibleTrade:
                return False
            journal.commit(changes)
        placed.append((at, line) if transposed else (line, at))
    return True


def _anchor_ok(ctx, P, cells, banned) -> bool:
    L = ctx.grid.cells
    for r, c in cells:
        if ctx.agreement[r, c] or (r, c) in ctx.protected:
            return False
    return all(int(L[r, c]) not in banned for r, c in cells[5:])


def fix_cell(
    ctx: SwapContext,
    P: PartialGrid,
    r1: int,
    c1: int,
    *,
    anchor_tries: int = 24,
    symbol_tries: int = 12,
) -> TradeDelta:
    """Make the grid agree with ``P`` at ``(r1, c1)`` and commit the trade.

    Cells where the grid already agrees with ``P`` are left alone and no
    other cell starts agreeing by accident, so the agreement set grows by
    exactly one. The committed trade is returned.
    """
    r, c = r1 - 1, c1 - 1
    g = ctx.grid
    L = g.cells
    s2 = int(P.cells[r, c])
    s1 = int(L[r, c])
    if s2 == 0:
        raise ValueError(f"cell ({r1}, {c1}) is blank in P")
    if s2 == s1:
        raise ValueError(f"cell ({r1}, {c1}) already agrees with P")
    n = g.order
    saved_forbidden, saved_protected = ctx.forbidden, ctx.protected
    banned = saved_forbidden | {s1, s2}
    rng = ctx.rng
    rowpos, colpos = g.rowpos, g.colpos
    c2 = int(rowpos[r, s2])
    r2 = int(colpos[c, s2])
    P_cells = P.cells

    candidates = []
    for r4 in rng.permutation(n).tolist():
        if r4 in (r, r2):
            continue
        c4 = int(rowpos[r4, s1])
        if c4 == c2:
            continue
        r3 = int(colpos[c4, s2])
        c3 = int(rowpos[r4, s2])
        cells = [(r, c2), (r3, c4), (r2, c), (r4, c3), (r4, c4),
                 (r, c4), (r4, c), (r3, c2), (r2, c3)]
        if not _anchor_ok(ctx, P, cells, banned):
            continue
        candidates.append((r4, c4, r3, c3))
        if len(candidates) >= anchor_tries:
            break

    journal = _Journal(ctx)
    try:
        for r4, c4, r3, c3 in candidates:
            if _attempt(ctx, journal, rng, n, banned, r, c, r2, c2, r3, c3, r4, c4, s1, s2,
                        symbol_tries):
                comp = journal.composite()
                if _acceptable(ctx, P_cells, comp, (r, c)):
                    ctx.agreement[r, c] = True
                    ctx.trades_committed += len(journal.entries)
                    return TradeDelta.from_symbols(
                        {(i + 1, j + 1): v for (i, j), v in comp.items()}
                    )
            journal.rollback()
    finally:
        ctx.forbidden, ctx.protected = saved_forbidden, saved_protected
    journal.rollback()
    raise NoEligibleTrade(f"no trade fixes cell ({r1}, {c1})")


def _acceptable(ctx, P_cells, comp, target) -> bool:
    if len(comp) > MAX_FIX_CELLS:
        return False
    for cell, (b, a) in comp.items():
        if cell == target:
            continue
        if ctx.agreement[cell]:
            return False
        if P_cells[cell] == a:
            return False
    return True


def _attempt(ctx, journal, rng, n, banned, r1, c1, r2, c2, r3, c3, r4, c4, s1, s2, tries):
    L = ctx.grid.cells
    symbols = [s for s in (rng.permutation(n) + 1).tolist() if s not in banned]

    def stage(first, second, transposed, rows, cols):
        for s in symbols[:tries]:
            mark = len(journal.entries)
            ok = _plant(ctx, journal, s, first, second, transposed, set(), banned)
            if ok and _swap2x2(journal, rows, cols, s2, s):
                return True
            journal.rollback(mark)
        return False

    # s3 into (r1, c4) and (r3, c2), then s2 moves to (r1, c4)
    if not stage((r1, c4), (r3, c2), False, (r1, r3), (c2, c4)):
        return False
    # s4 into (r4, c1) and (r2, c3), then s2 moves to (r4, c1)
    if not stage((c1, r4), (c3, r2), True, (r2, r4), (c1, c3)):
        return False
    if not (L[r1, c1] == s1 and L[r4, c4] == s1 and L[r1, c4] == s2 and L[r4, c1] == s2):
        return False
    journal.commit({(r1, c1): (s1, s2), (r4, c4): (s1, s2), (r1, c4): (s2, s1), (r4, c1): (s2, s1)})
    return True


# ---------------------------------------------------------------------------
# driver


def _oracle_or_raise(P: PartialGrid, cfg: CompletionConfig, reason: str):
    if cfg.fallback is not Fallback.ORACLE:
        raise Infeasible(reason)
    if P.order > cfg.oracle_cap:
        raise Infeasible(f"{reason}; order {P.order} is above the oracle cap {cfg.oracle_cap}")
    grid = backtrack_complete(P, seed=cfg.seed, cap=cfg.oracle_cap)
    if grid is None:
        raise OracleFailed("the partial square has no completion")
    return grid


def complete(P: PartialGrid, cfg: CompletionConfig | None = None) -> tuple[LatinGrid, CompletionReport]:
    """Complete ``P`` by trades on the structured square of its order."""
    cfg = cfg or CompletionConfig()
    n = P.order
    prof = density_profile(P)
    eps = max(cfg.epsilon or 0.0, prof.epsilon_actual)
    dlt = max(cfg.delta or 0.0, prof.delta_actual)
    report = CompletionReport()
    report.feasible = n >= 4 and completion_feasible(n, eps, dlt)
    report.feasible_compact = eps < 1 / 12 and dlt < delta_bound_compact(eps)

    if n < 4:
        if prof.total_fill == 0 and n >= 1:
            grid = backtrack_complete(P, seed=cfg.seed, cap=max(cfg.oracle_cap, n))
            report.fallback_used = True
            return grid, report
        grid = _oracle_or_raise(P, cfg, f"order {n} has no structured square")
        report.fallback_used = True
        return grid, report

    grid, smap = build(n)
    report.construction_disturbed = len(smap.construction_disturbed)
    todo = P.disagreements(grid)
    if not todo:
        report.total_disturbed = report.construction_disturbed
        return grid, report

    if cfg.require_feasible and not report.feasible:
        grid = _oracle_or_raise(
            P, cfg, f"sufficient condition fails (n={n}, epsilon={eps:g}, delta={dlt:g})"
        )
        report.fallback_used = True
        return grid, report

    fills = prof.total_fill
    k = planned_k(n, fills)
    d = choose_d(min(k, 0.99), cfg.d_override)
    ledger = DisturbanceLedger(n, d, k)
    cells = sorted(smap.construction_disturbed)
    ledger.record(cells, [(cell, grid[cell]) for cell in cells])
    agreement = (P.cells != 0) & (P.cells == grid.cells)
    ctx = SwapContext(grid, smap, ledger, agreement, d=d, rng_seed=cfg.seed)

    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(len(todo))
    for idx in order.tolist():
        r1, c1 = todo[idx]
        if ctx.agreement[r1 - 1, c1 - 1]:
            continue
        delta = None
        for attempt in range(max(1, cfg.max_retries_per_cell)):
            if attempt:
                report.retries += 1
                ctx.reseed(int(rng.integers(2**63)))
            try:
                delta = fix_cell(ctx, P, r1, c1)
                break
            except NoEligibleTrade:
                continue
        if delta is None:
            if cfg.fallback is Fallback.ORACLE and n <= cfg.oracle_cap:
                out = _oracle_or_raise(P, cfg, "trade search exhausted")
                report.fallback_used = True
                return out, report
            raise CompletionFailed(f"no trade found for cell ({r1}, {c1}) after retries")
        report.fixed_cells += 1
        report.fix_sizes.append(len(delta))
        report.max_cells_per_fix = max(report.max_cells_per_fix, len(delta))

    report.trades = ctx.trades_committed
    report.total_disturbed = ledger.size
    return grid, report
