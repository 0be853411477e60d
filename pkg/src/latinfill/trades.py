"""Swap two cells of a row (or column) with a small proper trade.

The trade is assembled from 2x2 moves on the rectangles of the working
square. With ``r2`` a helper row, ``s3 = L(r2, c1)`` and ``s4 = L(r2, c2)``,
the composition

    (r1, r2) x (c1, c2) moving s1 <-> s2            improper on its own
    (r2, r3) x (c1, c4) moving s3 <-> s2            repairs (r2, c1)
    (r2, r4) x (c2, c3) moving s4 <-> s1            repairs (r2, c2)

is proper whenever the two repair rectangles are intercalates (10 cells).
When one of them is not, two more intercalates through a sixth symbol turn it
into one first (16 cells). All moves are summed as signed cells and the
result is accepted only if every touched cell ends up proper.

Column swaps run the same search on the transposed square.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .construct import StructureMap
from .errors import NoEligibleTrade
from .model import DisturbanceLedger, LatinGrid, TradeDelta, apply_delta

MAX_TRADE_CELLS = 16


@dataclass
class SwapContext:
    """Everything a swap search reads: the square, its history and the
    cells/symbols it must leave alone.

    ``agreement`` is a boolean ``n x n`` mask (a set of 1-based cells is
    accepted too). With ``relaxed`` set, a search that finds nothing among
    undisturbed cells of non-overloaded lines retries with only the hard
    constraints (agreement, forbidden symbols, cell budget).
    """

    grid: LatinGrid
    structure: StructureMap
    ledger: DisturbanceLedger
    agreement: np.ndarray | set | None = None
    forbidden: frozenset[int] = frozenset()
    d: float | None = None
    rng_seed: int = 0
    relaxed: bool = True
    protected: set = field(default_factory=set)
    trades_committed: int = 0

    def __post_init__(self):
        n = self.grid.order
        if self.agreement is None:
            self.agreement = np.zeros((n, n), dtype=bool)
        elif not isinstance(self.agreement, np.ndarray):
            mask = np.zeros((n, n), dtype=bool)
            for r, c in self.agreement:
                mask[r - 1, c - 1] = True
            self.agreement = mask
        self.forbidden = frozenset(int(s) for s in self.forbidden)
        if self.d is None:
            self.d = self.ledger.d
        if self.d <= 0:
            raise ValueError("d must be positive")
        if len(self.forbidden) > n:
            raise ValueError("more forbidden symbols than the order")
        self.rng = np.random.default_rng(self.rng_seed)

    def reseed(self, seed: int) -> None:
        self.rng_seed = seed
        self.rng = np.random.default_rng(seed)

    def commit(self, delta: TradeDelta) -> None:
        """Apply ``delta`` to the grid and record its cells as disturbed."""
        apply_delta(self.grid, delta, inplace=True)
        changes = delta.symbol_changes()
        _record(self, {(r - 1, c - 1): v for (r, c), v in changes.items()})
        self.trades_committed += 1


def _record(ctx: SwapContext, changes):
    syms = []
    for (r, c), (b, a) in changes.items():
        syms.append((r, c, b))
        syms.append((r, c, a))
    return ctx.ledger._record0(list(changes), syms)


class _Frame:
    """Row-oriented view of the context; transposed for column swaps."""

    def __init__(self, ctx: SwapContext, transposed: bool = False):
        g, led = ctx.grid, ctx.ledger
        self.n = g.order
        self.transposed = transposed
        if transposed:
            self.L = g.cells.T
            self.rowpos, self.colpos = g.colpos, g.rowpos
            self.dist = led.mask.T
            self.rowload, self.colload = led.col_counts, led.row_counts
            self.agree = ctx.agreement.T
            self.protected = {(c, r) for r, c in ctx.protected}
        else:
            self.L = g.cells
            self.rowpos, self.colpos = g.rowpos, g.colpos
            self.dist = led.mask
            self.rowload, self.colload = led.row_counts, led.col_counts
            self.agree = ctx.agreement
            self.protected = ctx.protected
        self.symload = led.sym_counts
        self.limit = ctx.d * self.n
        self.forbidden = ctx.forbidden

    def out(self, changes):
        if self.transposed:
            return {(c, r): v for (r, c), v in changes.items()}
        return changes


# ---------------------------------------------------------------------------
# eligibility


def _c1_mask(f: _Frame, r1: int) -> np.ndarray:
    row = f.L[r1].astype(np.intp)
    ok = (f.symload[row] <= f.limit) & (f.colload <= f.limit) & ~f.agree[r1]
    if f.forbidden:
        ok &= ~np.isin(row, list(f.forbidden))
    for r, c in f.protected:
        if r == r1:
            ok[c] = False
    return ok


def _c2_mask(f: _Frame, r1: int, c1: int) -> np.ndarray:
    n = f.n
    cols = np.arange(n)
    row = f.L[r1].astype(np.intp)
    s1 = int(row[c1])
    r3 = f.colpos[c1][row].astype(np.intp)
    r4 = f.colpos[cols, s1].astype(np.intp)
    ok = cols != c1
    if f.forbidden:
        ok &= ~np.isin(row, list(f.forbidden))
    ok &= ~f.dist[r3, c1] & ~f.dist[r4, cols]
    ok &= (f.rowload[r3] <= f.limit) & (f.rowload[r4] <= f.limit)
    ok &= (f.symload[row] <= f.limit) & (f.colload <= f.limit)
    ok &= ~f.agree[r1] & ~f.agree[r3, c1] & ~f.agree[r4, cols]
    for r, c in f.protected:
        if r == r1:
            ok[c] = False
    return ok


def eligible_c1(ctx: SwapContext, r1: int) -> set[int]:
    """Columns whose cell in row ``r1`` may be the first of a swap."""
    mask = _c1_mask(_Frame(ctx), r1 - 1)
    return {int(c) + 1 for c in np.flatnonzero(mask)}


def eligible_c2(ctx: SwapContext, r1: int, c1: int) -> set[int]:
    """Columns that may be exchanged with ``(r1, c1)``."""
    mask = _c2_mask(_Frame(ctx), r1 - 1, c1 - 1)
    return {int(c) + 1 for c in np.flatnonzero(mask)}


# ---------------------------------------------------------------------------
# search


def _realize(f: _Frame, moves, r1, c1, c2, strict):
    """Sum the signed 2x2 moves; return proper changes or ``None``."""
    net: dict[tuple[int, int], Counter] = {}
    for ra, rb, ca, cb, x, y in moves:
        for cell, plus, minus in (
            ((ra, ca), y, x),
            ((rb, cb), y, x),
            ((ra, cb), x, y),
            ((rb, ca), x, y),
        ):
            acc = net.get(cell)
            if acc is None:
                acc = net[cell] = Counter()
            acc[plus] += 1
            acc[minus] -= 1
    if len(net) > MAX_TRADE_CELLS:
        return None
    L = f.L
    changes = {}
    for (r, c), acc in net.items():
        if r == r1 and c != c1 and c != c2:
            return None
        if f.agree[r, c] or (r, c) in f.protected:
            return None
        if strict and r != r1 and (f.dist[r, c] or f.rowload[r] > f.limit):
            return None
        before = int(L[r, c])
        acc[before] += 1
        live = [(s, m) for s, m in acc.items() if m]
        if len(live) != 1 or live[0][1] != 1:
            return None
        after = live[0][0]
        if before in f.forbidden or after in f.forbidden:
            return None
        if strict and (f.colload[c] > f.limit or f.symload[before] > f.limit):
            return None
        changes[(r, c)] = (before, after)
    return changes


def _side(f: _Frame, r2, c, t):
    """How to bring symbol ``t`` into ``(r2, c)`` inside rows other than r1.

    Returns ``(True, move)`` when one intercalate does it, otherwise
    ``(False, (rr, cc, u, s5))`` describing the near-intercalate to repair.
    """
    L = f.L
    u = int(L[r2, c])
    rr = int(f.colpos[c, t])
    cc = int(f.rowpos[r2, t])
    s5 = int(L[rr, cc])
    if s5 == u:
        return True, (r2, rr, c, cc, u, t)
    return False, (rr, cc, u, s5)


def _cross(f: _Frame, r2, c, t, info, s6):
    rr, cc, u, s5 = info
    L = f.L
    c6 = int(f.rowpos[r2, s6])
    x = int(f.colpos[c, s6])
    if int(L[x, c6]) != u:
        return None
    c5 = int(f.rowpos[rr, s6])
    y = int(f.colpos[cc, s6])
    if int(L[y, c5]) != s5:
        return None
    return [
        (r2, x, c, c6, u, s6),
        (rr, y, cc, c5, s5, s6),
        (r2, rr, c, cc, s6, t),
    ]


def _search(f: _Frame, rng, r1, c1, c2, strict, cross_rows=48, cross_syms=None):
    L = f.L
    n = f.n
    s1, s2 = int(L[r1, c1]), int(L[r1, c2])
    r3 = int(f.colpos[c1, s2])
    r4 = int(f.colpos[c2, s1])
    if r3 == r4:
        found = _realize(f, [(r1, r3, c1, c2, s1, s2)], r1, c1, c2, strict)
        if found is not None:
            return found
    final = (r1, None, c1, c2, s1, s2)
    pending = []
    for r2 in rng.permutation(n).tolist():
        if r2 == r1 or r2 == r3 or r2 == r4:
            continue
        ok_a, a = _side(f, r2, c1, s2)
        ok_b, b = _side(f, r2, c2, s1)
        if ok_a and ok_b:
            moves = [a, b, (r1, r2) + final[2:]]
            found = _realize(f, moves, r1, c1, c2, strict)
            if found is not None:
                return found
        elif (ok_a or ok_b) and len(pending) < cross_rows:
            pending.append((r2, ok_a, a, b))
    if cross_syms is None:
        cross_syms = n
    for r2, ok_a, a, b in pending:
        if ok_a:
            direct, c, t, info = a, c2, s1, b
        else:
            direct, c, t, info = b, c1, s2, a
        used = {s1, s2, info[2], info[3], int(L[r2, c1]), int(L[r2, c2])}
        for s6 in (rng.permutation(n)[:cross_syms] + 1).tolist():
            if s6 in used or s6 in f.forbidden:
                continue
            extra = _cross(f, r2, c, t, info, s6)
            if extra is None:
                continue
            moves = [direct, *extra, (r1, r2) + final[2:]]
            found = _realize(f, moves, r1, c1, c2, strict)
            if found is not None:
                return found
    return None


def _find(ctx: SwapContext, transposed: bool, line: int, a: int, b: int):
    """0-based search on row ``line`` (column when transposed).

    Returns ``{(r, c): (before, after)}`` in grid coordinates.
    """
    f = _Frame(ctx, transposed)
    if not (0 <= line < f.n and 0 <= a < f.n and 0 <= b < f.n):
        raise IndexError("coordinates out of range")
    if a == b:
        raise ValueError("the two cells of a swap must differ")
    for cell in ((line, a), (line, b)):
        if f.agree[cell] or cell in f.protected:
            raise NoEligibleTrade(f"cell {cell} is fixed")
        if int(f.L[cell]) in f.forbidden:
            raise NoEligibleTrade(f"cell {cell} holds a forbidden symbol")
    passes = (True, False) if ctx.relaxed else (True,)
    for strict in passes:
        found = _search(f, ctx.rng, line, a, b, strict)
        if found is not None:
            return f.out(found)
    raise NoEligibleTrade(f"no trade swaps cells {a} and {b} of line {line}")


def _to_delta(changes) -> TradeDelta:
    return TradeDelta.from_symbols({(r + 1, c + 1): v for (r, c), v in changes.items()})


def swap_in_row(ctx: SwapContext, r1: int, c1: int, c2: int) -> TradeDelta:
    """Proper trade exchanging the symbols of ``(r1, c1)`` and ``(r1, c2)``.

    At most 16 cells change, none of them fixed by ``ctx.agreement`` and
    none holding a forbidden symbol; the rest of row ``r1`` is untouched.
    The delta is returned uncommitted.
    """
    return _to_delta(_find(ctx, False, r1 - 1, c1 - 1, c2 - 1))


def swap_in_column(ctx: SwapContext, c1: int, r1: int, r2: int) -> TradeDelta:
    """Column version of :func:`swap_in_row` for cells ``(r1, c1)``, ``(r2, c1)``."""
    return _to_delta(_find(ctx, True, c1 - 1, r1 - 1, r2 - 1))


def swap_bounds(n: int, k: float, d: float, epsilon: float, a: int) -> dict[str, float]:
    """Guaranteed counts and the two slack conditions for a row swap."""
    kd = k / d
    return {
        "c1_choices": n - 2 * kd * n - epsilon * n - a,
        "c2_choices": n - 4 * kd * n - 2 * d * n - 3 * epsilon * n - a - 1,
        "slack_first": n - 4 * kd * n - 6 * d * n - 6 * epsilon * n - 3 * a - 3,
        "slack_second": n - 12 * d * n - 12 * epsilon * n - 4 * a - 12,
    }
