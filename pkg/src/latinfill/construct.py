"""Structured latin squares rich in intercalates.

Even orders use the block square ``A B / B^T A^T`` with ``A`` and ``B``
circulant on the low and high halves of the symbol set. Every cell then forms
an intercalate with each cell of its row lying in the other column half.

Odd orders prolong an even square along a transversal. For ``n = 4k - 1`` the
``(4k - 2)``-square has no transversal until three 2x2 trades are applied in
its last rows and columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidTransversal, TemplateMismatch, UnsupportedOrder
from .model import CellCoord, DisturbanceLedger, LatinGrid, TradeDelta, apply_delta


@dataclass(frozen=True)
class StructureMap:
    """Where the block structure of a constructed square still holds.

    ``half_order`` is the block size of the even base square, so the base has
    order ``2 * half_order``. Cells in ``construction_disturbed`` (and every
    cell of an added row or column) carry no structural guarantee.
    """

    order: int
    base_even_order: int
    half_order: int
    construction_disturbed: frozenset[CellCoord] = field(default_factory=frozenset)

    def quadrant_of(self, cell: CellCoord) -> str | None:
        r, c = cell
        h = self.half_order
        if r > self.base_even_order or c > self.base_even_order:
            return None
        return ("T" if r <= h else "B") + ("L" if c <= h else "R")

    def is_structured(self, cell: CellCoord) -> bool:
        return self.quadrant_of(cell) is not None and cell not in self.construction_disturbed

    def opposite_halves(self, a: int, b: int) -> bool:
        """Whether two row (or column) indices of the base lie in different halves."""
        h = self.half_order
        return (a <= h) != (b <= h)


@dataclass(frozen=True)
class Transversal:
    cells: tuple[CellCoord, ...]

    def __len__(self) -> int:
        return len(self.cells)

    def validate(self, grid: LatinGrid) -> None:
        n = grid.order
        rows = sorted(r for r, _ in self.cells)
        cols = sorted(c for _, c in self.cells)
        if rows != list(range(1, n + 1)) or cols != list(range(1, n + 1)):
            raise InvalidTransversal("transversal must use every row and column once")
        syms = {grid[cell] for cell in self.cells}
        if len(syms) != n:
            raise InvalidTransversal(f"transversal repeats symbols ({len(syms)} distinct of {n})")

    def is_valid(self, grid: LatinGrid) -> bool:
        try:
            self.validate(grid)
        except InvalidTransversal:
            return False
        return True


def even_cells(k: int) -> np.ndarray:
    """The closed form of the even square of order ``2k`` as a 0-indexed array."""
    if k < 1:
        raise UnsupportedOrder(f"half order must be positive, got {k}")
    i = np.arange(1, 2 * k + 1)[:, None]
    j = np.arange(1, 2 * k + 1)[None, :]
    top = i <= k
    left = j <= k
    # residues are taken in 1..k
    forward = (j - i) % k + 1
    backward = (i - j) % k + 1
    cells = np.where(top, forward, backward)
    cells = cells + np.where(top != left, k, 0)
    return cells.astype(np.uint16)


def build_even(k: int) -> tuple[LatinGrid, StructureMap]:
    grid = LatinGrid(even_cells(k), check=False)
    return grid, StructureMap(order=2 * k, base_even_order=2 * k, half_order=k)


def transversal_4k_plus_1(k: int) -> Transversal:
    """Transversal of ``build_even(2k)`` used to reach order ``4k + 1``."""
    if k < 1:
        raise UnsupportedOrder(f"k must be positive, got {k}")
    cells = [(i, 2 * i - 1) for i in range(1, k + 1)]
    cells += [(k + j, 2 * k + 2 * j - 1) for j in range(1, k + 1)]
    cells += [(2 * k + j, 2 * k + 2 * j) for j in range(1, k + 1)]
    cells += [(3 * k + j, 2 * j) for j in range(1, k + 1)]
    t = Transversal(tuple(cells))
    t.validate(build_even(2 * k)[0])
    return t


def transversal_4k_minus_1(k: int, grid: LatinGrid | None = None) -> Transversal:
    """Transversal of the prepared order-``(4k - 2)`` square."""
    if k < 2:
        raise UnsupportedOrder(f"k must be at least 2, got {k}")
    cells = [(i, 2 * i - 1) for i in range(1, k + 1)]
    cells += [(k + j, 2 * k + 2 * (j - 1)) for j in range(1, k)]
    cells += [(2 * k - 1 + j, 2 * k + 1 + 2 * (j - 1)) for j in range(1, k)]
    cells += [(3 * k - 2 + j, 2 * j) for j in range(1, k)]
    cells.append((4 * k - 2, 4 * k - 2))
    t = Transversal(tuple(cells))
    if grid is None:
        grid, _ = prepare_4k_minus_1(build_even(2 * k - 1)[0])
    t.validate(grid)
    return t


def _row_intercalate_swap(grid: LatinGrid, row: int, col_a: int, col_b: int) -> TradeDelta:
    a, b = grid[(row, col_a)], grid[(row, col_b)]
    x = grid.row_of(col_a, b)
    if grid[(x, col_b)] != a:
        raise TemplateMismatch(
            f"cells ({row}, {col_a}) and ({row}, {col_b}) do not complete to an intercalate"
        )
    return TradeDelta.from_symbols(
        {(row, col_a): (a, b), (row, col_b): (b, a), (x, col_a): (b, a), (x, col_b): (a, b)}
    )


def prepare_4k_minus_1(grid: LatinGrid) -> tuple[LatinGrid, list[TradeDelta]]:
    """Apply the three 2x2 trades that give ``build_even(2k - 1)`` a transversal."""
    m = grid.order
    if m % 4 != 2 or m < 6:
        raise UnsupportedOrder(f"expected an order 4k - 2 with k >= 2, got {m}")
    k = (m + 2) // 4
    work = grid.copy()
    trades = []

    first = _row_intercalate_swap(work, m, work.col_of(m, 2), work.col_of(m, m))
    apply_delta(work, first, inplace=True)
    trades.append(first)

    t = work.transpose()
    second = _row_intercalate_swap(t, m, t.col_of(m, 2 * k - 1), t.col_of(m, m)).transpose()
    apply_delta(work, second, inplace=True)
    trades.append(second)

    corner = [(m - 1, m - 1), (m - 1, m), (m, m - 1), (m, m)]
    if [work[c] for c in corner] != [1, m, m, 1]:
        raise TemplateMismatch(f"last 2x2 block is {[work[c] for c in corner]}, expected 1/{m}/{m}/1")
    third = TradeDelta.from_symbols(
        {(m - 1, m - 1): (1, m), (m - 1, m): (m, 1), (m, m - 1): (m, 1), (m, m): (1, m)}
    )
    apply_delta(work, third, inplace=True)
    trades.append(third)
    return work, trades


def prolong(
    grid: LatinGrid, t: Transversal, *, base: StructureMap | None = None
) -> tuple[LatinGrid, StructureMap]:
    """Extend an order-``m`` square by one row and column along ``t``."""
    t.validate(grid)
    m = grid.order
    cells = np.zeros((m + 1, m + 1), dtype=grid.cells.dtype)
    cells[:m, :m] = grid.cells
    for r, c in t.cells:
        s = grid.cells[r - 1, c - 1]
        cells[m, c - 1] = s
        cells[r - 1, m] = s
        cells[r - 1, c - 1] = m + 1
    cells[m, m] = m + 1
    out = LatinGrid(cells, check=False)

    disturbed = set(t.cells)
    disturbed.update((m + 1, c) for c in range(1, m + 2))
    disturbed.update((r, m + 1) for r in range(1, m + 2))
    if base is not None:
        disturbed |= base.construction_disturbed
        even_order, half = base.base_even_order, base.half_order
    else:
        even_order, half = m, m // 2
    smap = StructureMap(
        order=m + 1,
        base_even_order=even_order,
        half_order=half,
        construction_disturbed=frozenset(disturbed),
    )
    return out, smap


def build(n: int) -> tuple[LatinGrid, StructureMap]:
    """Structured latin square of any order ``n >= 4``."""
    if n < 4:
        raise UnsupportedOrder(f"structured squares need n >= 4, got {n}")
    if n % 2 == 0:
        return build_even(n // 2)
    if n % 4 == 1:
        k = (n - 1) // 4
        base, smap = build_even(2 * k)
        return prolong(base, transversal_4k_plus_1(k), base=smap)
    k = (n + 1) // 4
    base, smap = build_even(2 * k - 1)
    prepared, trades = prepare_4k_minus_1(base)
    touched = frozenset().union(*(tr.cells for tr in trades))
    smap = StructureMap(
        order=base.order,
        base_even_order=base.order,
        half_order=smap.half_order,
        construction_disturbed=touched,
    )
    return prolong(prepared, transversal_4k_minus_1(k, prepared), base=smap)


def intercalate_partner(
    smap: StructureMap,
    grid: LatinGrid,
    a: CellCoord,
    b: CellCoord,
    ledger: DisturbanceLedger | None = None,
) -> tuple[CellCoord, CellCoord] | None:
    """Cells completing the intercalate through ``a`` and ``b``.

    ``a`` and ``b`` share a row and sit in opposite column halves of the base
    square. Returns ``None`` when any of the four cells has lost its
    structural guarantee or the intercalate is not present.
    """
    (i, j), (i2, y) = a, b
    if a == b:
        raise ValueError("cells must differ")
    if i != i2:
        raise ValueError("cells must share a row")
    if not smap.is_structured(a) or not smap.is_structured(b):
        return None
    if not smap.opposite_halves(j, y):
        raise ValueError("cells must lie in opposite column halves")
    x = grid.row_of(j, grid[b])
    partners = ((x, j), (x, y))
    if grid[(x, y)] != grid[a]:
        return None
    for cell in (a, b) + partners:
        if not smap.is_structured(cell):
            return None
        if ledger is not None and ledger.mask[cell[0] - 1, cell[1] - 1]:
            return None
    return partners
