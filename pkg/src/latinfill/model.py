"""Grids, signed cells, trade deltas and the disturbance ledger.

Coordinates and symbols in the public interface are 1-based, as in the usual
notation. The backing numpy arrays are indexed from 0; the engine works on
them directly and converts at the boundary.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import _kernels
from .errors import BeforeMismatch, ImproperCommit, UnbalancedDelta

CellCoord = tuple[int, int]

GRID_DTYPE = np.uint16


class LatinGrid:
    """An order-``n`` latin square over the symbols ``1..n``.

    ``cells`` holds the symbols in a 0-indexed ``uint16`` array. Position
    indices (``rowpos``/``colpos``) are built lazily and kept in sync by the
    in-place update path.
    """

    def __init__(self, cells, *, check: bool = True):
        arr = np.array(cells, dtype=GRID_DTYPE, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square array, got shape {arr.shape}")
        if check and not _kernels.latin_ok(arr):
            raise ValueError("array is not a latin square")
        self.cells = arr
        self._rowpos = None
        self._colpos = None

    @property
    def order(self) -> int:
        return self.cells.shape[0]

    @property
    def rowpos(self) -> np.ndarray:
        if self._rowpos is None:
            self._rowpos, self._colpos = _kernels.position_index(self.cells)
        return self._rowpos

    @property
    def colpos(self) -> np.ndarray:
        if self._colpos is None:
            self._rowpos, self._colpos = _kernels.position_index(self.cells)
        return self._colpos

    def __getitem__(self, rc: CellCoord) -> int:
        r, c = rc
        _check_coord(r, c, self.order)
        return int(self.cells[r - 1, c - 1])

    def col_of(self, row: int, symbol: int) -> int:
        """Column (1-based) holding ``symbol`` in ``row``."""
        return int(self.rowpos[row - 1, symbol]) + 1

    def row_of(self, col: int, symbol: int) -> int:
        """Row (1-based) holding ``symbol`` in ``col``."""
        return int(self.colpos[col - 1, symbol]) + 1

    def copy(self) -> LatinGrid:
        out = LatinGrid.__new__(LatinGrid)
        out.cells = self.cells.copy()
        out._rowpos = None if self._rowpos is None else self._rowpos.copy()
        out._colpos = None if self._colpos is None else self._colpos.copy()
        return out

    def transpose(self) -> LatinGrid:
        out = LatinGrid.__new__(LatinGrid)
        out.cells = np.ascontiguousarray(self.cells.T)
        out._rowpos = None if self._colpos is None else self._colpos.copy()
        out._colpos = None if self._rowpos is None else self._rowpos.copy()
        return out

    def tolist(self) -> list[list[int]]:
        return self.cells.astype(int).tolist()

    def _put(self, r: int, c: int, s: int) -> None:
        # 0-based write; callers must leave the grid latin once a batch ends
        self.cells[r, c] = s
        if self._rowpos is not None:
            self._rowpos[r, s] = c
            self._colpos[c, s] = r

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatinGrid):
            return NotImplemented
        return np.array_equal(self.cells, other.cells)

    def __repr__(self) -> str:
        return f"LatinGrid(order={self.order})"


class PartialGrid:
    """An order-``n`` partial latin square; 0 in ``cells`` marks a blank."""

    def __init__(self, cells, *, check: bool = True):
        arr = np.array(cells, dtype=GRID_DTYPE, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square array, got shape {arr.shape}")
        if check and not _kernels.partial_ok(arr):
            raise ValueError("array is not a partial latin square")
        self.cells = arr

    @classmethod
    def empty(cls, n: int) -> PartialGrid:
        return cls(np.zeros((n, n), dtype=GRID_DTYPE), check=False)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int | None]]) -> PartialGrid:
        return cls([[0 if v is None else v for v in row] for row in rows])

    @property
    def order(self) -> int:
        return self.cells.shape[0]

    def __getitem__(self, rc: CellCoord) -> int | None:
        r, c = rc
        _check_coord(r, c, self.order)
        v = int(self.cells[r - 1, c - 1])
        return v or None

    def filled_cells(self) -> list[CellCoord]:
        rows, cols = np.nonzero(self.cells)
        return [(int(r) + 1, int(c) + 1) for r, c in zip(rows, cols)]

    @property
    def fill_count(self) -> int:
        return int(np.count_nonzero(self.cells))

    def extended_by(self, grid: LatinGrid) -> bool:
        """True when ``grid`` agrees with every filled cell."""
        mask = self.cells != 0
        return bool((grid.cells[mask] == self.cells[mask]).all())

    def disagreements(self, grid: LatinGrid) -> list[CellCoord]:
        mask = (self.cells != 0) & (grid.cells != self.cells)
        rows, cols = np.nonzero(mask)
        return [(int(r) + 1, int(c) + 1) for r, c in zip(rows, cols)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PartialGrid):
            return NotImplemented
        return np.array_equal(self.cells, other.cells)

    def __repr__(self) -> str:
        return f"PartialGrid(order={self.order}, filled={self.fill_count})"


def _check_coord(r: int, c: int, n: int) -> None:
    if not (1 <= r <= n and 1 <= c <= n):
        raise IndexError(f"cell ({r}, {c}) outside a grid of order {n}")


class SignedCell:
    """A nonempty signed multiset of symbols, e.g. ``b + c - a``.

    Stored as net multiplicities; zero entries are dropped. A proper cell is a
    single symbol with multiplicity +1.
    """

    __slots__ = ("_net",)

    def __init__(self, entries: Mapping[int, int] | int):
        if isinstance(entries, (int, np.integer)):
            net = {int(entries): 1}
        else:
            net = {int(s): int(m) for s, m in entries.items() if m}
        if not net:
            raise ValueError("a signed cell cannot be empty")
        self._net = net

    @property
    def entries(self) -> dict[int, int]:
        return dict(self._net)

    @property
    def is_proper(self) -> bool:
        return len(self._net) == 1 and next(iter(self._net.values())) == 1

    @property
    def symbol(self) -> int:
        if not self.is_proper:
            raise ImproperCommit(f"{self} is not a single symbol")
        return next(iter(self._net))

    @property
    def weight(self) -> int:
        return sum(self._net.values())

    def shifted(self, plus: int, minus: int) -> SignedCell:
        net = Counter(self._net)
        net[plus] += 1
        net[minus] -= 1
        return SignedCell(net)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, np.integer)):
            return self._net == {int(other): 1}
        if not isinstance(other, SignedCell):
            return NotImplemented
        return self._net == other._net

    def __hash__(self):
        return hash(frozenset(self._net.items()))

    def __repr__(self) -> str:
        parts = []
        for s, m in sorted(self._net.items(), key=lambda kv: (-kv[1], kv[0])):
            sign = "+" if m > 0 else "-"
            parts.append(f"{sign} {s}" if abs(m) == 1 else f"{sign} {abs(m)}*{s}")
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else text


def _as_signed(v) -> SignedCell:
    return v if isinstance(v, SignedCell) else SignedCell(v)


@dataclass
class TradeDelta:
    """Cell-wise changes ``cell -> (before, after)``; cells are 1-based."""

    changes: dict[CellCoord, tuple[SignedCell, SignedCell]] = field(default_factory=dict)

    def __post_init__(self):
        self.changes = {
            (int(r), int(c)): (_as_signed(b), _as_signed(a))
            for (r, c), (b, a) in self.changes.items()
        }

    @classmethod
    def from_symbols(cls, changes: Mapping[CellCoord, tuple[int, int]]) -> TradeDelta:
        return cls({cell: (SignedCell(b), SignedCell(a)) for cell, (b, a) in changes.items()})

    def __len__(self) -> int:
        return len(self.changes)

    @property
    def cells(self) -> set[CellCoord]:
        return set(self.changes)

    @property
    def is_proper(self) -> bool:
        return all(a.is_proper for _, a in self.changes.values())

    def reverse(self) -> TradeDelta:
        return TradeDelta({cell: (a, b) for cell, (b, a) in self.changes.items()})

    def transpose(self) -> TradeDelta:
        return TradeDelta({(c, r): v for (r, c), v in self.changes.items()})

    def then(self, other: TradeDelta) -> TradeDelta:
        """Delta equivalent to applying ``self`` and then ``other``.

        Works for improper intermediates too: the signed difference of
        ``other`` is added on top of ``self``'s after-values.
        """
        out = dict(self.changes)
        for cell, (b2, a2) in other.changes.items():
            if cell in out:
                b1, a1 = out[cell]
                net = Counter(a1.entries)
                net.update(a2.entries)
                net.subtract(b2.entries)
                out[cell] = (b1, SignedCell(net))
            else:
                out[cell] = (b2, a2)
        return TradeDelta(out)

    def symbol_changes(self) -> dict[CellCoord, tuple[int, int]]:
        return {cell: (b.symbol, a.symbol) for cell, (b, a) in self.changes.items()}

    def line_balance(self) -> bool:
        """True when every row and column keeps its signed symbol sums."""
        rows: dict[int, Counter] = {}
        cols: dict[int, Counter] = {}
        for (r, c), (b, a) in self.changes.items():
            for table, key in ((rows, r), (cols, c)):
                acc = table.setdefault(key, Counter())
                acc.update(a.entries)
                acc.subtract(b.entries)
        return all(not any(acc.values()) for t in (rows, cols) for acc in t.values())


def improper_2x2(
    before: Mapping[CellCoord, SignedCell | int],
    rows: tuple[int, int],
    cols: tuple[int, int],
    x: int,
    y: int,
) -> TradeDelta:
    """The 2x2 trade moving ``x``/``y`` around the rectangle ``rows x cols``.

    Cell ``(rows[0], cols[0])`` and its diagonal opposite trade ``x`` for
    ``y``; the other two trade ``y`` for ``x``. On an intercalate
    ``x y / y x`` this is the ordinary swap; elsewhere it produces signed
    cells such as ``b + c - a``. Row and column sums never change.
    """
    (ra, rb), (ca, cb) = rows, cols
    plan = {(ra, ca): (y, x), (rb, cb): (y, x), (ra, cb): (x, y), (rb, ca): (x, y)}
    changes = {}
    for cell, (plus, minus) in plan.items():
        b = _as_signed(before[cell])
        changes[cell] = (b, b.shifted(plus, minus))
    return TradeDelta(changes)


def apply_delta(grid: LatinGrid, delta: TradeDelta, *, inplace: bool = False) -> LatinGrid:
    """Commit ``delta`` to ``grid``; returns a new grid unless ``inplace``."""
    n = grid.order
    writes = []
    for (r, c), (b, a) in delta.changes.items():
        if not (1 <= r <= n and 1 <= c <= n):
            raise IndexError(f"cell ({r}, {c}) outside a grid of order {n}")
        if not b.is_proper or b.symbol != grid.cells[r - 1, c - 1]:
            raise BeforeMismatch(
                f"cell ({r}, {c}) holds {int(grid.cells[r - 1, c - 1])}, delta expects {b}"
            )
        if not a.is_proper:
            raise ImproperCommit(f"cell ({r}, {c}) would hold {a}")
        if not 1 <= a.symbol <= n:
            raise ImproperCommit(f"symbol {a.symbol} out of range at ({r}, {c})")
        writes.append((r - 1, c - 1, a.symbol))
    if not delta.line_balance():
        raise UnbalancedDelta("delta changes the symbols of some row or column")
    out = grid if inplace else grid.copy()
    for r, c, s in writes:
        out._put(r, c, s)
    return out


class ImproperGrid:
    """A latin square with a sparse overlay of signed cells."""

    def __init__(self, base: LatinGrid):
        self.base = base
        self.overlay: dict[CellCoord, SignedCell] = {}

    @property
    def order(self) -> int:
        return self.base.order

    def __getitem__(self, rc: CellCoord) -> SignedCell:
        if rc in self.overlay:
            return self.overlay[rc]
        return SignedCell(self.base[rc])

    def apply(self, delta: TradeDelta) -> None:
        for cell, (b, a) in delta.changes.items():
            if self[cell] != b:
                raise BeforeMismatch(f"cell {cell} holds {self[cell]}, delta expects {b}")
        for cell, (_, a) in delta.changes.items():
            if a.is_proper and a.symbol == self.base[cell]:
                self.overlay.pop(cell, None)
            else:
                self.overlay[cell] = a

    def is_valid(self) -> bool:
        """Every symbol sums to 1 along every touched row and column."""
        touched_rows = {r for r, _ in self.overlay}
        touched_cols = {c for _, c in self.overlay}
        n = self.order
        for r in touched_rows:
            acc = Counter()
            for c in range(1, n + 1):
                acc.update(self[(r, c)].entries)
            if not _unit_sums(acc, n):
                return False
        for c in touched_cols:
            acc = Counter()
            for r in range(1, n + 1):
                acc.update(self[(r, c)].entries)
            if not _unit_sums(acc, n):
                return False
        return True

    @property
    def is_proper(self) -> bool:
        return all(v.is_proper for v in self.overlay.values())

    def to_latin(self) -> LatinGrid:
        if not self.is_proper:
            raise ImproperCommit("grid still holds signed cells")
        cells = self.base.cells.copy()
        for (r, c), v in self.overlay.items():
            cells[r - 1, c - 1] = v.symbol
        return LatinGrid(cells)


def _unit_sums(acc: Counter, n: int) -> bool:
    return {s: m for s, m in acc.items() if m} == {s: 1 for s in range(1, n + 1)}


class DisturbanceLedger:
    """Which cells have ever been altered, tallied per row, column and symbol.

    A line is overloaded when strictly more than ``d * n`` of its entries are
    disturbed. A symbol's entries are the cells that held it before or after
    an alteration.
    """

    def __init__(self, n: int, d: float, k: float = 1.0):
        if d <= 0:
            raise ValueError("d must be positive")
        self.n = n
        self.d = float(d)
        self.k = float(k)
        self.mask = np.zeros((n, n), dtype=bool)
        self.row_counts = np.zeros(n, dtype=np.int64)
        self.col_counts = np.zeros(n, dtype=np.int64)
        self.sym_counts = np.zeros(n + 1, dtype=np.int64)
        self._sym_pairs: set[tuple[int, int, int]] = set()

    @property
    def threshold(self) -> float:
        return self.d * self.n

    @property
    def size(self) -> int:
        return int(self.row_counts.sum())

    @property
    def disturbed(self) -> set[CellCoord]:
        rows, cols = np.nonzero(self.mask)
        return {(int(r) + 1, int(c) + 1) for r, c in zip(rows, cols)}

    def record(self, cells: Iterable[CellCoord], symbols: Iterable[tuple[CellCoord, int]] = ()):
        """Mark 1-based ``cells`` disturbed; ``symbols`` pairs feed the symbol tallies."""
        return self._record0(
            [(r - 1, c - 1) for r, c in cells],
            [(r - 1, c - 1, s) for (r, c), s in symbols],
        )

    def _record0(self, cells, symbols=()):
        # returns an undo token
        new_cells = []
        for r, c in cells:
            if not self.mask[r, c]:
                self.mask[r, c] = True
                self.row_counts[r] += 1
                self.col_counts[c] += 1
                new_cells.append((r, c))
        new_pairs = []
        for r, c, s in symbols:
            key = (r, c, int(s))
            if key not in self._sym_pairs:
                self._sym_pairs.add(key)
                self.sym_counts[s] += 1
                new_pairs.append(key)
        return new_cells, new_pairs

    def _undo(self, token) -> None:
        new_cells, new_pairs = token
        for r, c in new_cells:
            self.mask[r, c] = False
            self.row_counts[r] -= 1
            self.col_counts[c] -= 1
        for key in new_pairs:
            self._sym_pairs.discard(key)
            self.sym_counts[key[2]] -= 1

    def count(self, kind: str, index: int) -> int:
        """Disturbance tally of row/col ``index`` (1-based) or of a symbol."""
        if kind == "row":
            return int(self.row_counts[index - 1])
        if kind == "col":
            return int(self.col_counts[index - 1])
        if kind == "symbol":
            return int(self.sym_counts[index])
        raise ValueError(f"unknown line kind {kind!r}")

    def is_overloaded(self, kind: str, index: int) -> bool:
        if not 1 <= index <= self.n:
            raise IndexError(f"{kind} {index} out of range")
        return self.count(kind, index) > self.threshold

    def overloaded(self, kind: str) -> np.ndarray:
        """Boolean mask over 0-based rows/cols, or over symbols 0..n."""
        table = {"row": self.row_counts, "col": self.col_counts, "symbol": self.sym_counts}[kind]
        return table > self.threshold


def record(ledger: DisturbanceLedger, cells: Iterable[CellCoord]) -> DisturbanceLedger:
    ledger.record(cells)
    return ledger


def is_overloaded(ledger: DisturbanceLedger, kind: str, index: int) -> bool:
    return ledger.is_overloaded(kind, index)
