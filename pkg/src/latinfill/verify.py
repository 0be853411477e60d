"""Validators, density profiles, an exhaustive completion oracle and a
seeded generator of sparse partial latin squares."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import GenerationFailed, OracleFailed
from .model import LatinGrid, PartialGrid, TradeDelta

ORACLE_CAP = 16


def _cells(obj) -> np.ndarray:
    if isinstance(obj, (LatinGrid, PartialGrid)):
        return obj.cells
    return np.asarray(obj)


def is_latin(grid) -> bool:
    arr = _cells(grid)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        return False
    return bool(_kernels.latin_ok(np.ascontiguousarray(arr, dtype=np.int64)))


def is_partial_latin(partial) -> bool:
    arr = _cells(partial)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        return False
    return bool(_kernels.partial_ok(np.ascontiguousarray(arr, dtype=np.int64)))


def first_conflict(cells) -> tuple[int, int, str] | None:
    """First cell (1-based) that breaks the latin property, with a reason.

    Blanks (0) are ignored, so this also serves partial squares.
    """
    arr = np.asarray(_cells(cells), dtype=np.int64)
    n = arr.shape[0]
    for i in range(n):
        for j in range(n):
            s = arr[i, j]
            if s == 0:
                continue
            if not 1 <= s <= n:
                return i + 1, j + 1, f"symbol {s} out of range"
            hit = np.flatnonzero(arr[i, :j] == s)
            if hit.size:
                return i + 1, j + 1, f"symbol {s} also at ({i + 1}, {hit[0] + 1})"
            hit = np.flatnonzero(arr[:i, j] == s)
            if hit.size:
                return i + 1, j + 1, f"symbol {s} also at ({hit[0] + 1}, {j + 1})"
    return None


def first_disagreement(grid, partial) -> tuple[int, int] | None:
    g, p = _cells(grid), _cells(partial)
    bad = np.argwhere((p != 0) & (g != p))
    if bad.size == 0:
        return None
    return int(bad[0, 0]) + 1, int(bad[0, 1]) + 1


def extends(grid, partial) -> bool:
    """Whether ``grid`` equals ``partial`` at every filled cell."""
    g, p = _cells(grid), _cells(partial)
    mask = p != 0
    return g.shape == p.shape and bool((g[mask] == p[mask]).all())


@dataclass(frozen=True)
class DensityProfile:
    order: int
    max_row_fill: int
    max_col_fill: int
    max_sym_fill: int
    total_fill: int

    @property
    def epsilon_actual(self) -> float:
        if self.order == 0:
            return 0.0
        return max(self.max_row_fill, self.max_col_fill, self.max_sym_fill) / self.order

    @property
    def delta_actual(self) -> float:
        if self.order == 0:
            return 0.0
        return self.total_fill / self.order**2


def density_profile(partial) -> DensityProfile:
    arr = _cells(partial).astype(np.int64)
    n = arr.shape[0]
    filled = arr != 0
    if n == 0 or not filled.any():
        return DensityProfile(n, 0, 0, 0, 0)
    sym = np.bincount(arr[filled], minlength=n + 1)[1:]
    return DensityProfile(
        order=n,
        max_row_fill=int(filled.sum(axis=1).max()),
        max_col_fill=int(filled.sum(axis=0).max()),
        max_sym_fill=int(sym.max()),
        total_fill=int(filled.sum()),
    )


def validate_delta(grid: LatinGrid, delta: TradeDelta) -> bool:
    """Before-values match, every line keeps its symbols, result is latin."""
    n = grid.order
    after = grid.cells.astype(np.int64)
    for (r, c), (b, a) in delta.changes.items():
        if not (1 <= r <= n and 1 <= c <= n):
            return False
        if not b.is_proper or b.symbol != grid.cells[r - 1, c - 1]:
            return False
        if not a.is_proper:
            return False
        after[r - 1, c - 1] = a.symbol
    if not delta.line_balance():
        return False
    return is_latin(after)


def intercalate_counts(grid, half: int = 0) -> np.ndarray:
    """Per-cell number of intercalates through the cell.

    With ``half > 0`` only intercalates whose other cell in the same row lies
    in the opposite column half (columns ``< half`` versus the rest) count.
    """
    if not isinstance(grid, LatinGrid):
        grid = LatinGrid(grid)
    return _kernels.partner_counts(grid.cells, grid.colpos, int(half))


def backtrack_complete(
    partial, seed: int = 0, cap: int = ORACLE_CAP, max_nodes: int | None = None
) -> LatinGrid | None:
    """Exhaustive completion search; ``None`` means no completion exists.

    Most-constrained cell first, symbols tried in a seeded random order.
    """
    arr = _cells(partial)
    n = arr.shape[0]
    if n > cap:
        raise ValueError(f"oracle is capped at order {cap}, got {n}")
    if not is_partial_latin(arr):
        return None
    work = np.ascontiguousarray(arr, dtype=np.int64).copy()
    order = np.random.default_rng(seed).permutation(n).astype(np.int64) + 1
    status = _kernels.complete_search(work, order, -1 if max_nodes is None else int(max_nodes))
    if status == 1:
        return LatinGrid(work)
    if status == 0:
        return None
    raise OracleFailed(f"node limit {max_nodes} reached at order {n}")


def generate_pls(
    n: int, epsilon: float, delta: float, seed: int = 0, max_steps: int | None = None
) -> PartialGrid:
    """Seeded random partial latin square with per-line fill at most
    ``floor(epsilon * n)`` and ``floor(delta * n**2)`` filled cells."""
    cap = math.floor(epsilon * n + 1e-9)
    target = math.floor(delta * n * n + 1e-9)
    if target == 0:
        return PartialGrid.empty(n)
    if cap < 1:
        raise ValueError("epsilon * n must be at least 1 for a nonempty square")
    if target > n * min(cap, n):
        raise GenerationFailed(f"{target} cells exceed the line caps ({n} x {cap})")
    rng = np.random.default_rng(seed)
    cells = np.zeros((n, n), dtype=np.int64)
    row_fill = np.zeros(n, dtype=np.int64)
    col_fill = np.zeros(n, dtype=np.int64)
    sym_fill = np.zeros(n + 1, dtype=np.int64)
    row_has = np.zeros((n, n + 1), dtype=bool)
    col_has = np.zeros((n, n + 1), dtype=bool)
    placed: list[tuple[int, int]] = []
    if max_steps is None:
        max_steps = 200 * target + 10 * n * n
    stalls = 0
    for _ in range(max_steps):
        if len(placed) == target:
            return PartialGrid(cells)
        open_rows = np.flatnonzero(row_fill < cap)
        open_cols = np.flatnonzero(col_fill < cap)
        r = int(open_rows[rng.integers(open_rows.size)])
        c = int(open_cols[rng.integers(open_cols.size)])
        if cells[r, c] == 0:
            ok = (sym_fill[1:] < cap) & ~row_has[r, 1:] & ~col_has[c, 1:]
            choices = np.flatnonzero(ok) + 1
            if choices.size:
                s = int(choices[rng.integers(choices.size)])
                cells[r, c] = s
                row_fill[r] += 1
                col_fill[c] += 1
                sym_fill[s] += 1
                row_has[r, s] = col_has[c, s] = True
                placed.append((r, c))
                stalls = 0
                continue
        stalls += 1
        if stalls > 4 * n and placed:
            # dead end: drop a random earlier placement
            idx = int(rng.integers(len(placed)))
            r, c = placed.pop(idx)
            s = int(cells[r, c])
            cells[r, c] = 0
            row_fill[r] -= 1
            col_fill[c] -= 1
            sym_fill[s] -= 1
            row_has[r, s] = col_has[c, s] = False
            stalls = 0
    if len(placed) == target:
        return PartialGrid(cells)
    raise GenerationFailed(f"placed {len(placed)} of {target} cells within {max_steps} steps")
