"""Hot inner loops.

Every kernel has a loop form (compiled with numba when enabled) and a numpy
form. ``USE_NUMBA`` picks the default; both stay importable so the benchmark
and the agreement tests can run them side by side.
"""

import numpy as np

from ._accel import USE_NUMBA, njit


def position_index(cells):
    """Return ``(rowpos, colpos)`` with ``rowpos[r, s]`` the column of symbol
    ``s`` in row ``r`` and ``colpos[c, s]`` the row of ``s`` in column ``c``.

    Indices are 0-based, symbols 1-based; column 0 of each table is unused.
    The input must be latin.
    """
    n = cells.shape[0]
    dtype = np.uint16 if n < 65535 else np.uint32
    rowpos = np.zeros((n, n + 1), dtype=dtype)
    colpos = np.zeros((n, n + 1), dtype=dtype)
    idx = np.arange(n)
    rows = np.repeat(idx, n)
    cols = np.tile(idx, n)
    flat = cells.ravel().astype(np.intp)
    rowpos[rows, flat] = cols
    colpos[cols, flat] = rows
    return rowpos, colpos


# ---------------------------------------------------------------------------
# latin / partial latin checks


def _latin_ok_loop(cells):
    n = cells.shape[0]
    if cells.shape[1] != n:
        return False
    seen = np.zeros(n + 1, dtype=np.int64)
    stamp = 0
    for r in range(n):
        stamp += 1
        for c in range(n):
            s = cells[r, c]
            if s < 1 or s > n or seen[s] == stamp:
                return False
            seen[s] = stamp
    for c in range(n):
        stamp += 1
        for r in range(n):
            s = cells[r, c]
            if seen[s] == stamp:
                return False
            seen[s] = stamp
    return True


def _latin_ok_np(cells):
    cells = np.asarray(cells)
    if cells.ndim != 2 or cells.shape[0] != cells.shape[1]:
        return False
    n = cells.shape[0]
    if n == 0:
        return True
    if cells.min() < 1 or cells.max() > n:
        return False
    target = np.arange(1, n + 1)
    return bool(
        (np.sort(cells, axis=1) == target).all()
        and (np.sort(cells, axis=0) == target[:, None]).all()
    )


def _partial_ok_loop(cells):
    n = cells.shape[0]
    if cells.shape[1] != n:
        return False
    seen = np.zeros(n + 1, dtype=np.int64)
    stamp = 0
    for r in range(n):
        stamp += 1
        for c in range(n):
            s = cells[r, c]
            if s < 0 or s > n:
                return False
            if s == 0:
                continue
            if seen[s] == stamp:
                return False
            seen[s] = stamp
    for c in range(n):
        stamp += 1
        for r in range(n):
            s = cells[r, c]
            if s == 0:
                continue
            if seen[s] == stamp:
                return False
            seen[s] = stamp
    return True


def _partial_ok_np(cells):
    cells = np.asarray(cells, dtype=np.int64)
    if cells.ndim != 2 or cells.shape[0] != cells.shape[1]:
        return False
    n = cells.shape[0]
    if n == 0:
        return True
    if cells.min() < 0 or cells.max() > n:
        return False
    for arr in (np.sort(cells, axis=1), np.sort(cells, axis=0).T):
        dup = (arr[:, 1:] == arr[:, :-1]) & (arr[:, 1:] != 0)
        if dup.any():
            return False
    return True


# ---------------------------------------------------------------------------
# intercalate counting


def _partner_counts_loop(cells, colpos, half):
    # half == 0: every row partner; otherwise only partners in the other
    # column half (left half = columns < half).
    n = cells.shape[0]
    out = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            a = cells[i, j]
            left = j < half
            for y in range(n):
                if y == j:
                    continue
                if half > 0 and (y < half) == left:
                    continue
                x = colpos[j, cells[i, y]]
                if cells[x, y] == a:
                    out[i, j] += 1
    return out


def _partner_counts_np(cells, colpos, half):
    n = cells.shape[0]
    out = np.zeros((n, n), dtype=np.int64)
    cols = np.arange(n)
    for j in range(n):
        if half > 0:
            ys = cols[(cols < half) != (j < half)]
        else:
            ys = cols[cols != j]
        if ys.size == 0:
            continue
        sym = cells[:, ys].astype(np.intp)
        x = colpos[j][sym].astype(np.intp)
        hit = cells[x, ys[None, :]] == cells[:, j][:, None]
        out[:, j] = hit.sum(axis=1)
    return out


# ---------------------------------------------------------------------------
# exhaustive completion search


def _complete_loop(grid, order, max_nodes):
    # grid: int64 (n, n), 0 = blank, filled in place.
    # Returns 1 when completed, 0 when no completion exists, -1 on node limit.
    n = grid.shape[0]
    rowhas = np.zeros((n, n + 1), dtype=np.bool_)
    colhas = np.zeros((n, n + 1), dtype=np.bool_)
    empties = 0
    for r in range(n):
        for c in range(n):
            s = grid[r, c]
            if s == 0:
                empties += 1
                continue
            if rowhas[r, s] or colhas[c, s]:
                return 0
            rowhas[r, s] = True
            colhas[c, s] = True
    cell = np.zeros(empties + 1, dtype=np.int64)
    nxt = np.zeros(empties + 1, dtype=np.int64)
    depth = 0
    nodes = 0
    select = True
    while True:
        if select:
            if depth == empties:
                return 1
            best = -1
            best_count = n + 1
            for r in range(n):
                for c in range(n):
                    if grid[r, c] != 0:
                        continue
                    cnt = 0
                    for s in range(1, n + 1):
                        if not rowhas[r, s] and not colhas[c, s]:
                            cnt += 1
                    if cnt < best_count:
                        best_count = cnt
                        best = r * n + c
                        if cnt == 0:
                            break
                if best_count == 0:
                    break
            if best_count == 0:
                if depth == 0:
                    return 0
                depth -= 1
                r = cell[depth] // n
                c = cell[depth] % n
                s = grid[r, c]
                rowhas[r, s] = False
                colhas[c, s] = False
                grid[r, c] = 0
                select = False
                continue
            cell[depth] = best
            nxt[depth] = 0
        r = cell[depth] // n
        c = cell[depth] % n
        placed = False
        i = nxt[depth]
        while i < n:
            s = order[i]
            i += 1
            if not rowhas[r, s] and not colhas[c, s]:
                grid[r, c] = s
                rowhas[r, s] = True
                colhas[c, s] = True
                nxt[depth] = i
                placed = True
                break
        if placed:
            nodes += 1
            if max_nodes >= 0 and nodes > max_nodes:
                return -1
            depth += 1
            select = True
        else:
            if depth == 0:
                return 0
            depth -= 1
            r = cell[depth] // n
            c = cell[depth] % n
            s = grid[r, c]
            rowhas[r, s] = False
            colhas[c, s] = False
            grid[r, c] = 0
            select = False


latin_ok_jit = njit(_latin_ok_loop)
partial_ok_jit = njit(_partial_ok_loop)
partner_counts_jit = njit(_partner_counts_loop)
complete_jit = njit(_complete_loop)

if USE_NUMBA:
    latin_ok = latin_ok_jit
    partial_ok = partial_ok_jit
    partner_counts = partner_counts_jit
    complete_search = complete_jit
else:
    latin_ok = _latin_ok_np
    partial_ok = _partial_ok_np
    partner_counts = _partner_counts_np
    complete_search = _complete_loop
