"""Plain-text grid files.

A file starts with ``PLS n`` or ``LS n`` followed by ``n`` rows of ``n``
whitespace-separated tokens. Tokens are symbols ``1..n``; partial squares
may use ``.`` for a blank. The canonical form uses single spaces and ends
every line with a newline.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .model import LatinGrid, PartialGrid

KINDS = ("PLS", "LS")


class GridFormatError(ValueError):
    pass


def parse(text: str) -> LatinGrid | PartialGrid:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise GridFormatError("empty grid file")
    head = lines[0].split()
    if len(head) != 2 or head[0] not in KINDS:
        raise GridFormatError(f"bad header {lines[0]!r}; expected 'PLS n' or 'LS n'")
    kind = head[0]
    try:
        n = int(head[1])
    except ValueError:
        raise GridFormatError(f"bad order {head[1]!r}") from None
    if n < 1:
        raise GridFormatError(f"order must be positive, got {n}")
    rows = lines[1:]
    if len(rows) != n:
        raise GridFormatError(f"expected {n} rows, found {len(rows)}")
    cells = np.zeros((n, n), dtype=np.int64)
    for i, line in enumerate(rows):
        toks = line.split()
        if len(toks) != n:
            raise GridFormatError(f"row {i + 1} has {len(toks)} tokens, expected {n}")
        for j, tok in enumerate(toks):
            if tok == ".":
                if kind == "LS":
                    raise GridFormatError(f"blank at ({i + 1}, {j + 1}) in an LS file")
                continue
            if not tok.isdigit() or not 1 <= int(tok) <= n:
                raise GridFormatError(f"bad symbol {tok!r} at ({i + 1}, {j + 1})")
            cells[i, j] = int(tok)
    if kind == "LS":
        return LatinGrid(cells, check=False)
    return PartialGrid(cells, check=False)


def serialize(grid: LatinGrid | PartialGrid) -> str:
    kind = "PLS" if isinstance(grid, PartialGrid) else "LS"
    arr = grid.cells
    out = [f"{kind} {arr.shape[0]}"]
    for row in arr.tolist():
        out.append(" ".join(str(v) if v else "." for v in row))
    return "\n".join(out) + "\n"


def read_grid(path) -> LatinGrid | PartialGrid:
    return parse(Path(path).read_text())


def write_grid(grid, path) -> None:
    Path(path).write_text(serialize(grid))
