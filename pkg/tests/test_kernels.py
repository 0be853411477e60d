"""The numba kernels and their numpy fallbacks must agree."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latinfill import _kernels
from latinfill._accel import NUMBA_AVAILABLE
from latinfill.construct import build
from latinfill.verify import generate_pls

needs_numba = pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba not installed")


def test_position_index():
    g, _ = build(6)
    rowpos, colpos = _kernels.position_index(g.cells)
    for r in range(6):
        for c in range(6):
            s = g.cells[r, c]
            assert rowpos[r, s] == c and colpos[c, s] == r


@needs_numba
@pytest.mark.parametrize("n", [4, 7, 13, 16, 31])
def test_latin_checks_agree(n):
    g, _ = build(n)
    cells = g.cells.copy()
    assert _kernels.latin_ok_jit(cells) and _kernels._latin_ok_np(cells)
    cells[0, 0], cells[0, 1] = cells[0, 1], cells[0, 1]
    assert not _kernels.latin_ok_jit(cells) and not _kernels._latin_ok_np(cells)


@needs_numba
@settings(max_examples=30, deadline=None, derandomize=True)
@given(st.integers(3, 20), st.integers(0, 10**6), st.booleans())
def test_partial_checks_agree(n, seed, corrupt):
    P = generate_pls(n, 0.5, 0.15, seed=seed).cells.astype(np.int64)
    if corrupt:
        P[0, 0], P[0, 1] = 1, 1
    assert bool(_kernels.partial_ok_jit(P)) == bool(_kernels._partial_ok_np(P)) == (not corrupt)


@needs_numba
@pytest.mark.parametrize("n", [6, 9, 15, 20])
def test_partner_counts_agree(n):
    g, _ = build(n)
    for half in (0, n // 2):
        a = _kernels.partner_counts_jit(g.cells, g.colpos, half)
        b = _kernels._partner_counts_np(g.cells, g.colpos, half)
        assert (np.asarray(a) == np.asarray(b)).all()


@needs_numba
@pytest.mark.parametrize("seed", range(5))
def test_completion_search_agrees(seed):
    P = generate_pls(6, 0.5, 0.3, seed=seed).cells.astype(np.int64)
    order = np.random.default_rng(seed).permutation(6).astype(np.int64) + 1
    a, b = P.copy(), P.copy()
    assert _kernels.complete_jit(a, order, -1) == _kernels._complete_loop(b, order, -1)
    assert (a == b).all()


def test_dispatch_follows_flag():
    if _kernels.USE_NUMBA:
        assert _kernels.latin_ok is _kernels.latin_ok_jit
    else:
        assert _kernels.latin_ok is _kernels._latin_ok_np
