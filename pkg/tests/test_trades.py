import numpy as np
import pytest

from latinfill.construct import build, build_even
from latinfill.errors import NoEligibleTrade
from latinfill.model import DisturbanceLedger, LatinGrid
from latinfill.trades import (
    MAX_TRADE_CELLS,
    SwapContext,
    eligible_c1,
    eligible_c2,
    swap_bounds,
    swap_in_column,
    swap_in_row,
)
from latinfill.verify import is_latin, validate_delta


def fresh(n, d=0.25, seed=0, **kw):
    g, smap = build(n)
    return SwapContext(g, smap, DisturbanceLedger(n, d), rng_seed=seed, **kw)


def assert_row_swap(before: LatinGrid, delta, r1, c1, c2, ctx):
    assert validate_delta(before, delta)
    assert len(delta) <= MAX_TRADE_CELLS
    changes = delta.symbol_changes()
    assert changes[(r1, c1)] == (before[(r1, c1)], before[(r1, c2)])
    assert changes[(r1, c2)] == (before[(r1, c2)], before[(r1, c1)])
    for (r, c), (b, a) in changes.items():
        assert r != r1 or c in (c1, c2)
        assert not ctx.agreement[r - 1, c - 1]
        assert b not in ctx.forbidden and a not in ctx.forbidden


def test_direct_intercalate_is_four_cells():
    ctx = fresh(8)
    delta = swap_in_row(ctx, 1, 1, 5)
    assert delta.symbol_changes() == {(1, 1): (1, 5), (1, 5): (5, 1), (5, 1): (5, 1), (5, 5): (1, 5)}


def test_same_half_swap_on_order_16():
    ctx = fresh(16)
    before = ctx.grid.copy()
    delta = swap_in_row(ctx, 1, 1, 2)
    assert_row_swap(before, delta, 1, 1, 2, ctx)
    ctx.commit(delta)
    assert is_latin(ctx.grid)
    assert ctx.ledger.size == len(delta)


def test_equal_columns_rejected():
    with pytest.raises(ValueError):
        swap_in_row(fresh(8), 1, 3, 3)


def test_column_swap_direct():
    ctx = fresh(8)
    delta = swap_in_column(ctx, 1, 1, 5)
    assert len(delta) == 4
    assert delta.symbol_changes()[(1, 1)] == (1, 5)


def test_column_swap_is_transposed_row_swap():
    for seed in range(10):
        row_ctx = fresh(16, seed=seed)
        g, smap = build(16)
        col_ctx = SwapContext(g.transpose(), smap, DisturbanceLedger(16, 0.25), rng_seed=seed)
        a = swap_in_row(row_ctx, 3, 2, 7)
        b = swap_in_column(col_ctx, 3, 2, 7)
        assert a.transpose().symbol_changes() == b.symbol_changes()


def test_every_opposite_half_pair_on_fresh_square():
    ctx = fresh(16)
    g = ctx.grid
    for r in (1, 9, 16):
        for c1 in range(1, 9):
            for c2 in range(9, 17):
                delta = swap_in_row(ctx, r, c1, c2)
                assert len(delta) == 4 and validate_delta(g, delta)


def test_fixed_and_forbidden_cells_refuse():
    ctx = fresh(8, agreement={(1, 1)})
    with pytest.raises(NoEligibleTrade):
        swap_in_row(ctx, 1, 1, 2)
    ctx = fresh(8, forbidden={5})
    with pytest.raises(NoEligibleTrade):
        swap_in_row(ctx, 1, 1, 5)


def test_forced_cells_cannot_be_pinned():
    # s2 must leave its cell in column c1, so pinning that cell blocks the swap
    ctx = fresh(16, agreement={(9, 1)})
    with pytest.raises(NoEligibleTrade):
        swap_in_row(ctx, 1, 1, 9)
    assert 9 not in eligible_c2(ctx, 1, 1)


def test_agreement_cells_avoided():
    ctx = fresh(16, seed=2)
    g = ctx.grid
    first = swap_in_row(ctx, 1, 1, 2)
    forced = {(1, 1), (1, 2), (g.row_of(1, g[(1, 2)]), 1), (g.row_of(2, g[(1, 1)]), 2)}
    pinned = set(sorted(first.cells - forced)[:3])
    assert pinned
    ctx = fresh(16, seed=2, agreement=pinned)
    delta = swap_in_row(ctx, 1, 1, 2)
    assert not delta.cells & pinned
    assert_row_swap(g, delta, 1, 1, 2, ctx)


def test_eligible_c1():
    ctx = fresh(8)
    assert eligible_c1(ctx, 1) == set(range(1, 9))
    ctx = fresh(8, forbidden={ctx.grid[(1, 5)]})
    assert 5 not in eligible_c1(ctx, 1)
    ctx = fresh(8, d=0.25)
    ctx.ledger.record([(r, 3) for r in range(2, 6)])
    assert 3 not in eligible_c1(ctx, 1)


def test_eligible_c2():
    ctx = fresh(8)
    assert eligible_c2(ctx, 1, 1) == set(range(2, 9))
    ctx = fresh(8, agreement={(1, 6)})
    assert 6 not in eligible_c2(ctx, 1, 1)
    assert len(eligible_c2(fresh(32), 1, 1)) >= 15


def test_eligibility_meets_counting_bounds():
    n, d, eps, a = 64, 0.25, 0.0, 2
    rng = np.random.default_rng(3)
    g, smap = build(n)
    led = DisturbanceLedger(n, d)
    flat = rng.choice(n * n, size=60, replace=False)
    led.record([(int(i) // n + 1, int(i) % n + 1) for i in flat])
    k = led.size / n**2
    ctx = SwapContext(g, smap, led, forbidden={1, 2})
    bounds = swap_bounds(n, k, d, eps, a)
    for r1 in range(1, n + 1, 7):
        c1s = eligible_c1(ctx, r1)
        assert len(c1s) >= bounds["c1_choices"]
        c1 = min(c1s)
        assert len(eligible_c2(ctx, r1, c1)) >= bounds["c2_choices"]


def test_swaps_on_odd_orders():
    for n in (13, 15, 17, 19):
        ctx = fresh(n, seed=n)
        rng = np.random.default_rng(n)
        for _ in range(30):
            r1 = int(rng.integers(1, n + 1))
            c1, c2 = (int(x) + 1 for x in rng.choice(n, size=2, replace=False))
            before = ctx.grid.copy()
            try:
                delta = swap_in_row(ctx, r1, c1, c2)
            except NoEligibleTrade:
                continue
            assert_row_swap(before, delta, r1, c1, c2, ctx)
            ctx.commit(delta)
        assert is_latin(ctx.grid)


def test_many_sequential_swaps_stay_latin():
    # 100 swaps leave roughly a quarter of the cells disturbed
    ctx = fresh(64, seed=5)
    rng = np.random.default_rng(5)
    done = 0
    sizes = set()
    for _ in range(100):
        r1 = int(rng.integers(1, 65))
        c1, c2 = (int(x) + 1 for x in rng.choice(64, size=2, replace=False))
        before = ctx.grid.copy()
        delta = swap_in_row(ctx, r1, c1, c2)
        assert validate_delta(before, delta)
        assert len(delta) <= MAX_TRADE_CELLS
        sizes.add(len(delta))
        ctx.commit(delta)
        done += 1
    assert done == 100 and is_latin(ctx.grid)
    # direct intercalates, two-sided repairs and repairs through a sixth symbol
    assert {4, 10, 16} <= sizes


def test_swap_bounds_arithmetic():
    b = swap_bounds(1000, 0.01, 0.1, 0.0, 0)
    assert b["c1_choices"] == pytest.approx(1000 - 200)
    assert b["slack_second"] == pytest.approx(1000 - 1200 - 12)
