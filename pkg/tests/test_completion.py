import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from reference_squares import STUCK_3

from latinfill.completion import (
    MAX_FIX_CELLS,
    CompletionConfig,
    choose_d,
    complete,
    completion_feasible,
    delta_bound_compact,
    delta_bound_long,
    feasibility_slack,
    fix_cell,
    fix_feasible,
    max_feasible_delta,
    planned_k,
)
from latinfill.construct import build, build_even
from latinfill.errors import CompletionFailed, Infeasible, OracleFailed
from latinfill.model import DisturbanceLedger, PartialGrid
from latinfill.trades import SwapContext
from latinfill.verify import (
    backtrack_complete,
    extends,
    generate_pls,
    is_latin,
    validate_delta,
)


def test_choose_d():
    assert choose_d(0.01) == pytest.approx(0.1)
    assert choose_d(0.25) == pytest.approx(0.5)
    assert choose_d(0.0049) == pytest.approx(0.07)
    assert choose_d(0.3, d_override=0.2) == 0.2
    with pytest.raises(ValueError):
        choose_d(0.0)


def test_fix_feasible():
    k = (69 * 40 + 3 * 1000 + 7) / 1e6
    assert k == pytest.approx(0.005767)
    assert 1000 - 12000 * math.sqrt(k) - 60 == pytest.approx(28.7, abs=0.1)
    assert fix_feasible(1000, k, 0.005)
    assert not fix_feasible(100, 0.25, 0.0)
    assert fix_feasible(20, 0.0, 0.0)


def test_completion_feasible_examples():
    assert completion_feasible(20000, 9.8e-5, 9.8e-5)
    # by hand: 20000 - 12 * sqrt(2764807) - 23.52 - 20
    assert feasibility_slack(20000, 9.8e-5, 9.8e-5) == pytest.approx(3.23, abs=0.01)
    assert not completion_feasible(10000, 9.8e-5, 9.8e-5)
    assert feasibility_slack(10000, 9.8e-5, 9.8e-5) == pytest.approx(-116.09, abs=0.01)
    assert delta_bound_compact(1 / 13) == pytest.approx(5.685e-7, rel=1e-3)
    assert delta_bound_compact(1 / 13) <= 5.7e-7


def test_long_bound_implies_feasibility():
    for n in (10**4, 2 * 10**4, 10**5, 10**6):
        for eps in (0.0, 1e-4, 1e-3, 0.01, 0.05):
            bound = delta_bound_long(n, eps)
            if bound <= 1 / n:
                continue
            assert completion_feasible(n, eps, bound * 0.999)


def test_max_feasible_delta_is_the_threshold():
    for n, eps in ((1000, 0.005), (5000, 0.001), (20000, 9.8e-5)):
        best = max_feasible_delta(n, eps)
        assert best > 0
        assert completion_feasible(n, eps, best * (1 - 1e-9))
        assert not completion_feasible(n, eps, best * 1.001 + 1e-12)
    assert max_feasible_delta(100, 0.1) < 0


def test_planned_k():
    assert planned_k(1000, 40) == pytest.approx((70 * 40 + 3007) / 1e6)


def test_fix_cell_on_order_8():
    for seed in range(10):
        g, smap = build_even(4)
        before = g.copy()
        P = PartialGrid.empty(8)
        P.cells[0, 0] = 2
        ctx = SwapContext(g, smap, DisturbanceLedger(8, 0.5), rng_seed=seed)
        delta = fix_cell(ctx, P, 1, 1)
        assert g[(1, 1)] == 2 and is_latin(g)
        assert len(delta) <= MAX_FIX_CELLS
        assert validate_delta(before, delta)
        assert ctx.agreement[0, 0] and ctx.agreement.sum() == 1


def test_fix_cell_preconditions():
    g, smap = build_even(4)
    ctx = SwapContext(g, smap, DisturbanceLedger(8, 0.5))
    P = PartialGrid.empty(8)
    with pytest.raises(ValueError):
        fix_cell(ctx, P, 1, 1)
    P.cells[0, 0] = 1
    with pytest.raises(ValueError):
        fix_cell(ctx, P, 1, 1)


def test_sequential_fixes_grow_agreement():
    n = 256
    P = generate_pls(n, 0.02, 10 / n**2, seed=3)
    g, smap = build(n)
    k = planned_k(n, 10)
    ctx = SwapContext(g, smap, DisturbanceLedger(n, choose_d(k), k), rng_seed=3)
    agree = int(((P.cells != 0) & (P.cells == g.cells)).sum())
    ctx.agreement = (P.cells != 0) & (P.cells == g.cells)
    for r, c in P.filled_cells():
        if ctx.agreement[r - 1, c - 1]:
            continue
        before = g.copy()
        delta = fix_cell(ctx, P, r, c)
        assert len(delta) <= MAX_FIX_CELLS and validate_delta(before, delta)
        now = int(((P.cells != 0) & (P.cells == g.cells)).sum())
        assert now == agree + 1
        agree = now
    assert extends(g, P)
    assert ctx.ledger.size <= 70 * 10


def test_empty_partial_returns_construction():
    for n in (8, 13, 15):
        grid, report = complete(PartialGrid.empty(n))
        assert grid == build(n)[0]
        assert report.trades == 0 and report.fixed_cells == 0


def test_agreeing_partial_needs_no_trades():
    g, _ = build(16)
    P = PartialGrid.empty(16)
    P.cells[3, 4] = g.cells[3, 4]
    grid, report = complete(P, CompletionConfig(require_feasible=False))
    assert grid == g and report.fixed_cells == 0 and report.trades == 0


def test_small_order_uses_oracle():
    P = PartialGrid.empty(7)
    P.cells[0, 0], P.cells[1, 1], P.cells[2, 3] = 1, 1, 5
    grid, report = complete(P, CompletionConfig(seed=3))
    assert report.fallback_used and is_latin(grid) and extends(grid, P)
    assert backtrack_complete(P, seed=3) is not None


def test_infeasible_without_fallback():
    P = PartialGrid.empty(7)
    P.cells[0, 0] = 2
    with pytest.raises(Infeasible):
        complete(P, CompletionConfig(fallback="fail"))


def test_stuck_square_reports_no_completion():
    with pytest.raises(OracleFailed):
        complete(PartialGrid.from_rows(STUCK_3))


def test_trade_path_failure_surfaces():
    P = generate_pls(64, 0.1, 0.07, seed=0)
    cfg = CompletionConfig(fallback="fail", require_feasible=False, max_retries_per_cell=1)
    with pytest.raises(CompletionFailed):
        complete(P, cfg)


def test_end_to_end_at_order_1000():
    P = generate_pls(1000, 0.005, 4e-5, seed=11)
    grid, report = complete(P, CompletionConfig(epsilon=0.005, delta=4e-5, seed=11, fallback="fail"))
    assert is_latin(grid) and extends(grid, P)
    assert not report.fallback_used and report.feasible
    assert report.fixed_cells == 40 and report.max_cells_per_fix <= MAX_FIX_CELLS
    assert report.total_disturbed <= 70 * 40 + 3 * 1000 + 7


def test_completion_is_deterministic():
    P = generate_pls(128, 0.05, 20 / 128**2, seed=2)
    cfg = CompletionConfig(seed=2, require_feasible=False, fallback="fail")
    a, ra = complete(P, cfg)
    b, rb = complete(P, cfg)
    assert a == b and ra.trades == rb.trades


@settings(max_examples=12, deadline=None, derandomize=True)
@given(st.sampled_from([16, 17, 19, 24, 33, 35, 48]), st.integers(1, 6), st.integers(0, 10**6))
def test_trade_path_on_light_instances(n, fills, seed):
    eps = max(2 / n, 0.1)
    P = generate_pls(n, eps, fills / n**2, seed=seed)
    cfg = CompletionConfig(seed=seed, require_feasible=False, fallback="fail")
    grid, report = complete(P, cfg)
    assert is_latin(grid) and extends(grid, P)
    assert not report.fallback_used
    assert report.max_cells_per_fix <= MAX_FIX_CELLS
    assert np.count_nonzero(P.cells) == fills
