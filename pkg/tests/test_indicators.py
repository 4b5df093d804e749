import numpy as np
import pytest
from hypothesis import given, strategies as st

from bosemarket import InvestorPanel, ProductionSeries, assess_crisis, marginal_labor_return, omega
from bosemarket.errors import (
    BoundsViolation,
    DegenerateDesign,
    EmptyPanel,
    InsufficientData,
    InvalidParameter,
    InvalidThreshold,
)
from bosemarket.indicators import CrisisAssessment, marginal_returns, omega_exact


@pytest.mark.parametrize(
    "h, identified, expected",
    [(10, [10, 10, 10], 1.0), (10, [0, 0], 0.0), (10, [10, 0], 0.5), (4, [1, 2, 3], 0.5)],
)
def test_omega_examples(h, identified, expected):
    assert omega(InvestorPanel(h, identified)) == expected


def test_omega_errors():
    with pytest.raises(BoundsViolation):
        InvestorPanel(10, [11])
    with pytest.raises(BoundsViolation):
        InvestorPanel(10, [-1])
    with pytest.raises(EmptyPanel):
        InvestorPanel(10, [])
    with pytest.raises(BoundsViolation):
        InvestorPanel(0, [0])


panels = st.integers(1, 50).flatmap(
    lambda h: st.tuples(st.just(h), st.lists(st.integers(0, h), min_size=1, max_size=30))
)


@given(panels, st.randoms())
def test_omega_permutation_invariant(panel, rnd):
    h, ids = panel
    shuffled = list(ids)
    rnd.shuffle(shuffled)
    assert omega_exact(InvestorPanel(h, ids)) == omega_exact(InvestorPanel(h, shuffled))


@given(panels)
def test_omega_duplication_invariant(panel):
    h, ids = panel
    assert omega_exact(InvestorPanel(h, ids)) == omega_exact(InvestorPanel(h, ids + ids))


@given(panels, st.data())
def test_omega_strictly_increasing(panel, data):
    h, ids = panel
    j = data.draw(st.integers(0, len(ids) - 1))
    if ids[j] == h:
        return
    bumped = list(ids)
    bumped[j] += 1
    assert omega_exact(InvestorPanel(h, bumped)) > omega_exact(InvestorPanel(h, ids))


def series_from(labor, capital, output):
    t = np.arange(len(labor))
    return ProductionSeries.from_arrays(t, labor, capital, output)


def test_affine_generator_exact():
    rng = np.random.default_rng(1)
    L = 100 + rng.normal(0, 5, 20).cumsum()
    K = 200 + rng.normal(0, 5, 20).cumsum()
    s = series_from(L, K, 2 * L + 3 * K)
    assert marginal_labor_return(s) == pytest.approx(2.0, abs=1e-9)
    assert marginal_returns(s)[1] == pytest.approx(3.0, abs=1e-9)


def test_constant_output_zero():
    rng = np.random.default_rng(2)
    L = 50 + rng.uniform(0, 10, 12)
    K = 80 + rng.uniform(0, 10, 12)
    assert marginal_labor_return(series_from(L, K, np.full(12, 7.0))) == pytest.approx(0.0, abs=1e-9)


@given(
    st.floats(-5, 5), st.floats(-5, 5), st.floats(0, 100),
    st.integers(0, 2**32 - 1), st.integers(3, 12),
)
def test_affine_exact_property(a, b, c, seed, window):
    rng = np.random.default_rng(seed)
    L = 100 + rng.uniform(-10, 10, window + 4)
    K = 100 + rng.uniform(-10, 10, window + 4)
    Y = a * L + b * K + c + 1000
    assert marginal_labor_return(series_from(L, K, Y), window) == pytest.approx(a, abs=1e-9)


def test_cobb_douglas_near_half():
    rng = np.random.default_rng(3)
    L = 100 * (1 + rng.uniform(-0.01, 0.01, 9))
    K = 100 * (1 + rng.uniform(-0.01, 0.01, 9))
    est = marginal_labor_return(series_from(L, K, np.sqrt(L * K)), 8)
    assert est == pytest.approx(0.5, rel=0.05)


def test_degenerate_and_short_series():
    L = np.arange(1, 11, dtype=float) + 10
    with pytest.raises(DegenerateDesign):
        marginal_labor_return(series_from(L, 2 * L, 3 * L))
    with pytest.raises(DegenerateDesign):
        marginal_labor_return(series_from(np.full(10, 5.0), np.full(10, 5.0), np.full(10, 1.0)))
    with pytest.raises(InsufficientData):
        marginal_labor_return(series_from(L[:5], L[:5] + 1, L[:5]), 8)
    with pytest.raises(InsufficientData):
        marginal_labor_return(series_from(L, L + 1, L), 2)


def test_series_validation():
    with pytest.raises(InvalidParameter):
        ProductionSeries(((0, 1, 1, 1), (0, 1, 1, 1)))
    with pytest.raises(BoundsViolation):
        ProductionSeries(((0, 0, 1, 1),))
    with pytest.raises(BoundsViolation):
        ProductionSeries(((0, 1, 1, -1),))


@pytest.mark.parametrize(
    "w, mr, competition, employment, alert",
    [
        (0.01, 0.001, True, True, True),
        (0.90, 0.001, False, True, False),
        (0.01, 0.50, True, False, False),
        (0.90, 0.50, False, False, False),
        (0.01, -0.001, True, True, True),
    ],
)
def test_assess_truth_table(w, mr, competition, employment, alert):
    a = assess_crisis(w, mr, 0.05, 0.01)
    assert (a.competition_flag, a.employment_flag, a.alert) == (competition, employment, alert)


def test_assess_errors_and_defaults():
    with pytest.raises(InvalidThreshold):
        assess_crisis(0.1, 0.1, 0.0, 0.01)
    with pytest.raises(InvalidThreshold):
        assess_crisis(0.1, 0.1, 0.05, -1)
    with pytest.raises(BoundsViolation):
        assess_crisis(1.5, 0.1)
    a = assess_crisis(0.04, 0.009)
    assert (a.tau_omega, a.tau_return, a.alert) == (0.05, 0.01, True)
    assert CrisisAssessment.from_dict(a.to_dict()) == a
