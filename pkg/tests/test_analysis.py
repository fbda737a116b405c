import pytest
from hypothesis import given, strategies as st

from intersection_queue.analysis import (
    criterion_lhs,
    delay_upper_bound,
    md1_waiting_time,
    per_class_load,
    stability_boundary,
    stability_criterion,
)
from intersection_queue.generator import drift_coefficients
from intersection_queue.model import CrossingTimeDistribution, IntersectionParams, VehicleClass
from intersection_queue.simulation import run_replication

CAV = IntersectionParams(0.15, 0.15, 1.0, 2.0, CrossingTimeDistribution.constant(2.77))
CONV = IntersectionParams(0.1, 0.1, 2.0, 4.0, CrossingTimeDistribution.constant(6.96))


def test_criterion_cav():
    r = stability_criterion(CAV)
    assert r.lhs == pytest.approx(0.45, abs=1e-12)
    assert r.sufficient_stable and r.margin == pytest.approx(0.55)


def test_criterion_boundary_is_not_stable():
    r = stability_criterion(CONV.with_rates(1 / 6, 1 / 6))
    assert r.lhs == 1.0 and r.margin == 0.0
    assert not r.sufficient_stable
    assert not delay_upper_bound(CONV.with_rates(1 / 6, 1 / 6)).defined


def test_criterion_exact_boundary_strict():
    # exactly representable: 0.25 * 1 + 0.5 * 1.5 = 1
    p = IntersectionParams(0.25, 0.25, 1.5, 2.5, CrossingTimeDistribution.constant(3.0))
    r = stability_criterion(p)
    assert r.lhs == 1.0
    assert not r.sufficient_stable and r.margin == 0.0


@pytest.mark.parametrize("rates", [(0.35, 0.3), (0.3, 0.35), (0.5, 0.0)])
def test_rounding_does_not_flip_boundary(rates):
    # each point has lhs exactly 1 in real arithmetic
    p = CAV.with_rates(*rates)
    assert not stability_criterion(p).sufficient_stable
    assert not delay_upper_bound(p).defined
    assert drift_coefficients(p).c == 0.0


def test_criterion_no_traffic():
    r = stability_criterion(CAV.with_rates(0, 0))
    assert r.lhs == 0 and r.sufficient_stable


@pytest.mark.parametrize(
    "params, bound",
    [(CAV, 1.150935 / 0.55), (CONV, 4.84416 / 0.4), (CAV.with_rates(0, 0), 0.0)],
)
def test_delay_bound(params, bound):
    r = delay_upper_bound(params)
    assert r.defined
    assert r.bound == pytest.approx(bound, rel=1e-12)


def test_delay_bound_values_rounded():
    assert round(delay_upper_bound(CAV).bound, 4) == 2.0926
    assert round(delay_upper_bound(CONV).bound, 3) == 12.110


def test_delay_bound_undefined_when_unstable():
    r = delay_upper_bound(CAV.with_rates(0.4, 0.4))
    assert not r.defined and r.bound is None


@pytest.mark.parametrize(
    "lam, theta, expected",
    [(0.2, 2.0, 0.8 / 1.2), (0.0, 3.0, 0.0), (0.3, 1.0, 0.3 / 1.4)],
)
def test_md1_waiting_time(lam, theta, expected):
    assert md1_waiting_time(lam, theta) == pytest.approx(expected, rel=1e-12)


def test_md1_rejects_overload():
    with pytest.raises(ValueError):
        md1_waiting_time(0.5, 2.0)


@st.composite
def valid_params(draw):
    s_min = draw(st.floats(0.5, 10.0))
    theta2 = draw(st.floats(0.0, 0.99)) * s_min
    theta1 = draw(st.floats(0.0, 1.0)) * theta2
    n = draw(st.integers(1, 4))
    extras = sorted(draw(st.lists(st.floats(0.01, 5.0), min_size=n - 1, max_size=n - 1, unique=True)))
    weights = draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n))
    total = sum(weights)
    times = [s_min] + [s_min + e for e in extras]
    pmf = CrossingTimeDistribution(tuple(times), tuple(w / total for w in weights))
    lam1 = draw(st.floats(0.0, 1.0))
    lam2 = draw(st.floats(0.0, 1.0))
    return IntersectionParams(lam1, lam2, theta1, theta2, pmf)


@given(valid_params())
def test_bound_is_d_over_c(params):
    r = delay_upper_bound(params)
    coeffs = drift_coefficients(params)
    if coeffs.c > 0:
        assert r.defined and r.bound == coeffs.d / coeffs.c
    else:
        assert not r.defined


@given(valid_params())
def test_criterion_matches_per_class_form(params):
    worst = max(per_class_load(params, y) for y in VehicleClass)
    assert criterion_lhs(params) == pytest.approx(worst, abs=1e-12)


@given(valid_params())
def test_swap_symmetry(params):
    swapped = params.with_rates(params.lambda2, params.lambda1)
    assert criterion_lhs(swapped) == criterion_lhs(params)
    assert delay_upper_bound(swapped) == delay_upper_bound(params)


@given(valid_params(), st.floats(0.0, 0.5))
def test_lhs_monotone_in_rates(params, bump):
    base = criterion_lhs(params)
    assert criterion_lhs(params.with_rates(params.lambda1 + bump, params.lambda2)) >= base
    assert criterion_lhs(params.with_rates(params.lambda1, params.lambda2 + bump)) >= base


@given(valid_params(), st.floats(0.0, 1.0))
def test_lhs_monotone_in_cooldowns(params, frac):
    gap = params.crossing.s_min - params.theta2
    more2 = IntersectionParams(params.lambda1, params.lambda2, params.theta1, params.theta2 + frac * gap * 0.99, params.crossing)
    assert criterion_lhs(more2) >= criterion_lhs(params)
    room = params.theta2 - params.theta1
    more1 = IntersectionParams(params.lambda1, params.lambda2, params.theta1 + frac * room, params.theta2, params.crossing)
    assert criterion_lhs(more1) >= criterion_lhs(params) - 1e-12


def test_lhs_monotone_in_mean_and_min():
    wide = CAV.with_rates(0.1, 0.1)
    longer_tail = IntersectionParams(0.1, 0.1, 1.0, 2.0, CrossingTimeDistribution.from_pairs([(2.77, 0.5), (6.96, 0.5)]))
    assert criterion_lhs(longer_tail) > criterion_lhs(wide)
    raised_min = IntersectionParams(0.1, 0.1, 1.0, 2.0, CrossingTimeDistribution.from_pairs([(3.5, 0.5), (6.96, 0.5)]))
    assert criterion_lhs(raised_min) < criterion_lhs(longer_tail)


@pytest.mark.parametrize("params", [CAV, CONV])
def test_boundary_vertices_on_criterion(params):
    verts = stability_boundary(params)
    assert len(verts) == 3
    for l1, l2 in verts:
        assert criterion_lhs(params.with_rates(l1, l2)) == pytest.approx(1.0, abs=1e-9)


def test_boundary_empty_without_cooldowns():
    p = IntersectionParams(1.0, 1.0, 0.0, 0.0, CrossingTimeDistribution.constant(2.0))
    assert stability_boundary(p) == []


def test_criterion_is_only_sufficient():
    # one direction, lambda*theta2 > 1 but lambda*theta1 < 1: criterion fails, system is stable
    p = CONV.with_rates(0.3, 0.0)
    assert not stability_criterion(p).sufficient_stable
    assert 0.3 * p.theta1 < 1
    short = run_replication(p, 4000.0, 0.2, seed=3)
    long = run_replication(p, 32000.0, 0.2, seed=3)
    assert abs(long.growth_rate) < 0.01
    assert long.mean_delay == pytest.approx(md1_waiting_time(0.3, 2.0), rel=0.1)
    assert long.final_x < 100 and short.final_x < 100
