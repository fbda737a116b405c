import pytest
from hypothesis import given, strategies as st

from intersection_queue.model import (
    CrossingTimeDistribution,
    IntersectionParams,
    ParamsError,
    QueueState,
    VehicleClass,
    arrival_update,
    decay_state,
    initial_state,
    pmf_stats,
    validate_params,
)

CAV = IntersectionParams(0.15, 0.15, 1.0, 2.0, CrossingTimeDistribution.constant(2.77))


def test_vehicle_class_opposite_is_involution():
    assert len(VehicleClass) == 2
    for y in VehicleClass:
        assert y.opposite != y
        assert y.opposite.opposite == y


@pytest.mark.parametrize(
    "dist, expected",
    [
        (CrossingTimeDistribution.constant(2.77), (2.77, 2.77, 2.77, 7.6729)),
        (CrossingTimeDistribution.from_pairs([(2, 0.5), (4, 0.5)]), (3, 2, 4, 10)),
        (CrossingTimeDistribution.from_pairs([(1, 1.0)]), (1, 1, 1, 1)),
    ],
)
def test_pmf_stats(dist, expected):
    assert pmf_stats(dist) == pytest.approx(expected, rel=1e-12)


def test_pmf_canonical_order_and_parse():
    d = CrossingTimeDistribution.parse("6.96:0.25, 2.77:0.75")
    assert d.times == (2.77, 6.96)
    assert d.probs == (0.75, 0.25)
    with pytest.raises(ValueError):
        CrossingTimeDistribution.parse("2.77-1")


def test_validate_cav_point():
    assert validate_params(CAV) is CAV


@pytest.mark.parametrize(
    "params, code",
    [
        (IntersectionParams(0.1, 0.1, 4.0, 2.0, CrossingTimeDistribution.constant(6.96)), "theta-order"),
        (
            IntersectionParams(0.1, 0.1, 2.0, 4.0, CrossingTimeDistribution.constant(2.77)),
            "cooldown-exceeds-min-crossing",
        ),
        (IntersectionParams(-0.1, 0.1, 1.0, 2.0, CrossingTimeDistribution.constant(2.77)), "negative-rate"),
        (
            IntersectionParams(0.1, 0.1, 1.0, 2.0, CrossingTimeDistribution.from_pairs([(3, 0.5), (4, 0.4)])),
            "pmf-not-normalized",
        ),
        (IntersectionParams(0.1, 0.1, 1.0, 2.0, CrossingTimeDistribution((), ())), "pmf-empty"),
    ],
)
def test_validate_rejects(params, code):
    with pytest.raises(ParamsError) as info:
        validate_params(params)
    assert code in info.value.violations


def test_validate_reports_all_violations():
    bad = IntersectionParams(-1, 0.1, 4.0, 2.0, CrossingTimeDistribution.from_pairs([(1.0, 0.5)]))
    with pytest.raises(ParamsError) as info:
        validate_params(bad)
    assert {"negative-rate", "theta-order", "pmf-not-normalized", "cooldown-exceeds-min-crossing"} <= set(
        info.value.violations
    )


def test_zero_rates_are_valid_for_analysis():
    validate_params(CAV.with_rates(0, 0))


@pytest.mark.parametrize("x, dt, expected", [(5, 2, 3), (1, 3, 0), (0, 1, 0)])
def test_decay_state(x, dt, expected):
    st0 = QueueState(x, VehicleClass.TWO, 2.77)
    out = decay_state(st0, dt)
    assert out == QueueState(expected, VehicleClass.TWO, 2.77)


def test_decay_rejects_negative_dt():
    with pytest.raises(ValueError):
        decay_state(QueueState(1.0, VehicleClass.ONE, 2.77), -0.1)


@pytest.mark.parametrize(
    "x, y, new_y, x_new, delay",
    [
        (0.5, 1, 1, 2.77, 0.0),  # free flow
        (3.0, 1, 1, 4.0, 1.23),  # same direction, cooldown active
        (1.0, 1, 2, 3.0, 0.23),  # cross direction, cooldown active
        (1.0, 1, 1, 2.77, 0.0),  # same direction passes in the middle band
    ],
)
def test_arrival_update_examples(x, y, new_y, x_new, delay):
    post, d = arrival_update(QueueState(x, VehicleClass(y), 2.77), VehicleClass(new_y), 2.77, CAV)
    assert post.x == pytest.approx(x_new, abs=1e-12)
    assert post.y == new_y and post.s == 2.77
    assert d == pytest.approx(delay, abs=1e-12)


def test_arrival_update_continuous_at_boundary():
    # ties take the cooldown branch with zero wait, matching the free-flow result
    params = IntersectionParams(0.1, 0.1, 1.0, 2.0, CrossingTimeDistribution.constant(3.0))
    post, d = arrival_update(QueueState(1.0, VehicleClass.ONE, 3.0), VehicleClass.TWO, 3.0, params)
    assert post.x == 3.0 and d == 0.0
    post, d = arrival_update(QueueState(2.0, VehicleClass.ONE, 3.0), VehicleClass.ONE, 3.0, params)
    assert post.x == 3.0 and d == 0.0


def test_arrival_update_rejects_unknown_crossing_time():
    with pytest.raises(ValueError):
        arrival_update(initial_state(CAV), VehicleClass.ONE, 3.0, CAV)


def test_initial_state():
    assert initial_state(CAV) == QueueState(0.0, VehicleClass.ONE, 2.77)


TWO_ATOM = IntersectionParams(0.1, 0.1, 1.0, 2.0, CrossingTimeDistribution.from_pairs([(2.77, 0.5), (6.96, 0.5)]))
xs = st.floats(0, 100, allow_nan=False)
classes = st.sampled_from(list(VehicleClass))
atoms = st.sampled_from(TWO_ATOM.crossing.times)


@given(xs, classes, atoms, classes, atoms)
def test_post_arrival_invariants(x, y, s, new_y, new_s):
    post, d = arrival_update(QueueState(x, y, s), new_y, new_s, TWO_ATOM)
    assert post.x >= new_s
    assert d >= 0
    assert post.x - new_s == pytest.approx(d, abs=1e-9)
    if x < s - TWO_ATOM.theta2:
        assert d == 0


@given(xs, xs, classes, atoms, classes, atoms)
def test_update_monotone_in_x(a, b, y, s, new_y, new_s):
    lo, hi = sorted((a, b))
    x_lo = arrival_update(QueueState(lo, y, s), new_y, new_s, TWO_ATOM)[0].x
    x_hi = arrival_update(QueueState(hi, y, s), new_y, new_s, TWO_ATOM)[0].x
    assert x_lo <= x_hi


@given(xs, st.floats(0, 50), st.floats(0, 50))
def test_decay_composes(x, a, b):
    st0 = QueueState(x, VehicleClass.ONE, 2.77)
    assert decay_state(decay_state(st0, a), b).x == pytest.approx(decay_state(st0, a + b).x, abs=1e-9)


@given(xs, classes, atoms, classes, atoms)
def test_arrival_update_is_pure(x, y, s, new_y, new_s):
    st0 = QueueState(x, y, s)
    assert arrival_update(st0, new_y, new_s, TWO_ATOM) == arrival_update(st0, new_y, new_s, TWO_ATOM)
