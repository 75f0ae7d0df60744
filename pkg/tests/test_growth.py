import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdicho.errors import GroupOverflowError, GrowthDomainError
from hdicho.growth import (
    PartitionSpec,
    abs_star,
    dist,
    growth_rate,
    identity_element,
    in_ball,
    partition,
    star,
    star_inverse,
    star_power,
)

from conftest import BUILTIN_GROWTH

REL = 1e-10


def h_points(name):
    """Sample strategy: points of J drawn uniformly in ln h over [1e-3, 1e3]."""
    g = growth_rate(name)
    return st.floats(min_value=-3.0, max_value=3.0).map(
        lambda e: float(g.inverse(10.0**e))
    )


def test_identity_element_examples():
    assert identity_element(growth_rate("exp")) == pytest.approx(0.0, abs=1e-15)
    assert identity_element(growth_rate("identity")) == pytest.approx(1.0)
    assert identity_element(growth_rate("power:3")) == pytest.approx(1.0)


def test_star_examples():
    g = growth_rate("exp")
    assert star(g, 1.0, 2.0) == pytest.approx(3.0, rel=1e-12)
    gi = growth_rate("identity")
    assert star(gi, 2.0, 3.0) == pytest.approx(6.0)
    assert star(gi, 7.5, identity_element(gi)) == pytest.approx(7.5)


def test_star_inverse_examples():
    g = growth_rate("exp")
    assert star_inverse(g, 2.0) == pytest.approx(-2.0, rel=1e-12)
    gi = growth_rate("identity")
    assert star_inverse(gi, 4.0) == pytest.approx(0.25)
    e = identity_element(gi)
    assert star_inverse(gi, e) == pytest.approx(e)


def test_star_power_examples():
    gi = growth_rate("identity")
    assert star_power(gi, 2.0, 3) == pytest.approx(8.0)
    assert star_power(gi, 5.0, 0) == pytest.approx(identity_element(gi))
    g = growth_rate("exp")
    assert star_power(g, 1.5, -2) == pytest.approx(-3.0, rel=1e-12)


def test_star_power_overflow_is_an_error():
    gi = growth_rate("identity")
    with pytest.raises(GroupOverflowError):
        star_power(gi, 1e200, 2)
    with pytest.raises(GroupOverflowError):
        star_power(gi, 1e-200, 2)  # underflow to h = 0 escapes (0, inf)


def test_abs_and_dist_examples():
    gi = growth_rate("identity")
    assert abs_star(gi, 0.5) == pytest.approx(2.0)
    assert abs_star(gi, 3.0) == pytest.approx(3.0)
    assert dist(gi, 8.0, 2.0) == pytest.approx(4.0)
    assert dist(gi, 2.0, 8.0) == pytest.approx(4.0)
    assert dist(gi, 3.0, 3.0) == pytest.approx(identity_element(gi))


def test_in_ball_boundary():
    gi = growth_rate("identity")
    assert in_ball(gi, 2.0, 8.0, 4.0)  # ratio 0.25 sits exactly on the boundary
    assert not in_ball(gi, 2.0, 8.0, 3.0)
    assert in_ball(gi, 5.0, 5.0, 1.5)
    with pytest.raises(ValueError):
        in_ball(gi, 2.0, 8.0, 1.0)  # radius must exceed the identity


def test_domain_errors():
    gi = growth_rate("identity")
    with pytest.raises(GrowthDomainError):
        star(gi, -1.0, 2.0)
    with pytest.raises(GrowthDomainError):
        abs_star(gi, 0.0)


def test_partition_examples():
    gi = growth_rate("identity")
    pts = partition(gi, PartitionSpec(anchor=1.0, mesh=2.0, k_min=0, k_max=3))
    assert pts == pytest.approx([1.0, 2.0, 4.0, 8.0])
    g = growth_rate("exp")
    pts = partition(g, PartitionSpec(anchor=0.0, mesh=1.0, k_min=0, k_max=2))
    assert pts == pytest.approx([0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        partition(gi, PartitionSpec(anchor=1.0, mesh=0.5, k_min=0, k_max=2))


@pytest.mark.parametrize("name", BUILTIN_GROWTH)
def test_partition_uniform_spacing(name):
    g = growth_rate(name)
    T = float(g.inverse(3.0))
    pts = partition(g, PartitionSpec(anchor=identity_element(g), mesh=T, k_min=-4, k_max=4))
    for a, b in zip(pts[:-1], pts[1:]):
        assert float(g.forward(dist(g, b, a))) == pytest.approx(3.0, rel=REL)


@pytest.mark.parametrize("name", BUILTIN_GROWTH)
@settings(max_examples=150, deadline=None)
@given(e1=st.floats(-3, 3), e2=st.floats(-3, 3), e3=st.floats(-3, 3))
def test_group_laws(name, e1, e2, e3):
    g = growth_rate(name)
    t, s, r = (float(g.inverse(10.0**e)) for e in (e1, e2, e3))
    ht, hs = float(g.forward(t)), float(g.forward(s))

    ts = star(g, t, s)
    assert float(g.forward(ts)) == pytest.approx(ht * hs, rel=REL)
    # commutativity and associativity, compared in h-coordinates
    assert float(g.forward(star(g, s, t))) == pytest.approx(float(g.forward(ts)), rel=REL)
    lhs = float(g.forward(star(g, ts, r)))
    rhs = float(g.forward(star(g, t, star(g, s, r))))
    assert lhs == pytest.approx(rhs, rel=REL)
    # inverse
    assert float(g.forward(star(g, t, star_inverse(g, t)))) == pytest.approx(1.0, abs=REL)
    # order compatibility
    assert (t <= s) == (ht <= hs)
    # the inversion identity for the signed difference
    left = float(g.forward(star_inverse(g, star(g, t, star_inverse(g, s)))))
    right = float(g.forward(star(g, s, star_inverse(g, t))))
    assert left == pytest.approx(right, rel=REL)
    # triangle inequality through the order-preserving h
    tri = float(g.forward(abs_star(g, ts)))
    bound = float(g.forward(abs_star(g, t))) * float(g.forward(abs_star(g, s)))
    assert tri <= bound * (1.0 + REL)


@pytest.mark.parametrize("name", BUILTIN_GROWTH)
@settings(max_examples=60, deadline=None)
@given(e=st.floats(-3, 3), k=st.integers(-5, 5))
def test_power_law(name, e, k):
    g = growth_rate(name)
    t = float(g.inverse(10.0**e))
    assert float(g.forward(star_power(g, t, k))) == pytest.approx(
        float(g.forward(t)) ** k, rel=REL
    )


@settings(max_examples=100, deadline=None)
@given(t=st.floats(-50, 50), s=st.floats(-50, 50))
def test_exp_growth_degenerates_to_addition(t, s):
    g = growth_rate("exp")
    assert star(g, t, s) == pytest.approx(t + s, rel=1e-12, abs=1e-12)
    assert star_inverse(g, t) == pytest.approx(-t, rel=1e-12, abs=1e-12)
    assert dist(g, t, s) == pytest.approx(abs(t - s), rel=1e-12, abs=1e-12)


def test_round_trip_and_derivative_invariants():
    for name in BUILTIN_GROWTH:
        g = growth_rate(name)
        for e in np.linspace(-3, 3, 41):
            t = float(g.inverse(10.0**e))
            assert abs(float(g.inverse(float(g.forward(t)))) - t) <= 1e-10 * (1 + abs(t))
            d = float(g.derivative(t))
            step = 1e-6 * (1.0 + abs(t))
            fd = (float(g.forward(t + step)) - float(g.forward(t - step))) / (2 * step)
            assert abs(d - fd) <= 1e-6 * (1.0 + d)


def test_monotonicity_sampled():
    for name in BUILTIN_GROWTH:
        g = growth_rate(name)
        ts = np.asarray(g.inverse(np.logspace(-3, 3, 101)))
        hs = np.asarray(g.forward(ts))
        assert np.all(np.diff(ts) > 0)
        assert np.all(np.diff(hs) > 0)


def test_unknown_growth_rate_rejected():
    with pytest.raises(ValueError):
        growth_rate("log")
    with pytest.raises(ValueError):
        growth_rate("power:-1")
    with pytest.raises(ValueError):
        growth_rate("power:abc")
