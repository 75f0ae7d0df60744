import numpy as np
import pytest

from hdicho.growth import growth_rate
from hdicho.systems import expression_system, make_builtin

from conftest import quad_solution


def test_h_diagonal_constant_for_exp():
    g = growth_rate("exp")
    sysm = make_builtin("h_diagonal", g, {"alpha": 1.0})
    for t in (-3.0, 0.0, 2.5):
        np.testing.assert_allclose(sysm.coefficient(t), np.diag([-1.0, 1.0]), atol=1e-14)


def test_counterexample_coefficient_values():
    g = growth_rate("identity")
    sysm = make_builtin("counterexample", g, {"ell": 0.5})
    assert sysm.coefficient(0.25)[0, 0] == pytest.approx(4.0)
    assert sysm.coefficient(2.0)[0, 0] == pytest.approx(-0.5)
    # bridge endpoints are pinned; the interior is the linear interpolant
    assert sysm.coefficient(0.5)[0, 0] == pytest.approx(2.0)
    assert sysm.coefficient(1.5)[0, 0] == pytest.approx(-2.0 / 3.0)
    assert sysm.breakpoints == (0.5, 1.5)


def test_floquet_demo_coefficient():
    g = growth_rate("identity")
    sysm = make_builtin("floquet_demo", g, {"alpha": 2.0})
    np.testing.assert_allclose(
        sysm.coefficient(3.0), np.diag([-2.0 / 3.0, 2.0 / 3.0]), rtol=1e-15
    )


def test_builtin_preconditions():
    g = growth_rate("identity")
    with pytest.raises(ValueError):
        make_builtin("counterexample", g, {"ell": 1.5})
    with pytest.raises(ValueError):
        make_builtin("counterexample", growth_rate("exp"), {"ell": 0.5})
    with pytest.raises(ValueError):
        make_builtin("h_diagonal", g, {"alpha": -1.0})
    with pytest.raises(ValueError):
        make_builtin("floquet_demo", growth_rate("exp"), {"alpha": 1.0})
    with pytest.raises(ValueError):
        make_builtin("nope", g, {})
    no_deriv = growth_rate("identity")
    no_deriv = type(no_deriv)(
        no_deriv.name, no_deriv.forward, no_deriv.inverse, None, no_deriv.lower_endpoint
    )
    with pytest.raises(ValueError):
        make_builtin("h_diagonal", no_deriv, {"alpha": 1.0})


@pytest.mark.parametrize(
    "kind,gname,params",
    [
        ("h_diagonal", "exp", {"alpha": 1.0}),
        ("h_diagonal", "identity", {"alpha": 2.0}),
        ("h_diagonal", "power:3", {"alpha": 0.5}),
        ("counterexample", "identity", {"ell": 0.5}),
        ("counterexample", "identity", {"ell": 0.25}),
        ("floquet_demo", "identity", {"alpha": 1.0}),
    ],
)
def test_closed_form_satisfies_ode(kind, gname, params):
    """Finite-difference check that the attached fundamental solves x' = A x."""
    g = growth_rate(gname)
    sysm = make_builtin(kind, g, params)
    cf = sysm.closed_form_fundamental
    samples = np.asarray(g.inverse(np.logspace(-1.5, 1.5, 25)))
    for t in samples:
        if any(abs(t - b) < 1e-3 for b in sysm.breakpoints):
            continue  # derivative jumps at the kinks
        step = 1e-6 * (1.0 + abs(t))
        dPhi = (np.asarray(cf(t + step)) - np.asarray(cf(t - step))) / (2.0 * step)
        A = np.asarray(sysm.coefficient(t))
        Phi = np.asarray(cf(t))
        resid = np.linalg.norm(dPhi - A @ Phi, 2)
        assert resid <= 1e-6 * (1.0 + np.linalg.norm(A, 2) * np.linalg.norm(Phi, 2))


def test_coefficient_continuity_sampled():
    g = growth_rate("identity")
    for kind, params in [
        ("h_diagonal", {"alpha": 1.0}),
        ("counterexample", {"ell": 0.5}),
        ("floquet_demo", {"alpha": 1.0}),
    ]:
        sysm = make_builtin(kind, g, params)
        for t in np.logspace(-3, 3, 200):
            assert np.all(np.isfinite(sysm.coefficient(t)))


def test_counterexample_closed_form_matches_quadrature():
    """The attached fundamental agrees with independent quadrature of a(t)."""
    g = growth_rate("identity")
    sysm = make_builtin("counterexample", g, {"ell": 0.5})
    cf = sysm.closed_form_fundamental
    for t in (0.1, 0.5, 0.9, 1.25, 1.5, 3.0, 50.0):
        expected = quad_solution(t, 1.0)  # normalized at the identity element
        assert cf(t)[0, 0] == pytest.approx(expected, rel=1e-10)


def test_counterexample_paper_pieces():
    """Outside the bridge the fundamental is proportional to t and 1/t."""
    g = growth_rate("identity")
    sysm = make_builtin("counterexample", g, {"ell": 0.5})
    cf = sysm.closed_form_fundamental
    # transition on the outer piece: (t/s)^{-1} for t >= s > 1.5
    assert cf(6.0)[0, 0] / cf(3.0)[0, 0] == pytest.approx(0.5, rel=1e-12)
    # transition on the inner piece: t/s for t <= s < 0.5
    assert cf(0.1)[0, 0] / cf(0.4)[0, 0] == pytest.approx(0.25, rel=1e-12)


def test_expression_system():
    sysm = expression_system([["-1/t", "0"], ["0", "1/t"]], lower_endpoint=0.0)
    np.testing.assert_allclose(sysm.coefficient(2.0), np.diag([-0.5, 0.5]))
    assert sysm.dim == 2
    with pytest.raises(ValueError):
        expression_system([["t", "1"]], lower_endpoint=0.0)  # not square
