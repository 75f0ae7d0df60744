import numpy as np
import pytest

from hdicho.errors import IntegrationError
from hdicho.evaluator import TransitionEvaluator
from hdicho.mathtools import geometric_grid, opnorm
from hdicho.systems import make_builtin

from conftest import quad_solution


def test_transition_at_equal_times_is_identity(diag_exp_ev):
    np.testing.assert_array_equal(diag_exp_ev.transition(1.3, 1.3), np.eye(2))


def test_transition_against_closed_form(diag_id_ev):
    M = diag_id_ev.transition(2.0, 1.0)
    np.testing.assert_allclose(M, np.diag([0.5, 2.0]), atol=1e-8)


def test_fundamental_normalization(diag_exp_ev):
    np.testing.assert_array_equal(diag_exp_ev.fundamental(0.0), np.eye(2))
    np.testing.assert_allclose(
        diag_exp_ev.fundamental(1.0), np.diag([np.exp(-1), np.exp(1)]), atol=1e-8
    )


def test_solve_examples(counter_ev):
    x0 = np.array([1.0])
    np.testing.assert_array_equal(counter_ev.solve(0.5, 0.5, x0), x0)
    # pure 1/t piece: x proportional to t
    assert counter_ev.solve(0.25, 0.5, x0)[0] == pytest.approx(0.5, rel=1e-9)
    # across the bridge, against the independent quadrature oracle
    assert counter_ev.solve(1.25, 0.5, x0)[0] == pytest.approx(
        quad_solution(1.25, 0.5), rel=1e-6
    )
    assert counter_ev.solve(1.25, 0.5, x0)[0] == pytest.approx(np.exp(0.75), rel=1e-6)


@pytest.mark.parametrize(
    "fixture", ["diag_exp_ev", "diag_id_ev", "counter_ev", "demo_ev"]
)
def test_oracle_match_on_grid(fixture, request):
    """Numeric transitions match the closed form on a 20 x 20 pair grid."""
    ev = request.getfixturevalue(fixture)
    cf = ev.system.closed_form_fundamental
    g = ev.growth
    pts = np.asarray(g.inverse(np.logspace(-1.3, 1.3, 20)))
    cf_mats = [np.asarray(cf(t)) for t in pts]
    worst = 0.0
    for i, t in enumerate(pts):
        for j, s in enumerate(pts):
            ref = cf_mats[i] @ np.linalg.inv(cf_mats[j])
            err = opnorm(ev.transition(t, s) - ref)
            worst = max(worst, err / (1.0 + opnorm(ref)))
    assert worst <= 1e-6


@pytest.mark.parametrize("fixture", ["diag_exp_ev", "counter_ev"])
def test_cocycle_property(fixture, request):
    ev = request.getfixturevalue(fixture)
    g = ev.growth
    rng = np.random.default_rng(7)
    pts = np.asarray(g.inverse(10.0 ** rng.uniform(-2, 2, size=(50, 3))))
    for t, s, r in pts:
        lhs = ev.transition(t, s) @ ev.transition(s, r)
        ref = ev.transition(t, r)
        assert opnorm(lhs - ref) <= 100.0 * ev.rel_tol * (1.0 + opnorm(ref))


def test_inverse_consistency(diag_id_ev):
    rng = np.random.default_rng(3)
    for _ in range(20):
        t, s = 10.0 ** rng.uniform(-2, 2, 2)
        prod = diag_id_ev.transition(s, t) @ diag_id_ev.transition(t, s)
        assert opnorm(prod - np.eye(2)) <= 1e-6


def test_liouville_determinant_positive(counter_ev, diag_exp_ev):
    for ev, pairs in (
        (counter_ev, [(0.01, 1.0), (100.0, 0.2), (1.25, 0.75)]),
        (diag_exp_ev, [(-4.0, 4.0), (3.0, -3.0)]),
    ):
        for t, s in pairs:
            assert np.linalg.det(ev.transition(t, s)) > 0.0


def test_cache_behaves_as_if_absent(g_id):
    sysm = make_builtin("h_diagonal", g_id, {"alpha": 1.0})
    ev1 = TransitionEvaluator(sysm, g_id)
    ev2 = TransitionEvaluator(sysm, g_id)
    a = ev1.transition(5.0, 1.0)
    _ = ev1.transition(2.0, 1.0)  # populate more cache entries
    b = ev1.transition(5.0, 1.0)  # cache hit
    c = ev2.transition(5.0, 1.0)  # fresh evaluator
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(a, c)
    assert ev1.stats["cache_hits"] >= 1


def test_threaded_grid_matches_serial(g_id, monkeypatch):
    sysm = make_builtin("h_diagonal", g_id, {"alpha": 1.0})
    pts = geometric_grid(g_id, 0.1, 10.0, 8)
    serial = TransitionEvaluator(sysm, g_id).fundamental_grid(pts)
    monkeypatch.setenv("HDICHO_THREADS", "4")
    threaded = TransitionEvaluator(sysm, g_id).fundamental_grid(pts)
    np.testing.assert_array_equal(serial, threaded)


def test_breakpoint_alignment(counter_ev):
    """Crossing the bridge kinks stays at oracle accuracy."""
    for t, s in [(3.0, 0.2), (0.2, 3.0), (1.6, 0.4), (1.25, 0.5)]:
        assert counter_ev.transition(t, s)[0, 0] == pytest.approx(
            quad_solution(t, s), rel=1e-8
        )


def test_domain_violation_reported(counter_ev):
    with pytest.raises((IntegrationError, Exception)):
        counter_ev.transition(-1.0, 1.0)


def test_anchor_override(g_id):
    sysm = make_builtin("floquet_demo", g_id, {"alpha": 1.0})
    ev = TransitionEvaluator(sysm, g_id, anchor=2.0)
    np.testing.assert_array_equal(ev.fundamental(2.0), np.eye(2))
