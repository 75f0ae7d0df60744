import numpy as np
import pytest

from hdicho.evaluator import TransitionEvaluator
from hdicho.growth import growth_rate
from hdicho.systems import make_builtin

BUILTIN_GROWTH = ["exp", "identity", "power:3", "expm1"]


@pytest.fixture(scope="session")
def g_exp():
    return growth_rate("exp")


@pytest.fixture(scope="session")
def g_id():
    return growth_rate("identity")


@pytest.fixture(scope="session")
def diag_exp_ev(g_exp):
    """h_diagonal with h = exp, alpha = 1: transition diag(e^-(t-s), e^(t-s))."""
    return TransitionEvaluator(make_builtin("h_diagonal", g_exp, {"alpha": 1.0}), g_exp)


@pytest.fixture(scope="session")
def diag_id_ev(g_id):
    """h_diagonal with h = t, alpha = 1: fundamental diag(1/t, t)."""
    return TransitionEvaluator(make_builtin("h_diagonal", g_id, {"alpha": 1.0}), g_id)


@pytest.fixture(scope="session")
def counter_ev(g_id):
    """The scalar bounded-solution counterexample with ell = 0.5."""
    return TransitionEvaluator(
        make_builtin("counterexample", g_id, {"ell": 0.5}), g_id
    )


@pytest.fixture(scope="session")
def demo_ev(g_id):
    """floquet_demo with alpha = 1 on (0, inf)."""
    return TransitionEvaluator(make_builtin("floquet_demo", g_id, {"alpha": 1.0}), g_id)


def counterexample_rate(ell):
    """The scalar coefficient a(t) of the counterexample, linear bridge."""
    lo, hi = 1.0 - ell, 1.0 + ell
    phi_lo, phi_hi = 1.0 / lo, -1.0 / hi
    slope = (phi_hi - phi_lo) / (hi - lo)

    def a(t):
        if t <= lo:
            return 1.0 / t
        if t >= hi:
            return -1.0 / t
        return phi_lo + slope * (t - lo)

    return a


def quad_solution(t, t0, ell=0.5):
    """Independent quadrature oracle exp(int_{t0}^{t} a) via scipy.quad.

    Splits at the bridge endpoints so the kinks never cross a panel.
    """
    from scipy.integrate import quad

    a = counterexample_rate(ell)
    cuts = [c for c in (1.0 - ell, 1.0 + ell) if min(t0, t) < c < max(t0, t)]
    pieces = [t0] + sorted(cuts, reverse=t < t0) + [t]
    total = 0.0
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        val, err = quad(a, lo, hi, epsabs=1e-13, epsrel=1e-13)
        total += val
    return float(np.exp(total))
