import numpy as np
import pytest
from scipy.linalg import expm

from hdicho.integrate import available_backends, backend_name, integrate_matrix

BACKENDS = sorted(available_backends())


def test_backend_selected():
    assert backend_name() in ("compiled", "python")


@pytest.mark.parametrize("name", BACKENDS)
def test_constant_coefficient_vs_expm(name):
    step = available_backends()[name]
    A = np.array([[-1.0, 2.0], [-2.0, -1.0]])
    Y, stats = step(lambda t: A, 0.0, 3.7, np.eye(2), 1e-10, 1e-12, np.inf)
    np.testing.assert_allclose(Y, expm(3.7 * A), atol=1e-9)
    assert stats["steps"] > 0 and stats["evals"] >= 6 * stats["steps"]


@pytest.mark.parametrize("name", BACKENDS)
def test_backward_integration_inverts(name):
    step = available_backends()[name]

    def A(t):
        return np.array([[np.sin(t), 1.0], [0.2 * t, -np.cos(t)]])

    Y, _ = step(A, 0.5, 2.5, np.eye(2), 1e-11, 1e-13, np.inf)
    back, _ = step(A, 2.5, 0.5, Y, 1e-11, 1e-13, np.inf)
    np.testing.assert_allclose(back, np.eye(2), atol=1e-9)


@pytest.mark.parametrize("name", BACKENDS)
def test_zero_length_interval(name):
    step = available_backends()[name]
    Y0 = np.array([[1.0, 2.0], [3.0, 4.0]])
    Y, stats = step(lambda t: np.eye(2), 1.0, 1.0, Y0, 1e-10, 1e-12, np.inf)
    np.testing.assert_array_equal(Y, Y0)
    assert stats["steps"] == 0


@pytest.mark.parametrize("name", BACKENDS)
def test_tiny_final_step_is_not_underflow(name):
    step = available_backends()[name]
    Y, _ = step(lambda t: np.eye(1), 1.0, 1.0 + 1e-15, np.eye(1), 1e-10, 1e-12, np.inf)
    assert np.isfinite(Y).all()


def test_backends_agree():
    backends = available_backends()
    if len(backends) < 2:
        pytest.skip("compiled extension not built")

    def A(t):
        return np.array([[np.sin(t), 1.0], [0.2 * t, -np.cos(t)]])

    results = {}
    for name, step in backends.items():
        Y, stats = step(A, 0.5, 10.0, np.eye(2), 1e-10, 1e-12, np.inf)
        results[name] = (Y, stats)
    Yp, sp = results["python"]
    Yc, sc = results["compiled"]
    # same tableau, error norm and controller: step counts must coincide
    assert sp["steps"] == sc["steps"]
    assert sp["rejected"] == sc["rejected"]
    np.testing.assert_allclose(Yp, Yc, rtol=1e-12, atol=1e-14)


def test_max_step_is_honored():
    Y, stats = integrate_matrix(
        lambda t: np.zeros((1, 1)), 0.0, 10.0, np.eye(1), 1e-10, 1e-12, 0.25
    )
    assert stats["steps"] >= 40
    np.testing.assert_allclose(Y, np.eye(1))


def test_underflow_reported():
    # coefficient blowing up fast enough stalls the controller
    def A(t):
        return np.array([[1.0 / (1.0 - t) ** 2]])

    with pytest.raises(RuntimeError):
        integrate_matrix(A, 0.0, 1.0, np.eye(1), 1e-10, 1e-12, np.inf)
