"""Pure-Python Dormand-Prince 5(4) stepper for matrix ODEs Y' = A(t) Y.

Algorithmic twin of the compiled core in ``_stepper.pyx``: same tableau,
same error norm, same step controller, so either backend can stand in
for the other.  Selected automatically when the extension is absent (or
forced via HDICHO_BACKEND=python).
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

# Dormand-Prince 5(4) tableau (the classic ode45 pair, FSAL).
_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
_B = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0)
# Difference between the 5th order weights and the embedded 4th order ones.
_E = (
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_ORDER_EXP = -0.2  # err^(1/5) controller for a 5(4) pair
_MAX_STEPS = 1_000_000


def _initial_step(coeff, t0, span, max_step):
    """Deterministic first-step heuristic from the local coefficient size."""
    a0 = np.asarray(coeff(t0), dtype=float)
    anorm = float(np.max(np.abs(a0)))
    h = 1e-2 / (anorm + 1e-8)
    return min(h, span, max_step)


def integrate_matrix(coeff, t0, t1, y0, rtol, atol, max_step):
    """Integrate Y' = A(t) Y from t0 to t1 with adaptive DOPRI5.

    Parameters
    ----------
    coeff : callable t -> (n, n) array
        Coefficient matrix A(t); must be smooth on [t0, t1] (callers
        split at known kinks).
    y0 : (n, n) array
        Initial matrix value at t0.

    Returns
    -------
    y : (n, n) array
        Value at t1.
    stats : dict
        Step/evaluation counters.

    Raises
    ------
    RuntimeError
        On step-size underflow or step-count exhaustion.
    """
    y = np.array(y0, dtype=float)
    if t1 == t0:
        return y, {"steps": 0, "rejected": 0, "evals": 0}
    direction = 1.0 if t1 > t0 else -1.0
    span = abs(t1 - t0)
    h = _initial_step(coeff, t0, span, max_step)
    nfev = 1
    t = t0
    k = [None] * 7
    k[0] = np.asarray(coeff(t), dtype=float) @ y
    nfev += 1
    steps = 0
    rejected = 0
    while direction * (t1 - t) > 0.0:
        if steps >= _MAX_STEPS:
            raise RuntimeError(
                f"step budget exhausted integrating over [{t0}, {t1}] near t={t}"
            )
        hmin = 16.0 * np.finfo(float).eps * max(abs(t), abs(t1))
        h_signed = direction * h
        final = False
        if direction * (t + h_signed - t1) >= 0.0:
            h_signed = t1 - t  # exact landing; may be below hmin, which is fine
            final = True
        elif h < hmin:
            raise RuntimeError(
                f"step size underflow integrating over [{t0}, {t1}] near t={t}"
            )
        # overflow/invalid in a trial step is routine: the error norm goes
        # nonfinite and the controller rejects and shrinks
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(1, 7):
                acc = _A[i][0] * k[0]
                for j in range(1, i):
                    if _A[i][j] != 0.0:
                        acc = acc + _A[i][j] * k[j]
                yi = y + h_signed * acc
                k[i] = np.asarray(coeff(t + _C[i] * h_signed), dtype=float) @ yi
                nfev += 1
            y_new = y + h_signed * (
                _B[0] * k[0] + _B[2] * k[2] + _B[3] * k[3] + _B[4] * k[4] + _B[5] * k[5]
            )
            err_vec = h_signed * (
                _E[0] * k[0]
                + _E[2] * k[2]
                + _E[3] * k[3]
                + _E[4] * k[4]
                + _E[5] * k[5]
                + _E[6] * k[6]
            )
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
        if err <= 1.0 and not np.isnan(err):
            t = t1 if final else t + h_signed
            y = y_new
            k[0] = k[6]  # FSAL
            steps += 1
            factor = _MAX_FACTOR if err == 0.0 else _SAFETY * err**_ORDER_EXP
            h = min(h * min(_MAX_FACTOR, max(_MIN_FACTOR, factor)), max_step)
        else:
            rejected += 1
            if abs(h_signed) <= hmin:
                raise RuntimeError(
                    f"step size underflow integrating over [{t0}, {t1}] near t={t}"
                )
            if np.isnan(err):
                h = abs(h_signed) * _MIN_FACTOR
            else:
                h = abs(h_signed) * max(_MIN_FACTOR, _SAFETY * err**_ORDER_EXP)
    return y, {"steps": steps, "rejected": rejected, "evals": nfev}
