# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Dormand-Prince 5(4) stepper for matrix ODEs Y' = A(t) Y.

Hot kernel of the toolkit: every transition matrix, and hence every
dichotomy/Floquet verdict, is produced by this loop.  Must stay an exact
algorithmic twin of ``_stepper_py`` (same tableau, error norm and step
controller); only the inner arithmetic is lowered to C.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, fmax, fmin, isnan, pow, sqrt

cnp.import_array()

BACKEND = "compiled"

DEF SAFETY = 0.9
DEF MIN_FACTOR = 0.2
DEF MAX_FACTOR = 10.0
DEF MAX_STEPS = 1000000

# Dormand-Prince 5(4) tableau (the classic ode45 pair, FSAL).
cdef double[7] C_NODES = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0]
cdef double[7][6] A_COEF = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
]
cdef double[7] B_COEF = [
    35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0,
]
cdef double[7] E_COEF = [
    71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
    -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0,
]


cdef inline void _rhs(double[:, ::1] A, double[:, ::1] Y, double[:, ::1] out, int n) noexcept:
    # out = A @ Y for small dense n x n blocks
    cdef int i, j, l
    cdef double acc
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for l in range(n):
                acc += A[i, l] * Y[l, j]
            out[i, j] = acc


cdef double[:, ::1] _coeff_at(object coeff, double t):
    cdef cnp.ndarray A = np.ascontiguousarray(coeff(t), dtype=np.float64)
    return A


def integrate_matrix(coeff, double t0, double t1, y0, double rtol, double atol,
                     double max_step):
    """Integrate Y' = A(t) Y from t0 to t1; see ``_stepper_py`` for the contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] y_arr = np.array(y0, dtype=np.float64, order="C")
    cdef int n = y_arr.shape[0]
    cdef dict stats
    if t1 == t0:
        stats = {"steps": 0, "rejected": 0, "evals": 0}
        return y_arr, stats

    cdef double[:, ::1] y = y_arr
    cdef cnp.ndarray k_arr = np.empty((7, n, n), dtype=np.float64)
    cdef double[:, :, ::1] k = k_arr
    cdef cnp.ndarray ynew_arr = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] y_new = ynew_arr
    cdef cnp.ndarray stage_arr = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] y_stage = stage_arr
    cdef double[:, ::1] A_view

    cdef double direction = 1.0 if t1 > t0 else -1.0
    cdef double span = fabs(t1 - t0)
    cdef double eps16 = 16.0 * np.finfo(np.float64).eps

    # deterministic first-step heuristic from the local coefficient size
    A_view = _coeff_at(coeff, t0)
    cdef double anorm = 0.0
    cdef int i, j, l, st
    for i in range(n):
        for j in range(n):
            if fabs(A_view[i, j]) > anorm:
                anorm = fabs(A_view[i, j])
    cdef double h = fmin(fmin(1e-2 / (anorm + 1e-8), span), max_step)
    cdef long nfev = 1

    cdef double t = t0
    A_view = _coeff_at(coeff, t)
    _rhs(A_view, y, k[0], n)
    nfev += 1

    cdef long steps = 0
    cdef long rejected = 0
    cdef bint final
    cdef double hmin, h_signed, acc, err, sc, d, factor, ay, aynew

    while direction * (t1 - t) > 0.0:
        if steps >= MAX_STEPS:
            raise RuntimeError(
                f"step budget exhausted integrating over [{t0}, {t1}] near t={t}"
            )
        hmin = eps16 * fmax(fabs(t), fabs(t1))
        h_signed = direction * h
        final = False
        if direction * (t + h_signed - t1) >= 0.0:
            h_signed = t1 - t  # exact landing; may be below hmin, which is fine
            final = True
        elif h < hmin:
            raise RuntimeError(
                f"step size underflow integrating over [{t0}, {t1}] near t={t}"
            )

        for st in range(1, 7):
            for i in range(n):
                for j in range(n):
                    acc = 0.0
                    for l in range(st):
                        acc += A_COEF[st][l] * k[l, i, j]
                    y_stage[i, j] = y[i, j] + h_signed * acc
            A_view = _coeff_at(coeff, t + C_NODES[st] * h_signed)
            _rhs(A_view, y_stage, k[st], n)
            nfev += 1

        err = 0.0
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for l in range(7):
                    acc += B_COEF[l] * k[l, i, j]
                y_new[i, j] = y[i, j] + h_signed * acc
                acc = 0.0
                for l in range(7):
                    acc += E_COEF[l] * k[l, i, j]
                ay = fabs(y[i, j])
                aynew = fabs(y_new[i, j])
                sc = atol + rtol * fmax(ay, aynew)
                d = h_signed * acc / sc
                err += d * d
        err = sqrt(err / (n * n))

        if err <= 1.0 and not isnan(err):
            t = t1 if final else t + h_signed
            for i in range(n):
                for j in range(n):
                    y[i, j] = y_new[i, j]
                    k[0, i, j] = k[6, i, j]  # FSAL
            steps += 1
            factor = MAX_FACTOR if err == 0.0 else SAFETY * pow(err, -0.2)
            h = fmin(h * fmin(MAX_FACTOR, fmax(MIN_FACTOR, factor)), max_step)
        else:
            rejected += 1
            if fabs(h_signed) <= hmin:
                raise RuntimeError(
                    f"step size underflow integrating over [{t0}, {t1}] near t={t}"
                )
            if isnan(err):
                h = fabs(h_signed) * MIN_FACTOR
            else:
                h = fabs(h_signed) * fmax(MIN_FACTOR, SAFETY * pow(err, -0.2))

    stats = {"steps": steps, "rejected": rejected, "evals": nfev}
    return y_arr, stats
