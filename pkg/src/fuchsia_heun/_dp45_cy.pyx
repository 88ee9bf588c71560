# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Dormand-Prince 4(5) propagator; numerics mirror _dp45_py exactly."""

import numpy as np

cimport numpy as cnp

cdef extern from "complex.h":
    double complex cexp(double complex)
    double cabs(double complex)

cdef double HMIN = 1e-12
cdef int MAX_STEPS = 200000

cdef double[7][6] A_TAB
A_TAB[1][0] = 1.0 / 5.0
A_TAB[2][0] = 3.0 / 40.0;      A_TAB[2][1] = 9.0 / 40.0
A_TAB[3][0] = 44.0 / 45.0;     A_TAB[3][1] = -56.0 / 15.0;    A_TAB[3][2] = 32.0 / 9.0
A_TAB[4][0] = 19372.0 / 6561.0; A_TAB[4][1] = -25360.0 / 2187.0
A_TAB[4][2] = 64448.0 / 6561.0; A_TAB[4][3] = -212.0 / 729.0
A_TAB[5][0] = 9017.0 / 3168.0;  A_TAB[5][1] = -355.0 / 33.0
A_TAB[5][2] = 46732.0 / 5247.0; A_TAB[5][3] = 49.0 / 176.0;   A_TAB[5][4] = -5103.0 / 18656.0
A_TAB[6][0] = 35.0 / 384.0;     A_TAB[6][1] = 0.0
A_TAB[6][2] = 500.0 / 1113.0;   A_TAB[6][3] = 125.0 / 192.0
A_TAB[6][4] = -2187.0 / 6784.0; A_TAB[6][5] = 11.0 / 84.0

cdef double[7] B5 = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0,
                     -2187.0 / 6784.0, 11.0 / 84.0, 0.0]
cdef double[7] B4 = [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0,
                     -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0]
cdef double[7] C_TAB = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0]


class StepUnderflow(ArithmeticError):
    pass


cdef inline double complex _horner(double complex[:] coeffs, double complex z):
    cdef double complex acc = 0
    cdef Py_ssize_t i
    for i in range(coeffs.shape[0] - 1, -1, -1):
        acc = acc * z + coeffs[i]
    return acc


cdef void _rhs(int kind, double complex g0, double complex g1, double g2, double g3,
               double complex[:] pts, double complex[:, :] res,
               double complex[:] pn0, double complex[:] pd0,
               double complex[:] pn1, double complex[:] pd1,
               double t, double complex* y, double complex* out):
    cdef double complex z, dz, e, w
    cdef double complex a00 = 0, a01 = 0, a10 = 0, a11 = 0
    cdef double complex p0, p1
    cdef Py_ssize_t j
    if kind & 1:
        e = cexp(1j * (g2 + t * g3))
        z = g0 + g1 * e
        dz = 1j * g1 * g3 * e
    else:
        z = g0 + t * (g1 - g0)
        dz = g1 - g0
    if kind & 2:
        p0 = _horner(pn0, z) / _horner(pd0, z)
        p1 = _horner(pn1, z) / _horner(pd1, z)
        a01 = 1
        a10 = -p0
        a11 = -p1
    else:
        for j in range(pts.shape[0]):
            w = 1.0 / (z - pts[j])
            a00 = a00 + res[j, 0] * w
            a01 = a01 + res[j, 1] * w
            a10 = a10 + res[j, 2] * w
            a11 = a11 + res[j, 3] * w
    out[0] = dz * (a00 * y[0] + a01 * y[2])
    out[1] = dz * (a00 * y[1] + a01 * y[3])
    out[2] = dz * (a10 * y[0] + a11 * y[2])
    out[3] = dz * (a10 * y[1] + a11 * y[3])


def propagate_segment(int kind, g, pts, res, pn0, pd0, pn1, pd1, y0, double tol):
    """Integrate over t in [0, 1]; returns the flattened 2x2 propagator state."""
    cdef double complex g0, g1
    cdef double g2 = 0.0, g3 = 0.0
    if kind & 1:
        g0 = g[0]; g1 = g[1]; g2 = g[2]; g3 = g[3]
    else:
        g0 = g[0]; g1 = g[1]
    cdef double complex[:] pts_v = np.ascontiguousarray(pts, dtype=complex)
    cdef double complex[:, :] res_v = np.ascontiguousarray(res, dtype=complex).reshape(-1, 4)
    cdef double complex[:] pn0_v = np.ascontiguousarray(pn0, dtype=complex)
    cdef double complex[:] pd0_v = np.ascontiguousarray(pd0, dtype=complex)
    cdef double complex[:] pn1_v = np.ascontiguousarray(pn1, dtype=complex)
    cdef double complex[:] pd1_v = np.ascontiguousarray(pd1, dtype=complex)

    cdef double complex y[4]
    cdef double complex ynew[4]
    cdef double complex ytmp[4]
    cdef double complex k[7][4]
    cdef double complex esum
    cdef Py_ssize_t c, i, j
    arr = np.array(y0, dtype=complex)
    for c in range(4):
        y[c] = arr[c]
    cdef double t = 0.0, h = 0.05, err, ynorm, scale, ratio, fac, d
    cdef bint fsal_valid = False
    cdef int steps = 0
    while t < 1.0:
        if h > 1.0 - t:
            h = 1.0 - t
        if h < HMIN:
            raise StepUnderflow("step underflow at t=%r (segment too close to a "
                                "singularity?)" % t)
        steps += 1
        if steps > MAX_STEPS:
            raise StepUnderflow("step budget exhausted")
        if not fsal_valid:
            _rhs(kind, g0, g1, g2, g3, pts_v, res_v, pn0_v, pd0_v, pn1_v, pd1_v,
                 t, y, k[0])
        for i in range(1, 7):
            for c in range(4):
                ytmp[c] = y[c]
            for j in range(i):
                if A_TAB[i][j] != 0.0:
                    for c in range(4):
                        ytmp[c] = ytmp[c] + (h * A_TAB[i][j]) * k[j][c]
            _rhs(kind, g0, g1, g2, g3, pts_v, res_v, pn0_v, pd0_v, pn1_v, pd1_v,
                 t + C_TAB[i] * h, ytmp, k[i])
        for c in range(4):
            ynew[c] = y[c]
        for i in range(7):
            if B5[i] != 0.0:
                for c in range(4):
                    ynew[c] = ynew[c] + (h * B5[i]) * k[i][c]
        err = 0.0
        ynorm = 0.0
        for c in range(4):
            esum = 0
            for i in range(7):
                d = B5[i] - B4[i]
                if d != 0.0:
                    esum = esum + d * k[i][c]
            err += cabs(h * esum) ** 2
            ynorm += cabs(ynew[c]) ** 2
        err = err ** 0.5
        scale = tol * (1.0 + ynorm ** 0.5)
        if scale > 0:
            ratio = err / scale
        else:
            ratio = 1e300
        if not (ratio == ratio) or ratio > 1e290:   # NaN or overflow: reject hard
            h *= 0.2
            fsal_valid = False
            continue
        if ratio <= 1.0:
            t += h
            for c in range(4):
                y[c] = ynew[c]
                k[0][c] = k[6][c]
            fsal_valid = True
        else:
            fsal_valid = False
        if ratio > 0:
            fac = 0.9 * ratio ** -0.2
        else:
            fac = 5.0
        if fac < 0.2:
            fac = 0.2
        elif fac > 5.0:
            fac = 5.0
        h *= fac
    out = np.empty(4, dtype=complex)
    for c in range(4):
        out[c] = y[c]
    return out
