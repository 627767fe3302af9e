# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Signatures match ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

from .errors import GeometryError

cnp.import_array()


def basis_funs_ders(const double[::1] knots, int p, int span, double u, int nders):
    cdef double[:, ::1] ndu = np.zeros((p + 1, p + 1))
    cdef double[::1] left = np.zeros(p + 1)
    cdef double[::1] right = np.zeros(p + 1)
    cdef double[:, ::1] a = np.zeros((2, p + 1))
    out = np.zeros((nders + 1, p + 1))
    cdef double[:, ::1] ders = out
    cdef int j, r, k, s1, s2, rk, pk, j1, j2, jj
    cdef double saved, temp, d, fac

    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = u - knots[span + 1 - j]
        right[j] = knots[span + j] - u
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    for j in range(p + 1):
        ders[0, j] = ndu[j, p]
    for r in range(p + 1):
        s1 = 0
        s2 = 1
        a[0, 0] = 1.0
        for k in range(1, nders + 1):
            d = 0.0
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for jj in range(j1, j2 + 1):
                a[s2, jj] = (a[s1, jj] - a[s1, jj - 1]) / ndu[pk + 1, rk + jj]
                d += a[s2, jj] * ndu[rk + jj, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1
    fac = p
    for k in range(1, nders + 1):
        for j in range(p + 1):
            ders[k, j] *= fac
        fac *= p - k
    return out


def shell_strain_operator(const double[::1] R, const double[:, ::1] dR,
                          const double[:, ::1] X, const double[:, ::1] N,
                          double zeta):
    cdef Py_ssize_t nen = R.shape[0]
    cdef Py_ssize_t a, i, col
    cdef double J[3][3]
    cdef double Ji[3][3]
    cdef double detJ, inv_det, xa, ya, za
    cdef double d0, d1, g0, g1, g2, h0, h1, h2, n0, n1, n2

    for i in range(3):
        J[i][0] = 0.0
        J[i][1] = 0.0
        J[i][2] = 0.0
    for a in range(nen):
        for i in range(3):
            xa = X[a, i] + zeta * N[a, i]
            J[i][0] += dR[a, 0] * xa
            J[i][1] += dR[a, 1] * xa
            J[i][2] += R[a] * N[a, i]

    detJ = (J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1])
            - J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0])
            + J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]))
    if not detJ > 0.0:
        raise GeometryError(f"non-positive shell Jacobian {detJ:.3e}")
    inv_det = 1.0 / detJ
    Ji[0][0] = (J[1][1] * J[2][2] - J[1][2] * J[2][1]) * inv_det
    Ji[0][1] = (J[0][2] * J[2][1] - J[0][1] * J[2][2]) * inv_det
    Ji[0][2] = (J[0][1] * J[1][2] - J[0][2] * J[1][1]) * inv_det
    Ji[1][0] = (J[1][2] * J[2][0] - J[1][0] * J[2][2]) * inv_det
    Ji[1][1] = (J[0][0] * J[2][2] - J[0][2] * J[2][0]) * inv_det
    Ji[1][2] = (J[0][2] * J[1][0] - J[0][0] * J[1][2]) * inv_det
    Ji[2][0] = (J[1][0] * J[2][1] - J[1][1] * J[2][0]) * inv_det
    Ji[2][1] = (J[0][1] * J[2][0] - J[0][0] * J[2][1]) * inv_det
    Ji[2][2] = (J[0][0] * J[1][1] - J[0][1] * J[1][0]) * inv_det

    out = np.zeros((6, 6 * nen))
    cdef double[:, ::1] B = out
    cdef double b[6][3]
    for a in range(nen):
        d0 = dR[a, 0]
        d1 = dR[a, 1]
        # grad_x = Jinv^T grad_s
        g0 = Ji[0][0] * d0 + Ji[1][0] * d1
        g1 = Ji[0][1] * d0 + Ji[1][1] * d1
        g2 = Ji[0][2] * d0 + Ji[1][2] * d1
        col = 6 * a
        B[0, col] = g0
        B[1, col + 1] = g1
        B[2, col + 2] = g2
        B[3, col] = g1
        B[3, col + 1] = g0
        B[4, col] = g2
        B[4, col + 2] = g0
        B[5, col + 1] = g2
        B[5, col + 2] = g1

        h0 = zeta * g0 + Ji[2][0] * R[a]
        h1 = zeta * g1 + Ji[2][1] * R[a]
        h2 = zeta * g2 + Ji[2][2] * R[a]
        b[0][0] = h0; b[0][1] = 0.0; b[0][2] = 0.0
        b[1][0] = 0.0; b[1][1] = h1; b[1][2] = 0.0
        b[2][0] = 0.0; b[2][1] = 0.0; b[2][2] = h2
        b[3][0] = h1; b[3][1] = h0; b[3][2] = 0.0
        b[4][0] = h2; b[4][1] = 0.0; b[4][2] = h0
        b[5][0] = 0.0; b[5][1] = h2; b[5][2] = h1
        n0 = N[a, 0]
        n1 = N[a, 1]
        n2 = N[a, 2]
        # columns of (theta x n) = M theta
        for i in range(6):
            B[i, col + 3] = -n2 * b[i][1] + n1 * b[i][2]
            B[i, col + 4] = n2 * b[i][0] - n0 * b[i][2]
            B[i, col + 5] = -n1 * b[i][0] + n0 * b[i][1]
    return out, detJ


def add_btdc(double[:, ::1] K, const double[:, ::1] B, const double[:, ::1] D,
             const double[:, ::1] C, double c):
    cdef Py_ssize_t n = B.shape[1]
    cdef Py_ssize_t m = C.shape[1]
    cdef Py_ssize_t i, j, a, b
    cdef double s, bia
    cdef double[:, ::1] DC = np.zeros((6, m))
    for i in range(6):
        for b in range(m):
            s = 0.0
            for j in range(6):
                s += D[i, j] * C[j, b]
            DC[i, b] = s * c
    for i in range(6):
        for a in range(n):
            bia = B[i, a]
            if bia != 0.0:
                for b in range(m):
                    K[a, b] += bia * DC[i, b]
