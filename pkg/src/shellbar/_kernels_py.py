"""Pure-Python/numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` one-to-one and are used when the compiled
extension is unavailable.
"""

import numpy as np

from .errors import GeometryError

# Voigt rows (e11, e22, e33, g12, g13, g23) as pairs of displacement-gradient indices.
_VOIGT_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


def basis_funs_ders(knots, p, span, u, nders):
    """Nonzero B-spline values and derivatives up to ``nders`` at ``u``.

    Cox-de Boor recursion with the triangular derivative table (Piegl and
    Tiller, algorithm A2.3). Returns an array of shape ``(nders + 1, p + 1)``.
    """
    ndu = np.zeros((p + 1, p + 1))
    left = np.zeros(p + 1)
    right = np.zeros(p + 1)
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

    ders = np.zeros((nders + 1, p + 1))
    ders[0, :] = ndu[:, p]
    a = np.zeros((2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
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
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1
    fac = p
    for k in range(1, nders + 1):
        ders[k, :] *= fac
        fac *= p - k
    return ders


def _voigt_block(g):
    """(6, 3, nen) strain-from-displacement blocks for gradients ``g`` (3, nen)."""
    nen = g.shape[1]
    out = np.zeros((6, 3, nen))
    for row, (i, j) in enumerate(_VOIGT_PAIRS):
        out[row, i] += g[j]
        if i != j:
            out[row, j] += g[i]
    return out


def shell_strain_operator(R, dR, X, N, zeta):
    """Global Voigt strain operator of the degenerated shell at one point.

    Parameters
    ----------
    R : (nen,) rational basis values.
    dR : (nen, 2) parametric derivatives.
    X : (nen, 3) control points.
    N : (nen, 3) unit directors.
    zeta : through-thickness coordinate.

    Returns
    -------
    B : (6, 6 * nen) array acting on ``(u_A, theta_A)`` stacked per control point.
    detJ : determinant of d(x, y, z)/d(xi, eta, zeta).
    """
    nen = R.shape[0]
    Xz = X + zeta * N
    J = np.empty((3, 3))
    J[:, 0] = dR[:, 0] @ Xz
    J[:, 1] = dR[:, 1] @ Xz
    J[:, 2] = R @ N
    detJ = np.linalg.det(J)
    if not detJ > 0.0:
        raise GeometryError(f"non-positive shell Jacobian {detJ:.3e}")
    JinvT = np.linalg.inv(J).T

    ds = np.zeros((3, nen))
    ds[0] = dR[:, 0]
    ds[1] = dR[:, 1]
    g = JinvT @ ds
    ds[0] *= zeta
    ds[1] *= zeta
    ds[2] = R
    gz = JinvT @ ds

    # theta x n = M @ theta
    M = np.zeros((nen, 3, 3))
    M[:, 0, 1] = N[:, 2]
    M[:, 0, 2] = -N[:, 1]
    M[:, 1, 0] = -N[:, 2]
    M[:, 1, 2] = N[:, 0]
    M[:, 2, 0] = N[:, 1]
    M[:, 2, 1] = -N[:, 0]

    B = np.empty((6, nen, 6))
    B[:, :, :3] = _voigt_block(g).transpose(0, 2, 1)
    B[:, :, 3:] = np.einsum("rka,akl->ral", _voigt_block(gz), M)
    return B.reshape(6, 6 * nen), detJ


def add_btdc(K, B, D, C, c):
    """In place ``K += c * B.T @ D @ C``."""
    K += c * (B.T @ (D @ C))
