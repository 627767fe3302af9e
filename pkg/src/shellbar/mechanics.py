"""Constitutive matrices, lamina frames and the degenerated-shell strain operator.

Voigt order everywhere is ``(e11, e22, e33, g12, g13, g23)`` with engineering
shear strains. Control variables per point are ``(u, v, w, tx, ty, tz)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels, splines
from .errors import GeometryError
from .model import ShellModel, normal_from_tangents

VOIGT_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


def local_constitutive(mat) -> np.ndarray:
    """Plane-stress lamina matrix with shear correction (row/column 3 zero)."""
    E, nu, k = mat.E, mat.nu, mat.kappa
    c = E / (1.0 - nu**2)
    D = np.zeros((6, 6))
    D[0, 0] = D[1, 1] = c
    D[0, 1] = D[1, 0] = c * nu
    D[3, 3] = c * (1.0 - nu) / 2.0
    D[4, 4] = D[5, 5] = k * c * (1.0 - nu) / 2.0
    return D


def voigt_strain_rotation(Q: np.ndarray) -> np.ndarray:
    """6x6 ``T`` with ``eps_local = T @ eps_global`` for rows of ``Q`` = local axes."""
    T = np.empty((6, 6))
    for I, (a, b) in enumerate(VOIGT_PAIRS):
        out = 1.0 if a == b else 2.0
        for J, (k, l) in enumerate(VOIGT_PAIRS):
            if k == l:
                T[I, J] = out * Q[a, k] * Q[b, k]
            else:
                T[I, J] = out * 0.5 * (Q[a, k] * Q[b, l] + Q[a, l] * Q[b, k])
    return T


@dataclass(frozen=True)
class LaminaFrame:
    """Orthonormal triad (rows of ``Q``) with ``e3`` the unit normal, and its Voigt ``T``."""

    Q: np.ndarray
    T: np.ndarray

    @property
    def e1(self):
        return self.Q[0]

    @property
    def e2(self):
        return self.Q[1]

    @property
    def e3(self):
        return self.Q[2]

    def inverse_T(self) -> np.ndarray:
        return voigt_strain_rotation(self.Q.T)


def lamina_frame(x_xi, x_eta) -> LaminaFrame:
    """Frame with ``e1`` along ``x_xi`` and ``e3`` along ``x_xi x x_eta``."""
    x_xi = np.asarray(x_xi, float)
    e3 = normal_from_tangents(x_xi, np.asarray(x_eta, float))
    e1 = x_xi / np.linalg.norm(x_xi)
    e2 = np.cross(e3, e1)
    Q = np.array([e1, e2, e3])
    return LaminaFrame(Q, voigt_strain_rotation(Q))


def global_constitutive(frame: LaminaFrame, D_l: np.ndarray) -> np.ndarray:
    return frame.T.T @ D_l @ frame.T


def through_thickness_rule(h: float, npts: int = 2):
    """Gauss points and weights on [-h/2, h/2]; weights sum to ``h``."""
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * h * x, 0.5 * h * w


@lru_cache(maxsize=None)
def _gauss01(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass
class ElementGeometry:
    """Basis data of one element sampled at local points.

    ``R`` is ``(nq, nen)``, ``dR`` is ``(nq, nen, 2)`` (parametric), ``X`` and
    ``N`` are the element's control points and directors, ``idx`` their
    flattened indices and ``jac`` the parametric area factor of the local
    [0, 1]^2 -> element map.
    """

    element: splines.ElementSpan
    local: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    idx: np.ndarray
    R: np.ndarray
    dR: np.ndarray
    X: np.ndarray
    N: np.ndarray
    jac: float

    @property
    def points(self):
        return self.R @ self.X

    @property
    def tangents(self):
        return np.einsum("qa,ak->qk", self.dR[:, :, 0], self.X), np.einsum("qa,ak->qk", self.dR[:, :, 1], self.X)

    def area_density(self) -> np.ndarray:
        """``||x_xi x x_eta||`` at every sample."""
        a1, a2 = self.tangents
        return np.linalg.norm(np.cross(a1, a2), axis=1)


def element_geometry(model: ShellModel, element: splines.ElementSpan, local) -> ElementGeometry:
    """Evaluate the rational basis of ``element`` at local points ``(nq, 2)`` in [0, 1]^2."""
    local = np.atleast_2d(np.asarray(local, float))
    xi, eta = element.to_parametric(local[:, 0], local[:, 1])
    basis = model.basis
    R, dR = [], []
    idx = None
    for u, v in zip(xi, eta):
        i, r, dr = splines.rational_surface_basis(basis, float(u), float(v), (element.i, element.j))
        idx = i
        R.append(r)
        dR.append(dr)
    return ElementGeometry(
        element, local, xi, eta, idx, np.array(R), np.array(dR),
        model.net.flat_points()[idx].copy(), model.flat_directors()[idx].copy(),
        element.parametric_area,
    )


def gauss_geometry(model: ShellModel, element, npts: tuple[int, int]):
    """Element geometry at a tensor Gauss rule; also returns local weights (sum 1)."""
    sx, wx = _gauss01(npts[0])
    sy, wy = _gauss01(npts[1])
    local = np.array([(s, t) for t in sy for s in sx])
    w = np.array([a * b for b in wy for a in wx])
    return element_geometry(model, element, local), w


def find_element(model: ShellModel, xi: float, eta: float) -> splines.ElementSpan:
    si, sj = splines.find_span(model.xi, xi), splines.find_span(model.eta, eta)
    for e in model.elements():
        if e.i == si and e.j == sj:
            return e
    raise GeometryError(f"no element contains ({xi}, {eta})")


def strain_operator(model: ShellModel, element, xi: float, eta: float, zeta: float):
    """Global Voigt strain operator ``B`` (6, 6*nen) and ``det J`` at one point.

    Columns follow the element's control points in local order (xi fastest),
    six slots each.
    """
    if abs(zeta) > model.thickness / 2 * (1 + 1e-12):
        raise ValueError(f"zeta={zeta} outside the shell thickness")
    loc = np.array(element.to_local(xi, eta), float).reshape(1, 2)
    g = element_geometry(model, element, loc)
    return kernels.shell_strain_operator(g.R[0], np.ascontiguousarray(g.dR[0]), g.X, g.N, float(zeta))


def mid_operator(model: ShellModel, element, xi: float, eta: float, npts: int = 2) -> np.ndarray:
    """Through-thickness average ``(1/h) int B dzeta`` of the strain operator."""
    zs, ws = through_thickness_rule(model.thickness, npts)
    loc = np.array(element.to_local(xi, eta), float).reshape(1, 2)
    g = element_geometry(model, element, loc)
    dR = np.ascontiguousarray(g.dR[0])
    acc = 0.0
    for z, w in zip(zs, ws):
        B, _ = kernels.shell_strain_operator(g.R[0], dR, g.X, g.N, float(z))
        acc = acc + w * B
    return acc / model.thickness


def point_operators(geom: ElementGeometry, q: int, zetas) -> tuple[np.ndarray, np.ndarray]:
    """Strain operators at sample ``q`` for every ``zeta``; shapes (nz, 6, ndof), (nz,)."""
    R = geom.R[q]
    dR = np.ascontiguousarray(geom.dR[q])
    Bs, dets = [], []
    for z in zetas:
        B, d = kernels.shell_strain_operator(R, dR, geom.X, geom.N, float(z))
        Bs.append(B)
        dets.append(d)
    return np.array(Bs), np.array(dets)


def point_constitutive(geom: ElementGeometry, D_l: np.ndarray) -> np.ndarray:
    """``D_g`` at every sample of ``geom``; shape (nq, 6, 6)."""
    a1, a2 = geom.tangents
    n = np.cross(a1, a2)
    na = np.linalg.norm(n, axis=1)
    if np.any(na <= 1e-14 * np.linalg.norm(a1, axis=1) * np.linalg.norm(a2, axis=1)):
        raise GeometryError("degenerate tangents: surface normal undefined")
    e3 = n / na[:, None]
    e1 = a1 / np.linalg.norm(a1, axis=1)[:, None]
    Q = np.stack([e1, np.cross(e3, e1), e3], axis=1)
    T = _voigt_rotations(Q)
    return np.ascontiguousarray(np.einsum("qji,jk,qkl->qil", T, D_l, T))


def _voigt_rotations(Q: np.ndarray) -> np.ndarray:
    """Batched :func:`voigt_strain_rotation` for ``Q`` of shape (nq, 3, 3)."""
    a = np.array([p[0] for p in VOIGT_PAIRS])
    b = np.array([p[1] for p in VOIGT_PAIRS])
    out = np.where(a == b, 1.0, 2.0)
    # T[I, J] = out_I * (Q[a_I, k_J] Q[b_I, l_J] + Q[a_I, l_J] Q[b_I, k_J]) / 2
    T = 0.5 * (Q[:, a][:, :, a] * Q[:, b][:, :, b] + Q[:, a][:, :, b] * Q[:, b][:, :, a])
    return T * out[None, :, None]
