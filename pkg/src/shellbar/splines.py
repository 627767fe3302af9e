"""B-spline and NURBS bases: evaluation, refinement, Greville points.

Control data for a surface is stored as arrays indexed ``[i, j]`` with ``i``
running along xi and ``j`` along eta. Flattened control-point numbering is
``A = i + n * j`` (xi fastest), which is also the row-major order of the
benchmark tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from . import kernels
from .errors import DomainError


@dataclass(frozen=True)
class KnotVector:
    """Open knot vector of degree ``degree``."""

    degree: int
    knots: np.ndarray

    def __post_init__(self):
        knots = np.array(self.knots, dtype=float)
        knots.setflags(write=False)
        object.__setattr__(self, "knots", knots)
        p = self.degree
        if p < 1:
            raise ValueError(f"degree must be >= 1, got {p}")
        if knots.ndim != 1 or np.any(np.diff(knots) < 0):
            raise ValueError("knots must be a non-decreasing 1D sequence")
        n = knots.size - p - 1
        if n < p + 1:
            raise ValueError(f"need at least {p + 1} basis functions, got {n}")
        first = np.count_nonzero(knots == knots[0])
        last = np.count_nonzero(knots == knots[-1])
        if first != p + 1 or last != p + 1:
            raise ValueError(
                f"knot vector is not open: end multiplicities {first}, {last} != {p + 1}"
            )

    @property
    def n(self) -> int:
        """Number of basis functions."""
        return self.knots.size - self.degree - 1

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def unique_knots(self) -> np.ndarray:
        return np.unique(self.knots)

    def multiplicity(self, u: float) -> int:
        return int(np.count_nonzero(self.knots == u))

    def element_spans(self) -> list[int]:
        """Span indices of the nonzero knot intervals, in increasing order."""
        k = self.knots
        return [i for i in range(self.degree, self.n) if k[i + 1] > k[i]]

    def __eq__(self, other):
        if not isinstance(other, KnotVector):
            return NotImplemented
        return self.degree == other.degree and np.array_equal(self.knots, other.knots)

    def __hash__(self):
        return hash((self.degree, self.knots.tobytes()))


@dataclass(frozen=True)
class SurfaceBasis:
    """Tensor-product NURBS basis; ``weights`` has shape ``(xi.n, eta.n)``."""

    xi: KnotVector
    eta: KnotVector
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if w.shape != (self.xi.n, self.eta.n):
            raise ValueError(f"weights shape {w.shape} != {(self.xi.n, self.eta.n)}")
        if not np.all(w > 0):
            raise ValueError("weights must be strictly positive")

    @property
    def shape(self) -> tuple[int, int]:
        return self.xi.n, self.eta.n


@dataclass(frozen=True)
class ElementSpan:
    """One nonzero knot rectangle of a surface patch.

    ``i``, ``j`` are knot-span indices; ``ei``, ``ej`` the element's position
    in the element grid of size ``(nx, ny)``.
    """

    i: int
    j: int
    xi_range: tuple[float, float]
    eta_range: tuple[float, float]
    ei: int = 0
    ej: int = 0
    nx: int = 1
    ny: int = 1

    def __post_init__(self):
        if not (self.xi_range[1] > self.xi_range[0] and self.eta_range[1] > self.eta_range[0]):
            raise ValueError("element span must have nonzero length in both directions")

    @property
    def index(self) -> int:
        return self.ei + self.nx * self.ej

    def to_parametric(self, s, t):
        """Map local coordinates in [0, 1]^2 to (xi, eta)."""
        (a0, a1), (b0, b1) = self.xi_range, self.eta_range
        return a0 + (a1 - a0) * np.asarray(s), b0 + (b1 - b0) * np.asarray(t)

    def to_local(self, xi, eta):
        (a0, a1), (b0, b1) = self.xi_range, self.eta_range
        return (np.asarray(xi) - a0) / (a1 - a0), (np.asarray(eta) - b0) / (b1 - b0)

    @property
    def parametric_area(self) -> float:
        (a0, a1), (b0, b1) = self.xi_range, self.eta_range
        return (a1 - a0) * (b1 - b0)


def elements(xi: KnotVector, eta: KnotVector) -> list[ElementSpan]:
    """All elements of the patch, xi index fastest."""
    sx, sy = xi.element_spans(), eta.element_spans()
    kx, ky = xi.knots, eta.knots
    out = []
    for ej, j in enumerate(sy):
        for ei, i in enumerate(sx):
            out.append(
                ElementSpan(
                    i, j,
                    (float(kx[i]), float(kx[i + 1])),
                    (float(ky[j]), float(ky[j + 1])),
                    ei, ej, len(sx), len(sy),
                )
            )
    return out


def find_span(kv: KnotVector, u: float) -> int:
    """Index ``i`` with ``knots[i] <= u < knots[i + 1]``.

    At the right end of the domain the last nonzero span is returned.
    """
    k = kv.knots
    lo, hi = kv.domain
    if not lo <= u <= hi:
        raise DomainError(f"u={u} outside knot domain [{lo}, {hi}]")
    n, p = kv.n, kv.degree
    if u >= k[n]:
        return n - 1
    # rightmost i in [p, n-1] with k[i] <= u
    return int(np.searchsorted(k, u, side="right")) - 1


def basis_and_derivatives(kv: KnotVector, u: float, order: int = 0, span: int | None = None):
    """Values (row 0) and derivatives (rows 1..order) of the p+1 nonzero functions."""
    if order < 0 or order > kv.degree:
        raise ValueError(f"derivative order {order} must be in [0, {kv.degree}]")
    if span is None:
        span = find_span(kv, u)
    return kernels.basis_funs_ders(kv.knots, kv.degree, span, float(u), order)


def all_basis(kv: KnotVector, u: float) -> np.ndarray:
    """Values of all ``n`` basis functions at ``u`` (dense)."""
    span = find_span(kv, u)
    out = np.zeros(kv.n)
    out[span - kv.degree: span + 1] = basis_and_derivatives(kv, u, 0, span)[0]
    return out


def rational_surface_basis(basis: SurfaceBasis, xi: float, eta: float, spans=None):
    """Nonzero rational functions and first derivatives at ``(xi, eta)``.

    Returns
    -------
    idx : (nen,) flattened control-point indices ``A = i + n * j``.
    R : (nen,) values.
    dR : (nen, 2) derivatives with respect to xi and eta.

    Local ordering is xi fastest.
    """
    p, q = basis.xi.degree, basis.eta.degree
    if spans is None:
        si, sj = find_span(basis.xi, xi), find_span(basis.eta, eta)
    else:
        si, sj = spans
    Nu = basis_and_derivatives(basis.xi, xi, 1, si)
    Nv = basis_and_derivatives(basis.eta, eta, 1, sj)
    return _rationalize(basis, si, sj, Nu, Nv)


def _rationalize(basis, si, sj, Nu, Nv):
    p, q = basis.xi.degree, basis.eta.degree
    n = basis.xi.n
    w = basis.weights[si - p: si + 1, sj - q: sj + 1]  # (p+1, q+1)
    # tensor products, shape (q+1, p+1) then flatten with xi fastest
    N = np.outer(Nv[0], Nu[0]) * w.T
    Nx = np.outer(Nv[0], Nu[1]) * w.T
    Ny = np.outer(Nv[1], Nu[0]) * w.T
    W, Wx, Wy = N.sum(), Nx.sum(), Ny.sum()
    R = N / W
    dR = np.empty(((p + 1) * (q + 1), 2))
    dR[:, 0] = ((Nx - R * Wx) / W).ravel()
    dR[:, 1] = ((Ny - R * Wy) / W).ravel()
    ii = np.arange(si - p, si + 1)
    jj = np.arange(sj - q, sj + 1)
    idx = (ii[None, :] + n * jj[:, None]).ravel()
    return idx, R.ravel(), dR


def greville_abscissae(kv: KnotVector) -> np.ndarray:
    p, k = kv.degree, kv.knots
    return np.array([k[a + 1: a + p + 1].mean() for a in range(kv.n)])


# --- refinement on homogeneous control nets --------------------------------------


def to_homogeneous(points: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """(n, m, 3) points and (n, m) weights -> (n, m, 4) weighted coordinates."""
    return np.concatenate([points * weights[..., None], weights[..., None]], axis=-1)


def from_homogeneous(pw: np.ndarray):
    w = pw[..., 3]
    return pw[..., :3] / w[..., None], w


def _insert_one(kv: KnotVector, pw: np.ndarray, u: float):
    """Boehm insertion of ``u`` along axis 0 of ``pw``."""
    p, k = kv.degree, kv.knots
    span = find_span(kv, u)
    n = kv.n
    q = np.empty((n + 1,) + pw.shape[1:])
    q[: span - p + 1] = pw[: span - p + 1]
    for i in range(span - p + 1, span + 1):
        alpha = (u - k[i]) / (k[i + p] - k[i])
        q[i] = alpha * pw[i] + (1.0 - alpha) * pw[i - 1]
    q[span + 1:] = pw[span:]
    new = KnotVector(p, np.insert(k, span + 1, u))
    return new, q


def insert_knots(kv: KnotVector, new_knots, net, direction: int):
    """Insert ``new_knots`` in ``direction`` (0 = xi, 1 = eta).

    ``net`` is a :class:`~shellbar.model.ControlNet` or anything with
    ``points`` (n, m, 3) and ``weights`` (n, m). Returns the refined knot
    vector and a net of the same type; the mapped geometry is unchanged.
    """
    lo, hi = kv.domain
    for u in new_knots:
        if not lo < u < hi:
            raise ValueError(f"inserted knot {u} is not interior to ({lo}, {hi})")
    pw = to_homogeneous(np.asarray(net.points, float), np.asarray(net.weights, float))
    if direction == 1:
        pw = pw.transpose(1, 0, 2)
    for u in sorted(new_knots):
        if kv.multiplicity(u) + 1 > kv.degree:
            raise ValueError(f"inserting {u} exceeds multiplicity {kv.degree}")
        kv, pw = _insert_one(kv, pw, float(u))
    if direction == 1:
        pw = pw.transpose(1, 0, 2)
    points, weights = from_homogeneous(pw)
    return kv, type(net)(points, weights)


def uniform_knots(kv: KnotVector, m: int) -> list[float]:
    """Knots that subdivide every existing element into ``m`` equal parts."""
    u = kv.unique_knots()
    out = []
    for a, b in zip(u[:-1], u[1:]):
        out.extend(a + (b - a) * np.arange(1, m) / m)
    return [float(x) for x in out]


def elevate_degree(kv: KnotVector, net, times: int, direction: int):
    """Raise the degree by ``times`` without changing the geometry.

    The elevated space (every distinct knot's multiplicity raised by
    ``times``) contains the original one, so the homogeneous control points
    follow from collocation at the new Greville points.
    """
    if times < 1:
        raise ValueError("times must be >= 1")
    p = kv.degree
    u, mult = np.unique(kv.knots, return_counts=True)
    new = KnotVector(p + times, np.repeat(u, mult + times))
    g = greville_abscissae(new)
    A_new = np.array([all_basis(new, x) for x in g])
    A_old = np.array([all_basis(kv, x) for x in g])
    E = np.linalg.solve(A_new, A_old)

    pw = to_homogeneous(np.asarray(net.points, float), np.asarray(net.weights, float))
    if direction == 1:
        pw = pw.transpose(1, 0, 2)
    pw = np.einsum("ab,b...->a...", E, pw)
    if direction == 1:
        pw = pw.transpose(1, 0, 2)
    points, weights = from_homogeneous(pw)
    return new, type(net)(points, weights)


# --- element-local projection spaces ---------------------------------------------


def bernstein(degree: int, s, deriv: int = 0) -> np.ndarray:
    """Bernstein polynomials of ``degree`` on [0, 1]; shape ``(degree + 1,) + s.shape``."""
    s = np.asarray(s, dtype=float)
    if degree < 0:
        raise ValueError("negative order")
    if deriv == 0:
        return np.array([comb(degree, k) * s**k * (1 - s) ** (degree - k) for k in range(degree + 1)])
    if degree == 0:
        return np.zeros((1,) + s.shape)
    low = bernstein(degree - 1, s, deriv - 1)
    out = np.zeros((degree + 1,) + s.shape)
    out[:-1] -= degree * low
    out[1:] += degree * low
    return out


def projection_basis(element: ElementSpan, orders: tuple[int, int], xi, eta) -> np.ndarray:
    """Element-local projection functions of orders ``(pb, qb)`` at ``(xi, eta)``.

    Bernstein polynomials on the element's parametric rectangle; returns
    shape ``((pb + 1) * (qb + 1),) + xi.shape`` with the xi index fastest.
    """
    pb, qb = orders
    if pb < 0 or qb < 0:
        raise ValueError(f"projection orders must be non-negative, got {orders}")
    s, t = element.to_local(xi, eta)
    bs, bt = bernstein(pb, s), bernstein(qb, t)
    out = bt[:, None] * bs[None, :]
    return out.reshape((pb + 1) * (qb + 1), *np.shape(s))
