"""Locking treatments: local and generalized local B-bar, and the classical global variant.

Only the through-thickness average of the strain operator is projected. The
element bilinear form becomes::

    int  B^T D B  -  MID(B)^T D MID(B)  +  PROJ(MID(B))^T D PROJ(MID(B))

where ``PROJ`` is an L2 projection on the physical mid-surface onto a
low-order polynomial space chosen per element.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels, splines
from .errors import GeometryError
from .mechanics import (
    gauss_geometry,
    local_constitutive,
    point_constitutive,
    point_operators,
    through_thickness_rule,
)
from .model import ShellModel

METHODS = ("iga", "lb", "glb", "cbar")
BBAR_METHODS = ("lb", "glb", "cbar")


@dataclass(frozen=True)
class ProjectionAssignment:
    """Projection orders ``(pb, qb)`` per element, indexed by ``ei + nx * ej``."""

    strategy: str
    nx: int
    ny: int
    orders: tuple[tuple[int, int], ...]

    def __getitem__(self, element) -> tuple[int, int]:
        index = element if isinstance(element, int) else element.index
        return self.orders[index]

    def counts(self) -> dict[tuple[int, int], int]:
        out: dict[tuple[int, int], int] = {}
        for o in self.orders:
            out[o] = out.get(o, 0) + 1
        return out


def _mesh_size(mesh) -> tuple[int, int]:
    if isinstance(mesh, ShellModel):
        return len(mesh.xi.element_spans()), len(mesh.eta.element_spans())
    if np.isscalar(mesh):
        return int(mesh), int(mesh)
    nx, ny = mesh
    return int(nx), int(ny)


def assign_projection_spaces(mesh, strategy: str, degrees: tuple[int, int]) -> ProjectionAssignment:
    """Per-element projection orders for ``lb`` or ``glb``.

    GLB (defined for biquadratic patches only): corner elements get (1, 1),
    elements on an edge get constant order along that edge and linear order
    across it, interior elements (0, 0). On 1xN strips every element is
    treated as a corner.
    """
    nx, ny = _mesh_size(mesh)
    if nx < 1 or ny < 1:
        raise ValueError("mesh needs at least one element per direction")
    p, q = degrees
    if strategy not in ("lb", "glb"):
        raise ValueError(f"unknown projection strategy {strategy!r}")
    if strategy == "glb" and (p, q) != (2, 2):
        warnings.warn(
            f"generalized strategy is only defined for degree (2, 2); using lb for {(p, q)}",
            stacklevel=2,
        )
        strategy = "lb"
    if strategy == "lb":
        return ProjectionAssignment("lb", nx, ny, ((p - 1, q - 1),) * (nx * ny))
    orders = []
    for ej in range(ny):
        for ei in range(nx):
            on_x = ei in (0, nx - 1)
            on_y = ej in (0, ny - 1)
            if nx == 1 or ny == 1 or (on_x and on_y):
                orders.append((1, 1))
            elif on_y:
                orders.append((0, 1))
            elif on_x:
                orders.append((1, 0))
            else:
                orders.append((0, 0))
    return ProjectionAssignment("glb", nx, ny, tuple(orders))


def quadrature_points(method: str, degrees: tuple[int, int]) -> tuple[int, int]:
    """In-plane Gauss points per direction: (p+1, q+1) for iga, (p, q) for the B-bar family."""
    p, q = degrees
    if method == "iga":
        return p + 1, q + 1
    if method in BBAR_METHODS:
        return p, q
    raise ValueError(f"unknown method {method!r}")


def element_gram(geom, orders: tuple[int, int], weights) -> np.ndarray:
    """Gram matrix of the projection basis over the element's physical mid-surface.

    ``geom`` is an :class:`~shellbar.mechanics.ElementGeometry` at the
    quadrature points and ``weights`` the matching local weights.
    """
    nb = projection_values(geom, orders)
    dA = np.asarray(weights) * geom.jac * geom.area_density()
    if np.any(dA <= 0):
        raise GeometryError("non-positive surface measure in element")
    G = (nb * dA) @ nb.T
    return G


def projection_values(geom, orders) -> np.ndarray:
    """(nb, nq) projection functions at the samples of ``geom``."""
    return splines.projection_basis(geom.element, orders, geom.xi, geom.eta)


def projection_matrix(nb: np.ndarray, dA: np.ndarray) -> np.ndarray:
    """(nq, nq) matrix mapping sampled values to their sampled L2 projection."""
    G = (nb * dA) @ nb.T
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise GeometryError("projection Gram matrix is not positive definite") from exc
    Z = np.linalg.solve(L, nb * dA)
    Y = np.linalg.solve(L, nb)
    return Y.T @ Z


def project_mid_strain(mid: np.ndarray, nb: np.ndarray, dA: np.ndarray) -> np.ndarray:
    """Element-local L2 projection of sampled operators.

    Parameters
    ----------
    mid : (nq, ...) samples (typically MID(B) with shape (nq, 6, ndof)).
    nb : (nb, nq) projection functions at the samples.
    dA : (nq,) physical surface quadrature weights.
    """
    P = projection_matrix(nb, dA)
    return np.tensordot(P, mid, axes=(1, 0))


def element_stiffness(
    model: ShellModel,
    element: splines.ElementSpan,
    method: str = "iga",
    orders: tuple[int, int] | None = None,
    rule: tuple[int, int] | None = None,
    n_thickness: int = 2,
    return_mid: bool = False,
):
    """Element stiffness (6*nen square) in the 6-slot layout.

    ``iga`` integrates the full operator. ``lb``/``glb`` apply the modified
    form with the element projection space ``orders``. ``cbar`` returns only
    the element part ``int B^T D B - MID^T D MID``; the projected term is
    global and added by the assembler, which uses ``return_mid=True`` to
    collect the samples ``(MID, volume weights, dA, D)``.
    """
    if rule is None:
        rule = quadrature_points(method, model.degrees)
    geom, wq = gauss_geometry(model, element, rule)
    h = model.thickness
    zs, wz = through_thickness_rule(h, n_thickness)
    Dg = point_constitutive(geom, local_constitutive(model.material))
    nq, nen = geom.R.shape
    K = np.zeros((6 * nen, 6 * nen))

    if method == "iga":
        for q in range(nq):
            Bs, dets = point_operators(geom, q, zs)
            c = wq[q] * geom.jac * wz * dets
            for B, cg in zip(Bs, c):
                kernels.add_btdc(K, B, Dg[q], B, float(cg))
        return 0.5 * (K + K.T)

    if method not in BBAR_METHODS:
        raise ValueError(f"unknown method {method!r}")
    mids = np.empty((nq, 6, 6 * nen))
    vols = np.empty(nq)
    for q in range(nq):
        Bs, dets = point_operators(geom, q, zs)
        c = wq[q] * geom.jac * wz * dets
        M = np.tensordot(wz, Bs, axes=1) / h
        # bending remainder written without forming M^T D M twice
        for B, cg in zip(Bs, c):
            delta = B - M
            kernels.add_btdc(K, B, Dg[q], delta, float(cg))
            kernels.add_btdc(K, delta, Dg[q], M, float(cg))
        mids[q] = M
        vols[q] = c.sum()
    dA = wq * geom.jac * geom.area_density()

    if method == "cbar":
        K = 0.5 * (K + K.T)
        return (K, (mids, vols, dA, Dg, geom)) if return_mid else K

    if orders is None:
        p, q_ = model.degrees
        orders = (p - 1, q_ - 1)
    mbar = project_mid_strain(mids, projection_values(geom, orders), dA)
    for q in range(nq):
        mb = np.ascontiguousarray(mbar[q])
        kernels.add_btdc(K, mb, Dg[q], mb, float(vols[q]))
    K = 0.5 * (K + K.T)
    return (K, (mids, vols, dA, Dg, geom)) if return_mid else K


# --- classical global projection --------------------------------------------------


def lower_order_space(model: ShellModel) -> tuple[splines.KnotVector, splines.KnotVector]:
    """One-order-lower knot vectors with the same interior knots (weights 1)."""
    p, q = model.degrees
    if p < 2 or q < 2:
        raise ValueError("global projection needs degree >= 2 in both directions")
    return (
        splines.KnotVector(p - 1, model.xi.knots[1:-1]),
        splines.KnotVector(q - 1, model.eta.knots[1:-1]),
    )


def global_projection_matrix(model: ShellModel, xi, eta, dA) -> np.ndarray:
    """Sampled global L2 projection onto the one-order-lower spline space.

    ``xi``, ``eta``, ``dA`` list every quadrature sample of the patch.
    Returns ``(ns, ns)``.
    """
    kx, ky = lower_order_space(model)
    nb = np.array(
        [np.outer(splines.all_basis(ky, v), splines.all_basis(kx, u)).ravel() for u, v in zip(xi, eta)]
    ).T
    return projection_matrix(nb, np.asarray(dA))


def global_bbar_projection(model: ShellModel, values, rule: tuple[int, int] | None = None):
    """Project a sampled field over the whole patch.

    ``values`` has shape ``(n_elements, nq, ...)`` sampled at the B-bar
    Gauss rule of every element (element order of ``model.elements()``).
    Returns the projected samples in the same layout.
    """
    if rule is None:
        rule = quadrature_points("cbar", model.degrees)
    xs, ys, dAs = [], [], []
    for e in model.elements():
        geom, w = gauss_geometry(model, e, rule)
        xs.append(geom.xi)
        ys.append(geom.eta)
        dAs.append(w * geom.jac * geom.area_density())
    values = np.asarray(values)
    ne, nq = values.shape[:2]
    P = global_projection_matrix(model, np.concatenate(xs), np.concatenate(ys), np.concatenate(dAs))
    flat = values.reshape(ne * nq, -1)
    return (P @ flat).reshape(values.shape)


# --- 1D motivating example ----------------------------------------------------------


def timoshenko_shear(x: float) -> np.ndarray:
    """Shear strain ``dw/dx - theta`` of the unit 2-node beam on ``(w1, w2, t1, t2)``."""
    return np.array([-1.0, 1.0, -(1.0 - x), -x])


def timoshenko_demo(npts: int = 2) -> np.ndarray:
    """Coefficients of the shear strain projected onto constants on [0, 1]."""
    s, w = np.polynomial.legendre.leggauss(npts)
    x, w = 0.5 * (s + 1.0), 0.5 * w
    samples = np.array([timoshenko_shear(xi) for xi in x])
    nb = np.ones((1, npts))
    return project_mid_strain(samples, nb, w)[0]
