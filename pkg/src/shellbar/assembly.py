"""DOF bookkeeping, global assembly, loads, linear solve and rank diagnostics."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import splines
from .bbar import (
    BBAR_METHODS,
    METHODS,
    ProjectionAssignment,
    assign_projection_spaces,
    element_stiffness,
    global_projection_matrix,
    quadrature_points,
)
from .errors import ConfigError, SingularityError
from .mechanics import _gauss01, gauss_geometry, through_thickness_rule
from .model import PLATE, Constraint, Load, ShellModel, edge_points

log = logging.getLogger(__name__)

SHELL_SLOTS = ("u", "v", "w", "rx", "ry", "rz")
PLATE_SLOTS = ("u", "v", "w", "rx", "ry")
_AXES = {"x": 0, "y": 1, "z": 2}
RANK_LIMIT = 5000
CBAR_LIMIT = 40_000_000


@dataclass
class DofMap:
    """Slot layout per control point and the free/constrained split.

    Full DOF index is ``A * dofs_per_point + slot``. ``index[k]`` is the
    position of full DOF ``k`` among free DOFs, or -1 when constrained.
    """

    n_points: int
    slots: tuple[str, ...]
    prescribed: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        n = self.size
        mask = np.ones(n, bool)
        if self.prescribed:
            mask[list(self.prescribed)] = False
        self.free = np.flatnonzero(mask)
        self.constrained = np.flatnonzero(~mask)
        self.index = np.full(n, -1)
        self.index[self.free] = np.arange(self.free.size)

    @property
    def dofs_per_point(self) -> int:
        return len(self.slots)

    @property
    def size(self) -> int:
        return self.n_points * len(self.slots)

    @property
    def n_free(self) -> int:
        return self.free.size

    def dof(self, point: int, slot: str) -> int:
        return point * len(self.slots) + self.slots.index(slot)

    def prescribed_vector(self) -> np.ndarray:
        u = np.zeros(self.size)
        for k, v in self.prescribed.items():
            u[k] = v
        return u


def _constraint_slots(c: Constraint, slots) -> tuple[str, ...]:
    if c.kind == "clamp":
        return tuple(slots)
    if c.kind == "simple_support":
        names = c.dofs or ("w",)
    elif c.kind == "symmetry":
        k = _AXES[c.plane]
        rot = tuple("r" + a for a in "xyz" if a != c.plane)
        names = ("uvw"[k],) + rot
        # plates never allocate the drilling slot
        return tuple(s for s in names if s in slots)
    elif c.kind == "rigid_diaphragm":
        names = tuple("uvw"[i] for a, i in _AXES.items() if a != c.plane)
    elif c.kind == "fix":
        names = c.dofs
    else:
        raise ConfigError(f"unknown constraint kind {c.kind!r}")
    bad = [s for s in names if s not in slots]
    if bad:
        raise ConfigError(f"constraint {c.kind} references unknown slots {bad}")
    return tuple(names)


def build_dof_map(model: ShellModel, constraints=()) -> DofMap:
    """Deterministic DOF map (control-point major, slot minor)."""
    slots = PLATE_SLOTS if model.kind == PLATE else SHELL_SLOTS
    prescribed: dict[int, float] = {}
    for c in constraints:
        if c.edge is not None:
            pts = edge_points(model, c.edge)
        else:
            pts = np.asarray(c.points, int)
            if np.any(pts < 0) or np.any(pts >= model.n_points):
                raise ConfigError(f"constraint references nonexistent control points {c.points}")
        for s in _constraint_slots(c, slots):
            k = slots.index(s)
            for a in pts:
                key = int(a) * len(slots) + k
                old = prescribed.get(key)
                if old is not None and old != c.value:
                    raise ConfigError(f"conflicting prescribed values on DOF {key}")
                prescribed[key] = float(c.value)
    return DofMap(model.n_points, slots, prescribed)


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss rule on the local element square plus the thickness rule.

    In-plane ``weights`` sum to 1 on [0, 1]^2; :meth:`element_weights`
    scales them to an element's parametric area. Thickness weights sum to h.
    """

    npts: tuple[int, int]
    points: np.ndarray
    weights: np.ndarray
    zeta: np.ndarray
    zeta_weights: np.ndarray

    def element_weights(self, element: splines.ElementSpan) -> np.ndarray:
        return self.weights * element.parametric_area


def quadrature_for(method: str, degrees: tuple[int, int], thickness: float = 1.0, n_thickness: int = 2) -> QuadratureRule:
    npts = quadrature_points(method, degrees)
    sx, wx = _gauss01(npts[0])
    sy, wy = _gauss01(npts[1])
    pts = np.array([(s, t) for t in sy for s in sx])
    w = np.array([a * b for b in wy for a in wx])
    z, wz = through_thickness_rule(thickness, n_thickness)
    return QuadratureRule(npts, pts, w, z, wz)


@dataclass
class GlobalSystem:
    """Full-size stiffness ``K`` and load ``F`` together with the DOF map."""

    model: ShellModel
    dofmap: DofMap
    K: sp.csr_matrix
    F: np.ndarray
    method: str = "iga"

    def reduced(self):
        """``K_ff`` and ``F_f - K_fc u_c``."""
        d = self.dofmap
        K = self.K.tocsr()
        Kff = K[d.free][:, d.free]
        F = self.F[d.free].copy()
        if d.prescribed:
            uc = d.prescribed_vector()
            F -= K[d.free] @ uc
        return Kff, F


def _element_dofs(idx: np.ndarray, dpn: int) -> np.ndarray:
    """Full DOF indices for an element in the 6-slot local layout (plates drop rz)."""
    base = np.repeat(idx * dpn, dpn) + np.tile(np.arange(dpn), idx.size)
    return base


def _local_columns(nen: int, dpn: int) -> np.ndarray:
    return (np.arange(nen)[:, None] * 6 + np.arange(dpn)[None, :]).ravel()


def assemble(
    model: ShellModel,
    method: str = "iga",
    assignment: ProjectionAssignment | None = None,
    constraints=(),
    loads=(),
    dofmap: DofMap | None = None,
) -> GlobalSystem:
    """Assemble the global stiffness and loads. Element order is fixed, so the result is deterministic."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if dofmap is None:
        dofmap = build_dof_map(model, constraints)
    dpn = dofmap.dofs_per_point
    if method in ("lb", "glb") and assignment is None:
        assignment = assign_projection_spaces(model, method, model.degrees)
    rows, cols, vals = [], [], []
    cbar_samples = []
    for e in model.elements():
        if method == "cbar":
            Ke, samples = element_stiffness(model, e, "cbar", return_mid=True)
        else:
            Ke = element_stiffness(model, e, method, assignment[e] if assignment else None)
            samples = None
        geom_idx = _element_index(model, e)
        loc = _local_columns(geom_idx.size, dpn)
        dofs = _element_dofs(geom_idx, dpn)
        Ke = Ke[np.ix_(loc, loc)]
        rows.append(np.repeat(dofs, dofs.size))
        cols.append(np.tile(dofs, dofs.size))
        vals.append(Ke.ravel())
        if samples is not None:
            cbar_samples.append((dofs, loc, samples))
    n = dofmap.size
    K = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    if method == "cbar":
        K = K + sp.csr_matrix(_global_projected_term(model, cbar_samples, n))
    K.sum_duplicates()
    system = GlobalSystem(model, dofmap, K, np.zeros(n), method)
    for ld in loads:
        apply_load(system, ld)
    return system


def _element_index(model: ShellModel, e: splines.ElementSpan) -> np.ndarray:
    p, q = model.degrees
    n = model.xi.n
    ii = np.arange(e.i - p, e.i + 1)
    jj = np.arange(e.j - q, e.j + 1)
    return (ii[None, :] + n * jj[:, None]).ravel()


def _global_projected_term(model, samples, n) -> np.ndarray:
    """Dense ``sum_s vol_s Bbar_s^T D_s Bbar_s`` for the global projection."""
    ns = sum(s[2][0].shape[0] for s in samples)
    if ns * 6 * n > CBAR_LIMIT:
        raise ValueError(f"global B-bar is limited to desk-scale meshes ({ns} samples x {n} DOFs)")
    mid = np.zeros((ns, 6, n))
    vols, dAs, Ds, xs, ys = [], [], [], [], []
    s0 = 0
    for dofs, loc, (mids, vol, dA, Dg, geom) in samples:
        nq = mids.shape[0]
        mid[s0: s0 + nq][:, :, dofs] = mids[:, :, loc]
        s0 += nq
        vols.append(vol)
        dAs.append(dA)
        Ds.append(Dg)
        xs.append(geom.xi)
        ys.append(geom.eta)
    vols = np.concatenate(vols)
    Ds = np.concatenate(Ds)
    P = global_projection_matrix(model, np.concatenate(xs), np.concatenate(ys), np.concatenate(dAs))
    bbar = np.tensordot(P, mid, axes=(1, 0))
    db = np.einsum("sij,sjn->sin", Ds * vols[:, None, None], bbar)
    K3 = bbar.reshape(-1, n).T @ db.reshape(-1, n)
    return 0.5 * (K3 + K3.T)


# --- loads ---------------------------------------------------------------------------


def apply_load(system: GlobalSystem, load: Load):
    if load.kind == "point":
        apply_point_load(system, system.model, load.at, load.direction, load.magnitude)
    elif load.kind == "pressure":
        apply_pressure(system, system.model, load.direction, load.magnitude)
    else:
        raise ConfigError(f"unknown load kind {load.kind!r}")


def apply_point_load(system: GlobalSystem, model: ShellModel, at, direction, magnitude: float):
    """Consistent point load on the mid-surface translations: ``F_A += R_A P d``."""
    xi, eta = at
    idx, R, _ = splines.rational_surface_basis(model.basis, float(xi), float(eta))
    d = np.asarray(direction, float)
    dpn = system.dofmap.dofs_per_point
    for a, r in zip(idx, R):
        system.F[a * dpn: a * dpn + 3] += r * magnitude * d


def apply_pressure(system: GlobalSystem, model: ShellModel, direction, magnitude: float):
    """Uniform pressure integrated with the full (p+1)x(q+1) Gauss rule."""
    if magnitude == 0.0:
        return
    p, q = model.degrees
    dpn = system.dofmap.dofs_per_point
    for e in model.elements():
        geom, w = gauss_geometry(model, e, (p + 1, q + 1))
        a1, a2 = geom.tangents
        cross = np.cross(a1, a2)
        dA = w * geom.jac * np.linalg.norm(cross, axis=1)
        if isinstance(direction, str):
            dirs = cross / np.linalg.norm(cross, axis=1)[:, None]
        else:
            dirs = np.broadcast_to(np.asarray(direction, float), (len(w), 3))
        f = np.einsum("qa,q,qk->ak", geom.R, dA * magnitude, dirs)
        for a, fa in zip(geom.idx, f):
            system.F[a * dpn: a * dpn + 3] += fa


# --- solve ---------------------------------------------------------------------------


def drilling_matrix(model: ShellModel, dofmap: DofMap, scale: float) -> sp.csr_matrix:
    """``scale * n_A n_A^T`` on each control point's rotation block (shells only)."""
    n = dofmap.size
    if model.kind == PLATE or scale == 0.0:
        return sp.csr_matrix((n, n))
    dirs = model.flat_directors()
    rows, cols, vals = [], [], []
    for a, nv in enumerate(dirs):
        base = a * 6 + 3
        blk = scale * np.outer(nv, nv)
        for i in range(3):
            for j in range(3):
                rows.append(base + i)
                cols.append(base + j)
                vals.append(blk[i, j])
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


PIVOT_TOL = 64 * np.finfo(float).eps


def _factor_solve(K: sp.csc_matrix, f: np.ndarray) -> np.ndarray:
    # symmetric ordering with diagonal pivots: the stiffness is SPD, and this
    # keeps the fill close to a Cholesky factor
    try:
        lu = spla.splu(K, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                       options=dict(SymmetricMode=True))
    except RuntimeError:
        lu = spla.splu(K, permc_spec="COLAMD")
    # rigid modes show up as pivots at round-off level; thin-plate bending
    # pivots stay many orders of magnitude above this
    tiny = np.abs(lu.U.diagonal()) <= PIVOT_TOL * np.abs(K.diagonal()).max()
    if np.any(tiny):
        raise SingularityError(
            f"stiffness is singular: {int(tiny.sum())} round-off pivots; check the boundary conditions",
            int(tiny.sum()),
        )
    return lu.solve(f)


def solve(system: GlobalSystem, drilling_penalty: float = 1e-8) -> np.ndarray:
    """Solve for all control variables; returns shape ``(n_points, dofs_per_point)``.

    Rotations about each director carry no strain energy; a penalty
    ``drilling_penalty * max(diag K)`` on them keeps shells solvable.
    Raises :class:`SingularityError` when the constrained stiffness still
    has zero-energy modes.
    """
    d = system.dofmap
    if d.n_free == 0:
        return d.prescribed_vector().reshape(d.n_points, d.dofs_per_point)
    scale = drilling_penalty * float(system.K.diagonal().max())
    Kreg = system.K + drilling_matrix(system.model, d, scale)
    reg = GlobalSystem(system.model, d, Kreg, system.F, system.method)
    Kff, Ff = reg.reduced()
    try:
        uf = _factor_solve(sp.csc_matrix(Kff), Ff)
    except RuntimeError as exc:
        nullity = None
        if Kff.shape[0] <= RANK_LIMIT:
            nullity = Kff.shape[0] - _dense_rank(Kff.toarray())
        raise SingularityError(f"stiffness factorization failed: {exc}", nullity) from exc
    if not np.all(np.isfinite(uf)):
        raise SingularityError("non-finite solution; the constrained stiffness is singular")
    u = d.prescribed_vector()
    u[d.free] = uf
    return u.reshape(d.n_points, d.dofs_per_point)


def _dense_rank(A: np.ndarray, tol: float | None = None) -> int:
    if A.size == 0:
        return 0
    s = np.abs(np.linalg.eigvalsh(0.5 * (A + A.T)))
    if s.max(initial=0.0) == 0.0:
        return 0
    if tol is None:
        tol = A.shape[0] * np.finfo(float).eps * s.max()
    return int(np.count_nonzero(s > tol))


def stiffness_rank(system, tol: float | None = None, reduced: bool = True) -> int:
    """Numerical rank of the unregularized stiffness (free DOFs by default).

    Eigenvalues below ``N * eps * max|eig|`` count as zero. Accepts a
    :class:`GlobalSystem` or a square matrix.
    """
    if isinstance(system, GlobalSystem):
        K = system.reduced()[0] if reduced else system.K
    else:
        K = system
    n = K.shape[0]
    if n > RANK_LIMIT:
        raise ValueError(f"rank diagnostic disabled for N={n} > {RANK_LIMIT}")
    K = K.toarray() if sp.issparse(K) else np.asarray(K, float)
    return _dense_rank(K, tol)


def reactions(system: GlobalSystem, u: np.ndarray) -> np.ndarray:
    """Full-size ``K u - F`` (nonzero only at constrained DOFs up to round-off)."""
    return system.K @ u.ravel() - system.F


# --- post-processing ------------------------------------------------------------------


def displacement_at(model: ShellModel, u: np.ndarray, xi: float, eta: float) -> np.ndarray:
    """Interpolated control variables ``sum R_A q_A`` at ``(xi, eta)``."""
    idx, R, _ = splines.rational_surface_basis(model.basis, float(xi), float(eta))
    return R @ u[idx]
