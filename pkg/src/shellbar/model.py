"""Single-patch degenerated shell: geometry, material, directors, config files."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from . import splines
from .errors import ConfigError, GeometryError
from .splines import KnotVector, SurfaceBasis

PLATE, SHELL = "plate", "shell"
EDGES = ("xi0", "xi1", "eta0", "eta1")


@dataclass(frozen=True)
class ControlNet:
    """Control points ``(n, m, 3)`` in metres and positive weights ``(n, m)``."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        w = np.array(self.weights, dtype=float)
        if pts.ndim != 3 or pts.shape[2] != 3 or w.shape != pts.shape[:2]:
            raise ValueError(f"inconsistent net shapes {pts.shape}, {w.shape}")
        if not np.all(w > 0):
            raise ValueError("control weights must be strictly positive")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def shape(self):
        return self.weights.shape

    def flat_points(self) -> np.ndarray:
        """(n*m, 3) with xi index fastest."""
        return self.points.transpose(1, 0, 2).reshape(-1, 3)

    def flat_weights(self) -> np.ndarray:
        return self.weights.T.reshape(-1)

    @classmethod
    def from_flat(cls, points, weights, shape):
        n, m = shape
        pts = np.asarray(points, float).reshape(m, n, 3).transpose(1, 0, 2)
        w = np.asarray(weights, float).reshape(m, n).T
        return cls(pts, w)


@dataclass(frozen=True)
class Material:
    E: float
    nu: float
    kappa: float = 5.0 / 6.0

    def __post_init__(self):
        if not self.E > 0:
            raise ValueError("Young's modulus must be positive")
        if not 0 <= self.nu < 0.5:
            raise ValueError("Poisson ratio must lie in [0, 0.5)")
        if not self.kappa > 0:
            raise ValueError("shear correction factor must be positive")


@dataclass(frozen=True)
class Constraint:
    """Boundary condition on an edge or on explicit control points.

    ``kind`` is one of ``clamp``, ``simple_support``, ``symmetry``,
    ``rigid_diaphragm`` or ``fix``. ``plane`` names the global axis normal
    to a symmetry/diaphragm plane; ``dofs`` lists slot names for ``fix``
    (or overrides the default slots of ``simple_support``).
    """

    kind: str
    edge: str | None = None
    points: tuple[int, ...] | None = None
    plane: str | None = None
    dofs: tuple[str, ...] | None = None
    value: float = 0.0


@dataclass(frozen=True)
class Load:
    """``point`` load at parametric ``at`` or uniform ``pressure``.

    ``direction`` is a global 3-vector, or ``"normal"`` for pressure along
    the surface normal.
    """

    kind: str
    magnitude: float
    direction: Any = (0.0, 0.0, -1.0)
    at: tuple[float, float] | None = None


@dataclass(frozen=True)
class ShellModel:
    xi: KnotVector
    eta: KnotVector
    net: ControlNet
    thickness: float
    material: Material
    kind: str = SHELL
    directors: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in (PLATE, SHELL):
            raise ValueError(f"kind must be 'plate' or 'shell', got {self.kind!r}")
        if not self.thickness > 0:
            raise ValueError("thickness must be positive")
        if self.net.shape != (self.xi.n, self.eta.n):
            raise ValueError(f"net shape {self.net.shape} != basis shape {(self.xi.n, self.eta.n)}")
        if self.directors is None:
            object.__setattr__(self, "directors", compute_directors(self))
        d = np.array(self.directors, float)
        if d.shape != self.net.points.shape:
            raise ValueError("one director per control point required")
        if not np.allclose(np.linalg.norm(d, axis=-1), 1.0, atol=1e-12, rtol=0):
            raise ValueError("directors must have unit length")
        d.setflags(write=False)
        object.__setattr__(self, "directors", d)

    @property
    def basis(self) -> SurfaceBasis:
        return SurfaceBasis(self.xi, self.eta, self.net.weights)

    @property
    def degrees(self) -> tuple[int, int]:
        return self.xi.degree, self.eta.degree

    @property
    def shape(self) -> tuple[int, int]:
        return self.xi.n, self.eta.n

    @property
    def n_points(self) -> int:
        return self.xi.n * self.eta.n

    @property
    def dofs_per_point(self) -> int:
        return 5 if self.kind == PLATE else 6

    def elements(self):
        return splines.elements(self.xi, self.eta)

    def flat_directors(self) -> np.ndarray:
        return self.directors.transpose(1, 0, 2).reshape(-1, 3)

    def with_net(self, net: ControlNet) -> "ShellModel":
        """Same model on a new net; directors are recomputed."""
        return replace(self, net=net, directors=None)


def surface_point(model: ShellModel, xi: float, eta: float):
    """Mid-surface point and covariant tangents ``x_xi``, ``x_eta``."""
    idx, R, dR = splines.rational_surface_basis(model.basis, xi, eta)
    X = model.net.flat_points()[idx]
    return R @ X, dR[:, 0] @ X, dR[:, 1] @ X


def unit_normal(model: ShellModel, xi: float, eta: float) -> np.ndarray:
    _, a1, a2 = surface_point(model, xi, eta)
    return normal_from_tangents(a1, a2)


def normal_from_tangents(a1, a2) -> np.ndarray:
    c = np.cross(a1, a2)
    nrm = np.linalg.norm(c)
    if not nrm > 1e-14 * np.linalg.norm(a1) * np.linalg.norm(a2):
        raise GeometryError("degenerate tangents: zero cross product")
    return c / nrm


def compute_directors(model: ShellModel) -> np.ndarray:
    """Unit normals at the Greville points, shape ``(n, m, 3)``.

    Plates get ``(0, 0, 1)`` everywhere.
    """
    n, m = model.xi.n, model.eta.n
    if model.kind == PLATE:
        d = np.zeros((n, m, 3))
        d[..., 2] = 1.0
        return d
    gx = splines.greville_abscissae(model.xi)
    gy = splines.greville_abscissae(model.eta)
    d = np.empty((n, m, 3))
    for i, u in enumerate(gx):
        for j, v in enumerate(gy):
            d[i, j] = unit_normal(model, u, v)
    return d


def shell_point(model: ShellModel, xi: float, eta: float, zeta: float) -> np.ndarray:
    """Point of the shell body extruded along the interpolated directors."""
    h = model.thickness
    if abs(zeta) > h / 2 * (1 + 1e-12):
        raise ValueError(f"zeta={zeta} outside [-h/2, h/2] with h={h}")
    idx, R, _ = splines.rational_surface_basis(model.basis, xi, eta)
    X = model.net.flat_points()[idx]
    N = model.flat_directors()[idx]
    return R @ (X + zeta * N)


def edge_points(model: ShellModel, edge: str) -> np.ndarray:
    """Flattened control-point indices on a parametric edge."""
    n, m = model.shape
    if edge == "xi0":
        return np.arange(m) * n
    if edge == "xi1":
        return np.arange(m) * n + n - 1
    if edge == "eta0":
        return np.arange(n)
    if edge == "eta1":
        return np.arange(n) + n * (m - 1)
    raise ConfigError(f"unknown edge {edge!r}; expected one of {EDGES}")


# --- refinement -------------------------------------------------------------------


def refine(model: ShellModel, degree: int | None = None, mesh: int | tuple[int, int] = 1) -> ShellModel:
    """Elevate to ``degree`` (both directions) then subdivide each element ``mesh`` times.

    Directors are recomputed on the refined layout.
    """
    xi, eta, net = model.xi, model.eta, model.net
    if degree is not None:
        if xi.degree < degree:
            xi, net = splines.elevate_degree(xi, net, degree - xi.degree, 0)
        if eta.degree < degree:
            eta, net = splines.elevate_degree(eta, net, degree - eta.degree, 1)
    mx, my = (mesh, mesh) if np.isscalar(mesh) else mesh
    if mx > 1:
        xi, net = splines.insert_knots(xi, splines.uniform_knots(xi, mx), net, 0)
    if my > 1:
        eta, net = splines.insert_knots(eta, splines.uniform_knots(eta, my), net, 1)
    return replace(model, xi=xi, eta=eta, net=net, directors=None)


# --- config documents -------------------------------------------------------------


def _constraint_to_dict(c: Constraint) -> dict:
    d = {"type": c.kind}
    if c.edge is not None:
        d["edge"] = c.edge
    if c.points is not None:
        d["points"] = list(c.points)
    if c.plane is not None:
        d["plane"] = c.plane
    if c.dofs is not None:
        d["dofs"] = list(c.dofs)
    if c.value:
        d["value"] = c.value
    return d


def _load_to_dict(ld: Load) -> dict:
    d = {"type": ld.kind, "magnitude": ld.magnitude}
    d["direction"] = ld.direction if isinstance(ld.direction, str) else [float(x) for x in ld.direction]
    if ld.at is not None:
        d["at"] = [float(x) for x in ld.at]
    return d


def model_to_config(model: ShellModel, constraints=(), loads=(), **extra) -> dict:
    """JSON-ready config document describing ``model`` and its BCs/loads."""
    doc = {
        "degree": [model.xi.degree, model.eta.degree],
        "knots_xi": [float(k) for k in model.xi.knots],
        "knots_eta": [float(k) for k in model.eta.knots],
        "points": model.net.flat_points().tolist(),
        "weights": model.net.flat_weights().tolist(),
        "thickness": model.thickness,
        "material": {"E": model.material.E, "nu": model.material.nu, "kappa": model.material.kappa},
        "kind": model.kind,
        "bcs": [_constraint_to_dict(c) for c in constraints],
        "loads": [_load_to_dict(ld) for ld in loads],
    }
    doc.update(extra)
    return doc


_CONSTRAINT_KINDS = ("clamp", "simple_support", "symmetry", "rigid_diaphragm", "fix")


def _parse_constraint(d: dict, model: ShellModel) -> Constraint:
    kind = d.get("type")
    if kind not in _CONSTRAINT_KINDS:
        raise ConfigError(f"unknown constraint type {kind!r}")
    edge = d.get("edge")
    points = d.get("points")
    if (edge is None) == (points is None):
        raise ConfigError(f"constraint {d} needs exactly one of 'edge' or 'points'")
    if edge is not None and edge not in EDGES:
        raise ConfigError(f"unknown edge {edge!r}")
    if points is not None:
        points = tuple(int(i) for i in points)
        if any(i < 0 or i >= model.n_points for i in points):
            raise ConfigError(f"constraint references nonexistent control point in {points}")
    plane = d.get("plane")
    if kind in ("symmetry", "rigid_diaphragm") and plane not in ("x", "y", "z"):
        raise ConfigError(f"{kind} needs plane in x|y|z, got {plane!r}")
    dofs = d.get("dofs")
    if kind == "fix" and not dofs:
        raise ConfigError("fix constraint needs a non-empty 'dofs' list")
    return Constraint(kind, edge, points, plane, tuple(dofs) if dofs else None, float(d.get("value", 0.0)))


def _parse_load(d: dict) -> Load:
    kind = d.get("type")
    if kind not in ("point", "pressure"):
        raise ConfigError(f"unknown load type {kind!r}")
    direction = d.get("direction", [0.0, 0.0, -1.0])
    if isinstance(direction, str):
        if direction != "normal":
            raise ConfigError(f"direction string must be 'normal', got {direction!r}")
    else:
        direction = tuple(float(x) for x in direction)
        if len(direction) != 3:
            raise ConfigError("load direction must be a 3-vector")
    at = d.get("at")
    if kind == "point":
        if at is None or len(at) != 2:
            raise ConfigError("point load needs 'at': [xi, eta]")
        at = (float(at[0]), float(at[1]))
    return Load(kind, float(d["magnitude"]), direction, at)


def load_model(doc: dict | str):
    """Validate a config document (dict or JSON text) into a model, constraints and loads."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
    required = ("degree", "knots_xi", "knots_eta", "points", "weights", "thickness", "material")
    missing = [k for k in required if k not in doc]
    if missing:
        raise ConfigError(f"config missing fields: {missing}")
    try:
        p, q = (int(x) for x in doc["degree"])
        xi = KnotVector(p, doc["knots_xi"])
        eta = KnotVector(q, doc["knots_eta"])
        shape = (xi.n, eta.n)
        pts = np.asarray(doc["points"], float)
        w = np.asarray(doc["weights"], float)
        if pts.shape != (shape[0] * shape[1], 3) or w.shape != (shape[0] * shape[1],):
            raise ConfigError(
                f"expected {shape[0] * shape[1]} points/weights for basis {shape}, "
                f"got {pts.shape} and {w.shape}"
            )
        net = ControlNet.from_flat(pts, w, shape)
        mat = doc["material"]
        material = Material(float(mat["E"]), float(mat["nu"]), float(mat.get("kappa", 5.0 / 6.0)))
        model = ShellModel(xi, eta, net, float(doc["thickness"]), material, doc.get("kind", SHELL))
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError, GeometryError) as exc:
        raise ConfigError(f"invalid model: {exc}") from exc
    constraints = [_parse_constraint(c, model) for c in doc.get("bcs", [])]
    loads = [_parse_load(ld) for ld in doc.get("loads", [])]
    return model, constraints, loads


def dump_config(doc: dict) -> str:
    """Serialize with full float64 round-trip precision."""
    return json.dumps(doc, indent=1)
