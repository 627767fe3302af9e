"""Benchmark recipes (plate, Scordelis-Lo roof, pinched cylinder, pinched hemisphere),
the thin-plate series solution, control-net distortions and study execution.
"""

from __future__ import annotations

import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import assembly
from .bbar import METHODS, assign_projection_spaces
from .errors import ConfigError, DistortionError, ShellbarError
from .model import (
    PLATE,
    SHELL,
    Constraint,
    ControlNet,
    Load,
    Material,
    ShellModel,
    load_model,
    model_to_config,
    refine,
    surface_point,
)
from .splines import KnotVector

log = logging.getLogger(__name__)

BEZIER2 = (0.0, 0.0, 0.0, 1.0, 1.0, 1.0)
PLATE_LOAD_COEFF = 1.0e7  # pressure = coeff * h**3 keeps the thin-plate deflection fixed

# Coarse 3x3 nets, rows in table order (xi fastest): x, y, z, weight.
PLATE_TABLE = np.array([
    [0.5, 0.75, 1, 0.5, 0.75, 1, 0.5, 0.75, 1],
    [0, 0, 0, 0.25, 0.25, 0.25, 0.5, 0.5, 0.5],
    [0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 1, 1, 1, 1, 1, 1, 1, 1],
])
ROOF_TABLE = np.array([
    [0, 1.091910703, 1.928362829, 0, 1.091910703, 1.928362829, 0, 1.091910703, 1.928362829],
    [0, 0, 0, 1.5, 1.5, 1.5, 3, 3, 3],
    [3, 3, 2.298133329, 3, 3, 2.298133329, 3, 3, 2.298133329],
    [1, 0.9396926208, 1, 1, 0.9396926208, 1, 1, 0.9396926208, 1],
])
CYLINDER_TABLE = np.array([
    [0, 3, 3, 0, 3, 3, 0, 3, 3],
    [0, 0, 0, 1.5, 1.5, 1.5, 3, 3, 3],
    [3, 3, 0, 3, 3, 0, 3, 3, 0],
    [1, 0.7071067812, 1, 1, 0.7071067812, 1, 1, 0.7071067812, 1],
])
HEMISPHERE_TABLE = np.array([
    [10, 10, 0, 10, 10, 0, 3.090169944, 3.090169944, 0],
    [0, 10, 10, 0, 10, 10, 0, 3.090169944, 3.090169944],
    [0, 0, 0, 7.265425281, 7.265425281, 7.265425281, 9.510565163, 9.510565163, 9.510565163],
    [1, 0.7071067810, 1, 0.8090169942, 0.5720614025, 0.8090169942, 1, 0.7071067810, 1],
])


@dataclass(frozen=True)
class Monitor:
    """Parametric location and slot of the reported displacement."""

    xi: float
    eta: float
    slot: str


@dataclass(frozen=True)
class BenchmarkCase:
    name: str
    model: ShellModel
    constraints: tuple[Constraint, ...]
    loads: tuple[Load, ...]
    monitor: Monitor
    reference: float
    secondary_reference: float | None = None
    notes: str = ""

    def __post_init__(self):
        if not self.reference != 0.0:
            raise ValueError("reference value must be nonzero")
        (a0, a1), (b0, b1) = self.model.xi.domain, self.model.eta.domain
        if not (a0 <= self.monitor.xi <= a1 and b0 <= self.monitor.eta <= b1):
            raise ValueError("monitor point outside the parametric domain")

    def with_thickness(self, h: float) -> "BenchmarkCase":
        loads = self.loads
        if self.name == "plate":
            loads = tuple(
                replace(ld, magnitude=PLATE_LOAD_COEFF * h**3) if ld.kind == "pressure" else ld
                for ld in loads
            )
        return replace(self, model=replace(self.model, thickness=h), loads=loads)


@dataclass
class StudyResult:
    case: str
    method: str
    degree: int
    mesh: int
    thickness: float
    monitor: float
    normalized: float
    rel_error: float
    rank: int | None
    seconds: float
    error: str | None = field(default=None, compare=False)


def _net(table) -> ControlNet:
    return ControlNet.from_flat(table[:3].T, table[3], (3, 3))


def _bezier() -> KnotVector:
    return KnotVector(2, BEZIER2)


def case_plate(thickness: float = 1e-3) -> BenchmarkCase:
    """Quarter of a simply supported unit square plate under uniform pressure.

    Outer edges (x = 1, y = 0) carry ``w = 0``; inner edges are symmetry
    lines. Pressure ``1e7 * h**3`` acts downward so the thin-plate centre
    deflection is thickness independent.
    """
    model = ShellModel(_bezier(), _bezier(), _net(PLATE_TABLE), thickness, Material(200e9, 0.3), PLATE)
    constraints = (
        Constraint("simple_support", edge="xi1"),
        Constraint("simple_support", edge="eta0"),
        Constraint("symmetry", edge="xi0", plane="x"),
        Constraint("symmetry", edge="eta1", plane="y"),
    )
    loads = (Load("pressure", PLATE_LOAD_COEFF * thickness**3, (0.0, 0.0, -1.0)),)
    return BenchmarkCase(
        "plate", model, constraints, loads, Monitor(0.0, 1.0, "w"), -2.21804e-6,
        notes="centre deflection w_A",
    )


def case_scordelis() -> BenchmarkCase:
    """Quarter Scordelis-Lo roof: diaphragm at y=0, symmetry at y=3 and x=0, free edge."""
    model = ShellModel(_bezier(), _bezier(), _net(ROOF_TABLE), 0.03, Material(30e9, 0.0), SHELL)
    constraints = (
        Constraint("rigid_diaphragm", edge="eta0", plane="y"),
        Constraint("symmetry", edge="eta1", plane="y"),
        Constraint("symmetry", edge="xi0", plane="x"),
    )
    loads = (Load("pressure", 6250.0, (0.0, 0.0, -1.0)),)
    return BenchmarkCase(
        "scordelis", model, constraints, loads, Monitor(1.0, 1.0, "w"), -0.0361776,
        secondary_reference=-0.0361, notes="vertical displacement at free-edge midspan w_B",
    )


def case_cylinder() -> BenchmarkCase:
    """Octant of the pinched cylinder: diaphragm at y=0, symmetry elsewhere, P/4 at the pole."""
    model = ShellModel(_bezier(), _bezier(), _net(CYLINDER_TABLE), 0.03, Material(30e9, 0.3), SHELL)
    constraints = (
        Constraint("rigid_diaphragm", edge="eta0", plane="y"),
        Constraint("symmetry", edge="eta1", plane="y"),
        Constraint("symmetry", edge="xi0", plane="x"),
        Constraint("symmetry", edge="xi1", plane="z"),
    )
    loads = (Load("point", 0.25, (0.0, 0.0, -1.0), at=(0.0, 1.0)),)
    return BenchmarkCase(
        "cylinder", model, constraints, loads, Monitor(0.0, 1.0, "w"), -1.85942e-7,
        notes="radial displacement under the load w_C",
    )


def case_hemisphere() -> BenchmarkCase:
    """Quadrant of the pinched hemisphere with an 18 degree hole.

    Symmetry planes x=0 and y=0; equator and hole are free; one vertical
    translation is pinned to remove the remaining rigid mode.
    """
    model = ShellModel(_bezier(), _bezier(), _net(HEMISPHERE_TABLE), 0.04, Material(68.25e6, 0.3), SHELL)
    constraints = (
        Constraint("symmetry", edge="xi0", plane="y"),
        Constraint("symmetry", edge="xi1", plane="x"),
        Constraint("fix", points=(0,), dofs=("w",)),
    )
    loads = (
        Load("point", 1.0, (1.0, 0.0, 0.0), at=(0.0, 0.0)),
        Load("point", 1.0, (0.0, -1.0, 0.0), at=(1.0, 0.0)),
    )
    return BenchmarkCase(
        "hemisphere", model, constraints, loads, Monitor(0.0, 0.0, "u"), 0.0940,
        notes="radial displacement u_D at the outward-loaded point",
    )


CASES = {
    "plate": case_plate,
    "scordelis": case_scordelis,
    "cylinder": case_cylinder,
    "hemisphere": case_hemisphere,
}


def get_case(name: str, thickness: float | None = None) -> BenchmarkCase:
    try:
        factory = CASES[name]
    except KeyError:
        raise KeyError(f"unknown case {name!r}; choose from {sorted(CASES)}") from None
    case = factory()
    return case if thickness is None else case.with_thickness(thickness)


def case_to_config(case: BenchmarkCase) -> dict:
    """Config document of ``case`` including its monitor and reference."""
    m = case.monitor
    return model_to_config(
        case.model, case.constraints, case.loads,
        name=case.name, monitor={"xi": m.xi, "eta": m.eta, "slot": m.slot}, reference=case.reference,
    )


def case_from_config(doc) -> BenchmarkCase:
    """Benchmark case from a config document (dict or JSON text).

    Besides the model fields the document may carry ``name``, ``monitor``
    (``{xi, eta, slot}``, default ``w`` at the parametric centre) and
    ``reference`` (default 1, i.e. normalized = raw value).
    """
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
    model, constraints, loads = load_model(doc)
    (a0, a1), (b0, b1) = model.xi.domain, model.eta.domain
    mon = doc.get("monitor", {})
    try:
        monitor = Monitor(
            float(mon.get("xi", 0.5 * (a0 + a1))), float(mon.get("eta", 0.5 * (b0 + b1))), str(mon.get("slot", "w"))
        )
        if monitor.slot not in ("u", "v", "w", "rx", "ry", "rz"):
            raise ConfigError(f"unknown monitor slot {monitor.slot!r}")
        return BenchmarkCase(
            str(doc.get("name", "custom")), model, tuple(constraints), tuple(loads), monitor,
            float(doc.get("reference", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid case fields: {exc}") from exc


# --- analytic thin-plate series ---------------------------------------------------------


def analytic_plate_deflection(x, y, p, L=1.0, D=None, M=None, E=200e9, nu=0.3, h=None):
    """Navier series deflection of a simply supported square plate under uniform load.

    Either ``D`` or ``h`` (with ``E`` and ``nu``) gives the bending stiffness.
    Odd terms ``m, n <= M``; when ``M`` is omitted the series is extended
    until a new diagonal shell of terms changes the sum by less than 1e-12
    relative. Positive ``p`` gives positive deflection.
    """
    if D is None:
        D = E * h**3 / (12.0 * (1.0 - nu**2))
    x = np.asarray(x, float)
    y = np.asarray(y, float)

    def term(m, n):
        return (np.sin(m * np.pi * x / L) * np.sin(n * np.pi * y / L)
                / (m * n * ((m / L) ** 2 + (n / L) ** 2) ** 2))

    scale = 16.0 * p / (np.pi**6 * D)
    if M is not None:
        ks = np.arange(1, M + 1, 2)
        mm, nn = np.meshgrid(ks, ks, indexing="ij")
        total = sum(term(m, n) for m, n in zip(mm.ravel(), nn.ravel()))
        return scale * total
    total = term(1, 1)
    k = 1
    while True:
        k += 2
        # new shell: (k, j) and (j, k) for odd j < k, plus (k, k)
        shell = term(k, k)
        for j in range(1, k, 2):
            shell = shell + term(k, j) + term(j, k)
        total = total + shell
        if np.all(np.abs(shell) <= 1e-12 * np.maximum(np.abs(total), 1e-300)) or k > 4001:
            break
    return scale * total


# --- distortions ---------------------------------------------------------------------


@dataclass(frozen=True)
class DistortionSpec:
    """Move four control points around the patch centre.

    ``expansion`` pushes them outward along their diagonals by
    ``stage * d_factor * d_diag`` (``d_diag``: distance to the next control
    point on that diagonal); ``rotation`` turns them about the patch centre
    by ``stage * phi_max``. ``points`` are ``(i, j)`` pairs; ``None``
    selects the four points surrounding the centre.
    """

    mode: str
    stage: float
    points: tuple[tuple[int, int], ...] | None = None
    d_factor: float = 0.5
    phi_max: float = math.radians(30.0)

    def __post_init__(self):
        if self.mode not in ("expansion", "rotation"):
            raise ValueError(f"distortion mode must be expansion|rotation, got {self.mode!r}")
        if not -1.0 <= self.stage <= 1.0:
            raise ValueError("distortion stage must lie in [0, 1] (negative undoes a rotation)")


def central_points(shape) -> tuple[tuple[int, int], ...]:
    n, m = shape
    if min(n, m) < 4:
        raise DistortionError("net too coarse for four interior points around the centre")
    ci = (n // 2 - 1, n // 2) if n % 2 == 0 else (n // 2 - 1, n // 2 + 1)
    cj = (m // 2 - 1, m // 2) if m % 2 == 0 else (m // 2 - 1, m // 2 + 1)
    return tuple((i, j) for j in cj for i in ci)


def distort_plate(model: ShellModel, spec: DistortionSpec) -> ShellModel:
    """Distorted copy of a flat model; raises when an element Jacobian turns non-positive."""
    pts = np.array(model.net.points)
    picks = spec.points or central_points(model.shape)
    center = surface_point(model, *(0.5 * sum(model.xi.domain), 0.5 * sum(model.eta.domain)))[0]
    for i, j in picks:
        x = pts[i, j]
        if spec.mode == "expansion":
            si = 1 if x[0] >= center[0] else -1
            sj = 1 if x[1] >= center[1] else -1
            # step direction in index space follows the outward diagonal
            di = si if _increasing(pts[:, j, 0]) else -si
            dj = sj if _increasing(pts[i, :, 1]) else -sj
            nb = pts[i + di, j + dj]
            d = x - center
            d[2] = 0.0
            unit = d / np.linalg.norm(d)
            step = spec.stage * spec.d_factor * np.linalg.norm(nb - x)
            pts[i, j] = x + step * unit
        else:
            phi = spec.stage * spec.phi_max
            c, s = math.cos(phi), math.sin(phi)
            dx, dy = x[0] - center[0], x[1] - center[1]
            pts[i, j, 0] = center[0] + c * dx - s * dy
            pts[i, j, 1] = center[1] + s * dx + c * dy
    out = model.with_net(ControlNet(pts, model.net.weights))
    check_jacobians(out)
    return out


def _increasing(v) -> bool:
    return v[-1] > v[0]


def check_jacobians(model: ShellModel, samples: int = 5):
    """Raise :class:`DistortionError` if ``x_xi x x_eta`` loses orientation anywhere."""
    from .mechanics import element_geometry

    s = (np.arange(samples) + 0.5) / samples
    local = np.array([(a, b) for b in s for a in s])
    ref = None
    for e in model.elements():
        g = element_geometry(model, e, local)
        a1, a2 = g.tangents
        c = np.cross(a1, a2)
        if ref is None:
            ref = c[0] / np.linalg.norm(c[0])
        if np.any(c @ ref <= 0.0):
            raise DistortionError(f"non-positive Jacobian in element {e.index}")


# --- study execution ---------------------------------------------------------------------


def build_model(case: BenchmarkCase, degree: int, mesh: int, distortion: DistortionSpec | None = None) -> ShellModel:
    model = refine(case.model, degree, mesh)
    if distortion is not None:
        model = distort_plate(model, distortion)
    return model


def run_case(
    case: BenchmarkCase,
    method: str,
    degree: int = 2,
    mesh: int = 4,
    thickness: float | None = None,
    distortion: DistortionSpec | None = None,
    drilling_penalty: float = 1e-8,
    rank: bool = False,
    return_solution: bool = False,
):
    """Build, refine, assemble, solve and read the monitor for one configuration."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if thickness is not None and thickness != case.model.thickness:
        case = case.with_thickness(thickness)
    t0 = time.perf_counter()
    model = build_model(case, degree, mesh, distortion)
    assignment = None
    if method in ("lb", "glb"):
        assignment = assign_projection_spaces(model, method, model.degrees)
    system = assembly.assemble(model, method, assignment, case.constraints, case.loads)
    u = assembly.solve(system, drilling_penalty)
    q = assembly.displacement_at(model, u, case.monitor.xi, case.monitor.eta)
    value = float(q[system.dofmap.slots.index(case.monitor.slot)])
    r = None
    if rank:
        r = assembly.stiffness_rank(system)
    seconds = time.perf_counter() - t0
    normalized = value / case.reference
    result = StudyResult(
        case.name, method, degree, mesh, model.thickness, value, normalized,
        abs(normalized - 1.0), r, seconds,
    )
    if return_solution:
        return result, model, u
    return result


def _failed(case, method, degree, mesh, thickness, exc) -> StudyResult:
    nan = float("nan")
    return StudyResult(case.name, method, degree, mesh, thickness, nan, nan, nan, None, 0.0, str(exc))


def sort_key(r: StudyResult):
    return (r.case, r.method, r.degree, r.mesh, r.thickness)


def run_study(
    cases,
    methods,
    degrees,
    meshes,
    thicknesses=(None,),
    distortion: DistortionSpec | None = None,
    drilling_penalty: float = 1e-8,
    rank: bool = False,
    threads: int | None = None,
) -> list[StudyResult]:
    """Run every combination; failures become rows with NaN values and ``error`` set."""
    jobs = []
    for case in cases:
        if isinstance(case, str):
            case = get_case(case)
        for h in thicknesses:
            c = case if h is None else case.with_thickness(h)
            for method in methods:
                for deg in degrees:
                    for m in meshes:
                        jobs.append((c, method, deg, m))

    def one(job):
        c, method, deg, m = job
        try:
            return run_case(c, method, deg, m, None, distortion, drilling_penalty, rank)
        except (ShellbarError, ValueError, np.linalg.LinAlgError) as exc:
            log.warning("run %s/%s/p%d/m%d failed: %s", c.name, method, deg, m, exc)
            return _failed(c, method, deg, m, c.model.thickness, exc)

    if threads is None:
        threads = int(os.environ.get("SHELLBAR_THREADS", "1") or 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(j) for j in jobs]
    return sorted(results, key=sort_key)
