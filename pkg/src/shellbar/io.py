"""Results tables and sampled displacement fields (CSV and legacy VTK text)."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import assembly, splines
from .benchmarks import StudyResult, sort_key
from .model import ShellModel

RESULT_COLUMNS = ("case", "method", "degree", "mesh", "thickness", "monitor", "normalized", "rel_error", "rank", "seconds")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x)) if math.isfinite(x) else "nan"
    return str(x)


def write_results(results, path) -> Path:
    """Write study rows as CSV, sorted by case, method, degree, mesh."""
    results = list(results)
    if not results:
        raise ValueError("no results to write")
    path = Path(path)
    rows = sorted(results, key=sort_key)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in rows:
            w.writerow([_fmt(getattr(r, c)) for c in RESULT_COLUMNS])
    return path


def read_results(path) -> list[StudyResult]:
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(StudyResult(
                row["case"], row["method"], int(row["degree"]), int(row["mesh"]), float(row["thickness"]),
                float(row["monitor"]), float(row["normalized"]), float(row["rel_error"]),
                int(row["rank"]) if row["rank"] else None, float(row["seconds"]),
            ))
    return out


@dataclass
class FieldSamples:
    """Grid of mid-surface samples, ``xi`` index fastest.

    ``dims`` is ``(nx * density, ny * density)``; ``values`` holds one
    column per control variable slot.
    """

    dims: tuple[int, int]
    points: np.ndarray
    values: np.ndarray
    slots: tuple[str, ...]
    deformed: bool = False


def sample_field(u: np.ndarray, model: ShellModel, density: int = 2, deformed: bool = False) -> FieldSamples:
    """Evaluate the solution at ``density**2`` sub-cell centres per element."""
    if density < 1:
        raise ValueError("density must be a positive integer")
    u = np.asarray(u, float)
    s = (np.arange(density) + 0.5) / density
    kx, ky = model.xi.unique_knots(), model.eta.unique_knots()
    us = (kx[:-1, None] + s[None, :] * np.diff(kx)[:, None]).ravel()
    vs = (ky[:-1, None] + s[None, :] * np.diff(ky)[:, None]).ravel()
    X = model.net.flat_points()
    pts, vals = [], []
    for v in vs:
        for x in us:
            idx, R, _ = splines.rational_surface_basis(model.basis, float(x), float(v))
            pts.append(R @ X[idx])
            vals.append(R @ u[idx])
    pts = np.array(pts)
    vals = np.array(vals)
    if deformed:
        pts = pts + vals[:, :3]
    slots = assembly.PLATE_SLOTS if u.shape[1] == 5 else assembly.SHELL_SLOTS
    return FieldSamples((len(us), len(vs)), pts, vals, tuple(slots), deformed)


def export_field(u, model: ShellModel, density: int, path, format: str = "vtk", deformed: bool = False) -> Path:
    """Write the sampled field as legacy VTK structured grid or CSV.

    Both formats print every number with ``repr`` so identical inputs give
    byte-identical files and the two formats carry the same values.
    """
    if format not in ("vtk", "csv"):
        raise ValueError(f"unknown field format {format!r}")
    f = sample_field(u, model, density, deformed)
    path = Path(path)
    lines = []
    if format == "csv":
        lines.append(",".join(("x", "y", "z") + f.slots))
        for p, q in zip(f.points, f.values):
            lines.append(",".join(_fmt(x) for x in (*p, *q)))
    else:
        nx, ny = f.dims
        lines += [
            "# vtk DataFile Version 3.0",
            f"shellbar field ({'deformed' if deformed else 'undeformed'} mid-surface)",
            "ASCII",
            "DATASET STRUCTURED_GRID",
            f"DIMENSIONS {nx} {ny} 1",
            f"POINTS {nx * ny} double",
        ]
        lines += [" ".join(_fmt(x) for x in p) for p in f.points]
        lines.append(f"POINT_DATA {nx * ny}")
        for k, name in enumerate(f.slots):
            lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            lines += [_fmt(x) for x in f.values[:, k]]
    path.write_text("\n".join(lines) + "\n")
    return path
