"""Report and field file formats: JSON reports, legacy-VTK structured points, flat CSV."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .fields import Grid, ScalarField, VectorField

SCHEMA = "ns-verify/1"


def _num(x: float) -> str:
    x = float(x) + 0.0  # drop negative zero
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite number {x}")
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_report(path: Path, report: dict) -> None:
    Path(path).write_text(dumps(report) + "\n")


def _fmt(arr: np.ndarray) -> list[str]:
    return [format(float(v) + 0.0, ".17g") for v in arr]


def _vtk_order(samples: np.ndarray) -> np.ndarray:
    # VTK structured points run x fastest; our arrays are axis-0 slowest.
    return np.asarray(samples).transpose().ravel()


def write_vtk(
    path: Path,
    velocity: VectorField,
    pressure: ScalarField,
    force: VectorField | None = None,
    title: str = "ns-verify field",
) -> None:
    """Legacy ASCII ``STRUCTURED_POINTS``; 2D grids get a unit third axis and zero third components."""
    grid = velocity.grid
    dims = list(grid.resolution) + [1] * (3 - grid.dim)
    origin = list(grid.origin) + [0.0] * (3 - grid.dim)
    spacing = list(grid.spacing) + [1.0] * (3 - grid.dim)
    lines = [
        "# vtk DataFile Version 3.0",
        title.replace("\n", " ")[:255],
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        "DIMENSIONS " + " ".join(str(d) for d in dims),
        "ORIGIN " + " ".join(_fmt(np.array(origin))),
        "SPACING " + " ".join(_fmt(np.array(spacing))),
        f"POINT_DATA {grid.size}",
    ]

    def vectors(name, vf):
        comps = [_vtk_order(c) for c in vf.data]
        comps += [np.zeros(grid.size)] * (3 - grid.dim)
        lines.append(f"VECTORS {name} double")
        for row in zip(*(_fmt(c) for c in comps)):
            lines.append(" ".join(row))

    vectors("velocity", velocity)
    lines.append("SCALARS pressure double 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend(_fmt(_vtk_order(pressure.samples)))
    if force is not None:
        vectors("force", force)
    Path(path).write_text("\n".join(lines) + "\n")


def write_csv(path: Path, velocity: VectorField, pressure: ScalarField) -> None:
    """Columns ``x1,x2[,x3],v1,v2[,v3],p``; rows in axis-major order (axis 0 slowest)."""
    grid = velocity.grid
    n = grid.dim
    header = [f"x{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)] + ["p"]
    cols = [x.ravel() for x in grid.mesh()] + [c.ravel() for c in velocity.data] + [pressure.samples.ravel()]
    text = [",".join(header)]
    text.extend(",".join(row) for row in zip(*(_fmt(c) for c in cols)))
    Path(path).write_text("\n".join(text) + "\n")


def read_vtk_points(path: Path) -> tuple[list[int], dict[str, np.ndarray]]:
    """Minimal reader for files produced by :func:`write_vtk` (used by tests and round trips)."""
    tokens = Path(path).read_text().split("\n")
    dims: list[int] = []
    data: dict[str, np.ndarray] = {}
    i = 0
    npts = 0
    while i < len(tokens):
        line = tokens[i].strip()
        if line.startswith("DIMENSIONS"):
            dims = [int(v) for v in line.split()[1:]]
        elif line.startswith("POINT_DATA"):
            npts = int(line.split()[1])
        elif line.startswith("VECTORS"):
            name = line.split()[1]
            rows = [list(map(float, tokens[i + 1 + k].split())) for k in range(npts)]
            data[name] = np.array(rows)
            i += npts
        elif line.startswith("SCALARS"):
            name = line.split()[1]
            data[name] = np.array([float(tokens[i + 2 + k]) for k in range(npts)])
            i += npts + 1
        i += 1
    return dims, data


def grid_summary(grid: Grid) -> dict:
    return {"dim": grid.dim, "resolution": list(grid.resolution), "period": list(grid.period)}
