"""CSV and legacy-VTK serialization for grid fields.

CSV layout: one comment header line ``# nx ny hx hy x_min y_min`` followed
by nx rows of ny values (row-major over the x index).  Values are written
with 17 significant digits so the round trip is bit-exact for float64.
"""

from __future__ import annotations

import numpy as np

from .grid import GridSpec, ScalarField, VectorField

_FMT = "%.17g"


def write_scalar_csv(field: ScalarField, path) -> None:
    spec = field.spec
    header = f"# nx ny hx hy x_min y_min\n# {spec.nx} {spec.ny} " \
             f"{_FMT % spec.hx} {_FMT % spec.hy} {_FMT % spec.x_min} {_FMT % spec.y_min}"
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i in range(spec.nx):
            fh.write(",".join(_FMT % v for v in field.values[i, :]) + "\n")


def read_scalar_csv(path) -> ScalarField:
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValueError(f"{path}: missing CSV header")
        meta = fh.readline().lstrip("#").split()
        nx, ny = int(meta[0]), int(meta[1])
        hx, hy = float(meta[2]), float(meta[3])
        x_min, y_min = float(meta[4]), float(meta[5])
        rows = [list(map(float, line.split(","))) for line in fh if line.strip()]
    values = np.array(rows)
    if values.shape != (nx, ny):
        raise ValueError(f"{path}: data shape {values.shape} != ({nx}, {ny})")
    spec = GridSpec(x_min, x_min + nx * hx, y_min, y_min + ny * hy, nx, ny)
    return ScalarField(spec, values)


def write_vector_csv(field: VectorField, path_u, path_v) -> None:
    """Face components as two scalar-style CSVs (shapes differ from cells)."""
    spec = field.spec
    for arr, path in ((field.u, path_u), (field.v, path_v)):
        with open(path, "w") as fh:
            fh.write("# n0 n1 hx hy x_min y_min\n")
            fh.write(f"# {arr.shape[0]} {arr.shape[1]} "
                     f"{_FMT % spec.hx} {_FMT % spec.hy} "
                     f"{_FMT % spec.x_min} {_FMT % spec.y_min}\n")
            for i in range(arr.shape[0]):
                fh.write(",".join(_FMT % v for v in arr[i, :]) + "\n")


def write_scalar_vtk(field: ScalarField, path, name: str = "field") -> None:
    """Legacy-VTK structured points, cell data at cell centers as points."""
    spec = field.spec
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"{name}\n")
        fh.write("ASCII\n")
        fh.write("DATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {spec.nx} {spec.ny} 1\n")
        fh.write(f"ORIGIN {spec.x_min + 0.5 * spec.hx} {spec.y_min + 0.5 * spec.hy} 0\n")
        fh.write(f"SPACING {spec.hx} {spec.hy} 1\n")
        fh.write(f"POINT_DATA {spec.nx * spec.ny}\n")
        fh.write(f"SCALARS {name} double 1\n")
        fh.write("LOOKUP_TABLE default\n")
        # VTK expects x fastest
        for j in range(spec.ny):
            fh.write(" ".join(_FMT % v for v in field.values[:, j]) + "\n")


def write_vector_vtk(field: VectorField, path, name: str = "velocity") -> None:
    spec = field.spec
    uc, vc = field.cell_centered()
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"{name}\n")
        fh.write("ASCII\n")
        fh.write("DATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {spec.nx} {spec.ny} 1\n")
        fh.write(f"ORIGIN {spec.x_min + 0.5 * spec.hx} {spec.y_min + 0.5 * spec.hy} 0\n")
        fh.write(f"SPACING {spec.hx} {spec.hy} 1\n")
        fh.write(f"POINT_DATA {spec.nx * spec.ny}\n")
        fh.write(f"VECTORS {name} double\n")
        for j in range(spec.ny):
            for i in range(spec.nx):
                fh.write(f"{_FMT % uc[i, j]} {_FMT % vc[i, j]} 0\n")
