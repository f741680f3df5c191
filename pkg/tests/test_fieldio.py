import numpy as np
import pytest

from tissueflow.fieldio import (read_scalar_csv, write_scalar_csv,
                                write_scalar_vtk, write_vector_csv,
                                write_vector_vtk)
from tissueflow.grid import GridSpec, ScalarField, VectorField


def test_scalar_csv_round_trip_is_bit_exact(tmp_path):
    spec = GridSpec(-1.0, 1.0, -0.5, 0.5, 12, 8)
    rng = np.random.default_rng(1)
    field = ScalarField(spec, rng.standard_normal((12, 8)))
    path = tmp_path / "field.csv"
    write_scalar_csv(field, path)
    back = read_scalar_csv(path)
    assert back.spec.nx == 12 and back.spec.ny == 8
    assert back.spec.x_min == spec.x_min and back.spec.hy == spec.hy
    assert np.array_equal(back.values, field.values)


def test_scalar_csv_header_layout(tmp_path):
    spec = GridSpec(nx=4, ny=4)
    path = tmp_path / "f.csv"
    write_scalar_csv(ScalarField.zeros(spec), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# nx ny hx hy x_min y_min"
    assert lines[1].split() == ["#", "4", "4", "0.5", "0.5", "-1", "-1"]
    assert len(lines) == 2 + 4
    assert lines[2].count(",") == 3


def test_read_rejects_malformed_files(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,4\n")
    with pytest.raises(ValueError):
        read_scalar_csv(bad)
    truncated = tmp_path / "short.csv"
    truncated.write_text("# nx ny hx hy x_min y_min\n# 3 3 0.5 0.5 0 0\n1,2,3\n")
    with pytest.raises(ValueError):
        read_scalar_csv(truncated)


def test_vector_csv_shapes(tmp_path):
    spec = GridSpec(nx=6, ny=5)
    rng = np.random.default_rng(2)
    vec = VectorField(spec, rng.standard_normal((7, 5)),
                      rng.standard_normal((6, 6)))
    pu, pv = tmp_path / "u.csv", tmp_path / "v.csv"
    write_vector_csv(vec, pu, pv)
    u_lines = pu.read_text().splitlines()
    v_lines = pv.read_text().splitlines()
    assert u_lines[1].split()[1:3] == ["7", "5"]
    assert v_lines[1].split()[1:3] == ["6", "6"]
    assert len(u_lines) == 2 + 7 and len(v_lines) == 2 + 6


def test_scalar_vtk_structure(tmp_path):
    spec = GridSpec(nx=4, ny=4)
    vals = np.arange(16.0).reshape(4, 4)
    path = tmp_path / "f.vtk"
    write_scalar_vtk(ScalarField(spec, vals), path, name="density")
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# vtk DataFile")
    assert "STRUCTURED_POINTS" in lines[3]
    assert lines[4] == "DIMENSIONS 4 4 1"
    assert lines[7] == "POINT_DATA 16"
    assert lines[8] == "SCALARS density double 1"
    # x varies fastest: first data row is values[:, 0]
    assert [float(v) for v in lines[10].split()] == [0.0, 4.0, 8.0, 12.0]


def test_vector_vtk_structure(tmp_path):
    spec = GridSpec(nx=4, ny=4)
    vec = VectorField.from_functions(spec, lambda x, y: x, lambda x, y: y)
    path = tmp_path / "v.vtk"
    write_vector_vtk(vec, path)
    lines = path.read_text().splitlines()
    assert "VECTORS velocity double" in lines
    data = [ln for ln in lines[lines.index("VECTORS velocity double") + 1:]
            if ln.strip()]
    assert len(data) == 16
    # every tuple carries a zero z component
    assert all(ln.split()[2] == "0" for ln in data)
