import numpy as np
import pytest

from graphkdv.lattice import (
    CELL_LENGTH,
    EDGE_LENGTH,
    GraphField,
    build_lattice,
    require_same_lattice,
)


@pytest.mark.parametrize("mode,per_cell_of_m", [
    ("full", lambda m: 3 * m - 1),
    ("symmetric", lambda m: 2 * m),
    ("line", lambda m: 2 * m),
])
def test_dof_counts(mode, per_cell_of_m):
    lat = build_lattice(3, 7, mode)
    assert lat.per_cell == per_cell_of_m(7)
    assert lat.n_dof == 3 * lat.per_cell
    assert lat.h == pytest.approx(EDGE_LENGTH / 7)


@pytest.mark.parametrize("mode,length_per_cell", [
    ("full", 3 * np.pi),
    ("symmetric", 3 * np.pi),
    ("line", 2 * np.pi),
])
def test_total_measure(mode, length_per_cell):
    # lumped quadrature weights must integrate the constant 1 to the total
    # metric length of the graph
    lat = build_lattice(5, 4, mode)
    assert lat.length == pytest.approx(5 * length_per_cell, rel=1e-13)


def test_weight_pattern_symmetric():
    lat = build_lattice(2, 3, "symmetric")
    h = lat.h
    w = lat.weights[: lat.per_cell]
    # vertices join three edge ends (one link + doubled circle), interior
    # link points two ends, folded circle interior carries double weight
    assert w[0] == pytest.approx(3 * h / 2)
    assert w[3] == pytest.approx(3 * h / 2)
    assert w[1] == pytest.approx(h)
    assert w[4] == pytest.approx(2 * h)


def test_coordinates_cover_cells():
    lat = build_lattice(4, 3, "line")
    x = lat.coordinates()
    assert x[0] == 0.0
    assert x[lat.per_cell] == pytest.approx(CELL_LENGTH)
    assert np.all(np.diff(x) > 0)


def test_segment_wrap_closes_periodically():
    lat = build_lattice(3, 2, "symmetric")
    # every DOF index must appear as a segment endpoint; the wrap couples the
    # last cell back to DOF 0
    touched = np.zeros(lat.n_dof, dtype=bool)
    touched[lat.seg_i] = True
    touched[lat.seg_j] = True
    assert touched.all()
    last_base = 2 * lat.per_cell
    assert any(i >= last_base and j == 0 for i, j in zip(lat.seg_i, lat.seg_j))


def test_build_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build_lattice(1, 4, "symmetric")
    with pytest.raises(ValueError):
        build_lattice(4, 1, "symmetric")
    with pytest.raises(ValueError):
        build_lattice(4, 4, "ring")


def test_field_shape_validation_and_by_cell():
    lat = build_lattice(2, 3, "line")
    with pytest.raises(ValueError):
        GraphField(lat, np.zeros(lat.n_dof + 1))
    u = lat.field(np.arange(lat.n_dof, dtype=float))
    grid = u.by_cell()
    assert grid.shape == (2, lat.per_cell)
    assert grid[1, 0] == lat.per_cell


def test_require_same_lattice():
    a = build_lattice(2, 3, "line")
    b = build_lattice(2, 3, "symmetric")
    with pytest.raises(ValueError):
        require_same_lattice(a.zero_field(), b.zero_field())
    assert require_same_lattice(a.zero_field(), a.zero_field()) is a
