import numpy as np
import pytest

from graphkdv.bloch import (
    BlochField,
    bloch_convolve,
    bloch_transform,
    bloch_transform_at,
    inverse_bloch,
    parseval_lhs,
    parseval_rhs,
)
from graphkdv.lattice import build_lattice
from graphkdv.operators import apply_a2, assemble_operators
from graphkdv.spectral import bloch_cell


@pytest.fixture(scope="module", params=["symmetric", "line", "full"])
def lattice(request):
    return build_lattice(6, 4, request.param)


def _random_field(lat, seed=0):
    rng = np.random.default_rng(seed)
    return lat.field(rng.standard_normal(lat.n_dof))


def test_round_trip(lattice):
    u = _random_field(lattice, 1)
    back = inverse_bloch(bloch_transform(u))
    assert np.max(np.abs(back.values - u.values)) < 1e-12


def test_parseval(lattice):
    u = _random_field(lattice, 2)
    lhs = parseval_lhs(u)
    rhs = parseval_rhs(bloch_transform(u))
    assert rhs == pytest.approx(lhs, rel=1e-12)


def test_conjugation_symmetry(lattice):
    # real fields satisfy u~(-l, x) = conj(u~(l, x)); on the DFT grid the
    # index of -l_k is (n - k) mod n.  For even n the Nyquist row stores
    # l = -1/2 and is its own partner only after the zone wrap e^{ix}.
    u = _random_field(lattice, 3)
    ub = bloch_transform(u).values
    n = lattice.n_cells
    ls = np.fft.fftfreq(n)
    for k in range(n):
        j = (n - k) % n
        if ls[j] == -ls[k]:
            assert np.max(np.abs(ub[j] - np.conj(ub[k]))) < 1e-10
        else:  # Nyquist: conj(u~(-1/2)) = u~(1/2) = u~(-1/2) e^{-ix}
            twist = ub[k] * np.exp(-1j * lattice.x_cell)
            assert np.max(np.abs(twist - np.conj(ub[k]))) < 1e-10


def test_convolution_matches_pointwise_product(lattice):
    u = _random_field(lattice, 4)
    v = _random_field(lattice, 5)
    w = lattice.field(u.values * v.values)
    direct = bloch_transform(w).values
    conv = bloch_convolve(bloch_transform(u), bloch_transform(v)).values
    assert np.max(np.abs(direct - conv)) < 1e-10


def test_derivative_rule():
    # the transform diagonalizes the cell-periodic operator: the transform of
    # M^{-1} K u at wavenumber l equals the quasi-periodic one-cell operator
    # applied to the fiber
    lat = build_lattice(6, 4, "symmetric")
    ops = assemble_operators(lat)
    u = _random_field(lat, 6)
    ub = bloch_transform(u).values
    out = bloch_transform(apply_a2(ops, u)).values
    for k, l in enumerate(np.fft.fftfreq(lat.n_cells)):
        cell = bloch_cell(lat.m, l, "symmetric")
        lift = np.exp(1j * l * lat.x_cell) * ub[k]
        expect = np.exp(-1j * l * lat.x_cell) * (cell.stiffness @ lift) / cell.weights
        assert np.max(np.abs(out[k] - expect)) < 1e-9


def test_direct_evaluation_and_zone_wrap(lattice):
    u = _random_field(lattice, 7)
    ub = bloch_transform(u).values
    ls = np.fft.fftfreq(lattice.n_cells)
    d = bloch_transform_at(u, ls[2])
    assert np.max(np.abs(d - ub[2])) < 1e-10
    # continuation across the Brillouin-zone edge picks up e^{-ix}
    shifted = bloch_transform_at(u, ls[2] + 1.0)
    assert np.max(np.abs(shifted - d * np.exp(-1j * lattice.x_cell))) < 1e-10


def test_convolve_rejects_mismatched_grids():
    a = bloch_transform(_random_field(build_lattice(6, 4, "line"), 8))
    b = bloch_transform(_random_field(build_lattice(4, 4, "line"), 9))
    with pytest.raises(ValueError):
        bloch_convolve(a, b)


def test_inverse_keeps_complex_fields_complex():
    lat = build_lattice(4, 3, "line")
    vals = np.zeros((4, lat.per_cell), dtype=complex)
    vals[1] = 1.0 + 0.5j
    back = inverse_bloch(BlochField(lat, vals))
    assert np.iscomplexobj(back.values)
