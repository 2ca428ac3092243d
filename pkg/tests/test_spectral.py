import numpy as np
import pytest

from graphkdv.spectral import (
    D2_MU0_FIRST_BAND,
    D4_MU0_FIRST_BAND,
    MODE_AMPLITUDE,
    WAVE_SPEED_NECKLACE,
    SpectralError,
    band_curve,
    band_solve,
    beta,
    beta_quadratic_limit,
    bloch_eigen_discrete,
    closed_form_first_band,
    first_band_mu,
    monodromy,
    monodromy_trace,
    mu_derivatives_at_zero,
    transfer_matrix,
)

BAND_EDGE = (np.arccos(1.0 / 3.0) / np.pi) ** 2


def test_transfer_matrix_wronskian():
    # det = 1 for all lam (the flow preserves the Wronskian), including the
    # lam -> 0 sinc limit
    for lam in (0.0, 1e-12, 0.3, 2.0, 9.7):
        T = transfer_matrix(lam, np.pi)
        assert np.linalg.det(T) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(transfer_matrix(0.0, np.pi), [[1.0, np.pi], [0.0, 1.0]])


def test_monodromy_trace_closed_form():
    lams = np.linspace(0.0, 10.0, 1000)
    for lam in lams:
        assert abs(np.trace(monodromy(lam)) - monodromy_trace(lam)) < 1e-12


def test_first_band_anchors():
    assert band_solve(0.5).lam == pytest.approx(BAND_EDGE, abs=1e-10)
    assert band_solve(0.0).lam == pytest.approx(0.0, abs=1e-12)
    for l in np.linspace(0.0, 0.5, 21):
        assert abs(band_solve(l).lam - band_solve(-l).lam) < 1e-12


def test_constant_eigenvector_at_zero():
    pair = bloch_eigen_discrete(12, 0.0)[0]
    assert pair.lam < 1e-10
    assert np.max(np.abs(pair.f - pair.f[0])) < 1e-8
    assert pair.f[0] == pytest.approx(MODE_AMPLITUDE, rel=1e-10)


def test_band_two_solves_trace_condition():
    for l in (0.1, 0.3, 0.5):
        p = band_solve(l, band=2)
        assert monodromy_trace(p.lam) == pytest.approx(2.0 * np.cos(2.0 * np.pi * l), abs=1e-10)
        assert p.lam > BAND_EDGE  # above the first band


def test_band_curve_fills_derivatives():
    curve = band_curve(11)
    assert curve.lam[5] == pytest.approx(0.0, abs=1e-12)
    assert np.all((curve.mu >= 0.0) & (curve.mu < 1.0))
    assert curve.d2_mu0 == pytest.approx(D2_MU0_FIRST_BAND, abs=1e-6)


def test_mu_derivatives_against_series_constants():
    d2, d4 = mu_derivatives_at_zero(first_band_mu)
    assert d2 == pytest.approx(D2_MU0_FIRST_BAND, abs=1e-6)
    assert d4 == pytest.approx(D4_MU0_FIRST_BAND, abs=1e-4)
    assert np.sqrt(d2 / 2.0) == pytest.approx(WAVE_SPEED_NECKLACE, abs=1e-7)


def test_mu_derivatives_input_validation():
    with pytest.raises(ValueError):
        mu_derivatives_at_zero(first_band_mu, steps=(0.04, 0.02))
    with pytest.raises(ValueError):
        mu_derivatives_at_zero(first_band_mu, steps=(0.04, 0.03, 0.02))


def test_derivative_cancellation_detector():
    # a noisy band function must trip the Richardson disagreement check
    rng = np.random.default_rng(0)

    def noisy(l):
        return first_band_mu(l) + 1e-7 * rng.standard_normal()

    with pytest.raises(SpectralError):
        mu_derivatives_at_zero(noisy)


def test_discrete_eigen_second_order():
    errs = []
    for m in (20, 40, 80):
        lam = bloch_eigen_discrete(m, 0.25)[0].lam
        errs.append(abs(lam - closed_form_first_band(0.25)))
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(1.8 < o < 2.2 for o in orders)


def test_eigenfunction_normalization_and_phase():
    pair = bloch_eigen_discrete(16, 0.3)[0]
    w = pair.cell.weights
    assert np.sum(w * np.abs(pair.f) ** 2) == pytest.approx(1.0, rel=1e-12)
    proj = np.sum(w * np.conj(pair.f))
    assert proj.imag == pytest.approx(0.0, abs=1e-12)
    assert proj.real > 0.0


def test_beta_validation_and_conjugate_symmetry():
    with pytest.raises(ValueError):
        beta(0.2, 0.05, 0.05)
    with pytest.raises(ValueError):
        beta(0.6, 0.3, 0.3)
    b = beta(0.2, 0.1, 0.1, m=20)
    assert abs(b.imag) < 1e-10  # symmetric arguments give a real coupling


def test_beta_quadratic_limit_value():
    # small-l limit of beta(l, l/2, l/2)/l^2: the quadratic coefficient of
    # mu times the constant-mode amplitude
    expect = D2_MU0_FIRST_BAND / 2.0 * MODE_AMPLITUDE
    assert beta_quadratic_limit(m=60) == pytest.approx(expect, abs=2e-6)


def test_band_solve_rejects_out_of_zone():
    with pytest.raises(ValueError):
        band_solve(0.7)
    with pytest.raises(ValueError):
        band_solve(0.2, band=0)
