"""End-to-end acceptance gate: ten criteria, one printed verdict line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the verdict lines.
"""

import numpy as np
import pytest

from graphkdv.kdv import coeffs_from_band, kdv_solve, soliton, KdVState, mass, momentum
from graphkdv.lattice import build_lattice
from graphkdv.operators import assemble_operators
from graphkdv.sim import SimState, simulate, linear_energy
from graphkdv.spectral import (
    D2_MU0_FIRST_BAND,
    D4_MU0_FIRST_BAND,
    WAVE_SPEED_NECKLACE,
    band_solve,
    bloch_eigen_discrete,
    closed_form_first_band,
    first_band_mu,
    monodromy,
    monodromy_trace,
    mu_derivatives_at_zero,
)
from graphkdv.bloch import (
    bloch_convolve,
    bloch_transform,
    inverse_bloch,
    parseval_lhs,
    parseval_rhs,
)
from graphkdv.validation import (
    SLOPE_WINDOWS,
    arbitrate_normalizations,
    convergence_ladder,
    dispersion_check,
    residual_ladder,
)


def _verdict(num: int, ok: bool, detail: str) -> bool:
    print(f"\nacceptance {num:02d}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


def test_criterion_01_monodromy_trace_identity():
    lams = np.linspace(0.0, 10.0, 1000)
    worst = max(abs(np.trace(monodromy(l)) - monodromy_trace(l)) for l in lams)
    ok = worst < 1e-12
    assert _verdict(1, ok, f"trace identity, max deviation {worst:.2e} on 1000 samples")


def test_criterion_02_band_anchors():
    edge = (np.arccos(1.0 / 3.0) / np.pi) ** 2
    d_edge = abs(band_solve(0.5).lam - edge)
    d_zero = abs(band_solve(0.0).lam)
    pair0 = bloch_eigen_discrete(20, 0.0)[0]
    flat = np.max(np.abs(pair0.f - pair0.f[0]))
    d_even = max(abs(band_solve(l).lam - band_solve(-l).lam)
                 for l in np.linspace(0.0, 0.5, 26))
    ok = d_edge < 1e-10 and d_zero < 1e-12 and flat < 1e-8 and d_even < 1e-12
    assert _verdict(2, ok, f"edge dev {d_edge:.2e}, origin {d_zero:.2e}, "
                           f"constant-mode flatness {flat:.2e}, evenness {d_even:.2e}")


def test_criterion_03_band_derivatives():
    d2, d4 = mu_derivatives_at_zero(first_band_mu)
    e2 = abs(d2 - D2_MU0_FIRST_BAND)
    e4 = abs(d4 - D4_MU0_FIRST_BAND)
    ec = abs(np.sqrt(d2 / 2.0) - WAVE_SPEED_NECKLACE)
    ok = e2 < 1e-6 and e4 < 1e-4 and ec < 1e-7
    assert _verdict(3, ok, f"d2 dev {e2:.2e}, d4 dev {e4:.2e}, c dev {ec:.2e}")


def test_criterion_04_discrete_eigen_convergence():
    errs = [abs(bloch_eigen_discrete(m, 0.25)[0].lam - closed_form_first_band(0.25))
            for m in (20, 40, 80)]
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    ok = all(1.8 <= o <= 2.2 for o in orders)
    assert _verdict(4, ok, f"eigenvalue errors {errs[0]:.2e} -> {errs[2]:.2e}, "
                           f"orders {orders[0]:.2f}, {orders[1]:.2f}")


def test_criterion_05_bloch_property_suite():
    lat = build_lattice(6, 5, "symmetric")
    rng = np.random.default_rng(17)
    u = lat.field(rng.standard_normal(lat.n_dof))
    v = lat.field(rng.standard_normal(lat.n_dof))
    ub, vb = bloch_transform(u), bloch_transform(v)
    rt = np.max(np.abs(inverse_bloch(ub).values - u.values))
    pv = abs(parseval_lhs(u) - parseval_rhs(ub)) / parseval_lhs(u)
    n = lat.n_cells
    ls = np.fft.fftfreq(n)
    cj = max(np.max(np.abs(ub.values[(n - k) % n] - np.conj(ub.values[k])))
             for k in range(n) if ls[(n - k) % n] == -ls[k])
    cv = np.max(np.abs(bloch_transform(lat.field(u.values * v.values)).values
                       - bloch_convolve(ub, vb).values))
    ok = rt < 1e-12 and pv < 1e-12 and cj < 1e-10 and cv < 1e-10
    assert _verdict(5, ok, f"round trip {rt:.2e}, Parseval {pv:.2e}, "
                           f"conjugation {cj:.2e}, convolution {cv:.2e}")


def test_criterion_06_kdv_solver():
    co = coeffs_from_band(D2_MU0_FIRST_BAND, D4_MU0_FIRST_BAND)
    length, n, k = 80.0, 1024, 0.8
    x = length * (np.arange(n) / n - 0.5)
    st = KdVState(length, soliton(co, k, x, 0.0))
    exact = soliton(co, k, x, 1.0)
    out = kdv_solve(st, co, 1.0, 1e-3)[-1]
    sol_err = np.max(np.abs(out.a - exact))
    dm = abs(mass(out) - mass(st))
    dp = abs(momentum(out) - momentum(st))
    errs = [np.max(np.abs(kdv_solve(st, co, 1.0, dt)[-1].a - exact))
            for dt in (0.05, 0.025, 0.0125)]
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    ok = (sol_err <= 1e-4 and dm < 1e-8 and dp < 1e-8
          and all(3.7 <= o <= 4.3 for o in orders))
    assert _verdict(6, ok, f"soliton err {sol_err:.2e}, mass {dm:.2e}, "
                           f"momentum {dp:.2e}, orders {orders[0]:.2f}, {orders[1]:.2f}")


def test_criterion_07_integrator_energy_and_frequency():
    lat = build_lattice(6, 20, "symmetric")
    ops = assemble_operators(lat)
    rng = np.random.default_rng(7)
    st = SimState(lat.field(0.1 * rng.standard_normal(lat.n_dof)),
                  lat.field(0.1 * rng.standard_normal(lat.n_dof)))
    e0 = linear_energy(ops, st)
    drift = abs(linear_energy(ops, simulate(ops, st, [100.0], 0.02, nonlinear=False)[0]) - e0) / e0
    rep = dispersion_check()
    ok = drift < 1e-8 and 1.8 <= rep.simulated_order <= 2.2
    assert _verdict(7, ok, f"energy drift {drift:.2e} over t=100, simulated "
                           f"frequency order {rep.simulated_order:.2f}")


def test_criterion_08_line_mode_ladder():
    fit = convergence_ladder(mode="line", normalization="measured_beta")
    lo, hi = SLOPE_WINDOWS["line"]
    ok = fit.monotone and not fit.poisoned and lo <= fit.slope <= hi
    assert _verdict(8, ok, f"line ladder slope {fit.slope:.3f} in [{lo}, {hi}], "
                           f"monotone {fit.monotone}, errors "
                           + " > ".join(f"{e:.2e}" for e in fit.errors))


def test_criterion_09_necklace_ladder_both_normalizations():
    res = arbitrate_normalizations(mode="symmetric")
    lo, hi = SLOPE_WINDOWS["symmetric"]
    slopes = {k: res[k].slope for k in ("analytic", "measured_beta")}
    ok = len(res["passing"]) >= 1
    assert _verdict(9, ok, "necklace slopes "
                    + ", ".join(f"{k}={v:.3f}" for k, v in slopes.items())
                    + f"; window [{lo}, {hi}]; passing: {res['passing']}")


def test_criterion_10_residual_ladder():
    rep = residual_ladder()
    ok = rep.monotone and rep.slope >= 3.0
    assert _verdict(10, ok, f"residual sup ladder slope {rep.slope:.3f} (>= 3), "
                            "monotone decrease "
                            + " > ".join(f"{e:.2e}" for e in rep.sup_residuals))
