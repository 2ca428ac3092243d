"""Band structure of the necklace graph.

Two independent routes to the dispersion relation are provided:

* an analytic route via the 2x2 transfer matrix over one cell (monodromy),
  whose trace condition  tr(M)(lambda) = 2 cos(2 pi l)  is solved by bracketed
  bisection, with a closed form for the first band;
* a discrete route via the generalized Hermitian eigenproblem of a single
  quasi-periodically closed cell, which also yields the cell eigenfunctions
  needed for the nonlinear coupling coefficient.

Eigenvalues ``lambda`` of -d^2/dx^2 map to eigenvalues ``mu`` of the
regularized wave operator by mu = lambda / (1 + lambda), and the temporal
frequency of a mode is omega = sqrt(mu).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.optimize import brentq

from .lattice import EDGE_LENGTH, _cell_layout

# Series constants of the first band around l = 0 (independent oracle route):
# lambda(l) = (8/9) l^2 - (8 pi^2 / 243) l^4 + O(l^6) and mu = lambda - lambda^2 + ...
D2_MU0_FIRST_BAND = 16.0 / 9.0
D4_MU0_FIRST_BAND = -24.0 * (8.0 * np.pi**2 + 192.0) / 243.0
WAVE_SPEED_NECKLACE = np.sqrt(D2_MU0_FIRST_BAND / 2.0)      # = 2*sqrt(2)/3

#: value of the constant first-band eigenfunction at l = 0 (unit L^2 norm on
#: a cell of total metric length 3*pi)
MODE_AMPLITUDE = 1.0 / np.sqrt(3.0 * np.pi)

#: half-width of the first band in s = sqrt(lambda)
_BAND_HALF_WIDTH = np.arccos(1.0 / 3.0) / np.pi


class SpectralError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# transfer matrix / monodromy


def transfer_matrix(lam: float, length: float) -> np.ndarray:
    """Value/derivative transfer of -f'' = lam f over an edge of given length.

    The lam -> 0 limit [[1, L], [0, 1]] is taken analytically via sinc.
    """
    s = np.sqrt(max(lam, 0.0))
    c = np.cos(s * length)
    sinc = length * np.sinc(s * length / np.pi)      # sin(sL)/s, safe at s = 0
    return np.array([[c, sinc], [-lam * sinc, c]])


def monodromy(lam: float) -> np.ndarray:
    """Transfer over one full cell in the symmetric subspace.

    Link transfer, flux-halving into the identified semicircle pair, circle
    transfer, flux-doubling back onto the link.
    """
    T = transfer_matrix(lam, EDGE_LENGTH)
    into_circle = np.diag([1.0, 0.5])
    out_of_circle = np.diag([1.0, 2.0])
    return out_of_circle @ T @ into_circle @ T


def monodromy_trace(lam: float) -> float:
    """Closed form of the monodromy trace: 2 cos^2(pi s) - (5/2) sin^2(pi s)."""
    s = np.sqrt(max(lam, 0.0))
    return 2.0 * np.cos(np.pi * s) ** 2 - 2.5 * np.sin(np.pi * s) ** 2


# ---------------------------------------------------------------------------
# band curves


@dataclass(frozen=True)
class BandPoint:
    l: float
    band: int
    lam: float
    mu: float
    omega: float


@dataclass
class BandCurve:
    l: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    omega: np.ndarray
    band: int
    d2_mu0: float | None = None
    d4_mu0: float | None = None


def _band_bracket(band: int) -> tuple[float, float]:
    """Bracket of band ``band`` in s = sqrt(lambda).

    Odd bands rise from an integer s, even bands fall onto one:
    band 2k+1 -> [k, k + theta], band 2k -> [k - theta, k].
    """
    if band < 1:
        raise ValueError("band index starts at 1")
    k = band // 2
    if band % 2 == 1:
        return float(k), float(k) + _BAND_HALF_WIDTH
    return float(k) - _BAND_HALF_WIDTH, float(k)


def closed_form_first_band(l: float) -> float:
    """First-band eigenvalue of -d^2/dx^2: the trace condition reduces to
    sin^2(pi sqrt(lambda)) = (8/9) sin^2(pi l)."""
    arg = (2.0 * np.sqrt(2.0) / 3.0) * np.abs(np.sin(np.pi * l))
    return (np.arcsin(arg) / np.pi) ** 2


def band_solve(l: float, band: int = 1) -> BandPoint:
    """Solve tr(M)(lambda) = 2 cos(2 pi l) inside the band's bracket."""
    if not -0.5 - 1e-12 <= l <= 0.5 + 1e-12:
        raise ValueError("Bloch wavenumber must lie in [-1/2, 1/2]")
    target = 2.0 * np.cos(2.0 * np.pi * l)
    s_lo, s_hi = _band_bracket(band)

    def g(s):
        return monodromy_trace(s * s) - target

    g_lo, g_hi = g(s_lo), g(s_hi)
    if abs(g_lo) < 1e-13:
        s = s_lo
    elif abs(g_hi) < 1e-13:
        s = s_hi
    elif g_lo * g_hi > 0.0:
        raise SpectralError(
            f"no band-{band} root for l={l}: requested trace {target} not "
            f"attained on s in [{s_lo}, {s_hi}] (spectral gap)"
        )
    else:
        s = brentq(g, s_lo, s_hi, xtol=1e-15, rtol=8.9e-16)

    lam = s * s
    if band == 1:
        lam_cf = closed_form_first_band(l)
        if abs(lam - lam_cf) > 1e-10:
            raise SpectralError(
                f"band-1 bisection ({lam}) and closed form ({lam_cf}) disagree"
            )
    mu = lam / (1.0 + lam)
    return BandPoint(l=float(l), band=band, lam=lam, mu=mu, omega=np.sqrt(mu))


def band_curve(n_samples: int = 101, band: int = 1) -> BandCurve:
    ls = np.linspace(-0.5, 0.5, n_samples)
    pts = [band_solve(l, band) for l in ls]
    curve = BandCurve(
        l=ls,
        lam=np.array([p.lam for p in pts]),
        mu=np.array([p.mu for p in pts]),
        omega=np.array([p.omega for p in pts]),
        band=band,
    )
    if band == 1:
        d2, d4 = mu_derivatives_at_zero(first_band_mu)
        curve.d2_mu0 = d2
        curve.d4_mu0 = d4
    return curve


def first_band_mu(l: float) -> float:
    lam = closed_form_first_band(l)
    return lam / (1.0 + lam)


def line_mu(k: float) -> float:
    """Dispersion of the homogeneous line: mu(k) = k^2 / (1 + k^2)."""
    return k * k / (1.0 + k * k)


# ---------------------------------------------------------------------------
# derivatives at l = 0


def _richardson(table: list[float]) -> tuple[float, float]:
    """Neville table for step-halving sequences with error series in h^2.

    Returns the last two extrapolation levels (for the cancellation check).
    """
    r = [list(table)]
    n = len(table)
    for j in range(1, n):
        prev = r[-1]
        fac = 4.0**j
        r.append([(fac * prev[i + 1] - prev[i]) / (fac - 1.0) for i in range(n - 1 - (j - 1))])
    return r[-1][0], r[-2][-1]


def mu_derivatives_at_zero(mu, steps=(0.04, 0.02, 0.01)) -> tuple[float, float]:
    """Second and fourth derivative of an even band function at l = 0.

    Central differences exploiting evenness (odd derivatives vanish), with
    two levels of Richardson extrapolation over a step-halving ladder.
    """
    steps = tuple(steps)
    if len(steps) < 3:
        raise ValueError("need at least three steps for two Richardson levels")
    for a, b in zip(steps, steps[1:]):
        if not np.isclose(a / b, 2.0):
            raise ValueError("steps must halve")

    mu0 = mu(0.0)
    d2_tab = [2.0 * (mu(h) - mu0) / h**2 for h in steps]
    d4_tab = [(2.0 * mu(2.0 * h) - 8.0 * mu(h) + 6.0 * mu0) / h**4 for h in steps]

    d2, d2_prev = _richardson(d2_tab)
    d4, d4_prev = _richardson(d4_tab)
    for val, prev, name in ((d2, d2_prev, "d2"), (d4, d4_prev, "d4")):
        if abs(val - prev) > 1e-5 * max(1.0, abs(val)):
            raise SpectralError(
                f"{name} Richardson levels disagree by {abs(val - prev):.3e}; "
                "step ladder is cancellation-limited"
            )
    return d2, d4


# ---------------------------------------------------------------------------
# discrete one-cell eigenproblem


@dataclass
class BlochCell:
    """Quasi-periodically closed single cell at Bloch wavenumber l."""

    m: int
    mode: str
    l: float
    x: np.ndarray               # cell-local coordinates
    weights: np.ndarray         # lumped quadrature weights (full-graph measure)
    stiffness: np.ndarray       # dense Hermitian K_l

    @property
    def n_dof(self) -> int:
        return self.x.size


def bloch_cell(m: int, l: float, mode: str = "symmetric") -> BlochCell:
    per_cell, x_cell, segs = _cell_layout(m, mode)
    h = EDGE_LENGTH / m
    phase = np.exp(2j * np.pi * l)
    K = np.zeros((per_cell, per_cell), dtype=complex)
    w = np.zeros(per_cell)
    for i, j, ew in segs:
        g = ew / h
        p = phase if j == per_cell else 1.0
        j = j % per_cell
        K[i, i] += g
        K[j, j] += g
        K[i, j] -= g * p
        K[j, i] -= g * np.conj(p)
        w[i] += ew * h / 2.0
        w[j % per_cell] += ew * h / 2.0
    return BlochCell(m=m, mode=mode, l=l, x=x_cell, weights=w, stiffness=K)


@dataclass
class BlochEigenpair:
    l: float
    band: int
    lam: float
    mu: float
    f: np.ndarray               # periodic eigenfunction, unit weighted norm
    cell: BlochCell

    @property
    def omega(self) -> float:
        return float(np.sqrt(self.mu))

    @property
    def quasiperiodic(self) -> np.ndarray:
        """The Bloch wave restricted to the cell: e^{i l x} f(x)."""
        return np.exp(1j * self.l * self.cell.x) * self.f


def bloch_eigen_discrete(m: int, l: float, n_bands: int = 1, mode: str = "symmetric") -> list[BlochEigenpair]:
    """Lowest bands of the quasi-periodic cell problem, normalized and
    phase-fixed so that the projection onto the constant direction is real
    and positive."""
    cell = bloch_cell(m, l, mode)
    lam_all, vec_all = sla.eigh(cell.stiffness, np.diag(cell.weights))
    pairs = []
    for b in range(n_bands):
        lam = float(max(lam_all[b], 0.0))
        W = vec_all[:, b]
        f = np.exp(-1j * l * cell.x) * W
        f = f / np.sqrt(np.sum(cell.weights * np.abs(f) ** 2))
        proj = np.sum(cell.weights * np.conj(f))       # <f, 1> conjugated
        if abs(proj) > 1e-8:
            f = f * (proj / abs(proj))
        else:                                          # higher bands: fix by largest entry
            k = int(np.argmax(np.abs(f)))
            f = f * (np.conj(f[k]) / abs(f[k]))
        pairs.append(
            BlochEigenpair(l=float(l), band=b + 1, lam=lam, mu=lam / (1.0 + lam), f=f, cell=cell)
        )
    return pairs


def apply_shifted_b2(cell: BlochCell, g: np.ndarray) -> np.ndarray:
    """Apply the shifted regularized operator to a periodic cell function.

    Realized by conjugation with e^{i l x}: lift to the quasi-periodic
    representative, apply I - (M + K_l)^{-1} M, and shift back.
    """
    E = np.exp(1j * cell.l * cell.x)
    h = E * g
    u = np.linalg.solve(np.diag(cell.weights) + cell.stiffness, cell.weights * h)
    return np.conj(E) * (h - u)


def beta(l: float, l_minus_lp: float, lp: float, m: int = 80) -> complex:
    """Nonlinear coupling of three first-band modes.

    <f(l), B_l^2 (f(l - l') f(l'))> with discrete cell eigenfunctions in the
    symmetric subspace.  All wavenumbers must lie in the first-band validity
    window.
    """
    if abs((l_minus_lp + lp) - l) > 1e-12:
        raise ValueError("wavenumbers must satisfy l = (l - l') + l'")
    for w in (l, l_minus_lp, lp):
        if abs(w) > 0.5:
            raise ValueError(f"wavenumber {w} outside the first-band window [-1/2, 1/2]")
    fa = bloch_eigen_discrete(m, l)[0]
    fb = bloch_eigen_discrete(m, l_minus_lp)[0]
    fc = bloch_eigen_discrete(m, lp)[0]
    prod = fb.f * fc.f
    y = apply_shifted_b2(fa.cell, prod)
    return complex(np.sum(fa.cell.weights * np.conj(fa.f) * y))


def beta_quadratic_limit(m: int = 80, ls=(0.1, 0.05, 0.025)) -> float:
    """Measured limit of beta(l, l/2, l/2) / l^2 as l -> 0 (Richardson in l)."""
    vals = [np.real(beta(l, l / 2.0, l / 2.0, m=m)) / l**2 for l in ls]
    limit, _ = _richardson(vals)
    return float(limit)
