"""Waves on the periodic necklace quantum graph.

Band structure via monodromy/Bloch analysis, a regularized Boussinesq-type
lattice wave simulator, an effective KdV solver for the long-wave envelope,
and a validation harness measuring how well the envelope approximates the
full dynamics.
"""

__version__ = "0.1.0"

from .lattice import CELL_LENGTH, EDGE_LENGTH, MODES, GraphField, NecklaceLattice, build_lattice
from .operators import (
    DiscreteOperators,
    SolverError,
    apply_a2,
    apply_b2,
    assemble_operators,
    helmholtz_solve,
    inner_product,
    l2_norm,
    sup_norm,
)
from .spectral import (
    D2_MU0_FIRST_BAND,
    D4_MU0_FIRST_BAND,
    MODE_AMPLITUDE,
    WAVE_SPEED_NECKLACE,
    BandCurve,
    BandPoint,
    SpectralError,
    band_curve,
    band_solve,
    beta,
    beta_quadratic_limit,
    bloch_eigen_discrete,
    closed_form_first_band,
    monodromy,
    monodromy_trace,
    mu_derivatives_at_zero,
)
from .bloch import BlochField, bloch_convolve, bloch_transform, bloch_transform_at, inverse_bloch
from .kdv import KdVCoeffs, KdVState, coeffs_from_band, kdv_solve, kdv_step, soliton
from .sim import (
    SimConfig,
    SimState,
    first_band_basis,
    init_from_kdv_ansatz,
    linear_energy,
    read_snapshot,
    rk4_step,
    simulate,
    write_snapshot,
)
from .validation import (
    ConvergenceFit,
    DispersionReport,
    ErrorReport,
    ResidualReport,
    ValidationError,
    convergence_ladder,
    dispersion_check,
    make_coeffs,
    residual_ladder,
    residual_norm,
    run_comparison,
    sech2_profile,
)

__all__ = [name for name in dir() if not name.startswith("_")]
