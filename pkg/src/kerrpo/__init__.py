"""kerrpo: coherent-state dynamics of a pumped parametric oscillator in a Kerr medium.

The propagator of the number-averaged interaction Hamiltonian factorises
into squeeze-algebra exponentials whose coefficients obey a small nonlinear
ODE system; from those coefficients the package evaluates photon-number
distributions and the autocorrelation overlap, and validates everything
against a converged Fock-basis integration of the exact interaction-picture
Hamiltonian.
"""

from . import errors
from .backends import HAS_COMPILED, available_backends, default_backend_name, get_backend
from .oracle import (
    ConvergenceReport,
    OperatorSet,
    PropagationResult,
    apply_u0,
    build_operators,
    coherent_state,
    converge_truncation,
    exact_hi_matrix,
    oracle_autocorrelation,
    propagate_exact,
    run_convergence,
)
from .params import CoeffVector, ModelParams, coupling_g, interaction_coeffs, kerr_average, pump_frequency
from .state_analysis import (
    Distribution,
    FockVector,
    TimeSeries,
    abs2_series,
    autocorrelation,
    autocorrelation_chi0,
    autocorrelation_series,
    detect_revivals,
    evolved_coefficients,
    number_distribution,
    probability_k,
    reference_coherent_autocorr,
    revival_time,
)
from .wei_norman import WNState, WNTrajectory, integrate_wn, wn_rhs, wn_unitary_matrix

__version__ = "0.1.0"

__all__ = [
    "errors",
    "ModelParams",
    "CoeffVector",
    "pump_frequency",
    "coupling_g",
    "kerr_average",
    "interaction_coeffs",
    "WNState",
    "WNTrajectory",
    "wn_rhs",
    "integrate_wn",
    "wn_unitary_matrix",
    "FockVector",
    "Distribution",
    "TimeSeries",
    "evolved_coefficients",
    "probability_k",
    "number_distribution",
    "autocorrelation",
    "autocorrelation_series",
    "autocorrelation_chi0",
    "reference_coherent_autocorr",
    "revival_time",
    "detect_revivals",
    "abs2_series",
    "OperatorSet",
    "PropagationResult",
    "ConvergenceReport",
    "build_operators",
    "exact_hi_matrix",
    "coherent_state",
    "propagate_exact",
    "apply_u0",
    "converge_truncation",
    "run_convergence",
    "oracle_autocorrelation",
    "HAS_COMPILED",
    "available_backends",
    "default_backend_name",
    "get_backend",
    "__version__",
]
