"""maxacc: does the optimal filter become exact as observation noise vanishes?

Decides, for finite-state Markov and linear-Gaussian filtering models,
whether the stationary filtering error converges to zero with the noise
strength (maximal accuracy), and validates each algebraic verdict with a
noise sweep: Monte-Carlo filter simulation for finite models, Riccati traces
for linear-Gaussian ones.
"""

__version__ = "0.1.0"

from .errors import MaxaccError
from .finite_analysis import (
    brute_force_reconstructibility,
    check_invertibility,
    check_reconstructibility,
    finite_verdict,
)
from .lingauss import (
    LinearGaussianModel,
    RiccatiSolution,
    detectability_gain,
    kappa_sweep_lg,
    ks_check,
    lyapunov_solve,
    reduce_unstable,
    riccati_stationary,
    transfer_eval,
    transmission_zeros,
    validate_model,
)
from .modelfile import (
    ParsedModelFile,
    SimSpec,
    model_file_json,
    model_hash,
    parse_model_dict,
    parse_model_file,
    serialize_model,
    validate_report,
)
from .markov import (
    FiniteStateModel,
    TrajectoryBundle,
    reduce_support,
    simulate_bundle,
    simulate_observations,
    simulate_path,
    stationary_distribution,
    time_reverse,
)
from .verdicts import (
    SweepResult,
    TestFunction,
    Verdict,
    ZeroReport,
    default_battery,
    identity_embedding,
    indicator,
)
from .wonham import (
    SimParams,
    estimate_stationary_error,
    kappa_sweep_finite,
    run_filter,
)

__all__ = [
    "__version__",
    "MaxaccError",
    "FiniteStateModel",
    "TrajectoryBundle",
    "stationary_distribution",
    "reduce_support",
    "time_reverse",
    "simulate_path",
    "simulate_observations",
    "simulate_bundle",
    "check_invertibility",
    "check_reconstructibility",
    "brute_force_reconstructibility",
    "finite_verdict",
    "run_filter",
    "estimate_stationary_error",
    "kappa_sweep_finite",
    "SimParams",
    "ParsedModelFile",
    "SimSpec",
    "parse_model_file",
    "parse_model_dict",
    "serialize_model",
    "model_file_json",
    "model_hash",
    "validate_report",
    "LinearGaussianModel",
    "RiccatiSolution",
    "validate_model",
    "lyapunov_solve",
    "transfer_eval",
    "transmission_zeros",
    "ks_check",
    "detectability_gain",
    "reduce_unstable",
    "riccati_stationary",
    "kappa_sweep_lg",
    "Verdict",
    "ZeroReport",
    "SweepResult",
    "TestFunction",
    "indicator",
    "identity_embedding",
    "default_battery",
]
