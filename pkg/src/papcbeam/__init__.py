"""MMSE precoder/combiner design under per-antenna power constraints.

Single- and multicarrier beamforming weight optimization for systems where
each transmit element has its own power budget, plus a seeded Monte-Carlo
harness comparing the joint design against simpler strategies.
"""

__version__ = "0.1.0"

from .backend import BACKEND
from .channel import ALL_METHODS, ScenarioConfig, generate_channel, generate_scenario, trial_stream
from .constraints import (
    PowerConstraints,
    feasibility_margins,
    multicarrier_margins,
    p_norm,
    p_projection,
)
from .experiment import (
    CdfSeries,
    MethodResult,
    ResultSet,
    TrialResult,
    carrier_snr,
    empirical_cdf,
    monte_carlo,
    run_trial,
)
from .linalg import HermitianEigenResult, dominant_eigenpair, real_embedding, whitened_gram
from .multicarrier import (
    DualState,
    MultiCarrierLink,
    MultiCarrierSolution,
    cyclic_multicarrier,
    dual_gradient,
    dual_value,
    lagrangian_minimizers,
    mmse_combiners,
    naive_scaled_precoders,
    per_carrier_mse,
    percarrier_cyclic_precoders,
    precoder_objective,
    projected_eigenvector_precoders,
    solve_papc_precoders,
    total_power_precoders,
    violation_stats,
    whitened_eigenpairs,
)
from .single_carrier import (
    BeamformerPair,
    LinkInstance,
    PrecoderSolution,
    gain,
    gauss_seidel_maxgain,
    gauss_seidel_mmse,
    kkt_residuals,
    miso_solution,
    mmse_combiner,
    mrc_combiner,
    mse,
    papc_maxgain_precoder,
    papc_mmse_precoder,
    resultant_mse,
    shadow_prices,
    unconstrained_precoder,
)

__all__ = [
    "__version__",
    "BACKEND",
    "ALL_METHODS",
    "ScenarioConfig",
    "generate_channel",
    "generate_scenario",
    "trial_stream",
    "PowerConstraints",
    "p_projection",
    "p_norm",
    "feasibility_margins",
    "multicarrier_margins",
    "HermitianEigenResult",
    "dominant_eigenpair",
    "whitened_gram",
    "real_embedding",
    "LinkInstance",
    "BeamformerPair",
    "PrecoderSolution",
    "mse",
    "mmse_combiner",
    "resultant_mse",
    "unconstrained_precoder",
    "papc_mmse_precoder",
    "kkt_residuals",
    "shadow_prices",
    "miso_solution",
    "gauss_seidel_mmse",
    "gain",
    "mrc_combiner",
    "papc_maxgain_precoder",
    "gauss_seidel_maxgain",
    "MultiCarrierLink",
    "DualState",
    "MultiCarrierSolution",
    "dual_value",
    "lagrangian_minimizers",
    "dual_gradient",
    "solve_papc_precoders",
    "precoder_objective",
    "cyclic_multicarrier",
    "mmse_combiners",
    "per_carrier_mse",
    "whitened_eigenpairs",
    "projected_eigenvector_precoders",
    "percarrier_cyclic_precoders",
    "total_power_precoders",
    "naive_scaled_precoders",
    "violation_stats",
    "MethodResult",
    "TrialResult",
    "CdfSeries",
    "ResultSet",
    "carrier_snr",
    "empirical_cdf",
    "run_trial",
    "monte_carlo",
]
