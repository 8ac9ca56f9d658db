"""compdec: Bayes-optimal multiple binary decisions under compound losses.

The pieces compose bottom-up:

- `losses`: loss-pair definitions and empirical proportions.
- `solvers`: the rank-threshold search minimizing posterior expected loss.
- `posteriors`: exact posterior summaries for the built-in models.
- `copula`: Gamma-frailty (Clayton) dependence for alternative blocks.
- `smc`: particle estimates of the posterior summaries when exact
  enumeration is out of reach.
- `bh`: the step-up p-value baseline.
- `simulate`: seeded risk studies comparing the rules.
- `cli`: the `compdec` command (decide / simulate / bench).
"""

from .bh import bh_decide, p_values
from .copula import GammaFrailty, block_log_density, copula_value, sample_dependent_block
from .errors import (
    CompdecError,
    ConfigurationError,
    DegenerateLikelihoodError,
    DimensionError,
    DomainError,
    NumericError,
    ParseError,
    RefusalError,
)
from .losses import LossPairKind, LossSpec, loss, proportion
from .posteriors import (
    ExponentialPair,
    GaussianSpike,
    ModelSpec,
    TwoGroupGaussian,
    eb_hyperparameters,
    exact_posterior_table,
    posterior_mean_simple,
    psi_exact_independent,
)
from .simulate import (
    ExperimentConfig,
    RiskReport,
    composite_gaussian_config,
    dependent_exponential_config,
    run_experiment,
    two_group_config,
)
from .smc import SmcConfig, SmcEstimate, run_smc
from .solvers import (
    PosteriorSummary,
    SolverResult,
    brute_force_oracle,
    rejection_ranks,
    solve,
    solve_fdp_fnp,
    solve_fdp_mdp,
    solve_fp_fn,
    solve_generic,
)

__version__ = "0.1.0"

__all__ = [
    "CompdecError",
    "ConfigurationError",
    "DegenerateLikelihoodError",
    "DimensionError",
    "DomainError",
    "ExperimentConfig",
    "ExponentialPair",
    "GammaFrailty",
    "GaussianSpike",
    "LossPairKind",
    "LossSpec",
    "ModelSpec",
    "NumericError",
    "ParseError",
    "PosteriorSummary",
    "RefusalError",
    "RiskReport",
    "SmcConfig",
    "SmcEstimate",
    "SolverResult",
    "TwoGroupGaussian",
    "bh_decide",
    "block_log_density",
    "brute_force_oracle",
    "composite_gaussian_config",
    "copula_value",
    "dependent_exponential_config",
    "eb_hyperparameters",
    "exact_posterior_table",
    "loss",
    "p_values",
    "posterior_mean_simple",
    "proportion",
    "psi_exact_independent",
    "rejection_ranks",
    "run_experiment",
    "run_smc",
    "sample_dependent_block",
    "solve",
    "solve_fdp_fnp",
    "solve_fdp_mdp",
    "solve_fp_fn",
    "solve_generic",
    "two_group_config",
]
