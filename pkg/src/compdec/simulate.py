"""Simulation harness: generative scenarios, decision procedures, empirical
risk metrics, and aggregated risk-curve reports.

Three scenarios are built in:

- ``CompositeGaussian``: one observation per component, null N(0,1) against a
  Gaussian-mean alternative (composite); solved with exact posterior
  summaries and, for the rejection-ratio/missed-discovery pair, optionally a
  composite particle backend.
- ``DependentExponential``: n exponential replicates per component, known null
  and alternative rates, with a Gamma-frailty copula coupling the alternative
  block; always solved through the particle backend (the exact table is only
  feasible for m <= 12).
- ``TwoGroupGaussian``: control/treatment Gaussian groups with a conjugate
  normal-gamma nuisance prior; exact posterior summaries, optionally with
  empirical-Bayes plug-ins for the location and scale hyperparameters.

The analyst's model (``prior_params``) may differ from the generator
(``true_params``) to study prior misspecification.  Each replicate draws a
truth vector and data, computes posterior summaries once per backend, then
sweeps the Bayes rules over cost ratios and the step-up baseline over FDR
levels.  Replicates are independent, seeded from a single SeedSequence, and
may run in a process pool; the reduction is order-independent.
"""

from __future__ import annotations

import contextlib
import csv
import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bh import bh_decide, p_values
from .copula import sample_dependent_block
from .errors import ConfigurationError, NumericError
from .losses import LossPairKind, LossSpec, proportion
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
from .smc import SmcConfig, run_smc
from .solvers import PosteriorSummary, solve

SCENARIOS = ("CompositeGaussian", "DependentExponential", "TwoGroupGaussian")


def _text_sink(path):
    """Open `path` for CSV writing, or pass an existing stream through."""
    if hasattr(path, "write"):
        return contextlib.nullcontext(path)
    return open(path, "w", newline="")

_SCENARIO_MODEL = {
    "CompositeGaussian": GaussianSpike,
    "DependentExponential": ExponentialPair,
    "TwoGroupGaussian": TwoGroupGaussian,
}

_SCENARIO_PAIRS = {
    "CompositeGaussian": (LossPairKind.FP_FN, LossPairKind.FDP_FNP, LossPairKind.FDP_MDP),
    "DependentExponential": (LossPairKind.FP_FN, LossPairKind.FDP_FNP, LossPairKind.FDP_MDP),
    "TwoGroupGaussian": (LossPairKind.FP_FN, LossPairKind.FDP_FNP, LossPairKind.FDP_AMDP),
}

_DEFAULT_BACKENDS = {
    "CompositeGaussian": ("exact", "smc"),
    "DependentExponential": ("smc",),
    "TwoGroupGaussian": ("exact",),
}

METRIC_NAMES = ("fp", "fn", "fdp", "fnp", "mdp", "amdp")


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    true_params: ModelSpec
    prior_params: ModelSpec
    cost_ratios: tuple = (1.0,)
    bh_levels: tuple = ()
    n_sims: int = 20
    m: int = 12
    seed: int = 0
    backends: tuple | None = None
    smc_particles: int = 1000
    smc_rho: float = 0.5
    empirical_bayes: bool = False
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "cost_ratios", tuple(float(c) for c in self.cost_ratios))
        object.__setattr__(self, "bh_levels", tuple(float(q) for q in self.bh_levels))
        if self.scenario not in SCENARIOS:
            raise ConfigurationError(
                f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}"
            )
        want = _SCENARIO_MODEL[self.scenario]
        for side, spec in (("true_params", self.true_params), ("prior_params", self.prior_params)):
            if not isinstance(spec.model, want):
                raise ConfigurationError(
                    f"{side} for {self.scenario} must wrap a {want.__name__}"
                )
        if self.n_sims < 1:
            raise ConfigurationError("n_sims must be at least 1")
        if self.m < 1:
            raise ConfigurationError("m must be at least 1")
        if not self.cost_ratios and not self.bh_levels:
            raise ConfigurationError("nothing to sweep: no cost ratios and no levels")
        if any(c <= 0 for c in self.cost_ratios):
            raise ConfigurationError("cost ratios must be positive")
        backends = self.backends
        if backends is None:
            backends = _DEFAULT_BACKENDS[self.scenario]
        backends = tuple(backends)
        for b in backends:
            if b not in ("exact", "smc"):
                raise ConfigurationError(f"unknown backend {b!r}")
        if not backends:
            raise ConfigurationError("at least one backend is required")
        object.__setattr__(self, "backends", backends)
        if self.scenario == "DependentExponential" and "exact" in backends and self.m > 12:
            raise ConfigurationError(
                "the exact backend enumerates 2^m states and needs m <= 12 "
                "for the dependent scenario"
            )
        if self.empirical_bayes and self.scenario != "TwoGroupGaussian":
            raise ConfigurationError("empirical-Bayes plug-ins apply to the two-group scenario only")
        if self.threads < 1:
            raise ConfigurationError("threads must be at least 1")

    def tasks(self):
        """(label, loss pair, backend) triples: pairs that need only phi run
        on the first backend; pairs that need a ratio estimand run once per
        backend, with the label suffixed when that makes several rows."""
        pairs = _SCENARIO_PAIRS[self.scenario]
        out = []
        for kind in pairs:
            if kind in (LossPairKind.FP_FN, LossPairKind.FDP_FNP):
                run_on = self.backends[:1]
            else:
                run_on = self.backends
            for backend in run_on:
                label = kind.name if len(run_on) == 1 else f"{kind.name}_{backend}"
                out.append((label, kind, backend))
        return out


@dataclass(frozen=True)
class MetricRecord:
    fp: float
    fn: float
    fdp: float
    fnp: float
    mdp: float
    amdp: float
    accept_null: int
    accept_alt: int
    reject_null: int
    reject_alt: int


def empirical_metrics(a, theta) -> MetricRecord:
    """All six proportions plus the accept/reject by null/alternative counts."""
    a = np.asarray(a)
    theta = np.asarray(theta)
    if a.shape != theta.shape:
        raise ConfigurationError("action and truth lengths differ")
    reject = a.astype(bool)
    alt = theta.astype(bool)
    return MetricRecord(
        fp=proportion("FP", a, theta),
        fn=proportion("FN", a, theta),
        fdp=proportion("FDP", a, theta),
        fnp=proportion("FNP", a, theta),
        mdp=proportion("MDP", a, theta),
        amdp=proportion("AMDP", a, theta),
        accept_null=int((~reject & ~alt).sum()),
        accept_alt=int((~reject & alt).sum()),
        reject_null=int((reject & ~alt).sum()),
        reject_alt=int((reject & alt).sum()),
    )


@dataclass(frozen=True)
class RiskRow:
    procedure: str
    sweep: str
    value: float
    metric: str
    mean: float
    se: float

    def __post_init__(self):
        if not (-1e-12 <= self.mean <= 1.0 + 1e-12):
            raise NumericError(f"mean {self.metric} out of [0, 1]: {self.mean}")
        if self.se < 0:
            raise NumericError("negative standard error")


@dataclass(frozen=True)
class ReplicateRow:
    procedure: str
    sweep: str
    value: float
    replicate: int
    record: MetricRecord


@dataclass
class RiskReport:
    config: ExperimentConfig
    rows: list[RiskRow]
    replicates: list[ReplicateRow]

    def mean(self, procedure: str, metric: str, value: float | None = None) -> float:
        hits = [
            r for r in self.rows
            if r.procedure == procedure and r.metric == metric
            and (value is None or np.isclose(r.value, value))
        ]
        if not hits:
            raise KeyError(f"no row for {procedure}/{metric}/{value}")
        if len(hits) > 1:
            raise KeyError(f"ambiguous row for {procedure}/{metric}; pass value=")
        return hits[0].mean

    def procedures(self):
        seen = {}
        for r in self.rows:
            seen.setdefault(r.procedure, None)
        return list(seen)

    def curve(self, procedure: str, x_metric: str, y_metric: str):
        """(x, y) arrays ordered by sweep value, for risk-pair plots."""
        values = sorted({r.value for r in self.rows if r.procedure == procedure})
        x = np.array([self.mean(procedure, x_metric, v) for v in values])
        y = np.array([self.mean(procedure, y_metric, v) for v in values])
        return x, y

    def write_risk_csv(self, path):
        """path may be a filesystem path or an open text stream."""
        with _text_sink(path) as fh:
            writer = csv.writer(fh)
            writer.writerow(["procedure", "sweep", "value", "metric", "mean", "se"])
            for r in self.rows:
                writer.writerow(
                    [r.procedure, r.sweep, f"{r.value:.10g}", r.metric,
                     f"{r.mean:.10g}", f"{r.se:.10g}"]
                )

    def write_replicates_csv(self, path):
        """path may be a filesystem path or an open text stream."""
        with _text_sink(path) as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["procedure", "sweep", "value", "replicate",
                 "accept_null", "accept_alt", "reject_null", "reject_alt"]
                + list(METRIC_NAMES)
            )
            for row in self.replicates:
                rec = row.record
                writer.writerow(
                    [row.procedure, row.sweep, f"{row.value:.10g}", row.replicate,
                     rec.accept_null, rec.accept_alt, rec.reject_null, rec.reject_alt]
                    + [f"{getattr(rec, name):.10g}" for name in METRIC_NAMES]
                )


def generate(scenario: str, true_params: ModelSpec, m: int, rng):
    """Draw (truth vector, data matrix) under the scenario's generator."""
    if scenario not in SCENARIOS:
        raise ConfigurationError(f"unknown scenario {scenario!r}")
    model = true_params.model
    pi = true_params.prior(m)
    theta = rng.random(m) < pi
    if scenario == "DependentExponential":
        data = model.sample_null(m, rng)
        n_alt = int(theta.sum())
        if n_alt:
            frailty = true_params.frailty()
            if frailty is None:
                data[theta] = model.sample_alt_iid(n_alt, rng)
            else:
                t_alt = sample_dependent_block(frailty, model.stat_ppf, n_alt, rng)
                data[theta] = model.replicates_given_stat(t_alt, rng)
    else:
        data = model.sample(theta.astype(int), rng)
    return theta.astype(np.int8), data


def _analyst_params(config: ExperimentConfig, data) -> ModelSpec:
    params = config.prior_params
    if config.empirical_bayes:
        nu_hat, beta_hat = eb_hyperparameters(data, params.model.k0, params.model.alpha)
        model = dataclasses.replace(params.model, nu=nu_hat, beta=beta_hat)
        params = dataclasses.replace(params, model=model)
    return params


def _needed_estimands(config: ExperimentConfig, backend: str):
    names = ["phi"]
    for _, kind, b in config.tasks():
        if b != backend:
            continue
        if kind is LossPairKind.FDP_MDP:
            names.append("psi")
        if kind is LossPairKind.FDP_AMDP:
            names.append("psi_adj")
    return tuple(dict.fromkeys(names))


def _summaries_for(config: ExperimentConfig, analyst: ModelSpec, data, smc_seed: int):
    out = {}
    for backend in config.backends:
        estimands = _needed_estimands(config, backend)
        if not any(b == backend for _, _, b in config.tasks()):
            continue
        if backend == "exact":
            if config.scenario == "DependentExponential":
                table = exact_posterior_table(
                    analyst.pi, analyst.model, data, frailty=analyst.frailty()
                )
                phi = table.phi()
                psi = table.psi() if "psi" in estimands else None
                psi_adj = table.psi(adjusted=True) if "psi_adj" in estimands else None
            else:
                phi = posterior_mean_simple(analyst.pi, analyst.model, data)
                psi = psi_exact_independent(phi) if "psi" in estimands else None
                psi_adj = (
                    psi_exact_independent(phi, adjusted=True)
                    if "psi_adj" in estimands else None
                )
        else:
            mode = "simple" if config.scenario == "DependentExponential" else "composite"
            est = run_smc(
                SmcConfig(r=config.smc_particles, rho=config.smc_rho, seed=smc_seed),
                analyst.pi,
                analyst.model,
                data,
                frailty=analyst.frailty(),
                estimands=estimands,
                mode=mode,
            )
            phi, psi, psi_adj = est.phi_hat, est.psi_hat, est.psi_adj_hat
        out[backend] = PosteriorSummary(phi=phi, psi=psi, psi_adj=psi_adj)
    return out


def _run_replicate(config: ExperimentConfig, index: int, seedseq) -> list:
    data_seq, smc_seq = seedseq.spawn(2)
    rng = np.random.default_rng(data_seq)
    smc_seed = int(smc_seq.generate_state(1, dtype=np.uint64)[0])
    theta, data = generate(config.scenario, config.true_params, config.m, rng)
    analyst = _analyst_params(config, data)
    summaries = _summaries_for(config, analyst, data, smc_seed)
    records = []
    for label, kind, backend in config.tasks():
        summary = summaries[backend]
        for ratio in config.cost_ratios:
            spec = LossSpec(kind=kind, c0=ratio, c1=1.0, m=config.m)
            action = solve(spec, summary).action
            records.append((label, "cost_ratio", ratio, index, empirical_metrics(action, theta)))
    if config.bh_levels:
        pvals = p_values(analyst.model, data)
        for level in config.bh_levels:
            action = bh_decide(pvals, level)
            records.append(("BH", "level", level, index, empirical_metrics(action, theta)))
    return records


def _replicate_star(args):
    return _run_replicate(*args)


def run_experiment(config: ExperimentConfig) -> RiskReport:
    """Run all replicates, aggregate means and Monte-Carlo standard errors per
    (procedure, sweep value, metric), and keep the per-replicate records."""
    seeds = np.random.SeedSequence(config.seed).spawn(config.n_sims)
    jobs = [(config, i, seeds[i]) for i in range(config.n_sims)]
    if config.threads > 1 and config.n_sims > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            per_rep = list(pool.map(_replicate_star, jobs))
    else:
        per_rep = [_replicate_star(job) for job in jobs]

    grouped: dict[tuple, list] = {}
    order: list[tuple] = []
    replicates = []
    for rep_records in per_rep:
        for label, sweep, value, index, record in rep_records:
            key = (label, sweep, value)
            if key not in grouped:
                grouped[key] = []
                order.append(key)
            grouped[key].append(record)
            replicates.append(ReplicateRow(label, sweep, value, index, record))

    rows = []
    for key in order:
        label, sweep, value = key
        records = grouped[key]
        for metric in METRIC_NAMES:
            vals = np.array([getattr(r, metric) for r in records])
            se = 0.0 if vals.size < 2 else float(vals.std(ddof=1) / np.sqrt(vals.size))
            rows.append(RiskRow(label, sweep, value, metric, float(vals.mean()), se))
    return RiskReport(config=config, rows=rows, replicates=replicates)


def composite_gaussian_config(
    misspecified: bool = False,
    n_sims: int = 1000,
    seed: int = 0,
    cost_ratios=(1.0, 2.0),
    bh_levels=(0.05,),
    smc_particles: int = 1000,
    backends=None,
    threads: int = 1,
) -> ExperimentConfig:
    """Single-observation composite Gaussian study (m = 12, pi = 0.5,
    alternative-mean variance 16); the misspecified analyst uses pi* = 0.7 and
    variance 100."""
    true_params = ModelSpec(model=GaussianSpike(sigma2=16.0), pi=0.5)
    prior_params = (
        ModelSpec(model=GaussianSpike(sigma2=100.0), pi=0.7) if misspecified else true_params
    )
    return ExperimentConfig(
        scenario="CompositeGaussian",
        true_params=true_params,
        prior_params=prior_params,
        cost_ratios=cost_ratios,
        bh_levels=bh_levels,
        n_sims=n_sims,
        m=12,
        seed=seed,
        backends=backends,
        smc_particles=smc_particles,
        threads=threads,
    )


def dependent_exponential_config(
    misspecified: bool = True,
    n_sims: int = 20,
    m: int = 500,
    seed: int = 0,
    cost_ratios=(1.0,),
    smc_particles: int = 1000,
    threads: int = 1,
) -> ExperimentConfig:
    """Dependent exponential study (m = 500, n = 30, pi = 0.3, rates 1 vs 0.5,
    frailty kappa = 2); the misspecified analyst uses pi* = 0.2, kappa* = 3."""
    model = ExponentialPair(lambda0=1.0, lambda1=0.5, n=30)
    true_params = ModelSpec(model=model, pi=0.3, kappa=2.0)
    prior_params = (
        ModelSpec(model=model, pi=0.2, kappa=3.0) if misspecified else true_params
    )
    return ExperimentConfig(
        scenario="DependentExponential",
        true_params=true_params,
        prior_params=prior_params,
        cost_ratios=cost_ratios,
        bh_levels=(),
        n_sims=n_sims,
        m=m,
        seed=seed,
        smc_particles=smc_particles,
        threads=threads,
    )


_TWO_GROUP_RATIOS = (0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0)
_TWO_GROUP_LEVELS = (0.01, 0.02, 0.04, 0.06, 0.08, 0.10, 0.15, 0.20, 0.30, 0.40)


def two_group_config(
    empirical_bayes: bool = False,
    n_sims: int = 20,
    m: int = 500,
    seed: int = 0,
    cost_ratios=_TWO_GROUP_RATIOS,
    bh_levels=_TWO_GROUP_LEVELS,
    threads: int = 1,
) -> ExperimentConfig:
    """Two-group conjugate Gaussian study (m = 500, pi = 0.1, k0 = 200,
    alpha = beta = 4, nu = 20, five replicates per group).  With
    empirical_bayes=True the analyst misspecifies pi* = 0.05, k0* = 100,
    alpha* = 20 and plugs in per-component estimates of nu and beta."""
    true_model = TwoGroupGaussian(k0=200.0, alpha=4.0, beta=4.0, nu=20.0, n1=5, n2=5)
    true_params = ModelSpec(model=true_model, pi=0.1)
    if empirical_bayes:
        analyst_model = TwoGroupGaussian(k0=100.0, alpha=20.0, beta=4.0, nu=20.0, n1=5, n2=5)
        prior_params = ModelSpec(model=analyst_model, pi=0.05)
    else:
        prior_params = true_params
    return ExperimentConfig(
        scenario="TwoGroupGaussian",
        true_params=true_params,
        prior_params=prior_params,
        cost_ratios=cost_ratios,
        bh_levels=bh_levels,
        n_sims=n_sims,
        m=m,
        seed=seed,
        empirical_bayes=empirical_bayes,
        threads=threads,
    )
