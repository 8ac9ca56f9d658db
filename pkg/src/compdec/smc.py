"""Sequential Monte Carlo estimation of posterior expectations.

Sequential importance sampling over the components m = 1..M with an
ESS-triggered bootstrap resampling step.  Particles are binary prefixes
theta_{1:m}; each component draws theta_m from a data-adaptive trial mass

    g_m(theta_m | x_m)  proportional to  pi_m(theta_m) * qt_{m,theta_m}(x_m),

where qt is the exact marginal likelihood in the simple setting and a
plug-in approximation in the composite setting (nuisance parameters are then
drawn from their priors given theta_m).  Weight increments carry the exact
trial normalizing constants, not just proportional ones, so the final weight
of a particle equals pi(theta) q_theta(x) / g(theta | x) exactly when no
resampling happens; the telescoping test pins that identity.

Dependence enters through the Gamma-frailty copula over the components with
theta_m = 1: each such particle extends its own CopulaState and the increment
uses the conditional (coupled) density of the new component given the block
so far, divided by the trial marginal.

ESS is Kong's effective sample size (sum w)^2 / sum(w^2), computed in log
space; when it drops below rho*R the particles are resampled with
replacement (multinomial by default, systematic behind a config switch) and
weights reset to 1/R.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .copula import GammaFrailty, CopulaState, step_arrays, block_log_density_step
from .errors import ConfigurationError, NumericError
from .posteriors import (
    ExponentialPair,
    GaussianSpike,
    TwoGroupGaussian,
    _as_prior,
)

_LOG_2PI = float(np.log(2.0 * np.pi))
_CDF_EPS = 1e-300


@dataclass(frozen=True)
class SmcConfig:
    r: int = 1000
    rho: float = 0.5
    seed: int = 0
    resampling: str = "multinomial"
    keep_particles: bool = False

    def __post_init__(self):
        if self.r < 2:
            raise ConfigurationError("need at least two particles")
        if not 0.0 < self.rho <= 1.0:
            raise ConfigurationError("rho must lie in (0, 1]")
        if self.resampling not in ("multinomial", "systematic"):
            raise ConfigurationError("resampling must be multinomial or systematic")


@dataclass
class ParticleSystem:
    thetas: np.ndarray
    log_weights: np.ndarray
    copula_k: np.ndarray
    copula_ell: np.ndarray
    m: int


@dataclass
class SmcEstimate:
    phi_hat: np.ndarray | None
    psi_hat: np.ndarray | None
    psi_adj_hat: np.ndarray | None
    ess_trace: np.ndarray
    resample_count: int
    saturation_count: int = 0
    particles: ParticleSystem | None = field(default=None, repr=False)


class SimpleSmcModel:
    """Exact-marginal trial and increments; handles the frailty-coupled case
    through the model's sufficient-statistic terms."""

    def __init__(self, prior, model, data, frailty: GammaFrailty | None = None):
        self.frailty = frailty
        if frailty is None:
            lq0, lq1 = model.log_marginal_vec(data)
            self.log_cdf1 = None
            self.saturation_count = 0
        else:
            if not hasattr(model, "dependence_terms"):
                raise ConfigurationError(
                    f"{type(model).__name__} does not define a frailty-coupled statistic"
                )
            lq0, cdf1, lq1 = model.dependence_terms(data)
            clipped = np.clip(cdf1, _CDF_EPS, 1.0 - 1e-16)
            self.saturation_count = int(np.sum(clipped != cdf1))
            self.log_cdf1 = np.log(clipped)
        self.lq0 = np.atleast_1d(lq0)
        self.lq1 = np.atleast_1d(lq1)
        self.m = self.lq0.size
        pi = _as_prior(prior, self.m)
        l0 = np.log1p(-pi) + self.lq0
        l1 = np.log(pi) + self.lq1
        self.log_norm = np.logaddexp(l0, l1)
        if not np.isfinite(self.log_norm).all():
            bad = int(np.flatnonzero(~np.isfinite(self.log_norm))[0])
            raise NumericError(f"degenerate trial mass at component {bad}")
        self.p1 = np.exp(l1 - self.log_norm)

    def increment(self, j, theta, k, ell, rng):
        dlogw = np.full(theta.size, self.log_norm[j])
        if self.frailty is not None and theta.any():
            sel = theta
            k1, ell1, dl = step_arrays(
                self.frailty.kappa, k[sel], ell[sel], self.log_cdf1[j], self.lq1[j]
            )
            k = k.copy()
            ell = ell.copy()
            k[sel] = k1
            ell[sel] = ell1
            dlogw[sel] += dl - self.lq1[j]
        return dlogw, k, ell


class GaussianSpikeSmcModel:
    """Composite setting for the Gaussian spike: the alternative mean is the
    nuisance, drawn from its N(0, sigma2) prior; the trial plugs in the MLE
    mean, so the plug-in alternative density is the constant phi(0)."""

    def __init__(self, prior, model: GaussianSpike, data, frailty: GammaFrailty | None = None):
        self.model = model
        self.frailty = frailty
        self.x = np.asarray(data, dtype=np.float64)
        self.m = self.x.size
        self.saturation_count = 0
        self.lq0 = -0.5 * (self.x**2 + _LOG_2PI)
        self.lq1_plugin = np.full(self.m, -0.5 * _LOG_2PI)
        pi = _as_prior(prior, self.m)
        l0 = np.log1p(-pi) + self.lq0
        l1 = np.log(pi) + self.lq1_plugin
        self.log_norm = np.logaddexp(l0, l1)
        self.p1 = np.exp(l1 - self.log_norm)

    def increment(self, j, theta, k, ell, rng):
        dlogw = np.full(theta.size, self.log_norm[j])
        n_alt = int(theta.sum())
        if n_alt:
            gamma = self.model.sample_nuisance(n_alt, rng)
            loglik = self.model.log_likelihood(self.x[j], gamma)
            if self.frailty is None:
                dlogw[theta] += loglik - self.lq1_plugin[j]
            else:
                from scipy.stats import norm

                log_cdf = np.clip(
                    norm.logcdf(self.x[j] - gamma), np.log(_CDF_EPS), np.log1p(-1e-16)
                )
                k1, ell1, dl = step_arrays(
                    self.frailty.kappa, k[theta], ell[theta], log_cdf, loglik
                )
                k = k.copy()
                ell = ell.copy()
                k[theta] = k1
                ell[theta] = ell1
                dlogw[theta] += dl - self.lq1_plugin[j]
        return dlogw, k, ell


class TwoGroupSmcModel:
    """Composite setting for the conjugate two-group model (independent data
    only): nuisances are the shared precision and the group mean(s), drawn
    from the conjugate prior; the trial plugs in the per-hypothesis MLEs."""

    def __init__(self, prior, model: TwoGroupGaussian, data, frailty=None):
        if frailty is not None:
            raise ConfigurationError("the two-group composite model has no coupled statistic")
        self.frailty = None
        self.model = model
        x = np.atleast_2d(np.asarray(data, dtype=np.float64))
        if x.shape[1] != model.n1 + model.n2:
            raise ConfigurationError("data width does not match the group sizes")
        self.x = x
        self.m = x.shape[0]
        self.saturation_count = 0
        n1, n2 = model.n1, model.n2
        n = n1 + n2
        self.g1 = x[:, :n1]
        self.g2 = x[:, n1:]
        self.m1 = self.g1.mean(axis=1)
        self.m2 = self.g2.mean(axis=1)
        ss1 = ((self.g1 - self.m1[:, None]) ** 2).sum(axis=1)
        ss2 = ((self.g2 - self.m2[:, None]) ** 2).sum(axis=1)
        xbar = x.mean(axis=1)
        ss0 = ((x - xbar[:, None]) ** 2).sum(axis=1)
        if np.any(ss0 <= 0) or np.any(ss1 + ss2 <= 0):
            raise NumericError("constant rows make the MLE plug-in degenerate")
        # Gaussian likelihood at the MLE: (2 pi sigma^2)^(-n/2) exp(-n/2)
        self.lq0_plugin = -0.5 * n * (np.log(ss0 / n) + _LOG_2PI + 1.0)
        self.lq1_plugin = -0.5 * n * (np.log((ss1 + ss2) / n) + _LOG_2PI + 1.0)
        self.nu = np.broadcast_to(np.asarray(model.nu, dtype=np.float64), (self.m,))
        self.beta = np.broadcast_to(np.asarray(model.beta, dtype=np.float64), (self.m,))
        pi = _as_prior(prior, self.m)
        l0 = np.log1p(-pi) + self.lq0_plugin
        l1 = np.log(pi) + self.lq1_plugin
        self.log_norm = np.logaddexp(l0, l1)
        self.p1 = np.exp(l1 - self.log_norm)

    def _log_likelihood(self, j, mu1, mu2, lam):
        d1 = ((self.g1[j] - mu1[:, None]) ** 2).sum(axis=1)
        d2 = ((self.g2[j] - mu2[:, None]) ** 2).sum(axis=1)
        n = self.model.n1 + self.model.n2
        return 0.5 * n * (np.log(lam) - _LOG_2PI) - 0.5 * lam * (d1 + d2)

    def increment(self, j, theta, k, ell, rng):
        dlogw = np.full(theta.size, self.log_norm[j])
        model = self.model
        for is_alt, plugin in ((False, self.lq0_plugin), (True, self.lq1_plugin)):
            sel = theta if is_alt else ~theta
            count = int(sel.sum())
            if count == 0:
                continue
            lam = rng.gamma(model.alpha, 1.0 / self.beta[j], count)
            sd_mean = np.sqrt(model.k0 / lam)
            mu1 = rng.normal(self.nu[j], sd_mean)
            mu2 = rng.normal(self.nu[j], sd_mean) if is_alt else mu1
            dlogw[sel] += self._log_likelihood(j, mu1, mu2, lam) - plugin[j]
        return dlogw, k, ell


def _build_adapter(prior, model, data, frailty, mode: str):
    if mode == "simple":
        return SimpleSmcModel(prior, model, data, frailty)
    if mode == "composite":
        if isinstance(model, GaussianSpike):
            return GaussianSpikeSmcModel(prior, model, data, frailty)
        if isinstance(model, TwoGroupGaussian):
            return TwoGroupSmcModel(prior, model, data, frailty)
        raise ConfigurationError(
            f"no composite sampler for {type(model).__name__}; use mode='simple'"
        )
    raise ConfigurationError("mode must be 'simple' or 'composite'")


def _log_ess(lw):
    mx = lw.max()
    if not np.isfinite(mx):
        return None, None
    w = np.exp(lw - mx)
    sw = w.sum()
    return float(sw * sw / (w @ w)), w / sw


def run_smc(config: SmcConfig, prior, model, data, frailty: GammaFrailty | None = None,
            estimands=("phi", "psi"), mode: str = "simple") -> SmcEstimate:
    """Algorithm-1 style particle run; returns self-normalized estimates of the
    requested posterior expectations (phi, psi, psi_adj)."""
    unknown = set(estimands) - {"phi", "psi", "psi_adj"}
    if unknown:
        raise ConfigurationError(f"unknown estimands: {sorted(unknown)}")
    adapter = _build_adapter(prior, model, data, frailty, mode)
    m = adapter.m
    r = config.r
    rng = np.random.Generator(np.random.Philox(config.seed))
    thetas = np.zeros((r, m), dtype=np.int8)
    lw = np.zeros(r)
    cop_k = np.zeros(r, dtype=np.int64)
    cop_ell = np.zeros(r)
    ess_trace = np.empty(m)
    resample_count = 0
    for j in range(m):
        th = rng.random(r) < adapter.p1[j]
        thetas[:, j] = th
        dlogw, cop_k, cop_ell = adapter.increment(j, th, cop_k, cop_ell, rng)
        lw = lw + dlogw
        ess, weights = _log_ess(lw)
        if ess is None:
            raise NumericError(f"all importance weights vanished at component {j + 1}")
        ess_trace[j] = ess
        if ess < config.rho * r:
            if config.resampling == "multinomial":
                idx = rng.choice(r, size=r, replace=True, p=weights)
            else:
                positions = (np.arange(r) + rng.random()) / r
                idx = np.searchsorted(np.cumsum(weights), positions)
            thetas = thetas[idx]
            cop_k = cop_k[idx]
            cop_ell = cop_ell[idx]
            lw = np.full(r, -np.log(r))
            resample_count += 1
    _, weights = _log_ess(lw)
    s = thetas.sum(axis=1).astype(np.float64)
    thetaf = thetas.astype(np.float64)
    phi_hat = weights @ thetaf if "phi" in estimands else None
    psi_hat = (
        weights @ (thetaf / np.maximum(s, 1.0)[:, None]) if "psi" in estimands else None
    )
    psi_adj_hat = (
        weights @ (thetaf / (s + 1.0)[:, None]) if "psi_adj" in estimands else None
    )
    particles = None
    if config.keep_particles:
        particles = ParticleSystem(
            thetas=thetas, log_weights=lw, copula_k=cop_k, copula_ell=cop_ell, m=m
        )
    return SmcEstimate(
        phi_hat=phi_hat,
        psi_hat=psi_hat,
        psi_adj_hat=psi_adj_hat,
        ess_trace=ess_trace,
        resample_count=resample_count,
        saturation_count=adapter.saturation_count,
        particles=particles,
    )


def trial_probability(pi_m: float, model, x_m) -> float:
    """Mass the simple trial distribution puts on theta_m = 1 (Eq.-12 style)."""
    lq0 = model.log_marginal(x_m, 0)
    lq1 = model.log_marginal(x_m, 1)
    if np.isneginf(lq0) and np.isneginf(lq1):
        raise NumericError("both densities vanish; trial mass undefined")
    return float(expit(np.log(pi_m) - np.log1p(-pi_m) + lq1 - lq0))


def trial_sample_simple(pi_m: float, model, x_m, rng):
    """Draw theta_m from the simple trial; returns (draw, log trial mass)."""
    p1 = trial_probability(pi_m, model, x_m)
    theta = int(rng.random() < p1)
    log_mass = float(np.log(p1 if theta else 1.0 - p1))
    return theta, log_mass


def increment_simple(pi_m: float, model, frailty: GammaFrailty | None,
                     state: CopulaState, x_m, theta_m: int):
    """Single-particle exact weight increment (Eq.-13 style, with the trial
    normalizer included); returns (log increment, new CopulaState)."""
    adapter = SimpleSmcModel(np.atleast_1d(pi_m), model, _wrap_row(model, x_m), frailty)
    log_norm = float(adapter.log_norm[0])
    if not theta_m or frailty is None:
        return log_norm, state
    new_state = block_log_density_step(
        frailty, state, log_cdf=float(adapter.log_cdf1[0]), log_pdf=float(adapter.lq1[0])
    )
    delta = new_state.log_density - state.log_density
    return log_norm + delta - float(adapter.lq1[0]), new_state


def increment_composite(pi_m: float, model, frailty: GammaFrailty | None,
                        state: CopulaState, x_m, theta_m: int, rng):
    """Single-particle composite increment (Eq.-14 style): draws the nuisance
    from its prior given theta_m and divides by the plug-in trial density."""
    adapter = _build_adapter(np.atleast_1d(pi_m), model, _wrap_row(model, x_m), frailty, "composite")
    th = np.array([bool(theta_m)])
    k = np.array([state.k], dtype=np.int64)
    ell = np.array([state.ell])
    dlogw, k1, ell1 = adapter.increment(0, th, k, ell, rng)
    new_state = state
    if theta_m and frailty is not None:
        ell_new = float(ell1[0])
        new_state = CopulaState(
            k=int(k1[0]), s=float(frailty.kappa * np.expm1(ell_new)), ell=ell_new,
            log_density=state.log_density, saturated=state.saturated,
        )
    return float(dlogw[0]), new_state


def _wrap_row(model, x_m):
    if isinstance(model, (TwoGroupGaussian, ExponentialPair)):
        return np.atleast_2d(np.asarray(x_m, dtype=np.float64))
    return np.atleast_1d(np.asarray(x_m, dtype=np.float64))
