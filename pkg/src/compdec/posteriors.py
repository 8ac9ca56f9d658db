"""Posterior summaries for the independent-data models.

Each marginal model supplies the per-component marginal likelihoods
q_m0(x_m), q_m1(x_m) with all nuisance parameters integrated out against
their conjugate priors.  Under independent Bernoulli priors pi_m the
posterior of theta factorizes and the posterior means are

    phi_m = pi_m1 q_m1(x_m) / (pi_m0 q_m0(x_m) + pi_m1 q_m1(x_m)),

computed in log space.  The MDP/AMDP solvers additionally need the damped
expectations psi_m = E[theta_m/((theta'1) v 1) | x] and
psi_adj_m = E[theta_m/(theta'1 + 1) | x]; `psi_exact_independent` evaluates
them exactly from phi using the identity 1/(1+S) = integral_0^1 t^S dt, which
turns the Poisson-binomial expectation into a polynomial integral handled
exactly by Gauss-Legendre quadrature.

`exact_posterior_table` enumerates the full 2^M posterior (M <= 12), for
independent data or with a Gamma-frailty copula coupling the alternative
block; it is the oracle the SMC engine is tested against.

Implemented marginal models:

    SimpleDensityPair   user-supplied density callables (escape hatch)
    GaussianSpike       x | theta=0 ~ N(0,1); x | theta=1 ~ N(mu,1),
                        mu ~ N(0, sigma2), so marginally N(0, 1+sigma2)
    TwoGroupGaussian    two groups of sizes n1, n2 sharing precision
                        lambda ~ Gamma(alpha, beta); group means are
                        N(nu, k0/lambda) - one common mean under theta=0,
                        independent means under theta=1
    ExponentialPair     n iid Exp(lambda0) vs Exp(lambda1) replicates;
                        dependence couples the sufficient statistic
                        T = sum(x), which is Gamma(n, rate lambda) so the
                        theta-free simplex factor of the replicate vector
                        cancels from every posterior quantity
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import stats
from scipy.special import expit, gammaln, logsumexp

from .copula import GammaFrailty, step_arrays
from .errors import (
    ConfigurationError,
    DegenerateLikelihoodError,
    DimensionError,
    RefusalError,
)
from .solvers import PosteriorSummary

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class PriorSpec:
    """Independent Bernoulli prior weights; pi[m] = P(theta_m = 1)."""

    pi: np.ndarray

    def __post_init__(self):
        arr = np.atleast_1d(np.asarray(self.pi, dtype=np.float64))
        if arr.ndim != 1:
            raise DimensionError("pi must be a scalar or a one-dimensional vector")
        if (arr <= 0.0).any() or (arr >= 1.0).any():
            raise ConfigurationError("prior weights must lie strictly inside (0, 1)")
        object.__setattr__(self, "pi", arr)

    def broadcast(self, m: int) -> np.ndarray:
        if self.pi.size == m:
            return self.pi
        if self.pi.size == 1:
            return np.full(m, self.pi[0])
        raise DimensionError(f"prior length {self.pi.size} incompatible with M={m}")


def _as_prior(prior, m: int) -> np.ndarray:
    if isinstance(prior, PriorSpec):
        return prior.broadcast(m)
    return PriorSpec(pi=np.asarray(prior)).broadcast(m)


@dataclass(frozen=True)
class SimpleDensityPair:
    """Known null/alternative densities; callables must broadcast over arrays."""

    q0: object
    q1: object

    def log_marginal_vec(self, data):
        x = np.asarray(data, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return np.log(self.q0(x)), np.log(self.q1(x))

    def log_marginal(self, x, hypothesis: int) -> float:
        q = self.q1 if hypothesis else self.q0
        with np.errstate(divide="ignore"):
            return float(np.log(q(x)))


@dataclass(frozen=True)
class GaussianSpike:
    """One N(mu, 1) observation per component; mu = 0 under the null,
    mu ~ N(0, sigma2) under the alternative."""

    sigma2: float

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ConfigurationError("sigma2 must be positive")

    def _check(self, data) -> np.ndarray:
        x = np.asarray(data, dtype=np.float64)
        if x.ndim != 1:
            raise DimensionError("GaussianSpike expects one observation per component")
        return x

    def log_marginal_vec(self, data):
        x = self._check(data)
        lq0 = -0.5 * (x * x + _LOG_2PI)
        v1 = 1.0 + self.sigma2
        lq1 = -0.5 * (x * x / v1 + np.log(v1) + _LOG_2PI)
        return lq0, lq1

    def log_marginal(self, x, hypothesis: int) -> float:
        lq0, lq1 = self.log_marginal_vec(np.atleast_1d(np.asarray(x, dtype=np.float64)))
        return float(lq1[0] if hypothesis else lq0[0])

    def log_likelihood(self, x, mean):
        """Conditional density given the alternative mean (the nuisance)."""
        d = np.asarray(x, dtype=np.float64) - mean
        return -0.5 * (d * d + _LOG_2PI)

    def sample_nuisance(self, size, rng):
        return rng.normal(0.0, np.sqrt(self.sigma2), size)

    def sample(self, theta, rng):
        theta = np.asarray(theta)
        mu = np.where(theta == 1, rng.normal(0.0, np.sqrt(self.sigma2), theta.size), 0.0)
        return mu + rng.normal(0.0, 1.0, theta.size)


def _normal_gamma_log_marginal(n, ss, sq_mean_dev, k0, alpha, beta):
    """log of integral N(x | mu 1, lambda^{-1} I) dP(mu | lambda) dP(lambda) for
    one group: n values with within-group sum of squares ss and n*(xbar-nu)^2
    passed as sq_mean_dev; mu | lambda ~ N(nu, k0/lambda), lambda ~ Gamma(alpha, beta)."""
    q = ss + sq_mean_dev / (1.0 + n * k0)
    return (
        -0.5 * n * _LOG_2PI
        - 0.5 * np.log1p(n * k0)
        + alpha * np.log(beta)
        + gammaln(alpha + 0.5 * n)
        - gammaln(alpha)
        - (alpha + 0.5 * n) * np.log(beta + 0.5 * q)
    )


@dataclass(frozen=True)
class TwoGroupGaussian:
    """Conjugate two-group model; beta and nu may be per-component vectors
    (the empirical-Bayes plug-ins of `eb_hyperparameters`)."""

    k0: float
    alpha: float
    beta: float | np.ndarray
    nu: float | np.ndarray
    n1: int
    n2: int

    def __post_init__(self):
        if self.k0 <= 0 or self.alpha <= 0 or np.any(np.asarray(self.beta) <= 0):
            raise ConfigurationError("k0, alpha, beta must be positive")
        if self.n1 < 2 or self.n2 < 2:
            raise ConfigurationError("need n1, n2 >= 2 replicates per group")

    def _split(self, data):
        x = np.atleast_2d(np.asarray(data, dtype=np.float64))
        if x.shape[1] != self.n1 + self.n2:
            raise DimensionError(
                f"expected {self.n1 + self.n2} values per component, got {x.shape[1]}"
            )
        return x[:, : self.n1], x[:, self.n1 :]

    def log_marginal_vec(self, data):
        g1, g2 = self._split(data)
        n1, n2 = self.n1, self.n2
        n = n1 + n2
        nu = np.asarray(self.nu, dtype=np.float64)
        beta = np.asarray(self.beta, dtype=np.float64)
        m1 = g1.mean(axis=1)
        m2 = g2.mean(axis=1)
        ss1 = ((g1 - m1[:, None]) ** 2).sum(axis=1)
        ss2 = ((g2 - m2[:, None]) ** 2).sum(axis=1)
        pooled_mean = (n1 * m1 + n2 * m2) / n
        ss_pooled = ss1 + ss2 + n1 * (m1 - pooled_mean) ** 2 + n2 * (m2 - pooled_mean) ** 2
        lq0 = _normal_gamma_log_marginal(
            n, ss_pooled, n * (pooled_mean - nu) ** 2, self.k0, self.alpha, beta
        )
        # under the alternative the groups share lambda but have independent
        # means, so the mean integrals factor per group while the lambda
        # integral stays joint
        q1 = (
            ss1
            + ss2
            + n1 * (m1 - nu) ** 2 / (1.0 + n1 * self.k0)
            + n2 * (m2 - nu) ** 2 / (1.0 + n2 * self.k0)
        )
        lq1 = (
            -0.5 * n * _LOG_2PI
            - 0.5 * (np.log1p(n1 * self.k0) + np.log1p(n2 * self.k0))
            + self.alpha * np.log(beta)
            + gammaln(self.alpha + 0.5 * n)
            - gammaln(self.alpha)
            - (self.alpha + 0.5 * n) * np.log(beta + 0.5 * q1)
        )
        return lq0, lq1

    def log_marginal(self, x, hypothesis: int) -> float:
        lq0, lq1 = self.log_marginal_vec(np.atleast_2d(np.asarray(x, dtype=np.float64)))
        return float(lq1[0] if hypothesis else lq0[0])

    def sample(self, theta, rng):
        theta = np.asarray(theta)
        m = theta.size
        nu = np.broadcast_to(np.asarray(self.nu, dtype=np.float64), (m,))
        beta = np.broadcast_to(np.asarray(self.beta, dtype=np.float64), (m,))
        lam = rng.gamma(self.alpha, 1.0 / beta, m)
        sd_mean = np.sqrt(self.k0 / lam)
        mu1 = rng.normal(nu, sd_mean)
        mu2 = np.where(theta == 1, rng.normal(nu, sd_mean), mu1)
        noise = rng.normal(0.0, 1.0, (m, self.n1 + self.n2)) / np.sqrt(lam)[:, None]
        means = np.concatenate(
            [np.repeat(mu1[:, None], self.n1, axis=1), np.repeat(mu2[:, None], self.n2, axis=1)],
            axis=1,
        )
        return means + noise


@dataclass(frozen=True)
class ExponentialPair:
    """n iid exponential replicates per component with rate lambda0 or lambda1."""

    lambda0: float
    lambda1: float
    n: int

    def __post_init__(self):
        if self.lambda0 <= 0 or self.lambda1 <= 0 or self.n < 1:
            raise ConfigurationError("rates and replicate count must be positive")

    def _stat(self, data) -> np.ndarray:
        x = np.atleast_2d(np.asarray(data, dtype=np.float64))
        if x.shape[1] != self.n:
            raise DimensionError(f"expected {self.n} replicates per component")
        if (x <= 0).any():
            raise ConfigurationError("exponential data must be positive")
        return x.sum(axis=1)

    def log_marginal_vec(self, data):
        t = self._stat(data)
        lq0 = self.n * np.log(self.lambda0) - self.lambda0 * t
        lq1 = self.n * np.log(self.lambda1) - self.lambda1 * t
        return lq0, lq1

    def log_marginal(self, x, hypothesis: int) -> float:
        lq0, lq1 = self.log_marginal_vec(np.atleast_2d(np.asarray(x, dtype=np.float64)))
        return float(lq1[0] if hypothesis else lq0[0])

    def dependence_terms(self, data):
        """Terms on the sufficient-statistic scale: the theta=0 log density,
        and (CDF, log density) of T under the alternative, whose marginal the
        frailty copula couples."""
        t = self._stat(data)
        lq0 = stats.gamma.logpdf(t, a=self.n, scale=1.0 / self.lambda0)
        logf1 = stats.gamma.logpdf(t, a=self.n, scale=1.0 / self.lambda1)
        cdf1 = stats.gamma.cdf(t, a=self.n, scale=1.0 / self.lambda1)
        return lq0, cdf1, logf1

    def sample_null(self, count, rng):
        return rng.exponential(1.0 / self.lambda0, (count, self.n))

    def sample_alt_iid(self, count, rng):
        return rng.exponential(1.0 / self.lambda1, (count, self.n))

    def replicates_given_stat(self, t, rng):
        """Draw the replicate vector given its sum: T times uniform simplex
        spacings, which is the conditional law for iid exponentials."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        return t[:, None] * rng.dirichlet(np.ones(self.n), t.size)

    def stat_ppf(self, u):
        return stats.gamma.ppf(u, a=self.n, scale=1.0 / self.lambda1)


@dataclass(frozen=True)
class ModelSpec:
    """A data model: marginal family, prior weights, optional frailty coupling."""

    model: object
    pi: float | np.ndarray
    kappa: float | None = None

    def prior(self, m: int) -> np.ndarray:
        return _as_prior(self.pi, m)

    def frailty(self) -> GammaFrailty | None:
        return None if self.kappa is None else GammaFrailty(kappa=self.kappa)


def posterior_mean_simple(prior, model, data) -> np.ndarray:
    """phi_m = P(theta_m = 1 | x_m) under independence, computed in log space."""
    lq0, lq1 = model.log_marginal_vec(data)
    lq0 = np.atleast_1d(lq0)
    lq1 = np.atleast_1d(lq1)
    pi = _as_prior(prior, lq0.size)
    if np.any(np.isneginf(lq0) & np.isneginf(lq1)):
        bad = int(np.flatnonzero(np.isneginf(lq0) & np.isneginf(lq1))[0])
        raise DegenerateLikelihoodError(
            f"both hypothesis densities vanish at component {bad}"
        )
    return expit(np.log(pi) - np.log1p(-pi) + lq1 - lq0)


def marginal_likelihood_composite(model, hypothesis: int, x_m) -> float:
    """Nuisance-integrated marginal q~_{m,theta}(x_m) for the composite models."""
    if not isinstance(model, (GaussianSpike, TwoGroupGaussian)):
        raise ConfigurationError(
            "composite marginals are defined for GaussianSpike and TwoGroupGaussian"
        )
    return float(np.exp(model.log_marginal(x_m, hypothesis)))


def psi_exact_independent(phi, adjusted: bool = False) -> np.ndarray:
    """Exact E[theta_m/((theta'1) v 1) | x] (or /(theta'1 + 1) when adjusted)
    under a product-Bernoulli(phi) posterior.

    Uses psi_m = phi_m * E[1/(1+S_m)] with S_m ~ Poisson-binomial(phi minus
    component m) and E[1/(1+S)] = integral_0^1 E[t^S] dt
    = integral_0^1 prod_j (1 - phi_j (1-t)) dt; the integrand is a polynomial
    of degree M-1 (degree M with the extra t factor when adjusted), so
    Gauss-Legendre with M//2 + 1 nodes integrates it exactly.  O(M^2).
    """
    phi = np.asarray(phi, dtype=np.float64)
    m = phi.size
    if m == 0:
        return phi.copy()
    nodes, weights = leggauss(m // 2 + 1)
    t = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    if adjusted:
        w = w * t
    # log of the full product per node, then a leave-one-out division; the
    # discarded factor 1 - phi_j(1-t) >= t > 0 keeps the division finite
    log_terms = np.log1p(-np.outer(1.0 - t, phi))
    log_prod = log_terms.sum(axis=1)
    integrals = w @ np.exp(log_prod[:, None] - log_terms)
    return phi * integrals


@dataclass
class PosteriorTable:
    """Exact posterior over all 2^M states; row index encodes theta with
    component 1 as the most significant bit."""

    m: int
    log_probs: np.ndarray

    def _bits(self) -> np.ndarray:
        codes = np.arange(1 << self.m, dtype=np.uint32)
        shifts = np.arange(self.m - 1, -1, -1, dtype=np.uint32)
        return ((codes[:, None] >> shifts) & 1).astype(np.float64)

    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    def phi(self) -> np.ndarray:
        return self.probs() @ self._bits()

    def psi(self, adjusted: bool = False) -> np.ndarray:
        bits = self._bits()
        s = bits.sum(axis=1)
        denom = (s + 1.0) if adjusted else np.maximum(s, 1.0)
        return (self.probs() / denom) @ bits

    def summary(self, with_psi: bool = True, with_psi_adj: bool = False) -> PosteriorSummary:
        return PosteriorSummary(
            phi=self.phi(),
            psi=self.psi() if with_psi else None,
            psi_adj=self.psi(adjusted=True) if with_psi_adj else None,
        )


def exact_posterior_table(prior, model, data, frailty: GammaFrailty | None = None) -> PosteriorTable:
    """Enumerate the 2^M posterior table (M <= 12), independent or
    frailty-coupled across the alternative block."""
    lq0, lq1 = model.log_marginal_vec(data)
    lq0 = np.atleast_1d(lq0)
    lq1 = np.atleast_1d(lq1)
    m = lq0.size
    if m > 12:
        raise RefusalError(f"exact table refuses M = {m} > 12")
    pi = _as_prior(prior, m)
    codes = np.arange(1 << m, dtype=np.uint32)
    shifts = np.arange(m - 1, -1, -1, dtype=np.uint32)
    bits = ((codes[:, None] >> shifts) & 1).astype(np.float64)
    log_joint = bits @ (np.log(pi) - np.log1p(-pi)) + np.log1p(-pi).sum()
    if frailty is None:
        log_joint += bits @ (lq1 - lq0) + lq0.sum()
    else:
        if not hasattr(model, "dependence_terms"):
            raise ConfigurationError(
                f"{type(model).__name__} does not define a frailty-coupled statistic"
            )
        lq0s, cdf1, logf1 = model.dependence_terms(data)
        logcdf1 = np.log(np.clip(cdf1, 1e-300, 1.0 - 1e-16))
        n_rows = 1 << m
        k = np.zeros(n_rows, dtype=np.int64)
        ell = np.zeros(n_rows)
        loglik = np.zeros(n_rows)
        for j in range(m):
            sel = bits[:, j] == 1.0
            k1, ell1, dl = step_arrays(
                frailty.kappa, k[sel], ell[sel], logcdf1[j], logf1[j]
            )
            k[sel] = k1
            ell[sel] = ell1
            loglik[sel] += dl
            loglik[~sel] += lq0s[j]
        log_joint += loglik
    return PosteriorTable(m=m, log_probs=log_joint - logsumexp(log_joint))


def eb_hyperparameters(data, k0: float, alpha: float):
    """Per-component empirical-Bayes plug-ins for the two-group model:
    nu_m = mean(x_m) and beta_m = S^2(x_m) (alpha-1)/(k0+1), inverting
    E[S^2] = (k0+1) beta/(alpha-1)."""
    if alpha <= 1:
        raise ConfigurationError("the beta plug-in needs alpha > 1")
    x = np.atleast_2d(np.asarray(data, dtype=np.float64))
    nu = x.mean(axis=1)
    s2 = x.var(axis=1, ddof=1)
    beta = s2 * (alpha - 1.0) / (k0 + 1.0)
    if (beta <= 0).any():
        raise ConfigurationError("constant rows give a degenerate beta plug-in")
    return nu, beta
