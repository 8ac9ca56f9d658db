"""Gamma-frailty Archimedean copula.

A Gamma(kappa, kappa) frailty Z (mean 1) shared by a block of components
induces the Archimedean copula

    C(u_1, ..., u_k) = L(sum_t L^{-1}(u_t)),

where L(u) = E[e^{-uZ}] = (1 + u/kappa)^{-kappa} is the frailty's Laplace
transform; this is the Clayton family with parameter 1/kappa and pairwise
Kendall tau 1/(2 kappa + 1).  kappa -> infinity degenerates to independence.

The block's joint density with marginals (F_t, f_t) is the copula density
times the marginal densities:

    (-1)^k L^(k)(s) * prod_t f_t / |L'(L^{-1}(F_t))|,    s = sum_t L^{-1}(F_t),

with closed-form derivatives L^(k)(s) = (-1)^k kappa^{-k}
prod_{j<k}(kappa+j) (1+s/kappa)^{-kappa-k} and |L'(L^{-1}(F))| = F^{(kappa+1)/kappa}.
Sequential evaluation (component by component) yields exactly the conditional
densities the SMC increments need, so the state of a partially built block is
just (k, s) plus the accumulated log density.

Numerics: s = sum_t kappa (F_t^{-1/kappa} - 1) overflows double precision for
tiny F_t, so the state tracks ell = log(1 + s/kappa) instead, updated by
exp(ell') = exp(ell) + exp(a) - 1 with a = -log(F)/kappa, evaluated in
shifted form.  CDF values are clamped to [1e-300, 1 - 1e-16] (flagged, not
fatal) because simulations do reach the far tails.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, DomainError

_CDF_FLOOR = 1e-300
_CDF_CEIL = 1.0 - 1e-16
_LOG_FLOOR = float(np.log(_CDF_FLOOR))
_LOG_CEIL = float(np.log1p(-1e-16))


@dataclass(frozen=True)
class GammaFrailty:
    """Shape-equals-rate Gamma frailty, so E[Z] = 1 and dependence grows as
    kappa shrinks."""

    kappa: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise ConfigurationError("kappa must be positive")


def laplace(frailty: GammaFrailty, u):
    """L(u) = (1 + u/kappa)^(-kappa) for u >= 0."""
    u = np.asarray(u, dtype=np.float64)
    if (u < 0).any():
        raise DomainError("the Laplace transform needs u >= 0")
    out = np.exp(-frailty.kappa * np.log1p(u / frailty.kappa))
    return out if out.ndim else float(out)

def generator_inverse(frailty: GammaFrailty, t):
    """L^{-1}(t) = kappa (t^{-1/kappa} - 1) on (0, 1]; t = 0 maps to +inf."""
    t = np.asarray(t, dtype=np.float64)
    if (t < 0).any() or (t > 1).any():
        raise DomainError("the generator is defined on [0, 1]")
    with np.errstate(divide="ignore", over="ignore"):
        out = frailty.kappa * np.expm1(-np.log(t) / frailty.kappa)
    return out if out.ndim else float(out)


def copula_value(frailty: GammaFrailty, u):
    """C(u_1, ..., u_k) = L(sum L^{-1}(u_t)); every u_t must lie in (0, 1]."""
    u = np.asarray(u, dtype=np.float64)
    if (u <= 0).any() or (u > 1).any():
        raise DomainError("copula arguments must lie in (0, 1]")
    return float(laplace(frailty, generator_inverse(frailty, u).sum()))


@dataclass(frozen=True)
class CopulaState:
    """Sequential state of a dependent block: size k, generator sum s (through
    ell = log(1+s/kappa), the overflow-safe representation), the block's log
    joint density so far, and whether any CDF hit the clamp."""

    k: int = 0
    s: float = 0.0
    ell: float = 0.0
    log_density: float = 0.0
    saturated: bool = False


def _clamp_log_cdf(log_f_cdf):
    clamped = np.clip(log_f_cdf, _LOG_FLOOR, _LOG_CEIL)
    return clamped, np.any(clamped != log_f_cdf)


def step_arrays(kappa: float, k, ell, log_cdf, log_pdf):
    """Vectorized one-component extension of dependent blocks.

    k and ell are state arrays (one entry per block being extended); log_cdf
    and log_pdf are the new component's marginal log CDF / log density values
    (scalars or arrays broadcasting with the state).  Returns
    (k+1, new ell, log-density increment).
    """
    k = np.asarray(k)
    ell = np.asarray(ell, dtype=np.float64)
    log_cdf, _ = _clamp_log_cdf(np.asarray(log_cdf, dtype=np.float64))
    a = -log_cdf / kappa
    mx = np.maximum(ell, a)
    new_ell = mx + np.log(np.exp(ell - mx) + np.exp(a - mx) - np.exp(-mx))
    dlog = (
        np.log(kappa + k)
        - np.log(kappa)
        - (kappa + k + 1.0) * new_ell
        + (kappa + k) * ell
        + log_pdf
        - (kappa + 1.0) / kappa * log_cdf
    )
    return k + 1, new_ell, dlog


def block_log_density_step(frailty: GammaFrailty, state: CopulaState, cdf: float | None = None,
                           pdf: float | None = None, log_cdf: float | None = None,
                           log_pdf: float | None = None) -> CopulaState:
    """Extend a dependent block by one component with marginal CDF/density
    values at its observation; returns the new state.  The conditional log
    density of the added component given the block so far is the difference
    of successive log_density values (the first step reproduces the marginal
    log density exactly)."""
    if log_cdf is None:
        if cdf is None:
            raise ConfigurationError("need cdf or log_cdf")
        if not 0.0 <= cdf <= 1.0:
            raise DomainError("cdf value outside [0, 1]")
        with np.errstate(divide="ignore"):
            log_cdf = float(np.log(cdf))
    if log_pdf is None:
        if pdf is None:
            raise ConfigurationError("need pdf or log_pdf")
        if not pdf > 0:
            raise DomainError("density value must be positive")
        log_pdf = float(np.log(pdf))
    clamped, saturated = _clamp_log_cdf(log_cdf)
    k1, ell1, dlog = step_arrays(frailty.kappa, state.k, state.ell, float(clamped), log_pdf)
    s1 = state.s + generator_inverse(frailty, float(np.exp(clamped)))
    return CopulaState(
        k=int(k1),
        s=float(s1),
        ell=float(ell1),
        log_density=state.log_density + float(dlog),
        saturated=state.saturated or bool(saturated),
    )


def block_log_density(frailty: GammaFrailty, cdfs, log_pdfs) -> float:
    """Log joint density of a whole dependent block; convenience wrapper that
    folds block_log_density_step over the components."""
    state = CopulaState()
    for cdf, lp in zip(np.asarray(cdfs, dtype=np.float64), np.asarray(log_pdfs, dtype=np.float64)):
        state = block_log_density_step(frailty, state, cdf=float(cdf), log_pdf=float(lp))
    return state.log_density


def sample_dependent_block(frailty: GammaFrailty, ppf, size: int, rng) -> np.ndarray:
    """Draw one dependent block: Z ~ Gamma(kappa, kappa), then component-wise
    U_t = L(E_t / Z) with iid standard exponentials E_t, so each U_t is
    uniform and the joint is the frailty copula; ppf maps uniforms to the
    target marginal (pass None for the uniforms themselves)."""
    z = rng.gamma(frailty.kappa, 1.0 / frailty.kappa)
    u = laplace(frailty, rng.exponential(1.0, size) / z)
    u = np.atleast_1d(np.asarray(u))
    return u if ppf is None else ppf(u)
