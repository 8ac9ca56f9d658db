"""Benjamini-Hochberg step-up baseline and the per-model p-values it consumes.

The step-up rule at level q rejects the hypotheses whose p-values fall at or
below p_(i*), where i* is the largest index with p_(i) <= i q / M in the
sorted sequence; no rejections when no index qualifies.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from .errors import ConfigurationError, DimensionError, DomainError
from .posteriors import ExponentialPair, GaussianSpike, TwoGroupGaussian


def bh_decide(p_values, q: float) -> np.ndarray:
    """Step-up decisions (1 = reject) at false discovery rate level q."""
    p = np.asarray(p_values, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise DimensionError("p-values must form a non-empty vector")
    if np.any(~np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
        raise DomainError("p-values must lie in [0, 1]")
    if not 0.0 < q < 1.0:
        raise ConfigurationError("the level q must lie in (0, 1)")
    m = p.size
    order = np.sort(p)
    # evaluate i * q / m with the same operator grouping as the step-up
    # definition so knife-edge p-values resolve identically
    passing = np.flatnonzero(order <= np.arange(1, m + 1) * q / m)
    if passing.size == 0:
        return np.zeros(m, dtype=np.int8)
    return (p <= order[passing[-1]]).astype(np.int8)


def p_values(model, data) -> np.ndarray:
    """Classical per-component p-values for each data model: a two-sided
    z-test for the Gaussian spike, a pooled two-sample t-test for the
    two-group model, and a likelihood-ratio chi-square test of the null rate
    for the exponential replicates."""
    if isinstance(model, GaussianSpike):
        x = np.asarray(data, dtype=np.float64)
        return 2.0 * stats.norm.sf(np.abs(x))
    if isinstance(model, TwoGroupGaussian):
        x = np.atleast_2d(np.asarray(data, dtype=np.float64))
        if x.shape[1] != model.n1 + model.n2:
            raise DimensionError("data width does not match the group sizes")
        g1 = x[:, : model.n1]
        g2 = x[:, model.n1:]
        n1, n2 = model.n1, model.n2
        df = n1 + n2 - 2
        var_pool = (
            ((g1 - g1.mean(axis=1, keepdims=True)) ** 2).sum(axis=1)
            + ((g2 - g2.mean(axis=1, keepdims=True)) ** 2).sum(axis=1)
        ) / df
        se = np.sqrt(var_pool * (1.0 / n1 + 1.0 / n2))
        diff = g1.mean(axis=1) - g2.mean(axis=1)
        # zero pooled variance: separated constant groups pin t at +-inf,
        # identical constant groups carry no evidence (t = 0)
        zero = se == 0.0
        t = diff / np.where(zero, 1.0, se)
        t[zero & (diff > 0)] = np.inf
        t[zero & (diff < 0)] = -np.inf
        return 2.0 * stats.t.sf(np.abs(t), df)
    if isinstance(model, ExponentialPair):
        t_stat = model._stat(data)
        n = model.n
        lam0 = model.lambda0
        # likelihood ratio of lambda = lambda0 against the free alternative
        lr = 2.0 * (n * np.log(n / (lam0 * t_stat)) - n + lam0 * t_stat)
        return stats.chi2.sf(np.maximum(lr, 0.0), df=1)
    raise ConfigurationError(f"no p-value recipe for {type(model).__name__}")
