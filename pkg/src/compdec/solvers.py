"""Optimal action search for compound-loss multiple decisions.

Given per-component posterior summaries, the Bayes rule minimizes the
posterior expected loss L~(a, x) = E[L(a, theta) | x] over all 2^M actions.
For the loss pairs in `losses`, the minimizer has a rank-threshold structure:
for each candidate rejection count k, the posterior expected loss of the best
k-rejection action is

    H(k, x) = 1'd1(k, x) + sum of the k smallest entries of e(k, x),

where d0(k,x) = c0 * alpha0(k) * (1 - phi), d1(k,x) = c1 * alpha1(k) * v1,
e = d0 - d1, and (alpha0, alpha1, v1) depend on the loss pair:

    pair       alpha0(k)    alpha1(k)      v1
    FP_FN      1/M          1/M            phi
    FDP_FNP    1/(k v 1)    1/((M-k) v 1)  phi
    FDP_MDP    1/(k v 1)    1              psi
    FDP_AMDP   1/(k v 1)    1              psi_adj

with phi_m = E(theta_m | x), psi_m = E(theta_m/((theta'1) v 1) | x) and
psi_adj_m = E(theta_m/((theta'1) + 1) | x).  The optimum rejects the k*
components with the smallest e(k*, .) where k* = argmin_k H(k, x).

Tie conventions (the optimum is not otherwise unique): ties in k* break
toward smaller k, ties in the e-ranking break toward the smaller component
index.

`solve` dispatches to a specialized path per pair; `solve_generic` is the
direct Theorem-style search usable for every pair; `brute_force_oracle`
enumerates all 2^M actions for verification.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DimensionError, RefusalError
from .losses import LossPairKind, LossSpec

_RANGE_TOL = 1e-9


def _as_unit_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional")
    if not np.isfinite(arr).all():
        raise ConfigurationError(f"{name} contains non-finite entries")
    if arr.size and (arr.min() < -_RANGE_TOL or arr.max() > 1.0 + _RANGE_TOL):
        raise ConfigurationError(f"{name} entries must lie in [0, 1]")
    return np.clip(arr, 0.0, 1.0)


@dataclass
class PosteriorSummary:
    """Per-component posterior expectations; the only solver input.

    phi is always required.  psi is required for FDP_MDP, psi_adj for
    FDP_AMDP; both are expectations of theta_m damped by the number of true
    alternatives, so 0 <= psi_m <= phi_m.
    """

    phi: np.ndarray
    psi: np.ndarray | None = None
    psi_adj: np.ndarray | None = None

    def __post_init__(self):
        self.phi = _as_unit_vector(self.phi, "phi")
        for name in ("psi", "psi_adj"):
            v = getattr(self, name)
            if v is None:
                continue
            v = _as_unit_vector(v, name)
            if v.shape != self.phi.shape:
                raise DimensionError(f"{name} length {v.size} != phi length {self.phi.size}")
            if (v > self.phi + _RANGE_TOL).any():
                raise ConfigurationError(f"{name} must not exceed phi componentwise")
            setattr(self, name, np.minimum(v, self.phi))

    @property
    def m(self) -> int:
        return self.phi.size


@dataclass
class SolverResult:
    action: np.ndarray
    k_star: int
    h_values: np.ndarray = field(repr=False)
    posterior_loss: float


def _check_spec(spec: LossSpec, post: PosteriorSummary) -> None:
    if post.m != spec.m:
        raise DimensionError(f"posterior summary length {post.m} != spec.m {spec.m}")


def _type2_vector(spec: LossSpec, post: PosteriorSummary) -> np.ndarray:
    if spec.kind == LossPairKind.FDP_MDP:
        if post.psi is None:
            raise ConfigurationError("FDP_MDP requires psi in the posterior summary")
        return post.psi
    if spec.kind == LossPairKind.FDP_AMDP:
        if post.psi_adj is None:
            raise ConfigurationError("FDP_AMDP requires psi_adj in the posterior summary")
        return post.psi_adj
    return post.phi


def _alpha0(kind: LossPairKind, k: int, m: int) -> float:
    if kind == LossPairKind.FP_FN:
        return 1.0 / m
    return 1.0 / max(k, 1)


def _alpha1(kind: LossPairKind, k: int, m: int) -> float:
    if kind == LossPairKind.FP_FN:
        return 1.0 / m
    if kind == LossPairKind.FDP_FNP:
        return 1.0 / max(m - k, 1)
    return 1.0


def _e_vector(spec: LossSpec, post: PosteriorSummary, k: int) -> np.ndarray:
    v1 = _type2_vector(spec, post)
    a0 = spec.c0 * _alpha0(spec.kind, k, spec.m)
    a1 = spec.c1 * _alpha1(spec.kind, k, spec.m)
    return a0 * (1.0 - post.phi) - a1 * v1


def _prefix_action(e: np.ndarray, k: int) -> np.ndarray:
    """Reject the k smallest entries of e, ties toward the smaller index."""
    m = e.size
    action = np.zeros(m, dtype=np.int8)
    if k > 0:
        order = np.lexsort((np.arange(m), e))
        action[order[:k]] = 1
    return action


def rejection_ranks(spec: LossSpec, post: PosteriorSummary, k: int) -> np.ndarray:
    """1-based component ranks under the tie-broken ordering the prefix rule
    uses at rejection count k, so ``action[m] == 1`` iff ``rank[m] <= k``."""
    _check_spec(spec, post)
    e = _e_vector(spec, post, k)
    order = np.lexsort((np.arange(spec.m), e))
    ranks = np.empty(spec.m, dtype=np.int64)
    ranks[order] = np.arange(1, spec.m + 1)
    return ranks


def solve_generic(spec: LossSpec, post: PosteriorSummary) -> SolverResult:
    """Direct search over k = 0..M with a partial selection per k; O(M^2)."""
    _check_spec(spec, post)
    m = spec.m
    v1 = _type2_vector(spec, post)
    one_minus_phi = 1.0 - post.phi
    v1_total = v1.sum()
    h = np.empty(m + 1)
    e = np.empty(m)
    tmp = np.empty(m)
    for k in range(m + 1):
        a0 = spec.c0 * _alpha0(spec.kind, k, m)
        a1 = spec.c1 * _alpha1(spec.kind, k, m)
        np.multiply(one_minus_phi, a0, out=e)
        np.multiply(v1, a1, out=tmp)
        e -= tmp
        if k == m:
            tail = e.sum()
        elif k > 0:
            e.partition(k - 1)
            tail = e[:k].sum()
        else:
            tail = 0.0
        h[k] = a1 * v1_total + tail
    k_star = int(np.argmin(h))
    action = _prefix_action(_e_vector(spec, post, k_star), k_star)
    return SolverResult(action=action, k_star=k_star, h_values=h, posterior_loss=float(h[k_star]))


def solve_fp_fn(spec: LossSpec, post: PosteriorSummary) -> SolverResult:
    """Componentwise threshold: reject m iff phi_m > c0/(c0+c1); O(M)."""
    _check_spec(spec, post)
    if spec.kind != LossPairKind.FP_FN:
        raise ConfigurationError("solve_fp_fn requires kind FP_FN")
    m = spec.m
    e = (spec.c0 * (1.0 - post.phi) - spec.c1 * post.phi) / m
    order = np.lexsort((np.arange(m), e))
    h = np.concatenate(([0.0], np.cumsum(e[order]))) + spec.c1 * post.phi.sum() / m
    # e_m < 0 is exactly phi_m > c0/(c0+c1); argmin of the cumulative sums
    # lands on the count of negative entries because zeros sort after them.
    action = (e < 0.0).astype(np.int8)
    k_star = int(action.sum())
    return SolverResult(action=action, k_star=k_star, h_values=h, posterior_loss=float(h[k_star]))


def solve_fdp_fnp(spec: LossSpec, post: PosteriorSummary) -> SolverResult:
    """Single descending sort of phi plus cumulative sums; O(M log M)."""
    _check_spec(spec, post)
    if spec.kind != LossPairKind.FDP_FNP:
        raise ConfigurationError("solve_fdp_fnp requires kind FDP_FNP")
    m = spec.m
    order = np.lexsort((np.arange(m), -post.phi))
    cum = np.concatenate(([0.0], np.cumsum(post.phi[order])))
    total = cum[-1]
    ks = np.arange(m + 1, dtype=np.float64)
    h = np.empty(m + 1)
    h[0] = spec.c1 * total / m
    if m >= 1:
        # 1 <= k <= M-1: both terms live; k = M: the FNP term is vacuous.
        h[1:] = spec.c0 * (ks[1:] - cum[1:]) / ks[1:]
        h[1:m] += spec.c1 * (total - cum[1:m]) / (m - ks[1:m])
    k_star = int(np.argmin(h))
    action = np.zeros(m, dtype=np.int8)
    action[order[:k_star]] = 1
    return SolverResult(action=action, k_star=k_star, h_values=h, posterior_loss=float(h[k_star]))


def solve_fdp_mdp(spec: LossSpec, post: PosteriorSummary) -> SolverResult:
    """FDP_MDP / FDP_AMDP solver.

    When phi and psi share a common descending order the top-k set of the
    selection score is the same prefix for every k, and all H(k) come from
    two cumulative sums after one sort (O(M log M)).  Otherwise falls back to
    solve_generic.  The action is re-ranked at k* exactly like the generic
    path, so both paths return identical actions.
    """
    _check_spec(spec, post)
    if spec.kind not in (LossPairKind.FDP_MDP, LossPairKind.FDP_AMDP):
        raise ConfigurationError("solve_fdp_mdp requires kind FDP_MDP or FDP_AMDP")
    m = spec.m
    v = _type2_vector(spec, post)
    order = np.lexsort((np.arange(m), -v, -post.phi))
    if np.any(np.diff(v[order]) > 0):
        return solve_generic(spec, post)
    cum_phi = np.cumsum(post.phi[order])
    cum_v = np.cumsum(v[order])
    base = spec.c1 * v.sum()
    ks = np.arange(1, m + 1, dtype=np.float64)
    h = np.empty(m + 1)
    h[0] = base
    h[1:] = base + spec.c0 - (spec.c0 / ks * cum_phi + spec.c1 * cum_v)
    k_star = int(np.argmin(h))
    action = _prefix_action(_e_vector(spec, post, k_star), k_star)
    return SolverResult(action=action, k_star=k_star, h_values=h, posterior_loss=float(h[k_star]))


_FAST_PATHS = {
    LossPairKind.FP_FN: solve_fp_fn,
    LossPairKind.FDP_FNP: solve_fdp_fnp,
    LossPairKind.FDP_MDP: solve_fdp_mdp,
    LossPairKind.FDP_AMDP: solve_fdp_mdp,
}


def solve(spec: LossSpec, post: PosteriorSummary) -> SolverResult:
    """Find the Bayes action via the specialized path for spec.kind."""
    return _FAST_PATHS[spec.kind](spec, post)


_ORACLE_CHUNK = 1 << 16


def brute_force_oracle(spec: LossSpec, post: PosteriorSummary) -> SolverResult:
    """Exhaustive minimization of the posterior expected loss over all 2^M actions.

    Exact because every implemented pair's posterior expected loss is linear
    in (phi, psi, psi_adj) once the action is fixed: the FDP denominator
    depends on a alone, and the MDP/AMDP denominators are absorbed into psi
    and psi_adj.  The summaries must be the true posterior expectations
    (e.g. psi computed under posterior independence, or marginalized from an
    exact table); then the returned minimum is the exact Bayes loss.

    Enumeration is lexicographic over action tuples, first component most
    significant, and ties keep the lexicographically smallest action.
    h_values[k] is the minimum over actions with exactly k rejections.
    """
    _check_spec(spec, post)
    m = spec.m
    if m > 20:
        raise RefusalError(f"brute force refuses M = {m} > 20 (2^M actions)")
    v1 = _type2_vector(spec, post)
    one_minus_phi = 1.0 - post.phi
    v1_total = v1.sum()
    shifts = np.arange(m - 1, -1, -1, dtype=np.uint32)
    kind = spec.kind
    best_value = np.inf
    best_action: np.ndarray | None = None
    h = np.full(m + 1, np.inf)
    for start in range(0, 1 << m, _ORACLE_CHUNK):
        stop = min(start + _ORACLE_CHUNK, 1 << m)
        codes = np.arange(start, stop, dtype=np.uint32)
        actions = ((codes[:, None] >> shifts) & 1).astype(np.float64)
        k = actions.sum(axis=1)
        if kind == LossPairKind.FP_FN:
            alpha0 = np.full_like(k, 1.0 / m)
            alpha1 = np.full_like(k, 1.0 / m)
        elif kind == LossPairKind.FDP_FNP:
            alpha0 = 1.0 / np.maximum(k, 1.0)
            alpha1 = 1.0 / np.maximum(m - k, 1.0)
        else:
            alpha0 = 1.0 / np.maximum(k, 1.0)
            alpha1 = np.ones_like(k)
        values = spec.c0 * alpha0 * (actions @ one_minus_phi) + spec.c1 * alpha1 * (
            v1_total - actions @ v1
        )
        np.minimum.at(h, k.astype(np.intp), values)
        i = int(np.argmin(values))
        if values[i] < best_value:
            best_value = float(values[i])
            best_action = actions[i].astype(np.int8)
    assert best_action is not None
    return SolverResult(
        action=best_action,
        k_star=int(best_action.sum()),
        h_values=h,
        posterior_loss=best_value,
    )
