"""Cost-weighted compound loss family for multiple binary decisions.

A decision problem over M components compares an action vector a in {0,1}^M
(a_m = 1 rejects the m-th null) against the state vector theta in {0,1}^M
(theta_m = 1 means the m-th alternative is true).  Losses are built from six
error proportions:

    FP   = a'(1-theta) / M                     false positive proportion
    FN   = (1-a)'theta / M                     false negative proportion
    FDP  = a'(1-theta) / (a'1 v 1)             false discovery proportion
    FNP  = (1-a)'theta / ((1-a)'1 v 1)         false nondiscovery proportion
    MDP  = (1-a)'theta / (theta'1 v 1)         missed discovery proportion
    AMDP = (1-a)'theta / (theta'1 + 1)         adjusted MDP (+1 shift, no guard)

where "v 1" is max(., 1), applied before division so 0/0 cases yield 0.  The
loss is L(a, theta) = c0*L0 + c1*L1 for one of four complementary pairs
(L0, L1): (FP, FN), (FDP, FNP), (FDP, MDP), (FDP, AMDP).

All four pairs share the same structural constants: g0(a) = a, a0 = 1 (the
all-ones vector), A1 = 1 (so g1(a) = 1 - a), and tau0(k) = k.  The solver
module relies on exactly these constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError, DimensionError


class LossPairKind(Enum):
    FP_FN = "fp_fn"
    FDP_FNP = "fdp_fnp"
    FDP_MDP = "fdp_mdp"
    FDP_AMDP = "fdp_amdp"


#: (type-I proportion, type-II proportion) named by each pair.
PAIR_PROPORTIONS: dict[LossPairKind, tuple[str, str]] = {
    LossPairKind.FP_FN: ("FP", "FN"),
    LossPairKind.FDP_FNP: ("FDP", "FNP"),
    LossPairKind.FDP_MDP: ("FDP", "MDP"),
    LossPairKind.FDP_AMDP: ("FDP", "AMDP"),
}

PROPORTION_NAMES = ("FP", "FN", "FDP", "FNP", "MDP", "AMDP")


@dataclass(frozen=True)
class LossSpec:
    """A cost-weighted loss pair: c0 prices the type-I term, c1 the type-II term."""

    kind: LossPairKind
    c0: float
    c1: float
    m: int

    def __post_init__(self):
        if self.c0 < 0 or self.c1 < 0:
            raise ConfigurationError("costs must be nonnegative")
        if self.c0 + self.c1 <= 0:
            raise ConfigurationError("at least one cost must be positive")
        if self.m < 1:
            raise ConfigurationError("m must be a positive integer")


def _as_binary(v, name: str) -> np.ndarray:
    arr = np.asarray(v)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional")
    if not np.isin(arr, (0, 1)).all():
        raise ConfigurationError(f"{name} must be a binary vector")
    return arr.astype(np.float64)


def proportion(kind: str, a, theta) -> float:
    """Evaluate one named error proportion of the action a against the state theta.

    kind is one of "FP", "FN", "FDP", "FNP", "MDP", "AMDP" (case-insensitive).
    """
    a = _as_binary(a, "a")
    theta = _as_binary(theta, "theta")
    if a.shape != theta.shape:
        raise DimensionError(f"length mismatch: len(a)={a.size}, len(theta)={theta.size}")
    m = a.size
    if m < 1:
        raise DimensionError("vectors must have length >= 1")
    kind = kind.upper()
    false_rejections = float(a @ (1.0 - theta))
    missed = float((1.0 - a) @ theta)
    if kind == "FP":
        return false_rejections / m
    if kind == "FN":
        return missed / m
    if kind == "FDP":
        return false_rejections / max(a.sum(), 1.0)
    if kind == "FNP":
        return missed / max(m - a.sum(), 1.0)
    if kind == "MDP":
        return missed / max(theta.sum(), 1.0)
    if kind == "AMDP":
        return missed / (theta.sum() + 1.0)
    raise ConfigurationError(f"unknown proportion kind: {kind!r}")


def loss(spec: LossSpec, a, theta) -> float:
    """Evaluate c0*L0(a,theta) + c1*L1(a,theta) for the pair named by spec.kind."""
    a = _as_binary(a, "a")
    theta = _as_binary(theta, "theta")
    if a.size != spec.m or theta.size != spec.m:
        raise DimensionError(
            f"expected length {spec.m}, got len(a)={a.size}, len(theta)={theta.size}"
        )
    name0, name1 = PAIR_PROPORTIONS[spec.kind]
    return spec.c0 * proportion(name0, a, theta) + spec.c1 * proportion(name1, a, theta)
