"""Tests for the action solvers.

The ground truth at small M is a literal posterior expected loss: enumerate
every state theta in {0,1}^M with its independent-Bernoulli posterior
probability and average losses.loss over it.  The brute-force oracle is first
validated against that literal expectation, then serves as the oracle for the
fast paths.
"""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compdec.errors import ConfigurationError, DimensionError, RefusalError
from compdec.losses import LossPairKind, LossSpec, loss
from compdec.solvers import (
    PosteriorSummary,
    brute_force_oracle,
    solve,
    solve_fdp_fnp,
    solve_fdp_mdp,
    solve_fp_fn,
    solve_generic,
)

KINDS = list(LossPairKind)


def enumerate_states(m):
    return [np.array(bits) for bits in itertools.product((0, 1), repeat=m)]


def state_probability(theta, phi):
    return float(np.prod(np.where(theta == 1, phi, 1.0 - phi)))


def literal_posterior_loss(spec, a, phi):
    """E[loss(a, theta)] under an independent product-Bernoulli(phi) posterior."""
    return sum(
        state_probability(theta, phi) * loss(spec, a, theta)
        for theta in enumerate_states(spec.m)
    )


def psi_by_enumeration(phi, adjusted=False):
    m = len(phi)
    psi = np.zeros(m)
    for theta in enumerate_states(m):
        p = state_probability(theta, np.asarray(phi))
        s = theta.sum()
        denom = (s + 1.0) if adjusted else max(s, 1.0)
        psi += p * theta / denom
    return psi


def random_summary(rng, m):
    phi = rng.uniform(0.0, 1.0, m)
    return PosteriorSummary(
        phi=phi,
        psi=psi_by_enumeration(phi),
        psi_adj=psi_by_enumeration(phi, adjusted=True),
    )


class TestPosteriorSummary:
    def test_range_enforced(self):
        with pytest.raises(ConfigurationError):
            PosteriorSummary(phi=np.array([1.2]))

    def test_psi_cannot_exceed_phi(self):
        with pytest.raises(ConfigurationError):
            PosteriorSummary(phi=np.array([0.3]), psi=np.array([0.5]))

    def test_psi_length_checked(self):
        with pytest.raises(DimensionError):
            PosteriorSummary(phi=np.array([0.3, 0.4]), psi=np.array([0.2]))

    def test_tiny_overshoot_clipped(self):
        post = PosteriorSummary(phi=np.array([1.0 + 1e-12, -1e-12]))
        assert post.phi[0] == 1.0
        assert post.phi[1] == 0.0


class TestBruteForceOracle:
    def test_matches_literal_expectation(self):
        rng = np.random.default_rng(42)
        for kind in KINDS:
            for _ in range(8):
                m = int(rng.integers(1, 7))
                c0, c1 = rng.uniform(0.2, 3.0, 2)
                spec = LossSpec(kind, c0, c1, m)
                post = random_summary(rng, m)
                result = brute_force_oracle(spec, post)
                # the reported minimum is the literal minimum over all actions
                literal = {
                    tuple(a): literal_posterior_loss(spec, np.array(a), post.phi)
                    for a in itertools.product((0, 1), repeat=m)
                }
                best = min(literal.values())
                assert result.posterior_loss == pytest.approx(best, abs=1e-12)
                assert literal[tuple(result.action)] == pytest.approx(best, abs=1e-12)

    def test_single_component_threshold(self):
        spec = LossSpec(LossPairKind.FP_FN, 1.0, 1.0, 1)
        result = brute_force_oracle(spec, PosteriorSummary(phi=np.array([0.6])))
        assert result.action.tolist() == [1]

    def test_lexicographic_tie_break(self):
        # symmetric phi=0.5 under FP_FN with equal costs ties every action;
        # the all-zero action is lexicographically smallest
        spec = LossSpec(LossPairKind.FP_FN, 1.0, 1.0, 3)
        result = brute_force_oracle(spec, PosteriorSummary(phi=np.full(3, 0.5)))
        assert result.action.tolist() == [0, 0, 0]

    def test_refuses_large_m(self):
        spec = LossSpec(LossPairKind.FP_FN, 1.0, 1.0, 21)
        with pytest.raises(RefusalError):
            brute_force_oracle(spec, PosteriorSummary(phi=np.full(21, 0.5)))

    def test_h_values_are_per_k_minima(self):
        rng = np.random.default_rng(1)
        spec = LossSpec(LossPairKind.FDP_FNP, 1.0, 2.0, 4)
        post = random_summary(rng, 4)
        result = brute_force_oracle(spec, post)
        for k in range(5):
            best_k = min(
                literal_posterior_loss(spec, np.array(a), post.phi)
                for a in itertools.product((0, 1), repeat=4)
                if sum(a) == k
            )
            assert result.h_values[k] == pytest.approx(best_k, abs=1e-12)


class TestFpFn:
    def test_threshold_half(self):
        spec = LossSpec(LossPairKind.FP_FN, 1.0, 1.0, 2)
        post = PosteriorSummary(phi=np.array([0.49, 0.51]))
        assert solve_fp_fn(spec, post).action.tolist() == [0, 1]

    def test_paper_threshold_example(self):
        spec = LossSpec(LossPairKind.FP_FN, 1.0, 1.0, 2)
        post = PosteriorSummary(phi=np.array([0.9, 0.1]))
        assert solve(spec, post).action.tolist() == [1, 0]

    def test_two_thirds_threshold(self):
        spec = LossSpec(LossPairKind.FP_FN, 2.0, 1.0, 2)
        post = PosteriorSummary(phi=np.array([0.6, 0.7]))
        result = solve_fp_fn(spec, post)
        assert result.action.tolist() == [0, 1]
        generic = solve_generic(spec, post)
        assert generic.action.tolist() == [0, 1]
        np.testing.assert_allclose(result.h_values, generic.h_values, atol=1e-12)

    def test_free_rejection(self):
        spec = LossSpec(LossPairKind.FP_FN, 0.0, 1.0, 3)
        post = PosteriorSummary(phi=np.array([0.01, 0.5, 0.99]))
        assert solve_fp_fn(spec, post).action.tolist() == [1, 1, 1]

    def test_exact_tie_keeps_null(self):
        spec = LossSpec(LossPairKind.FP_FN, 1.0, 1.0, 2)
        post = PosteriorSummary(phi=np.array([0.5, 0.5]))
        result = solve_fp_fn(spec, post)
        assert result.action.tolist() == [0, 0]
        assert result.k_star == 0

    def test_cost_monotonicity(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            m = int(rng.integers(1, 12))
            post = PosteriorSummary(phi=rng.uniform(0, 1, m))
            previous = None
            for c0 in (0.25, 0.5, 1.0, 2.0, 4.0):
                action = solve_fp_fn(LossSpec(LossPairKind.FP_FN, c0, 1.0, m), post).action
                if previous is not None:
                    # raising the type-I cost can only drop rejections
                    assert np.all(action <= previous)
                previous = action


class TestFdpFnp:
    def test_derived_h_profile(self):
        # hand enumeration for phi=(0.9, 0.5, 0.2), c0=c1=1:
        #   H(0)=1.6/3, H(1)=0.1+0.7/2, H(2)=0.6/2+0.2, H(3)=1.4/3
        spec = LossSpec(LossPairKind.FDP_FNP, 1.0, 1.0, 3)
        post = PosteriorSummary(phi=np.array([0.9, 0.5, 0.2]))
        result = solve_fdp_fnp(spec, post)
        np.testing.assert_allclose(
            result.h_values, [1.6 / 3, 0.45, 0.5, 1.4 / 3], atol=1e-12
        )
        assert result.k_star == 1
        assert result.action.tolist() == [1, 0, 0]
        oracle = brute_force_oracle(spec, post)
        assert result.posterior_loss == pytest.approx(oracle.posterior_loss, abs=1e-12)

    def test_all_certain_alternatives(self):
        spec = LossSpec(LossPairKind.FDP_FNP, 1.0, 1.0, 4)
        result = solve_fdp_fnp(spec, PosteriorSummary(phi=np.ones(4)))
        assert result.k_star == 4
        assert result.action.tolist() == [1, 1, 1, 1]

    def test_all_zero_phi(self):
        for kind, solver in ((LossPairKind.FDP_FNP, solve_fdp_fnp),):
            spec = LossSpec(kind, 1.0, 1.0, 3)
            result = solver(spec, PosteriorSummary(phi=np.zeros(3)))
            assert result.k_star == 0
            assert result.action.sum() == 0

    def test_m1_reduces_to_threshold(self):
        for c0, c1 in ((1.0, 1.0), (2.0, 1.0), (0.5, 1.5)):
            spec = LossSpec(LossPairKind.FDP_FNP, c0, c1, 1)
            for p in (0.01, 0.3, c0 / (c0 + c1), 0.7, 0.99):
                post = PosteriorSummary(phi=np.array([p]))
                result = solve_fdp_fnp(spec, post)
                oracle = brute_force_oracle(spec, post)
                assert result.posterior_loss == pytest.approx(
                    oracle.posterior_loss, abs=1e-12
                )
                expected = 1 if c1 * p > c0 * (1 - p) else 0
                assert result.k_star == expected

    def test_index_tie_break_on_equal_phi(self):
        spec = LossSpec(LossPairKind.FDP_FNP, 1.0, 2.0, 4)
        post = PosteriorSummary(phi=np.array([0.7, 0.7, 0.7, 0.7]))
        result = solve_fdp_fnp(spec, post)
        assert np.all(np.diff(result.action) <= 0)  # a prefix of the indices


class TestFdpMdp:
    def test_all_zeros(self):
        spec = LossSpec(LossPairKind.FDP_MDP, 1.0, 1.0, 3)
        post = PosteriorSummary(phi=np.zeros(3), psi=np.zeros(3))
        result = solve_fdp_mdp(spec, post)
        assert result.k_star == 0
        assert result.action.sum() == 0

    def test_m2_symmetric_derived(self):
        # phi=(0.5,0.5) independent: psi_m = E[theta_m/(S v 1)] enumerates to
        # 0.25*1 + 0.25*0.5 = 0.375; the optimum rejects both at loss 0.5
        spec = LossSpec(LossPairKind.FDP_MDP, 1.0, 1.0, 2)
        phi = np.array([0.5, 0.5])
        psi = psi_by_enumeration(phi)
        np.testing.assert_allclose(psi, [0.375, 0.375], atol=1e-15)
        post = PosteriorSummary(phi=phi, psi=psi)
        result = solve_fdp_mdp(spec, post)
        oracle = brute_force_oracle(spec, post)
        assert result.posterior_loss == pytest.approx(oracle.posterior_loss, abs=1e-12)
        assert result.posterior_loss == pytest.approx(0.5, abs=1e-12)
        assert result.action.tolist() == [1, 1]

    def test_missing_psi_rejected(self):
        spec = LossSpec(LossPairKind.FDP_MDP, 1.0, 1.0, 2)
        with pytest.raises(ConfigurationError):
            solve_fdp_mdp(spec, PosteriorSummary(phi=np.array([0.5, 0.5])))
        spec_adj = LossSpec(LossPairKind.FDP_AMDP, 1.0, 1.0, 2)
        with pytest.raises(ConfigurationError):
            solve(spec_adj, PosteriorSummary(phi=np.array([0.5, 0.5]), psi=np.array([0.3, 0.3])))

    def test_fast_path_matches_generic_when_common_order(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            m = int(rng.integers(1, 11))
            post = random_summary(rng, m)  # independence => common order
            for kind in (LossPairKind.FDP_MDP, LossPairKind.FDP_AMDP):
                spec = LossSpec(kind, rng.uniform(0.2, 2), rng.uniform(0.2, 2), m)
                fast = solve_fdp_mdp(spec, post)
                generic = solve_generic(spec, post)
                np.testing.assert_allclose(fast.h_values, generic.h_values, atol=1e-12)
                assert fast.k_star == generic.k_star
                assert np.array_equal(fast.action, generic.action)

    def test_discordant_psi_falls_back_to_generic(self):
        # psi deliberately ordered against phi: no common descending order
        spec = LossSpec(LossPairKind.FDP_MDP, 1.0, 1.0, 3)
        post = PosteriorSummary(
            phi=np.array([0.9, 0.6, 0.3]), psi=np.array([0.1, 0.3, 0.3])
        )
        fast = solve_fdp_mdp(spec, post)
        generic = solve_generic(spec, post)
        np.testing.assert_allclose(fast.h_values, generic.h_values, atol=1e-12)
        assert np.array_equal(fast.action, generic.action)


class TestOracleEquivalence:
    def test_random_suite(self):
        rng = np.random.default_rng(2024)
        for kind in KINDS:
            for cost_ratio in (0.5, 1.0, 2.0):
                for _ in range(20):
                    m = int(rng.integers(1, 13))
                    spec = LossSpec(kind, cost_ratio, 1.0, m)
                    post = random_summary(rng, m)
                    fast = solve(spec, post)
                    generic = solve_generic(spec, post)
                    oracle = brute_force_oracle(spec, post)
                    assert fast.posterior_loss == pytest.approx(
                        oracle.posterior_loss, abs=1e-12
                    )
                    np.testing.assert_allclose(
                        fast.h_values, generic.h_values, atol=1e-12
                    )
                    assert np.array_equal(fast.action, generic.action)
                    # the reported loss is the literal loss of the action
                    literal = literal_posterior_loss(spec, fast.action, post.phi)
                    assert fast.posterior_loss == pytest.approx(literal, abs=1e-12)

    @given(
        phi=st.lists(
            st.floats(min_value=0.0, max_value=1.0, allow_nan=False), min_size=1, max_size=7
        ),
        c0=st.sampled_from([0.5, 1.0, 2.0]),
    )
    @settings(max_examples=60, deadline=None)
    def test_fdp_fnp_never_beats_oracle(self, phi, c0):
        m = len(phi)
        spec = LossSpec(LossPairKind.FDP_FNP, c0, 1.0, m)
        post = PosteriorSummary(phi=np.array(phi))
        result = solve_fdp_fnp(spec, post)
        oracle = brute_force_oracle(spec, post)
        assert abs(result.posterior_loss - oracle.posterior_loss) <= 1e-12


class TestStructure:
    def test_action_is_rank_prefix(self):
        rng = np.random.default_rng(77)
        for kind in KINDS:
            for _ in range(30):
                m = int(rng.integers(2, 12))
                spec = LossSpec(kind, rng.uniform(0.3, 2), 1.0, m)
                post = random_summary(rng, m)
                result = solve(spec, post)
                if result.k_star in (0, m):
                    continue
                # selection key: low e means reject; no accepted component may
                # have a strictly smaller key than a rejected one, and on key
                # ties the rejected indices must come first
                from compdec.solvers import _e_vector

                e = _e_vector(spec, post, result.k_star)
                rejected = result.action == 1
                max_rej = e[rejected].max()
                min_acc = e[~rejected].min()
                assert max_rej <= min_acc + 1e-15
                if max_rej == min_acc:
                    tied_rej = np.flatnonzero(rejected & (e == max_rej))
                    tied_acc = np.flatnonzero(~rejected & (e == max_rej))
                    assert tied_rej.max() < tied_acc.min()

    def test_result_consistency(self):
        rng = np.random.default_rng(99)
        for kind in KINDS:
            m = 6
            spec = LossSpec(kind, 1.0, 1.0, m)
            post = random_summary(rng, m)
            result = solve(spec, post)
            assert result.action.sum() == result.k_star
            assert result.posterior_loss == pytest.approx(
                result.h_values.min(), abs=1e-12
            )
            assert len(result.h_values) == m + 1
