"""Particle estimates checked against exact enumeration, plus the exact
weight-telescoping identity that pins the increment bookkeeping."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from compdec.copula import CopulaState, GammaFrailty, block_log_density, sample_dependent_block
from compdec.errors import ConfigurationError
from compdec.posteriors import (
    ExponentialPair,
    GaussianSpike,
    SimpleDensityPair,
    TwoGroupGaussian,
    exact_posterior_table,
    posterior_mean_simple,
)
from compdec.smc import (
    GaussianSpikeSmcModel,
    SimpleSmcModel,
    SmcConfig,
    TwoGroupSmcModel,
    increment_composite,
    increment_simple,
    run_smc,
    trial_probability,
    trial_sample_simple,
)

EXP_MODEL = ExponentialPair(lambda0=1.0, lambda1=0.5, n=30)


def dependent_exponential_data(m, pi, kappa, seed):
    """Draw a dataset whose alternative block is frailty-coupled."""
    rng = np.random.default_rng(seed)
    frailty = GammaFrailty(kappa=kappa)
    theta = rng.random(m) < pi
    data = EXP_MODEL.sample_null(m, rng)
    n_alt = int(theta.sum())
    if n_alt:
        t_alt = sample_dependent_block(frailty, EXP_MODEL.stat_ppf, n_alt, rng)
        data[theta] = EXP_MODEL.replicates_given_stat(t_alt, rng)
    return data, theta


class TestTrial:
    def test_mass_matches_marginal_ratio(self):
        # pi = 0.5 and a density ratio q1/q0 = 3 puts mass 0.75 on theta = 1
        model = SimpleDensityPair(q0=lambda x: 0.2 + 0.0 * x, q1=lambda x: 0.6 + 0.0 * x)
        assert_allclose(trial_probability(0.5, model, 1.7), 0.75, rtol=1e-12)

    def test_simple_trial_is_the_exact_posterior(self):
        model = GaussianSpike(sigma2=16.0)
        for x in (-3.0, 0.0, 1.4, 8.0):
            want = posterior_mean_simple(np.array([0.3]), model, np.array([x]))[0]
            assert_allclose(trial_probability(0.3, model, x), want, rtol=1e-12)

    def test_sample_frequencies(self):
        model = GaussianSpike(sigma2=4.0)
        rng = np.random.default_rng(11)
        p1 = trial_probability(0.5, model, 1.2)
        draws = np.array(
            [trial_sample_simple(0.5, model, 1.2, rng)[0] for _ in range(20000)]
        )
        se = np.sqrt(p1 * (1.0 - p1) / draws.size)
        assert abs(draws.mean() - p1) < 3.0 * se

    def test_sample_reports_its_own_log_mass(self):
        model = GaussianSpike(sigma2=4.0)
        rng = np.random.default_rng(3)
        p1 = trial_probability(0.5, model, 0.4)
        theta, log_mass = trial_sample_simple(0.5, model, 0.4, rng)
        assert_allclose(log_mass, np.log(p1 if theta else 1.0 - p1), rtol=1e-12)


class TestIncrements:
    def test_independent_increment_is_the_normalizer(self):
        # Without coupling the exact increment is log((1-pi) q0 + pi q1),
        # independently of the drawn theta.
        model = GaussianSpike(sigma2=9.0)
        lq0 = model.log_marginal(1.1, 0)
        lq1 = model.log_marginal(1.1, 1)
        want = np.logaddexp(np.log(0.6) + lq0, np.log(0.4) + lq1)
        for theta in (0, 1):
            got, state = increment_simple(0.4, model, None, CopulaState(), 1.1, theta)
            assert_allclose(got, want, rtol=1e-12)
            assert state.k == 0

    def test_first_coupled_component_matches_independent(self):
        # The first alternative in a block contributes its marginal density,
        # so the increment equals the independent normalizer exactly.
        frailty = GammaFrailty(kappa=2.0)
        row = EXP_MODEL.sample_null(1, np.random.default_rng(0))[0]
        lq0, cdf1, lq1 = EXP_MODEL.dependence_terms(row)
        want = np.logaddexp(np.log(0.7) + lq0[0], np.log(0.3) + lq1[0])
        got, state = increment_simple(0.3, EXP_MODEL, frailty, CopulaState(), row, 1)
        assert_allclose(got, want, rtol=1e-12)
        assert state.k == 1

    def test_second_coupled_component_uses_conditional_density(self):
        frailty = GammaFrailty(kappa=1.5)
        rng = np.random.default_rng(5)
        rows = EXP_MODEL.sample_alt_iid(2, rng)
        lq0, cdf1, lq1 = EXP_MODEL.dependence_terms(rows)
        _, state1 = increment_simple(0.3, EXP_MODEL, frailty, CopulaState(), rows[0], 1)
        got, state2 = increment_simple(0.3, EXP_MODEL, frailty, state1, rows[1], 1)
        joint = block_log_density(frailty, cdf1, lq1)
        conditional = joint - lq1[0]
        # the trial itself is built from the marginal density; the increment
        # is the trial normalizer times conditional / marginal
        norm = np.logaddexp(np.log(0.7) + lq0[1], np.log(0.3) + lq1[1])
        assert_allclose(got, norm + conditional - lq1[1], rtol=1e-11)
        assert state2.k == 2

    def test_null_components_leave_the_block_alone(self):
        frailty = GammaFrailty(kappa=2.0)
        row = EXP_MODEL.sample_null(1, np.random.default_rng(1))[0]
        _, state = increment_simple(0.3, EXP_MODEL, frailty, CopulaState(), row, 0)
        assert state.k == 0 and state.ell == 0.0

    def test_huge_kappa_conditional_reduces_to_marginal(self):
        frailty = GammaFrailty(kappa=1e6)
        rng = np.random.default_rng(9)
        rows = EXP_MODEL.sample_alt_iid(2, rng)
        lq0, _, lq1 = EXP_MODEL.dependence_terms(rows)
        _, state1 = increment_simple(0.3, EXP_MODEL, frailty, CopulaState(), rows[0], 1)
        got, _ = increment_simple(0.3, EXP_MODEL, frailty, state1, rows[1], 1)
        want = np.logaddexp(np.log(0.7) + lq0[1], np.log(0.3) + lq1[1])
        assert_allclose(got, want, atol=1e-4)

    def test_composite_increment_normalizer_and_state(self):
        model = GaussianSpike(sigma2=16.0)
        rng = np.random.default_rng(2)
        got, state = increment_composite(0.5, model, None, CopulaState(), 0.8, 0, rng)
        # theta = 0 has no nuisance: the increment is exactly the plug-in
        # normalizer log((1-pi) q0 + pi qhat1).
        lq0 = model.log_marginal(0.8, 0)
        want = np.logaddexp(
            np.log(0.5) + lq0, np.log(0.5) - 0.5 * np.log(2.0 * np.pi)
        )
        assert_allclose(got, want, rtol=1e-12)
        assert state.k == 0

    def test_composite_increment_averages_to_the_marginal(self):
        # Conditional on theta = 1, averaging exp(increment) over the nuisance
        # draw gives Nhat * q1 / qhat1; combined with the theta = 0 branch and
        # the trial mass this makes the whole step unbiased for the exact
        # normalizer (1 - pi) q0 + pi q1.
        model = GaussianSpike(sigma2=4.0)
        rng = np.random.default_rng(7)
        x = 1.3
        draws = np.array(
            [increment_composite(0.4, model, None, CopulaState(), x, 1, rng)[0]
             for _ in range(200000)]
        )
        lq0 = model.log_marginal(x, 0)
        lq1 = model.log_marginal(x, 1)
        lq1_hat = -0.5 * np.log(2.0 * np.pi)
        n_hat = np.exp(np.logaddexp(np.log(0.6) + lq0, np.log(0.4) + lq1_hat))
        want_cond = n_hat * np.exp(lq1 - lq1_hat)
        est = np.exp(draws).mean()
        se = np.exp(draws).std() / np.sqrt(draws.size)
        assert abs(est - want_cond) < 4.0 * se
        # and the full-step average equals the exact normalizer
        p1 = np.exp(np.log(0.4) + lq1_hat - np.log(n_hat))
        full = (1.0 - p1) * n_hat + p1 * want_cond
        n_exact = np.exp(np.logaddexp(np.log(0.6) + lq0, np.log(0.4) + lq1))
        assert_allclose(full, n_exact, rtol=1e-10)


class TestRunSmc:
    def test_equal_weights_for_independent_simple_runs(self):
        # With exact marginals and no coupling every increment is a constant
        # per component, so the ESS stays pinned at R.
        data, _ = dependent_exponential_data(8, 0.4, 2.0, seed=21)
        cfg = SmcConfig(r=64, seed=1)
        out = run_smc(cfg, 0.3, EXP_MODEL, data)
        assert_allclose(out.ess_trace, 64.0, rtol=1e-9)
        assert out.resample_count == 0

    def test_independent_estimate_hits_product_posterior(self):
        data, _ = dependent_exponential_data(10, 0.4, 2.0, seed=33)
        phi = posterior_mean_simple(0.3, EXP_MODEL, data)
        out = run_smc(SmcConfig(r=20000, seed=4), 0.3, EXP_MODEL, data)
        assert np.max(np.abs(out.phi_hat - phi)) < 0.02

    def test_dependent_estimates_match_exact_table(self):
        frailty = GammaFrailty(kappa=2.0)
        data, _ = dependent_exponential_data(12, 0.3, 2.0, seed=5)
        table = exact_posterior_table(0.3, EXP_MODEL, data, frailty=frailty)
        phi, psi = table.phi(), table.psi()
        for seed in (0, 1, 2):
            out = run_smc(
                SmcConfig(r=20000, seed=seed), 0.3, EXP_MODEL, data,
                frailty=frailty, estimands=("phi", "psi"),
            )
            assert np.max(np.abs(out.phi_hat - phi)) <= 0.02
            assert np.max(np.abs(out.psi_hat - psi)) <= 0.02

    def test_small_particle_count_stays_within_wide_band(self):
        frailty = GammaFrailty(kappa=2.0)
        data, _ = dependent_exponential_data(12, 0.3, 2.0, seed=5)
        table = exact_posterior_table(0.3, EXP_MODEL, data, frailty=frailty)
        out = run_smc(SmcConfig(r=1000, seed=17), 0.3, EXP_MODEL, data, frailty=frailty)
        assert np.max(np.abs(out.phi_hat - table.phi())) <= 0.06

    def test_ess_bounds_and_trace_length(self):
        frailty = GammaFrailty(kappa=1.0)
        data, _ = dependent_exponential_data(12, 0.5, 1.0, seed=8)
        out = run_smc(SmcConfig(r=500, seed=2), 0.3, EXP_MODEL, data, frailty=frailty)
        assert out.ess_trace.shape == (12,)
        assert np.all(out.ess_trace >= 1.0 - 1e-9)
        assert np.all(out.ess_trace <= 500.0 + 1e-9)

    def test_resampling_triggers_and_keeps_estimates_sane(self):
        frailty = GammaFrailty(kappa=2.0)
        data, _ = dependent_exponential_data(12, 0.3, 2.0, seed=5)
        table = exact_posterior_table(0.3, EXP_MODEL, data, frailty=frailty)
        for scheme in ("multinomial", "systematic"):
            cfg = SmcConfig(r=20000, rho=0.995, seed=3, resampling=scheme)
            out = run_smc(cfg, 0.3, EXP_MODEL, data, frailty=frailty)
            assert out.resample_count >= 1
            assert np.max(np.abs(out.phi_hat - table.phi())) <= 0.03

    def test_same_seed_reproduces_bitwise(self):
        frailty = GammaFrailty(kappa=2.0)
        data, _ = dependent_exponential_data(12, 0.3, 2.0, seed=5)
        a = run_smc(SmcConfig(r=2000, seed=42), 0.3, EXP_MODEL, data, frailty=frailty)
        b = run_smc(SmcConfig(r=2000, seed=42), 0.3, EXP_MODEL, data, frailty=frailty)
        assert np.array_equal(a.phi_hat, b.phi_hat)
        assert np.array_equal(a.ess_trace, b.ess_trace)
        c = run_smc(SmcConfig(r=2000, seed=43), 0.3, EXP_MODEL, data, frailty=frailty)
        assert not np.array_equal(a.phi_hat, c.phi_hat)

    def test_psi_adjusted_estimand(self):
        frailty = GammaFrailty(kappa=2.0)
        data, _ = dependent_exponential_data(10, 0.3, 2.0, seed=12)
        table = exact_posterior_table(0.3, EXP_MODEL, data, frailty=frailty)
        out = run_smc(
            SmcConfig(r=20000, seed=6), 0.3, EXP_MODEL, data, frailty=frailty,
            estimands=("phi", "psi", "psi_adj"),
        )
        assert np.max(np.abs(out.psi_adj_hat - table.psi(adjusted=True))) <= 0.02
        # each particle's psi_adj row sums below 1, so the estimate must too
        assert out.psi_adj_hat.sum() < 1.0 + 1e-9

    def test_estimand_subset_and_validation(self):
        data, _ = dependent_exponential_data(6, 0.3, 2.0, seed=1)
        out = run_smc(SmcConfig(r=100, seed=0), 0.3, EXP_MODEL, data, estimands=("phi",))
        assert out.psi_hat is None and out.psi_adj_hat is None
        with pytest.raises(ConfigurationError):
            run_smc(SmcConfig(r=100, seed=0), 0.3, EXP_MODEL, data, estimands=("fdr",))

    def test_config_validation(self):
        with pytest.raises(ConfigurationError):
            SmcConfig(r=1)
        with pytest.raises(ConfigurationError):
            SmcConfig(rho=0.0)
        with pytest.raises(ConfigurationError):
            SmcConfig(resampling="stratified")

    def test_composite_mode_rejections(self):
        data, _ = dependent_exponential_data(4, 0.3, 2.0, seed=2)
        with pytest.raises(ConfigurationError):
            run_smc(SmcConfig(r=100, seed=0), 0.3, EXP_MODEL, data, mode="composite")
        with pytest.raises(ConfigurationError):
            run_smc(SmcConfig(r=100, seed=0), 0.3, EXP_MODEL, data, mode="psi")


class TestTelescoping:
    """With resampling disabled, each final log weight must equal
    log pi(theta) + log q_theta(x) - log g(theta | x) exactly."""

    def target_log_weight(self, thetas, pi, adapter, frailty, lq0, cdf1, lq1):
        out = np.empty(thetas.shape[0])
        for r, th in enumerate(thetas):
            th = th.astype(bool)
            log_prior = np.log(pi) * th.sum() + np.log1p(-pi) * (~th).sum()
            log_q = lq0[~th].sum()
            if th.any():
                log_q += block_log_density(frailty, cdf1[th], lq1[th])
            log_g = np.log(adapter.p1[th]).sum() + np.log1p(-adapter.p1[~th]).sum()
            out[r] = log_prior + log_q - log_g
        return out

    def test_final_weights_telescope(self):
        frailty = GammaFrailty(kappa=2.0)
        data, _ = dependent_exponential_data(12, 0.3, 2.0, seed=5)
        lq0, cdf1, lq1 = EXP_MODEL.dependence_terms(data)
        adapter = SimpleSmcModel(np.full(12, 0.3), EXP_MODEL, data, frailty)
        cfg = SmcConfig(r=300, rho=1e-12, seed=7, keep_particles=True)
        out = run_smc(cfg, 0.3, EXP_MODEL, data, frailty=frailty)
        assert out.resample_count == 0
        ps = out.particles
        want = self.target_log_weight(ps.thetas, 0.3, adapter, frailty, lq0, cdf1, lq1)
        assert np.max(np.abs(ps.log_weights - want)) < 1e-10


class TestCompositeModels:
    def test_gaussian_spike_composite_converges_to_exact_posterior(self):
        model = GaussianSpike(sigma2=16.0)
        rng = np.random.default_rng(14)
        theta = rng.random(8) < 0.5
        x = model.sample(theta.astype(int), rng)
        phi = posterior_mean_simple(0.5, model, x)
        out = run_smc(SmcConfig(r=40000, seed=10), 0.5, model, x, mode="composite")
        assert np.max(np.abs(out.phi_hat - phi)) < 0.03

    def test_gaussian_spike_composite_with_frailty_runs(self):
        model = GaussianSpike(sigma2=4.0)
        frailty = GammaFrailty(kappa=1e7)
        rng = np.random.default_rng(15)
        x = model.sample(np.array([0, 1, 1, 0, 1]), rng)
        phi = posterior_mean_simple(0.5, model, x)
        # with a near-degenerate frailty the coupled run reduces to independence
        out = run_smc(
            SmcConfig(r=40000, seed=11), 0.5, model, x, frailty=frailty, mode="composite"
        )
        assert np.max(np.abs(out.phi_hat - phi)) < 0.03

    def test_two_group_composite_converges_to_exact_posterior(self):
        model = TwoGroupGaussian(k0=200.0, alpha=4.0, beta=4.0, nu=20.0, n1=5, n2=5)
        rng = np.random.default_rng(16)
        data = model.sample(np.array([0, 1, 0, 1]), rng)
        phi = posterior_mean_simple(0.1, model, data)
        out = run_smc(SmcConfig(r=40000, seed=12), 0.1, model, data, mode="composite")
        assert np.max(np.abs(out.phi_hat - phi)) < 0.04

    def test_two_group_composite_rejects_frailty(self):
        model = TwoGroupGaussian(k0=200.0, alpha=4.0, beta=4.0, nu=20.0, n1=5, n2=5)
        rng = np.random.default_rng(17)
        data = model.sample(np.array([0, 1]), rng)
        with pytest.raises(ConfigurationError):
            TwoGroupSmcModel(0.1, model, data, frailty=GammaFrailty(kappa=1.0))

    def test_plugin_dominates_every_likelihood_value(self):
        # qhat is the likelihood maximized over mean and variance, so the
        # composite log increment never exceeds the normalizer.
        model = TwoGroupGaussian(k0=200.0, alpha=4.0, beta=4.0, nu=20.0, n1=5, n2=5)
        rng = np.random.default_rng(18)
        data = model.sample(np.array([1, 0, 1]), rng)
        adapter = TwoGroupSmcModel(np.full(3, 0.1), model, data)
        th = rng.random(256) < 0.5
        k = np.zeros(256, dtype=np.int64)
        ell = np.zeros(256)
        for j in range(3):
            dlogw, _, _ = adapter.increment(j, th, k, ell, rng)
            assert np.all(dlogw <= adapter.log_norm[j] + 1e-9)
