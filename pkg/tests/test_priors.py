import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import beta as beta_dist

from mtdbayes.probcore import RngStream
from mtdbayes.priors import (
    DirichletSpec,
    SBMSpec,
    SDMSpec,
    dirichlet_log_density,
    dirichlet_marginal_loglik,
    dirichlet_sample,
    sbm_marginal_loglik,
    sbm_mimic_dirichlet,
    sbm_posterior_sample,
    sbm_sample,
    sdm_log_density,
    sdm_posterior_sample,
    sdm_sample,
)


def simple_sbm(j, pi1=0.25, pi3=0.25, eta=10.0, gamma=None, delta=None):
    """SBM spec over length-j vectors with constant mixture weights."""
    m = j - 1
    if gamma is None:
        gamma = np.ones(m)
    if delta is None:
        delta = np.ones(m)
    return SBMSpec(np.full(m, pi1), np.full(m, pi3), eta, gamma, delta)


def chain_rule_loglik(alpha, sequence):
    """Sequential log predictive probability of a categorical sequence under a
    Dirichlet prior; independent oracle for the closed-form marginal.
    """
    alpha = np.asarray(alpha, dtype=float)
    seen = np.zeros_like(alpha)
    total = 0.0
    for x in sequence:
        total += np.log((alpha[x] + seen[x]) / (alpha.sum() + seen.sum()))
        seen[x] += 1
    return total


class TestDirichlet:
    def test_uniform_density_is_one(self):
        assert dirichlet_log_density(DirichletSpec([1.0, 1.0]), [0.3, 0.7]) == pytest.approx(0.0)

    def test_linear_density(self):
        assert dirichlet_log_density(DirichletSpec([2.0, 1.0]), [0.5, 0.5]) == pytest.approx(0.0)

    def test_beta22_midpoint(self):
        # Beta(2,2) at 1/2: Gamma(4)/(Gamma(2)Gamma(2)) * 0.25 = 1.5.
        got = dirichlet_log_density(DirichletSpec([2.0, 2.0]), [0.5, 0.5])
        assert got == pytest.approx(np.log(1.5))

    def test_boundary_zero_density(self):
        assert dirichlet_log_density(DirichletSpec([2.0, 1.0]), [0.0, 1.0]) == -np.inf

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            dirichlet_log_density(DirichletSpec([1.0, 1.0]), [0.2, 0.3, 0.5])

    def test_sample_moments(self):
        draws = dirichlet_sample(DirichletSpec([1.0, 1.0, 1.0]), RngStream(5), size=100_000)
        se = np.sqrt((1 / 3) * (2 / 3) / 4 / 100_000)
        np.testing.assert_allclose(draws.mean(axis=0), 1 / 3, atol=3 * se)

    def test_sample_concentration(self):
        draws = dirichlet_sample(DirichletSpec([1e6, 1.0]), RngStream(6), size=10_000)
        assert draws[:, 0].mean() > 0.999

    def test_sample_on_simplex(self):
        draws = dirichlet_sample(DirichletSpec([0.3, 0.5, 2.0]), RngStream(7), size=1000)
        assert np.all(draws >= 0)
        np.testing.assert_allclose(draws.sum(axis=1), 1.0, atol=1e-10)


class TestDirichletMarginal:
    def test_uniform_predictive(self):
        assert dirichlet_marginal_loglik(DirichletSpec([1.0, 1.0]), [1, 0]) == pytest.approx(np.log(0.5))

    def test_beta_function_evaluation(self):
        got = dirichlet_marginal_loglik(DirichletSpec([1.0, 1.0]), [2, 1])
        assert got == pytest.approx(np.log(1 / 12))

    def test_empty_counts(self):
        assert dirichlet_marginal_loglik(DirichletSpec([0.5, 1.5, 2.0]), [0, 0, 0]) == 0.0

    def test_chain_rule_oracle_order_invariant(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            j = rng.integers(2, 6)
            alpha = rng.uniform(0.2, 3.0, j)
            counts = rng.integers(0, 5, j)
            closed = dirichlet_marginal_loglik(DirichletSpec(alpha), counts)
            seq = np.repeat(np.arange(j), counts)
            for _ in range(3):
                rng.shuffle(seq)
                assert closed == pytest.approx(chain_rule_loglik(alpha, seq), abs=1e-10)


class TestSDM:
    def test_beta_one_degenerates_to_dirichlet(self):
        spec = SDMSpec([0.7, 1.3, 2.0], beta=1.0)
        dspec = DirichletSpec(spec.alpha)
        rng = np.random.default_rng(3)
        for _ in range(100):
            theta = rng.dirichlet([1.0, 1.0, 1.0])
            theta = np.clip(theta, 1e-6, None)
            theta /= theta.sum()
            assert sdm_log_density(spec, theta) == pytest.approx(
                dirichlet_log_density(dspec, theta), abs=1e-12
            )

    def test_two_component_midpoint(self):
        # 0.5*Dir(3,1) + 0.5*Dir(1,3) at (0.5, 0.5) has density 0.75.
        got = sdm_log_density(SDMSpec([1.0, 1.0], beta=2.0), [0.5, 0.5])
        assert got == pytest.approx(np.log(0.75))

    def test_symmetry_under_permutation(self):
        spec = SDMSpec([0.5, 0.5, 0.5], beta=3.0)
        theta = np.array([0.2, 0.3, 0.5])
        for perm in ([1, 0, 2], [2, 1, 0], [1, 2, 0]):
            assert sdm_log_density(spec, theta[perm]) == pytest.approx(
                sdm_log_density(spec, theta), abs=1e-12
            )

    def test_density_integrates_to_one(self):
        """Importance sampling against a uniform Dirichlet proposal."""
        spec = SDMSpec([0.8, 1.2, 1.5], beta=4.0)
        rng = RngStream(21)
        n = 200_000
        proposal = DirichletSpec(np.ones(3))
        draws = dirichlet_sample(proposal, rng, size=n)
        draws = np.clip(draws, 1e-12, None)
        draws /= draws.sum(axis=1, keepdims=True)
        logratio = np.array(
            [sdm_log_density(spec, th) - dirichlet_log_density(proposal, th) for th in draws[:2000]]
        )
        w = np.exp(logratio)
        est, se = w.mean(), w.std(ddof=1) / np.sqrt(w.size)
        assert abs(est - 1.0) < 3 * se

    def test_posterior_beta_one_matches_dirichlet_posterior(self):
        counts = np.array([3, 1])
        spec = SDMSpec([1.0, 2.0], beta=1.0)
        draws = sdm_posterior_sample(spec, counts, RngStream(9), size=200_000)
        target = (spec.alpha + counts) / (spec.alpha + counts).sum()
        se = draws[:, 0].std(ddof=1) / np.sqrt(draws.shape[0])
        assert abs(draws[:, 0].mean() - target[0]) < 3 * se

    def test_posterior_boost_selection(self):
        """With counts (50, 0) and a strong boost, the data-supported
        component is selected essentially always."""
        from scipy.special import gammaln

        alpha, beta_, counts = np.array([1.0, 1.0]), 100.0, np.array([50, 0])
        post = alpha + counts
        lw = gammaln(post + beta_) - gammaln(post)
        p1 = 1.0 / (1.0 + np.exp(lw[1] - lw[0]))
        assert p1 > 0.99  # exact weight computation
        draws = sdm_posterior_sample(SDMSpec(alpha, beta_), counts, RngStream(13), size=10_000)
        # Boosted component 0 shows up as a draw concentrated near 1.
        assert np.mean(draws[:, 0] > 0.5) > 0.99

    def test_posterior_mean_matches_quadrature(self):
        """Two-category Bayes check against numerical quadrature."""
        spec = SDMSpec([1.5, 0.8], beta=5.0)
        counts = np.array([2, 1])

        def post_unnorm(t):
            theta = np.array([t, 1 - t])
            return np.exp(sdm_log_density(spec, theta)) * t ** counts[0] * (1 - t) ** counts[1]

        z, _ = quad(post_unnorm, 0, 1)
        m1, _ = quad(lambda t: t * post_unnorm(t), 0, 1)
        target = m1 / z
        draws = sdm_posterior_sample(spec, counts, RngStream(31), size=500_000)
        assert abs(draws[:, 0].mean() - target) < 1e-3


class TestSBMSampling:
    def test_prior_with_zero_counts_matches_sbm_sample(self):
        spec = simple_sbm(4, eta=50.0)
        a = sbm_sample(spec, RngStream(2), size=5)
        b = sbm_posterior_sample(spec, [0, 0, 0, 0], RngStream(2), size=5)
        np.testing.assert_array_equal(a, b)

    def test_shrinkage_component_empties_early_breaks(self):
        spec = simple_sbm(4, pi1=1.0, pi3=0.0, eta=1e6)
        draws = sbm_sample(spec, RngStream(3), size=2000)
        assert np.all(draws[:, :3] < 1e-3)
        assert np.all(draws[:, 3] > 0.99)

    def test_consume_component_fills_first(self):
        m = 3
        spec = SBMSpec([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], 1e6, np.ones(m), np.ones(m))
        draws = sbm_sample(spec, RngStream(4), size=2000)
        assert np.all(draws[:, 0] > 0.999)

    def test_output_on_simplex(self):
        spec = simple_sbm(5, eta=100.0)
        draws = sbm_sample(spec, RngStream(5), size=5000)
        assert np.all(draws >= 0)
        np.testing.assert_allclose(draws.sum(axis=1), 1.0, atol=1e-10)

    def test_generalized_dirichlet_posterior_means(self):
        """With pi2 = 1 the posterior break means have the conjugate
        beta-update closed form."""
        gamma = np.array([1.2, 0.7, 2.0])
        delta = np.array([2.5, 1.1, 0.9])
        spec = SBMSpec(np.zeros(3), np.zeros(3), 10.0, gamma, delta)
        counts = np.array([3, 0, 2, 1])
        n = 400_000
        draws = sbm_posterior_sample(spec, counts, RngStream(6), size=n)
        # Recover break fractions from the draws: x_j = theta_j / remaining_j.
        remaining = 1.0 - np.concatenate(
            [np.zeros((n, 1)), np.cumsum(draws[:, :-2], axis=1)], axis=1
        )
        x = draws[:, :3] / remaining
        tail = np.array([counts[1:].sum(), counts[2:].sum(), counts[3:].sum()])
        target = (gamma + counts[:3]) / (gamma + delta + counts[:3] + tail)
        se = x.std(axis=0, ddof=1) / np.sqrt(n)
        np.testing.assert_array_less(np.abs(x.mean(axis=0) - target), 3 * se + 1e-12)

    def test_concentrated_counts_pull_posterior_up(self):
        spec = simple_sbm(3, pi1=0.3, pi3=0.2, eta=20.0)
        prior = sbm_sample(spec, RngStream(7), size=10_000)
        post = sbm_posterior_sample(spec, [100, 0, 0], RngStream(8), size=10_000)
        assert post[:, 0].mean() > prior[:, 0].mean()

    def test_posterior_mean_matches_quadrature(self):
        """Two-category Bayes check against numerical quadrature of the
        mixture-of-betas posterior for the single break fraction."""
        spec = SBMSpec([0.3], [0.2], 5.0, [1.5], [2.0])
        counts = np.array([2, 1])
        weights = [0.3, 0.5, 0.2]
        shapes = [(1.0, 5.0), (1.5, 2.0), (5.0, 1.0)]

        def post_unnorm(t):
            prior = sum(w * beta_dist.pdf(t, a, b) for w, (a, b) in zip(weights, shapes))
            return prior * t ** counts[0] * (1 - t) ** counts[1]

        z, _ = quad(post_unnorm, 0, 1)
        m1, _ = quad(lambda t: t * post_unnorm(t), 0, 1)
        target = m1 / z
        draws = sbm_posterior_sample(spec, counts, RngStream(9), size=500_000)
        assert abs(draws[:, 0].mean() - target) < 1e-3


class TestSBMMarginal:
    def test_zero_counts(self):
        assert sbm_marginal_loglik(simple_sbm(4), [0, 0, 0, 0]) == pytest.approx(0.0)

    def test_matches_dirichlet_when_mimicking(self):
        """Pure-Beta stick breaking with matched shapes is a Dirichlet, so the
        marginals must agree exactly."""
        rng = np.random.default_rng(17)
        for _ in range(20):
            j = int(rng.integers(2, 6))
            alpha = rng.uniform(0.3, 2.5, j)
            gamma, delta = sbm_mimic_dirichlet(alpha)
            spec = SBMSpec(np.zeros(j - 1), np.zeros(j - 1), 7.0, gamma, delta)
            counts = rng.integers(0, 6, j)
            assert sbm_marginal_loglik(spec, counts) == pytest.approx(
                dirichlet_marginal_loglik(DirichletSpec(alpha), counts), abs=1e-10
            )

    def test_matches_monte_carlo_integration(self):
        """E_prior[prod theta^n] estimated from prior draws brackets the
        closed form within 3 Monte Carlo standard errors."""
        rng = np.random.default_rng(23)
        stream = RngStream(29)
        n_draws = 100_000
        for case in range(20):
            j = int(rng.integers(2, 6))
            pi1 = rng.uniform(0, 0.5, j - 1)
            pi3 = rng.uniform(0, 0.4, j - 1)
            spec = SBMSpec(pi1, pi3, rng.uniform(0.5, 8.0), rng.uniform(0.5, 3.0, j - 1), rng.uniform(0.5, 3.0, j - 1))
            counts = rng.multinomial(int(rng.integers(1, 11)), np.full(j, 1 / j))
            draws = sbm_sample(spec, stream, size=n_draws)
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = np.exp(np.where(counts > 0, np.log(draws) * counts, 0.0).sum(axis=1))
            vals = np.nan_to_num(vals)
            est = vals.mean()
            se = vals.std(ddof=1) / np.sqrt(n_draws)
            truth = np.exp(sbm_marginal_loglik(spec, counts))
            assert abs(est - truth) < 3 * se + 1e-12, f"case {case}"


class TestMimicDirichlet:
    def test_unit_shapes(self):
        gamma, delta = sbm_mimic_dirichlet([1.0, 1.0, 1.0])
        np.testing.assert_allclose(gamma, [1.0, 1.0])
        np.testing.assert_allclose(delta, [2.0, 1.0])

    def test_third_shapes(self):
        gamma, delta = sbm_mimic_dirichlet([1 / 3, 1 / 3, 1 / 3])
        np.testing.assert_allclose(gamma, [1 / 3, 1 / 3])
        np.testing.assert_allclose(delta, [2 / 3, 1 / 3])

    def test_delta_scale_knob(self):
        _, delta = sbm_mimic_dirichlet([1.0, 1.0, 1.0], delta_scale=0.5)
        np.testing.assert_allclose(delta, [1.0, 0.5])

    def test_moment_match(self):
        alpha = np.array([0.5, 1.0, 1.5])
        gamma, delta = sbm_mimic_dirichlet(alpha)
        spec = SBMSpec(np.zeros(2), np.zeros(2), 3.0, gamma, delta)
        n = 1_000_000
        draws = sbm_sample(spec, RngStream(37), size=n)
        target = alpha / alpha.sum()
        se = draws.std(axis=0, ddof=1) / np.sqrt(n)
        np.testing.assert_array_less(np.abs(draws.mean(axis=0) - target), 3 * se)


class TestSpecValidation:
    def test_sdm_requires_beta_at_least_one(self):
        with pytest.raises(ValueError):
            SDMSpec([1.0, 1.0], beta=0.5)

    def test_sbm_weight_constraint(self):
        with pytest.raises(ValueError):
            SBMSpec([0.7], [0.6], 1.0, [1.0], [1.0])

    def test_sbm_length_mismatch(self):
        with pytest.raises(ValueError):
            SBMSpec([0.1, 0.1], [0.1], 1.0, [1.0, 1.0], [1.0, 1.0])
