import numpy as np
import pytest
from scipy import stats

from confspec import (
    Dataset,
    InvalidInput,
    ModelParams,
    SingularCovariance,
    SymMatrix,
    beta_prime,
    correlative_strength,
    empirical_covariances,
    ground_truth,
    regression_vector,
    replication_rng,
    sample_dataset,
    sample_params,
    true_sigma_xx,
)


def two_dim_reference():
    # closed-form 2x2 case: sigma_xx = diag(2, 1), regression vector (0.5, 1)
    return ModelParams(a=np.array([0.0, 1.0]), b=np.array([1.0, 0.0]), c=1.0,
                       sigma_ee=SymMatrix(np.eye(2)), sigma_f=1.0)


class TestModelParams:
    def test_rejects_negative_sigma_f(self):
        with pytest.raises(InvalidInput):
            ModelParams(a=np.zeros(2), b=np.zeros(2), c=0.0,
                        sigma_ee=SymMatrix(np.eye(2)), sigma_f=-1.0)

    def test_rejects_indefinite_noise(self):
        with pytest.raises(InvalidInput):
            ModelParams(a=np.zeros(2), b=np.zeros(2), c=0.0,
                        sigma_ee=SymMatrix(np.diag([1.0, -1.0])))

    def test_rejects_mismatched_vectors(self):
        with pytest.raises(InvalidInput):
            ModelParams(a=np.zeros(3), b=np.zeros(2), c=0.0,
                        sigma_ee=SymMatrix(np.eye(2)))


class TestSampleParams:
    def test_deterministic_given_seed(self):
        p1 = sample_params(3, np.random.default_rng(123))
        p2 = sample_params(3, np.random.default_rng(123))
        assert np.array_equal(p1.a, p2.a)
        assert np.array_equal(p1.b, p2.b)
        assert p1.c == p2.c
        assert np.array_equal(p1.sigma_ee.entries, p2.sigma_ee.entries)

    def test_radius_distribution(self):
        # radii are Uniform(0,1): the mean of ||a|| over many seeds is ~0.5
        norms = [np.linalg.norm(sample_params(20, replication_rng(7, rep)).a)
                 for rep in range(1000)]
        assert np.mean(norms) == pytest.approx(0.5, abs=0.03)

    def test_direction_uniform_on_circle(self):
        angles = []
        for rep in range(800):
            p = sample_params(2, replication_rng(21, rep))
            angles.append(np.arctan2(p.a[1], p.a[0]))
        res = stats.kstest(angles, stats.uniform(loc=-np.pi, scale=2 * np.pi).cdf)
        assert res.pvalue > 0.01

    def test_sigma_f_is_one(self):
        assert sample_params(4, np.random.default_rng(0)).sigma_f == 1.0


class TestSampleDataset:
    def test_disconnected_confounder_uncorrelated(self):
        d = 3
        p = ModelParams(a=np.ones(d), b=np.zeros(d), c=0.0, sigma_ee=SymMatrix(np.eye(d)))
        ds = sample_dataset(p, 10_000, np.random.default_rng(5))
        for j in range(d):
            corr = np.corrcoef(ds.x[:, j], ds.z)[0, 1]
            assert abs(corr) <= 0.05

    def test_purely_anticausal_target_copies_confounder(self):
        d = 4
        p = ModelParams(a=np.zeros(d), b=np.ones(d), c=1.0,
                        sigma_ee=SymMatrix(np.eye(d)), sigma_f=0.0)
        ds = sample_dataset(p, 50, np.random.default_rng(9))
        assert np.array_equal(ds.y, ds.z)

    def test_replay_identical(self):
        p = sample_params(5, np.random.default_rng(1))
        d1 = sample_dataset(p, 100, np.random.default_rng(77))
        d2 = sample_dataset(p, 100, np.random.default_rng(77))
        assert np.array_equal(d1.x, d2.x)
        assert np.array_equal(d1.y, d2.y)
        assert np.array_equal(d1.z, d2.z)

    def test_n_below_one_rejected(self):
        p = sample_params(2, np.random.default_rng(0))
        with pytest.raises(InvalidInput):
            sample_dataset(p, 0, np.random.default_rng(0))


class TestTrueSigmaXX:
    def test_rank_one_addition(self):
        p = ModelParams(a=np.zeros(2), b=np.array([1.0, 0.0]), c=0.0,
                        sigma_ee=SymMatrix(np.eye(2)))
        assert np.allclose(true_sigma_xx(p).entries, np.diag([2.0, 1.0]))

    def test_no_loading_leaves_noise(self):
        p = sample_params(4, np.random.default_rng(2))
        p0 = ModelParams(a=p.a, b=np.zeros(4), c=p.c, sigma_ee=p.sigma_ee)
        assert np.array_equal(true_sigma_xx(p0).entries, p.sigma_ee.entries)

    def test_matches_sampled_covariance(self):
        rng = np.random.default_rng(31)
        p = sample_params(3, rng)
        ds = sample_dataset(p, 1_000_000, rng)
        emp = np.cov(ds.x, rowvar=False)
        assert np.abs(emp - true_sigma_xx(p).entries).max() <= 0.01 * max(
            1.0, np.abs(true_sigma_xx(p).entries).max())


class TestGroundTruth:
    def test_no_confounder_coupling(self):
        p = sample_params(4, np.random.default_rng(3))
        p0 = ModelParams(a=p.a, b=p.b, c=0.0, sigma_ee=p.sigma_ee)
        gt = ground_truth(p0)
        assert gt.beta == 0.0
        assert gt.gamma == 0.0

    def test_purely_confounded(self):
        p = ModelParams(a=np.zeros(3), b=np.array([1.0, 0.5, 0.0]), c=2.0,
                        sigma_ee=SymMatrix(np.eye(3)))
        gt = ground_truth(p)
        assert gt.beta == 1.0
        assert gt.gamma == 1.0

    def test_two_dim_closed_form(self):
        gt = ground_truth(two_dim_reference())
        assert gt.beta == pytest.approx(0.2, rel=1e-12)
        assert gt.gamma == pytest.approx(0.5, rel=1e-12)
        assert gt.eta == pytest.approx(1.0, rel=1e-12)
        assert np.allclose(gt.a_hat_pop, [0.5, 1.0], rtol=1e-12)

    def test_singular_covariance_rejected(self):
        p = ModelParams(a=np.zeros(2), b=np.zeros(2), c=0.0,
                        sigma_ee=SymMatrix(np.diag([1.0, 0.0])))
        with pytest.raises(SingularCovariance):
            ground_truth(p)

    @pytest.mark.parametrize("seed", range(10))
    def test_strengths_in_unit_interval(self, seed):
        gt = ground_truth(sample_params(8, np.random.default_rng(seed)))
        assert 0.0 <= gt.beta <= 1.0
        assert 0.0 <= gt.gamma <= 1.0
        assert gt.eta >= 0.0

    def test_eta_rotation_invariant(self):
        rng = np.random.default_rng(17)
        p = sample_params(6, rng)
        q = np.linalg.qr(rng.standard_normal((6, 6)))[0]
        rotated = ModelParams(a=p.a, b=q @ p.b, c=p.c, sigma_ee=p.sigma_ee)
        assert ground_truth(rotated).eta == pytest.approx(ground_truth(p).eta, rel=1e-12)


class TestGammaScaleInvariance:
    def test_power_of_two_rescaling_exact(self):
        # (b, c) -> (s b, c / s) holding the observed covariance fixed leaves the
        # correlative ratio bit-identical for power-of-two factors
        p = sample_params(7, np.random.default_rng(29))
        sxx = true_sigma_xx(p)
        base = correlative_strength(sxx, p.a, p.b, p.c)
        for s in (0.5, 2.0, 4.0):
            assert correlative_strength(sxx, p.a, s * p.b, p.c / s) == base

    def test_general_factor_close(self):
        p = sample_params(7, np.random.default_rng(30))
        sxx = true_sigma_xx(p)
        base = correlative_strength(sxx, p.a, p.b, p.c)
        assert correlative_strength(sxx, p.a, 3.0 * p.b, p.c / 3.0) == pytest.approx(
            base, rel=1e-13)

    def test_model_level_gauge(self):
        # rescaling b while shrinking the noise covariance to keep sigma_xx keeps gamma
        p = sample_params(5, np.random.default_rng(41))
        s = 0.5
        sigma_ee_new = SymMatrix(true_sigma_xx(p).entries - np.outer(s * p.b, s * p.b))
        rescaled = ModelParams(a=p.a, b=s * p.b, c=p.c / s, sigma_ee=sigma_ee_new)
        assert ground_truth(rescaled).gamma == pytest.approx(ground_truth(p).gamma, rel=1e-12)


class TestRegressionVector:
    def test_scalar(self):
        assert regression_vector(SymMatrix([[2.0]]), [4.0]) == pytest.approx([2.0])

    def test_pure_causal_recovers_coefficients(self):
        p = sample_params(6, np.random.default_rng(13))
        sxx = true_sigma_xx(p)
        got = regression_vector(sxx, sxx.entries @ p.a)
        assert np.abs(got - p.a).max() <= 1e-10 * max(1.0, np.abs(p.a).max())

    def test_two_dim_closed_form(self):
        got = regression_vector(SymMatrix(np.diag([2.0, 1.0])), [1.0, 1.0])
        assert np.allclose(got, [0.5, 1.0], rtol=1e-14)

    def test_condition_guard(self):
        with pytest.raises(SingularCovariance):
            regression_vector(SymMatrix(np.diag([1.0, 1e-13])), [1.0, 1.0])

    @pytest.mark.parametrize("seed", range(10))
    def test_population_identity(self, seed):
        # solving against sigma_xx a + c b returns a + c sigma_xx^-1 b
        p = sample_params(9, np.random.default_rng(seed))
        sxx = true_sigma_xx(p)
        got = regression_vector(sxx, sxx.entries @ p.a + p.c * p.b)
        want = p.a + np.linalg.solve(sxx.entries, p.c * p.b)
        assert np.abs(got - want).max() <= 1e-10 * max(1.0, np.abs(want).max())


class TestEmpiricalCovariances:
    def test_two_samples_by_hand(self):
        ds = Dataset(x=np.array([[0.0], [2.0]]), y=np.array([0.0, 2.0]))
        sxx, sxy = empirical_covariances(ds)
        assert sxx.entries[0, 0] == pytest.approx(2.0)
        assert sxy == pytest.approx([2.0])

    def test_constant_column_gives_zero_rows(self):
        ds = Dataset(x=np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]),
                     y=np.array([0.0, 1.0, 2.0]))
        sxx, _ = empirical_covariances(ds)
        assert np.array_equal(sxx.entries[0], [0.0, 0.0])
        with pytest.raises(SingularCovariance):
            regression_vector(sxx, np.ones(2))

    def test_matches_population(self):
        rng = np.random.default_rng(55)
        p = sample_params(5, rng)
        ds = sample_dataset(p, 100_000, rng)
        sxx, sxy = empirical_covariances(ds)
        assert np.abs(sxx.entries - true_sigma_xx(p).entries).max() <= 0.05 * max(
            1.0, np.abs(true_sigma_xx(p).entries).max())

    def test_single_row_rejected(self):
        ds = Dataset(x=np.zeros((1, 2)), y=np.zeros(1))
        with pytest.raises(InvalidInput):
            empirical_covariances(ds)


class TestBetaPrime:
    def test_close_to_truth_at_large_n(self):
        rng = np.random.default_rng(61)
        p = sample_params(5, rng)
        ds = sample_dataset(p, 200_000, rng)
        assert beta_prime(ds) == pytest.approx(ground_truth(p).beta, abs=0.02)

    def test_requires_confounder_column(self):
        ds = Dataset(x=np.zeros((5, 2)), y=np.zeros(5))
        with pytest.raises(InvalidInput):
            beta_prime(ds)


class TestReplicationStreams:
    def test_streams_differ_and_replay(self):
        a = replication_rng(5, 0).standard_normal(4)
        b = replication_rng(5, 1).standard_normal(4)
        again = replication_rng(5, 0).standard_normal(4)
        assert not np.array_equal(a, b)
        assert np.array_equal(a, again)
