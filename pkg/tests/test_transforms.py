import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confspec import (
    ClampedValueWarning,
    ComplexPoint,
    DiscreteMeasure,
    InvalidInput,
    ModelParams,
    OutOfDomain,
    SingularSupport,
    SymMatrix,
    asymptotic_beta,
    beta_to_gamma,
    cauchy_transform,
    confounding_measure_identity,
    eigendecompose,
    gamma_to_beta,
    ground_truth,
    induced_measure,
    multiplication_map,
    rank_one_perturb,
)
from confspec.verify import measure_deviation

DELTA_ONE = DiscreteMeasure([1.0], [1.0])


def wishart(d, seed):
    g = np.random.default_rng(seed).standard_normal((d, d))
    return SymMatrix(g @ g.T)


def random_positive_measure(seed, natoms=6):
    rng = np.random.default_rng(seed)
    return DiscreteMeasure(np.sort(rng.uniform(0.5, 5.0, natoms))[::-1],
                           rng.uniform(0.1, 1.0, natoms))


class TestComplexPoint:
    def test_upper_half_plane_only(self):
        assert ComplexPoint(2.0, 1.0).value == 2.0 + 1.0j
        with pytest.raises(InvalidInput):
            ComplexPoint(2.0, 0.0)
        with pytest.raises(InvalidInput):
            ComplexPoint(2.0, -1.0)


class TestCauchyTransform:
    def test_point_mass_at_zero(self):
        assert cauchy_transform(DiscreteMeasure([0.0], [1.0]), 1j) == pytest.approx(-1j)

    def test_point_mass_at_one(self):
        got = cauchy_transform(DiscreteMeasure([1.0], [1.0]), ComplexPoint(2.0, 1.0))
        assert got == pytest.approx(0.5 - 0.5j)

    def test_two_atoms_complex_arithmetic(self):
        mu = DiscreteMeasure([2.0, 0.0], [0.5, 0.5])
        want = 0.5 / (1j - 2.0) + 0.5 / 1j
        assert cauchy_transform(mu, 1j) == pytest.approx(want)

    def test_rejects_lower_half_plane(self):
        mu = DiscreteMeasure([1.0], [1.0])
        with pytest.raises(InvalidInput):
            cauchy_transform(mu, 2.0 + 0.0j)
        with pytest.raises(InvalidInput):
            cauchy_transform(mu, 2.0 - 1.0j)

    @pytest.mark.parametrize("seed", range(5))
    def test_negative_imaginary_part(self, seed):
        mu = random_positive_measure(seed)
        z = complex(np.random.default_rng(seed).uniform(-3, 3), 0.5)
        assert cauchy_transform(mu, z).imag < 0.0


class TestRankOnePerturb:
    def test_single_atom_shifts_by_its_weight(self):
        out = rank_one_perturb(DiscreteMeasure([2.0], [0.3]))
        assert out.support == pytest.approx([2.3])
        assert out.weights == pytest.approx([0.3])

    def test_two_atom_closed_form(self):
        # perturbing diag(2,1) by the all-ones rank-one term gives the
        # quadratic roots (5 +- sqrt 5)/2 with weights 1 +- 2/sqrt 5
        root = math.sqrt(5.0)
        out = rank_one_perturb(DiscreteMeasure([2.0, 1.0], [1.0, 1.0]))
        assert np.allclose(out.support, [(5.0 + root) / 2.0, (5.0 - root) / 2.0])
        assert np.allclose(out.weights, [1.0 + 2.0 / root, 1.0 - 2.0 / root])

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_rank_one_matrix_update(self, seed):
        m = wishart(10, seed)
        psi = np.random.default_rng(seed + 1000).standard_normal(10)
        lhs = rank_one_perturb(induced_measure(eigendecompose(m), psi))
        rhs = induced_measure(eigendecompose(SymMatrix(m.entries + np.outer(psi, psi))), psi)
        assert measure_deviation(lhs, rhs) <= 1e-8

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000))
    def test_mass_preserved(self, seed):
        nu = random_positive_measure(seed)
        assert abs(rank_one_perturb(nu).mass - nu.mass) <= 1e-10 * nu.mass


class TestMultiplicationMap:
    def test_inverse_square_reweighting(self):
        out = multiplication_map(DiscreteMeasure([2.0, 1.0], [1.0, 1.0]))
        assert np.allclose(out.support, [2.0, 1.0])
        assert np.allclose(out.weights, [0.25, 1.0])

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_inverse_vector_construction(self, seed):
        m = wishart(10, seed)
        psi = np.random.default_rng(seed + 2000).standard_normal(10)
        e = eigendecompose(m)
        lhs = multiplication_map(induced_measure(e, psi))
        rhs = induced_measure(e, np.linalg.solve(m.entries, psi))
        assert measure_deviation(lhs, rhs) <= 1e-8

    def test_mass_is_second_inverse_moment(self):
        m = wishart(8, 5)
        psi = np.random.default_rng(5).standard_normal(8)
        mu = induced_measure(eigendecompose(m), psi)
        want = psi @ np.linalg.solve(m.entries, np.linalg.solve(m.entries, psi))
        assert multiplication_map(mu).mass == pytest.approx(want, rel=1e-8)

    def test_zero_atom_rejected(self):
        with pytest.raises(SingularSupport):
            multiplication_map(DiscreteMeasure([1.0, 0.0], [0.5, 0.5]))


class TestConfoundingMeasureIdentity:
    def test_zero_loading_gives_zero_measure(self):
        out = confounding_measure_identity(SymMatrix(np.eye(3)), np.zeros(3), 1.0)
        assert out.mass == 0.0

    def test_two_dim_hand_oracle(self):
        # identity noise with a unit loading: the induced measure merges into a
        # single atom at 1 with mass 1, shifts to 2, and reweights to 1/4
        out = confounding_measure_identity(SymMatrix(np.eye(2)), [1.0, 0.0], 1.0)
        assert out.natoms == 1
        assert out.support == pytest.approx([2.0])
        assert out.weights == pytest.approx([0.25])

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_direct_construction(self, seed):
        rng = np.random.default_rng(seed + 3000)
        see = wishart(10, seed)
        b = rng.standard_normal(10) * rng.uniform(0.2, 1.5)
        c = rng.uniform(0.1, 2.0)
        lhs = confounding_measure_identity(see, b, c)
        sxx = SymMatrix(see.entries + np.outer(b, b))
        rhs = induced_measure(eigendecompose(sxx), c * np.linalg.solve(sxx.entries, b))
        assert measure_deviation(lhs, rhs) <= 1e-8


class TestAronszajnKrein:
    @pytest.mark.parametrize("seed", range(5))
    def test_cauchy_transform_relation(self, seed):
        nu = random_positive_measure(seed)
        perturbed = rank_one_perturb(nu)
        rng = np.random.default_rng(seed + 4000)
        for _ in range(20):
            z = complex(rng.uniform(-3, 6), rng.uniform(0.1, 2.0))
            f = cauchy_transform(nu, z)
            assert abs(cauchy_transform(perturbed, z) - f / (1.0 - f)) <= 1e-8


class TestWeakContinuity:
    def test_moments_converge_for_discretized_measures(self):
        from confspec import moment

        target = DiscreteMeasure([3.0, 2.0, 1.0], [0.2, 0.3, 0.5])
        ref_r = rank_one_perturb(target)
        ref_m = multiplication_map(target)
        errors = []
        for d in (10, 100, 1000):
            counts = np.maximum(np.round(target.weights * d).astype(int), 1)
            counts[-1] = d - counts[:-1].sum()
            support, weights = [], []
            width = 0.3 / math.sqrt(d)
            for s0, cnt in zip(target.support, counts):
                offsets = (np.arange(cnt) - (cnt - 1) / 2.0) / max(cnt, 1)
                support.extend(s0 + offsets * width)
                weights.extend([1.0 / d] * cnt)
            nu = DiscreteMeasure(support, weights)
            err = max(
                max(abs(moment(rank_one_perturb(nu), k) - moment(ref_r, k)) for k in (1, 2, 3)),
                max(abs(moment(multiplication_map(nu), k) - moment(ref_m, k)) for k in (1, 2, 3)),
            )
            errors.append(err)
        assert errors[0] > errors[1] > errors[2]


class TestAsymptoticBeta:
    def test_no_target_coupling(self):
        assert asymptotic_beta(DELTA_ONE, 1.0, 1.0, 0.0) == 0.0

    def test_unit_point_mass_closed_form(self):
        # scaled point mass shifts to 1 + eta, reweights to eta / (1 + eta)^2
        assert asymptotic_beta(DELTA_ONE, 1.0, 1.0, 1.0) == pytest.approx(0.2, abs=1e-12)
        for eta in (0.25, 0.5, 2.0):
            r_b = math.sqrt(eta)
            m = eta / (1.0 + eta) ** 2
            want = m / (m + 1.0)
            assert asymptotic_beta(DELTA_ONE, 1.0, r_b, 1.0) == pytest.approx(want, rel=1e-12)

    def test_requires_probability_measure(self):
        with pytest.raises(InvalidInput):
            asymptotic_beta(DiscreteMeasure([1.0], [2.0]), 1.0, 1.0, 1.0)
        with pytest.raises(InvalidInput):
            asymptotic_beta(DiscreteMeasure([-1.0, 2.0], [0.5, 0.5]), 1.0, 1.0, 1.0)

    def test_matches_identity_noise_ground_truth(self):
        for d in (50, 200):
            gaps = []
            for seed in range(100):
                rng = np.random.default_rng((d, seed))
                c, r_a, r_b = rng.uniform(), rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0)
                a = rng.standard_normal(d)
                a *= r_a / np.linalg.norm(a)
                b = rng.standard_normal(d)
                b *= r_b / np.linalg.norm(b)
                p = ModelParams(a=a, b=b, c=c, sigma_ee=SymMatrix(np.eye(d)))
                gaps.append(abs(asymptotic_beta(DELTA_ONE, r_a, r_b, c)
                                - ground_truth(p).beta))
            assert np.median(gaps) <= 0.05


class TestStrengthConversions:
    def test_zero_maps_to_zero(self):
        assert gamma_to_beta(0.0, 0.75, 0.625, 2.0, 1.25) == 0.0
        assert beta_to_gamma(0.0, 0.75, 0.625, 2.0, 1.25) == 0.0

    def test_two_dim_scalar_oracle(self):
        # diag(2,1) moments: m_-1 = 0.75, m_-2 = 0.625; gamma 0.5 maps to
        # 0.5 * 0.625 * 2 / (1.25 * 1.75^2); the true strength there is 0.2 and
        # the asymptotic formula is not expected to be exact at dimension 2
        want = 0.625 / (1.25 * 1.75**2)
        got = gamma_to_beta(0.5, 0.75, 0.625, 2.0, 1.25)
        assert got == pytest.approx(want, rel=1e-12)
        assert got == pytest.approx(0.1633, abs=5e-5)

    def test_clamp_warns(self):
        with pytest.warns(ClampedValueWarning):
            assert gamma_to_beta(0.9, 0.1, 50.0, 10.0, 0.01) == 1.0

    def test_invalid_moments_rejected(self):
        with pytest.raises(InvalidInput):
            gamma_to_beta(0.5, -1.0, 0.625, 2.0, 1.25)
        with pytest.raises(InvalidInput):
            beta_to_gamma(0.5, 0.75, 0.0, 2.0, 1.25)

    def test_negative_discriminant(self):
        with pytest.raises(OutOfDomain):
            beta_to_gamma(0.9, 1.0, 0.1, 2.0, 1.0)

    @pytest.mark.parametrize("seed", range(20))
    def test_roundtrip_on_invertible_branch(self, seed):
        # the forward map is two-to-one in the loading norm; the printed inverse
        # returns the larger root, so valid tuples keep gamma * m1 * sxy2 >= 1
        rng = np.random.default_rng(seed)
        lam = rng.uniform(0.5, 4.0, int(rng.integers(3, 30)))
        m1 = float(np.mean(1.0 / lam))
        m2 = float(np.mean(1.0 / lam**2))
        alpha_sq = rng.uniform(1.05, 3.0) / m1
        gamma = rng.uniform(0.2, 1.0)
        sxy_sq = alpha_sq / gamma
        beta_target = rng.uniform(0.05, 0.95)
        ahat_sq = m2 * gamma * sxy_sq / ((1.0 + gamma * m1 * sxy_sq) ** 2 * beta_target)
        beta = gamma_to_beta(gamma, m1, m2, sxy_sq, ahat_sq)
        assert beta == pytest.approx(beta_target, rel=1e-10)
        assert beta_to_gamma(beta, m1, m2, sxy_sq, ahat_sq) == pytest.approx(gamma, abs=1e-8)
