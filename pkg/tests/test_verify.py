import pytest

from confspec import DiscreteMeasure, InvalidInput
from confspec.verify import check_names, measure_deviation, run_verify


class TestRunVerify:
    def test_small_all_pass(self):
        results = run_verify(size="small")
        assert all(r.passed for r in results), [r.line() for r in results if not r.passed]
        assert len(results) == len(check_names())

    def test_override_tightens_one_check(self):
        results = run_verify(size="small", overrides={"eigen_reconstruction": 1e-15})
        by_name = {r.name: r for r in results}
        assert not by_name["eigen_reconstruction"].passed
        assert by_name["measure_normalization"].passed

    def test_seed_robust_verdicts(self):
        verdicts_a = [r.passed for r in run_verify(size="small", seed=1)]
        verdicts_b = [r.passed for r in run_verify(size="small", seed=999)]
        assert verdicts_a == verdicts_b

    def test_unknown_name_rejected(self):
        with pytest.raises(InvalidInput):
            run_verify(overrides={"bogus": 1.0})

    def test_unknown_size_rejected(self):
        with pytest.raises(InvalidInput):
            run_verify(size="huge")


class TestMeasureDeviation:
    def test_equal_measures(self):
        mu = DiscreteMeasure([2.0, 1.0], [0.5, 0.5])
        assert measure_deviation(mu, mu) == 0.0

    def test_atom_count_mismatch_is_infinite(self):
        mu = DiscreteMeasure([2.0, 1.0], [0.5, 0.5])
        nu = DiscreteMeasure([2.0], [1.0])
        assert measure_deviation(mu, nu) == float("inf")

    def test_zero_atoms_droppable(self):
        mu = DiscreteMeasure([2.0, 1.0], [0.5, 0.0])
        nu = DiscreteMeasure([2.0], [0.5])
        assert measure_deviation(mu, nu, weight_floor=1e-12) == 0.0
