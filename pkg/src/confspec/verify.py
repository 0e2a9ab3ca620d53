"""Executable invariant suite.

Every module-level invariant is expressed as a named check that computes a
scalar against a threshold.  Checks run at two configured sizes; thresholds
can be overridden per check name, which is how impossible tolerances are
demonstrated to fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInput
from .estimator import (
    GridConfig,
    confounded_weights,
    distance,
    estimate,
    family_weights,
    smoothing_matrix,
)
from .scm import (
    ModelParams,
    _sphere_point,
    correlative_strength,
    ground_truth,
    regression_vector,
    sample_params,
    true_sigma_xx,
)
from .spectral import (
    DiscreteMeasure,
    SymMatrix,
    eigendecompose,
    induced_measure,
    measure_expectation,
    moment,
    tracial_inducing_vector,
    tracial_measure,
)
from .transforms import (
    asymptotic_beta,
    beta_to_gamma,
    cauchy_transform,
    confounding_measure_identity,
    gamma_to_beta,
    multiplication_map,
    rank_one_perturb,
)

DEFAULT_SEED = 20240811

__all__ = ["DEFAULT_SEED", "CheckResult", "measure_deviation", "run_verify", "check_names"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    op: str  # how measured relates to threshold for a pass

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: measured {self.measured:.6g} "
                f"{self.op} {self.threshold:.6g}")


def _result(name: str, measured: float, tol: float, op: str = "<=") -> CheckResult:
    ok = {"<=": measured <= tol, "<": measured < tol, ">": measured > tol}[op]
    return CheckResult(name=name, passed=bool(ok), measured=float(measured),
                       threshold=float(tol), op=op)


def measure_deviation(mu: DiscreteMeasure, nu: DiscreteMeasure,
                      weight_floor: float = 0.0) -> float:
    """Atomwise gap between two measures; inf if the atom counts differ.

    Atoms with weight at or below ``weight_floor`` are ignored.  Gaps are
    scaled by 1 + magnitude so the verdict is meaningful for weights spanning
    many orders of magnitude (the inverse-square reweighting produces such).
    """
    def kept(m):
        keep = m.weights > weight_floor
        return m.support[keep], m.weights[keep]

    s1, w1 = kept(mu)
    s2, w2 = kept(nu)
    if s1.size != s2.size:
        return math.inf
    if s1.size == 0:
        return 0.0
    support_gap = np.abs(s1 - s2) / (1.0 + np.abs(s1))
    weight_gap = np.abs(w1 - w2) / (1.0 + np.maximum(np.abs(w1), np.abs(w2)))
    return float(max(support_gap.max(), weight_gap.max()))


def _random_sym(d: int, rng) -> SymMatrix:
    a = rng.standard_normal((d, d))
    return SymMatrix(a + a.T)


def _wishart(d: int, rng) -> SymMatrix:
    g = rng.standard_normal((d, d))
    return SymMatrix(g @ g.T)


def _rotated_spectrum(d: int, rng, lo: float = 0.5, hi: float = 1.5) -> SymMatrix:
    spec = np.linspace(lo, hi, d)
    q = np.linalg.qr(rng.standard_normal((d, d)))[0]
    return SymMatrix((q * spec) @ q.T)


def _positive_measure(rng, natoms: int = 6) -> DiscreteMeasure:
    support = np.sort(rng.uniform(0.5, 5.0, natoms))[::-1]
    weights = rng.uniform(0.1, 1.0, natoms)
    return DiscreteMeasure(support, weights)


# --- spectral -----------------------------------------------------------

def check_eigen_reconstruction(p, rng, tol):
    worst = 0.0
    for d in p["dims"]:
        for _ in range(p["trials"]):
            m = _random_sym(d, rng)
            e = eigendecompose(m)
            resid = np.linalg.norm(e.reconstruct() - m.entries) / np.linalg.norm(m.entries)
            worst = max(worst, resid)
    return _result("eigen_reconstruction", worst, tol)


def check_eigen_orthonormality(p, rng, tol):
    worst = 0.0
    for d in p["dims"]:
        for _ in range(p["trials"]):
            v = eigendecompose(_random_sym(d, rng)).eigenvectors
            worst = max(worst, np.abs(v.T @ v - np.eye(d)).max())
    return _result("eigen_orthonormality", worst, tol)


def check_measure_normalization(p, rng, tol):
    worst = 0.0
    for _ in range(p["trials"]):
        d = int(rng.integers(1, 13))
        e = eigendecompose(_random_sym(d, rng))
        psi = rng.standard_normal(d) * rng.uniform(0.1, 5.0)
        mass = induced_measure(e, psi).mass
        norm_sq = float(psi @ psi)
        worst = max(worst, abs(mass - norm_sq) / norm_sq)
    return _result("measure_normalization", worst, tol)


def check_expectation_identity(p, rng, tol):
    worst = 0.0
    for _ in range(p["trials"]):
        m = _random_sym(10, rng)
        psi = rng.standard_normal(10)
        coeffs = rng.uniform(-1.0, 1.0, 7)
        mu = induced_measure(eigendecompose(m), psi)
        lhs = measure_expectation(mu, lambda s: sum(c * s**k for k, c in enumerate(coeffs)))
        acc = np.zeros((10, 10))
        power = np.eye(10)
        for c in coeffs:
            acc = acc + c * power
            power = power @ m.entries
        rhs = float(psi @ acc @ psi)
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
    return _result("expectation_identity", worst, tol)


def check_tracial_inducing(p, rng, tol):
    worst = 0.0
    for _ in range(p["trials"]):
        d = int(rng.integers(2, 12))
        e = eigendecompose(_random_sym(d, rng))
        mu = induced_measure(e, tracial_inducing_vector(e))
        worst = max(worst, measure_deviation(mu, tracial_measure(e)))
    return _result("tracial_inducing", worst, tol)


def check_interlacing(p, rng, tol):
    worst = 0.0
    d = 10
    for _ in range(p["trials"]):
        see = _wishart(d, rng)
        b = rng.standard_normal(d) * rng.uniform(0.2, 2.0)
        v_e = np.sort(np.linalg.eigvalsh(see.entries))[::-1]
        v_x = np.sort(np.linalg.eigvalsh(see.entries + np.outer(b, b)))[::-1]
        scale = max(v_x[0] - v_e[-1], 1.0)
        for j in range(1, d):
            worst = max(worst, (v_e[j] - v_x[j]) / scale, (v_x[j] - v_e[j - 1]) / scale)
        for _ in range(5):
            lo, hi = np.sort(rng.uniform(v_e[-1] - 1.0, v_x[0] + 1.0, 2))
            count_e = int(np.count_nonzero((v_e >= lo) & (v_e <= hi)))
            count_x = int(np.count_nonzero((v_x >= lo) & (v_x <= hi)))
            if abs(count_e - count_x) > 1:
                worst = max(worst, 1.0)
    return _result("interlacing", worst, tol)


def check_random_vector_orthogonality(p, rng, tol):
    worst = 0.0
    for d in p["dims"]:
        fixed = np.zeros(d)
        fixed[0] = 1.0
        sq = [float((fixed @ _sphere_point(d, 1.0, rng)) ** 2) for _ in range(p["draws"])]
        worst = max(worst, d * float(np.mean(sq)))
    return _result("random_vector_orthogonality", worst, tol)


# --- scm ----------------------------------------------------------------

def check_regression_identity(p, rng, tol):
    worst = 0.0
    for _ in range(p["trials"]):
        params = sample_params(p["d"], rng)
        sxx = true_sigma_xx(params)
        sxy = sxx.entries @ params.a + params.c * params.b
        lhs = regression_vector(sxx, sxy)
        rhs = params.a + np.linalg.solve(sxx.entries, params.c * params.b)
        worst = max(worst, np.abs(lhs - rhs).max() / max(1.0, np.abs(rhs).max()))
    return _result("regression_identity", worst, tol)


def check_strength_ranges(p, rng, tol):
    worst = 0.0
    for _ in range(p["trials"]):
        params = sample_params(p["d"], rng)
        gt = ground_truth(params)
        worst = max(worst, gt.beta - 1.0, -gt.beta, gt.gamma - 1.0, -gt.gamma,
                    abs(gt.eta - float(params.b @ params.b)))
        q = np.linalg.qr(rng.standard_normal((p["d"], p["d"])))[0]
        rotated = ModelParams(a=params.a, b=q @ params.b, c=params.c,
                              sigma_ee=params.sigma_ee, sigma_f=params.sigma_f)
        worst = max(worst, abs(ground_truth(rotated).eta - gt.eta) / max(gt.eta, 1e-30))
    return _result("strength_ranges", worst, tol)


def check_gamma_scale_invariance(p, rng, tol):
    worst = 0.0
    for _ in range(p["trials"]):
        params = sample_params(p["d"], rng)
        sxx = true_sigma_xx(params)
        base = correlative_strength(sxx, params.a, params.b, params.c)
        for s in (0.5, 2.0, 4.0):
            scaled = correlative_strength(sxx, params.a, s * params.b, params.c / s)
            worst = max(worst, abs(scaled - base))
    return _result("gamma_scale_invariance", worst, tol)


def _moment_deviations(p, rng):
    # deviations of induced-measure moments from r_a^2 * tracial moments, and
    # the raw moments themselves, per dimension and order
    devs = {k: [] for k in p["ks"]}
    moms = {k: [] for k in p["ks"]}
    for d in p["dims"]:
        per_dev = {k: [] for k in p["ks"]}
        per_mom = {k: [] for k in p["ks"]}
        for _ in range(p["seeds"]):
            b = _sphere_point(d, p["r_b"], rng)
            a = _sphere_point(d, p["r_a"], rng)
            sxx = SymMatrix(np.diag(np.linspace(0.5, 1.5, d)) + np.outer(b, b))
            e = eigendecompose(sxx)
            mu = induced_measure(e, a)
            tau = tracial_measure(e)
            for k in p["ks"]:
                mk = moment(mu, k)
                per_dev[k].append(abs(mk - p["r_a"] ** 2 * moment(tau, k)))
                per_mom[k].append(mk)
        for k in p["ks"]:
            devs[k].append(float(np.median(per_dev[k])))
            moms[k].append(per_mom[k])
    return devs, moms


def check_moment_concentration(p, rng, tol):
    devs, _ = _moment_deviations(p, rng)
    worst = 0.0
    for k in p["ks"]:
        seq = devs[k]
        for earlier, later in zip(seq, seq[1:]):
            worst = max(worst, later / earlier)
    return _result("moment_concentration", worst, tol, op="<")


def check_moment_variance_bound(p, rng, tol):
    _, moms = _moment_deviations(p, rng)
    bound_scale = 1.5 + p["r_b"] ** 2  # spectral norm bound for the covariance
    worst = 0.0
    for k in p["ks"]:
        for d, values in zip(p["dims"], moms[k]):
            bound = 2.0 * bound_scale ** (2 * k) / d
            worst = max(worst, float(np.var(values)) / bound)
    return _result("moment_variance_bound", worst, tol)


# --- estimator ----------------------------------------------------------

def _random_spectrum(d, rng):
    return np.sort(rng.uniform(0.3, 4.0, d))[::-1]


def check_family_normalization(p, rng, tol):
    worst = 0.0
    for _ in range(p["trials"]):
        lam = _random_spectrum(int(rng.integers(2, 15)), rng)
        beta = float(rng.uniform())
        eta = float(rng.uniform(0.0, lam[0]))
        fam = family_weights(lam, beta, eta)
        worst = max(worst, abs(float(fam.weights.sum()) - 1.0))
    return _result("family_normalization", worst, tol)


def check_family_floor(p, rng, tol):
    worst = 0.0
    for _ in range(p["trials"]):
        d = int(rng.integers(2, 15))
        lam = _random_spectrum(d, rng)
        beta = float(rng.uniform())
        eta = float(rng.uniform(0.0, lam[0]))
        fam = family_weights(lam, beta, eta)
        worst = max(worst, float(((1.0 - beta) / d - fam.weights).max()))
    return _result("family_floor", worst, tol)


def check_estimator_scale_invariance(p, rng, tol):
    grid = GridConfig(beta_steps=p["steps"], eta_steps=p["steps"])
    worst = 0.0
    for _ in range(p["trials"]):
        params = sample_params(p["d"], rng)
        sxx = true_sigma_xx(params)
        sxy = sxx.entries @ params.a + params.c * params.b
        base = estimate(sxx, sxy, grid)
        scaled = estimate(sxx, 4.0 * sxy, grid)
        worst = max(worst, abs(base.beta_hat - scaled.beta_hat),
                    abs(base.eta_hat - scaled.eta_hat))
    return _result("estimator_scale_invariance", worst, tol)


def check_family_eta_sensitivity(p, rng, tol):
    lowest = math.inf
    for _ in range(p["trials"]):
        lam = _random_spectrum(int(rng.integers(4, 12)), rng)
        low = family_weights(lam, 1.0, 0.0).weights
        high = family_weights(lam, 1.0, float(lam[0])).weights
        lowest = min(lowest, float(np.abs(low - high).max()))
    return _result("family_eta_sensitivity", lowest, tol, op=">")


def check_family_distance_consistency(p, rng, tol):
    medians = []
    for d in p["dims"]:
        values = []
        for _ in range(p["seeds"]):
            b = _sphere_point(d, float(rng.uniform(0.3, 1.0)), rng)
            a = _sphere_point(d, float(rng.uniform(0.3, 1.0)), rng)
            c = float(rng.uniform(0.2, 1.0))
            see = np.diag(np.linspace(0.5, 1.5, d))
            sxx = SymMatrix(see + np.outer(b, b))
            gt = ground_truth(ModelParams(a=a, b=b, c=c, sigma_ee=SymMatrix(see)))
            e = eigendecompose(sxx)
            obs_w = (e.eigenvectors.T @ gt.a_hat_pop) ** 2
            obs_w /= obs_w.sum()
            beta_grid = round(gt.beta * 100) / 100
            fam = family_weights(e.eigenvalues, beta_grid, gt.eta)
            kern = smoothing_matrix(e.eigenvalues)
            # normalized per atom; the raw smoothed L1 grows with the kernel mass
            values.append(distance(obs_w, fam.weights, kern) / d)
        medians.append(float(np.median(values)))
    worst = 0.0
    for earlier, later in zip(medians, medians[1:]):
        worst = max(worst, later / earlier)
    return _result("family_distance_consistency", worst, tol, op="<")


# --- transforms ---------------------------------------------------------

def check_aronszajn_krein(p, rng, tol):
    worst = 0.0
    for _ in range(p["trials"]):
        nu = _positive_measure(rng)
        perturbed = rank_one_perturb(nu)
        for _ in range(20):
            z = complex(rng.uniform(-3.0, 6.0), rng.uniform(0.1, 2.0))
            f = cauchy_transform(nu, z)
            lhs = cauchy_transform(perturbed, z)
            worst = max(worst, abs(lhs - f / (1.0 - f)))
    return _result("aronszajn_krein", worst, tol)


def check_rank_one_mass(p, rng, tol):
    worst = 0.0
    for _ in range(p["trials"]):
        nu = _positive_measure(rng)
        worst = max(worst, abs(rank_one_perturb(nu).mass - nu.mass) / nu.mass)
    return _result("rank_one_mass", worst, tol)


def check_rank_one_identity(p, rng, tol):
    worst = 0.0
    for _ in range(p["trials"]):
        m = _wishart(10, rng)
        psi = rng.standard_normal(10)
        lhs = rank_one_perturb(induced_measure(eigendecompose(m), psi))
        rhs = induced_measure(eigendecompose(SymMatrix(m.entries + np.outer(psi, psi))), psi)
        worst = max(worst, measure_deviation(lhs, rhs))
    return _result("rank_one_identity", worst, tol)


def check_multiplication_identity(p, rng, tol):
    worst = 0.0
    for _ in range(p["trials"]):
        m = _wishart(10, rng)
        psi = rng.standard_normal(10)
        e = eigendecompose(m)
        lhs = multiplication_map(induced_measure(e, psi))
        rhs = induced_measure(e, np.linalg.solve(m.entries, psi))
        worst = max(worst, measure_deviation(lhs, rhs))
    return _result("multiplication_identity", worst, tol)


def check_confounding_identity(p, rng, tol):
    worst = 0.0
    for _ in range(p["trials"]):
        see = _wishart(10, rng)
        b = rng.standard_normal(10) * rng.uniform(0.2, 1.5)
        c = float(rng.uniform(0.1, 2.0))
        lhs = confounding_measure_identity(see, b, c)
        sxx = SymMatrix(see.entries + np.outer(b, b))
        rhs = induced_measure(eigendecompose(sxx), c * np.linalg.solve(sxx.entries, b))
        worst = max(worst, measure_deviation(lhs, rhs))
    return _result("confounding_identity", worst, tol)


def check_weak_continuity(p, rng, tol):
    target = DiscreteMeasure([3.0, 2.0, 1.0], [0.2, 0.3, 0.5])
    ref_r = rank_one_perturb(target)
    ref_m = multiplication_map(target)
    errors = []
    for d in p["dims"]:
        counts = np.maximum(np.round(target.weights * d).astype(int), 1)
        counts[-1] = d - counts[:-1].sum()
        support, weights = [], []
        width = 0.3 / np.sqrt(d)
        for s0, cnt in zip(target.support, counts):
            offsets = (np.arange(cnt) - (cnt - 1) / 2.0) / max(cnt, 1)
            support.extend(s0 + offsets * width)
            weights.extend([1.0 / d] * cnt)
        nu = DiscreteMeasure(support, weights)
        err = 0.0
        for k in (1, 2, 3):
            err = max(err, abs(moment(rank_one_perturb(nu), k) - moment(ref_r, k)),
                      abs(moment(multiplication_map(nu), k) - moment(ref_m, k)))
        errors.append(err)
    worst = 0.0
    for earlier, later in zip(errors, errors[1:]):
        worst = max(worst, later / earlier)
    return _result("weak_continuity", worst, tol, op="<")


def check_asymptotic_beta_agreement(p, rng, tol):
    delta_one = DiscreteMeasure([1.0], [1.0])
    worst = 0.0
    for d in p["dims"]:
        gaps = []
        for _ in range(p["seeds"]):
            c = float(rng.uniform())
            r_a = float(rng.uniform(0.05, 1.0))
            r_b = float(rng.uniform(0.05, 1.0))
            params = ModelParams(a=_sphere_point(d, r_a, rng), b=_sphere_point(d, r_b, rng),
                                 c=c, sigma_ee=SymMatrix(np.eye(d)))
            gaps.append(abs(asymptotic_beta(delta_one, r_a, r_b, c) - ground_truth(params).beta))
        worst = max(worst, float(np.median(gaps)))
    return _result("asymptotic_beta_agreement", worst, tol)


def check_conversion_roundtrip(p, rng, tol):
    worst = 0.0
    for _ in range(p["trials"]):
        lam = rng.uniform(0.5, 4.0, int(rng.integers(3, 30)))
        m1 = float(np.mean(1.0 / lam))
        m2 = float(np.mean(1.0 / lam**2))
        # stay on the invertible branch of the forward map: ||b||^2 >= 1 / m1
        alpha_sq = float(rng.uniform(1.05, 3.0)) / m1
        gamma = float(rng.uniform(0.2, 1.0))
        sxy_sq = alpha_sq / gamma
        beta_target = float(rng.uniform(0.05, 0.95))
        ahat_sq = m2 * gamma * sxy_sq / ((1.0 + gamma * m1 * sxy_sq) ** 2 * beta_target)
        beta = gamma_to_beta(gamma, m1, m2, sxy_sq, ahat_sq)
        back = beta_to_gamma(beta, m1, m2, sxy_sq, ahat_sq)
        worst = max(worst, abs(back - gamma))
    return _result("conversion_roundtrip", worst, tol)


_CHECKS: dict[str, tuple[Callable, float, dict, dict]] = {
    # name: (function, default threshold, small params, full params)
    "eigen_reconstruction": (check_eigen_reconstruction, 1e-8,
                             dict(dims=(8, 120), trials=4), dict(dims=(8, 80, 200), trials=10)),
    "eigen_orthonormality": (check_eigen_orthonormality, 1e-10,
                             dict(dims=(8, 40), trials=4), dict(dims=(8, 80, 200), trials=10)),
    "measure_normalization": (check_measure_normalization, 1e-10,
                              dict(trials=20), dict(trials=100)),
    "expectation_identity": (check_expectation_identity, 1e-8,
                             dict(trials=10), dict(trials=50)),
    "tracial_inducing": (check_tracial_inducing, 1e-10,
                         dict(trials=10), dict(trials=50)),
    "interlacing": (check_interlacing, 1e-8,
                    dict(trials=25), dict(trials=100)),
    "random_vector_orthogonality": (check_random_vector_orthogonality, 5.0,
                                    dict(dims=(50, 200), draws=200),
                                    dict(dims=(50, 200, 800), draws=200)),
    "regression_identity": (check_regression_identity, 1e-10,
                            dict(trials=10, d=8), dict(trials=50, d=12)),
    "strength_ranges": (check_strength_ranges, 1e-12,
                        dict(trials=20, d=8), dict(trials=100, d=10)),
    "gamma_scale_invariance": (check_gamma_scale_invariance, 0.0,
                               dict(trials=10, d=8), dict(trials=50, d=10)),
    "moment_concentration": (check_moment_concentration, 1.0,
                             dict(dims=(10, 40, 160), seeds=40, ks=(1, 2, 3), r_a=1.0, r_b=1.0),
                             dict(dims=(25, 100, 400), seeds=100, ks=(1, 2, 3), r_a=1.0, r_b=1.0)),
    "moment_variance_bound": (check_moment_variance_bound, 1.0,
                              dict(dims=(10, 40, 160), seeds=40, ks=(1, 2, 3), r_a=1.0, r_b=1.0),
                              dict(dims=(25, 100, 400), seeds=100, ks=(1, 2, 3), r_a=1.0, r_b=1.0)),
    "family_normalization": (check_family_normalization, 1e-10,
                             dict(trials=20), dict(trials=100)),
    "family_floor": (check_family_floor, 1e-12,
                     dict(trials=20), dict(trials=100)),
    "estimator_scale_invariance": (check_estimator_scale_invariance, 0.0,
                                   dict(trials=3, d=6, steps=41),
                                   dict(trials=5, d=10, steps=101)),
    "family_eta_sensitivity": (check_family_eta_sensitivity, 0.0,
                               dict(trials=5), dict(trials=20)),
    "family_distance_consistency": (check_family_distance_consistency, 1.0,
                                    dict(dims=(10, 40, 160), seeds=15),
                                    dict(dims=(20, 80, 320), seeds=50)),
    "aronszajn_krein": (check_aronszajn_krein, 1e-8,
                        dict(trials=5), dict(trials=20)),
    "rank_one_mass": (check_rank_one_mass, 1e-10,
                      dict(trials=20), dict(trials=100)),
    "rank_one_identity": (check_rank_one_identity, 1e-8,
                          dict(trials=10), dict(trials=50)),
    "multiplication_identity": (check_multiplication_identity, 1e-8,
                                dict(trials=10), dict(trials=50)),
    "confounding_identity": (check_confounding_identity, 1e-8,
                             dict(trials=10), dict(trials=50)),
    "weak_continuity": (check_weak_continuity, 1.0,
                        dict(dims=(10, 100)), dict(dims=(10, 100, 1000))),
    "asymptotic_beta_agreement": (check_asymptotic_beta_agreement, 0.05,
                                  dict(dims=(25, 50), seeds=30),
                                  dict(dims=(50, 200), seeds=100)),
    "conversion_roundtrip": (check_conversion_roundtrip, 1e-8,
                             dict(trials=200), dict(trials=1000)),
}


def check_names() -> list[str]:
    return list(_CHECKS)


def run_verify(size: str = "small", seed: int = DEFAULT_SEED,
               overrides: dict[str, float] | None = None) -> list[CheckResult]:
    """Run every check at the given size; thresholds may be overridden by name."""
    if size not in ("small", "full"):
        raise InvalidInput("size must be 'small' or 'full'")
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(_CHECKS)
    if unknown:
        raise InvalidInput(f"unknown check names: {sorted(unknown)}")
    results = []
    for index, (name, (fn, default_tol, small, full)) in enumerate(_CHECKS.items()):
        params = small if size == "small" else full
        tol = overrides.get(name, default_tol)
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))
        results.append(fn(params, rng, tol))
    return results
