"""Confounded linear structural model.

A scalar hidden variable with unit variance feeds both a d-dimensional cause
vector and the scalar target:

    x = b z + e,    y = <a, x> + c z + f

with e, z, f jointly independent and centered Gaussian.  This module holds
the ground-truth parameters, the two confounding-strength definitions, the
rotation-invariant parameter generator, and population/empirical regression.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, SingularCovariance
from .spectral import SymMatrix, as_sym, _frozen

# Minimum eigenvalue tolerated when validating a noise covariance as PSD.
PSD_TOL = 1e-10
# Condition-number guard for linear solves against covariance matrices.
CONDITION_LIMIT = 1e12
# Relative rank cutoff below which a covariance counts as singular.
RANK_TOL = 1e-12

__all__ = [
    "PSD_TOL",
    "CONDITION_LIMIT",
    "RANK_TOL",
    "ModelParams",
    "Dataset",
    "GroundTruth",
    "replication_rng",
    "sample_params",
    "sample_dataset",
    "true_sigma_xx",
    "correlative_strength",
    "ground_truth",
    "regression_vector",
    "empirical_covariances",
    "beta_prime",
]


@dataclass(frozen=True)
class ModelParams:
    """Ground-truth structural parameters; the hidden variable has unit variance."""

    a: np.ndarray
    b: np.ndarray
    c: float
    sigma_ee: SymMatrix
    sigma_f: float = 1.0

    def __post_init__(self):
        sigma_ee = as_sym(self.sigma_ee)
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        d = sigma_ee.dim
        if a.shape != (d,) or b.shape != (d,):
            raise InvalidInput("a and b must be vectors matching the noise covariance")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.isfinite(self.c)):
            raise InvalidInput("model parameters must be finite")
        if not self.sigma_f >= 0.0:
            raise InvalidInput("sigma_f must be nonnegative")
        if np.linalg.eigvalsh(sigma_ee.entries).min() < -PSD_TOL:
            raise InvalidInput("noise covariance must be positive semi-definite")
        object.__setattr__(self, "a", _frozen(a))
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "sigma_ee", sigma_ee)
        object.__setattr__(self, "sigma_f", float(self.sigma_f))

    @property
    def dim(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class Dataset:
    """n x d predictor matrix with a length-n target; optionally the observed confounder.

    Construction admits n >= 1; covariance estimation requires n >= 2 and
    raises there.
    """

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise InvalidInput("x must be (n, d) and y must be (n,) with matching n")
        if x.shape[0] < 1:
            raise InvalidInput("a dataset needs at least one row")
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "y", _frozen(y))
        if self.z is not None:
            z = np.asarray(self.z, dtype=float)
            if z.shape != y.shape:
                raise InvalidInput("z must have the same length as y")
            object.__setattr__(self, "z", _frozen(z))

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class GroundTruth:
    """Exact confounding strengths and the population regression vector."""

    beta: float
    gamma: float
    eta: float
    a_hat_pop: np.ndarray


def replication_rng(seed: int, rep: int) -> np.random.Generator:
    """Deterministic per-replication stream split off a named root seed."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(rep,)))


def _sphere_point(d: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d)
    norm = np.linalg.norm(v)
    while norm == 0.0:
        v = rng.standard_normal(d)
        norm = np.linalg.norm(v)
    return v * (radius / norm)


def sample_params(d: int, rng: np.random.Generator) -> ModelParams:
    """Draw model parameters from the rotation-invariant generating process.

    The noise covariance is G G^T with G a d x d standard Gaussian matrix;
    c and the radii of a and b are independent Uniform(0, 1); a and b are
    uniform on spheres of those radii; the target noise is standard.
    """
    if d < 1:
        raise InvalidInput("dimension must be at least 1")
    g = rng.standard_normal((d, d))
    sigma_ee = SymMatrix(g @ g.T)
    c = float(rng.uniform())
    r_a = float(rng.uniform())
    r_b = float(rng.uniform())
    a = _sphere_point(d, r_a, rng)
    b = _sphere_point(d, r_b, rng)
    return ModelParams(a=a, b=b, c=c, sigma_ee=sigma_ee, sigma_f=1.0)


def _psd_sqrt(sym: SymMatrix) -> np.ndarray:
    vals, vecs = np.linalg.eigh(sym.entries)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def sample_dataset(p: ModelParams, n: int, rng: np.random.Generator) -> Dataset:
    """Draw n i.i.d. rows from the structural equations; z is retained."""
    if n < 1:
        raise InvalidInput("sample size must be at least 1")
    z = rng.standard_normal(n)
    f = rng.standard_normal(n) * p.sigma_f
    e = rng.standard_normal((n, p.dim)) @ _psd_sqrt(p.sigma_ee)
    x = z[:, None] * p.b + e
    y = x @ p.a + p.c * z + f
    return Dataset(x=x, y=y, z=z)


def true_sigma_xx(p: ModelParams) -> SymMatrix:
    """Population covariance of the cause vector: sigma_ee + b b^T."""
    return SymMatrix(p.sigma_ee.entries + np.outer(p.b, p.b))


def _strength_ratio(confounded: float, causal: float) -> float:
    total = confounded + causal
    if total == 0.0:
        return 0.0
    return confounded / total


def correlative_strength(sigma_xx: SymMatrix, a, b, c: float) -> float:
    """||c b||^2 / (||sigma_xx a||^2 + ||c b||^2), with 0/0 -> 0."""
    sym = as_sym(sigma_xx)
    cb = c * np.asarray(b, dtype=float)
    causal = float(np.sum((sym.entries @ np.asarray(a, dtype=float)) ** 2))
    return _strength_ratio(float(cb @ cb), causal)


def ground_truth(p: ModelParams) -> GroundTruth:
    """Exact strengths from the structural parameters.

    Raises
    ------
    SingularCovariance
        If the population covariance of x is numerically singular.
    """
    sxx = true_sigma_xx(p)
    vals = np.linalg.eigvalsh(sxx.entries)
    if vals.min() <= RANK_TOL * max(vals.max(), 0.0):
        raise SingularCovariance("population covariance of x is singular")
    shifted = p.c * np.linalg.solve(sxx.entries, p.b)
    gamma = correlative_strength(sxx, p.a, p.b, p.c)
    beta = _strength_ratio(float(shifted @ shifted), float(p.a @ p.a))
    eta = float(p.b @ p.b)
    return GroundTruth(beta=beta, gamma=gamma, eta=eta, a_hat_pop=p.a + shifted)


def regression_vector(sigma_xx: SymMatrix, sigma_xy) -> np.ndarray:
    """Solve sigma_xx @ v = sigma_xy by factorization (no explicit inverse).

    Raises
    ------
    SingularCovariance
        If the matrix is singular or its condition number exceeds
        ``CONDITION_LIMIT``.
    """
    sym = as_sym(sigma_xx)
    rhs = np.asarray(sigma_xy, dtype=float)
    if rhs.shape != (sym.dim,):
        raise InvalidInput(f"sigma_xy has shape {rhs.shape}, expected ({sym.dim},)")
    vals = np.abs(np.linalg.eigvalsh(sym.entries))
    smallest, largest = vals.min(), vals.max()
    if smallest == 0.0 or largest / smallest > CONDITION_LIMIT:
        raise SingularCovariance("covariance is singular or too ill-conditioned")
    return np.linalg.solve(sym.entries, rhs)


def empirical_covariances(ds: Dataset) -> tuple[SymMatrix, np.ndarray]:
    """Mean-centered covariance estimates with denominator n - 1."""
    n = ds.n_samples
    if n < 2:
        raise InvalidInput("covariance estimation needs at least 2 rows")
    xc = ds.x - ds.x.mean(axis=0)
    yc = ds.y - ds.y.mean()
    sxx = SymMatrix(xc.T @ xc / (n - 1))
    sxy = xc.T @ yc / (n - 1)
    return sxx, sxy


def beta_prime(ds: Dataset) -> float:
    """Structural strength recomputed from data in which the confounder is observed.

    Estimates the structural parameters (loadings of z on x via covariances
    against the standardized z, and the coefficients of the joint regression
    of y on x and z) and applies the same ratio as :func:`ground_truth`.
    Deviates from the true strength only through sampling error.
    """
    if ds.z is None:
        raise InvalidInput("beta_prime needs the observed confounder column")
    n = ds.n_samples
    if n < 2:
        raise InvalidInput("beta_prime needs at least 2 rows")
    zc = ds.z - ds.z.mean()
    z_std = float(np.sqrt(zc @ zc / (n - 1)))
    if z_std == 0.0:
        raise InvalidInput("observed confounder is constant")
    zc = zc / z_std
    sxx, sxy = empirical_covariances(ds)
    xc = ds.x - ds.x.mean(axis=0)
    b_hat = xc.T @ zc / (n - 1)
    szy = float(zc @ (ds.y - ds.y.mean())) / (n - 1)
    d = ds.dim
    joint = np.zeros((d + 1, d + 1))
    joint[:d, :d] = sxx.entries
    joint[:d, d] = b_hat
    joint[d, :d] = b_hat
    joint[d, d] = 1.0
    coeffs = regression_vector(SymMatrix(joint), np.concatenate([sxy, [szy]]))
    a_struct, c_hat = coeffs[:d], float(coeffs[d])
    conf = c_hat * regression_vector(sxx, b_hat)
    return _strength_ratio(float(conf @ conf), float(a_struct @ a_struct))
