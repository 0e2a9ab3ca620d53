"""Fit the observed spectral weights to the two-parameter family.

Phase 1 projects the regression vector onto the eigenbasis of the predictor
covariance and normalizes the squared coefficients.  Phase 2 grid-searches a
mixing weight in [0, 1] against a one-parameter confounded weight profile and
returns the pair minimizing a kernel-smoothed L1 distance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConstantColumn,
    DegenerateSpectrumWarning,
    InvalidInput,
    NormalizationWarning,
    SingularCovariance,
    ZeroRegressionVector,
)
from .scm import Dataset, empirical_covariances, regression_vector
from .spectral import SymMatrix, _frozen, eigendecompose

DEFAULT_GRID_STEPS = 101
DEFAULT_SIGMA_FACTOR = 0.2
WEIGHT_SUM_TOL = 1e-10

__all__ = [
    "DEFAULT_GRID_STEPS",
    "DEFAULT_SIGMA_FACTOR",
    "GridConfig",
    "FamilyWeights",
    "ConfoundingEstimate",
    "observed_weights",
    "confounded_weights",
    "family_weights",
    "smoothing_matrix",
    "distance",
    "estimate",
    "estimate_from_data",
    "normalize_dataset",
]


@dataclass(frozen=True)
class GridConfig:
    """Grid resolution and kernel bandwidth factor for the fit."""

    beta_steps: int = DEFAULT_GRID_STEPS
    eta_steps: int = DEFAULT_GRID_STEPS
    sigma_factor: float = DEFAULT_SIGMA_FACTOR

    def __post_init__(self):
        if self.beta_steps < 1 or self.eta_steps < 1:
            raise InvalidInput("grid step counts must be positive")
        if not self.sigma_factor > 0.0:
            raise InvalidInput("sigma_factor must be positive")


@dataclass(frozen=True)
class FamilyWeights:
    """One member of the model family, indexed against descending eigenvalues."""

    beta: float
    eta: float
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen(self.weights))


@dataclass(frozen=True)
class ConfoundingEstimate:
    """Grid-search result.  The fitted explanatory-power parameter is reported
    even though it tracks the truth poorly; the flag stays False."""

    beta_hat: float
    eta_hat: float
    distance: float
    observed_weights: np.ndarray
    fitted_weights: np.ndarray
    eigenvalues: np.ndarray
    a_hat_norm_sq: float
    eta_reliability_flag: bool = False

    def __post_init__(self):
        for name in ("observed_weights", "fitted_weights", "eigenvalues"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))


def observed_weights(sigma_xx: SymMatrix, a_hat) -> tuple[np.ndarray, np.ndarray]:
    """Normalized squared coefficients of the regression vector in the eigenbasis.

    Returns the descending eigenvalues and the weight vector summing to 1.

    Raises
    ------
    ZeroRegressionVector
        If the regression vector vanishes.
    """
    a_hat = np.asarray(a_hat, dtype=float)
    decomp = eigendecompose(sigma_xx)
    if a_hat.shape != (decomp.dim,):
        raise InvalidInput(f"a_hat has shape {a_hat.shape}, expected ({decomp.dim},)")
    raw = (decomp.eigenvectors.T @ a_hat) ** 2
    total = float(raw.sum())
    if total == 0.0:
        raise ZeroRegressionVector("regression vector is zero; nothing to analyze")
    return decomp.eigenvalues, raw / total


def confounded_weights(eigenvalues, eta: float) -> np.ndarray:
    """Weight profile of the confounded family member at one value of eta.

    Perturbs the diagonalized spectrum by eta g g^T with g the normalized
    all-ones vector, and reads off the squared coefficients of the unit vector
    along T^-1 g in the perturbed eigenbasis.  By Sherman-Morrison, T^-1 g is
    proportional to the entrywise quotient g / eigenvalues.  The j-th squared
    coefficient (in descending order of the perturbed spectrum) is attached to
    the j-th descending eigenvalue of the covariance.

    Raises
    ------
    SingularCovariance
        If the smallest eigenvalue is not positive.
    InvalidInput
        If eta lies outside [0, largest eigenvalue].
    """
    lam = np.asarray(eigenvalues, dtype=float)
    d = lam.size
    if lam[-1] <= 0.0:
        raise SingularCovariance("family construction needs a positive spectrum")
    if not 0.0 <= eta <= lam[0]:
        raise InvalidInput("eta must lie in [0, largest eigenvalue]")
    g = np.full(d, d**-0.5)
    v = g / lam
    v /= np.linalg.norm(v)
    perturbed = np.diag(lam) + eta * np.outer(g, g)
    vecs = np.linalg.eigh(perturbed)[1]
    coeffs = vecs[:, ::-1].T @ v
    return coeffs**2


def _mix(conf: np.ndarray, beta: float, d: int) -> np.ndarray:
    # Shared by family_weights and the grid scan so both produce identical bits.
    return (1.0 - beta) / d + beta * conf


def family_weights(eigenvalues, beta: float, eta: float) -> FamilyWeights:
    """Convex mix of the uniform causal part and the confounded part."""
    if not 0.0 <= beta <= 1.0:
        raise InvalidInput("beta must lie in [0, 1]")
    lam = np.asarray(eigenvalues, dtype=float)
    conf = confounded_weights(lam, eta)
    return FamilyWeights(beta=float(beta), eta=float(eta), weights=_mix(conf, beta, lam.size))


def smoothing_matrix(eigenvalues, sigma_factor: float = DEFAULT_SIGMA_FACTOR) -> np.ndarray:
    """Gaussian kernel matrix over eigenvalue gaps.

    The bandwidth is ``sigma_factor`` times the spectral span; a fully
    degenerate spectrum gets bandwidth 1, making the kernel all-ones.
    """
    if not sigma_factor > 0.0:
        raise InvalidInput("sigma_factor must be positive")
    lam = np.asarray(eigenvalues, dtype=float)
    span = lam[0] - lam[-1]
    sigma = sigma_factor * span if span > 0.0 else 1.0
    gaps = np.subtract.outer(lam, lam)
    return np.exp(-(gaps**2) / (2.0 * sigma**2))


def distance(w, w_prime, k) -> float:
    """Kernel-smoothed L1 distance between two weight vectors: ||K (w - w')||_1."""
    w = np.asarray(w, dtype=float)
    w_prime = np.asarray(w_prime, dtype=float)
    k = np.asarray(k, dtype=float)
    if w.shape != w_prime.shape or k.shape != (w.size, w.size):
        raise InvalidInput("weight vectors and kernel dimensions must agree")
    return float(np.abs(k @ (w - w_prime)).sum())


def estimate(sigma_xx: SymMatrix, sigma_xy, cfg: GridConfig | None = None) -> ConfoundingEstimate:
    """Exhaustive grid search for the best-fitting family member.

    The mixing weight runs over ``beta_steps`` points in [0, 1] and the
    perturbation size over ``eta_steps`` points in [0, largest eigenvalue],
    endpoints included.  Ties break toward the smallest mixing weight, then
    the smallest perturbation.
    """
    cfg = cfg or GridConfig()
    a_hat = regression_vector(sigma_xx, sigma_xy)
    lam, observed = observed_weights(sigma_xx, a_hat)
    d = lam.size
    if lam[0] - lam[-1] == 0.0:
        warnings.warn(
            "spectrum is fully degenerate; the weights carry no signal",
            DegenerateSpectrumWarning,
            stacklevel=2,
        )
    kernel = smoothing_matrix(lam, cfg.sigma_factor)
    betas = np.linspace(0.0, 1.0, cfg.beta_steps)
    etas = np.linspace(0.0, lam[0], cfg.eta_steps)
    conf = [confounded_weights(lam, float(eta)) for eta in etas]
    best = None
    for i, beta in enumerate(betas):
        for j in range(etas.size):
            resid = distance(observed, _mix(conf[j], float(beta), d), kernel)
            if best is None or resid < best[0]:
                best = (resid, i, j)
    resid, bi, ej = best
    fitted = _mix(conf[ej], float(betas[bi]), d)
    return ConfoundingEstimate(
        beta_hat=float(betas[bi]),
        eta_hat=float(etas[ej]),
        distance=resid,
        observed_weights=observed,
        fitted_weights=fitted,
        eigenvalues=lam,
        a_hat_norm_sq=float(a_hat @ a_hat),
        eta_reliability_flag=False,
    )


def estimate_from_data(ds: Dataset, cfg: GridConfig | None = None) -> ConfoundingEstimate:
    """Estimate from raw samples: empirical covariances, then the grid search."""
    sxx, sxy = empirical_covariances(ds)
    return estimate(sxx, sxy, cfg)


def normalize_dataset(ds: Dataset) -> Dataset:
    """Center each predictor column and scale it to unit sample variance.

    The target (and the observed confounder, when present) stay untouched.
    Normalization jointly changes the covariance and the causal coefficients,
    so a warning is attached: estimates on normalized data lose part of their
    justification and deserve extra skepticism.

    Raises
    ------
    ConstantColumn
        If any predictor column is constant.
    """
    x = ds.x - ds.x.mean(axis=0)
    stds = x.std(axis=0, ddof=1) if ds.n_samples > 1 else np.zeros(ds.dim)
    flat = np.flatnonzero(stds == 0.0)
    if flat.size:
        raise ConstantColumn(f"predictor column {flat[0]} is constant")
    warnings.warn(
        "predictors rescaled to unit variance; treat the resulting estimate "
        "with skepticism",
        NormalizationWarning,
        stacklevel=2,
    )
    return Dataset(x=x / stds, y=ds.y, z=ds.z)
