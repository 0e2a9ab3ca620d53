"""Measure-transform calculus at finite dimension.

The two maps that describe how a rank-one update and a resolvent-style
reweighting act on induced spectral measures, their Cauchy transforms, the
asymptotic strength they determine, and the closed-form conversions between
the correlative and structural notions of confounding strength.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ClampedValueWarning,
    InvalidInput,
    OutOfDomain,
    SingularCovariance,
    SingularSupport,
)
from .spectral import (
    DiscreteMeasure,
    SymMatrix,
    as_sym,
    eigendecompose,
    induced_measure,
)
from .scm import RANK_TOL

__all__ = [
    "ComplexPoint",
    "cauchy_transform",
    "rank_one_perturb",
    "multiplication_map",
    "confounding_measure_identity",
    "asymptotic_beta",
    "gamma_to_beta",
    "beta_to_gamma",
]


@dataclass(frozen=True)
class ComplexPoint:
    """A point in the open upper half plane."""

    re: float
    im: float

    def __post_init__(self):
        if not self.im > 0.0:
            raise InvalidInput("imaginary part must be positive")

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


def cauchy_transform(mu: DiscreteMeasure, z) -> complex:
    """Evaluate sum_j w_j / (z - s_j) for z in the upper half plane.

    Accepts a :class:`ComplexPoint` or a plain complex number; a nonpositive
    imaginary part is rejected.
    """
    if isinstance(z, ComplexPoint):
        z = z.value
    z = complex(z)
    if not z.imag > 0.0:
        raise InvalidInput("the transform is defined on the upper half plane only")
    return complex(np.sum(mu.weights / (z - mu.support)))


def rank_one_perturb(mu: DiscreteMeasure) -> DiscreteMeasure:
    """Push a measure through the rank-one perturbation map.

    Realized on the finite-dimensional function space carried by the atoms:
    the multiplication-by-support operator plus the rank-one term u u^T with
    u_j = sqrt(w_j) (the constant function), whose induced measure is
    returned.  For an induced measure this is exactly the measure induced by
    the same vector on the rank-one-updated matrix.  Mass is preserved.
    """
    u = np.sqrt(mu.weights)
    b = SymMatrix(np.diag(mu.support) + np.outer(u, u))
    return induced_measure(eigendecompose(b), u)


def multiplication_map(mu: DiscreteMeasure) -> DiscreteMeasure:
    """Reweight each atom by the inverse square of its location.

    For an induced measure this is the measure induced by the inverse-matrix
    image of the inducing vector.

    Raises
    ------
    SingularSupport
        If an atom sits at zero.
    """
    if np.any(mu.support == 0.0):
        raise SingularSupport("multiplication map needs all support points nonzero")
    return DiscreteMeasure(mu.support, mu.weights / mu.support**2)


def confounding_measure_identity(sigma_ee: SymMatrix, b, c: float) -> DiscreteMeasure:
    """Spectral measure of the confounding part of the regression vector.

    Computes c^2 * M[R[mu]] with mu the measure the loading vector induces on
    the noise covariance.  At finite dimension this equals, atom by atom, the
    measure that c times the solve of the full covariance against the loading
    vector induces on the full covariance; the identity is this module's
    flagship cross-check.

    Raises
    ------
    SingularCovariance
        If the full covariance (noise plus rank-one) is singular.
    """
    sym = as_sym(sigma_ee)
    b = np.asarray(b, dtype=float)
    if b.shape != (sym.dim,):
        raise InvalidInput(f"b has shape {b.shape}, expected ({sym.dim},)")
    full = np.abs(np.linalg.eigvalsh(sym.entries + np.outer(b, b)))
    if full.min() <= RANK_TOL * full.max():
        raise SingularCovariance("noise covariance plus rank-one update is singular")
    noise_measure = induced_measure(eigendecompose(sym), b)
    return multiplication_map(rank_one_perturb(noise_measure)).scaled(c * c)


def asymptotic_beta(mu_inf: DiscreteMeasure, r_a: float, r_b: float, c: float) -> float:
    """Limit value of the structural strength for the rotation-invariant model.

    Feeds the limiting spectral distribution, scaled to mass r_b^2, through
    the rank-one perturbation and the inverse-square reweighting; with m the
    resulting total mass, returns c^2 m / (c^2 m + r_a^2).
    """
    if abs(mu_inf.mass - 1.0) > 1e-8:
        raise InvalidInput("mu_inf must be a probability measure")
    if np.any(mu_inf.support <= 0.0):
        raise InvalidInput("mu_inf must have positive support")
    if r_a < 0.0 or r_b < 0.0:
        raise InvalidInput("radii must be nonnegative")
    m = multiplication_map(rank_one_perturb(mu_inf.scaled(r_b * r_b))).mass
    denom = c * c * m + r_a * r_a
    if denom == 0.0:
        return 0.0
    return c * c * m / denom


def _validate_conversion_inputs(m_minus1, m_minus2, norm_sxy_sq, norm_ahat_sq):
    if not (m_minus1 > 0.0 and m_minus2 > 0.0):
        raise InvalidInput("inverse moments must be positive")
    if not (norm_sxy_sq > 0.0 and norm_ahat_sq > 0.0):
        raise InvalidInput("squared norms must be positive")


def gamma_to_beta(
    gamma: float,
    m_minus1: float,
    m_minus2: float,
    norm_sxy_sq: float,
    norm_ahat_sq: float,
) -> float:
    """Convert correlative to structural strength via the inverse-moment formula.

    Evaluates gamma * m_{-2} * ||sigma_xy||^2 / (||a_hat||^2 *
    (1 + gamma * m_{-1} * ||sigma_xy||^2)^2).  The asymptotic formula can
    leave [0, 1] at small dimension; the result is then clamped with a
    warning.
    """
    _validate_conversion_inputs(m_minus1, m_minus2, norm_sxy_sq, norm_ahat_sq)
    if not 0.0 <= gamma <= 1.0:
        raise InvalidInput("gamma must lie in [0, 1]")
    value = gamma * m_minus2 * norm_sxy_sq / (
        norm_ahat_sq * (1.0 + gamma * m_minus1 * norm_sxy_sq) ** 2
    )
    if value < 0.0 or value > 1.0:
        warnings.warn(
            f"converted strength {value:.6g} clamped to [0, 1]",
            ClampedValueWarning,
            stacklevel=2,
        )
        value = min(max(value, 0.0), 1.0)
    return float(value)


def beta_to_gamma(
    beta: float,
    m_minus1: float,
    m_minus2: float,
    norm_sxy_sq: float,
    norm_ahat_sq: float,
) -> float:
    """Convert structural to correlative strength (larger quadratic root).

    Defined for m_{-2} >= 4 m_{-1} beta ||a_hat||^2; a negative discriminant
    signals a strength inconsistent with the spectrum.  The zero-strength
    input maps to zero by the analytic limit.

    Raises
    ------
    OutOfDomain
        If the discriminant is negative.
    """
    _validate_conversion_inputs(m_minus1, m_minus2, norm_sxy_sq, norm_ahat_sq)
    if not 0.0 <= beta <= 1.0:
        raise InvalidInput("beta must lie in [0, 1]")
    if beta == 0.0:
        return 0.0
    disc = m_minus2 - 4.0 * m_minus1 * beta * norm_ahat_sq
    if disc < 0.0:
        raise OutOfDomain("discriminant negative: strength inconsistent with spectrum")
    root = (np.sqrt(m_minus2) + np.sqrt(disc)) ** 2
    return float(root / (4.0 * m_minus1**2 * beta * norm_ahat_sq * norm_sxy_sq))
