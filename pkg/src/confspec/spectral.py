"""Symmetric-matrix spectra and the discrete measures they induce.

Two measure constructions are used throughout the package: the uniform
("tracial") distribution over a spectrum, and the squared-projection weights
a vector places on each eigenspace.  Both are represented in the same
two-vector form: a strictly descending support paired with nonnegative
weights.  Total mass is the weight sum and is not necessarily 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInput, SingularSupport

# Atoms closer than ATOM_MERGE_TOL * (support span + 1) collapse into one.
# Near-ties make individual squared projections meaningless while their sum
# over the eigenspace stays well defined.
ATOM_MERGE_TOL = 1e-9

# Contract tolerances for eigendecompositions (relative Frobenius residual of
# the reconstruction, and deviation of pairwise eigenvector inner products
# from the identity).
RECONSTRUCTION_TOL = 1e-8
ORTHONORMALITY_TOL = 1e-10

__all__ = [
    "ATOM_MERGE_TOL",
    "RECONSTRUCTION_TOL",
    "ORTHONORMALITY_TOL",
    "SymMatrix",
    "EigenDecomposition",
    "DiscreteMeasure",
    "as_sym",
    "eigendecompose",
    "tracial_measure",
    "induced_measure",
    "tracial_inducing_vector",
    "measure_expectation",
    "moment",
]


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SymMatrix:
    """Dense real symmetric matrix, symmetrized on construction."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise InvalidInput(f"expected a square matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInput("matrix entries must be finite")
        object.__setattr__(self, "entries", _frozen(0.5 * (arr + arr.T)))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def as_sym(m) -> SymMatrix:
    """Coerce an array-like to :class:`SymMatrix` (no copy if already one)."""
    return m if isinstance(m, SymMatrix) else SymMatrix(m)


@dataclass(frozen=True)
class EigenDecomposition:
    """Descending eigenvalues paired with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues))
        object.__setattr__(self, "eigenvectors", _frozen(self.eigenvectors))

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        """Reassemble the source matrix as sum_j lambda_j phi_j phi_j^T."""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def _merge_atoms(support: np.ndarray, weights: np.ndarray):
    order = np.argsort(-support, kind="stable")
    s, w = support[order], weights[order]
    threshold = ATOM_MERGE_TOL * (s[0] - s[-1] + 1.0)
    out_s, out_w = [], []
    start = 0
    for i in range(1, s.size + 1):
        if i < s.size and s[i - 1] - s[i] < threshold:
            continue
        block_s, block_w = s[start:i], w[start:i]
        total = float(block_w.sum())
        if total > 0.0:
            pos = float(block_s @ block_w) / total
        else:
            pos = float(block_s.mean())
        out_s.append(pos)
        out_w.append(total)
        start = i
    return np.asarray(out_s), np.asarray(out_w)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Atomic measure on the real line.

    Attributes
    ----------
    support : ndarray
        Atom locations, strictly descending after merging.
    weights : ndarray
        Nonnegative atom weights; ``mass`` is their sum.
    """

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        support = np.atleast_1d(np.asarray(self.support, dtype=float))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if support.ndim != 1 or support.shape != weights.shape:
            raise InvalidInput("support and weights must be 1-d vectors of equal length")
        if support.size == 0:
            raise InvalidInput("a measure needs at least one atom")
        if not (np.all(np.isfinite(support)) and np.all(np.isfinite(weights))):
            raise InvalidInput("support and weights must be finite")
        if np.any(weights < -1e-12):
            raise InvalidInput("weights must be nonnegative")
        weights = np.maximum(weights, 0.0)
        support, weights = _merge_atoms(support, weights)
        object.__setattr__(self, "support", _frozen(support))
        object.__setattr__(self, "weights", _frozen(weights))

    @property
    def natoms(self) -> int:
        return self.support.size

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def scaled(self, factor: float) -> "DiscreteMeasure":
        """Same support with all weights multiplied by ``factor`` (>= 0)."""
        if factor < 0.0:
            raise InvalidInput("scaling factor must be nonnegative")
        return DiscreteMeasure(self.support, self.weights * factor)


def eigendecompose(m: SymMatrix) -> EigenDecomposition:
    """Eigendecompose a symmetric matrix with eigenvalues sorted descending.

    Raises
    ------
    InvalidInput
        If the entries are not finite.
    """
    sym = as_sym(m)
    vals, vecs = np.linalg.eigh(sym.entries)
    return EigenDecomposition(vals[::-1], vecs[:, ::-1])


def tracial_measure(e: EigenDecomposition) -> DiscreteMeasure:
    """Uniform probability distribution over the eigenvalues of a matrix."""
    d = e.dim
    return DiscreteMeasure(e.eigenvalues, np.full(d, 1.0 / d))


def induced_measure(e: EigenDecomposition, psi) -> DiscreteMeasure:
    """Spectral measure a vector induces on a matrix.

    The atom at eigenvalue ``lambda_j`` carries weight ``<psi, phi_j>^2``, so
    the total mass equals ``||psi||^2``.

    Parameters
    ----------
    e : EigenDecomposition
        Decomposition of the matrix.
    psi : array_like
        Vector of length ``e.dim``.
    """
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (e.dim,):
        raise InvalidInput(f"psi has shape {psi.shape}, expected ({e.dim},)")
    if not np.all(np.isfinite(psi)):
        raise InvalidInput("psi must be finite")
    coeffs = e.eigenvectors.T @ psi
    return DiscreteMeasure(e.eigenvalues, coeffs**2)


def tracial_inducing_vector(e: EigenDecomposition) -> np.ndarray:
    """The unit vector (1/sqrt(d)) * sum_j phi_j, which induces the tracial measure."""
    return e.eigenvectors.sum(axis=1) / np.sqrt(e.dim)


def measure_expectation(mu: DiscreteMeasure, f: Callable[[float], float]) -> float:
    """Integrate a pointwise function against the measure: sum_j w_j f(s_j)."""
    values = np.array([float(f(s)) for s in mu.support])
    return float(mu.weights @ values)


def moment(mu: DiscreteMeasure, k: int) -> float:
    """The k-th moment sum_j w_j s_j^k; k may be negative.

    Raises
    ------
    SingularSupport
        For negative ``k`` when the support contains a zero atom.
    """
    if k < 0 and np.any(mu.support == 0.0):
        raise SingularSupport("negative moment of a measure with a zero atom")
    return float(mu.weights @ mu.support ** float(k))
