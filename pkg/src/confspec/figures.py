"""Matplotlib renderings written next to the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import IoError
from .estimator import ConfoundingEstimate
from .simulate import SimulationRecord

# Fixed metadata keeps repeated runs byte-stable.
_PNG_METADATA = {"Software": "confspec"}

__all__ = ["save_simulation_figure", "save_estimate_figure"]


def _save(fig, path):
    try:
        fig.savefig(path, dpi=150, metadata=_PNG_METADATA, bbox_inches="tight")
    except OSError as err:
        raise IoError(f"{path}: {err}") from err
    finally:
        plt.close(fig)


def save_simulation_figure(records: list[SimulationRecord], path) -> None:
    """Scatter of true versus estimated confounding strength."""
    beta_true = [r.beta_true for r in records]
    beta_hat = [r.beta_hat for r in records]
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.plot([0, 1], [0, 1], color="0.7", lw=1, zorder=1)
    ax.scatter(beta_true, beta_hat, s=18, alpha=0.7, zorder=2)
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel("true confounding strength")
    ax.set_ylabel("estimated confounding strength")
    if records:
        ax.set_title(f"d={records[0].d}, n={records[0].n}, reps={len(records)}")
    _save(fig, path)


def save_estimate_figure(result: ConfoundingEstimate, path, title: str | None = None) -> None:
    """Observed and fitted spectral weights over the covariance eigenvalues."""
    lam = np.asarray(result.eigenvalues)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.vlines(lam, 0.0, result.observed_weights, color="C0", lw=1.5, alpha=0.8)
    ax.plot(lam, result.observed_weights, "o", color="C0", ms=5, label="observed")
    ax.plot(lam, result.fitted_weights, "s", color="C1", ms=5, mfc="none",
            label=f"fitted (beta={result.beta_hat:.2f})")
    ax.set_xlabel("eigenvalue")
    ax.set_ylabel("weight")
    ax.legend()
    if title:
        ax.set_title(title)
    _save(fig, path)
