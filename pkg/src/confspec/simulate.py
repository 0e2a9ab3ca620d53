"""Seeded simulation sweeps over the generating model, with summary statistics."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import InvalidInput
from .estimator import GridConfig, estimate_from_data
from .scm import beta_prime, ground_truth, replication_rng, sample_dataset, sample_params

# Resamples used for the permutation p-value of the true-vs-estimated
# correlation; the attainable floor is 1 / (PERMUTATIONS + 1).
PERMUTATIONS = 2_000_000
_PERM_CHUNK = 100_000
# spawn_key reserved for the permutation stream; replication indexes stay below.
_PERM_STREAM = 0xFFFFFFFF

__all__ = ["PERMUTATIONS", "SimulationRecord", "resolve_workers",
           "run_replication", "simulation_sweep", "permutation_pvalue", "summarize"]


@dataclass(frozen=True)
class SimulationRecord:
    """One replication: ground truth next to the estimate."""

    rep: int
    seed: int
    d: int
    n: int
    beta_true: float
    gamma_true: float
    eta_true: float
    beta_hat: float
    eta_hat: float
    distance: float
    beta_prime: float


def resolve_workers(flag: int | None = None) -> int:
    """Worker count: explicit flag, then CONFSPEC_THREADS, then logical cores."""
    if flag is not None:
        if flag < 1:
            raise InvalidInput("worker count must be positive")
        return flag
    env = os.environ.get("CONFSPEC_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise InvalidInput(f"CONFSPEC_THREADS must be an integer, got {env!r}") from None
        if value < 1:
            raise InvalidInput("CONFSPEC_THREADS must be positive")
        return value
    return os.cpu_count() or 1


def run_replication(seed: int, rep: int, d: int, n: int,
                    grid: GridConfig | None = None) -> SimulationRecord:
    """Sample one model and dataset, estimate, and pair with the ground truth."""
    rng = replication_rng(seed, rep)
    params = sample_params(d, rng)
    data = sample_dataset(params, n, rng)
    truth = ground_truth(params)
    fit = estimate_from_data(data, grid)
    return SimulationRecord(
        rep=rep,
        seed=seed,
        d=d,
        n=n,
        beta_true=truth.beta,
        gamma_true=truth.gamma,
        eta_true=truth.eta,
        beta_hat=fit.beta_hat,
        eta_hat=fit.eta_hat,
        distance=fit.distance,
        beta_prime=beta_prime(data),
    )


def simulation_sweep(d: int, n: int, reps: int, seed: int,
                     grid: GridConfig | None = None,
                     workers: int | None = None) -> list[SimulationRecord]:
    """Run ``reps`` independent replications ordered by replication index.

    Each replication owns its own sub-stream of the root seed, so results do
    not depend on the worker count.
    """
    if reps < 1:
        raise InvalidInput("reps must be positive")
    grid = grid or GridConfig()
    count = resolve_workers(workers)

    def one(rep: int) -> SimulationRecord:
        return run_replication(seed, rep, d, n, grid)

    if count == 1 or reps == 1:
        return [one(rep) for rep in range(reps)]
    with ThreadPoolExecutor(max_workers=count) as pool:
        return list(pool.map(one, range(reps)))


def _standardize(v: np.ndarray) -> np.ndarray | None:
    centered = v - v.mean()
    norm = np.linalg.norm(centered)
    if norm == 0.0:
        return None
    return centered / norm


def permutation_pvalue(x, y, n_perm: int = PERMUTATIONS,
                       rng: np.random.Generator | None = None) -> float | None:
    """Two-sided permutation p-value for the Pearson correlation of x and y.

    Estimated as (1 + #{|r_perm| >= |r_obs|}) / (1 + n_perm); returns None
    when the correlation is undefined.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidInput("x and y must be 1-d arrays of equal length")
    if x.size < 3:
        return None
    xs, ys = _standardize(x), _standardize(y)
    if xs is None or ys is None:
        return None
    rng = rng or np.random.default_rng()
    r_obs = abs(float(xs @ ys))
    exceed = 0
    done = 0
    while done < n_perm:
        m = min(_PERM_CHUNK, n_perm - done)
        perms = rng.permuted(np.tile(ys, (m, 1)), axis=1)
        exceed += int(np.count_nonzero(np.abs(perms @ xs) >= r_obs))
        done += m
    return (exceed + 1) / (n_perm + 1)


def summarize(records: list[SimulationRecord], seed: int,
              n_perm: int = PERMUTATIONS) -> dict:
    """Correlation, permutation p-value and RMSE of the estimates in a sweep."""
    if not records:
        raise InvalidInput("no records to summarize")
    beta_true = np.array([r.beta_true for r in records])
    beta_hat = np.array([r.beta_hat for r in records])
    pearson_r = pearson_p = None
    if len(records) >= 3 and beta_true.std() > 0.0 and beta_hat.std() > 0.0:
        res = stats.pearsonr(beta_true, beta_hat)
        pearson_r, pearson_p = float(res.statistic), float(res.pvalue)
    perm_rng = np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(_PERM_STREAM,))
    )
    perm_p = permutation_pvalue(beta_true, beta_hat, n_perm=n_perm, rng=perm_rng)
    return {
        "reps": len(records),
        "d": records[0].d,
        "n": records[0].n,
        "seed": seed,
        "pearson_r": pearson_r,
        "pearson_pvalue": pearson_p,
        "permutation_pvalue": perm_p,
        "rmse": float(np.sqrt(np.mean((beta_hat - beta_true) ** 2))),
        "beta_true_mean": float(beta_true.mean()),
        "beta_hat_mean": float(beta_hat.mean()),
    }
