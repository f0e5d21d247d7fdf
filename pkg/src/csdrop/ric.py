"""Restricted isometry constants by subset enumeration or subset sampling.

delta_s of a matrix A is the largest deviation of an s-column Gram spectrum
from 1: max over supports S of max(lambda_max(A_S^T A_S) - 1,
1 - lambda_min(A_S^T A_S)). Exact mode enumerates every support in
lexicographic order (capped at 10^6 subsets); sampled mode takes a running
maximum over random supports and therefore never overshoots the true value.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb, sqrt

import numpy as np

from .errors import CapacityError
from .sensing import SensingEnsemble, generate_matrix
from .topology import ErasureParams, Topology, sample_observation

__all__ = [
    "RicEstimate",
    "RicFrequencyReport",
    "ric_exact",
    "ric_sampled",
    "ric_empirical_vs_bound",
    "EXACT_SUBSET_CAP",
]

EXACT_SUBSET_CAP = 10**6


@dataclass(frozen=True)
class RicEstimate:
    value: float
    mode: str  # "exact" | "sampled-lower-bound"
    subsets_examined: int
    extremal_support: tuple[int, ...]


def _deviation(gram_sub: np.ndarray) -> float:
    eig = np.linalg.eigvalsh(gram_sub)
    return max(float(eig[-1]) - 1.0, 1.0 - float(eig[0]))


def ric_exact(A: np.ndarray, s: int, cap: int = EXACT_SUBSET_CAP) -> RicEstimate:
    """Exact delta_s over all C(N, s) supports."""
    N = A.shape[1]
    if not 1 <= s <= N:
        raise ValueError(f"need 1 <= s <= N, got s={s}, N={N}")
    total = comb(N, s)
    if total > cap:
        raise CapacityError(
            f"C({N},{s}) = {total} subsets exceeds the cap {cap}; use ric_sampled"
        )
    gram = A.T @ A
    best = -np.inf
    best_support: tuple[int, ...] = ()
    for support in combinations(range(N), s):
        idx = np.asarray(support)
        dev = _deviation(gram[np.ix_(idx, idx)])
        if dev > best:
            best, best_support = dev, support
    return RicEstimate(best, "exact", total, best_support)


def ric_sampled(
    A: np.ndarray, s: int, trials: int, rng: np.random.Generator
) -> RicEstimate:
    """Running maximum over `trials` random supports; a lower bound on delta_s."""
    N = A.shape[1]
    if not 1 <= s <= N:
        raise ValueError(f"need 1 <= s <= N, got s={s}, N={N}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    gram = A.T @ A
    best = -np.inf
    best_support: tuple[int, ...] = ()
    for _ in range(trials):
        idx = np.sort(rng.choice(N, size=s, replace=False))
        dev = _deviation(gram[np.ix_(idx, idx)])
        if dev > best:
            best, best_support = dev, tuple(int(i) for i in idx)
    return RicEstimate(best, "sampled-lower-bound", trials, best_support)


@dataclass(frozen=True)
class RicFrequencyReport:
    """Empirical frequency of {delta_s < delta_target} over draws of (A, T)."""

    frequency: float
    successes: int
    trials: int
    stderr: float
    degenerate_trials: int
    mean_observed: float
    delta_target: float


def ric_empirical_vs_bound(
    ensemble: SensingEnsemble,
    topology: Topology,
    params: ErasureParams,
    s: int,
    delta_target: float,
    trials: int,
    rng: np.random.Generator,
) -> RicFrequencyReport:
    """Monte-Carlo frequency of the RIC event behind the measurement bounds.

    Each trial draws a fresh matrix and observation set, scales the observed
    rows by |T|^(-1/2), and checks delta_s < delta_target exactly. An empty T
    counts as a failed trial. No assertion against a bound value is made
    here (the concentration constant is unknown); this is a reporting tool.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hits = 0
    degenerate = 0
    observed_sizes = []
    for _ in range(trials):
        A = generate_matrix(ensemble, rng)
        outcome = sample_observation(topology, params, rng)
        observed_sizes.append(len(outcome.observed))
        if not outcome.observed:
            degenerate += 1
            continue
        rows = np.asarray(outcome.observed) - 1
        sub = A[rows, :] / sqrt(len(rows))
        if ric_exact(sub, s).value < delta_target:
            hits += 1
    freq = hits / trials
    stderr = sqrt(freq * (1.0 - freq) / trials)
    return RicFrequencyReport(
        frequency=freq,
        successes=hits,
        trials=trials,
        stderr=stderr,
        degenerate_trials=degenerate,
        mean_observed=float(np.mean(observed_sizes)),
        delta_target=delta_target,
    )
