"""SubGaussian sensing matrices, sparse test signals, and observed systems.

All generators draw from an explicit numpy Generator so runs are seed
reproducible; nothing touches global RNG state. Matrix entries are i.i.d.
zero-mean unit-variance for every family, which is what makes the
|T|^(-1/2) row-energy normalization of `assemble_observed` put the expected
squared norm of each scaled row at 1 (the window the RIC lives in).

The theorem statements scale the observed matrix by |T|^(-1); the
concentration step behind them is about m^(-1) ||A z||^2, i.e. a |T|^(-1/2)
matrix scaling. We default to "sqrt" and keep "count" selectable for
exploring the printed variant.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import DegenerateObservationError
from .topology import ObservationOutcome

__all__ = [
    "SensingEnsemble",
    "SparseProblem",
    "ObservedSystem",
    "generate_matrix",
    "generate_sparse_signal",
    "generate_bounded_noise",
    "assemble_observed",
    "MATRIX_FAMILIES",
    "AMPLITUDE_LAWS",
    "NORMALIZATIONS",
]

MATRIX_FAMILIES = ("gaussian", "rademacher", "uniform")
AMPLITUDE_LAWS = ("unit", "normal")
NORMALIZATIONS = ("sqrt", "count", "none")


@dataclass(frozen=True)
class SensingEnsemble:
    """An i.i.d. zero-mean unit-variance entry distribution and dimensions."""

    family: str
    m: int
    N: int

    def __post_init__(self):
        if self.family not in MATRIX_FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {MATRIX_FAMILIES}")
        if self.m < 1 or self.N < 1:
            raise ValueError("dimensions must be >= 1")


@dataclass(frozen=True)
class SparseProblem:
    """Ground-truth signal with its support, plus bounded noise |w_i| <= sigma."""

    x: np.ndarray
    support: tuple[int, ...]
    sigma: float
    w: np.ndarray


@dataclass(frozen=True)
class ObservedSystem:
    """Rows of (A, y) that survived the erasures, with the applied scale."""

    matrix: np.ndarray
    rhs: np.ndarray
    scale: float
    indices: tuple[int, ...]


def generate_matrix(ensemble: SensingEnsemble, rng: np.random.Generator) -> np.ndarray:
    """Draw an m x N matrix with i.i.d. entries from the ensemble's family.

    uniform means uniform on [-sqrt(3), sqrt(3)], which has unit variance.
    """
    shape = (ensemble.m, ensemble.N)
    if ensemble.family == "gaussian":
        return rng.standard_normal(shape)
    if ensemble.family == "rademacher":
        return rng.integers(0, 2, shape).astype(float) * 2.0 - 1.0
    return rng.uniform(-sqrt(3.0), sqrt(3.0), shape)


def generate_sparse_signal(
    N: int, s: int, amplitude_law: str, rng: np.random.Generator
) -> tuple[np.ndarray, tuple[int, ...]]:
    """Exactly s nonzeros on a uniformly random support.

    amplitude_law "unit" puts equiprobable +-1 on the support (the usual
    hardest case for support recovery); "normal" draws standard normals.
    """
    if not 1 <= s <= N:
        raise ValueError(f"need 1 <= s <= N, got s={s}, N={N}")
    if amplitude_law not in AMPLITUDE_LAWS:
        raise ValueError(f"unknown amplitude law {amplitude_law!r}")
    support = np.sort(rng.choice(N, size=s, replace=False))
    x = np.zeros(N)
    if amplitude_law == "unit":
        x[support] = rng.integers(0, 2, s).astype(float) * 2.0 - 1.0
    else:
        x[support] = rng.standard_normal(s)
    return x, tuple(int(i) for i in support)


def generate_bounded_noise(m: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. uniform on [-sigma, sigma]; satisfies the hard bound by design."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0.0:
        return np.zeros(m)
    return rng.uniform(-sigma, sigma, m)


def assemble_observed(
    A: np.ndarray,
    problem: SparseProblem,
    outcome: ObservationOutcome,
    normalization: str = "sqrt",
) -> ObservedSystem:
    """Select the observed rows of y = A x + w and apply the RIC scaling.

    Rows are taken in ascending index order. "sqrt" scales both sides by
    |T|^(-1/2), "count" by |T|^(-1), "none" leaves them alone.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"unknown normalization {normalization!r}")
    if not outcome.observed and normalization != "none":
        raise DegenerateObservationError("no observed measurements to normalize")
    rows = np.asarray(outcome.observed, dtype=int) - 1
    y = A @ problem.x + problem.w
    if normalization == "sqrt":
        scale = 1.0 / sqrt(len(rows))
    elif normalization == "count":
        scale = 1.0 / len(rows)
    else:
        scale = 1.0
    return ObservedSystem(
        matrix=scale * A[rows, :],
        rhs=scale * y[rows],
        scale=scale,
        indices=tuple(outcome.observed),
    )
