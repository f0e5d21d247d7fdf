"""Sensor network topologies and the erasure mechanics that produce T.

Measurement indices run over {1, ..., m}. For tree and serial-star networks
the layout is branch-major: index i = (r - 1) * K + k belongs to relay/branch
r at position k. In a serial-star branch, position 1 is the sensor farthest
from the fusion center and position K is adjacent to it; the channel at
position k carries everything sensed at positions <= k, so a measurement is
observed only if every channel from its position onward succeeded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Star",
    "Tree",
    "SerialStar",
    "Topology",
    "ErasureParams",
    "ObservationOutcome",
    "observe_probability",
    "marginal_index_probabilities",
    "sample_observation",
    "recompute_observed",
    "observed_counts_from_links",
]


@dataclass(frozen=True)
class Star:
    """m sensors, each linked straight to the fusion center."""

    m: int

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"sensor count must be >= 0, got {self.m}")

    @property
    def degenerate(self) -> bool:
        return self.m == 0

    @property
    def variant(self) -> str:
        return "star"


@dataclass(frozen=True)
class Tree:
    """R relays with K sensors each; relays forward to the fusion center."""

    R: int
    K: int

    def __post_init__(self):
        if self.R < 0 or self.K < 0:
            raise ValueError(f"relay/sensor counts must be >= 0, got R={self.R}, K={self.K}")

    @property
    def m(self) -> int:
        return self.R * self.K

    @property
    def degenerate(self) -> bool:
        return self.R == 0 or self.K == 0

    @property
    def variant(self) -> str:
        return "tree"


@dataclass(frozen=True)
class SerialStar:
    """R serial branches of K chained sensors feeding the fusion center."""

    R: int
    K: int

    def __post_init__(self):
        if self.R < 0 or self.K < 0:
            raise ValueError(f"branch counts must be >= 0, got R={self.R}, K={self.K}")

    @property
    def m(self) -> int:
        return self.R * self.K

    @property
    def degenerate(self) -> bool:
        return self.R == 0 or self.K == 0

    @property
    def variant(self) -> str:
        return "serial"


Topology = Union[Star, Tree, SerialStar]


@dataclass(frozen=True)
class ErasureParams:
    """Per-link delivery probabilities: p for sensor-side links, q for
    relay-to-fusion-center links (tree only; ignored elsewhere)."""

    p: float
    q: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must be in [0, 1], got {self.q}")


@dataclass(frozen=True)
class ObservationOutcome:
    """A realized observed index set plus the channel states behind it.

    observed      -- sorted 1-based indices that reached the fusion center
    sensor_links  -- per-measurement link state (star and tree)
    relay_links   -- per-relay fusion-center link state (tree only)
    last_failed   -- per-branch position of the last failed channel, 0 if the
                     whole branch came through (serial-star only)
    """

    observed: tuple[int, ...]
    sensor_links: tuple[bool, ...] | None = None
    relay_links: tuple[bool, ...] | None = None
    last_failed: tuple[int, ...] | None = None


def _position(topology: Tree | SerialStar, index: int) -> tuple[int, int]:
    """1-based (relay_or_branch, position) for a global measurement index."""
    r, k = divmod(index - 1, topology.K)
    return r + 1, k + 1


def observe_probability(topology: Topology, params: ErasureParams, index: int) -> float:
    """Probability that measurement `index` reaches the fusion center."""
    if not 1 <= index <= topology.m:
        raise IndexError(f"index {index} outside 1..{topology.m}")
    if isinstance(topology, Star):
        return params.p
    if isinstance(topology, Tree):
        return params.p * params.q
    _, k = _position(topology, index)
    return params.p ** (topology.K - k + 1)


def marginal_index_probabilities(topology: Topology, params: ErasureParams) -> np.ndarray:
    """Vector of per-index observation probabilities, length m."""
    if isinstance(topology, Star):
        return np.full(topology.m, params.p)
    if isinstance(topology, Tree):
        return np.full(topology.m, params.p * params.q)
    per_branch = params.p ** np.arange(topology.K, 0, -1, dtype=float)
    return np.tile(per_branch, topology.R)


def sample_observation(
    topology: Topology, params: ErasureParams, rng: np.random.Generator
) -> ObservationOutcome:
    """Draw one realization of the observed index set T.

    Draw order is fixed for seed reproducibility: tree draws all R relay
    links first and then the m sensor links in index order; star draws the m
    sensor links in index order; serial-star draws each branch's K channels
    in position order, branch by branch.
    """
    if isinstance(topology, Star):
        links = rng.random(topology.m) < params.p
        observed = tuple(int(i) + 1 for i in np.flatnonzero(links))
        return ObservationOutcome(observed=observed, sensor_links=tuple(bool(b) for b in links))

    if isinstance(topology, Tree):
        relay = rng.random(topology.R) < params.q
        links = rng.random(topology.m) < params.p
        up = np.repeat(relay, topology.K) if topology.K else np.zeros(0, dtype=bool)
        observed = tuple(int(i) + 1 for i in np.flatnonzero(links & up))
        return ObservationOutcome(
            observed=observed,
            sensor_links=tuple(bool(b) for b in links),
            relay_links=tuple(bool(b) for b in relay),
        )

    observed: list[int] = []
    last_failed: list[int] = []
    for r in range(topology.R):
        states = rng.random(topology.K) < params.p
        fails = np.flatnonzero(~states)
        j = int(fails[-1]) + 1 if fails.size else 0
        last_failed.append(j)
        base = r * topology.K
        observed.extend(range(base + j + 1, base + topology.K + 1))
    return ObservationOutcome(observed=tuple(observed), last_failed=tuple(last_failed))


def recompute_observed(topology: Topology, outcome: ObservationOutcome) -> tuple[int, ...]:
    """Re-derive T from the channel trace; used to check trace consistency."""
    if isinstance(topology, Star):
        assert outcome.sensor_links is not None
        return tuple(i + 1 for i, up in enumerate(outcome.sensor_links) if up)
    if isinstance(topology, Tree):
        assert outcome.sensor_links is not None and outcome.relay_links is not None
        out = []
        for i, up in enumerate(outcome.sensor_links):
            r = i // topology.K
            if up and outcome.relay_links[r]:
                out.append(i + 1)
        return tuple(out)
    assert outcome.last_failed is not None
    out = []
    for r, j in enumerate(outcome.last_failed):
        base = r * topology.K
        out.extend(range(base + j + 1, base + topology.K + 1))
    return tuple(out)


def observed_counts_from_links(
    topology: Topology, links: np.ndarray, relay_links: np.ndarray | None = None
) -> np.ndarray:
    """Vectorized |T| for a batch of channel-state assignments.

    `links` is a (batch, m) 0/1 array of sensor-side channel states in index
    order (serial-star: channel at each position). Tree additionally needs
    `relay_links` of shape (batch, R). Applies the same mechanics as
    `sample_observation`, just over many assignments at once; this is what
    the brute-force distribution oracle enumerates over.
    """
    if isinstance(topology, Star):
        return links.sum(axis=1)
    if isinstance(topology, Tree):
        if relay_links is None:
            raise ValueError("tree counts need relay_links")
        per_relay = links.reshape(len(links), topology.R, topology.K).sum(axis=2)
        return (per_relay * relay_links).sum(axis=1)
    branches = links.reshape(len(links), topology.R, topology.K)
    # position k observed iff channels k..K all succeed = all-success suffix
    suffix = np.cumprod(branches[:, :, ::-1], axis=2)
    return suffix.sum(axis=(1, 2))
