"""Exact distributions of the observed-measurement count |T|.

Star networks give a binomial law. Tree and serial-star laws come out of
generating polynomials: the tree polynomial is [1 - q + q(1 - p + px)^K]^R
and the serial-star one is the R-th power of the per-branch polynomial
p^K x^K + sum_{k<K} (1-p) p^k x^k; in both cases the coefficient of x^i is
P{|T| = i}. Powers are taken by iterated convolution, which keeps everything
exact to near machine precision at the sizes we care about (R*K <= 10^4).

A brute-force oracle enumerates every channel-state assignment (capped at
2^24 states) and accumulates the probability mass per count, independently
of the polynomial route.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
from scipy.stats import binom

from .errors import CapacityError
from .topology import (
    ErasureParams,
    SerialStar,
    Star,
    Topology,
    Tree,
    observed_counts_from_links,
)

__all__ = [
    "CardinalityPmf",
    "pmf_star",
    "pmf_tree",
    "pmf_serial",
    "pmf_bruteforce",
    "pmf_transform_evaluate",
    "tree_closed_form",
    "serial_closed_form",
    "ENUMERATION_CAP_BITS",
    "CONVOLUTION_CAP",
]

# documented size limits
ENUMERATION_CAP_BITS = 24  # brute force enumerates at most 2^24 channel states
CONVOLUTION_CAP = 10_000  # R*K cap for the polynomial routes


@dataclass(frozen=True)
class CardinalityPmf:
    """P{|T| = i} for i = 0..m, together with the topology it came from."""

    topology: Topology
    p: float
    q: float
    probabilities: tuple  # floats, or Fractions in exact mode

    def __len__(self) -> int:
        return len(self.probabilities)

    @property
    def m(self) -> int:
        return len(self.probabilities) - 1

    def as_array(self) -> np.ndarray:
        return np.asarray([float(v) for v in self.probabilities])

    def mean(self) -> float:
        return float(np.dot(np.arange(len(self)), self.as_array()))


def _binom_poly(p: float, K: int) -> np.ndarray:
    """Coefficients of (1 - p + p x)^K; these are binomial pmf values."""
    return binom.pmf(np.arange(K + 1), K, p)


def _binom_poly_exact(p: Fraction, K: int) -> list[Fraction]:
    return [comb(K, i) * p**i * (1 - p) ** (K - i) for i in range(K + 1)]


def _poly_pow(base, R: int, exact: bool):
    """base(x)^R by repeated convolution (exact for Fraction coefficients)."""
    if exact:
        out = [Fraction(1)]
        for _ in range(R):
            new = [Fraction(0)] * (len(out) + len(base) - 1)
            for i, a in enumerate(out):
                if a:
                    for j, b in enumerate(base):
                        new[i + j] += a * b
            out = new
        return out
    out = np.ones(1)
    for _ in range(R):
        out = np.convolve(out, base)
    return out


def _check_size(m: int) -> None:
    if m > CONVOLUTION_CAP:
        raise CapacityError(f"total measurement count {m} exceeds cap {CONVOLUTION_CAP}")


def pmf_star(m: int, p: float, exact: bool = False) -> CardinalityPmf:
    """Binomial law: P{|T| = i} = C(m, i) (1-p)^(m-i) p^i."""
    if m < 0:
        raise ValueError("m must be >= 0")
    _check_size(m)
    if exact:
        probs = tuple(_binom_poly_exact(Fraction(p), m))
    else:
        probs = tuple(float(v) for v in binom.pmf(np.arange(m + 1), m, p))
    return CardinalityPmf(Star(m), float(p), 1.0, probs)


def pmf_tree(R: int, K: int, p: float, q: float, exact: bool = False) -> CardinalityPmf:
    """Coefficients of [1 - q + q (1 - p + p x)^K]^R."""
    if R < 1 or K < 1:
        raise ValueError("tree pmf needs R >= 1 and K >= 1")
    _check_size(R * K)
    if exact:
        pf, qf = Fraction(p), Fraction(q)
        relay = [qf * c for c in _binom_poly_exact(pf, K)]
        relay[0] += 1 - qf
        probs = tuple(_poly_pow(relay, R, exact=True))
    else:
        relay = q * _binom_poly(p, K)
        relay[0] += 1.0 - q
        probs = tuple(float(v) for v in _poly_pow(relay, R, exact=False))
    return CardinalityPmf(Tree(R, K), float(p), float(q), probs)


def pmf_serial(R: int, K: int, p: float, exact: bool = False) -> CardinalityPmf:
    """R-fold convolution of the per-branch law (1-p)p^k for k < K, p^K at K."""
    if R < 1 or K < 1:
        raise ValueError("serial pmf needs R >= 1 and K >= 1")
    _check_size(R * K)
    if exact:
        pf = Fraction(p)
        branch = [(1 - pf) * pf**k for k in range(K)] + [pf**K]
        probs = tuple(_poly_pow(branch, R, exact=True))
    else:
        branch = np.concatenate([(1.0 - p) * p ** np.arange(K, dtype=float), [p**K]])
        probs = tuple(float(v) for v in _poly_pow(branch, R, exact=False))
    return CardinalityPmf(SerialStar(R, K), float(p), 1.0, probs)


def _channel_count(topology: Topology) -> int:
    if isinstance(topology, Tree):
        return topology.R + topology.m
    return topology.m


def pmf_bruteforce(
    topology: Topology, params: ErasureParams, exact: bool = False
) -> CardinalityPmf:
    """Enumerate all channel-state assignments and bin the mass per |T|.

    Independent oracle for the polynomial routes: walks every 0/1 assignment
    of the network's channels, weighs it by the product of per-channel
    probabilities, and applies the topology mechanics to count observations.
    """
    n = _channel_count(topology)
    if n > ENUMERATION_CAP_BITS:
        raise CapacityError(
            f"{n} channels exceeds the 2^{ENUMERATION_CAP_BITS} enumeration cap"
        )
    m = topology.m
    if exact:
        return _bruteforce_exact(topology, params)

    p, q = params.p, params.q
    n_relay = topology.R if isinstance(topology, Tree) else 0
    n_sensor = n - n_relay
    mass = np.zeros(m + 1)
    chunk = 1 << 20
    for start in range(0, 1 << n, chunk):
        codes = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        bits = (codes[:, None] >> np.arange(n)) & 1
        if n_relay:
            relay_bits = bits[:, :n_relay]
            sensor_bits = bits[:, n_relay:]
        else:
            relay_bits = None
            sensor_bits = bits
        counts = observed_counts_from_links(topology, sensor_bits, relay_bits)
        a = sensor_bits.sum(axis=1)
        weights = p**a * (1.0 - p) ** (n_sensor - a)
        if n_relay:
            c = relay_bits.sum(axis=1)
            weights = weights * q**c * (1.0 - q) ** (n_relay - c)
        mass += np.bincount(counts, weights=weights, minlength=m + 1)
    return CardinalityPmf(topology, p, q, tuple(float(v) for v in mass))


def _bruteforce_exact(topology: Topology, params: ErasureParams) -> CardinalityPmf:
    # exact mode walks states one by one; keep it for small oracle comparisons
    n = _channel_count(topology)
    if n > 16:
        raise CapacityError("exact brute force is capped at 16 channels")
    p, q = Fraction(params.p), Fraction(params.q)
    n_relay = topology.R if isinstance(topology, Tree) else 0
    mass = [Fraction(0)] * (topology.m + 1)
    for code in range(1 << n):
        bits = [(code >> i) & 1 for i in range(n)]
        relay, sensor = bits[:n_relay], bits[n_relay:]
        w = Fraction(1)
        for b in sensor:
            w *= p if b else 1 - p
        for b in relay:
            w *= q if b else 1 - q
        links = np.asarray([sensor], dtype=np.int64)
        relays = np.asarray([relay], dtype=np.int64) if n_relay else None
        count = int(observed_counts_from_links(topology, links, relays)[0])
        mass[count] += w
    return CardinalityPmf(topology, params.p, params.q, tuple(mass))


def pmf_transform_evaluate(pmf: CardinalityPmf, x: float) -> float:
    """Probability generating function sum_i P{|T|=i} x^i (Horner)."""
    acc = 0.0
    for c in reversed(pmf.as_array()):
        acc = acc * x + c
    return float(acc)


def tree_closed_form(R: int, K: int, p: float, q: float, x: float) -> float:
    """[1 - q + q(1 - p + p x)^K]^R evaluated directly."""
    return (1.0 - q + q * (1.0 - p + p * x) ** K) ** R


def serial_closed_form(R: int, K: int, p: float, x: float) -> float:
    """[(1 - p + p^(K+1) x^K (1 - x)) / (1 - p x)]^R.

    Cross-check only: has a removable singularity at x = 1/p, which the
    per-branch product form used by `pmf_serial` avoids.
    """
    denom = 1.0 - p * x
    if denom == 0.0:
        raise ZeroDivisionError("closed form undefined at x = 1/p")
    return ((1.0 - p + p ** (K + 1) * x**K * (1.0 - x)) / denom) ** R
