"""Closed-form measurement bounds for sparse recovery under erasures.

Every bound shares the bracket

    B = (4/3) s ln(eN/s) + (14/3) s + (4/3) ln(2/eps)

and divides it by a topology-dependent log term built from d = exp(-C*delta^2):

    classic        B / (C delta^2)                       bound on m, no loss
    star           B / -ln(1 - p + p d)                  bound on m
    tree           B / -ln(1 - q + q (1 - p + p d)^K)    bound on R
    serial-star    B / ln[(1 - p d) / (1 - p + p(1-d)(p d)^K)]   bound on R

plus the K -> infinity limits of the last two (floors on R) and the
oversampling baseline B / (C delta^2) / p from average-RIC arguments.

The subGaussian concentration constant C has no closed form; it is a caller
parameter (default 1.0). All identities and orderings tested here hold for
every C > 0. A zero log-denominator yields +inf (recovery impossible, e.g.
p = 0); an infinite one (e.g. q = 1 in the relay floor) yields 0 flagged
degenerate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

__all__ = [
    "BoundQuery",
    "BoundResult",
    "AlgoConstants",
    "ALGO_CONSTANTS",
    "MonotonicityReport",
    "beta_classic",
    "beta_star",
    "beta_star_algo",
    "beta_tree",
    "beta_serial",
    "relay_lower_bound",
    "branch_lower_bound",
    "oversampling_baseline",
    "evaluate_bound",
    "verify_monotonicity",
    "BOUND_FORMULAS",
]


@dataclass(frozen=True)
class AlgoConstants:
    """Sparsity multiplier and RIC threshold a recovery algorithm needs."""

    r_algo: int
    delta_algo: float


ALGO_CONSTANTS: dict[str, AlgoConstants] = {
    "bp": AlgoConstants(2, 4.0 / math.sqrt(41.0)),
    "iht": AlgoConstants(6, 1.0 / math.sqrt(3.0)),
    "cosamp": AlgoConstants(8, math.sqrt(math.sqrt(11.0 / 3.0) - 1.0) / 2.0),
}


@dataclass(frozen=True)
class BoundQuery:
    N: int
    s: int
    delta: float
    eps: float
    C: float = 1.0
    p: float | None = None
    q: float | None = None
    K: int | None = None
    algo: str | None = None

    def __post_init__(self):
        if not 1 <= self.s <= self.N:
            raise ValueError(f"need 1 <= s <= N, got s={self.s}, N={self.N}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"eps must be in (0, 1), got {self.eps}")
        if self.C <= 0.0:
            raise ValueError(f"C must be > 0, got {self.C}")
        for name in ("p", "q"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.K is not None and self.K < 0:
            raise ValueError(f"K must be >= 0, got {self.K}")
        if self.algo is not None and self.algo not in ALGO_CONSTANTS:
            raise ValueError(f"unknown algorithm {self.algo!r}; choose from {sorted(ALGO_CONSTANTS)}")


@dataclass(frozen=True)
class BoundResult:
    """value = numerator / log_denominator, with the extended-real edge cases
    spelled out: +inf when the denominator vanishes, 0 (flagged degenerate)
    when it diverges."""

    formula: str
    value: float
    numerator: float
    log_denominator: float
    degenerate: bool = False


def _bracket(N: int, s: int, eps: float) -> float:
    return (4.0 / 3.0) * s * math.log(math.e * N / s) + (14.0 / 3.0) * s + (4.0 / 3.0) * math.log(2.0 / eps)


def _result(formula: str, numerator: float, denominator: float) -> BoundResult:
    if denominator == 0.0:
        return BoundResult(formula, math.inf, numerator, denominator)
    if math.isinf(denominator):
        return BoundResult(formula, 0.0, numerator, denominator, degenerate=True)
    return BoundResult(formula, numerator / denominator, numerator, denominator)


def _require(q: BoundQuery, *names: str) -> None:
    missing = [n for n in names if getattr(q, n) is None]
    if missing:
        raise ValueError(f"query is missing {missing}")


def beta_classic(q: BoundQuery) -> BoundResult:
    """Erasure-free sufficient measurement count: B / (C delta^2)."""
    return _result("classic", _bracket(q.N, q.s, q.eps), q.C * q.delta**2)


def beta_star(q: BoundQuery) -> BoundResult:
    """Star bound on m; reduces to beta_classic at p=1, +inf at p=0."""
    _require(q, "p")
    d = math.exp(-q.C * q.delta**2)
    denom = -math.log1p(-q.p * (1.0 - d))
    return _result("star", _bracket(q.N, q.s, q.eps), denom)


def beta_star_algo(q: BoundQuery) -> BoundResult:
    """Star bound specialized to a solver: bracket at r_algo*s, RIC delta_algo."""
    _require(q, "p", "algo")
    consts = ALGO_CONSTANTS[q.algo]
    rs = consts.r_algo * q.s
    if rs > q.N:
        raise ValueError(f"r_algo*s = {rs} exceeds N = {q.N}")
    d = math.exp(-q.C * consts.delta_algo**2)
    denom = -math.log1p(-q.p * (1.0 - d))
    numerator = (
        (4.0 / 3.0) * rs * math.log(math.e * q.N / rs)
        + (14.0 / 3.0) * rs
        + (4.0 / 3.0) * math.log(2.0 / q.eps)
    )
    return _result(f"star-{q.algo}", numerator, denom)


def beta_tree(q: BoundQuery) -> BoundResult:
    """Tree bound on the relay count R."""
    _require(q, "p", "q", "K")
    d = math.exp(-q.C * q.delta**2)
    inner = (1.0 - q.p * (1.0 - d)) ** q.K
    denom = -math.log1p(-q.q * (1.0 - inner))
    return _result("tree", _bracket(q.N, q.s, q.eps), denom)


def beta_serial(q: BoundQuery) -> BoundResult:
    """Serial-star bound on the branch count R."""
    _require(q, "p", "K")
    d = math.exp(-q.C * q.delta**2)
    num_arg = 1.0 - q.p * d
    den_arg = 1.0 - q.p + q.p * (1.0 - d) * (q.p * d) ** q.K
    denom = math.log(num_arg / den_arg) if den_arg > 0.0 else math.inf
    return _result("serial", _bracket(q.N, q.s, q.eps), denom)


def relay_lower_bound(q: BoundQuery) -> BoundResult:
    """K -> infinity floor on R for trees: B / ln(1/(1-q))."""
    _require(q, "q")
    denom = math.inf if q.q == 1.0 else -math.log1p(-q.q)
    return _result("relay-limit", _bracket(q.N, q.s, q.eps), denom)


def branch_lower_bound(q: BoundQuery) -> BoundResult:
    """K -> infinity floor on R for serial stars: B / ln((1 - p d)/(1 - p))."""
    _require(q, "p")
    d = math.exp(-q.C * q.delta**2)
    denom = math.inf if q.p == 1.0 else math.log((1.0 - q.p * d) / (1.0 - q.p))
    return _result("branch-limit", _bracket(q.N, q.s, q.eps), denom)


def oversampling_baseline(q: BoundQuery) -> BoundResult:
    """Average-RIC comparison point beta_classic / p."""
    _require(q, "p")
    return _result("baseline", _bracket(q.N, q.s, q.eps), q.C * q.delta**2 * q.p)


BOUND_FORMULAS = {
    "classic": beta_classic,
    "star": beta_star,
    "star-algo": beta_star_algo,
    "tree": beta_tree,
    "serial": beta_serial,
    "relay-limit": relay_lower_bound,
    "branch-limit": branch_lower_bound,
    "baseline": oversampling_baseline,
}


def evaluate_bound(formula: str, query: BoundQuery) -> BoundResult:
    try:
        fn = BOUND_FORMULAS[formula]
    except KeyError:
        raise ValueError(f"unknown bound formula {formula!r}; choose from {sorted(BOUND_FORMULAS)}")
    return fn(query)


@dataclass(frozen=True)
class MonotonicityReport:
    formula: str
    axis: str
    grid: tuple[float, ...]
    values: tuple[float, ...]
    violations: tuple[tuple[float, float], ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_monotonicity(
    formula: str, axis: str, grid, base: BoundQuery
) -> MonotonicityReport:
    """Check strict decrease of a bound along one parameter axis.

    Lists every adjacent grid pair where the value failed to strictly
    decrease; an empty list is the expected outcome on (0, 1) probability
    grids and K >= 1 grids.
    """
    if axis not in ("p", "q", "K", "delta"):
        raise ValueError(f"unsupported axis {axis!r}")
    grid = tuple(grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    values = []
    for g in grid:
        kwargs = {axis: int(g) if axis == "K" else float(g)}
        values.append(evaluate_bound(formula, replace(base, **kwargs)).value)
    violations = tuple(
        (grid[i], grid[i + 1]) for i in range(len(grid) - 1) if not values[i + 1] < values[i]
    )
    return MonotonicityReport(formula, axis, grid, tuple(values), violations)
