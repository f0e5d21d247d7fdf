"""Monte-Carlo success-probability experiments over (p x resource) grids.

A grid sweeps the observability p on one axis and a resource count on the
other: the sensor count m for stars, the relay/branch count R or the
per-relay/branch depth K for trees and serial stars. Every cell estimates
the probability that sparse recovery succeeds (relative l2 error below the
threshold) over a fixed number of trials.

Seeding is counter-based so cells and trials are reproducible in isolation
and under any degree of parallelism: trial t of cell (i, j) draws from a
Philox stream with key = master seed and counter = [0, t, j, i], consumed in
a fixed order (matrix, signal, noise, observation). Runs with the same
master seed are bitwise identical no matter how many workers execute them.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import ConfigError
from .recovery import cosamp, default_lasso_penalty, iht, lasso, omp, recovery_success
from .sensing import (
    AMPLITUDE_LAWS,
    MATRIX_FAMILIES,
    NORMALIZATIONS,
    SensingEnsemble,
    SparseProblem,
    assemble_observed,
    generate_bounded_noise,
    generate_matrix,
    generate_sparse_signal,
)
from .topology import ErasureParams, SerialStar, Star, Topology, Tree, sample_observation

__all__ = [
    "ExperimentConfig",
    "ExperimentGrid",
    "TransitionExtraction",
    "TransitionFit",
    "ComparisonReport",
    "EquivalenceReport",
    "CeilingReport",
    "trial_rng",
    "run_grid",
    "run_cell",
    "extract_transition",
    "fit_transition",
    "compare_topologies",
    "equivalence_report",
    "ceiling_probe",
    "SOLVERS",
    "FIT_FORMS",
]

SOLVERS = ("lasso", "omp", "iht", "cosamp")
FIT_FORMS = ("star", "tree", "serial", "serial-printed")
TOPOLOGIES = ("star", "tree", "serial")


@dataclass(frozen=True)
class ExperimentConfig:
    topology: str
    p_grid: tuple[float, ...]
    y_axis: str  # "m" | "R" | "K"
    y_grid: tuple[int, ...]
    q: float = 1.0
    fixed_R: int | None = None
    fixed_K: int | None = None
    solver: str = "lasso"
    lambda_policy: str = "scaled:0.01"
    debias: bool = True
    N: int = 200
    s: int = 20
    sigma: float = 0.0
    amplitude_law: str = "unit"
    ensemble: str = "gaussian"
    trials: int = 200
    seed: int = 0
    threshold: float = 1e-2
    normalization: str = "sqrt"
    max_iters: int = 600
    workers: int = 1

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise ConfigError(f"unknown topology {self.topology!r}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}")
        if self.ensemble not in MATRIX_FAMILIES:
            raise ConfigError(f"unknown ensemble {self.ensemble!r}")
        if self.amplitude_law not in AMPLITUDE_LAWS:
            raise ConfigError(f"unknown amplitude law {self.amplitude_law!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"unknown normalization {self.normalization!r}")
        if not self.p_grid or any(b <= a for a, b in zip(self.p_grid, self.p_grid[1:])):
            raise ConfigError("p_grid must be a nonempty strictly increasing sequence")
        if any(not 0.0 <= p <= 1.0 for p in self.p_grid):
            raise ConfigError("p_grid values must lie in [0, 1]")
        if not self.y_grid or any(b <= a for a, b in zip(self.y_grid, self.y_grid[1:])):
            raise ConfigError("y_grid must be a nonempty strictly increasing sequence")
        if any(v < 1 for v in self.y_grid):
            raise ConfigError("y_grid values must be >= 1")
        if not 0.0 <= self.q <= 1.0:
            raise ConfigError(f"q must be in [0, 1], got {self.q}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.threshold <= 0.0:
            raise ConfigError("threshold must be > 0")
        if not 1 <= self.s <= self.N:
            raise ConfigError(f"need 1 <= s <= N, got s={self.s}, N={self.N}")
        if self.sigma < 0.0:
            raise ConfigError("sigma must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.topology == "star":
            if self.y_axis != "m":
                raise ConfigError("star grids sweep the sensor count axis 'm'")
        else:
            if self.y_axis not in ("R", "K"):
                raise ConfigError(f"{self.topology} grids sweep 'R' or 'K'")
            if self.y_axis == "R" and (self.fixed_K is None or self.fixed_K < 1):
                raise ConfigError("sweeping R requires fixed_K >= 1")
            if self.y_axis == "K" and (self.fixed_R is None or self.fixed_R < 1):
                raise ConfigError("sweeping K requires fixed_R >= 1")

    def cell_topology(self, y_value: int) -> Topology:
        if self.topology == "star":
            return Star(y_value)
        R = y_value if self.y_axis == "R" else self.fixed_R
        K = y_value if self.y_axis == "K" else self.fixed_K
        return Tree(R, K) if self.topology == "tree" else SerialStar(R, K)

    def m_values(self) -> tuple[int, ...]:
        return tuple(self.cell_topology(y).m for y in self.y_grid)


def trial_rng(master_seed: int, i: int, j: int, t: int) -> np.random.Generator:
    """Independent stream for trial t of cell (p index i, y index j)."""
    return np.random.Generator(np.random.Philox(key=master_seed, counter=[0, t, j, i]))


def _lasso_penalty(policy: str, A: np.ndarray, y: np.ndarray) -> float:
    kind, _, arg = policy.partition(":")
    try:
        value = float(arg)
    except ValueError:
        raise ConfigError(f"bad lambda policy {policy!r}")
    if kind == "scaled":
        return default_lasso_penalty(A, y, coeff=value)
    if kind == "fixed":
        if value <= 0:
            raise ConfigError("fixed lambda must be > 0")
        return value
    raise ConfigError(f"bad lambda policy {policy!r}; use scaled:<coeff> or fixed:<value>")


def _solve(config: ExperimentConfig, A: np.ndarray, y: np.ndarray) -> np.ndarray:
    if config.solver == "lasso":
        lam = _lasso_penalty(config.lambda_policy, A, y)
        if lam == 0.0:
            return np.zeros(A.shape[1])
        return lasso(A, y, lam, max_iters=config.max_iters, debias=config.debias).x_hat
    if config.solver == "omp":
        return omp(A, y, config.s).x_hat
    if config.solver == "iht":
        return iht(A, y, config.s, max_iters=config.max_iters).x_hat
    return cosamp(A, y, config.s, max_iters=min(config.max_iters, 60)).x_hat


def _trial_success(config: ExperimentConfig, top: Topology, p: float, rng) -> bool:
    ensemble = SensingEnsemble(config.ensemble, top.m, config.N)
    A = generate_matrix(ensemble, rng)
    x, support = generate_sparse_signal(config.N, config.s, config.amplitude_law, rng)
    w = generate_bounded_noise(top.m, config.sigma, rng)
    outcome = sample_observation(top, ErasureParams(p, config.q), rng)
    if not outcome.observed:
        return False
    problem = SparseProblem(x, support, config.sigma, w)
    observed = assemble_observed(A, problem, outcome, config.normalization)
    x_hat = _solve(config, observed.matrix, observed.rhs)
    return recovery_success(x, x_hat, config.threshold)


def run_cell(config: ExperimentConfig, i: int, j: int) -> int:
    """Success count for one grid cell; reproducible in isolation."""
    p = config.p_grid[i]
    top = config.cell_topology(config.y_grid[j])
    hits = 0
    for t in range(config.trials):
        if _trial_success(config, top, p, trial_rng(config.seed, i, j, t)):
            hits += 1
    return hits


def _cell_task(args) -> tuple[int, int, int]:
    config, i, j = args
    return i, j, run_cell(config, i, j)


@dataclass(frozen=True)
class ExperimentGrid:
    config: ExperimentConfig
    successes: np.ndarray  # shape (len(p_grid), len(y_grid))

    @property
    def p_grid(self) -> tuple[float, ...]:
        return self.config.p_grid

    @property
    def y_grid(self) -> tuple[int, ...]:
        return self.config.y_grid

    @property
    def trials(self) -> int:
        return self.config.trials

    @property
    def probability(self) -> np.ndarray:
        return self.successes / self.trials

    @property
    def stderr(self) -> np.ndarray:
        prob = self.probability
        return np.sqrt(prob * (1.0 - prob) / self.trials)


def run_grid(config: ExperimentConfig) -> ExperimentGrid:
    """Estimate success probability on every grid cell.

    With workers > 1 the cells run in a process pool; results are identical
    to the single-worker run because every trial seeds its own stream.
    """
    cells = [(config, i, j) for i in range(len(config.p_grid)) for j in range(len(config.y_grid))]
    successes = np.zeros((len(config.p_grid), len(config.y_grid)), dtype=np.int64)
    if config.workers == 1:
        results = map(_cell_task, cells)
    else:
        pool = ProcessPoolExecutor(max_workers=config.workers)
        try:
            results = list(pool.map(_cell_task, cells))
        finally:
            pool.shutdown()
    for i, j, hits in results:
        successes[i, j] = hits
    return ExperimentGrid(config=config, successes=successes)


@dataclass(frozen=True)
class TransitionExtraction:
    """Per-p first y-grid value whose estimated success exceeds the threshold."""

    threshold: float
    points: tuple[tuple[float, int], ...]
    omitted: tuple[float, ...]  # p columns that never cross


def extract_transition(grid: ExperimentGrid, threshold: float = 0.9) -> TransitionExtraction:
    prob = grid.probability
    points = []
    omitted = []
    for i, p in enumerate(grid.p_grid):
        crossing = np.flatnonzero(prob[i] > threshold)
        if crossing.size:
            points.append((p, grid.y_grid[int(crossing[0])]))
        else:
            omitted.append(p)
    return TransitionExtraction(threshold, tuple(points), tuple(omitted))


@dataclass(frozen=True)
class TransitionFit:
    form: str
    alpha: float
    lam: float
    residual: float
    points_used: int
    converged: bool


def _transition_model(form: str, p: np.ndarray, alpha: float, lam: float, K, q) -> np.ndarray:
    tiny = 1e-12
    if form == "star":
        return -alpha / np.log(np.maximum(1.0 - lam * p, tiny))
    if form == "tree":
        g = 1.0 - q + q * np.maximum(1.0 - lam * p, 0.0) ** K
        return -alpha / np.log(np.maximum(g, tiny))
    ratio = (1.0 - p * lam) / np.maximum(1.0 - p + p * (1.0 - lam) * (p * lam) ** K, tiny)
    if form == "serial":
        return alpha / np.log(np.maximum(ratio, 1.0 + tiny))
    # "serial-printed": the alpha multiplier also appears inside the log
    return alpha / np.log(np.maximum(alpha * ratio, 1.0 + tiny))


def fit_transition(
    points,
    form: str,
    K: int | None = None,
    q: float | None = None,
) -> TransitionFit:
    """Least-squares fit of (alpha, lambda) to transition points.

    lambda is constrained to (0, 1]; a spread of lambda starts guards
    against local minima. `form` "serial-printed" reproduces the published
    expression with alpha inside the logarithm; "serial" is the corrected
    variant with alpha outside only.
    """
    if form not in FIT_FORMS:
        raise ConfigError(f"unknown fit form {form!r}; choose from {FIT_FORMS}")
    if form == "tree" and (K is None or q is None):
        raise ConfigError("tree fits need K and q")
    if form in ("serial", "serial-printed") and K is None:
        raise ConfigError("serial fits need K")
    pts = [(float(p), float(y)) for p, y in points]
    if len(pts) < 3:
        raise ConfigError(f"need at least 3 transition points, got {len(pts)}")
    p = np.asarray([pt[0] for pt in pts])
    y = np.asarray([pt[1] for pt in pts])

    def residuals(theta):
        return _transition_model(form, p, theta[0], theta[1], K, q) - y

    best = None
    for lam0 in (0.1, 0.2, 0.3, 0.5, 0.7, 0.8, 0.9):
        base = _transition_model(form if form != "serial-printed" else "serial", p, 1.0, lam0, K, q)
        alpha0 = float(np.clip(np.mean(y / np.maximum(base, 1e-9)), 1e-6, 1e9))
        try:
            res = least_squares(
                residuals,
                x0=[alpha0, lam0],
                bounds=([1e-9, 1e-9], [np.inf, 1.0]),
                method="trf",
            )
        except Exception:
            continue
        if best is None or res.cost < best.cost:
            best = res
    if best is None:
        raise RuntimeError("transition fit failed for every start")
    return TransitionFit(
        form=form,
        alpha=float(best.x[0]),
        lam=float(best.x[1]),
        residual=float(np.linalg.norm(best.fun)),
        points_used=len(pts),
        converged=bool(best.success),
    )


@dataclass(frozen=True)
class ComparisonReport:
    """Star vs tree/serial success at matched total sensor counts."""

    p_grid: tuple[float, ...]
    m_values: tuple[int, ...]
    star_probability: np.ndarray
    other_probability: np.ndarray
    other_topology: str
    violations: tuple[tuple[float, int], ...]  # (p, m) cells where star < other - 3 SE

    @property
    def ok(self) -> bool:
        return not self.violations


def compare_topologies(
    star_config: ExperimentConfig, other_config: ExperimentConfig
) -> ComparisonReport:
    """Run matched grids and check the star never loses beyond noise."""
    if star_config.topology != "star" or other_config.topology == "star":
        raise ConfigError("expected a star config and a tree/serial config")
    for attr in ("N", "s", "solver", "trials", "p_grid", "sigma"):
        if getattr(star_config, attr) != getattr(other_config, attr):
            raise ConfigError(f"configs must match on {attr}")
    if star_config.m_values() != other_config.m_values():
        raise ConfigError(
            f"total sensor counts differ: {star_config.m_values()} vs {other_config.m_values()}"
        )
    star = run_grid(star_config)
    other = run_grid(other_config)
    se = np.sqrt(star.stderr**2 + other.stderr**2)
    deficit = other.probability - star.probability
    bad = deficit > 3.0 * se
    violations = tuple(
        (star.p_grid[i], star_config.m_values()[j]) for i, j in zip(*np.nonzero(bad))
    )
    return ComparisonReport(
        p_grid=star.p_grid,
        m_values=star_config.m_values(),
        star_probability=star.probability,
        other_probability=other.probability,
        other_topology=other_config.topology,
        violations=violations,
    )


@dataclass(frozen=True)
class EquivalenceReport:
    """Two-proportion check that two grids are statistically indistinguishable."""

    max_z: float
    z_cap: float
    cells_checked: int
    violations: tuple[tuple[int, int], ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def equivalence_report(
    grid_a: ExperimentGrid, grid_b: ExperimentGrid, z_cap: float = 4.0
) -> EquivalenceReport:
    if grid_a.successes.shape != grid_b.successes.shape:
        raise ConfigError("grids must have the same shape")
    na, nb = grid_a.trials, grid_b.trials
    pooled = (grid_a.successes + grid_b.successes) / (na + nb)
    se = np.sqrt(pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb))
    diff = np.abs(grid_a.probability - grid_b.probability)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(diff == 0.0, 0.0, diff / se)
    violations = tuple((int(i), int(j)) for i, j in zip(*np.nonzero(z > z_cap)))
    return EquivalenceReport(
        max_z=float(np.max(z)),
        z_cap=z_cap,
        cells_checked=int(z.size),
        violations=violations,
    )


@dataclass(frozen=True)
class CeilingReport:
    """Success plateau from a K sweep at fixed R vs the analytic ceiling."""

    p_grid: tuple[float, ...]
    k_grid: tuple[int, ...]
    probability: np.ndarray
    ceiling: tuple[float, ...]  # per p column
    plateau: tuple[float, ...]  # max estimated success over the tail of the K sweep
    violations: tuple[tuple[float, int], ...]  # cells with prob > ceiling + 3 SE

    @property
    def ok(self) -> bool:
        return not self.violations


def ceiling_probe(config: ExperimentConfig) -> CeilingReport:
    """Sweep K at fixed R and compare success against the delivery ceiling.

    A tree's fusion center hears nothing with probability (1-q)^R no matter
    how large K grows, so success is capped at 1 - (1-q)^R; a serial star's
    cap is 1 - (1-p)^R. Stars have no cap below 1.
    """
    if config.y_axis != "K":
        raise ConfigError("ceiling probes sweep K at fixed R")
    grid = run_grid(config)
    R = config.fixed_R
    if config.topology == "tree":
        ceiling = tuple(1.0 - (1.0 - config.q) ** R for _ in config.p_grid)
    elif config.topology == "serial":
        ceiling = tuple(1.0 - (1.0 - p) ** R for p in config.p_grid)
    else:
        ceiling = tuple(1.0 for _ in config.p_grid)
    tail = max(1, len(config.y_grid) // 2)
    plateau = tuple(float(v) for v in grid.probability[:, -tail:].max(axis=1))
    limit = np.asarray(ceiling)[:, None] + 3.0 * grid.stderr
    bad = grid.probability > limit
    violations = tuple(
        (config.p_grid[i], config.y_grid[j]) for i, j in zip(*np.nonzero(bad))
    )
    return CeilingReport(
        p_grid=config.p_grid,
        k_grid=config.y_grid,
        probability=grid.probability,
        ceiling=ceiling,
        plateau=plateau,
        violations=violations,
    )
