"""Config parsing and the file formats the CLI writes.

Experiment configs come as plain key=value lines or as a JSON object with
the same keys: topology, m|R|K, p_grid, q, solver, lambda_policy, trials,
seed, sigma, N, s, threshold, plus ensemble, amplitude, normalization,
max_iters, workers, debias. Exactly one of m/R/K must be a grid (comma list
or lo:hi:step range); that becomes the swept axis. Grid CSV columns are
p, y_axis_value, successes, trials, probability, stderr with rows in
p-major order; floats print in shortest round-trip form so identical runs
give byte-identical files.
"""

from __future__ import annotations

import json
from typing import Any

from . import __version__
from .errors import ConfigError
from .experiments import ExperimentConfig, ExperimentGrid, TransitionFit
from .pmf import CardinalityPmf
from .topology import SerialStar, Star, Tree

__all__ = [
    "parse_config_text",
    "config_from_mapping",
    "grid_to_csv",
    "grid_rows_from_csv",
    "pmf_to_csv",
    "fit_to_dict",
    "run_manifest",
]


def _parse_scalar(text: str) -> Any:
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def _parse_grid(value: Any, integer: bool) -> tuple:
    """Grids come as comma lists, lo:hi:step ranges, or JSON arrays."""
    if isinstance(value, (list, tuple)):
        items = value
    else:
        text = str(value).strip()
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ConfigError(f"range grids look like lo:hi:step, got {text!r}")
            lo, hi, step = (float(v) for v in parts)
            if step <= 0:
                raise ConfigError("grid step must be > 0")
            items = []
            v = lo
            while v <= hi + 1e-9:
                items.append(v)
                v += step
        else:
            items = [v for v in text.split(",") if v.strip()]
    try:
        if integer:
            return tuple(int(round(float(v))) for v in items)
        return tuple(round(float(v), 12) for v in items)
    except (TypeError, ValueError):
        raise ConfigError(f"bad grid value {value!r}")


def parse_config_text(text: str) -> dict[str, Any]:
    """key=value lines, or a JSON object if the text starts with '{'."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON config: {exc}")
        if not isinstance(data, dict):
            raise ConfigError("JSON config must be an object")
        return data
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


_AXIS_KEYS = ("m", "R", "K")


def _is_grid(value: Any) -> bool:
    if isinstance(value, (list, tuple)):
        return True
    text = str(value)
    return ("," in text) or (":" in text)


def config_from_mapping(data: dict[str, Any]) -> ExperimentConfig:
    """Build an ExperimentConfig from parsed config keys."""
    data = dict(data)
    topology = data.pop("topology", None)
    if topology not in ("star", "tree", "serial"):
        raise ConfigError(f"config needs topology=star|tree|serial, got {topology!r}")
    if "p_grid" not in data:
        raise ConfigError("config needs p_grid")
    p_grid = _parse_grid(data.pop("p_grid"), integer=False)

    axis_values = {k: data.pop(k) for k in _AXIS_KEYS if k in data}
    swept = [k for k, v in axis_values.items() if _is_grid(v)]
    if len(swept) != 1:
        raise ConfigError(f"exactly one of m/R/K must be a grid, got grids for {swept or 'none'}")
    y_axis = swept[0]
    y_grid = _parse_grid(axis_values.pop(y_axis), integer=True)
    fixed = {k: int(_parse_scalar(str(v))) for k, v in axis_values.items()}
    if topology == "star" and y_axis != "m":
        raise ConfigError("star configs sweep m")
    if topology != "star" and y_axis == "m":
        raise ConfigError(f"{topology} configs sweep R or K, not m")

    kwargs: dict[str, Any] = {
        "topology": topology,
        "p_grid": p_grid,
        "y_axis": y_axis,
        "y_grid": y_grid,
        "fixed_R": fixed.get("R"),
        "fixed_K": fixed.get("K"),
    }
    renames = {"amplitude": "amplitude_law"}
    known = {
        "q", "solver", "lambda_policy", "debias", "N", "s", "sigma", "amplitude",
        "amplitude_law", "ensemble", "trials", "seed", "threshold", "normalization",
        "max_iters", "workers",
    }
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        kwargs[renames.get(key, key)] = _parse_scalar(str(value)) if not isinstance(value, (int, float, bool)) else value
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc))


def _fmt(value: float) -> str:
    return repr(float(value))


def grid_to_csv(grid: ExperimentGrid) -> str:
    """p-major rows of (p, y_axis_value, successes, trials, probability, stderr)."""
    lines = ["p,y_axis_value,successes,trials,probability,stderr"]
    prob = grid.probability
    err = grid.stderr
    for i, p in enumerate(grid.p_grid):
        for j, y in enumerate(grid.y_grid):
            lines.append(
                f"{_fmt(p)},{y},{int(grid.successes[i, j])},{grid.trials},"
                f"{_fmt(prob[i, j])},{_fmt(err[i, j])}"
            )
    return "\n".join(lines) + "\n"


def grid_rows_from_csv(text: str) -> list[tuple[float, float, float]]:
    """(p, y, probability) rows back out of a grid CSV."""
    rows = []
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ConfigError("empty grid CSV")
    header = lines[0].split(",")
    try:
        ip, iy, iprob = header.index("p"), header.index("y_axis_value"), header.index("probability")
    except ValueError:
        raise ConfigError("grid CSV needs p, y_axis_value and probability columns")
    for ln in lines[1:]:
        parts = ln.split(",")
        rows.append((float(parts[ip]), float(parts[iy]), float(parts[iprob])))
    return rows


def _topology_echo(pmf: CardinalityPmf) -> str:
    top = pmf.topology
    if isinstance(top, Star):
        shape = f"m={top.m}"
    else:
        shape = f"R={top.R} K={top.K}"
    echo = f"topology={top.variant} {shape} p={_fmt(pmf.p)}"
    if isinstance(top, Tree):
        echo += f" q={_fmt(pmf.q)}"
    return echo


def pmf_to_csv(pmf: CardinalityPmf) -> str:
    lines = [f"# {_topology_echo(pmf)}", "i,probability"]
    for i, v in enumerate(pmf.as_array()):
        lines.append(f"{i},{_fmt(v)}")
    return "\n".join(lines) + "\n"


def fit_to_dict(fit: TransitionFit) -> dict[str, Any]:
    return {
        "form": fit.form,
        "alpha": fit.alpha,
        "lambda": fit.lam,
        "residual": fit.residual,
        "points_used": fit.points_used,
        "converged": fit.converged,
    }


def run_manifest(config: ExperimentConfig) -> dict[str, Any]:
    """Everything needed to reproduce a run, including the seeding scheme."""
    echo = {
        "topology": config.topology,
        "p_grid": list(config.p_grid),
        "y_axis": config.y_axis,
        "y_grid": list(config.y_grid),
        "q": config.q,
        "fixed_R": config.fixed_R,
        "fixed_K": config.fixed_K,
        "solver": config.solver,
        "lambda_policy": config.lambda_policy,
        "debias": config.debias,
        "N": config.N,
        "s": config.s,
        "sigma": config.sigma,
        "amplitude_law": config.amplitude_law,
        "ensemble": config.ensemble,
        "trials": config.trials,
        "seed": config.seed,
        "threshold": config.threshold,
        "normalization": config.normalization,
        "max_iters": config.max_iters,
        "workers": config.workers,
    }
    return {
        "version": __version__,
        "config": echo,
        "seeding": "Philox(key=seed, counter=[0, trial, y_index, p_index]); "
        "draw order per trial: matrix, signal, noise, observation",
    }
