"""Seeded generation of labeled time series from chaotic benchmark systems.

Three systems are supported: the logistic map, the Henon map, and the
Lorenz equations (integrated with fixed-step classical RK4). Parameter
values and initial conditions are drawn uniformly from closed intervals,
so a `SystemSpec` describes a *distribution* of trajectories rather than
a single one. All randomness flows through numpy's PCG64 generator;
`derive_seed` gives the documented scheme for splitting one master seed
into independent per-sample streams.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

GENERATOR_NAME = "numpy-pcg64"
OVERFLOW_GUARD = 1e12
DEFAULT_BURN_IN = 1000
DEFAULT_LORENZ_DT = 0.01

# canonical draw order: parameters first, then initial conditions
_SYSTEM_VARS = {
    "logistic": (("a",), ("x0",), ("x",)),
    "henon": (("a", "b"), ("x0", "y0"), ("x", "y")),
    "lorenz": (("sigma", "rho", "beta"), ("x0", "y0", "z0"), ("x", "y", "z")),
}


class GenerationError(RuntimeError):
    """Trajectory blew past the overflow guard before reaching `length`."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class ConstantSeriesError(ValueError):
    """Zero-variance series cannot be z-normalized."""


def derive_seed(*parts, stream: str = "gen") -> int:
    """Derive a 63-bit child seed from arbitrary path components.

    The scheme is a SHA-256 hash of the '|'-joined string form of the
    parts plus a stream tag, so independent streams (generation, noise,
    splits, ...) never collide and datasets reproduce across platforms.
    """
    text = "|".join(str(p) for p in parts) + "|" + stream
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class SystemSpec:
    """A family of trajectories: system name plus draw intervals.

    `param_intervals` and `init_intervals` map variable names to closed
    [lo, hi] intervals; `observable` picks the emitted state coordinate.
    `dt` is the RK4 step and applies to the Lorenz system only.
    """

    system: str
    param_intervals: Mapping[str, tuple[float, float]]
    init_intervals: Mapping[str, tuple[float, float]]
    observable: str = "x"
    dt: float | None = None

    def __post_init__(self):
        if self.system not in _SYSTEM_VARS:
            raise ValueError(f"unknown system {self.system!r}")
        params, inits, coords = _SYSTEM_VARS[self.system]
        if set(self.param_intervals) != set(params):
            raise ValueError(f"{self.system} requires parameters {params}")
        if set(self.init_intervals) != set(inits):
            raise ValueError(f"{self.system} requires initial conditions {inits}")
        for name, (lo, hi) in {**self.param_intervals, **self.init_intervals}.items():
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise ValueError(f"empty or non-finite interval for {name}: [{lo}, {hi}]")
        if self.observable not in coords:
            raise ValueError(f"observable {self.observable!r} not a coordinate of {self.system}")
        if self.system == "lorenz":
            if self.dt is None:
                object.__setattr__(self, "dt", DEFAULT_LORENZ_DT)
            elif self.dt <= 0:
                raise ValueError("dt must be positive")

    def draw(self, rng: np.random.Generator) -> tuple[dict, dict]:
        """Draw (params, inits) uniformly, in canonical variable order."""
        params_order, inits_order, _ = _SYSTEM_VARS[self.system]
        params = {k: float(rng.uniform(*self.param_intervals[k])) for k in params_order}
        inits = {k: float(rng.uniform(*self.init_intervals[k])) for k in inits_order}
        return params, inits


@dataclass(frozen=True)
class SeriesMeta:
    system: str
    params: Mapping[str, float]
    inits: Mapping[str, float]
    seed: int
    noise_sigma: float = 0.0
    dt: float | None = None


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray
    label: int | None = None
    meta: SeriesMeta | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __len__(self) -> int:
        return len(self.values)


def logistic_step(x: float, a: float) -> float:
    return a * x * (1.0 - x)


def henon_step(x: float, y: float, a: float, b: float) -> tuple[float, float]:
    return 1.0 - a * x * x + y, b * x


def lorenz_deriv(state: np.ndarray, sigma: float, rho: float, beta: float) -> np.ndarray:
    x, y, z = state
    return np.array([sigma * (y - x), x * (rho - z) - y, x * y - beta * z])


def lorenz_rk4_step(state: np.ndarray, dt: float, sigma: float, rho: float, beta: float) -> np.ndarray:
    k1 = lorenz_deriv(state, sigma, rho, beta)
    k2 = lorenz_deriv(state + 0.5 * dt * k1, sigma, rho, beta)
    k3 = lorenz_deriv(state + 0.5 * dt * k2, sigma, rho, beta)
    k4 = lorenz_deriv(state + dt * k3, sigma, rho, beta)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def simulate(spec: SystemSpec, params: Mapping[str, float], inits: Mapping[str, float],
             n_steps: int) -> np.ndarray:
    """Full state trajectory, shape (n_steps, n_coords), initial state excluded.

    Raises GenerationError (with the offending step index) if any coordinate
    leaves the overflow guard.
    """
    _, _, coords = _SYSTEM_VARS[spec.system]
    out = np.empty((n_steps, len(coords)))
    if spec.system == "logistic":
        x = inits["x0"]
        a = params["a"]
        for i in range(n_steps):
            x = logistic_step(x, a)
            if not abs(x) <= OVERFLOW_GUARD:
                raise GenerationError(f"logistic trajectory diverged at step {i}", step=i)
            out[i, 0] = x
    elif spec.system == "henon":
        x, y = inits["x0"], inits["y0"]
        a, b = params["a"], params["b"]
        for i in range(n_steps):
            x, y = henon_step(x, y, a, b)
            if not abs(x) <= OVERFLOW_GUARD:
                raise GenerationError(f"henon trajectory diverged at step {i}", step=i)
            out[i, 0] = x
            out[i, 1] = y
    else:
        state = np.array([inits["x0"], inits["y0"], inits["z0"]])
        sigma, rho, beta = params["sigma"], params["rho"], params["beta"]
        dt = spec.dt if spec.dt is not None else DEFAULT_LORENZ_DT
        for i in range(n_steps):
            state = lorenz_rk4_step(state, dt, sigma, rho, beta)
            if not np.all(np.abs(state) <= OVERFLOW_GUARD):
                raise GenerationError(f"lorenz trajectory diverged at step {i}", step=i)
            out[i] = state
    return out


def generate(spec: SystemSpec, length: int, burn_in: int = DEFAULT_BURN_IN,
             seed: int = 0) -> TimeSeries:
    """Generate `length` observations after discarding `burn_in` transients.

    Identical (spec, length, burn_in, seed) always produce bit-identical
    output: the seed feeds a PCG64 generator that draws parameter values
    and initial conditions uniformly from the spec intervals.
    """
    if length < 2:
        raise ValueError("length must be >= 2")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    rng = np.random.default_rng(seed)
    params, inits = spec.draw(rng)
    traj = simulate(spec, params, inits, burn_in + length)
    _, _, coords = _SYSTEM_VARS[spec.system]
    values = traj[burn_in:, coords.index(spec.observable)].copy()
    if not np.all(np.isfinite(values)):
        raise GenerationError("non-finite values in generated series")
    meta = SeriesMeta(system=spec.system, params=params, inits=inits, seed=seed, dt=spec.dt)
    return TimeSeries(values=values, meta=meta)


def z_normalize(ts: TimeSeries) -> TimeSeries:
    """Shift/scale to zero mean and unit (population) standard deviation."""
    values = ts.values
    if len(values) < 2:
        raise ValueError("series length must be >= 2")
    sd = float(values.std())
    if sd == 0.0:
        raise ConstantSeriesError("constant series has no z-normalization")
    return replace(ts, values=(values - values.mean()) / sd)


def add_noise(ts: TimeSeries, sigma: float, seed: int = 0) -> TimeSeries:
    """Add i.i.d. Gaussian noise with standard deviation `sigma` elementwise."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0.0:
        return ts
    rng = np.random.default_rng(seed)
    noisy = ts.values + rng.normal(0.0, sigma, size=len(ts.values))
    if not np.all(np.isfinite(noisy)):
        raise GenerationError("non-finite values after noise")
    meta = replace(ts.meta, noise_sigma=sigma) if ts.meta is not None else None
    return replace(ts, values=noisy, meta=meta)


def write_dataset_csv(samples: Sequence[TimeSeries], path: str | Path) -> None:
    """One dataset CSV: columns sample_id,label,seed,v0,v1,..."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        n = len(samples[0].values)
        writer.writerow(["sample_id", "label", "seed"] + [f"v{i}" for i in range(n)])
        for i, ts in enumerate(samples):
            label = "" if ts.label is None else ts.label
            seed = ts.meta.seed if ts.meta is not None else ""
            writer.writerow([i, label, seed] + [f"{v:.17g}" for v in ts.values])


def read_dataset_csv(path: str | Path) -> list[TimeSeries]:
    samples = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n = len(header) - 3
        for row in reader:
            label = int(row[1]) if row[1] != "" else None
            values = np.array([float(v) for v in row[3:3 + n]])
            samples.append(TimeSeries(values=values, label=label))
    return samples


def write_manifest(path: str | Path, payload: Mapping) -> None:
    """JSON manifest describing how a dataset was generated."""
    body = dict(payload)
    body.setdefault("generator", GENERATOR_NAME)
    body.setdefault("seed_scheme", "sha256('|'.join(parts)+'|'+stream)[:8] >> 1")
    body.setdefault("noise_applied", "after_znorm")
    Path(path).write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")


def spec_to_dict(spec: SystemSpec) -> dict:
    return {
        "system": spec.system,
        "param_intervals": {k: list(v) for k, v in spec.param_intervals.items()},
        "init_intervals": {k: list(v) for k, v in spec.init_intervals.items()},
        "observable": spec.observable,
        "dt": spec.dt,
    }


def spec_from_dict(d: Mapping) -> SystemSpec:
    return SystemSpec(
        system=d["system"],
        param_intervals={k: tuple(v) for k, v in d["param_intervals"].items()},
        init_intervals={k: tuple(v) for k, v in d["init_intervals"].items()},
        observable=d.get("observable", "x"),
        dt=d.get("dt"),
    )
