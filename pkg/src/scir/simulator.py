"""Path simulation and the two observation schemes used by the estimators."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np

from . import _kernels
from .core import DerivedParams, ModelParams, burn_in_time, derived_params
from .stable_noise import sample_increments

SCHEMES = ("euler", "drift_exact")
DEFAULT_SCHEME = "drift_exact"
DEFAULT_DT = 0.01
MIN_SUBSTEPS_HIGH = 10


@dataclass(frozen=True)
class Path:
    t0: float
    dt: float
    values: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if vals.size < 1:
            raise ValueError("path must hold at least one value")

    @property
    def horizon(self) -> float:
        return self.dt * (len(self.values) - 1)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x"])
            for t, x in zip(self.times, self.values):
                w.writerow([f"{t:.17g}", f"{x:.17g}"])


@dataclass(frozen=True)
class Observations:
    x: np.ndarray
    mode: str  # "low" (unit spacing) or "high" (spacing 1/n on [0, 1])
    seed: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.mode not in ("low", "high"):
            raise ValueError(f"unknown observation mode {self.mode!r}")
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.size < 3:
            raise ValueError("need at least X_0, X_1, X_2")
        if not np.all(np.isfinite(x)) or np.any(x < 0):
            raise ValueError("observations must be finite and nonnegative")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return len(self.x) - 1

    @property
    def spacing(self) -> float:
        return 1.0 if self.mode == "low" else 1.0 / self.n

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# mode={self.mode}\n")
            w = csv.writer(fh)
            w.writerow(["k", "x"])
            for k, x in enumerate(self.x):
                w.writerow([k, f"{x:.17g}"])

    @classmethod
    def from_csv(cls, path) -> "Observations":
        mode = "low"
        rows = []
        with open(path, newline="") as fh:
            lines = []
            for line in fh:
                if line.startswith("#"):
                    key, _, val = line[1:].strip().partition("=")
                    if key.strip() == "mode":
                        mode = val.strip()
                    continue
                lines.append(line)
        reader = csv.DictReader(lines)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["k", "x"]:
            raise ValueError(f"{path}: expected header 'k,x'")
        for row in reader:
            rows.append((int(row["k"]), float(row["x"])))
        rows.sort()
        if [k for k, _ in rows] != list(range(len(rows))):
            raise ValueError(f"{path}: k must run 0..n without gaps")
        return cls(np.array([x for _, x in rows]), mode)


@dataclass(frozen=True)
class ResidualSeq:
    eps: np.ndarray


def _seed_of(rng) -> int | None:
    seq = getattr(rng.bit_generator, "seed_seq", None)
    entropy = getattr(seq, "entropy", None)
    return entropy if isinstance(entropy, int) else None


def _run(params, x0, n_obs, substeps, dt, rng, scheme):
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}")
    if x0 < 0:
        raise ValueError("x0 must be nonnegative")
    vals = _kernels.euler_path(
        rng, float(x0), int(n_obs), int(substeps), float(dt),
        params.a, params.b, params.sigma, params.alpha, scheme == "drift_exact",
    )
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        raise FloatingPointError(f"non-finite state at grid index {bad[0]}")
    return vals


def simulate_path(
    params: ModelParams,
    x0: float,
    horizon: float,
    dt: float,
    rng: np.random.Generator,
    *,
    record_every: int = 1,
    scheme: str = DEFAULT_SCHEME,
) -> Path:
    """Euler path of dX = (a - bX) dt + sigma X^(1/alpha) dZ with a clamp at 0.

    One step is

        X <- max(0, X + (a - b X) dt + sigma X^(1/alpha) dZ)      (scheme="euler")
        X <- max(0, X e^{-b dt} + (a/b)(1 - e^{-b dt}) + sigma X^(1/alpha) dZ)
                                                                  (scheme="drift_exact")

    The clamp only removes discretisation undershoot; the exact process
    never leaves [0, inf). Only every ``record_every``-th grid value is kept.
    """
    if dt <= 0 or horizon <= 0:
        raise ValueError("dt and horizon must be positive")
    n_steps = int(round(horizon / dt))
    if not math.isclose(n_steps * dt, horizon, rel_tol=1e-9):
        raise ValueError("horizon must be a multiple of dt")
    if n_steps % record_every:
        raise ValueError("record_every must divide the number of steps")
    vals = _run(params, x0, n_steps // record_every, record_every, dt, rng, scheme)
    return Path(t0=0.0, dt=dt * record_every, values=vals, seed=_seed_of(rng))


def sample_stationary(
    params: ModelParams,
    rng: np.random.Generator,
    *,
    dt: float = DEFAULT_DT,
    scheme: str = DEFAULT_SCHEME,
    burn_in: float | None = None,
) -> float:
    """Approximate stationary draw: run from a/b until the TV bound at 5a/b is < 1e-4."""
    x0 = params.a / params.b
    if burn_in is None:
        burn_in = burn_in_time(params, 5.0 * x0, 1e-4)
    steps = max(1, math.ceil(burn_in / dt))
    return float(_run(params, x0, 1, steps, dt, rng, scheme)[-1])


def sample_stationary_many(params, size, rng, **kw) -> np.ndarray:
    return np.array([sample_stationary(params, rng, **kw) for _ in range(size)])


def sample_low_frequency(
    params: ModelParams,
    n: int,
    rng: np.random.Generator,
    *,
    dt: float = DEFAULT_DT,
    scheme: str = DEFAULT_SCHEME,
    burn_in: float | None = None,
) -> Observations:
    """X_0, X_1, ..., X_n at unit spacing from a stationary start."""
    if n < 2:
        raise ValueError("need n >= 2")
    substeps = max(1, round(1.0 / dt))
    if not math.isclose(substeps * dt, 1.0, rel_tol=1e-9):
        raise ValueError("dt must divide the unit observation gap")
    x0 = sample_stationary(params, rng, dt=dt, scheme=scheme, burn_in=burn_in)
    vals = _run(params, x0, n, substeps, dt, rng, scheme)
    return Observations(vals, "low", seed=_seed_of(rng))


def sample_high_frequency(
    params: ModelParams,
    n: int,
    rng: np.random.Generator,
    *,
    substeps: int = MIN_SUBSTEPS_HIGH,
    scheme: str = DEFAULT_SCHEME,
    burn_in: float | None = None,
) -> Observations:
    """X_0, X_{1/n}, ..., X_1 from a stationary start, ``substeps`` Euler steps per gap."""
    if n < 2:
        raise ValueError("need n >= 2")
    if substeps < MIN_SUBSTEPS_HIGH:
        raise ValueError(f"need at least {MIN_SUBSTEPS_HIGH} substeps per observation gap")
    x0 = sample_stationary(params, rng, burn_in=burn_in, scheme=scheme)
    vals = _run(params, x0, n, substeps, 1.0 / (n * substeps), rng, scheme)
    return Observations(vals, "high", seed=_seed_of(rng))


def residuals(obs: Observations, derived: DerivedParams) -> ResidualSeq:
    """eps_k = X_k - rho - gamma X_{k-1}, k = 1..n."""
    x = obs.x
    return ResidualSeq(eps=x[1:] - derived.rho - derived.gamma * x[:-1])


def sample_V(params: ModelParams, rng: np.random.Generator, size: int | None = None):
    """Draws of sigma int_{k-1}^k e^{-b(k-s)} e^{-b(s-k+1)/alpha} dZ_s.

    In law this is sigma ((e^{-b} - e^{-alpha b}) / ((alpha-1) b))^{1/alpha} Z_1.
    """
    z = sample_increments(params.alpha, 1.0, 1 if size is None else size, rng)
    out = v_scale(params) * z
    return float(out[0]) if size is None else out


def v_scale(params: ModelParams) -> float:
    al, b = params.alpha, params.b
    # (e^{-b} - e^{-alpha b}) / ((alpha-1) b) = e^{-b} (1 - e^{-(alpha-1) b}) / ((alpha-1) b)
    x = (al - 1.0) * b
    ratio = math.exp(-b) * (-math.expm1(-x) / x)
    return params.sigma * ratio ** (1.0 / al)
