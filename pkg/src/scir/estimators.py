"""Conditional least squares estimators of the drift and the volatility estimator.

Both drift families fit the regression X_k = rho + gamma X_{k-1} + eps_k and
map back through gamma = e^{-b}, rho = a (1 - gamma) / b. Sums over
heavy-tailed summands go through ``math.fsum``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .simulator import Observations
from .stable_noise import abs_moment


class DegenerateSampleError(ValueError):
    """Raised when the regressor is constant and the regression is singular."""


@dataclass(frozen=True)
class EstimateSet:
    family: str
    n: int
    gamma_hat: float
    rho_hat: float
    b_hat: float = math.nan
    a_hat: float = math.nan
    drift_undefined: bool = False
    seed: int | None = field(default=None, compare=False)

    @property
    def degenerate(self) -> bool:
        return self.drift_undefined

    def row(self) -> list[str]:
        return [
            self.family,
            str(self.n),
            "" if self.seed is None else str(self.seed),
            *(f"{v:.17g}" for v in (self.gamma_hat, self.rho_hat, self.b_hat, self.a_hat)),
            str(int(self.drift_undefined)),
        ]


CSV_HEADER = ["family", "n", "seed", "gamma", "rho", "b", "a", "degenerate"]


def write_estimates_csv(path, estimates) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for est in estimates:
            w.writerow(est.row())


def _fsum(a) -> float:
    return math.fsum(np.asarray(a, dtype=float).tolist())


def _drift_from_regression(family, n, gamma_hat, rho_hat, sum_prev, sum_next, seed):
    if not (0.0 < gamma_hat < 1.0):
        return EstimateSet(family, n, gamma_hat, rho_hat, drift_undefined=True, seed=seed)
    b_hat = -math.log(gamma_hat)
    a_hat = (sum_next - gamma_hat * sum_prev) / (n * (1.0 - gamma_hat)) * b_hat
    return EstimateSet(family, n, gamma_hat, rho_hat, b_hat, a_hat, seed=seed)


def _split(obs):
    x = obs.x if isinstance(obs, Observations) else np.asarray(obs, dtype=float)
    if x.ndim != 1 or len(x) < 3:
        raise ValueError("need at least three observations")
    if not np.all(np.isfinite(x)):
        raise ValueError("observations must be finite")
    return x[:-1], x[1:], getattr(obs, "seed", None)


def _centred(prev, nxt):
    if np.all(prev == prev[0]):
        raise DegenerateSampleError("constant regressor: the regression is singular")
    n = len(prev)
    s_prev, s_next = _fsum(prev), _fsum(nxt)
    return n, s_prev, s_next, prev - s_prev / n, nxt - s_next / n


def clse(obs) -> EstimateSet:
    """Ordinary conditional least squares fit of (gamma, rho), then (b, a).

    gamma_hat is evaluated in the centred form sum dx dy / sum dx^2, which
    equals the raw-sum formula but avoids its cancellation.
    """
    prev, nxt, seed = _split(obs)
    n, s_prev, s_next, dx, dy = _centred(prev, nxt)
    denom = _fsum(dx * dx)
    if denom == 0.0:
        raise DegenerateSampleError("constant regressor: CLSE is undefined")
    gamma_hat = _fsum(dx * dy) / denom
    rho_hat = (s_next - gamma_hat * s_prev) / n
    return _drift_from_regression("CLSE", n, gamma_hat, rho_hat, s_prev, s_next, seed)


def wclse(obs) -> EstimateSet:
    """Conditional least squares weighted by 1 / (X_{k-1} + 1).

    With w = 1 / (X_{k-1} + 1) the raw-sum formula reduces to
    gamma = sum w (X_k - mean X_k) / sum w (X_{k-1} - mean X_{k-1}),
    and w may be centred as well since the centred X sum to zero.
    """
    prev, nxt, seed = _split(obs)
    n, s_prev, s_next, dx, dy = _centred(prev, nxt)
    w = 1.0 / (prev + 1.0)
    w = w - _fsum(w) / n
    denom = _fsum(w * dx)
    if denom == 0.0:
        raise DegenerateSampleError("constant regressor: WCLSE is undefined")
    gamma_hat = _fsum(w * dy) / denom
    rho_hat = (s_next - gamma_hat * s_prev) / n
    return _drift_from_regression("WCLSE", n, gamma_hat, rho_hat, s_prev, s_next, seed)


FAMILIES = {"CLSE": clse, "WCLSE": wclse}


def default_p(alpha: float) -> float:
    return alpha / 2.0


def delta_upper(alpha: float) -> float:
    return min(1.0 - 1.0 / alpha, 1.0 / alpha**2)


def default_delta(alpha: float) -> float:
    return 0.9 * delta_upper(alpha)


def sigma_hat(obs, alpha: float, p: float | None = None, delta: float | None = None) -> float:
    """Power-variation estimator of sigma from observations on [0, 1] at spacing 1/n.

    sigma_hat = [n^{1/p - 1/alpha} E^{1/p}|Z_1|^p]^{-1}
                (sum_k |dX_k / (X_{k-1}^{1/alpha} + n^{-delta})|^p)^{1/p}
    """
    if isinstance(obs, Observations):
        if obs.mode != "high":
            raise ValueError("sigma_hat needs high-frequency observations")
        x = obs.x
    else:
        x = np.asarray(obs, dtype=float)
    if not (1.0 < alpha <= 2.0):
        raise ValueError("alpha must lie in (1, 2]")
    p = default_p(alpha) if p is None else p
    delta = default_delta(alpha) if delta is None else delta
    if not (0.0 < p < alpha):
        raise ValueError(f"need 0 < p < alpha, got p={p}")
    if not (0.0 < delta < delta_upper(alpha)):
        raise ValueError(f"need 0 < delta < {delta_upper(alpha):.6g}, got delta={delta}")
    n = len(x) - 1
    if n < 10:
        raise ValueError("sigma_hat needs at least 10 increments")
    prev = x[:-1]
    ratio = np.abs(np.diff(x) / (prev ** (1.0 / alpha) + n ** (-delta)))
    power_sum = _fsum(ratio**p)
    norm = n ** (1.0 / p - 1.0 / alpha) * abs_moment(alpha, p) ** (1.0 / p)
    return power_sum ** (1.0 / p) / norm
