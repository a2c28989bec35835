"""Tail-index, rate and Laplace/mixing diagnostics."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class RateFit:
    log_n: tuple
    log_err: tuple
    slope: float
    intercept: float
    r2: float


def default_hill_k(n: int) -> int:
    return math.ceil(n ** (2.0 / 3.0))


def hill(samples, k: int | None = None) -> float:
    """Hill estimate of the tail index from the top ``k`` order statistics.

    Returns inf when the top k + 1 values are all equal.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("Hill estimator needs finite positive samples")
    if k is None:
        k = default_hill_k(x.size)
    if not (10 <= k < x.size):
        raise ValueError(f"need 10 <= k < {x.size}, got k={k}")
    top = np.partition(x, x.size - k - 1)[x.size - k - 1:]
    threshold = top.min()
    mean_log = float(np.mean(np.log(np.sort(top)[1:] / threshold)))
    return math.inf if mean_log == 0.0 else 1.0 / mean_log


def rate_regression(ns, median_abs_errors) -> RateFit:
    """OLS fit of log(error) on log(n)."""
    ln = np.log(np.asarray(ns, dtype=float))
    le = np.log(np.asarray(median_abs_errors, dtype=float))
    if ln.size < 2 or ln.size != le.size:
        raise ValueError("need at least two (n, error) pairs")
    slope, intercept = np.polyfit(ln, le, 1)
    resid = le - (slope * ln + intercept)
    ss_tot = float(np.sum((le - le.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    return RateFit(tuple(ln), tuple(le), float(slope), float(intercept), r2)


def laplace_compare(samples, lam_grid, reference) -> float:
    """Largest relative deviation of the empirical Laplace transform from ``reference``."""
    x = np.asarray(samples, dtype=float)
    worst = 0.0
    for lam in lam_grid:
        ref = reference(lam)
        emp = float(np.mean(np.exp(-lam * x)))
        worst = max(worst, abs(emp - ref) / ref)
    return worst


def lagged_covariances(values, lags, transform=lambda x: np.exp(-x)) -> np.ndarray:
    y = transform(np.asarray(values, dtype=float))
    y = y - y.mean()
    n = y.size
    return np.array([float(np.dot(y[: n - h], y[h:]) / (n - h)) for h in lags])


def mixing_decay(path, lags) -> float:
    """Exponential decay rate of cov(e^{-X_0}, e^{-X_t}) along a path.

    Fits log cov against t over the lags with positive covariance. ``path``
    may be a ``Path`` (lags counted in grid steps) or a plain array at unit spacing.
    """
    values = getattr(path, "values", path)
    dt = getattr(path, "dt", 1.0)
    lags = np.asarray(lags, dtype=int)
    cov = lagged_covariances(values, lags)
    keep = cov > 0
    if keep.sum() < 2:
        raise ValueError("fewer than two lags with positive covariance; no decay to fit")
    slope, _ = np.polyfit(lags[keep] * dt, np.log(cov[keep]), 1)
    return float(-slope)


def report_json(**fields) -> str:
    def conv(v):
        if hasattr(v, "__dataclass_fields__"):
            return asdict(v)
        if isinstance(v, np.generic):
            return v.item()
        if isinstance(v, np.ndarray):
            return v.tolist()
        return v

    return json.dumps({k: conv(v) for k, v in fields.items()}, indent=2, sort_keys=True)
