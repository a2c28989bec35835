"""Spectrally positive alpha-stable driver.

The driver is normalised through its Laplace exponent,

    E[exp(-lam * Z_t)] = exp(t * lam**alpha / alpha),   lam >= 0,

which is what the Levy measure dz / (alpha Gamma(-alpha) z**(alpha+1)) on
(0, inf) gives after compensation. For alpha = 2 the driver is a standard
Brownian motion.

Draws use the Chambers-Mallows-Stuck construction with skewness +1 under
the standard S_alpha(scale, 1, 0) parameterisation; the scale that
reproduces the Laplace exponent above is

    scale(dt) = (dt * |cos(pi alpha / 2)| / alpha) ** (1 / alpha).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from . import _kernels

ABS_MOMENT_DRAWS = 10_000_000
ABS_MOMENT_SEED = 20_130_917


@dataclass(frozen=True)
class StableSpec:
    alpha: float

    def __post_init__(self):
        if not (1.0 < self.alpha <= 2.0):
            raise ValueError(f"alpha must lie in (1, 2], got {self.alpha}")


def _as_spec(spec) -> StableSpec:
    return spec if isinstance(spec, StableSpec) else StableSpec(float(spec))


def laplace_exponent(spec, lam):
    """Laplace exponent lam**alpha / alpha of the unit-time increment."""
    spec = _as_spec(spec)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("Laplace argument must be nonnegative")
    out = lam**spec.alpha / spec.alpha
    return float(out) if out.ndim == 0 else out


def cms_scale(spec, dt: float) -> float:
    """Scale of an increment over ``dt`` in the S_alpha(scale, 1, 0) family."""
    spec = _as_spec(spec)
    if spec.alpha == 2.0:
        # S_2(s) is N(0, 2 s^2)
        return math.sqrt(dt / 2.0)
    return (dt * abs(math.cos(0.5 * math.pi * spec.alpha)) / spec.alpha) ** (1.0 / spec.alpha)


def sample_increments(spec, dt: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` i.i.d. driver increments over a step of length ``dt``."""
    spec = _as_spec(spec)
    if dt <= 0:
        raise ValueError("dt must be positive")
    unit = _kernels.unit_increments(rng, spec.alpha, int(size))
    # self-similarity: Z_dt = dt^(1/alpha) Z_1
    return dt ** (1.0 / spec.alpha) * unit


def sample_increment(spec, dt: float, rng: np.random.Generator) -> float:
    return float(sample_increments(spec, dt, 1, rng)[0])


def characteristic_function(spec, u):
    """E[exp(i u Z_1)] = exp((-i u)**alpha / alpha) on the principal branch."""
    spec = _as_spec(spec)
    u = np.asarray(u, dtype=float)
    mag = np.abs(u) ** spec.alpha / spec.alpha
    phase = -0.5 * math.pi * spec.alpha * np.sign(u)
    out = np.exp(mag * (np.cos(phase) + 1j * np.sin(phase)))
    return complex(out) if out.ndim == 0 else out


def right_tail_constant(spec) -> float:
    """lim x**alpha P(Z_1 > x) = 1 / (alpha**2 Gamma(-alpha)) for alpha < 2."""
    spec = _as_spec(spec)
    if spec.alpha >= 2.0:
        raise ValueError("Brownian driver has no power tail")
    return 1.0 / (spec.alpha**2 * gamma_neg(spec.alpha))


def gamma_neg(alpha: float) -> float:
    """Gamma(-alpha) for alpha in (1, 2), where it is positive.

    Evaluated as exp(gammaln(-alpha)); scipy's gammaln returns log|Gamma|,
    and the sign is +1 on (-2, -1).
    """
    if not (1.0 < alpha < 2.0):
        raise ValueError("Gamma(-alpha) is only used for alpha in (1, 2)")
    return math.exp(special.gammaln(-alpha))


def abs_moment(spec, p: float) -> float:
    """E|Z_1|**p for 0 < p < alpha, by cached Monte Carlo with a fixed seed."""
    spec = _as_spec(spec)
    if not (0.0 < p < spec.alpha):
        raise ValueError(f"need 0 < p < alpha, got p={p}, alpha={spec.alpha}")
    if spec.alpha == 2.0:
        # E|N(0,1)|^p
        return 2.0 ** (p / 2.0) * math.gamma((p + 1.0) / 2.0) / math.sqrt(math.pi)
    return _abs_moment_mc(spec.alpha, float(p))


@lru_cache(maxsize=64)
def _abs_moment_mc(alpha: float, p: float) -> float:
    rng = np.random.Generator(np.random.PCG64(ABS_MOMENT_SEED))
    draws = _kernels.unit_increments(rng, alpha, ABS_MOMENT_DRAWS)
    return float(np.mean(np.abs(draws) ** p))
