"""Analytic side of the stable CIR model.

The model is the CBI process with immigration rate ``a`` and branching
mechanism phi(z) = b z + (sigma**alpha / alpha) z**alpha. Its cumulant
v_t(lam) solves dv/dt = -phi(v), v_0 = lam, which is a Bernoulli equation
with closed-form solution

    v_t(lam) = e^{-bt} lam [1 + c lam^{alpha-1} (1 - e^{-(alpha-1) b t})]^{-1/(alpha-1)},
    c = sigma**alpha / (alpha b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .stable_noise import gamma_neg

QUAD_ABS_TOL = 1e-10
QUAD_MAX_EVAL = 1_000_000


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelParams:
    a: float
    b: float
    sigma: float
    alpha: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and self.sigma > 0):
            raise ValueError(f"need a, b, sigma > 0, got a={self.a}, b={self.b}, sigma={self.sigma}")
        if not (1.0 < self.alpha <= 2.0):
            raise ValueError(f"alpha must lie in (1, 2], got {self.alpha}")

    @classmethod
    def degenerate(cls, a, b, sigma, alpha):
        """Build parameters without validation (tests use sigma = 0)."""
        obj = object.__new__(cls)
        for name, val in zip(("a", "b", "sigma", "alpha"), (a, b, sigma, alpha)):
            object.__setattr__(obj, name, float(val))
        return obj

    @property
    def derived(self) -> "DerivedParams":
        return derived_params(self)


@dataclass(frozen=True)
class DerivedParams:
    gamma: float
    rho: float


@dataclass(frozen=True)
class TailConstants:
    p_alpha_t: float
    q_alpha_t: float
    stationary_tail: float | None


def derived_params(params: ModelParams) -> DerivedParams:
    gamma = math.exp(-params.b)
    return DerivedParams(gamma=gamma, rho=params.a / params.b * (1.0 - gamma))


def branching(params: ModelParams, z):
    """phi(z) = b z + sigma^alpha z^alpha / alpha."""
    z = np.asarray(z, dtype=float)
    return params.b * z + params.sigma**params.alpha / params.alpha * z**params.alpha


def _one_minus_exp(x):
    # 1 - e^{-x} without cancellation
    return -np.expm1(-x)


def v(params: ModelParams, lam, t):
    """Cumulant v_t(lam) of the branching part, vectorised over lam and t."""
    lam = np.asarray(lam, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(lam < 0) or np.any(t < 0):
        raise ValueError("v_t(lam) needs lam >= 0 and t >= 0")
    al, b = params.alpha, params.b
    c = params.sigma**al / (al * b)
    base = 1.0 + c * lam ** (al - 1.0) * _one_minus_exp((al - 1.0) * b * t)
    out = np.exp(-b * t) * lam * base ** (-1.0 / (al - 1.0))
    return float(out) if out.ndim == 0 else out


def vbar(params: ModelParams, t):
    """Limit v_t(inf): minimal solution of dv/dt = -phi(v) from +inf."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("vbar_t is infinite for t <= 0")
    al, b = params.alpha, params.b
    c = params.sigma**al / (al * b)
    out = np.exp(-b * t) * (c * _one_minus_exp((al - 1.0) * b * t)) ** (-1.0 / (al - 1.0))
    return float(out) if out.ndim == 0 else out


def _quad(f, lo, hi, what):
    val, err, info = integrate.quad(
        f, lo, hi, epsabs=QUAD_ABS_TOL, epsrel=0.0, limit=QUAD_MAX_EVAL // 21, full_output=True
    )[:3]
    if err > 10 * QUAD_ABS_TOL or info["neval"] >= QUAD_MAX_EVAL:
        raise QuadratureError(f"{what}: quadrature did not converge (err={err:.3g})")
    return val


def int_v(params: ModelParams, lam: float, t: float) -> float:
    """int_0^t v_s(lam) ds."""
    if lam < 0 or t < 0:
        raise ValueError("need lam >= 0 and t >= 0")
    if lam == 0 or t == 0:
        return 0.0
    # v_s(lam) / lam lies in (0, 1], so the absolute tolerance is also relative
    return lam * _quad(lambda s: v(params, lam, s) / lam, 0.0, t, "int_v")


def transition_log_laplace(params: ModelParams, x: float, t: float, lam: float) -> float:
    """-log E_x[exp(-lam X_t)] = x v_t(lam) + a int_0^t v_s(lam) ds."""
    if x < 0:
        raise ValueError("initial state must be nonnegative")
    return x * v(params, lam, t) + params.a * int_v(params, lam, t)


def transition_laplace(params: ModelParams, x: float, t: float, lam: float) -> float:
    """E_x[exp(-lam X_t)] = exp(-x v_t(lam) - a int_0^t v_s(lam) ds)."""
    return math.exp(-transition_log_laplace(params, x, t, lam))


def transition_mean(params: ModelParams, x: float, t) -> float:
    t = np.asarray(t, dtype=float)
    e = np.exp(-params.b * t)
    out = x * e + params.a / params.b * (1.0 - e)
    return float(out) if out.ndim == 0 else out


def stationary_log_laplace(params: ModelParams, lam: float) -> float:
    """-log L(lam) = int_0^lam alpha a dz / (alpha b + sigma^alpha z^(alpha-1))."""
    if lam < 0:
        raise ValueError("Laplace argument must be nonnegative")
    if lam == 0:
        return 0.0
    al = params.alpha
    sa = params.sigma**al

    # z = lam u; the rescaled integrand is bounded by a / b
    def integrand(u):
        return al * params.a / (al * params.b + sa * (lam * u) ** (al - 1.0))

    return lam * _quad(integrand, 0.0, 1.0, "stationary_laplace")


def stationary_laplace(params: ModelParams, lam: float) -> float:
    """Laplace transform of the stationary law."""
    return math.exp(-stationary_log_laplace(params, lam))


def stationary_mean(params: ModelParams) -> float:
    return params.a / params.b


def tail_constants(params: ModelParams, t: float) -> TailConstants:
    """p_alpha(t), q_alpha(t) and, for alpha < 2, the stationary tail constant.

    E_x[int_0^t e^{-alpha b (t-s)} X_s ds] = q_alpha(t) + p_alpha(t) x, and
    the stationary law satisfies P(X > u) ~ a sigma^alpha / (alpha^3 b^2 Gamma(-alpha)) u^-alpha.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    al, a, b = params.alpha, params.a, params.b
    p = (math.exp(-b * t) - math.exp(-al * b * t)) / (b * (al - 1.0))
    q = a / b * (-math.expm1(-al * b * t) / (al * b) - p)
    tail = None
    if al < 2.0:
        tail = a * params.sigma**al / (al**3 * b**2 * gamma_neg(al))
    return TailConstants(p_alpha_t=p, q_alpha_t=q, stationary_tail=tail)


def stationary_tail(params: ModelParams) -> float:
    if params.alpha >= 2.0:
        raise ValueError("stationary law has a light tail when alpha = 2")
    return tail_constants(params, 1.0).stationary_tail


def tv_bound(params: ModelParams, x: float, t) -> float:
    """Total-variation distance bound ||P_t(x, .) - mu|| for t >= 1."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 1):
        raise ValueError("the ergodicity bound holds for t >= 1")
    v1 = vbar(params, 1.0)
    decay = np.exp(-params.b * (t - 1.0))
    out = 2.0 * _one_minus_exp(v1 * x * decay) + 2.0 * v1 * params.a / params.b * decay
    return float(out) if out.ndim == 0 else out


def burn_in_time(params: ModelParams, x: float, tol: float = 1e-4) -> float:
    """Smallest t >= 1 with tv_bound(x, t) < tol (closed form upper estimate)."""
    v1 = vbar(params, 1.0)
    # 1 - e^{-y} <= y, so the bound is at most 2 v1 (x + a/b) e^{-b(t-1)}
    c = 2.0 * v1 * (x + params.a / params.b)
    return 1.0 + max(0.0, math.log(c / tol) / params.b)


def mean_G(params: ModelParams) -> float:
    """E[sigma^alpha int_0^1 e^{-alpha b (1-t)} X_t dt] under the stationary law."""
    al, b = params.alpha, params.b
    return params.a * params.sigma**al * -math.expm1(-al * b) / (al * b**2)
