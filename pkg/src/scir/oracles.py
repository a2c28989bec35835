"""Independent numerical checks for the closed forms in ``core``.

Nothing here calls the closed-form cumulant; the ODE is integrated directly.
"""

from __future__ import annotations

import math

import numpy as np

from .core import ModelParams, branching


def rk4_cumulant(params: ModelParams, lam: float, t: float, h: float = 1e-4):
    """Integrate dv/dt = -phi(v), v(0) = lam, together with w = int v ds.

    Returns (v_t, int_0^t v_s ds).
    """
    if t == 0:
        return float(lam), 0.0
    steps = max(1, math.ceil(t / h))
    h = t / steps

    def f(y):
        return np.array([-branching(params, max(y[0], 0.0)), y[0]])

    y = np.array([float(lam), 0.0])
    for _ in range(steps):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return float(y[0]), float(y[1])


def rk4_cumulant_log(params: ModelParams, lam: float, t: float, steps: int = 2000) -> float:
    """RK4 on u = log v: du/dt = -b - (sigma^alpha/alpha) e^{(alpha-1) u}.

    The equation is stiff near t = 0 when lam is large, so the mesh starts
    with a step below the local time scale and grows geometrically, with
    ``steps`` steps per e-fold of time.
    """
    if lam == 0:
        return 0.0
    al = params.alpha
    c = params.sigma**al / al

    def f(u):
        return -params.b - c * math.exp((al - 1.0) * u)

    u = math.log(lam)
    stiff = params.b + (al - 1.0) * c * math.exp((al - 1.0) * u)
    h0 = min(t / steps, 1e-3 / stiff)
    grow = math.exp(1.0 / steps)
    s, h = 0.0, h0
    while s < t:
        h = min(h, t - s)
        k1 = f(u)
        k2 = f(u + 0.5 * h * k1)
        k3 = f(u + 0.5 * h * k2)
        k4 = f(u + h * k3)
        u += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        s += h
        h = min(h * grow, t / steps)
    return math.exp(u)


def stable_abs_moment_closed_form(alpha: float, p: float) -> float:
    """E|Z_1|^p for the spectrally positive driver, via the fractional-moment formula.

    For X ~ S_alpha(1, 1, 0) and 0 < p < alpha, p != 1,
    E|X|^p = Gamma(1 - p/alpha) / (Gamma(1 - p) cos(pi p / 2))
             (1 + tan^2(pi alpha / 2))^{p / (2 alpha)} cos((p / alpha) arctan(tan(pi alpha / 2))),
    and Gamma(1 - p) cos(pi p / 2) -> pi / 2 at p = 1.
    """
    if alpha == 2.0:
        return 2.0 ** (p / 2.0) * math.gamma((p + 1.0) / 2.0) / math.sqrt(math.pi)
    t = math.tan(0.5 * math.pi * alpha)
    denom = 0.5 * math.pi if p == 1.0 else math.gamma(1.0 - p) * math.cos(0.5 * math.pi * p)
    m = (
        math.gamma(1.0 - p / alpha) / denom
        * (1.0 + t * t) ** (p / (2.0 * alpha))
        * math.cos(p / alpha * math.atan(t))
    )
    scale = (abs(math.cos(0.5 * math.pi * alpha)) / alpha) ** (1.0 / alpha)
    return m * scale**p
