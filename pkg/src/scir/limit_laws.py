"""Limit laws of the normalised partial sums and of the drift estimators.

(U1, U2) is the alpha-stable limit of n^{-1/alpha} (sum eps_k, sum eps_k / (1 + X_{k-1}))
and drives the WCLSE limit; (S1, S2) is the limit of
(n^{-2/alpha} sum X_{k-1}^2, n^{-(alpha+1)/alpha^2} sum X_{k-1} eps_k) and drives the CLSE
limit. Both are characterised through their characteristic functions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .core import ModelParams, tail_constants
from .simulator import v_scale
from .stable_noise import characteristic_function, gamma_neg

GOLDEN = 0.5 * (1.0 + math.sqrt(5.0))
F_MIN = 1e-3
QUAD_TOL = 1e-10
MAX_PANELS = 400_000

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class NormalizationSchedule:
    alpha: float
    n: int

    @property
    def a_n(self) -> float:
        return self.n ** (1.0 / self.alpha)

    @property
    def c_n(self) -> float:
        return self.n ** ((self.alpha + 1.0) / self.alpha**2)

    @property
    def wclse_rate(self) -> float:
        return self.n ** ((self.alpha - 1.0) / self.alpha)

    @property
    def clse_rate(self) -> float:
        return self.n ** ((self.alpha - 1.0) / self.alpha**2)


@dataclass(frozen=True)
class ErgodicFunctionals:
    lambda_bar: float
    F: float


def estimate_ergodic_functionals(params: ModelParams, draws, *, check_F: bool = True) -> ErgodicFunctionals:
    """lambda_bar = E[1 / (1 + X_0)] by averaging over stationary draws, F = (1 + a/b) lambda_bar - 1."""
    x = np.asarray(draws, dtype=float)
    if x.size == 0 or np.any(x < 0):
        raise ValueError("need a nonempty array of nonnegative stationary draws")
    lam = float(np.mean(1.0 / (1.0 + x)))
    F = (1.0 + params.a / params.b) * lam - 1.0
    if check_F and abs(F) < F_MIN:
        raise ValueError(f"|F| = {abs(F):.3g} is too close to 0 to serve as a divisor")
    return ErgodicFunctionals(lambda_bar=lam, F=F)


def _u_domain_ok(lam1, lam2):
    return lam1 >= 0.0 and lam1 + lam2 >= 0.0


def charfn_U(params: ModelParams, lam1: float, lam2: float, draws) -> complex:
    """E exp(i (lam1 U1 + lam2 U2)), with the X_0 expectation averaged over ``draws``.

    Defined for lam1 >= 0 and lam1 + lam2 >= 0, where lam1 + lam2 / (1 + x) >= 0
    for every x >= 0 and the real power is unambiguous.
    """
    if not _u_domain_ok(lam1, lam2):
        raise ValueError(f"charfn_U needs lam1 >= 0 and lam1 + lam2 >= 0, got ({lam1}, {lam2})")
    x = np.asarray(draws, dtype=float)
    al = params.alpha
    tc = tail_constants(params, 1.0)
    base = np.maximum(lam1 + lam2 / (1.0 + x), 0.0)
    m = float(np.mean(base**al * (tc.q_alpha_t + tc.p_alpha_t * x)))
    return complex(np.exp(params.sigma**al / al * m * np.exp(-0.5j * math.pi * al)))


def charfn_U_any(params, lam1, lam2, draws) -> complex:
    """charfn_U extended to (-lam1, -lam2) by conjugate symmetry."""
    if _u_domain_ok(lam1, lam2):
        return charfn_U(params, lam1, lam2, draws)
    if _u_domain_ok(-lam1, -lam2):
        return charfn_U(params, -lam1, -lam2, draws).conjugate()
    raise ValueError(f"({lam1}, {lam2}) lies outside both valid quadrants")


def _s_constants(params: ModelParams):
    al, b = params.alpha, params.b
    beta = (al + 1.0) / al
    pref = params.a * params.sigma**al / (al**2 * b**2 * gamma_neg(al))
    k1 = math.exp(-2.0 * b) / -math.expm1(-2.0 * b)
    k2 = math.exp(-b * beta) / (-math.expm1(-b * (al + 1.0))) ** (1.0 / al)
    return beta, pref, k1, k2


def _check_s_alpha(alpha):
    if not (1.0 < alpha < GOLDEN):
        raise ValueError(f"the (S1, S2) limit needs 1 < alpha < (1+sqrt5)/2, got {alpha}")


def charfn_S_lam2_zero(params: ModelParams, lam1: float) -> complex:
    """Closed form of the (S1, S2) characteristic function at lam2 = 0.

    With A = k1 lam1 and B = (1 + k1) lam1 the integral reduces to
    (1/2) int_0^inf (e^{iAw} - e^{iBw}) w^{-alpha/2-1} dw
    = (1/2) Gamma(-alpha/2) [(-iA)^{alpha/2} - (-iB)^{alpha/2}].
    """
    _check_s_alpha(params.alpha)
    _, pref, k1, _ = _s_constants(params)
    s = 0.5 * params.alpha
    A, B = k1 * lam1, (1.0 + k1) * lam1
    integral = 0.5 * special.gamma(-s) * ((-1j * A) ** s - (-1j * B) ** s)
    return complex(np.exp(-pref * integral))


def _log_grid(s_lo, s_hi, rate):
    """Panel edges on [s_lo, s_hi] with phase change <= pi/4 per panel."""
    edges = [s_lo]
    s = s_lo
    while s < s_hi:
        h = min(0.5, 0.25 * math.pi / max(rate(s), 1e-300))
        s = min(s + h, s_hi)
        edges.append(s)
        if len(edges) > MAX_PANELS:
            raise ValueError("integrand oscillates too fast for the panel budget; lam2 too small for lam1?")
    return np.asarray(edges)


def _nodes(edges):
    left, right = edges[:-1, None], edges[1:, None]
    half = 0.5 * (right - left)
    s = (left + half * (1.0 + _GL_NODES[None, :])).ravel()
    w = (half * _GL_WEIGHTS[None, :]).ravel()
    return s, w


def charfn_S(params: ModelParams, lam1: float, lam2: float, v_draws=None, *, y_max: float | None = None) -> complex:
    """E exp(i (lam1 S1 + lam2 S2)).

    The outer integral over y in (0, inf) against dy / y^{alpha+1} is done by
    composite Gauss-Legendre in log y. The inner expectations over V1, V2 use
    the closed-form characteristic function of V unless ``v_draws`` is given,
    in which case they are Monte Carlo averages over those draws.
    """
    al = params.alpha
    _check_s_alpha(al)
    if lam1 == 0.0 and lam2 == 0.0:
        return 1.0 + 0.0j
    beta, pref, k1, k2 = _s_constants(params)
    sv = v_scale(params)

    if v_draws is None:
        def phi_v(u):
            return characteristic_function(al, sv * u)
    else:
        vd = np.asarray(v_draws, dtype=float)

        def phi_v(u):
            u = np.atleast_1d(u)
            out = np.empty(u.shape, dtype=complex)
            for start in range(0, u.size, 256):
                chunk = u[start:start + 256]
                out[start:start + 256] = np.exp(1j * chunk[:, None] * vd[None, :]).mean(axis=1)
            return out

    # lower cut: integrand / y^alpha ~ |lam1| y^{2-alpha} + C |lam2|^alpha y
    small = max(abs(lam1), abs(lam2) ** al * sv**al, 1e-300)
    y_lo = min((QUAD_TOL / small) ** (1.0 / (2.0 - al)), (QUAD_TOL / small))
    # upper cut: |phi_V(k2 lam2 y^beta)| < tol, plus the y^{-alpha} tail bound
    if y_max is None:
        if lam2 == 0.0:
            raise ValueError("lam2 = 0 has no decaying envelope; use charfn_S_lam2_zero")
        decay = abs(math.cos(0.5 * math.pi * al)) / al * (sv * k2 * abs(lam2)) ** al
        y_max = (-math.log(QUAD_TOL) / decay) ** (1.0 / (al + 1.0))
        y_max = max(y_max, 1.0)
    s_lo, s_hi = math.log(y_lo), math.log(y_max)
    fast = 2.0 * (1.0 + k1) * abs(lam1)
    slow = (al + 1.0) * (sv * abs(lam2)) ** al / al

    def rate(s):
        return fast * math.exp(2.0 * s) + slow * math.exp((al + 1.0) * s)

    s, w = _nodes(_log_grid(s_lo, s_hi, rate))
    y = np.exp(s)
    y2 = y * y
    yb = y**beta
    phi1 = phi_v(lam2 * yb)
    phi2 = phi_v(k2 * lam2 * yb)
    inner = (1.0 - np.exp(1j * lam1 * y2) * phi1) * np.exp(1j * k1 * lam1 * y2) * phi2
    # dy / y^{alpha+1} = y^{-alpha} ds
    integral = np.sum(w * inner * y ** (-al))
    return complex(np.exp(-pref * integral))


def limit_map_wclse(u1, u2, params: ModelParams, erg: ErgodicFunctionals):
    """Image of (U1, U2) under the WCLSE limit map for (b, a)."""
    return _wclse_matrix(params, erg) @ np.array([u1, u2], dtype=float)


def _wclse_matrix(params: ModelParams, erg: ErgodicFunctionals) -> np.ndarray:
    a, b = params.a, params.b
    lam, F = erg.lambda_bar, erg.F
    eb = math.exp(b)
    c1 = (a * lam + b * (lam - 1.0)) / -math.expm1(-b)
    return np.array([
        [-eb * lam / F, eb / F],
        [(c1 - a / b * eb * lam) / F, a / b * eb / F],
    ])


def limit_map_clse(s1, s2, params: ModelParams):
    """Image of (S1, S2) under the CLSE limit map: -e^b (1, a/b) S2 / S1."""
    if s1 == 0:
        raise ValueError("S1 must be nonzero")
    r = -math.exp(params.b) * s2 / s1
    return np.array([r, params.a / params.b * r])


def wclse_limit_charfn(params, t1, t2, draws, erg: ErgodicFunctionals) -> complex:
    """CF of the WCLSE limit of n^{(alpha-1)/alpha} (b - b_hat, a - a_hat) at (t1, t2).

    E exp(i t . M U) = E exp(i (M^T t) . U), evaluated through charfn_U.
    """
    lam1, lam2 = _wclse_matrix(params, erg).T @ np.array([t1, t2], dtype=float)
    return charfn_U_any(params, float(lam1), float(lam2), draws)


def wclse_dual_point(params, erg, lam1, lam2):
    """The (t1, t2) whose transpose image is (lam1, lam2)."""
    return np.linalg.solve(_wclse_matrix(params, erg).T, np.array([lam1, lam2], dtype=float))


def empirical_charfn(samples, lam1: float, lam2: float) -> complex:
    """(1/N) sum exp(i (lam1 v1 + lam2 v2)) over 2-vectors ``samples``."""
    v = np.asarray(samples, dtype=float).reshape(-1, 2)
    if v.shape[0] == 0:
        raise ValueError("need at least one sample")
    return complex(np.mean(np.exp(1j * (lam1 * v[:, 0] + lam2 * v[:, 1]))))


CF_HEADER = ["lam1", "lam2", "re_theory", "im_theory", "re_emp", "im_emp", "abs_err"]


def cf_table(grid, theory, samples):
    """Rows comparing a theoretical CF with the empirical CF of ``samples``."""
    rows = []
    for lam1, lam2 in grid:
        th = theory(lam1, lam2)
        em = empirical_charfn(samples, lam1, lam2)
        rows.append((lam1, lam2, th.real, th.imag, em.real, em.imag, abs(th - em)))
    return rows


def write_cf_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CF_HEADER)
        for row in rows:
            w.writerow([f"{v:.17g}" for v in row])
