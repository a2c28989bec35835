"""Compiled inner loops for noise generation and path simulation.

All kernels draw from a ``numpy.random.Generator`` passed in by the caller,
so a replication is reproducible from its seed alone.
"""

import math

import numba
import numpy as np

HALF_PI = 0.5 * math.pi


@numba.njit(cache=True)
def cms_constants(alpha):
    """Return (B, log S, unit scale) for a totally skewed CMS draw.

    The unit scale maps a standard S_alpha(1, 1, 0) draw onto the driver
    normalisation E[exp(-lam * Z_1)] = exp(lam**alpha / alpha).
    """
    t = math.tan(HALF_PI * alpha)
    shift = math.atan(t) / alpha
    log_s = math.log1p(t * t) / (2.0 * alpha)
    scale = (abs(math.cos(HALF_PI * alpha)) / alpha) ** (1.0 / alpha)
    return shift, log_s, scale


@numba.njit(cache=True)
def cms_draw(rng, alpha, shift, log_s):
    # standard S_alpha(1, 1, 0), alpha in (1, 2)
    v = (rng.random() - 0.5) * math.pi
    w = rng.standard_exponential()
    avb = alpha * (v + shift)
    return math.sin(avb) * math.exp(
        log_s
        - math.log(math.cos(v)) / alpha
        + (1.0 - alpha) / alpha * (math.log(math.cos(v - avb)) - math.log(w))
    )


@numba.njit(cache=True)
def unit_increments(rng, alpha, size):
    """``size`` i.i.d. copies of Z_1 under the driver normalisation."""
    out = np.empty(size)
    if alpha == 2.0:
        for i in range(size):
            out[i] = rng.standard_normal()
        return out
    shift, log_s, scale = cms_constants(alpha)
    for i in range(size):
        x = scale * cms_draw(rng, alpha, shift, log_s)
        if not math.isfinite(x):
            raise FloatingPointError("non-finite stable draw")
        out[i] = x
    return out


@numba.njit(cache=True)
def euler_path(rng, x0, n_obs, substeps, dt, a, b, sigma, alpha, drift_exact):
    """Simulate ``n_obs`` observation gaps of ``substeps`` Euler steps each.

    Returns the ``n_obs + 1`` values on the observation grid. With
    ``drift_exact`` the linear drift is integrated in closed form over each
    step; otherwise the plain Euler-Maruyama drift ``(a - b x) dt`` is used.
    """
    out = np.empty(n_obs + 1)
    out[0] = x0
    gaussian = alpha == 2.0
    shift, log_s, unit = 0.0, 0.0, 1.0
    if not gaussian:
        shift, log_s, unit = cms_constants(alpha)
    noise_scale = sigma * unit * dt ** (1.0 / alpha)
    inv_alpha = 1.0 / alpha
    if drift_exact:
        decay = math.exp(-b * dt)
        inflow = a / b * (1.0 - decay)
    else:
        decay = 1.0 - b * dt
        inflow = a * dt
    x = x0
    for k in range(n_obs):
        for _ in range(substeps):
            if gaussian:
                dz = rng.standard_normal()
            else:
                dz = cms_draw(rng, alpha, shift, log_s)
            if x > 0.0:
                x = x * decay + inflow + noise_scale * math.exp(inv_alpha * math.log(x)) * dz
            else:
                x = inflow
            if x < 0.0:
                x = 0.0
            elif not x < math.inf:
                # inf or nan; the caller reports the first bad index
                out[k + 1:] = np.nan
                return out
        out[k + 1] = x
    return out
