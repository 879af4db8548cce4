"""Compiled orbit loops.

Map iteration is inherently sequential, so the hot loops live here as numba
kernels.  All randomness (noise draws, branch choices, map-switch indices) is
pre-drawn into plain arrays by the caller; the kernels themselves are pure
functions of their inputs, which keeps trajectories reproducible regardless of
threading or call order.

Additive perturbations are folded back into the fundamental domain *after*
the deterministic image and the noise term have been applied.
"""

import numpy as np
from numba import njit

_EMPTY = np.empty(0, dtype=np.float64)


@njit(cache=True)
def _wrap01(x):
    x = x % 1.0
    if x >= 1.0:
        x -= 1.0
    elif x < 0.0:
        x += 1.0
    return x


@njit(cache=True)
def affine2_orbit(x0, s1, o1, s2, o2, n, add):
    """Two-branch affine circle map; branch 1 on [0, 1/2), branch 2 on [1/2, 1)."""
    out = np.empty(n)
    out[0] = x0
    x = x0
    has_add = add.size > 0
    for k in range(1, n):
        if x < 0.5:
            x = s1 * x + o1
        else:
            x = s2 * x + o2
        if has_add:
            x += add[k - 1]
        x = _wrap01(x)
        out[k] = x
    return out


@njit(cache=True)
def affine2_switch_orbit(x0, s1v, o1v, s2v, o2v, idx, n, add):
    """Same map family, with per-step variant index ``idx`` selecting parameters."""
    out = np.empty(n)
    out[0] = x0
    x = x0
    has_add = add.size > 0
    for k in range(1, n):
        j = idx[k - 1]
        if x < 0.5:
            x = s1v[j] * x + o1v[j]
        else:
            x = s2v[j] * x + o2v[j]
        if has_add:
            x += add[k - 1]
        x = _wrap01(x)
        out[k] = x
    return out


@njit(cache=True)
def hemmer_orbit(x0, n, add):
    """x -> 1 - 2*sqrt(|x|) on [-1, 1]; additive noise folded back onto [-1, 1)."""
    out = np.empty(n)
    out[0] = x0
    x = x0
    has_add = add.size > 0
    for k in range(1, n):
        x = 1.0 - 2.0 * np.sqrt(abs(x))
        if has_add:
            x += add[k - 1]
            x = (x + 1.0) % 2.0 - 1.0
        out[k] = x
    return out


@njit(cache=True)
def baker_orbit(x0, y0, alpha, lam_a, lam_b, n, add_x, add_y):
    out = np.empty((n, 2))
    out[0, 0] = x0
    out[0, 1] = y0
    x = x0
    y = y0
    has_add = add_x.size > 0
    for k in range(1, n):
        if y < alpha:
            x = lam_a * x
            y = y / alpha
        else:
            x = (1.0 - lam_b) + lam_b * x
            y = (y - alpha) / (1.0 - alpha)
        if has_add:
            x = _wrap01(x + add_x[k - 1])
            y = _wrap01(y + add_y[k - 1])
        out[k, 0] = x
        out[k, 1] = y
    return out


@njit(cache=True)
def baker_switch_orbit(x0, y0, alphas, lam_as, lam_bs, idx, n, add_x, add_y):
    out = np.empty((n, 2))
    out[0, 0] = x0
    out[0, 1] = y0
    x = x0
    y = y0
    has_add = add_x.size > 0
    for k in range(1, n):
        j = idx[k - 1]
        alpha = alphas[j]
        if y < alpha:
            x = lam_as[j] * x
            y = y / alpha
        else:
            x = (1.0 - lam_bs[j]) + lam_bs[j] * x
            y = (y - alpha) / (1.0 - alpha)
        if has_add:
            x = _wrap01(x + add_x[k - 1])
            y = _wrap01(y + add_y[k - 1])
        out[k, 0] = x
        out[k, 1] = y
    return out


@njit(cache=True)
def chaos_game_orbit(x0, ratios, anchors, branch, n, add):
    """Iterated-function-system sampling: each output is a post-contraction point."""
    out = np.empty(n)
    x = x0
    has_add = add.size > 0
    for k in range(n):
        j = branch[k]
        x = ratios[j] * x + anchors[j]
        if has_add:
            x = _wrap01(x + add[k])
        out[k] = x
    return out


@njit(cache=True)
def lorenz_euler_orbit(x0, y0, z0, sigma, rho, beta, h, n):
    out = np.empty((n, 3))
    out[0, 0] = x0
    out[0, 1] = y0
    out[0, 2] = z0
    x = x0
    y = y0
    z = z0
    for k in range(1, n):
        dx = sigma * (y - x)
        dy = x * (rho - z) - y
        dz = x * y - beta * z
        x += h * dx
        y += h * dy
        z += h * dz
        out[k, 0] = x
        out[k, 1] = y
        out[k, 2] = z
    return out
