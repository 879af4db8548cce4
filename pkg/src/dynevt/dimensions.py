"""Generalized-dimension spectra D_q of value series and their closed forms.

``estimate_Dq`` is a correlation-sum estimator: for reference points y_i and
radius r it averages the (q-1)-th power of the empirical ball mass
p_i(r) = #\\{j : dist(y_j, y_i) < r\\}/N and reads D_q off the log-log slope

    D_q = slope of log <p_i(r)^(q-1)> against (q-1) log r,

with the q = 1 case handled by the log-average (l'Hopital) form.  The scaling
window is chosen automatically by maximizing the regression R^2 over
contiguous radius windows.

For the area-contracting baker map the spectrum of the x-image is the
spectrum of a two-scale self-similar measure and solves

    alpha^q * lam_a^((1-q) D) + (1-alpha)^q * lam_b^((1-q) D) = 1,

which ``baker_Dq_solve`` inverts by bisection; its q -> 1 limit is the
entropy/Lyapunov ratio returned by ``baker_stable_info_dimension``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from dynevt.rng import stream
from dynevt.systems import (
    Baker,
    CantorIFS1D,
    CantorProduct2D,
    SystemSpec,
    UnsupportedSystemError,
)

DEFAULT_Q_GRID = (1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0)
Q_HARD_CAP = 6.0


@dataclass(frozen=True)
class DimensionSpectrum:
    """Estimated D_q over a q grid with per-q regression diagnostics."""

    q: tuple
    D: tuple
    radii: tuple
    r2: tuple
    flagged: tuple  # q values whose scaling-window R^2 fell below 0.98

    def as_dict(self) -> dict:
        return {qq: dd for qq, dd in zip(self.q, self.D)}


def _ball_fractions(values: np.ndarray, refs: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """p[i, j] = fraction of sample points within radii[j] of reference i.

    Self-matches are excluded (each reference is a sample point), otherwise
    the 1/N floor would flatten the small-radius scaling.
    """
    n = len(values)
    out = np.empty((len(refs), len(radii)))
    if values.ndim == 1:
        order = np.sort(values)
        for j, r in enumerate(radii):
            hi = np.searchsorted(order, refs + r, side="left")
            lo = np.searchsorted(order, refs - r, side="right")
            out[:, j] = (hi - lo - 1) / (n - 1)
    else:
        tree = cKDTree(values)
        for j, r in enumerate(radii):
            cnt = tree.query_ball_point(refs, r, workers=-1, return_length=True)
            out[:, j] = (np.asarray(cnt) - 1) / (n - 1)
    return np.clip(out, 0.0, None)


def _best_window_slope(x: np.ndarray, y: np.ndarray, min_window: int):
    """Least-squares slope over the contiguous window maximizing R^2."""
    best = (None, -np.inf, (0, len(x)))
    for lo in range(0, len(x) - min_window + 1):
        for hi in range(lo + min_window, len(x) + 1):
            xs = x[lo:hi]
            ys = y[lo:hi]
            if np.any(~np.isfinite(ys)):
                continue
            xm = xs - xs.mean()
            ym = ys - ys.mean()
            sxx = float(xm @ xm)
            if sxx == 0:
                continue
            slope = float(xm @ ym) / sxx
            resid = ym - slope * xm
            syy = float(ym @ ym)
            r2 = 1.0 - float(resid @ resid) / syy if syy > 0 else 0.0
            # prefer wide windows among near-equal fits
            score = r2 + 1e-4 * (hi - lo)
            if score > best[1]:
                best = (slope, score, (lo, hi))
    slope, _, window = best
    if slope is None:
        return np.nan, 0.0, window
    lo, hi = window
    xs, ys = x[lo:hi], y[lo:hi]
    xm = xs - xs.mean()
    ym = ys - ys.mean()
    slope = float(xm @ ym) / float(xm @ xm)
    resid = ym - slope * xm
    syy = float(ym @ ym)
    r2 = 1.0 - float(resid @ resid) / syy if syy > 0 else 0.0
    return slope, r2, window


def estimate_Dq(
    values,
    q_grid: Sequence[float] = DEFAULT_Q_GRID,
    radii: Optional[Sequence[float]] = None,
    n_ref: int = 2000,
    seed: int = 0,
    min_window: int = 8,
    r2_floor: float = 0.98,
    min_length: int = 100_000,
) -> DimensionSpectrum:
    """Generalized dimensions of the empirical measure of a value series.

    ``values`` may be scalar (n,) or vector (n, m) observations.  The default
    radii grid spans two decades below a tenth of the data diameter at 16
    points per decade.  Estimates whose best scaling window has R^2 below
    ``r2_floor`` are flagged but still returned.  Supports q >= 1 only; the
    correlation sums of q < 1 blow up on empty balls.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim == 2 and v.shape[1] == 1:
        v = v[:, 0]
    finite = np.all(np.isfinite(v), axis=1) if v.ndim == 2 else np.isfinite(v)
    v = v[finite]
    if len(v) < min_length:
        raise ValueError(f"need at least {min_length} finite observations")
    for q in q_grid:
        if q > Q_HARD_CAP:
            raise ValueError(f"q = {q} beyond the supported cap {Q_HARD_CAP}")
        if q < 1.0:
            raise ValueError("empirical spectrum supports q >= 1 only")
        if q >= 5.0 + 1e-12:
            warnings.warn(
                f"correlation-sum estimates are imprecise at q = {q}", stacklevel=2
            )

    rng = stream(seed, 2**23)
    idx = rng.choice(len(v), size=min(n_ref, len(v)), replace=False)
    refs = v[idx]
    if radii is None:
        if v.ndim == 1:
            diam = float(v.max() - v.min())
        else:
            diam = float(np.max(v.max(axis=0) - v.min(axis=0)))
        r_hi = diam / 10.0
        radii = np.geomspace(r_hi / 100.0, r_hi, 33)
    radii = np.asarray(sorted(radii), dtype=float)

    p = _ball_fractions(v, refs, radii)
    logr = np.log(radii)

    Ds, r2s, flagged = [], [], []
    with np.errstate(divide="ignore", invalid="ignore"):
        for q in q_grid:
            if abs(q - 1.0) < 1e-12:
                mask = p > 0
                y = np.where(mask, np.log(np.where(mask, p, 1.0)), np.nan)
                curve = np.nanmean(y, axis=0)
                # radii where some reference has an empty ball are below the
                # resolvable scale; drop them from the fit
                ok = np.all(mask, axis=0)
                curve = np.where(ok, curve, np.nan)
                slope, r2, _ = _best_window_slope(logr, curve, min_window)
            else:
                corr = np.mean(p ** (q - 1.0), axis=0)
                curve = np.log(corr)
                slope, r2, _ = _best_window_slope((q - 1.0) * logr, curve, min_window)
            Ds.append(float(slope))
            r2s.append(float(r2))
            if not (r2 >= r2_floor):
                flagged.append(float(q))

    return DimensionSpectrum(
        q=tuple(float(q) for q in q_grid),
        D=tuple(Ds),
        radii=tuple(float(r) for r in radii),
        r2=tuple(r2s),
        flagged=tuple(flagged),
    )


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def baker_stable_info_dimension(alpha: float, lam_a: float, lam_b: float) -> float:
    """Information dimension of the two-scale stable-direction measure."""
    num = alpha * math.log(1.0 / alpha) + (1 - alpha) * math.log(1.0 / (1 - alpha))
    den = alpha * math.log(1.0 / lam_a) + (1 - alpha) * math.log(1.0 / lam_b)
    return num / den


def baker_Dq_solve(
    alpha: float,
    lam_a: float,
    lam_b: float,
    q: float,
    tol: float = 1e-12,
    d_max: float = 2.0,
) -> float:
    """Solve the two-scale moment equation for D_q of the baker x-image.

    q = 1 returns the closed-form information dimension of the stable
    direction.  Other q are found by bisection on D in (0, d_max]; the
    left-hand side is strictly monotone in D, so there is a unique root.
    """
    if abs(q - 1.0) < 1e-12:
        return baker_stable_info_dimension(alpha, lam_a, lam_b)

    w1, w2 = alpha, 1.0 - alpha

    def g(d: float) -> float:
        return (
            w1**q * lam_a ** ((1.0 - q) * d)
            + w2**q * lam_b ** ((1.0 - q) * d)
            - 1.0
        )

    lo, hi = 1e-12, d_max
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if glo * ghi > 0:
        raise ValueError(
            f"no sign change for D in ({lo}, {hi}); spectrum outside bracket"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0 or hi - lo < tol:
            return mid
        if glo * gm < 0:
            hi = mid
        else:
            lo, glo = mid, gm
    return 0.5 * (lo + hi)


def info_dimension(sys: SystemSpec) -> float:
    """Closed-form information dimension of the system's invariant measure."""
    if isinstance(sys, Baker):
        return 1.0 + baker_stable_info_dimension(sys.alpha, sys.lam_a, sys.lam_b)
    if isinstance(sys, CantorIFS1D):
        w = np.asarray(sys.weights, dtype=float)
        r = np.asarray(sys.ratios, dtype=float)
        return float(np.sum(w * np.log(w)) / np.sum(w * np.log(r)))
    if isinstance(sys, CantorProduct2D):
        return 2.0 * info_dimension(sys.factor)
    raise UnsupportedSystemError(
        f"no closed-form information dimension for {type(sys).__name__}"
    )


def hunt_kaloshin_cap(D_values, m: int) -> np.ndarray:
    """Image-measure dimensions cannot exceed the observable's range dimension."""
    return np.minimum(np.asarray(D_values, dtype=float), float(m))


@dataclass(frozen=True)
class RateFunction:
    """Legendre-transform rate function of local-dimension deviations."""

    s: tuple
    Q: tuple
    boundary: tuple  # s values where the supremum sat on the grid edge


def rate_function(q_grid, D_values, s_grid, n_fine: int = 2001) -> RateFunction:
    """Q(s) = sup_q { -q s + q D_{q+1} } over the representable q range.

    D is interpolated linearly on the given grid; the supremum therefore runs
    over q in [min(q_grid) - 1, max(q_grid) - 1].  Entries of ``s_grid`` whose
    supremum is attained at the edge of that range are flagged as boundary
    values (the true supremum may lie outside the grid).
    """
    qg = np.asarray(q_grid, dtype=float)
    Dg = np.asarray(D_values, dtype=float)
    if len(qg) != len(Dg) or len(qg) < 2:
        raise ValueError("need matching q and D grids with at least two points")
    order = np.argsort(qg)
    qg, Dg = qg[order], Dg[order]

    qq = np.linspace(qg[0] - 1.0, qg[-1] - 1.0, n_fine)
    D_at = np.interp(qq + 1.0, qg, Dg)
    s_out, Q_out, boundary = [], [], []
    for s in np.asarray(s_grid, dtype=float):
        vals = -qq * s + qq * D_at
        j = int(np.argmax(vals))
        s_out.append(float(s))
        Q_out.append(float(vals[j]))
        if j == 0 or j == n_fine - 1:
            boundary.append(float(s))
    return RateFunction(s=tuple(s_out), Q=tuple(Q_out), boundary=tuple(boundary))
