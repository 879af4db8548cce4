"""Observables f: state space -> R^m and the induced extreme-value functional.

The recurrence functional of a target value ``f0`` is

    phi(x) = -log dist(f(x), f0),

which is large exactly when the observed value is close to the target:
``{phi > u}`` coincides with ``{f(x) in B(f0, e^-u)}``.  ``phi_along`` turns a
whole trajectory into a phi series; the Delay kind is evaluated incrementally
so long delay vectors never materialize an (n, k) matrix.

``preimage_data`` inverts the scalar catalog observables analytically.  The
closed-form extremal-index formulas need exact derivative values at the exact
roots, which a generic numerical root-finder would blur.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from dynevt.systems import (
    Hemmer as _Hemmer,
    SystemSpec,
    deterministic_step,
    invariant_density,
    state_dim,
)


class UnsupportedObservableError(TypeError):
    """Operation not defined for this observable kind."""


# ---------------------------------------------------------------------------
# observational noise
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdditiveUniform:
    """Independent uniform [-eta, eta] measurement noise at each evaluation."""

    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("noise half-width eta must be positive")


@dataclass(frozen=True)
class DiscreteShift:
    """Add shift eta_i with probability p_i, independently per evaluation."""

    shifts: tuple
    probs: tuple

    def __post_init__(self):
        if len(self.shifts) != len(self.probs) or not self.shifts:
            raise ValueError("shifts and probs must be non-empty and equal length")
        p = np.asarray(self.probs, dtype=float)
        if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("shift probabilities must be positive and sum to 1")


ObsNoiseSpec = Union[AdditiveUniform, DiscreteShift]


def _noise_draws(noise, rng, shape):
    if rng is None:
        raise ValueError("observable carries noise; an rng is required")
    if isinstance(noise, AdditiveUniform):
        return rng.uniform(-noise.eta, noise.eta, size=shape)
    idx = rng.choice(len(noise.shifts), size=shape, p=np.asarray(noise.probs))
    return np.asarray(noise.shifts, dtype=float)[idx]


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Identity:
    noise: Optional[ObsNoiseSpec] = None


@dataclass(frozen=True)
class Coordinate:
    index: int
    noise: Optional[ObsNoiseSpec] = None


@dataclass(frozen=True)
class Mean2D:
    """f(x, y) = (x + y) / 2."""

    noise: Optional[ObsNoiseSpec] = None


@dataclass(frozen=True)
class Affine:
    """f(x, y) = a*x + b*y + c."""

    a: float
    b: float
    c: float
    noise: Optional[ObsNoiseSpec] = None


@dataclass(frozen=True)
class Gaussian2D:
    """Standard bivariate Gaussian bump centered at (x0, y0), peak 1/(2*pi)."""

    x0: float
    y0: float
    noise: Optional[ObsNoiseSpec] = None


@dataclass(frozen=True)
class Power:
    """f(x) = x**a on a one-dimensional state space, a > 0."""

    a: float
    noise: Optional[ObsNoiseSpec] = None

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("power exponent must be positive")


@dataclass(frozen=True)
class QuadraticRoots:
    """f(x) = (x - 1/2) * (x - 1/4): a parabola with roots 1/2 and 1/4."""

    noise: Optional[ObsNoiseSpec] = None


@dataclass(frozen=True)
class Branch:
    """Affine piece slope*x + intercept on [lo, hi)."""

    lo: float
    hi: float
    slope: float
    intercept: float

    def __post_init__(self):
        if self.slope == 0:
            raise ValueError("piecewise-affine branches need nonzero slope")
        if not self.hi > self.lo:
            raise ValueError("branch interval must have positive length")


@dataclass(frozen=True)
class PiecewiseAffine:
    branches: tuple
    noise: Optional[ObsNoiseSpec] = None

    def __post_init__(self):
        if not self.branches:
            raise ValueError("need at least one branch")


@dataclass(frozen=True)
class DistanceToLine:
    """Signed distance to the line a*x + b*y + c = 0."""

    a: float
    b: float
    c: float
    noise: Optional[ObsNoiseSpec] = None

    def __post_init__(self):
        if self.a == 0 and self.b == 0:
            raise ValueError("line coefficients a, b cannot both vanish")


@dataclass(frozen=True)
class DistanceToCircle:
    """Signed distance to the circle of given center and radius."""

    cx: float
    cy: float
    radius: float
    noise: Optional[ObsNoiseSpec] = None

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be >= 0")


@dataclass(frozen=True)
class VectorList:
    """Concatenation of several observables into one vector."""

    parts: tuple
    noise: Optional[ObsNoiseSpec] = None

    def __post_init__(self):
        if not self.parts:
            raise ValueError("need at least one component observable")


@dataclass(frozen=True)
class Delay:
    """Delay-coordinate vector (f(x), f(Tx), ..., f(T^(k-1) x)) of a scalar f."""

    base: object
    k: int
    noise: Optional[ObsNoiseSpec] = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("delay order k must be >= 1")


@dataclass(frozen=True)
class SpatialMean:
    """Arithmetic mean of the state components (columns, for ingested series)."""

    noise: Optional[ObsNoiseSpec] = None


ObservableSpec = Union[
    Identity,
    Coordinate,
    Mean2D,
    Affine,
    Gaussian2D,
    Power,
    QuadraticRoots,
    PiecewiseAffine,
    DistanceToLine,
    DistanceToCircle,
    VectorList,
    Delay,
    SpatialMean,
]


def output_dim(obs, input_dim: int) -> int:
    """Dimension m of the observable's value, given the state dimension."""
    if isinstance(obs, Identity):
        return input_dim
    if isinstance(obs, VectorList):
        return sum(output_dim(p, input_dim) for p in obs.parts)
    if isinstance(obs, Delay):
        if output_dim(obs.base, input_dim) != 1:
            raise UnsupportedObservableError("delay base observable must be scalar")
        return obs.k
    return 1


# ---------------------------------------------------------------------------
# evaluation along series
# ---------------------------------------------------------------------------


def _as_2d(states):
    a = np.asarray(states, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def series_values(obs, states, sys=None, rng=None) -> np.ndarray:
    """Evaluate an observable along a state series.

    Returns shape (n,) for scalar observables and (n, m) for vector ones;
    Delay returns (n - k + 1, k) since the last rows lack forward images.
    Declared observational noise is drawn independently per evaluation.
    """
    x = _as_2d(states)
    n, d = x.shape

    if isinstance(obs, Delay):
        base = series_values(obs.base, states, sys, rng)
        if base.ndim != 1:
            raise UnsupportedObservableError("delay base observable must be scalar")
        if n < obs.k:
            raise ValueError("series shorter than the delay order")
        v = np.lib.stride_tricks.sliding_window_view(base, obs.k)
        if obs.noise is not None:
            v = v + _noise_draws(obs.noise, rng, v.shape)
        return v

    if isinstance(obs, VectorList):
        cols = [np.atleast_2d(series_values(p, states, sys, rng).T).T for p in obs.parts]
        v = np.column_stack(cols)
        if obs.noise is not None:
            v = v + _noise_draws(obs.noise, rng, v.shape)
        return v

    if isinstance(obs, Identity):
        v = x[:, 0].copy() if d == 1 else x.copy()
    elif isinstance(obs, Coordinate):
        if not (0 <= obs.index < d):
            raise UnsupportedObservableError(f"coordinate {obs.index} of {d}-dim state")
        v = x[:, obs.index].copy()
    elif isinstance(obs, Mean2D):
        _need_dim(d, 2, "Mean2D")
        v = 0.5 * (x[:, 0] + x[:, 1])
    elif isinstance(obs, Affine):
        _need_dim(d, 2, "Affine")
        v = obs.a * x[:, 0] + obs.b * x[:, 1] + obs.c
    elif isinstance(obs, Gaussian2D):
        _need_dim(d, 2, "Gaussian2D")
        r2 = (x[:, 0] - obs.x0) ** 2 + (x[:, 1] - obs.y0) ** 2
        v = np.exp(-0.5 * r2) / (2.0 * np.pi)
    elif isinstance(obs, Power):
        _need_dim(d, 1, "Power")
        v = x[:, 0] ** obs.a
    elif isinstance(obs, QuadraticRoots):
        _need_dim(d, 1, "QuadraticRoots")
        v = (x[:, 0] - 0.5) * (x[:, 0] - 0.25)
    elif isinstance(obs, PiecewiseAffine):
        _need_dim(d, 1, "PiecewiseAffine")
        s = x[:, 0]
        v = np.full(n, np.nan)
        for i, b in enumerate(obs.branches):
            last = i == len(obs.branches) - 1
            mask = (s >= b.lo) & ((s <= b.hi) if last else (s < b.hi))
            mask &= np.isnan(v)
            v[mask] = b.slope * s[mask] + b.intercept
    elif isinstance(obs, DistanceToLine):
        _need_dim(d, 2, "DistanceToLine")
        v = (obs.a * x[:, 0] + obs.b * x[:, 1] + obs.c) / np.hypot(obs.a, obs.b)
    elif isinstance(obs, DistanceToCircle):
        _need_dim(d, 2, "DistanceToCircle")
        v = np.hypot(x[:, 0] - obs.cx, x[:, 1] - obs.cy) - obs.radius
    elif isinstance(obs, SpatialMean):
        v = x.mean(axis=1)
    else:
        raise UnsupportedObservableError(f"unknown observable {obs!r}")

    if obs.noise is not None:
        v = v + _noise_draws(obs.noise, rng, v.shape)
    return v


def _need_dim(d, want, name):
    if d != want:
        raise UnsupportedObservableError(f"{name} needs {want}-dim states, got {d}")


def evaluate(obs, sys: Optional[SystemSpec], x, rng=None):
    """Value of the observable at a single state.

    Delay advances ``x`` with the noise-free map, so ``sys`` is required for
    it.  Returns a float for scalar observables, an ndarray otherwise.
    """
    if isinstance(obs, Delay):
        if sys is None:
            raise ValueError("Delay evaluation needs the system to advance the state")
        xs = [x]
        for _ in range(obs.k - 1):
            xs.append(deterministic_step(sys, xs[-1]))
        states = np.asarray(xs, dtype=float)
        base = series_values(obs.base, states, sys, rng)
        v = base.copy()
        if obs.noise is not None:
            v = v + _noise_draws(obs.noise, rng, v.shape)
        return v
    states = np.asarray([x], dtype=float) if np.ndim(x) == 0 else np.asarray(x, dtype=float)[None, :]
    v = series_values(obs, states, sys, rng)
    return float(v[0]) if v.ndim == 1 else v[0]


# ---------------------------------------------------------------------------
# targets and the recurrence functional
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TargetSpec:
    """Target of the recurrence functional: a state z, or a value f0 directly.

    When ``z`` is given, ``f0 = f(z)`` is computed once (noise-free) and
    frozen.  ``metric`` selects the distance on the observable's range.
    """

    z: Optional[tuple] = None
    f0: Optional[tuple] = None
    metric: str = "euclidean"

    def __post_init__(self):
        if self.metric not in ("euclidean", "chebyshev"):
            raise ValueError("metric must be 'euclidean' or 'chebyshev'")
        if self.z is None and self.f0 is None:
            raise ValueError("target needs either a state z or a value f0")


def resolve_target(target: TargetSpec, obs, sys=None):
    """The frozen target value f0 (float for scalar observables, ndarray else)."""
    if target.f0 is not None:
        f0 = np.asarray(target.f0, dtype=float)
        return float(f0) if f0.ndim == 0 else f0
    z = np.asarray(target.z, dtype=float)
    return evaluate(obs, sys, float(z) if z.ndim == 0 else z, rng=None)


def phi_values(values, f0, metric: str = "euclidean") -> np.ndarray:
    """phi = -log dist(values, f0) for a precomputed value series.

    Exact hits give +inf.  Non-finite observable values (poles) give -inf, so
    they can never masquerade as recurrences.
    """
    v = np.asarray(values, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if v.ndim == 1:
            dist = np.abs(v - f0)
        else:
            dv = v - np.asarray(f0, dtype=float)[None, :]
            if metric == "chebyshev":
                dist = np.max(np.abs(dv), axis=1)
            else:
                dist = np.sqrt(np.sum(dv * dv, axis=1))
        dist = np.where(np.isfinite(dist), dist, np.inf)
        return -np.log(dist)


def phi_series(values, f0, metric: str = "euclidean") -> np.ndarray:
    return phi_values(values, f0, metric)


def _phi_delay(base: np.ndarray, f0: np.ndarray, metric: str) -> np.ndarray:
    """Delay phi computed component-wise, without the (n, k) delay matrix."""
    k = len(f0)
    nrow = base.size - k + 1
    if nrow < 1:
        raise ValueError("series shorter than the delay order")
    with np.errstate(divide="ignore", invalid="ignore"):
        if metric == "chebyshev":
            acc = np.zeros(nrow)
            for i in range(k):
                np.maximum(acc, np.abs(base[i : i + nrow] - f0[i]), out=acc)
            acc = np.where(np.isfinite(acc), acc, np.inf)
            return -np.log(acc)
        acc = np.zeros(nrow)
        for i in range(k):
            d = base[i : i + nrow] - f0[i]
            acc += d * d
        acc = np.where(np.isfinite(acc), acc, np.inf)
        return -0.5 * np.log(acc)


def phi_along(obs, states, f0, metric: str = "euclidean", sys=None, rng=None) -> np.ndarray:
    """phi series of an observable along a trajectory's states."""
    if isinstance(obs, Delay) and obs.noise is None:
        base = series_values(obs.base, states, sys, rng)
        return _phi_delay(base, np.asarray(f0, dtype=float), metric)
    return phi_values(series_values(obs, states, sys, rng), f0, metric)


def phi(obs, sys, x, target: TargetSpec, rng=None) -> float:
    """phi at a single state; +inf exactly when f(x) equals the target value."""
    f0 = resolve_target(target, obs, sys)
    v = evaluate(obs, sys, x, rng)
    arr = np.asarray([v]) if np.ndim(v) == 0 else np.asarray(v)[None, :]
    return float(phi_values(arr, f0, target.metric)[0])


# ---------------------------------------------------------------------------
# analytic preimages of scalar catalog observables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObservablePreimage:
    """A solution w of f(w) = f0 with the branch derivative and density there."""

    w: float
    f_deriv: float
    density: float


def preimage_data(obs, sys: SystemSpec, f0: float):
    """All preimages of ``f0`` under a scalar catalog observable, analytically.

    Each entry carries |f'(w)| and the invariant density h(w); both feed the
    closed-form cluster coefficients.  Requires a one-dimensional system with
    a known invariant density.
    """
    if state_dim(sys) != 1:
        raise UnsupportedObservableError("analytic preimages need a 1-dim system")
    h = invariant_density(sys)
    if h is None:
        raise UnsupportedObservableError(
            f"{type(sys).__name__} has no closed-form invariant density"
        )
    lo_dom, hi_dom = (-1.0, 1.0) if isinstance(sys, _Hemmer) else (0.0, 1.0)

    roots: list[tuple[float, float]] = []  # (w, |f'(w)|)
    if isinstance(obs, Identity):
        roots.append((float(f0), 1.0))
    elif isinstance(obs, Power):
        if f0 <= 0:
            raise UnsupportedObservableError("Power preimages need f0 > 0")
        w = f0 ** (1.0 / obs.a)
        roots.append((w, abs(obs.a * w ** (obs.a - 1.0))))
    elif isinstance(obs, QuadraticRoots):
        disc = 0.0625 + 4.0 * f0
        if disc < 0:
            raise UnsupportedObservableError("target value below the parabola minimum")
        for sgn in (1.0, -1.0):
            w = 0.5 * (0.75 + sgn * np.sqrt(disc))
            roots.append((float(w), abs(2.0 * w - 0.75)))
    elif isinstance(obs, PiecewiseAffine):
        for i, b in enumerate(obs.branches):
            w = (f0 - b.intercept) / b.slope
            last = i == len(obs.branches) - 1
            inside = (b.lo <= w <= b.hi) if last else (b.lo <= w < b.hi)
            if inside:
                roots.append((float(w), abs(b.slope)))
    else:
        raise UnsupportedObservableError(
            f"{type(obs).__name__} is not analytically invertible in this catalog"
        )

    out = []
    for w, df in roots:
        if not (lo_dom - 1e-12 <= w <= hi_dom + 1e-12):
            continue
        if any(abs(w - p.w) < 1e-12 for p in out):
            continue
        out.append(ObservablePreimage(w=w, f_deriv=df, density=float(h(w))))
    if not out:
        raise UnsupportedObservableError(f"no preimage of {f0} in the domain")
    return tuple(out)


def two_branch_ramp(a: float) -> PiecewiseAffine:
    """Piecewise-linear circle observable rising 0 -> 1 on [0, a), falling 1 -> 0 on [a, 1].

    Branch slopes are 1/a and 1/(a-1).  Preimages of interior values are
    obtained by inverting each branch directly (descending branch: w = 1 +
    f0*(a-1)), not from a precomputed closed-form shortcut.
    """
    if not (0.0 < a < 1.0):
        raise ValueError("peak location a must lie in (0, 1)")
    return PiecewiseAffine(
        branches=(
            Branch(0.0, a, 1.0 / a, 0.0),
            Branch(a, 1.0, 1.0 / (a - 1.0), -1.0 / (a - 1.0)),
        )
    )


def hemmer_two_slope() -> PiecewiseAffine:
    """Two-slope observable on [-1, 1] taking the same value at -1/2 and 3 - 2*sqrt(2)."""
    c = 5.5 - 4.0 * np.sqrt(2.0)
    return PiecewiseAffine(
        branches=(
            Branch(-1.0, 0.0, 1.0, 0.0),
            Branch(0.0, 1.0, -2.0, c),
        )
    )
