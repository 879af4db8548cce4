"""Dynamical systems: deterministic maps, random perturbations, orbit generation.

Supported systems
-----------------
``LinearCircle(m)``            x -> m*x mod 1 on [0, 1)
``TwoBranchAffineCircle``      x -> s_i*x + o_i mod 1, branch i by x < 1/2
``Hemmer()``                   x -> 1 - 2*sqrt(|x|) on [-1, 1]
``Baker(alpha, lam_a, lam_b)`` area-contracting map of the unit square
``CantorIFS1D``                contractive IFS on [0, 1], sampled by chaos game
``CantorProduct2D``            product of two independent 1-D Cantor IFS
``LorenzEuler``                Lorenz vector field advanced by fixed-step Euler

Orbits are reproducible: identical ``(spec, x0, length, seed)`` always produce
bit-identical state arrays.  Randomness (noise, chaos-game branches, map
switching) is pre-drawn from a Philox stream keyed by ``(seed, stream_index)``
and consumed in a fixed order.

Iterating ``m*x mod 1`` with an even multiplier in binary floating point
collapses every orbit onto 0 once the mantissa has been shifted out.  Orbit
generation therefore adds a tiny seeded dither (amplitude 1e-14, statistically
invisible on every scale this package measures) for even multipliers unless
explicitly disabled via the ``jitter`` field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from dynevt import _kernels
from dynevt.rng import stream

JITTER_AMPLITUDE = 1e-14


class DomainError(ValueError):
    """State outside the system's domain."""


class UnsupportedSystemError(TypeError):
    """Operation not defined for this system kind."""


# ---------------------------------------------------------------------------
# noise specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdditiveUniformMod1:
    """Additive noise uniform on [-eta, eta], folded back into the domain.

    The fold is applied after the deterministic image and the additive term.
    """

    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("noise half-width eta must be positive")


@dataclass(frozen=True)
class DiscreteMapSwitch:
    """At each step apply one of ``variants``, drawn with ``probs``."""

    variants: tuple
    probs: tuple

    def __post_init__(self):
        if len(self.variants) != len(self.probs) or not self.variants:
            raise ValueError("variants and probs must be non-empty and equal length")
        p = np.asarray(self.probs, dtype=float)
        if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("switch probabilities must be positive and sum to 1")


NoiseSpec = Union[AdditiveUniformMod1, DiscreteMapSwitch]


# ---------------------------------------------------------------------------
# system specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearCircle:
    m: int
    jitter: Optional[bool] = None  # None: auto (on for even multipliers)
    noise: Optional[NoiseSpec] = None

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError("slope m must be an integer >= 2")

    @property
    def jitter_enabled(self) -> bool:
        if self.jitter is None:
            return self.m % 2 == 0
        return self.jitter


@dataclass(frozen=True)
class TwoBranchAffineCircle:
    slopes: tuple = (2.0, 2.0)
    offsets: tuple = (0.0, 0.0)
    jitter: bool = False
    noise: Optional[NoiseSpec] = None

    def __post_init__(self):
        if len(self.slopes) != 2 or len(self.offsets) != 2:
            raise ValueError("need one (slope, offset) pair per branch")
        if any(s == 0 for s in self.slopes):
            raise ValueError("branch slopes must be nonzero")

    @property
    def jitter_enabled(self) -> bool:
        return self.jitter


@dataclass(frozen=True)
class Hemmer:
    noise: Optional[NoiseSpec] = None


@dataclass(frozen=True)
class Baker:
    alpha: float
    lam_a: float
    lam_b: float
    noise: Optional[NoiseSpec] = None

    def __post_init__(self):
        if not (0.0 < self.alpha <= 0.5):
            raise ValueError("alpha must lie in (0, 1/2]")
        if self.lam_a <= 0 or self.lam_b <= 0 or self.lam_a + self.lam_b > 1.0 + 1e-12:
            raise ValueError("need lam_a > 0, lam_b > 0 and lam_a + lam_b <= 1")


@dataclass(frozen=True)
class CantorIFS1D:
    """Contractions g_i(x) = r_i*x + a_i*(1 - r_i) with anchors a_i spread over [0, 1]."""

    ratios: tuple = (1.0 / 3.0, 1.0 / 3.0)
    weights: tuple = (0.5, 0.5)
    noise: Optional[NoiseSpec] = None

    def __post_init__(self):
        if len(self.ratios) < 2 or len(self.ratios) != len(self.weights):
            raise ValueError("need at least two (ratio, weight) pairs of equal count")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be positive and sum to 1")
        if any(not (0 < r < 1) for r in self.ratios):
            raise ValueError("contraction ratios must lie in (0, 1)")
        cells = self.cells
        for (lo1, hi1), (lo2, hi2) in zip(cells, cells[1:]):
            if hi1 > lo2 + 1e-12:
                raise ValueError("IFS cells overlap; expanding inverse is ill-defined")

    @property
    def anchors(self) -> tuple:
        k = len(self.ratios)
        return tuple(i / (k - 1) for i in range(k))

    @property
    def offsets(self) -> tuple:
        return tuple(a * (1 - r) for a, r in zip(self.anchors, self.ratios))

    @property
    def cells(self) -> tuple:
        """Images g_i([0, 1]), the branch cells of the expanding inverse."""
        return tuple((o, o + r) for o, r in zip(self.offsets, self.ratios))


@dataclass(frozen=True)
class CantorProduct2D:
    """Two independent copies of a 1-D Cantor IFS, one per coordinate."""

    ratios: tuple = (1.0 / 3.0, 1.0 / 3.0)
    weights: tuple = (0.5, 0.5)
    noise: Optional[NoiseSpec] = None

    @property
    def factor(self) -> CantorIFS1D:
        return CantorIFS1D(self.ratios, self.weights)


@dataclass(frozen=True)
class LorenzEuler:
    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0
    h: float = 0.01
    noise: Optional[NoiseSpec] = None

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("Euler step h must be positive")
        if self.noise is not None:
            raise UnsupportedSystemError("noise is not supported for LorenzEuler")


SystemSpec = Union[
    LinearCircle,
    TwoBranchAffineCircle,
    Hemmer,
    Baker,
    CantorIFS1D,
    CantorProduct2D,
    LorenzEuler,
]

_CIRCLE_FAMILY = (LinearCircle, TwoBranchAffineCircle)
_CANTOR_FAMILY = (CantorIFS1D, CantorProduct2D)


@dataclass(frozen=True)
class Trajectory:
    """A simulated orbit: row k holds the state after k steps (row 0 = x0)."""

    states: np.ndarray
    seed: int
    length: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "length", len(self.states))

    @property
    def dim(self) -> int:
        return 1 if self.states.ndim == 1 else self.states.shape[1]


# ---------------------------------------------------------------------------
# geometry helpers
# ---------------------------------------------------------------------------


def state_dim(sys: SystemSpec) -> int:
    if isinstance(sys, (LinearCircle, TwoBranchAffineCircle, Hemmer, CantorIFS1D)):
        return 1
    if isinstance(sys, (Baker, CantorProduct2D)):
        return 2
    if isinstance(sys, LorenzEuler):
        return 3
    raise UnsupportedSystemError(f"unknown system {sys!r}")


def in_domain(sys: SystemSpec, x) -> bool:
    x = np.asarray(x, dtype=float)
    if isinstance(sys, (LinearCircle, TwoBranchAffineCircle)):
        return x.shape == () and 0.0 <= x < 1.0
    if isinstance(sys, Hemmer):
        return x.shape == () and -1.0 <= x <= 1.0
    if isinstance(sys, CantorIFS1D):
        return x.shape == () and 0.0 <= x <= 1.0
    if isinstance(sys, (Baker, CantorProduct2D)):
        return x.shape == (2,) and bool(np.all(x >= 0.0) and np.all(x <= 1.0))
    if isinstance(sys, LorenzEuler):
        return x.shape == (3,) and bool(np.all(np.isfinite(x)))
    raise UnsupportedSystemError(f"unknown system {sys!r}")


def _require_domain(sys, x):
    if not in_domain(sys, x):
        raise DomainError(f"state {x!r} outside domain of {type(sys).__name__}")


def random_initial(sys: SystemSpec, rng: np.random.Generator):
    """Draw a starting state from the system's domain."""
    if isinstance(sys, (LinearCircle, TwoBranchAffineCircle, CantorIFS1D)):
        return float(rng.random())
    if isinstance(sys, Hemmer):
        return float(2.0 * rng.random() - 1.0)
    if isinstance(sys, (Baker, CantorProduct2D)):
        return rng.random(2)
    if isinstance(sys, LorenzEuler):
        return np.array(
            [rng.uniform(-15, 15), rng.uniform(-15, 15), rng.uniform(10, 40)]
        )
    raise UnsupportedSystemError(f"unknown system {sys!r}")


def default_burn_in(sys: SystemSpec) -> int:
    """Steps to discard so recorded orbits start near the invariant set."""
    if isinstance(sys, LorenzEuler):
        return 10_000
    if isinstance(sys, Baker):
        return 1_000
    if isinstance(sys, _CANTOR_FAMILY):
        return 200
    return 100


def default_phi_stride(sys: SystemSpec) -> int:
    """Sampling stride for recurrence series along an orbit.

    For discrete maps every state is an independent recurrence opportunity.
    A finely discretized flow instead crawls through a target ball over many
    consecutive steps; sampling the series at a coarser stride removes those
    passage plateaus (which would otherwise distort block-maxima scales)
    without losing recurrences on the scales being measured.
    """
    return 20 if isinstance(sys, LorenzEuler) else 1


# ---------------------------------------------------------------------------
# single steps
# ---------------------------------------------------------------------------


def deterministic_step(sys: SystemSpec, x):
    """Noise-free image of ``x``.

    For Cantor IFS systems this is the *expanding* map (the inverse of the
    contraction whose cell contains ``x``), the dynamics used for analytic
    extremal-index work; sampled orbits instead use the chaos game.
    """
    _require_domain(sys, x)
    if isinstance(sys, LinearCircle):
        return (sys.m * x) % 1.0
    if isinstance(sys, TwoBranchAffineCircle):
        s, o = (
            (sys.slopes[0], sys.offsets[0])
            if x < 0.5
            else (sys.slopes[1], sys.offsets[1])
        )
        return (s * x + o) % 1.0
    if isinstance(sys, Hemmer):
        return 1.0 - 2.0 * np.sqrt(abs(x))
    if isinstance(sys, Baker):
        x, y = x
        if y < sys.alpha:
            return np.array([sys.lam_a * x, y / sys.alpha])
        return np.array(
            [(1.0 - sys.lam_b) + sys.lam_b * x, (y - sys.alpha) / (1.0 - sys.alpha)]
        )
    if isinstance(sys, CantorIFS1D):
        for (lo, hi), r, o in zip(sys.cells, sys.ratios, sys.offsets):
            if lo - 1e-12 <= x <= hi + 1e-12:
                return (x - o) / r
        raise DomainError(f"{x!r} not in any IFS cell (it fell in a hole)")
    if isinstance(sys, CantorProduct2D):
        f = sys.factor
        return np.array([deterministic_step(f, x[0]), deterministic_step(f, x[1])])
    if isinstance(sys, LorenzEuler):
        xx, yy, zz = x
        return np.array(
            [
                xx + sys.h * sys.sigma * (yy - xx),
                yy + sys.h * (xx * (sys.rho - zz) - yy),
                zz + sys.h * (xx * yy - sys.beta * zz),
            ]
        )
    raise UnsupportedSystemError(f"unknown system {sys!r}")


def _fold(sys, x):
    if isinstance(sys, Hemmer):
        return (x + 1.0) % 2.0 - 1.0
    return np.asarray(x) % 1.0 if np.ndim(x) else x % 1.0


def step(sys: SystemSpec, x, rng: Optional[np.random.Generator] = None):
    """One step of the system, applying its declared noise (if any).

    Cantor IFS systems advance by one chaos-game move and therefore always
    need ``rng``.
    """
    if isinstance(sys, _CANTOR_FAMILY):
        if rng is None:
            raise ValueError("Cantor IFS sampling requires an rng")
        return _chaos_move(sys, x, rng)
    if sys.noise is None:
        return deterministic_step(sys, x)
    if rng is None:
        raise ValueError(f"{type(sys).__name__} carries noise; an rng is required")
    if isinstance(sys.noise, DiscreteMapSwitch):
        j = rng.choice(len(sys.noise.variants), p=np.asarray(sys.noise.probs))
        return deterministic_step(sys.noise.variants[j], x)
    eta = sys.noise.eta
    y = deterministic_step(sys, x)
    if np.ndim(y):
        return _fold(sys, y + rng.uniform(-eta, eta, size=len(y)))
    return _fold(sys, y + rng.uniform(-eta, eta))


def _chaos_move(sys, x, rng):
    _require_domain(sys, x)
    if isinstance(sys, CantorIFS1D):
        j = rng.choice(len(sys.ratios), p=np.asarray(sys.weights))
        y = sys.ratios[j] * x + sys.offsets[j]
        if isinstance(sys.noise, AdditiveUniformMod1):
            y = (y + rng.uniform(-sys.noise.eta, sys.noise.eta)) % 1.0
        return y
    f = sys.factor
    jx = rng.choice(len(f.ratios), p=np.asarray(f.weights))
    jy = rng.choice(len(f.ratios), p=np.asarray(f.weights))
    y = np.array(
        [f.ratios[jx] * x[0] + f.offsets[jx], f.ratios[jy] * x[1] + f.offsets[jy]]
    )
    if isinstance(sys.noise, AdditiveUniformMod1):
        y = (y + rng.uniform(-sys.noise.eta, sys.noise.eta, size=2)) % 1.0
    return y


def map_derivative(sys: SystemSpec, x) -> float:
    """|T'(x)| of the one-dimensional (expanding) map at ``x``."""
    if isinstance(sys, LinearCircle):
        return float(sys.m)
    if isinstance(sys, TwoBranchAffineCircle):
        return abs(sys.slopes[0] if x < 0.5 else sys.slopes[1])
    if isinstance(sys, Hemmer):
        if x == 0:
            raise DomainError("derivative of the Hemmer map diverges at 0")
        return 1.0 / np.sqrt(abs(x))
    if isinstance(sys, CantorIFS1D):
        for (lo, hi), r in zip(sys.cells, sys.ratios):
            if lo - 1e-12 <= x <= hi + 1e-12:
                return 1.0 / r
        raise DomainError(f"{x!r} not in any IFS cell")
    raise UnsupportedSystemError(
        f"no scalar map derivative for {type(sys).__name__}"
    )


def invariant_density(sys: SystemSpec):
    """Invariant density h(x) when it is known in closed form, else None.

    For a Cantor IFS with equal ratios and equal weights the returned constant
    is the density of the balanced measure with respect to its conformal
    measure (only ratios of h between points enter any downstream formula).
    """
    if isinstance(sys, LinearCircle):
        return lambda x: np.ones_like(np.asarray(x, dtype=float))
    if isinstance(sys, TwoBranchAffineCircle):
        if abs(abs(sys.slopes[0]) - 2.0) < 1e-12 and abs(abs(sys.slopes[1]) - 2.0) < 1e-12:
            return lambda x: np.ones_like(np.asarray(x, dtype=float))
        return None
    if isinstance(sys, Hemmer):
        return lambda x: 0.5 * (1.0 - np.asarray(x, dtype=float))
    if isinstance(sys, CantorIFS1D):
        if len(set(sys.ratios)) == 1 and len(set(sys.weights)) == 1:
            return lambda x: np.ones_like(np.asarray(x, dtype=float))
        return None
    return None


def survival_factor(sys: CantorIFS1D) -> float:
    """Per-step mass retained by the expanding map with the holes removed.

    Viewing the IFS attractor as the repeller of its expanding inverse, the
    complement of the branch cells is an absorbing hole and the surviving
    fraction per step equals the total cell length.
    """
    if not isinstance(sys, CantorIFS1D):
        raise UnsupportedSystemError("survival factor applies to 1-D Cantor IFS")
    return float(sum(sys.ratios))


# ---------------------------------------------------------------------------
# orbit generation
# ---------------------------------------------------------------------------


def _affine_params(spec) -> tuple:
    if isinstance(spec, LinearCircle):
        return (float(spec.m), 0.0, float(spec.m), 0.0)
    if isinstance(spec, TwoBranchAffineCircle):
        return (
            float(spec.slopes[0]),
            float(spec.offsets[0]),
            float(spec.slopes[1]),
            float(spec.offsets[1]),
        )
    raise UnsupportedSystemError(f"{type(spec).__name__} is not a circle map")


def _additive_draws(noise, jitter_on, rng, n, cols=1):
    """Pre-draw the per-step additive term (noise plus dither), or empty."""
    add = None
    if isinstance(noise, AdditiveUniformMod1):
        add = rng.uniform(-noise.eta, noise.eta, size=(n, cols))
    if jitter_on:
        j = rng.uniform(-JITTER_AMPLITUDE, JITTER_AMPLITUDE, size=(n, cols))
        add = j if add is None else add + j
    if add is None:
        return np.empty((0, cols))
    return add


def orbit(sys: SystemSpec, x0, n: int, seed: int, stream_index: int = 0) -> Trajectory:
    """Simulate ``n`` states (the first one being ``x0``) from a seeded stream.

    Cantor IFS systems are sampled by the chaos game (see ``cantor_sample``),
    so for them every recorded state is a post-contraction point.
    """
    if n < 1:
        raise ValueError("orbit length must be >= 1")
    if isinstance(sys, _CANTOR_FAMILY):
        return cantor_sample(sys, n, seed, x0=x0, stream_index=stream_index)
    _require_domain(sys, x0)
    rng = stream(seed, stream_index)
    noise = sys.noise

    if isinstance(sys, _CIRCLE_FAMILY):
        if isinstance(noise, DiscreteMapSwitch):
            for v in noise.variants:
                if not isinstance(v, _CIRCLE_FAMILY):
                    raise UnsupportedSystemError(
                        "map switching for a circle map needs circle-map variants"
                    )
            params = np.array([_affine_params(v) for v in noise.variants])
            idx = rng.choice(len(noise.variants), size=n - 1, p=np.asarray(noise.probs))
            add = _additive_draws(None, sys.jitter_enabled, rng, n - 1)[:, 0] if sys.jitter_enabled else _kernels._EMPTY
            states = _kernels.affine2_switch_orbit(
                float(x0), params[:, 0].copy(), params[:, 1].copy(),
                params[:, 2].copy(), params[:, 3].copy(),
                idx.astype(np.int64), n, add,
            )
        else:
            s1, o1, s2, o2 = _affine_params(sys)
            add = _additive_draws(noise, sys.jitter_enabled, rng, n - 1)
            add = add[:, 0] if add.size else _kernels._EMPTY
            states = _kernels.affine2_orbit(float(x0), s1, o1, s2, o2, n, add)
        return Trajectory(states, seed)

    if isinstance(sys, Hemmer):
        if isinstance(noise, DiscreteMapSwitch):
            raise UnsupportedSystemError("map switching is not supported for Hemmer")
        add = _additive_draws(noise, False, rng, n - 1)
        add = add[:, 0] if add.size else _kernels._EMPTY
        return Trajectory(_kernels.hemmer_orbit(float(x0), n, add), seed)

    if isinstance(sys, Baker):
        if isinstance(noise, DiscreteMapSwitch):
            for v in noise.variants:
                if not isinstance(v, Baker):
                    raise UnsupportedSystemError(
                        "map switching for the baker map needs baker variants"
                    )
            alphas = np.array([v.alpha for v in noise.variants])
            las = np.array([v.lam_a for v in noise.variants])
            lbs = np.array([v.lam_b for v in noise.variants])
            idx = rng.choice(len(noise.variants), size=n - 1, p=np.asarray(noise.probs))
            states = _kernels.baker_switch_orbit(
                float(x0[0]), float(x0[1]), alphas, las, lbs,
                idx.astype(np.int64), n, _kernels._EMPTY, _kernels._EMPTY,
            )
        else:
            add = _additive_draws(noise, False, rng, n - 1, cols=2)
            ax = add[:, 0].copy() if add.size else _kernels._EMPTY
            ay = add[:, 1].copy() if add.size else _kernels._EMPTY
            states = _kernels.baker_orbit(
                float(x0[0]), float(x0[1]), sys.alpha, sys.lam_a, sys.lam_b, n, ax, ay
            )
        return Trajectory(states, seed)

    if isinstance(sys, LorenzEuler):
        states = _kernels.lorenz_euler_orbit(
            float(x0[0]), float(x0[1]), float(x0[2]),
            sys.sigma, sys.rho, sys.beta, sys.h, n,
        )
        return Trajectory(states, seed)

    raise UnsupportedSystemError(f"unknown system {sys!r}")


def cantor_sample(
    sys, n: int, seed: int, x0=None, stream_index: int = 0
) -> Trajectory:
    """Chaos-game sample of a Cantor IFS (or product): ``n`` post-contraction points.

    Branches are drawn with their weights, so the empirical measure of the
    output converges to the balanced measure of the IFS.
    """
    if n < 1:
        raise ValueError("sample length must be >= 1")
    rng = stream(seed, stream_index)

    if isinstance(sys, CantorIFS1D):
        x0 = 0.5 if x0 is None else float(x0)
        _require_domain(sys, x0)
        branch = rng.choice(len(sys.ratios), size=n, p=np.asarray(sys.weights))
        add = _additive_draws(sys.noise, False, rng, n)
        add = add[:, 0] if add.size else _kernels._EMPTY
        states = _kernels.chaos_game_orbit(
            x0, np.asarray(sys.ratios), np.asarray(sys.offsets),
            branch.astype(np.int64), n, add,
        )
        return Trajectory(states, seed)

    if isinstance(sys, CantorProduct2D):
        x0 = np.array([0.5, 0.5]) if x0 is None else np.asarray(x0, dtype=float)
        _require_domain(sys, x0)
        f = sys.factor
        branch = rng.choice(len(f.ratios), size=(n, 2), p=np.asarray(f.weights))
        add = _additive_draws(sys.noise, False, rng, n, cols=2)
        ax = add[:, 0].copy() if add.size else _kernels._EMPTY
        ay = add[:, 1].copy() if add.size else _kernels._EMPTY
        ratios = np.asarray(f.ratios)
        offsets = np.asarray(f.offsets)
        xs = _kernels.chaos_game_orbit(
            x0[0], ratios, offsets, branch[:, 0].astype(np.int64).copy(), n, ax
        )
        ys = _kernels.chaos_game_orbit(
            x0[1], ratios, offsets, branch[:, 1].astype(np.int64).copy(), n, ay
        )
        return Trajectory(np.column_stack([xs, ys]), seed)

    raise UnsupportedSystemError("cantor_sample needs a Cantor IFS system")
