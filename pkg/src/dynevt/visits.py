"""Number-of-visits statistics and their reference laws.

``visit_counts`` measures, over an ensemble of trajectories, how often the
observable lands in a small ball around the target value within the horizon
floor(t / measure(ball)).  Without clustering the counts are Poisson(t); a
periodic target produces geometric clusters and the Polya-Aeppli law; a target
value with two periodic preimages of different periods produces a compound
Poisson law that is close to, but provably different from, Polya-Aeppli.

That two-scale law is evaluated through its generating function

    phi(z) = exp(-theta*t) * exp(a1*z / (1 - b1*z)) * exp(a2*z / (1 - b2*z)),

with a_i = t*mu_i*(1-b_i)^2 and theta = 1 - b1*mu1 - b2*mu2, whose
probabilities follow the factorial-normalized recursion

    p_0 = exp(-theta*t),
    p_n = (1/n) * sum_{k<n} p_k * (n-k) * c_{n-k},   c_j = a1*b1^(j-1) + a2*b2^(j-1)

(the derivative recursion of phi at 0, divided through by n! so it stays in
linear space far past the factorial-overflow point).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from dynevt.gev import quantile
from dynevt.observables import TargetSpec, phi_along, resolve_target
from dynevt.rng import stream
from dynevt.systems import default_burn_in, orbit, random_initial


@dataclass(frozen=True)
class CompoundPoissonParams:
    """Two-scale compound Poisson parameters (time t, cluster decays b_i, weights mu_i)."""

    t: float
    b1: float
    b2: float
    mu1: float
    mu2: float

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError("time parameter t must be positive")
        for b in (self.b1, self.b2):
            if not (0.0 <= b < 1.0):
                raise ValueError("cluster decay rates b_i must lie in [0, 1)")
        if self.mu1 < 0 or self.mu2 < 0 or abs(self.mu1 + self.mu2 - 1.0) > 1e-9:
            raise ValueError("weights mu_i must be non-negative and sum to 1")

    @property
    def a1(self) -> float:
        return self.t * self.mu1 * (1.0 - self.b1) ** 2

    @property
    def a2(self) -> float:
        return self.t * self.mu2 * (1.0 - self.b2) ** 2

    @property
    def theta(self) -> float:
        return 1.0 - self.b1 * self.mu1 - self.b2 * self.mu2


def compound_poisson_pmf(params: CompoundPoissonParams, k_max: int) -> np.ndarray:
    """Probabilities p_0 .. p_{k_max} of the two-scale compound Poisson law.

    Warns when the truncated tail still carries more than 1e-6 of mass.
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    a1, a2, b1, b2 = params.a1, params.a2, params.b1, params.b2
    p = np.zeros(k_max + 1)
    p[0] = math.exp(-params.theta * params.t)
    c = np.zeros(k_max + 1)
    for j in range(1, k_max + 1):
        c[j] = a1 * b1 ** (j - 1) + a2 * b2 ** (j - 1)
    for n in range(1, k_max + 1):
        acc = 0.0
        for k in range(n):
            acc += p[k] * (n - k) * c[n - k]
        p[n] = acc / n
    tail = 1.0 - p.sum()
    if tail > 1e-6:
        warnings.warn(
            f"compound Poisson pmf truncated at {k_max} leaves tail mass {tail:.3e}",
            stacklevel=2,
        )
    return p


def poisson_pmf(t: float, k: int) -> float:
    """Poisson probability t^k e^-t / k!, evaluated in log space."""
    if t < 0 or k < 0:
        raise ValueError("need t >= 0 and k >= 0")
    if t == 0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(t) - t - math.lgamma(k + 1))


def polya_aeppli_pmf(p: float, t: float, k: int) -> float:
    """Polya-Aeppli probability of k visits: Poisson(p*t) clusters of geometric size.

    ``p`` is the extremal index (reciprocal mean cluster size); cluster sizes
    are geometric with ratio 1 - p.  p = 1 collapses to the Poisson law.
    """
    if not (0.0 < p <= 1.0):
        raise ValueError("extremal index p must lie in (0, 1]")
    if t <= 0 or k < 0:
        raise ValueError("need t > 0 and k >= 0")
    if k == 0:
        return math.exp(-p * t)
    if p == 1.0:
        return poisson_pmf(t, k)
    # sum over j = number of clusters composing the k visits
    log_pt = math.log(p * t)
    log_p = math.log(p)
    log_1mp = math.log(1.0 - p)
    acc = 0.0
    for j in range(1, k + 1):
        logterm = (
            j * log_pt
            - math.lgamma(j + 1)
            + _log_binom(k - 1, j - 1)
            + j * log_p
            + (k - j) * log_1mp
        )
        acc += math.exp(logterm)
    return math.exp(-p * t) * acc


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


@dataclass(frozen=True)
class PeriodicPreimage:
    """A periodic preimage of the target value: period p, |(T^p)'(w)|, h(w), |f'(w)|."""

    period: int
    orbit_deriv: float
    density: float
    f_deriv: float

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("period must be >= 1")
        if self.orbit_deriv <= 1.0:
            raise ValueError("expanding orbit derivative must exceed 1")
        if self.density <= 0 or self.f_deriv <= 0:
            raise ValueError("h(w) and |f'(w)| must be positive")


def two_preimage_params(
    pre1: PeriodicPreimage, pre2: PeriodicPreimage, t: float
) -> CompoundPoissonParams:
    """Compound Poisson parameters when the target value has two periodic preimages.

    b_i is the inverse orbit derivative over one period; mu_i is the relative
    mass the image measure puts on each preimage's branch, set by the density
    and the observable slope there.
    """
    b1 = 1.0 / pre1.orbit_deriv
    b2 = 1.0 / pre2.orbit_deriv
    mu1 = 1.0 / (1.0 + (pre2.density * pre1.f_deriv) / (pre1.density * pre2.f_deriv))
    mu2 = 1.0 / (1.0 + (pre1.density * pre2.f_deriv) / (pre2.density * pre1.f_deriv))
    return CompoundPoissonParams(t=t, b1=b1, b2=b2, mu1=mu1, mu2=mu2)


@dataclass(frozen=True)
class VisitDistribution:
    """Empirical distribution of visit counts over an ensemble."""

    counts: np.ndarray
    pmf: np.ndarray
    t: float
    r: float
    u: float
    measure_estimate: float
    measure_estimate_half: float
    horizon: int
    ensemble: int

    def tv_distance(self, reference_pmf) -> float:
        """Total-variation distance to a reference pmf (tails included)."""
        return tv_distance(self.pmf, reference_pmf)


def tv_distance(pmf_a, pmf_b) -> float:
    a = np.asarray(pmf_a, dtype=float)
    b = np.asarray(pmf_b, dtype=float)
    m = max(len(a), len(b))
    aa = np.zeros(m)
    bb = np.zeros(m)
    aa[: len(a)] = a
    bb[: len(b)] = b
    # unassigned tail mass counts as disagreement
    return 0.5 * (np.abs(aa - bb).sum() + abs((1 - aa.sum()) - (1 - bb.sum())))


def visit_counts(
    sys,
    obs,
    target: TargetSpec,
    t: float,
    orbit_length: int = 10**6,
    ensemble: int = 10**4,
    seed: int = 0,
    r: Optional[float] = None,
    p_quantile: float = 0.995,
    pilot_length: Optional[int] = None,
    burn_in: Optional[int] = None,
) -> VisitDistribution:
    """Empirical visit-count distribution of the observable near the target.

    A pilot trajectory fixes the ball radius (r = e^-u at the phi quantile
    ``p_quantile`` unless ``r`` is given) and estimates the image measure of
    the ball as the hit frequency; each ensemble member then counts hits over
    the horizon floor(t / measure).  The measure estimate is re-done on half
    the pilot so radius sensitivity is visible in the result.
    """
    if t <= 0:
        raise ValueError("time parameter t must be positive")
    f0 = resolve_target(target, obs, sys)
    burn = default_burn_in(sys) if burn_in is None else burn_in
    pilot_n = orbit_length if pilot_length is None else pilot_length

    g = stream(seed, 2**22)
    x0 = random_initial(sys, g)
    pilot = orbit(sys, x0, pilot_n + burn, seed, stream_index=2**22)
    phis = phi_along(obs, pilot.states[burn:], f0, target.metric, sys=sys)
    if r is None:
        finite = phis[np.isfinite(phis)]
        u = quantile(finite, p_quantile)
        r = math.exp(-u)
    else:
        u = -math.log(r)
    measure = float(np.mean(phis > u))
    half = len(phis) // 2
    measure_half = float(np.mean(phis[:half] > u))
    if measure <= 0:
        raise ValueError("pilot orbit never hit the target ball; enlarge r or the pilot")

    horizon = int(math.floor(t / measure))
    if horizon < 1:
        raise ValueError("time horizon shorter than one step; increase t")
    if horizon > orbit_length:
        raise ValueError(
            f"horizon {horizon} exceeds orbit length {orbit_length}; "
            "enlarge the orbit or reduce t"
        )

    counts = np.zeros(ensemble, dtype=np.int64)
    for e in range(ensemble):
        ge = stream(seed, e)
        xe = random_initial(sys, ge)
        traj = orbit(sys, xe, horizon + burn, seed, stream_index=e)
        pe = phi_along(obs, traj.states[burn : burn + horizon], f0, target.metric, sys=sys)
        counts[e] = int(np.sum(pe > u))

    kmax = int(counts.max())
    pmf = np.bincount(counts, minlength=kmax + 1).astype(float) / ensemble
    return VisitDistribution(
        counts=counts,
        pmf=pmf,
        t=t,
        r=float(r),
        u=float(u),
        measure_estimate=measure,
        measure_estimate_half=measure_half,
        horizon=horizon,
        ensemble=ensemble,
    )
