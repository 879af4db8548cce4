"""Extremal index: empirical cluster coefficients and closed-form expressions.

The cluster coefficient of order k is the conditional probability that a
threshold exceedance is followed by the next exceedance exactly k + 1 steps
later.  Subtracting the first K coefficients from one gives the truncated
extremal-index estimate

    theta_hat_K = 1 - sum_{k=0}^{K-1} q_hat_k,

the reciprocal of the mean cluster size when clusters decay fast.  For
one-dimensional expanding maps with piecewise-invertible observables the same
coefficients have closed forms built from the preimages of the target value:
their return orders, orbit derivatives, observable slopes, and the invariant
density.  Open systems (dynamics with a hole) weight each coefficient by the
survival factor alpha per step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from dynevt.gev import quantile
from dynevt.observables import preimage_data
from dynevt.systems import deterministic_step, map_derivative


class TooFewExceedancesError(ValueError):
    def __init__(self, count: int, needed: int = 100):
        super().__init__(f"need at least {needed} exceedances, got {count}")
        self.count = count


@dataclass(frozen=True)
class ExceedanceSeries:
    """Boolean exceedance record of a phi series over a threshold."""

    hits: np.ndarray
    u: float
    p: Optional[float]
    length: int

    @property
    def n_exceedances(self) -> int:
        return int(self.hits.sum())


def exceedances(phi, p: float = 0.999, u: Optional[float] = None) -> ExceedanceSeries:
    """Threshold a phi series at its p-quantile (or an explicit level u)."""
    s = np.asarray(phi, dtype=float)
    if u is None:
        u = quantile(s[np.isfinite(s)], p)
    else:
        p = None
    return ExceedanceSeries(hits=s > u, u=float(u), p=p, length=len(s))


@dataclass(frozen=True)
class ClusterCoefficients:
    """q_hat_0 .. q_hat_{K-1} and the truncated extremal-index estimate."""

    q: tuple
    theta: float
    theta_raw: float
    K: int
    n_exceedances: int
    u: float


def _gap_counts(hits: np.ndarray, K: int):
    """First-return gap histogram of eligible hits.

    A hit at index i is eligible when the full inspection window i+1 .. i+K
    fits inside the series; eligibility is shared by all orders so that the
    per-order counts decompose the same denominator.
    """
    idx = np.flatnonzero(hits)
    n = len(hits)
    eligible = idx[idx <= n - 1 - K]
    n_eligible = len(eligible)
    counts = np.zeros(K, dtype=np.int64)
    if n_eligible == 0:
        return counts, 0
    # gap to the next hit (the first return); the last hit has none
    pos = np.searchsorted(idx, eligible)
    has_next = pos < len(idx) - 1
    gaps = idx[np.minimum(pos + 1, len(idx) - 1)] - eligible
    gaps = gaps[has_next]
    for k in range(K):
        counts[k] = int(np.sum(gaps == k + 1))
    return counts, n_eligible


def q_hat(es: ExceedanceSeries, k: int, min_exceedances: int = 100) -> float:
    """Empirical cluster coefficient of order k."""
    if k < 0:
        raise ValueError("order k must be >= 0")
    if es.n_exceedances < min_exceedances:
        raise TooFewExceedancesError(es.n_exceedances, min_exceedances)
    counts, n_eligible = _gap_counts(es.hits, k + 1)
    if n_eligible == 0:
        raise TooFewExceedancesError(0, min_exceedances)
    return counts[k] / n_eligible


def theta_hat(es: ExceedanceSeries, K: int = 5, min_exceedances: int = 100) -> ClusterCoefficients:
    """Truncated extremal-index estimate 1 - sum of the first K coefficients.

    K = 5 is the long-series default; K = 1 gives the order-0 estimate used
    on short observational records.
    """
    if K < 1:
        raise ValueError("truncation order K must be >= 1")
    if es.n_exceedances < min_exceedances:
        raise TooFewExceedancesError(es.n_exceedances, min_exceedances)
    counts, n_eligible = _gap_counts(es.hits, K)
    if n_eligible < min_exceedances:
        raise TooFewExceedancesError(n_eligible, min_exceedances)
    q = counts / n_eligible
    raw = 1.0 - float(q.sum())
    return ClusterCoefficients(
        q=tuple(float(v) for v in q),
        theta=float(min(1.0, max(0.0, raw))),
        theta_raw=raw,
        K=K,
        n_exceedances=n_eligible,
        u=es.u,
    )


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Preimage:
    """One preimage w of the target value, with its recurrence data.

    ``return_order``: k such that the observable re-hits the target value
    after exactly k + 1 steps of the map started at w (None when the forward
    orbit of w never returns).  ``orbit_deriv`` is |(T^(k+1))'(w)| for that k.
    """

    w: float
    f_deriv: float
    density: float
    return_order: Optional[int] = None
    orbit_deriv: Optional[float] = None

    def __post_init__(self):
        if self.f_deriv <= 0 or self.density <= 0:
            raise ValueError("|f'(w)| and h(w) must be positive")
        if self.return_order is not None:
            if self.orbit_deriv is None or self.orbit_deriv <= 1.0:
                raise ValueError(
                    "periodic preimages need an expanding orbit derivative > 1"
                )


@dataclass(frozen=True)
class PreimageOrbitData:
    """The full preimage set of a target value, plus the open-system factor."""

    preimages: tuple
    alpha: float = 1.0

    def __post_init__(self):
        if not self.preimages:
            raise ValueError("preimage set must be non-empty")
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError("survival factor alpha must lie in (0, 1]")


def _qk_closed(data: PreimageOrbitData) -> dict:
    qk: dict[int, float] = {}
    pres = data.preimages
    for w in pres:
        if w.return_order is None:
            continue
        k = w.return_order
        others = sum(y.density / y.f_deriv for y in pres if y is not w)
        weight = 1.0 / (1.0 + (w.f_deriv / w.density) * others)
        qk[k] = qk.get(k, 0.0) + weight / (
            data.alpha ** (k + 1) * w.orbit_deriv
        )
    return qk


def theta_analytic(data: PreimageOrbitData):
    """Closed-form extremal index for a closed system; returns (theta, {k: q_k})."""
    if data.alpha != 1.0:
        raise ValueError("closed-system formula requires alpha = 1")
    qk = _qk_closed(data)
    return 1.0 - sum(qk.values()), qk


def theta_analytic_open(data: PreimageOrbitData) -> float:
    """Closed-form extremal index with a hole: survival alpha discounts each step."""
    qk = _qk_closed(data)
    return 1.0 - sum(qk.values())


def empirical_theta(
    sys,
    obs,
    target,
    orbit_length: int = 10**7,
    seed: int = 0,
    trials: int = 1,
    p: float = 0.999,
    K: int = 5,
    burn_in: Optional[int] = None,
    stride: Optional[int] = None,
):
    """Cluster coefficients from fresh trajectories, one result per trial."""
    from dynevt.gev import trial_phi_series

    out = []
    for t in range(trials):
        phis = trial_phi_series(sys, obs, target, orbit_length, seed, t, burn_in, stride=stride)
        out.append(theta_hat(exceedances(phis, p=p), K=K))
    return out


def preimage_orbit_data(
    sys,
    obs,
    f0: float,
    k_max: int = 8,
    alpha: float = 1.0,
    tol: float = 1e-9,
) -> PreimageOrbitData:
    """Assemble the closed-form inputs for a catalog observable on a 1-D map.

    Preimages come from the analytic inverse of the observable; return orders
    are detected by iterating the noise-free map up to ``k_max`` steps and
    checking for an exact (within ``tol``) re-hit of the target value, with
    the chain-rule orbit derivative accumulated along the way.
    """
    from dynevt.observables import series_values  # local import to avoid cycle

    base = preimage_data(obs, sys, f0)
    enriched = []
    for p in base:
        x = p.w
        deriv = 1.0
        order = None
        orbit_deriv = None
        for k in range(k_max + 1):
            deriv *= map_derivative(sys, x)
            x = deterministic_step(sys, x)
            val = series_values(obs, np.asarray([x]), sys)[0]
            if abs(val - f0) < tol:
                order = k
                orbit_deriv = deriv
                break
        enriched.append(
            Preimage(
                w=p.w,
                f_deriv=p.f_deriv,
                density=p.density,
                return_order=order,
                orbit_deriv=orbit_deriv,
            )
        )
    return PreimageOrbitData(preimages=tuple(enriched), alpha=alpha)
