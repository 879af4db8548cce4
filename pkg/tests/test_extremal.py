import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynevt.extremal import (
    ClusterCoefficients,
    ExceedanceSeries,
    Preimage,
    PreimageOrbitData,
    TooFewExceedancesError,
    empirical_theta,
    exceedances,
    preimage_orbit_data,
    q_hat,
    theta_analytic,
    theta_analytic_open,
    theta_hat,
)
from dynevt.observables import (
    Identity,
    QuadraticRoots,
    TargetSpec,
    evaluate,
    hemmer_two_slope,
    two_branch_ramp,
)
from dynevt.rng import stream
from dynevt.systems import (
    AdditiveUniformMod1,
    CantorIFS1D,
    Hemmer,
    LinearCircle,
    survival_factor,
)


def _es(hits, u=1.0):
    hits = np.asarray(hits, dtype=bool)
    return ExceedanceSeries(hits=hits, u=u, p=None, length=len(hits))


def test_qhat_every_hit_followed_by_hit():
    hits = np.zeros(4000, dtype=bool)
    hits[::2] = False
    # pairs of consecutive hits: every hit either starts or ends a pair
    pattern = np.tile([True, True, False, False], 1000)
    es = _es(pattern)
    assert q_hat(es, 0) == pytest.approx(0.5)  # first of each pair returns at gap 1
    cc = theta_hat(es, K=2)
    assert cc.q[0] == pytest.approx(0.5)


def test_qhat_consecutive_run():
    # an all-ones stretch: every eligible hit but the last has gap one
    hits = np.zeros(5000, dtype=bool)
    hits[1000:2000] = True
    es = _es(hits)
    assert q_hat(es, 0) == pytest.approx(999 / 1000)


def test_isolated_hits_give_theta_one():
    hits = np.zeros(50_000, dtype=bool)
    hits[::47] = True  # spacing far beyond K
    es = _es(hits)
    for k in range(5):
        assert q_hat(es, k) == 0.0
    cc = theta_hat(es, K=5)
    assert cc.theta == 1.0
    assert cc.theta_raw == 1.0


def test_too_few_exceedances():
    hits = np.zeros(1000, dtype=bool)
    hits[10:20] = True
    with pytest.raises(TooFewExceedancesError) as ei:
        theta_hat(_es(hits), K=5)
    assert ei.value.count == 10


@settings(max_examples=60, deadline=None)
@given(st.lists(st.booleans(), min_size=300, max_size=800), st.integers(1, 6))
def test_qk_first_return_decomposition(bits, K):
    hits = np.asarray(bits, dtype=bool)
    if hits.sum() < 100:
        return
    es = _es(hits)
    try:
        cc = theta_hat(es, K=K, min_exceedances=100)
    except TooFewExceedancesError:
        return
    # orders are mutually exclusive events on the same eligible set, so the
    # coefficient sum can never exceed one
    assert sum(cc.q) <= 1.0 + 1e-12
    assert 0.0 <= cc.theta <= 1.0
    # brute-force recount
    n = len(hits)
    eligible = [i for i in range(n - K) if hits[i]]
    for k in range(K):
        cnt = sum(
            1
            for i in eligible
            if not hits[i + 1 : i + k + 1].any() and hits[i + k + 1]
        )
        assert cc.q[k] == pytest.approx(cnt / len(eligible))


def test_theta_invariant_under_monotone_transform():
    g = stream(2, 0)
    phis = g.normal(size=200_000)
    es1 = exceedances(phis, p=0.995)
    es2 = exceedances(np.exp(phis), p=0.995)  # strictly monotone transform
    cc1 = theta_hat(es1, K=5)
    cc2 = theta_hat(es2, K=5)
    assert cc1.q == cc2.q
    assert cc1.theta == cc2.theta


def test_theta_analytic_ramp_matches_closed_form():
    a = 2 / math.pi
    sys = LinearCircle(m=3)
    obs = two_branch_ramp(a)
    f0 = evaluate(obs, sys, 0.5)
    data = preimage_orbit_data(sys, obs, f0)
    theta, qk = theta_analytic(data)
    expected = 1 - 1 / (3 * (1 + (1 - a) / a))
    assert theta == pytest.approx(expected, abs=1e-12)
    assert qk == {0: pytest.approx(a / 3)}
    assert round(theta, 4) == 0.7878


def test_theta_analytic_hemmer():
    data = preimage_orbit_data(Hemmer(), hemmer_two_slope(), -0.5)
    theta, qk = theta_analytic(data)
    z1 = 3 - 2 * math.sqrt(2)
    q0 = math.sqrt(z1) / (1 + 3 / (2 * (math.sqrt(2) - 1)))
    assert theta == pytest.approx(1 - q0, abs=1e-10)
    assert round(theta, 4) == 0.9104


def test_theta_analytic_single_branch_fixed_point():
    # invertible observable, fixed-point target: theta = 1 - 1/|T'(z)|
    sys = LinearCircle(m=3)
    data = preimage_orbit_data(sys, Identity(), 0.5)  # T(1/2) = 1/2
    theta, qk = theta_analytic(data)
    assert theta == pytest.approx(1 - 1 / 3, abs=1e-12)


def test_theta_analytic_aperiodic_is_one():
    sys = LinearCircle(m=3)
    data = preimage_orbit_data(sys, Identity(), 0.317)  # aperiodic target
    theta, qk = theta_analytic(data)
    assert theta == 1.0 and qk == {}


def test_quadratic_roots_return_orders():
    sys = LinearCircle(m=3)
    data = preimage_orbit_data(sys, QuadraticRoots(), 0.0)
    by_w = {round(p.w, 6): p for p in data.preimages}
    assert by_w[0.5].return_order == 0 and by_w[0.5].orbit_deriv == pytest.approx(3.0)
    assert by_w[0.25].return_order == 1 and by_w[0.25].orbit_deriv == pytest.approx(9.0)
    theta, qk = theta_analytic(data)
    assert theta == pytest.approx(7 / 9, abs=1e-12)
    assert qk[0] == pytest.approx(1 / 6)
    assert qk[1] == pytest.approx(1 / 18)


def test_open_system_ternary_cantor():
    alpha = survival_factor(CantorIFS1D())
    for p in range(1, 6):
        pre = Preimage(w=0.1, f_deriv=1.0, density=1.0, return_order=p - 1,
                       orbit_deriv=3.0**p)
        th = theta_analytic_open(PreimageOrbitData(preimages=(pre,), alpha=alpha))
        assert th == pytest.approx(1 - 0.5**p, abs=1e-14)


def test_open_alpha_one_reduces_to_closed():
    pre = Preimage(w=0.5, f_deriv=1.0, density=1.0, return_order=0, orbit_deriv=3.0)
    data = PreimageOrbitData(preimages=(pre,), alpha=1.0)
    closed, _ = theta_analytic(data)
    assert theta_analytic_open(data) == pytest.approx(closed, abs=1e-15)


def test_noise_destroys_clustering():
    # fixed point of the unperturbed map: theta = 2/3 clean, 1 under noise
    # (the noise width must dominate the threshold ball for the cluster mass
    # to vanish at a finite quantile)
    sys = LinearCircle(m=3)
    target = TargetSpec(f0=(0.5,))
    clean = empirical_theta(sys, Identity(), target, orbit_length=2 * 10**6, seed=6)[0]
    assert clean.theta == pytest.approx(2 / 3, abs=0.03)
    noisy_sys = LinearCircle(m=3, noise=AdditiveUniformMod1(eta=0.1))
    noisy = empirical_theta(noisy_sys, Identity(), target, orbit_length=2 * 10**6, seed=6)[0]
    assert noisy.theta == pytest.approx(1.0, abs=0.02)


def test_preimage_validation():
    with pytest.raises(ValueError):
        Preimage(w=0.5, f_deriv=0.0, density=1.0)
    with pytest.raises(ValueError):
        Preimage(w=0.5, f_deriv=1.0, density=1.0, return_order=0, orbit_deriv=0.9)
    with pytest.raises(ValueError):
        PreimageOrbitData(preimages=())
    with pytest.raises(ValueError):
        theta_analytic(PreimageOrbitData(
            preimages=(Preimage(w=0.1, f_deriv=1.0, density=1.0),), alpha=0.5))
