import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynevt.extremal import theta_analytic
from dynevt.observables import Mean2D, QuadraticRoots, TargetSpec
from dynevt.presets import quadratic_visit_params
from dynevt.systems import Baker, LinearCircle
from dynevt.visits import (
    CompoundPoissonParams,
    PeriodicPreimage,
    compound_poisson_pmf,
    poisson_pmf,
    polya_aeppli_pmf,
    tv_distance,
    two_preimage_params,
    visit_counts,
)


def powerseries_oracle(params: CompoundPoissonParams, kmax: int) -> np.ndarray:
    """Independent oracle: coefficients of exp(S(z)) by polynomial powers.

    S(z) = sum_j c_j z^j has no constant term, so the degree <= kmax part of
    exp(S) = sum_m S^m / m! is exact once m reaches kmax.
    """
    c = np.zeros(kmax + 1)
    for j in range(1, kmax + 1):
        c[j] = params.a1 * params.b1 ** (j - 1) + params.a2 * params.b2 ** (j - 1)
    E = np.zeros(kmax + 1)
    E[0] = 1.0
    power = np.zeros(kmax + 1)
    power[0] = 1.0
    fact = 1.0
    for m in range(1, kmax + 1):
        power = np.convolve(power, c)[: kmax + 1]
        fact *= m
        E += power / fact
    return math.exp(-params.theta * params.t) * E


def rational_direct_recursion(b1, b2, mu1, mu2, t, nmax):
    """Raw-factorial derivative recursion in exact rational arithmetic.

    Returns p_n / p_0 ratios (the common factor exp(-theta*t) is irrational).
    """
    b1, b2, mu1, mu2, t = map(Fraction, (b1, b2, mu1, mu2, t))
    a1 = t * mu1 * (1 - b1) ** 2
    a2 = t * mu2 * (1 - b2) ** 2
    deriv = [Fraction(1)]  # phi^{(n)}(0) / phi(0)
    for n in range(1, nmax + 1):
        acc = Fraction(0)
        for k in range(n):
            acc += (
                math.comb(n - 1, k)
                * deriv[k]
                * math.factorial(n - k)
                * (a1 * b1 ** (n - k - 1) + a2 * b2 ** (n - k - 1))
            )
        deriv.append(acc)
    return [d / math.factorial(n) for n, d in enumerate(deriv)]


WORKED = quadratic_visit_params(30.0)


def test_two_preimage_params_worked_example():
    p = WORKED
    assert p.b1 == pytest.approx(1 / 3)
    assert p.b2 == pytest.approx(1 / 9)
    assert p.mu1 == pytest.approx(0.5) and p.mu2 == pytest.approx(0.5)
    assert p.theta == pytest.approx(7 / 9, abs=1e-15)
    assert p.a1 == pytest.approx(2 * 30 / 9, rel=1e-12)
    assert p.a2 == pytest.approx(32 * 30 / 81, rel=1e-12)


def test_equal_periods_reduce_to_single_scale():
    pre = PeriodicPreimage(period=1, orbit_deriv=4.0, density=1.0, f_deriv=1.0)
    p = two_preimage_params(pre, pre, 10.0)
    assert p.b1 == p.b2 == pytest.approx(0.25)
    assert p.theta == pytest.approx(0.75)


def test_theta_consistent_with_cluster_expansion():
    # the same preimage data drives the EI formula and the visit parameters
    from dynevt.extremal import preimage_orbit_data

    data = preimage_orbit_data(LinearCircle(m=3), QuadraticRoots(), 0.0)
    theta, _ = theta_analytic(data)
    assert WORKED.theta == pytest.approx(theta, abs=1e-14)


def test_p0_is_exp_minus_theta_t():
    pmf = compound_poisson_pmf(WORKED, 10)
    assert pmf[0] == pytest.approx(math.exp(-(7 / 9) * 30.0), rel=1e-14)


def test_recursion_matches_powerseries_oracle():
    pmf = compound_poisson_pmf(WORKED, 60)
    oracle = powerseries_oracle(WORKED, 60)
    assert np.max(np.abs(pmf[:51] - oracle[:51])) < 1e-10


def test_recursion_matches_exact_rational_direct_form():
    ratios = rational_direct_recursion(
        Fraction(1, 3), Fraction(1, 9), Fraction(1, 2), Fraction(1, 2), 30, 20
    )
    pmf = compound_poisson_pmf(WORKED, 20)
    for n in range(21):
        assert pmf[n] / pmf[0] == pytest.approx(float(ratios[n]), rel=1e-12)


def test_compound_mean_equals_t():
    pmf = compound_poisson_pmf(WORKED, 250)
    mean = float(np.arange(251) @ pmf)
    assert abs(mean - 30.0) < 1e-8
    assert abs(pmf.sum() - 1.0) < 1e-10


def test_equal_decay_reduces_to_polya_aeppli():
    p = CompoundPoissonParams(t=12.0, b1=0.2, b2=0.2, mu1=0.35, mu2=0.65)
    pmf = compound_poisson_pmf(p, 120)
    pa = np.array([polya_aeppli_pmf(0.8, 12.0, k) for k in range(121)])
    assert np.max(np.abs(pmf - pa)) < 1e-13


def test_polya_aeppli_poisson_limit():
    for k in range(101):
        assert abs(polya_aeppli_pmf(1.0, 30.0, k) - poisson_pmf(30.0, k)) < 1e-12


def test_polya_aeppli_k0_value():
    assert polya_aeppli_pmf(7 / 9, 30.0, 0) == pytest.approx(math.exp(-70 / 3), rel=1e-14)


@settings(max_examples=20, deadline=None)
@given(
    st.floats(0.05, 1.0),
    st.floats(0.5, 40.0),
)
def test_polya_aeppli_normalizes(p, t):
    kmax = 200
    total = sum(polya_aeppli_pmf(p, t, k) for k in range(kmax + 1))
    while total < 1 - 1e-10 and kmax < 3000:
        kmax *= 2
        total = sum(polya_aeppli_pmf(p, t, k) for k in range(kmax + 1))
    assert total == pytest.approx(1.0, abs=1e-10)


def test_poisson_moment_and_normalization():
    t = 17.3
    ks = np.arange(400)
    pmf = np.array([poisson_pmf(t, int(k)) for k in ks])
    assert abs(pmf.sum() - 1.0) < 1e-12
    assert abs(float(ks @ pmf) - t) < 1e-10


def test_tv_compound_vs_polya_aeppli_small_but_positive():
    pmf = compound_poisson_pmf(WORKED, 200)
    pa = np.array([polya_aeppli_pmf(WORKED.theta, 30.0, k) for k in range(201)])
    tv = tv_distance(pmf, pa)
    assert 1e-6 < tv < 0.05


def test_compound_tail_warning():
    with pytest.warns(UserWarning):
        compound_poisson_pmf(WORKED, 20)  # mean 30: k_max 20 truncates badly


def test_visit_counts_trivial_huge_radius():
    # a radius so large every point hits: the count equals the horizon
    sys = LinearCircle(m=3)
    vd = visit_counts(
        sys, QuadraticRoots(), TargetSpec(f0=(0.0,)), t=2.0,
        orbit_length=10_000, ensemble=50, seed=1, r=10.0, burn_in=10,
    )
    assert vd.measure_estimate == 1.0
    assert vd.horizon == 2
    assert np.all(vd.counts == vd.horizon)


def test_visit_counts_horizon_error():
    with pytest.raises(ValueError):
        visit_counts(
            LinearCircle(m=3), QuadraticRoots(), TargetSpec(f0=(0.0,)), t=10**4,
            orbit_length=10_000, ensemble=10, seed=1, burn_in=10,
        )


def test_visit_counts_poisson_for_nonclustered_target():
    sys = Baker(alpha=1 / 3, lam_a=0.3, lam_b=0.2)
    vd = visit_counts(
        sys, Mean2D(), TargetSpec(f0=(0.3,)), t=5.0,
        orbit_length=2 * 10**5, ensemble=2000, seed=3,
    )
    po = np.array([poisson_pmf(5.0, k) for k in range(len(vd.pmf))])
    assert tv_distance(vd.pmf, po) < 0.05


def test_params_validation():
    with pytest.raises(ValueError):
        CompoundPoissonParams(t=1.0, b1=1.2, b2=0.1, mu1=0.5, mu2=0.5)
    with pytest.raises(ValueError):
        CompoundPoissonParams(t=1.0, b1=0.5, b2=0.1, mu1=0.7, mu2=0.5)
    with pytest.raises(ValueError):
        polya_aeppli_pmf(0.0, 1.0, 2)
    with pytest.raises(ValueError):
        PeriodicPreimage(period=0, orbit_deriv=3.0, density=1.0, f_deriv=1.0)
