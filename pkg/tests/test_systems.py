import numpy as np
import pytest

from dynevt.rng import stream
from dynevt.systems import (
    AdditiveUniformMod1,
    Baker,
    CantorIFS1D,
    CantorProduct2D,
    DiscreteMapSwitch,
    DomainError,
    Hemmer,
    LinearCircle,
    LorenzEuler,
    TwoBranchAffineCircle,
    cantor_sample,
    deterministic_step,
    in_domain,
    invariant_density,
    map_derivative,
    orbit,
    step,
    survival_factor,
)


def test_baker_step_lower_branch():
    sys = Baker(alpha=0.25, lam_a=0.3, lam_b=0.2)
    y = deterministic_step(sys, np.array([0.5, 0.1]))
    assert np.allclose(y, [0.15, 0.4])


def test_baker_step_upper_branch():
    sys = Baker(alpha=0.25, lam_a=0.3, lam_b=0.2)
    y = deterministic_step(sys, np.array([0.5, 0.5]))
    assert np.allclose(y, [(1 - 0.2) + 0.2 * 0.5, (0.5 - 0.25) / 0.75])


def test_linear_circle_step():
    assert deterministic_step(LinearCircle(m=3), 0.2) == pytest.approx(0.6)


def test_hemmer_fixed_point():
    z = 3 - 2 * np.sqrt(2)
    assert deterministic_step(Hemmer(), z) == pytest.approx(z, abs=1e-12)


def test_orbit_doubling_example():
    t = orbit(LinearCircle(m=2, jitter=False), 0.2, 3, seed=0)
    assert np.allclose(t.states, [0.2, 0.4, 0.8])
    assert t.length == 3


def test_orbit_matches_repeated_step():
    sys = LinearCircle(m=3)  # odd multiplier: no dither
    t = orbit(sys, 0.123, 50, seed=0)
    x = 0.123
    for k in range(1, 50):
        x = deterministic_step(sys, x)
        assert t.states[k] == pytest.approx(x, abs=1e-12)


def test_seed_determinism_bit_identical():
    sys = Baker(alpha=1 / 3, lam_a=0.3, lam_b=0.2, noise=AdditiveUniformMod1(eta=0.05))
    a = orbit(sys, np.array([0.3, 0.7]), 10_000, seed=42)
    b = orbit(sys, np.array([0.3, 0.7]), 10_000, seed=42)
    assert np.array_equal(a.states, b.states)
    c = orbit(sys, np.array([0.3, 0.7]), 10_000, seed=43)
    assert not np.array_equal(a.states, c.states)
    # a noise-free map ignores the seed entirely
    det = Baker(alpha=1 / 3, lam_a=0.3, lam_b=0.2)
    d1 = orbit(det, np.array([0.3, 0.7]), 1000, seed=1)
    d2 = orbit(det, np.array([0.3, 0.7]), 1000, seed=2)
    assert np.array_equal(d1.states, d2.states)


def test_baker_orbit_stays_in_square():
    sys = Baker(alpha=0.25, lam_a=0.3, lam_b=0.2)
    t = orbit(sys, np.array([0.9, 0.62]), 10**6, seed=7)
    assert t.states.min() >= 0.0 and t.states.max() <= 1.0


def test_even_multiplier_needs_dither():
    # exact binary arithmetic collapses the doubling map onto 0
    dead = orbit(LinearCircle(m=2, jitter=False), 0.123, 2000, seed=0)
    assert np.all(dead.states[-100:] == 0.0)
    alive = orbit(LinearCircle(m=2), 0.123, 2000, seed=0)
    assert np.count_nonzero(alive.states[-100:]) == 100


def test_uniform_invariant_measure_ks():
    t = orbit(LinearCircle(m=3), 0.2345, 10**6, seed=1)
    xs = np.sort(t.states)
    grid = (np.arange(1, len(xs) + 1)) / len(xs)
    ks = np.max(np.abs(xs - grid))
    assert ks < 0.01


def test_hemmer_invariant_density_l1():
    t = orbit(Hemmer(), 0.2345, 10**6, seed=1)
    hist, edges = np.histogram(t.states, bins=100, range=(-1, 1), density=True)
    mid = 0.5 * (edges[:-1] + edges[1:])
    h = 0.5 * (1 - mid)
    l1 = np.sum(np.abs(hist - h)) * (edges[1] - edges[0])
    assert l1 < 0.02


def test_baker_contraction_of_horizontal_extent():
    # after k steps every x coordinate lies in one of the 2^k cylinder
    # intervals, each of width at most max(lam_a, lam_b)^k
    sys = Baker(alpha=0.25, lam_a=0.3, lam_b=0.2)
    k = 3
    cylinders = [(0.0, 1.0)]
    for _ in range(k):
        nxt = []
        for lo, hi in cylinders:
            nxt.append((sys.lam_a * lo, sys.lam_a * hi))
            nxt.append(((1 - sys.lam_b) + sys.lam_b * lo, (1 - sys.lam_b) + sys.lam_b * hi))
        cylinders = nxt
    assert max(hi - lo for lo, hi in cylinders) <= max(sys.lam_a, sys.lam_b) ** k + 1e-12
    g = stream(3, 0)
    pts = g.random((500, 2))
    for _ in range(k):
        pts = np.array([deterministic_step(sys, p) for p in pts])
    for x in pts[:, 0]:
        assert any(lo - 1e-12 <= x <= hi + 1e-12 for lo, hi in cylinders)


def _ternary_cantor_member(x, k):
    for _ in range(k):
        if x <= 1 / 3 + 1e-9:
            x = 3 * x
        elif x >= 2 / 3 - 1e-9:
            x = 3 * x - 2
        else:
            return False
        x = min(max(x, 0.0), 1.0)
    return True


def test_cantor_product_orbit_near_attractor():
    # after k chaos-game steps every point sits within 3^-k of the Cantor set,
    # checked against an explicit ternary-digit membership test
    t = orbit(CantorProduct2D(), np.array([0.41, 0.77]), 10**5, seed=5)
    k = 12
    for pt in t.states[k::10_000]:
        assert _ternary_cantor_member(pt[0], k)
        assert _ternary_cantor_member(pt[1], k)


def test_cantor_sample_balanced_measure():
    n = 100_000
    t = cantor_sample(CantorIFS1D(), n, seed=9)
    frac = np.mean(t.states <= 1 / 3)
    sd = np.sqrt(0.25 / n)
    assert abs(frac - 0.5) < 3 * sd + 1e-9


def test_cantor_product_sample_quadrant_fraction():
    n = 100_000
    t = cantor_sample(CantorProduct2D(), n, seed=9)
    frac = np.mean((t.states[:, 0] <= 1 / 3) & (t.states[:, 1] <= 1 / 3))
    sd = np.sqrt(0.25 * 0.75 / n)
    assert abs(frac - 0.25) < 4 * sd


def test_cantor_sample_single_point_is_post_contraction():
    t = cantor_sample(CantorIFS1D(), 1, seed=0, x0=0.5)
    s = float(t.states[0])
    assert s in (pytest.approx(0.5 / 3), pytest.approx(0.5 / 3 + 2 / 3))


def test_lorenz_orbit_reaches_attractor():
    t = orbit(LorenzEuler(), np.array([1.0, 1.0, 20.0]), 50_000, seed=3)
    tail = t.states[10_000:]
    assert tail[:, 2].max() < 60 and tail[:, 2].min() > 0
    assert abs(tail[:, 0].mean()) < 2.0


def test_step_with_additive_noise_folds_mod_one():
    sys = LinearCircle(m=3, noise=AdditiveUniformMod1(eta=0.2))
    g = stream(0, 0)
    for x in (0.05, 0.95, 0.5):
        y = step(sys, x, g)
        assert 0.0 <= y < 1.0


def test_discrete_map_switch_orbit():
    variants = (
        TwoBranchAffineCircle(slopes=(2.0, 2.0), offsets=(0.0, 0.0)),
        TwoBranchAffineCircle(slopes=(2.0, 2.0), offsets=(0.3, 0.3)),
    )
    sys = LinearCircle(m=2, noise=DiscreteMapSwitch(variants=variants, probs=(0.5, 0.5)))
    t = orbit(sys, 0.1234, 10_000, seed=11)
    assert t.states.min() >= 0.0 and t.states.max() < 1.0
    # both maps occur: increments 2x mod 1 vs 2x + 0.3 mod 1
    inc = (t.states[1:] - 2 * t.states[:-1]) % 1.0
    near0 = np.isclose(inc, 0, atol=1e-9) | np.isclose(inc, 1, atol=1e-9)
    near3 = np.isclose(inc, 0.3, atol=1e-9)
    assert near0.mean() > 0.3 and near3.mean() > 0.3


def test_baker_switch_matches_paper_setup():
    variants = (
        Baker(alpha=0.25, lam_a=0.4, lam_b=0.4),
        Baker(alpha=1 / 3, lam_a=0.4, lam_b=0.4),
    )
    sys = Baker(alpha=0.25, lam_a=0.4, lam_b=0.4,
                noise=DiscreteMapSwitch(variants=variants, probs=(0.5, 0.5)))
    t = orbit(sys, np.array([0.2, 0.9]), 50_000, seed=2)
    assert t.states.min() >= 0.0 and t.states.max() <= 1.0


def test_domain_errors():
    with pytest.raises(DomainError):
        deterministic_step(LinearCircle(m=2), 1.5)
    with pytest.raises(DomainError):
        orbit(Hemmer(), 1.5, 10, seed=0)
    with pytest.raises(DomainError):
        deterministic_step(CantorIFS1D(), 0.5)  # the hole


def test_spec_validation():
    with pytest.raises(ValueError):
        Baker(alpha=0.6, lam_a=0.3, lam_b=0.2)
    with pytest.raises(ValueError):
        Baker(alpha=0.25, lam_a=0.8, lam_b=0.4)
    with pytest.raises(ValueError):
        CantorIFS1D(ratios=(1 / 3, 1 / 3), weights=(0.7, 0.7))
    with pytest.raises(ValueError):
        LinearCircle(m=1)
    with pytest.raises(ValueError):
        DiscreteMapSwitch(variants=(LinearCircle(m=2),), probs=(0.5,))


def test_map_derivative_and_density():
    assert map_derivative(LinearCircle(m=3), 0.2) == 3.0
    assert map_derivative(CantorIFS1D(), 0.1) == pytest.approx(3.0)
    h = invariant_density(Hemmer())
    assert h(-0.5) == pytest.approx(0.75)
    assert invariant_density(Baker(alpha=0.25, lam_a=0.3, lam_b=0.2)) is None
    assert survival_factor(CantorIFS1D()) == pytest.approx(2 / 3)


def test_philox_streams_are_independent():
    a = stream(5, 0).random(4)
    b = stream(5, 1).random(4)
    c = stream(5, 0).random(4)
    assert np.array_equal(a, c)
    assert not np.array_equal(a, b)
