import math

import numpy as np
import pytest

from dynevt.observables import (
    AdditiveUniform,
    Affine,
    Branch,
    Coordinate,
    Delay,
    DiscreteShift,
    DistanceToCircle,
    DistanceToLine,
    Gaussian2D,
    Identity,
    Mean2D,
    PiecewiseAffine,
    Power,
    QuadraticRoots,
    SpatialMean,
    TargetSpec,
    UnsupportedObservableError,
    VectorList,
    evaluate,
    hemmer_two_slope,
    output_dim,
    phi,
    phi_along,
    phi_values,
    preimage_data,
    resolve_target,
    series_values,
    two_branch_ramp,
)
from dynevt.rng import stream
from dynevt.systems import Hemmer, LinearCircle, LorenzEuler, orbit


def test_mean2d_value():
    assert evaluate(Mean2D(), None, np.array([0.2, 0.4])) == pytest.approx(0.3)


def test_gaussian_peak_value():
    obs = Gaussian2D(x0=0.3, y0=0.7)
    assert evaluate(obs, None, np.array([0.3, 0.7])) == pytest.approx(1 / (2 * math.pi))


def test_quadratic_roots_vanish():
    obs = QuadraticRoots()
    assert evaluate(obs, None, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert evaluate(obs, None, 0.25) == pytest.approx(0.0, abs=1e-15)


def test_power_at_zero_small_exponent():
    assert evaluate(Power(a=0.5), None, 0.0) == 0.0


def test_phi_identity_distance():
    t = TargetSpec(f0=(0.5,))
    x = 0.5 + math.exp(-3.0)
    assert phi(Identity(), LinearCircle(m=2), x, t) == pytest.approx(3.0)


def test_phi_power_scales_exponent():
    # phi(x = e^-u) = a*u for the power observable targeted at 0
    t = TargetSpec(f0=(0.0,))
    for a in (0.5, 2.0):
        for u in (2.0, 5.0):
            val = phi(Power(a=a), LinearCircle(m=2), math.exp(-u), t)
            assert val == pytest.approx(a * u, rel=1e-12)


def test_phi_exact_hit_is_infinite():
    t = TargetSpec(f0=(0.25,))
    assert phi(Identity(), LinearCircle(m=2), 0.25, t) == math.inf


def test_exceedance_set_identity():
    # {phi > u} equals {f(x) in B(f0, e^-u)} exactly
    g = stream(1, 0)
    vals = g.random(10_000)
    f0 = 0.37
    phis = phi_values(vals, f0)
    for u in (1.0, 3.0, 6.0):
        assert np.array_equal(phis > u, np.abs(vals - f0) < math.exp(-u))


def test_delay_order_one_is_base():
    traj = orbit(LorenzEuler(), np.array([1.0, 1.0, 20.0]), 2000, seed=0)
    base = series_values(Coordinate(index=0), traj.states)
    d1 = series_values(Delay(base=Coordinate(index=0), k=1), traj.states)
    assert d1.shape == (2000, 1)
    assert np.array_equal(d1[:, 0], base)
    # and the induced phi series coincides with the scalar one
    f0 = float(base[1000])
    assert np.allclose(
        phi_along(Delay(base=Coordinate(index=0), k=1), traj.states, np.array([f0])),
        phi_values(base, f0),
    )


def test_delay_rows_are_shifted_base():
    traj = orbit(LorenzEuler(), np.array([1.0, 1.0, 20.0]), 100, seed=0)
    base = series_values(Coordinate(index=0), traj.states)
    d3 = series_values(Delay(base=Coordinate(index=0), k=3), traj.states)
    assert d3.shape == (98, 3)
    assert np.array_equal(d3[:, 0], base[:-2])
    assert np.array_equal(d3[:, 2], base[2:])


def test_delay_evaluate_advances_state():
    sys = LinearCircle(m=3)
    v = evaluate(Delay(base=Identity(), k=3), sys, 0.1)
    assert np.allclose(v, [0.1, 0.3, 0.9])


def test_phi_delay_matches_materialized():
    traj = orbit(LorenzEuler(), np.array([1.0, 1.0, 20.0]), 5000, seed=0)
    obs = Delay(base=Coordinate(index=0), k=4)
    f0 = resolve_target(TargetSpec(z=tuple(traj.states[2500])), obs, LorenzEuler())
    fast = phi_along(obs, traj.states, f0)
    mat = phi_values(series_values(obs, traj.states), f0)
    assert np.allclose(fast, mat, equal_nan=True)
    cheb_fast = phi_along(obs, traj.states, f0, "chebyshev")
    cheb_mat = phi_values(series_values(obs, traj.states), f0, "chebyshev")
    assert np.allclose(cheb_fast, cheb_mat, equal_nan=True)


def test_vector_list_dims():
    obs = VectorList(parts=(Coordinate(index=0), Mean2D(), Affine(a=1, b=-1, c=0)))
    assert output_dim(obs, 2) == 3
    vals = series_values(obs, np.array([[0.2, 0.4], [0.6, 0.8]]))
    assert vals.shape == (2, 3)
    assert vals[0] == pytest.approx([0.2, 0.3, -0.2])


def test_spatial_mean_rows():
    vals = series_values(SpatialMean(), np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]))
    assert np.allclose(vals, [2.0, 5.0])


def test_distance_observables_are_geometric():
    line = DistanceToLine(a=1.0, b=-1.0, c=0.0)
    v = evaluate(line, None, np.array([0.5, 0.1]))
    assert v == pytest.approx(0.4 / math.sqrt(2))
    circ = DistanceToCircle(cx=0.0, cy=0.0, radius=0.5)
    v = evaluate(circ, None, np.array([0.3, 0.4]))
    assert v == pytest.approx(0.0, abs=1e-15)


def test_observable_noise_mean_matches_clean_value():
    obs = Affine(a=1.0, b=-1.0, c=0.0, noise=AdditiveUniform(eta=0.05))
    x = np.tile(np.array([[0.4, 0.1]]), (100_000, 1))
    g = stream(8, 0)
    vals = series_values(obs, x, rng=g)
    clean = 0.3
    assert abs(vals.mean() - clean) < 3 * 0.05 / math.sqrt(100_000) * 10
    assert vals.std() == pytest.approx(0.05 / math.sqrt(3), rel=0.05)


def test_discrete_shift_noise():
    obs = Identity(noise=DiscreteShift(shifts=(-0.1, 0.1), probs=(0.5, 0.5)))
    g = stream(8, 0)
    vals = series_values(obs, np.full(10_000, 0.5), rng=g)
    assert set(np.round(np.unique(vals), 6)) == {0.4, 0.6}


def test_noise_requires_rng():
    obs = Identity(noise=AdditiveUniform(eta=0.1))
    with pytest.raises(ValueError):
        series_values(obs, np.array([0.1, 0.2]))


def test_preimage_quadratic_roots():
    # f'(x) = 2x - 3/4 evaluated at the roots 1/2 and 1/4; h = 1 on the circle
    pres = preimage_data(QuadraticRoots(), LinearCircle(m=3), 0.0)
    ws = sorted(p.w for p in pres)
    assert ws == [pytest.approx(0.25), pytest.approx(0.5)]
    for p in pres:
        assert p.f_deriv == pytest.approx(0.25)
        assert p.density == pytest.approx(1.0)


def test_preimage_two_branch_ramp():
    a = 2 / math.pi
    obs = two_branch_ramp(a)
    f0 = evaluate(obs, None, 0.5)
    pres = preimage_data(obs, LinearCircle(m=3), f0)
    assert len(pres) == 2
    by_w = {round(p.w, 6): p for p in pres}
    assert by_w[0.5].f_deriv == pytest.approx(1 / a)
    z2 = 1 + (a - 1) / (2 * a)  # analytic inverse of the descending branch
    assert pytest.approx(z2, abs=1e-12) in [p.w for p in pres]
    other = [p for p in pres if p.w != 0.5][0]
    assert other.f_deriv == pytest.approx(1 / abs(a - 1))


def test_preimage_identity():
    pres = preimage_data(Identity(), LinearCircle(m=3), 0.3)
    assert len(pres) == 1
    assert pres[0].w == pytest.approx(0.3)
    assert pres[0].f_deriv == 1.0


def test_preimage_hemmer_two_slope():
    obs = hemmer_two_slope()
    pres = preimage_data(obs, Hemmer(), -0.5)
    ws = sorted(p.w for p in pres)
    assert ws[0] == pytest.approx(-0.5)
    assert ws[1] == pytest.approx(3 - 2 * math.sqrt(2))
    by_w = {p.w: p for p in pres}
    assert by_w[ws[0]].density == pytest.approx(0.75)
    assert by_w[ws[1]].f_deriv == pytest.approx(2.0)


def test_preimage_unsupported():
    with pytest.raises(UnsupportedObservableError):
        preimage_data(Gaussian2D(x0=0, y0=0), LinearCircle(m=3), 0.1)
    with pytest.raises(UnsupportedObservableError):
        preimage_data(Identity(), LorenzEuler(), 0.1)


def test_target_resolution_freezes_f0():
    t = TargetSpec(z=(0.2, 0.4))
    f0 = resolve_target(t, Mean2D(), None)
    assert f0 == pytest.approx(0.3)
    t2 = TargetSpec(f0=(0.25, 0.5))
    assert np.allclose(resolve_target(t2, Identity(), None), [0.25, 0.5])
    with pytest.raises(ValueError):
        TargetSpec()
    with pytest.raises(ValueError):
        TargetSpec(f0=(0.1,), metric="manhattan")


def test_piecewise_affine_requires_nonzero_slope():
    with pytest.raises(ValueError):
        Branch(0.0, 1.0, 0.0, 0.5)


def test_nonfinite_values_never_win():
    vals = np.array([0.1, np.inf, 0.3, np.nan])
    phis = phi_values(vals, 0.3)
    assert phis[1] == -math.inf
    assert phis[3] == -math.inf
    assert phis[2] == math.inf
