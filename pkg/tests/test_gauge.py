import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from berglab.domain import unit_ball
from berglab.gauge import (
    GaugeError,
    cap_contains,
    cap_measure,
    comparability_scale,
    exponent_regression,
    fr_integral,
    gauge_eval,
    normal_gauge,
    shell_index_of,
    shell_volume,
    taylor_remainder,
)
from berglab.metric import SCAN_BUDGET, distance, straight_chord_upper
from berglab.domain import normal_direction


def test_gauge_coincident(disc):
    gv = gauge_eval(disc, np.array([0.4 + 0j]), np.array([0.4 + 0j]))
    assert gv.X == pytest.approx(-disc.r_val(np.array([0.4 + 0j])))
    assert gv.rho == 0.0
    assert gv.F == pytest.approx(2 * abs(disc.r_val(np.array([0.4 + 0j]))))


def test_gauge_disc_hand_arithmetic(disc):
    gv = gauge_eval(disc, np.array([0.9 + 0j]), np.array([0.8 + 0j]))
    assert gv.rho == pytest.approx(0.1)


def test_gauge_ball_tangential(ball2):
    gv = gauge_eval(ball2, np.array([0.9, 0], complex), np.array([0.9, 0.1], complex))
    assert gv.rho == pytest.approx(0.01)


@given(
    st.floats(-0.6, 0.6), st.floats(-0.6, 0.6), st.floats(-0.6, 0.6), st.floats(-0.6, 0.6)
)
@settings(max_examples=40, deadline=None)
def test_taylor_remainder_is_exact_on_ball(zx, zy, wx, wy):
    dom = unit_ball(1)
    z = np.array([zx + 1j * zy])
    w = np.array([[wx + 1j * wy]])
    # quadratic defining function: X(z, w) = 1 - <z, w> exactly
    assert taylor_remainder(dom, z, w)[0] == pytest.approx(1 - z[0] * np.conj(w[0, 0]), abs=1e-12)


@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
@settings(max_examples=30, deadline=None)
def test_scale_definition(zx, zy, wx, wy):
    dom = unit_ball(1)
    z = np.array([zx + 1j * zy])
    w = np.array([[wx + 1j * wy]])
    F = comparability_scale(dom, z, w)[0]
    rho = normal_gauge(dom, z, w)[0]
    assert F == pytest.approx(abs(dom.r_val(z)) + abs(dom.r_val(w[0])) + rho)


def test_comparability_band_near_diagonal(disc):
    # |X| stays within a fixed band of F on near-diagonal samples
    rng = np.random.default_rng(0)
    ratios = []
    for _ in range(200):
        t = 10 ** rng.uniform(-4, -1)
        z = np.array([np.sqrt(1 - t) * np.exp(1j * rng.uniform(0, 0.1))])
        w = z + (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * 0.05 * np.sqrt(t)
        if disc.r_val(w) >= 0:
            continue
        X = abs(taylor_remainder(disc, z, w.reshape(1, -1))[0])
        F = comparability_scale(disc, z, w.reshape(1, -1))[0]
        ratios.append(X / F)
    ratios = np.asarray(ratios)
    assert ratios.max() / ratios.min() <= 40.0
    assert np.all(ratios > 0.01)


def test_symmetry_defect_bounded(disc):
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(200):
        z = np.array([rng.uniform(0, 0.95) * np.exp(1j * rng.uniform(0, 2 * np.pi))])
        w = np.array([[rng.uniform(0, 0.95) * np.exp(1j * rng.uniform(0, 2 * np.pi))]])
        F1 = comparability_scale(disc, z, w)[0]
        F2 = comparability_scale(disc, w[0], z.reshape(1, -1))[0]
        worst = max(worst, F2 / F1)
    assert worst <= 3.5


# -- integral estimators ---------------------------------------------------------


def test_fr_rejects_bad_kappa(disc):
    with pytest.raises(GaugeError):
        fr_integral(disc, np.array([0.5 + 0j]), kappa=-1.0, a=1.0)


def test_fr_bounded_negative_exponent(disc):
    ests = []
    for i, k in enumerate((4, 6, 8)):
        z = np.array([np.sqrt(1 - 2.0**-k) + 0j])
        ests.append(fr_integral(disc, z, kappa=0.0, a=-0.5, samples=40000, seed=i)["estimate"])
    assert max(ests) <= 3.0  # stays bounded as z approaches the boundary


def test_fr_growth_exponent_small(disc):
    depths = [2.0**-k for k in range(6, 10)]
    ests = [
        fr_integral(disc, np.array([np.sqrt(1 - t) + 0j]), 0.0, 1.0, samples=50000, seed=i)["estimate"]
        for i, t in enumerate(depths)
    ]
    fit = exponent_regression(depths, ests)
    assert fit["slope"] == pytest.approx(-1.0, abs=0.15)


def test_fr_tail_decreases(disc):
    z = np.array([np.sqrt(1 - 2.0**-6) + 0j])
    vals = [
        fr_integral(disc, z, 0.0, 1.0, mode="tail", tail_radius=R, samples=30000, seed=3)["estimate"]
        for R in (4.0, 7.0, 10.0)
    ]
    assert vals[0] > 0
    assert vals[0] > vals[1] > vals[2] * 0.999


def test_fr_weight_mode_bounded(disc):
    vals = []
    for i, k in enumerate((4, 6, 8)):
        z = np.array([np.sqrt(1 - 2.0**-k) + 0j])
        vals.append(fr_integral(disc, z, 0.0, 1.0, mode="weight", samples=25000, seed=i)["estimate"])
    assert max(vals) <= 5.0


# -- caps and shells ----------------------------------------------------------------


def test_cap_contains_center(disc):
    zeta = np.array([1.0 + 0j])
    assert cap_contains(disc, zeta, 1e-6, zeta.reshape(1, -1))[0]


def test_cap_contains_hand_arithmetic(disc):
    zeta = np.array([1.0 + 0j])
    xi = np.array([[np.exp(0.01j)]])
    g = float(normal_gauge(disc, zeta, xi)[0])
    assert cap_contains(disc, zeta, 0.02, xi)[0]
    assert not cap_contains(disc, zeta, 0.005, xi)[0]
    assert g == pytest.approx(abs(1 - np.exp(0.01j)) ** 2 + abs(1 - np.exp(0.01j)), rel=1e-9)


def test_cap_whole_surface(disc):
    zeta = np.array([1.0 + 0j])
    res = cap_measure(disc, zeta, t=100.0, samples=4000, seed=1)
    assert res["sigma"] == pytest.approx(res["surface_area"])
    assert res["surface_area"] == pytest.approx(2 * np.pi, rel=0.05)


def test_cap_arc_linear_in_t(disc):
    zeta = np.array([1.0 + 0j])
    ts = [0.1 * 2.0**-k for k in range(0, 4)]
    sig = [cap_measure(disc, zeta, t, samples=20000, seed=2)["sigma"] for t in ts]
    fit = exponent_regression(ts, sig)
    assert fit["slope"] == pytest.approx(1.0, abs=0.15)
    # first-order arc length is 2t
    assert sig[-1] == pytest.approx(2 * ts[-1], rel=0.2)


def test_cap_exponent_ball(ball2):
    zeta = np.array([1.0, 0], complex)
    ts = [0.4 * 2.0**-k for k in range(0, 4)]
    sig = [cap_measure(ball2, zeta, t, samples=30000, seed=3)["sigma"] for t in ts]
    fit = exponent_regression(ts, sig)
    assert fit["slope"] == pytest.approx(2.0, abs=0.15)


def test_shell_volume_scan_bounded(disc):
    z = np.array([0.9 + 0j])
    ratios = [shell_volume(disc, z, k=0, j=j, samples=20000, seed=4)["bound_ratio"] for j in range(5)]
    assert max(ratios) <= 2.0


def test_shell_volume_empty(disc):
    z = np.array([0.9 + 0j])
    res = shell_volume(disc, z, k=8, j=0, samples=1000, seed=4)
    assert res["volume"] == 0.0


def test_shell_volume_positive(disc):
    z = np.array([0.9 + 0j])
    res = shell_volume(disc, z, k=0, j=0, samples=20000, seed=4)
    assert 0 < res["volume"] < np.pi


def test_shell_index(disc):
    z = np.array([0.9 + 0j])
    w = np.array([[0.8 + 0j]])
    k, j = shell_index_of(disc, z, w)
    assert k[0] == 1  # depth ratio 0.36/0.19 in (1, 2]
    assert j[0] >= 0


# -- normal ray checks -------------------------------------------------------------


def test_normal_ray_bounded_distance(disc):
    # marching inward by the boundary gap costs a bounded distance
    worst = 0.0
    for t in (0.05, 0.01, 0.002):
        z = np.array([np.sqrt(1 - t) + 0j])
        u = normal_direction(disc, z)
        w = z - t * u  # s in [r(z), 0] scale
        d = distance(disc, z, w, SCAN_BUDGET)["d_upper"]
        worst = max(worst, d)
    assert worst <= 1.5


def test_normal_ray_depth_growth(disc):
    # -r(z + t u_z) + r(z) >= c|t| for small inward t
    for t in (0.05, 0.01):
        z = np.array([np.sqrt(1 - t) + 0j])
        u = normal_direction(disc, z)
        for s in (-0.01, -0.003):
            gain = -disc.r_val(z + s * u) + disc.r_val(z)
            assert gain >= 0.5 * abs(s)
