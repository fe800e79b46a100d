import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ulboltz.grid import (DistributionField, G_REP, build_spatial_grid,
                          build_sphere_quadrature, build_velocity_grid, interpolate_v,
                          orthonormal_frame, shift_x)

Z = np.array([0.0, 0.0, 1.0])


def test_velocity_grid_relaxed_floor_nodes():
    vg = build_velocity_grid(1.0, 2, min_n=2)
    assert np.array_equal(vg.nodes_1d, [-0.5, 0.5])


def test_velocity_grid_spacing():
    assert build_velocity_grid(6.0, 8).h == 1.5


def test_velocity_grid_rejects_small_n():
    with pytest.raises(ValueError):
        build_velocity_grid(6.0, 3)
    with pytest.raises(ValueError):
        build_velocity_grid(-1.0, 8)


def test_velocity_points_order_and_index():
    vg = build_velocity_grid(2.0, 4)
    p = vg.points
    assert p.shape == (64, 3)
    assert np.array_equal(p[vg.flat_index(1, 2, 3)], vg.nodes_1d[[1, 2, 3]])


def test_spatial_grid_wrap():
    sg = build_spatial_grid(4.0, 8, 1)
    assert sg.h == 1.0
    assert np.array_equal(sg.wrap(np.array([-1, 8, 9])), [7, 0, 1])
    with pytest.raises(ValueError):
        build_spatial_grid(4.0, 8, 2)


def test_hemisphere_area():
    q = build_sphere_quadrature(Z, 4, 8)
    assert abs(q.weights.sum() - 2 * np.pi) < 1e-10
    assert np.all(q.weights > 0)
    assert np.all((q.theta > 0) & (q.theta <= np.pi / 2))


def test_cos_theta_moment():
    q = build_sphere_quadrature(Z, 4, 8)
    assert abs(np.sum(q.weights * np.cos(q.theta)) - np.pi) < 1e-12


def test_sphere_rejects_bad_input():
    with pytest.raises(ValueError):
        build_sphere_quadrature(Z, 1, 8)
    with pytest.raises(ValueError):
        build_sphere_quadrature(np.array([0.0, 0.0, 2.0]), 4, 8)


def test_sphere_polynomial_exactness_per_subinterval():
    # 3 nodes per subinterval: exact for degree <= 5 in cos(theta)
    q = build_sphere_quadrature(Z, 6, 4, edges=(0.4,))
    u = np.cos(q.theta)
    for deg in range(6):
        assert abs(np.sum(q.weights * u ** deg) - 2 * np.pi / (deg + 1)) < 1e-12


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_sphere_axis_alignment(a, b, c):
    k = np.array([a, b, c])
    if np.linalg.norm(k) < 1e-3:
        return
    k /= np.linalg.norm(k)
    q = build_sphere_quadrature(k, 4, 8)
    assert np.allclose(np.linalg.norm(q.sigma, axis=1), 1.0, atol=1e-12)
    assert np.allclose(q.sigma @ k, np.cos(q.theta), atol=1e-12)
    e1, e2 = orthonormal_frame(k)
    assert abs(np.dot(np.cross(e1, e2), k) - 1.0) < 1e-12


def test_interpolate_nodes_and_outside(rng):
    vg = build_velocity_grid(2.0, 4)
    f = rng.random(vg.size)
    assert np.allclose(interpolate_v(f, vg, vg.points), f, rtol=0, atol=1e-15)
    assert interpolate_v(f, vg, np.array([2.5, 0.0, 0.0])) == 0.0


def test_interpolate_affine_exact():
    vg = build_velocity_grid(2.0, 6)
    coef = np.array([0.3, -1.2, 0.7])
    f = 2.0 + vg.points @ coef
    w = np.array([[0.1, -0.37, 0.55], [0.0, 0.0, 0.0]])
    assert np.allclose(interpolate_v(f, vg, w), 2.0 + w @ coef, atol=1e-13)


@settings(max_examples=50)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_interpolate_partition_and_positivity(w):
    vg = build_velocity_grid(2.0, 4)
    ones = np.ones(vg.size)
    val = interpolate_v(ones, vg, np.array(w))
    assert abs(val - 1.0) < 1e-14
    assert interpolate_v(np.abs(np.sin(np.arange(vg.size))), vg, np.array(w)) >= 0.0


def test_interpolate_linear_in_values(rng):
    vg = build_velocity_grid(2.0, 4)
    a, b = rng.random(vg.size), rng.random(vg.size)
    pts = rng.uniform(-2, 2, size=(20, 3))
    lhs = interpolate_v(3 * a + b, vg, pts)
    assert np.allclose(lhs, 3 * interpolate_v(a, vg, pts) + interpolate_v(b, vg, pts),
                       atol=1e-14)


def test_shift_identity_and_period(rng):
    sg = build_spatial_grid(2.0, 8, 1)
    f = rng.random((8, 5))
    assert np.array_equal(shift_x(f, sg, np.zeros(1)), f)
    assert np.allclose(shift_x(f, sg, np.array([4.0])), f, atol=1e-15)


def test_shift_integer_cells_is_permutation(rng):
    sg = build_spatial_grid(2.0, 8, 1)
    f = rng.random((8, 3))
    out = shift_x(f, sg, np.array([3 * sg.h]))
    assert np.array_equal(out, np.roll(f, -3, axis=0))


def test_shift_half_cell_averages_ramp():
    sg = build_spatial_grid(2.0, 8, 1)
    ramp = np.arange(8.0)[:, None]
    out = shift_x(ramp, sg, np.array([0.5 * sg.h]))
    expected = 0.5 * (ramp + np.roll(ramp, -1, axis=0))
    assert np.allclose(out, expected, atol=1e-14)


def test_shift_per_velocity_displacement(rng):
    sg = build_spatial_grid(2.0, 8, 1)
    f = rng.random((8, 2))
    d = np.array([[sg.h, 0, 0], [-2 * sg.h, 0, 0]])
    out = shift_x(f, sg, d)
    assert np.array_equal(out[:, 0], np.roll(f[:, 0], -1))
    assert np.array_equal(out[:, 1], np.roll(f[:, 1], 2))


def test_shift_three_dimensional(rng):
    sg = build_spatial_grid(2.0, 4, 3)
    f = rng.random((64, 2))
    out = shift_x(f, sg, np.array([sg.h, 0.0, -sg.h]))
    ref = np.roll(np.roll(f.reshape(4, 4, 4, 2), -1, axis=0), 1, axis=2).reshape(64, 2)
    assert np.array_equal(out, ref)


def test_distribution_field_validation():
    sg, vg = build_spatial_grid(2.0, 4, 1), build_velocity_grid(2.0, 4)
    with pytest.raises(ValueError):
        DistributionField(0.0, G_REP, np.zeros((3, 64)), sg, vg)
    with pytest.raises(ValueError):
        DistributionField(0.0, G_REP, np.full((4, 64), np.nan), sg, vg)
    with pytest.raises(ValueError):
        DistributionField(0.0, "h", np.zeros((4, 64)), sg, vg)
