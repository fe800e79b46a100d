import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ulboltz import collision, oracle
from ulboltz.grid import build_velocity_grid
from ulboltz.kernel import CrossSectionParams
from ulboltz.weights import mu


def rel(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def test_post_collision_conserves():
    rng = np.random.default_rng(0)
    v, vs = rng.normal(size=(100, 3)), rng.normal(size=(100, 3))
    s = rng.normal(size=(100, 3))
    s /= np.linalg.norm(s, axis=1, keepdims=True)
    mom, en = collision.kinematic_residuals(v, vs, s)
    assert mom.max() < 1e-14 and en.max() < 1e-14


def test_post_collision_rejects_non_unit():
    with pytest.raises(ValueError):
        collision.post_collision(np.zeros(3), np.ones(3), np.array([1.0, 1.0, 0.0]))


def test_t_form_matches_oracle(ws4, wparams, rng):
    U, V = rng.random(64), rng.random(64)
    M = mu(0.3, ws4.points, wparams)
    assert rel(collision.t_form(U, V, M, ws4), oracle.naive_t_form(U, V, M, ws4)) < 1e-12


def test_gain_and_loss_match_oracle(ws4, wparams, rng):
    g, h = rng.random(64), rng.random(64)
    M = mu(0.7, ws4.points, wparams)
    assert rel(collision.gamma_gain(g, h, 0.7, ws4, wparams), oracle.naive_gain(g, h, M, ws4)) < 1e-12
    assert rel(collision.loss_multiplier(g, 0.7, ws4, wparams), oracle.naive_loss(g, M, ws4)) < 1e-12


def test_q_matches_oracle(ws4, rng):
    g, f = rng.random(64), rng.random(64)
    assert rel(collision.q_bilinear(g, f, ws4), oracle.naive_q(g, f, ws4)) < 1e-12


def test_batch_equals_rows(ws4, wparams, rng):
    G = rng.random((3, 64))
    batch = collision.gamma_gain(G, G, np.array([0.0, 0.5, 1.0]), ws4, wparams)
    for i, t in enumerate([0.0, 0.5, 1.0]):
        assert np.allclose(batch[i], collision.gamma_gain(G[i], G[i], t, ws4, wparams),
                           rtol=1e-14, atol=0)


def test_split_identity(ws4, wparams, rng):
    g, h = rng.random(64), rng.random(64)
    direct = collision.t_form(g, h, mu(0.4, ws4.points, wparams), ws4)
    assert rel(collision.gamma_split(g, h, 0.4, ws4, wparams), direct) < 1e-10


@settings(max_examples=10, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_bilinearity(a, b):
    vg = build_velocity_grid(3.0, 4)
    ws = collision.CollisionWorkspace(vg, CrossSectionParams(-0.5, 0.25, 1.0, 0.2, 0.4), 4, 8)
    rng = np.random.default_rng(1)
    U1, U2, V = rng.random((3, 64))
    lhs = collision.q_bilinear(a * U1 + b * U2, V, ws)
    rhs = a * collision.q_bilinear(U1, V, ws) + b * collision.q_bilinear(U2, V, ws)
    assert np.allclose(lhs, rhs, atol=1e-12 * (1 + np.max(np.abs(rhs))))


def test_zero_kernel_gives_zero(rng):
    vg = build_velocity_grid(3.0, 4)
    ws = collision.CollisionWorkspace(vg, CrossSectionParams(-0.5, 0.25, 0.0, 0.2), 4, 8)
    assert np.all(collision.q_bilinear(rng.random(64), rng.random(64), ws) == 0.0)


def test_gain_nonnegative(ws4, wparams, rng):
    g = rng.random((4, 64))
    assert np.all(collision.gamma_gain(g, g, 0.0, ws4, wparams) >= 0.0)
    assert np.all(collision.loss_multiplier(g, 0.0, ws4, wparams) >= 0.0)


def test_shape_errors(ws4, rng):
    with pytest.raises(ValueError):
        collision.q_bilinear(rng.random(10), rng.random(10), ws4)
    with pytest.raises(ValueError):
        collision.t_form(rng.random((2, 64)), rng.random((3, 64)), 1.0 + np.zeros(64), ws4)


def test_callable_weight(ws4, rng):
    U, V = rng.random(64), rng.random(64)
    a = collision.t_form(U, V, lambda p: np.exp(-np.sum(p * p, axis=1)), ws4)
    b = collision.t_form(U, V, np.exp(-np.sum(ws4.points ** 2, axis=1)), ws4)
    assert np.array_equal(a, b)


def test_conservation_project_kills_moments(ws4, rng):
    f = np.exp(-0.5 * np.sum(ws4.points ** 2, axis=1))
    q = collision.q_bilinear(f, f, ws4)
    proj, norm = collision.conservation_project(q, ws4.vgrid, f)
    assert norm > 0
    assert np.max(np.abs(collision.moment_matrix(ws4.vgrid) @ proj)) < 1e-12 * norm + 1e-14


def test_conservation_project_rejects_small_grid():
    vg = build_velocity_grid(1.0, 2, min_n=2)
    with pytest.raises(ValueError):
        collision.conservation_project(np.zeros(8), vg)


def test_convolution_constant_positive_finite():
    vg = build_velocity_grid(5.0, 8)
    c = collision.convolution_constant(vg, -0.5, 1.0, 0.5 * vg.h)
    assert np.isfinite(c) and c > 0
