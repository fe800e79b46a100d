import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ulboltz import oracle
from ulboltz.grid import build_spatial_grid, build_velocity_grid
from ulboltz.norms import (NormSpec, derivative_matrix, embedding_constant, fd_weights,
                           finite_diff, multi_indices, phi1, r_equivalence_check,
                           spacetime_norm, ul_sobolev_norm, window_weights, y_norm)

SG = build_spatial_grid(4.0, 16, 1)
VG = build_velocity_grid(3.0, 6)


def rel(a, b):
    return abs(a - b) / abs(b)


def test_phi1_profile():
    assert phi1(0.5) == 1.0 and phi1(1.0) == 1.0
    assert phi1(2.0) == 0.0 and phi1(3.0) == 0.0
    assert 0.0 < phi1(1.5) < 1.0
    assert np.isclose(phi1(np.array([0.0, 1.5, 0.0])), np.exp(1 - 1 / 0.75))


def test_norm_spec_validation():
    with pytest.raises(ValueError):
        NormSpec(-1)
    with pytest.raises(ValueError):
        NormSpec(1, -1.0)
    with pytest.raises(ValueError):
        NormSpec(1, 1.0, 3)
    assert NormSpec(1, 3.0).raised().ell == 4.0


@pytest.mark.parametrize("offsets, deriv", [((-1, 0, 1), 1), ((-2, -1, 0, 1, 2), 2),
                                            ((0, 1, 2, 3), 1)])
def test_fd_weights_match_lagrange(offsets, deriv):
    assert np.allclose(fd_weights(offsets, deriv), oracle.lagrange_fd_weights(offsets, deriv),
                       atol=1e-12)


@pytest.mark.parametrize("order", [2, 4])
def test_derivative_exact_on_polynomials(order):
    n, h = 10, 0.3
    x = h * np.arange(n)
    D = derivative_matrix(n, h, 1, order, False)
    deg = order
    assert np.allclose(D @ x ** deg, deg * x ** (deg - 1), atol=1e-9)


def test_periodic_derivative_of_sine_converges():
    errs = []
    for n in (16, 32, 64):
        x = 2 * np.pi * np.arange(n) / n
        D = derivative_matrix(n, 2 * np.pi / n, 1, 2, True)
        errs.append(np.max(np.abs(D @ np.sin(x) - np.cos(x))))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_stencil_room_checked():
    with pytest.raises(ValueError):
        derivative_matrix(4, 1.0, 2, 4, False)


def test_finite_diff_matches_oracle(rng):
    F = rng.random((SG.size, VG.size))
    for alpha, beta in multi_indices(2, 1):
        a = finite_diff(F, SG, VG, alpha, beta, 2)
        b = oracle.naive_derivative(F, SG, VG, alpha, beta, 2)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_multi_indices_count():
    assert len(multi_indices(1, 1)) == 5
    assert len(multi_indices(2, 3)) == 28


def test_window_weights_mass():
    w = window_weights(SG)
    assert w.shape == (16,)
    assert np.isclose(w.max(), (SG.h ** 3) * np.sum(
        [phi1(np.array([0.0, a, b])) ** 2 for a in SG.points[:, 0] for b in SG.points[:, 0]]))
    with pytest.raises(ValueError):
        window_weights(build_spatial_grid(1.5, 8, 1))


@pytest.mark.parametrize("k, order", [(0, 2), (1, 2), (2, 4)])
def test_ul_norm_matches_oracle(k, order, rng):
    F = rng.random((SG.size, VG.size))
    spec = NormSpec(k, 2.0, order)
    assert rel(ul_sobolev_norm(F, SG, VG, spec), oracle.naive_ul_norm(F, SG, VG, spec)) < 1e-12


def test_ul_norm_three_dimensional_matches_oracle(rng):
    sg = build_spatial_grid(2.0, 4, 3)
    vg = build_velocity_grid(3.0, 4)
    F = rng.random((sg.size, vg.size))
    spec = NormSpec(0, 1.0)
    assert rel(ul_sobolev_norm(F, sg, vg, spec), oracle.naive_ul_norm(F, sg, vg, spec)) < 1e-12


def test_spacetime_norm_matches_oracle(rng):
    seq = rng.random((4, SG.size, VG.size))
    spec = NormSpec(1, 1.0)
    assert rel(spacetime_norm(seq, 0.05, SG, VG, spec),
               oracle.naive_spacetime_norm(seq, 0.05, SG, VG, spec)) < 1e-12


def test_spacetime_norm_constant_in_time(rng):
    g = rng.random((SG.size, VG.size))
    seq = np.repeat(g[None], 5, axis=0)
    spec = NormSpec(1, 1.0)
    # time integral of a constant over [0, 4 dt]
    assert np.isclose(spacetime_norm(seq, 0.1, SG, VG, spec) ** 2,
                      0.4 * ul_sobolev_norm(g, SG, VG, spec) ** 2, rtol=1e-12)
    assert spacetime_norm(seq[:1], 0.1, SG, VG, spec) == 0.0


def test_y_norm_combination(rng):
    seq = rng.random((3, SG.size, VG.size))
    spec = NormSpec(1, 2.0)
    sup = max(ul_sobolev_norm(g, SG, VG, spec) for g in seq)
    m = spacetime_norm(seq, 0.1, SG, VG, spec.raised())
    assert np.isclose(y_norm(seq, 0.1, SG, VG, spec, 0.5) ** 2, sup ** 2 + 0.5 * m ** 2)


@settings(max_examples=20, deadline=None)
@given(st.one_of(st.just(0.0), st.floats(1e-6, 10.0)))
def test_norm_homogeneity(c):
    F = np.random.default_rng(3).random((SG.size, VG.size))
    spec = NormSpec(1, 1.0)
    assert np.isclose(ul_sobolev_norm(c * F, SG, VG, spec), c * ul_sobolev_norm(F, SG, VG, spec),
                      rtol=1e-12, atol=1e-300)


def test_norm_translation_invariant(rng):
    F = rng.random((SG.size, VG.size))
    spec = NormSpec(1, 1.0)
    assert np.isclose(ul_sobolev_norm(np.roll(F, 5, axis=0), SG, VG, spec),
                      ul_sobolev_norm(F, SG, VG, spec), rtol=1e-12)


def test_norm_zero_field():
    assert ul_sobolev_norm(np.zeros((SG.size, VG.size)), SG, VG, NormSpec()) == 0.0


def test_r_equivalence(rng):
    sg = build_spatial_grid(6.0, 24, 1)
    F = rng.random((sg.size, VG.size))
    ok, c = r_equivalence_check(F, sg, VG, NormSpec(1, 1.0), 2)
    assert ok and 0 < c <= 1.0
    with pytest.raises(ValueError):
        r_equivalence_check(F, sg, VG, NormSpec(), 4)


def test_embedding_constant_finite():
    sg = build_spatial_grid(4.0, 16, 1)
    vg = build_velocity_grid(3.0, 8)
    F = np.exp(-np.sum(vg.points ** 2, axis=1))[None, :] * np.ones((sg.size, 1))
    c = embedding_constant(F, sg, vg)
    assert np.isfinite(c) and c > 0
