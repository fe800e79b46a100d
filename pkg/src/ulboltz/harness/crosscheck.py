"""Fast-path versus naive-oracle comparison on a reduced copy of a config."""

import numpy as np

from .. import collision, oracle, solver
from ..grid import build_spatial_grid, build_velocity_grid
from ..kernel import CrossSectionParams
from ..norms import NormSpec, spacetime_norm, ul_sobolev_norm
from ..weights import WeightParams, mu

ORACLE_TOL = 1e-12
MILD_TOL = 1e-10


def _rel(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = np.max(np.abs(b))
    return float(np.max(np.abs(a - b)) / scale) if scale > 0 else float(np.max(np.abs(a)))


def cross_check(cfg, n_v=4, n_x=8, seed=None):
    """Relative differences between fast and naive paths, keyed by operation.

    The velocity grid is reduced to ``n_v`` nodes per axis and the spatial
    grid to ``n_x`` nodes so the oracles finish quickly; kernel, weight and
    norm parameters are taken from ``cfg``.
    """
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    vg = build_velocity_grid(cfg.v_max, n_v)
    floor = 0.5 * vg.h if cfg.r_floor == "auto" else float(cfg.r_floor)
    kp = CrossSectionParams(cfg.gamma, cfg.s, cfg.K, cfg.eps[0], floor)
    wp = WeightParams(cfg.rho, cfg.kappa)
    ws = collision.CollisionWorkspace(vg, kp, cfg.n_theta, cfg.n_phi)
    U, V = rng.random(vg.size), rng.random(vg.size)
    t = 0.5 * wp.T0
    M = mu(t, vg.points, wp)
    out = {
        "q_bilinear": _rel(collision.q_bilinear(U, V, ws), oracle.naive_q(U, V, ws)),
        "t_form": _rel(collision.t_form(U, V, M, ws), oracle.naive_t_form(U, V, M, ws)),
        "gamma_gain": _rel(collision.gamma_gain(U, V, t, ws, wp),
                           oracle.naive_gain(U, V, M, ws)),
        "loss_multiplier": _rel(collision.loss_multiplier(U, t, ws, wp),
                                oracle.naive_loss(U, M, ws)),
    }
    sg = build_spatial_grid(max(cfg.L, 2.0), n_x, 1)
    spec = NormSpec(min(cfg.k, 1), cfg.ell, 2)
    F = rng.random((sg.size, vg.size))
    out["ul_sobolev_norm"] = _rel(ul_sobolev_norm(F, sg, vg, spec),
                                  oracle.naive_ul_norm(F, sg, vg, spec))
    seq = rng.random((3, sg.size, vg.size))
    out["spacetime_norm"] = _rel(spacetime_norm(seq, 0.1, sg, vg, spec),
                                 oracle.naive_spacetime_norm(seq, 0.1, sg, vg, spec))
    ctx = solver.build_context(
        v_max=cfg.v_max, n_v=n_v, L=max(cfg.L, 2.0), n_x=n_x, active_dims=1,
        gamma=cfg.gamma, s=cfg.s, K=cfg.K, eps=cfg.eps[0], r_floor=floor,
        rho=cfg.rho, kappa=cfg.kappa, n_theta=cfg.n_theta, n_phi=cfg.n_phi,
        k=spec.k, ell=cfg.ell, fd_order=2, T=0.25 * wp.T0, n_steps=4)
    seq = rng.random((5, sg.size, vg.size))
    gain = solver.gain_sequence(seq, ctx)
    loss = solver.loss_sequence(seq, ctx)
    out["mild_update"] = _rel(solver.mild_update(seq, seq[0], ctx, gain, loss),
                              oracle.naive_mild_update(seq, seq[0], gain, loss, ctx))
    return out


def tolerance(name):
    return MILD_TOL if name == "mild_update" else ORACLE_TOL
