"""Collision operator on the velocity grid: kinematics, Q(g, f), the weighted
form T_eps, the gain/loss split of the transformed operator and moment
diagnostics.

Every operator accepts a single velocity slice of shape (n_v,) or a batch of
slices of shape (batch, n_v); batches are how the solver evaluates all
(time, x) nodes in one pass.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _engine
from ._validation import check_unit_vector
from .grid import build_sphere_quadrature
from .kernel import b_cutoff
from .weights import mu

HALF_PI = 0.5 * np.pi


def post_collision(v, v_star, sigma):
    """sigma-representation: v' = c + |v - v_*| sigma / 2, v'_* = c - ..."""
    sigma = check_unit_vector("sigma", sigma)
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    centre = 0.5 * (v + v_star)
    half = 0.5 * np.linalg.norm(v - v_star, axis=-1, keepdims=True)
    return centre + half * sigma, centre - half * sigma


def kinematic_residuals(v, v_star, sigma):
    """Relative momentum and energy defects of the post-collision pair."""
    v_p, v_sp = post_collision(v, v_star, sigma)
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    p_scale = np.linalg.norm(v, axis=-1) + np.linalg.norm(v_star, axis=-1)
    e_before = np.sum(v * v, axis=-1) + np.sum(v_star * v_star, axis=-1)
    e_after = np.sum(v_p * v_p, axis=-1) + np.sum(v_sp * v_sp, axis=-1)
    momentum = np.linalg.norm(v_p + v_sp - v - v_star, axis=-1) / p_scale
    energy = np.abs(e_after - e_before) / e_before
    return momentum, energy


@dataclass(eq=False)
class CollisionWorkspace:
    """Precomputed quadrature data for one (velocity grid, kernel) pair.

    The reference hemisphere rule is built around the z axis; the engine
    rotates it onto k = (v - v_*)/|v - v_*| for each pair with the same frame
    convention as :func:`ulboltz.grid.orthonormal_frame`. Workspaces hold
    no per-call scratch and are safe to reuse across x-slices.
    """

    vgrid: object
    kparams: object
    n_theta: int = 4
    n_phi: int = 8
    theta_min: float = 0.0
    quadrature: object = field(init=False)
    loss_kernel: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = (2.0 * self.kparams.eps,) if 2.0 * self.kparams.eps < HALF_PI else None
        self.quadrature = build_sphere_quadrature(
            np.array([0.0, 0.0, 1.0]), self.n_theta, self.n_phi, self.theta_min,
            edges=edges)
        q = self.quadrature
        self.b_weights = q.weights * b_cutoff(q.theta, self.kparams)
        self._trig = (np.cos(q.theta), np.sin(q.theta), np.cos(q.phi),
                      np.sin(q.phi))
        self.points = np.ascontiguousarray(self.vgrid.points)
        self.loss_kernel = _engine.loss_matrix(
            self.points, self.vgrid.h, float(self.kparams.gamma),
            float(self.kparams.r_floor), float(np.sum(self.b_weights)))

    def sphere_for_pair(self, v, v_star):
        """The hemisphere rule aligned with (v - v_*) for one pair."""
        rel = np.asarray(v, dtype=float) - np.asarray(v_star, dtype=float)
        axis = rel / np.linalg.norm(rel)
        edges = (2.0 * self.kparams.eps,) if 2.0 * self.kparams.eps < HALF_PI else None
        return build_sphere_quadrature(axis, self.n_theta, self.n_phi,
                                       self.theta_min, edges=edges)

    def _engine_args(self):
        vg, kp = self.vgrid, self.kparams
        return (self.points, float(vg.v_max), float(vg.h), int(vg.n_per_axis),
                float(kp.gamma), float(kp.r_floor), self.b_weights, *self._trig)


def _as_batch(arr, vgrid, name):
    arr = np.asarray(arr, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[-1] != vgrid.size:
        raise ValueError(
            f"{name} has {arr.shape[-1]} velocity entries, grid has {vgrid.size}")
    return arr, single


def _weight_batch(M, ws, batch):
    if callable(M):
        M = M(ws.points)
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = np.broadcast_to(M, (batch, ws.vgrid.size))
    if M.shape != (batch, ws.vgrid.size):
        raise ValueError(f"weight has shape {M.shape}, expected {(batch, ws.vgrid.size)}")
    return M


def _mu_batch(t, ws, wparams, batch):
    t = np.broadcast_to(np.asarray(t, dtype=float), (batch,))
    return np.stack([mu(tb, ws.points, wparams) for tb in t])


def _gain_weighted(G, H, Mw, ws):
    out = np.zeros((ws.vgrid.size, G.shape[0]))
    _engine.gain_batch(*ws._engine_args(), np.ascontiguousarray(G.T),
                       np.ascontiguousarray(H.T), np.ascontiguousarray(Mw.T), out)
    return out.T.copy()


def t_form(U, V, M, ws):
    """Weighted form: sum over v_*, sigma of B_eps M(v_*) (U'_* V' - U_* V).

    ``M`` is an array on the velocity nodes, a batch of such arrays, or a
    callable of the node coordinates. With M = mu(t) this is the transformed
    operator Gamma^t_eps(U, V), computed without dividing by mu.
    """
    U, single = _as_batch(U, ws.vgrid, "U")
    V, _ = _as_batch(V, ws.vgrid, "V")
    if U.shape != V.shape:
        raise ValueError("U and V must share a grid and batch size")
    Mw = _weight_batch(M, ws, U.shape[0])
    out = np.zeros((ws.vgrid.size, U.shape[0]))
    _engine.tform_batch(*ws._engine_args(), np.ascontiguousarray(U.T),
                        np.ascontiguousarray(V.T), np.ascontiguousarray(Mw.T), out)
    out = out.T
    return out[0] if single else out


def q_bilinear(g, f, ws):
    """Cutoff collision operator Q(g, f) on the grid (t_form with M = 1)."""
    return t_form(g, f, np.ones(ws.vgrid.size), ws)


def weighted_gain(g, h, M, ws):
    """Gain part of :func:`t_form` with an arbitrary weight M at v_*."""
    G, single = _as_batch(g, ws.vgrid, "g")
    H, _ = _as_batch(h, ws.vgrid, "h")
    out = _gain_weighted(G, H, _weight_batch(M, ws, G.shape[0]), ws)
    return out[0] if single else out


def weighted_loss(g, M, ws):
    """Loss multiplier with an arbitrary weight M at v_*."""
    G, single = _as_batch(g, ws.vgrid, "g")
    Mw = _weight_batch(M, ws, G.shape[0])
    out = (Mw * G) @ ws.loss_kernel.T
    return out[0] if single else out


def gamma_gain(g, h, t, ws, wparams):
    """Gain term Gamma^{t,+}_eps(g, h): B_eps mu(t, v_*) g(v'_*) h(v').

    ``t`` is a scalar or one time per batch row.
    """
    G, single = _as_batch(g, ws.vgrid, "g")
    H, _ = _as_batch(h, ws.vgrid, "h")
    if G.shape != H.shape:
        raise ValueError("g and h must share a grid and batch size")
    out = _gain_weighted(G, H, _mu_batch(t, ws, wparams, G.shape[0]), ws)
    return out[0] if single else out


def loss_multiplier(g, t, ws, wparams):
    """L_eps(g)(v) = sum over v_*, sigma of B_eps mu(t, v_*) g(v_*)."""
    G, single = _as_batch(g, ws.vgrid, "g")
    out = (_mu_batch(t, ws, wparams, G.shape[0]) * G) @ ws.loss_kernel.T
    return out[0] if single else out


def gamma_split(g, h, t, ws, wparams):
    """Gamma^t_eps(g, h) assembled as gain - h * L_eps(g)."""
    h_arr = np.asarray(h, dtype=float)
    return gamma_gain(g, h, t, ws, wparams) - h_arr * loss_multiplier(g, t, ws, wparams)


def moment_matrix(vgrid):
    """Rows 1, v1, v2, v3, |v|^2 times the cell volume, shape (5, n_v)."""
    p = vgrid.points
    rows = np.vstack([np.ones(vgrid.size), p.T, np.sum(p * p, axis=1)])
    return rows * vgrid.cell_volume


def conservation_residual(f, ws):
    """Discrete (mass, momentum[3], energy) moments of Q(f, f).

    These vanish only up to quadrature and interpolation error.
    """
    m = moment_matrix(ws.vgrid) @ q_bilinear(f, f, ws).T
    return m[0], m[1:4], m[4]


def conservation_project(q, vgrid, f=None):
    """Least-squares correction making the discrete collision moments vanish.

    With ``f`` given (strictly positive) the correction is weighted by f so
    it concentrates where the distribution lives. Returns
    ``(projected, correction_norm)``.
    """
    if vgrid.n_per_axis < 4:
        raise ValueError("moment projection needs at least 4 nodes per axis")
    q = np.asarray(q, dtype=float)
    if q.ndim == 1:
        projected, norm = conservation_project(q[None, :], vgrid, f)
        return projected[0], norm
    A = moment_matrix(vgrid)
    w = np.ones(vgrid.size) if f is None else np.asarray(f, dtype=float)
    if np.any(w <= 0):
        raise ValueError("projection weights must be strictly positive")
    gram = (A * w) @ A.T
    if np.linalg.cond(gram) > 1e14:
        raise ValueError("degenerate moment Gram matrix")
    coeffs = np.linalg.solve(gram, A @ q.T)
    correction = (w[:, None] * (A.T @ coeffs)).T
    return q - correction, float(np.linalg.norm(correction))


def convolution_constant(vgrid, gamma, rho, r_floor=0.0):
    """max over nodes of sum_j |v - v_j|^gamma exp(-rho |v_j|^2 / 4) h^3 / <v>^gamma.

    The diagonal is skipped as in the collision sums.
    """
    p = vgrid.points
    r = np.linalg.norm(p[:, None, :] - p[None, :, :], axis=-1)
    np.fill_diagonal(r, np.inf)
    if gamma < 0:
        kern = np.where(np.isinf(r), 0.0, np.maximum(r, r_floor) ** gamma)
    else:
        kern = np.where(np.isinf(r), 0.0, r ** gamma)
    decay = np.exp(-0.25 * rho * np.sum(p * p, axis=1))
    integral = kern @ decay * vgrid.cell_volume
    japanese = np.sqrt(1.0 + np.sum(p * p, axis=1))
    return float(np.max(integral / japanese ** gamma))
