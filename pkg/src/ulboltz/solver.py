"""Positivity-preserving Picard iteration for the cutoff equation in g-form,

    g_t + v . grad_x g + kappa <v>^2 g = Gamma^t_eps(g, g),

solved through its mild (Duhamel) form along the characteristics x - (t - s) v.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from . import collision
from ._validation import check_field_values, check_positive
from .grid import build_spatial_grid, build_velocity_grid, shift_x
from .kernel import CrossSectionParams
from .norms import NormSpec, ul_sobolev_norm, y_norm
from .weights import WeightParams, japanese_sq

logger = logging.getLogger(__name__)

# Calibrated by harness.calibration.contraction_constants on the default
# desk configuration (see README).
DEFAULT_C1 = 3.07e-5
DEFAULT_C2 = 3.07e-5


class NonFiniteIterateError(FloatingPointError):
    """An iterate contains NaN or inf; carries the offending iteration."""

    def __init__(self, iteration, count):
        super().__init__(f"iterate {iteration} has {count} non-finite entries")
        self.iteration = iteration
        self.count = count


def select_T(C1, C2, D0, kappa, T0=None):
    """Time horizon making the Picard map a contraction.

    Returns ``(K0, T)`` with K0 = (2 D0 + (1 + kappa)^2) / kappa and
    T = min(log 2 / (C1 K0), kappa / (16 C2 D0^2)), capped by T0 and by the
    final requirement 16 C2 D0^2 T / kappa <= 1/4.
    """
    for name, val in (("C1", C1), ("C2", C2), ("D0", D0), ("kappa", kappa)):
        check_positive(name, val)
    K0 = (2.0 * D0 + (1.0 + kappa) ** 2) / kappa
    T = min(math.log(2.0) / (C1 * K0), kappa / (16.0 * C2 * D0 ** 2))
    if T0 is not None:
        T = min(T, T0)
    T = min(T, 0.25 * kappa / (16.0 * C2 * D0 ** 2))
    return K0, T


def t_star(C_kappa, g0_norm):
    """(1 / C_kappa) log(1 + 3 / (1 + 4 ||g0||^2)), the uniform-bound horizon."""
    check_positive("C_kappa", C_kappa)
    check_positive("g0_norm", g0_norm, strict=False)
    return math.log1p(3.0 / (1.0 + 4.0 * g0_norm ** 2)) / C_kappa


@dataclass(eq=False)
class SolverContext:
    """Everything the iteration needs besides the iterates themselves."""

    sgrid: object
    vgrid: object
    kparams: CrossSectionParams
    wparams: WeightParams
    workspace: collision.CollisionWorkspace
    spec: NormSpec
    T: float
    n_steps: int
    times: np.ndarray = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.T <= self.wparams.T0 * (1.0 + 1e-12):
            raise ValueError(f"T={self.T!r} must lie in (0, T0={self.wparams.T0!r}]")
        self.T = min(self.T, self.wparams.T0)
        self.times = np.arange(self.n_steps + 1) * (self.T / self.n_steps)
        self.times[-1] = self.T
        self.damping = self.wparams.kappa * japanese_sq(self.vgrid.points)

    @property
    def dt(self):
        return self.T / self.n_steps

    def characteristic_shift(self, values, lag):
        """values(x - lag * dt * v) for every velocity node."""
        if lag == 0:
            return values
        return shift_x(values, self.sgrid, -lag * self.dt * self.vgrid.points)


def _flatten(seq):
    n_t, n_x, n_v = seq.shape
    return seq.reshape(n_t * n_x, n_v)


def gain_sequence(seq, ctx, first=None):
    """Gamma^{t_j,+}(g(t_j), g(t_j)) at every time node; ``first`` reuses a
    known t=0 slice."""
    seq = np.asarray(seq, dtype=float)
    start = 0 if first is None else 1
    rows = seq[start:]
    t_rows = np.repeat(ctx.times[start:], seq.shape[1])
    flat = _flatten(rows)
    out = collision.gamma_gain(flat, flat, t_rows, ctx.workspace, ctx.wparams)
    out = out.reshape(rows.shape)
    if first is not None:
        out = np.concatenate([first[None], out])
    return out


def loss_sequence(seq, ctx):
    """L_eps(g(t_j)) at every time node."""
    seq = np.asarray(seq, dtype=float)
    t_rows = np.repeat(ctx.times, seq.shape[1])
    out = collision.loss_multiplier(_flatten(seq), t_rows, ctx.workspace, ctx.wparams)
    return out.reshape(seq.shape)


def _factors_at(j, loss_seq, ctx):
    """V(t_j, t_i) for i = 0..j along the characteristics ending at t_j."""
    dt = ctx.dt
    shifted = [ctx.characteristic_shift(loss_seq[m], j - m) for m in range(j + 1)]
    V = [None] * (j + 1)
    V[j] = np.zeros_like(loss_seq[0])
    for i in range(j - 1, -1, -1):
        V[i] = V[i + 1] + 0.5 * dt * (shifted[i] + shifted[i + 1])
    return V


def v_factor(loss_seq, j, i, ctx):
    """V^n(t_j, t_i): trapezoid of L_eps(g^n) along the backward characteristic.

    ``loss_seq`` is :func:`loss_sequence` of g^n; returns shape (n_x, n_v).
    """
    if i > j:
        raise ValueError(f"need s <= t (got s index {i} > t index {j})")
    return _factors_at(j, np.asarray(loss_seq, dtype=float), ctx)[i]


def mild_update(seq, g0, ctx, gain_seq=None, loss_seq=None):
    """One Picard step: g^{n+1} from g^n through the mild form.

    The exponential integrating factor and the Duhamel integral are
    trapezoid sums on the stored time nodes. Every factor is non-negative,
    so g^n >= 0 and g0 >= 0 give g^{n+1} >= 0; g^{n+1}(0) is g0 itself.
    """
    seq = np.asarray(seq, dtype=float)
    if gain_seq is None:
        gain_seq = gain_sequence(seq, ctx)
    if loss_seq is None:
        loss_seq = loss_sequence(seq, ctx)
    dt = ctx.dt
    out = np.empty_like(seq)
    out[0] = g0
    damp = ctx.damping[None, :]
    for j in range(1, seq.shape[0]):
        V = _factors_at(j, loss_seq, ctx)
        t_j = ctx.times[j]
        acc = np.exp(-damp * t_j - V[0]) * ctx.characteristic_shift(g0, j)
        for i in range(j + 1):
            w = 0.5 * dt if i in (0, j) else dt
            acc = acc + w * np.exp(-damp * (t_j - ctx.times[i]) - V[i]) \
                * ctx.characteristic_shift(gain_seq[i], j - i)
        out[j] = acc
    return out


def differential_residual(seq, ctx):
    """Max-norm defect of the differential form on a sequence.

    Uses the characteristic difference (g(t+dt, x) - g(t, x - dt v)) / dt
    against the trapezoid average of Gamma^t_eps(g, g) - kappa <v>^2 g.
    """
    seq = np.asarray(seq, dtype=float)
    gain = gain_sequence(seq, ctx)
    loss = loss_sequence(seq, ctx)
    rhs = gain - seq * loss - ctx.damping[None, None, :] * seq
    worst = 0.0
    for j in range(seq.shape[0] - 1):
        lhs = (seq[j + 1] - ctx.characteristic_shift(seq[j], 1)) / ctx.dt
        avg = 0.5 * (rhs[j + 1] + ctx.characteristic_shift(rhs[j], 1))
        worst = max(worst, float(np.max(np.abs(lhs - avg))))
    return worst


@dataclass
class IterationReport:
    y_norms: list = field(default_factory=list)
    diff_norms: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    positivity_min: list = field(default_factory=list)
    converged: bool = False
    n_iter: int = 0
    residual: float = float("nan")
    message: str = ""

    @property
    def max_ratio(self):
        return max(self.ratios) if self.ratios else 0.0

    def as_dict(self):
        return {
            "y_norms": list(self.y_norms), "diff_norms": list(self.diff_norms),
            "ratios": list(self.ratios), "positivity_min": list(self.positivity_min),
            "converged": self.converged, "n_iter": self.n_iter,
            "residual": self.residual, "message": self.message,
        }


def picard_solve(g0, ctx, tol=1e-6, n_max=25, compute_residual=True, callback=None):
    """Iterate the mild form from g^0 = g0 (constant in time).

    Stops once ||g^n - g^{n-1}||_Y <= tol * ||g^1 - g^0||_Y or at ``n_max``;
    non-convergence is reported, not raised. Returns ``(sequence, report)``.
    """
    g0 = check_field_values(g0, ctx.sgrid, ctx.vgrid, "g0")
    if np.min(g0) < 0:
        raise ValueError("g0 must be non-negative")
    kappa = ctx.wparams.kappa
    prev = np.repeat(g0[None], ctx.n_steps + 1, axis=0)
    report = IterationReport()
    t0_gain = collision.gamma_gain(g0, g0, 0.0, ctx.workspace, ctx.wparams)
    first = None
    for n in range(1, n_max + 1):
        gain = gain_sequence(prev, ctx, first=t0_gain)
        new = mild_update(prev, g0, ctx, gain_seq=gain)
        bad = int(np.count_nonzero(~np.isfinite(new)))
        if bad:
            raise NonFiniteIterateError(n, bad)
        diff = y_norm(new - prev, ctx.dt, ctx.sgrid, ctx.vgrid, ctx.spec, kappa)
        report.y_norms.append(y_norm(new, ctx.dt, ctx.sgrid, ctx.vgrid, ctx.spec, kappa))
        if n >= 2 and report.diff_norms[-1] > 0:
            report.ratios.append(diff / report.diff_norms[-1])
        report.diff_norms.append(diff)
        report.positivity_min.append(float(np.min(new)))
        report.n_iter = n
        prev = new
        if callback is not None:
            callback(n, report)
        logger.info("picard n=%d  diff_Y=%.3e  Y=%.6e", n, diff, report.y_norms[-1])
        if first is None:
            first = diff
        if diff <= tol * first:
            report.converged = True
            break
    if not report.converged:
        report.message = f"not converged after {n_max} iterations"
        logger.warning(report.message)
    if compute_residual:
        report.residual = differential_residual(prev, ctx)
    return prev, report


def build_context(*, v_max, n_v, L, n_x, active_dims, gamma, s, K, eps, r_floor,
                  rho, kappa, n_theta, n_phi, k, ell, fd_order, T, n_steps):
    """Assemble grids, parameters and workspace; ``r_floor=None`` means h_v/2."""
    vgrid = build_velocity_grid(v_max, n_v)
    sgrid = build_spatial_grid(L, n_x, active_dims)
    if r_floor is None:
        r_floor = 0.5 * vgrid.h
    kparams = CrossSectionParams(gamma, s, K, eps, r_floor)
    wparams = WeightParams(rho, kappa)
    ws = collision.CollisionWorkspace(vgrid, kparams, n_theta, n_phi)
    return SolverContext(sgrid, vgrid, kparams, wparams, ws,
                         NormSpec(k, ell, fd_order), T, n_steps)


class PicardSolver(BaseEstimator):
    """Estimator wrapper around :func:`picard_solve`.

    ``fit(g0)`` takes the initial datum in g-representation, shape
    (n_x**active_dims, n_v**3), chooses T via :func:`select_T` unless ``T``
    is given, and stores the iterates; ``predict(t)`` interpolates the limit
    in time. Parameters follow scikit-learn conventions, so ``clone`` and
    ``set_params`` drive parameter sweeps.
    """

    def __init__(self, *, v_max=5.0, n_v=8, L=4.0, n_x=32, active_dims=1,
                 gamma=-0.5, s=0.25, K=1.0, eps=0.2, r_floor=None,
                 rho=1.0, kappa=0.5, n_theta=4, n_phi=8,
                 k=1, ell=3.0, fd_order=2,
                 T=None, n_steps=8, tol=1e-6, n_max=25,
                 C1=DEFAULT_C1, C2=DEFAULT_C2, D0=None, compute_residual=True):
        self.v_max = v_max
        self.n_v = n_v
        self.L = L
        self.n_x = n_x
        self.active_dims = active_dims
        self.gamma = gamma
        self.s = s
        self.K = K
        self.eps = eps
        self.r_floor = r_floor
        self.rho = rho
        self.kappa = kappa
        self.n_theta = n_theta
        self.n_phi = n_phi
        self.k = k
        self.ell = ell
        self.fd_order = fd_order
        self.T = T
        self.n_steps = n_steps
        self.tol = tol
        self.n_max = n_max
        self.C1 = C1
        self.C2 = C2
        self.D0 = D0
        self.compute_residual = compute_residual

    def make_grids(self):
        return (build_spatial_grid(self.L, self.n_x, self.active_dims),
                build_velocity_grid(self.v_max, self.n_v))

    def _context(self, T):
        return build_context(
            v_max=self.v_max, n_v=self.n_v, L=self.L, n_x=self.n_x,
            active_dims=self.active_dims, gamma=self.gamma, s=self.s, K=self.K,
            eps=self.eps, r_floor=self.r_floor, rho=self.rho, kappa=self.kappa,
            n_theta=self.n_theta, n_phi=self.n_phi, k=self.k, ell=self.ell,
            fd_order=self.fd_order, T=T, n_steps=self.n_steps)

    def fit(self, X, y=None):
        sgrid, vgrid = self.make_grids()
        g0 = check_field_values(X, sgrid, vgrid, "g0")
        wparams = WeightParams(self.rho, self.kappa)
        spec = NormSpec(self.k, self.ell, self.fd_order)
        self.g0_norm_ = ul_sobolev_norm(g0, sgrid, vgrid, spec)
        D0 = self.g0_norm_ if self.D0 is None else float(self.D0)
        if self.g0_norm_ > D0 * (1.0 + 1e-12):
            raise ValueError(f"||g0|| = {self.g0_norm_!r} exceeds D0 = {D0!r}")
        self.D0_ = D0
        if self.T is not None:
            T = float(self.T)
            self.K0_ = float("nan")
        elif D0 == 0.0:
            T = wparams.T0
            self.K0_ = float("nan")
        else:
            self.K0_, T = select_T(self.C1, self.C2, D0, self.kappa, wparams.T0)
        self.context_ = self._context(T)
        self.T_ = self.context_.T
        self.times_ = self.context_.times
        self.solution_, self.report_ = picard_solve(
            g0, self.context_, self.tol, self.n_max, self.compute_residual)
        return self

    def predict(self, t):
        """g at time ``t`` (linear interpolation between time nodes)."""
        t = float(t)
        if not 0.0 <= t <= self.T_:
            raise ValueError(f"t={t!r} outside the solved interval [0, {self.T_!r}]")
        pos = t / self.context_.dt
        j = min(int(np.floor(pos)), self.context_.n_steps - 1)
        frac = pos - j
        return (1.0 - frac) * self.solution_[j] + frac * self.solution_[j + 1]
