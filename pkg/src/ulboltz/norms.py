"""Uniformly local weighted Sobolev norms on the periodic phase-space grid.

The supremum over window centres ``a`` runs over every spatial node; on the
torus it is a finite maximum and is computed exactly.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .weights import weight_W

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NormSpec:
    k: int = 1
    ell: float = 3.0
    fd_order: int = 2

    def __post_init__(self):
        if self.k < 0 or int(self.k) != self.k:
            raise ValueError(f"k must be a non-negative integer, got {self.k!r}")
        if self.ell < 0:
            raise ValueError(f"ell must be >= 0, got {self.ell!r}")
        if self.fd_order not in (2, 4):
            raise ValueError(f"fd_order must be 2 or 4, got {self.fd_order!r}")
        if self.k < 4:
            logger.debug("NormSpec k=%d is below the k >= 4 of the existence theory",
                         self.k)

    def raised(self, d_ell=1):
        return NormSpec(self.k, self.ell + d_ell, self.fd_order)


def phi1_radial(r):
    """C-infinity bump: 1 on r <= 1, exp(1 - 1/(1 - (r-1)^2)) on (1, 2), 0 beyond."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    out[r <= 1.0] = 1.0
    mid = (r > 1.0) & (r < 2.0)
    s = r[mid] - 1.0
    out[mid] = np.exp(1.0 - 1.0 / (1.0 - s * s))
    return out


def phi1(x):
    """The window at a point (trailing axis = coordinates) or a radius."""
    x = np.asarray(x, dtype=float)
    r = np.abs(x) if x.ndim == 0 else np.linalg.norm(x, axis=-1)
    return phi1_radial(r)


def fd_weights(offsets, deriv):
    """Finite-difference weights (unit spacing) exact on polynomials of
    degree < len(offsets)."""
    offsets = np.asarray(offsets, dtype=float)
    npts = offsets.size
    A = np.vander(offsets, npts, increasing=True).T
    rhs = np.zeros(npts)
    rhs[deriv] = float(np.prod(np.arange(1, deriv + 1)))
    return np.linalg.solve(A, rhs)


@lru_cache(maxsize=256)
def derivative_matrix(n, h, deriv, fd_order, periodic):
    """Dense (n, n) matrix of the ``deriv``-th derivative on one axis.

    Periodic axes use the central stencil everywhere; bounded axes switch to
    a one-sided stencil of ``deriv + fd_order`` points near the edges.
    """
    if deriv == 0:
        return np.eye(n)
    r = (deriv + fd_order - 1) // 2
    central = np.arange(-r, r + 1)
    w_c = fd_weights(central, deriv) / h ** deriv
    D = np.zeros((n, n))
    if periodic:
        if n < 2 * r + 1:
            raise ValueError(f"periodic axis with {n} nodes cannot hold a "
                             f"{2 * r + 1}-point stencil")
        for i in range(n):
            for o, w in zip(central, w_c):
                D[i, (i + o) % n] += w
        return D
    npts = deriv + fd_order
    if n < max(npts, 2 * r + 1):
        raise ValueError(f"velocity axis with {n} nodes has no room for the "
                         f"order-{deriv} stencil (needs {max(npts, 2 * r + 1)})")
    for i in range(n):
        if r <= i <= n - 1 - r:
            D[i, i - r:i + r + 1] = w_c
            continue
        start = min(max(i - npts // 2, 0), n - npts)
        D[i, start:start + npts] = (
            fd_weights(np.arange(start, start + npts) - i, deriv) / h ** deriv)
    return D


def _apply_axis(arr, D, axis):
    return np.moveaxis(np.tensordot(D, arr, axes=([1], [axis])), 0, axis)


def finite_diff(values, sgrid, vgrid, alpha, beta, fd_order=2):
    """Apply d^alpha_x d^beta_v to a field of shape (n_x, n_v).

    ``alpha`` holds one order per spatial axis (length 1 or 3); orders on
    inactive axes give an identically zero result since fields are constant
    there.
    """
    alpha = tuple(int(a) for a in alpha)
    beta = tuple(int(b) for b in beta)
    if len(beta) != 3:
        raise ValueError("beta must have three components")
    d = sgrid.active_dims
    if any(alpha[d:]):
        return np.zeros_like(np.asarray(values, dtype=float))
    arr = np.asarray(values, dtype=float).reshape(sgrid.shape + vgrid.shape)
    for ax, order in enumerate(alpha[:d]):
        if order:
            D = derivative_matrix(sgrid.n_per_axis, sgrid.h, order, fd_order, True)
            arr = _apply_axis(arr, D, ax)
    for ax, order in enumerate(beta):
        if order:
            D = derivative_matrix(vgrid.n_per_axis, vgrid.h, order, fd_order, False)
            arr = _apply_axis(arr, D, d + ax)
    return arr.reshape(sgrid.size, vgrid.size)


def multi_indices(k, active_dims):
    """All (alpha, beta) with |alpha| + |beta| <= k, alpha on active axes."""
    out = []
    for total in range(k + 1):
        for combo in itertools.product(range(total + 1), repeat=active_dims + 3):
            if sum(combo) == total:
                out.append((combo[:active_dims], combo[active_dims:]))
    return out


def _minimal_image(sgrid):
    n, h = sgrid.n_per_axis, sgrid.h
    o = np.arange(n)
    return np.where(o <= n // 2, o, o - n) * h


def window_weights(sgrid, R=1.0):
    """Quadrature weights of |phi_R(x - a)|^2 dx as a function of x - a.

    Returns an array shaped like the active spatial grid. For
    ``active_dims = 1`` the two transverse directions are integrated on the
    same node spacing, so the result equals the 3-D weight summed over them.
    """
    if 2.0 * R > sgrid.L:
        raise ValueError(f"window radius 2R={2 * R!r} exceeds box half-width {sgrid.L!r}")
    d1 = _minimal_image(sgrid)
    mesh = np.meshgrid(d1, d1, d1, indexing="ij")
    r = np.sqrt(mesh[0] ** 2 + mesh[1] ** 2 + mesh[2] ** 2) / R
    w3 = phi1_radial(r) ** 2 * sgrid.h ** 3
    if sgrid.active_dims == 1:
        return w3.sum(axis=(1, 2))
    return w3


def windowed_integrals(density, sgrid, window):
    """I(a) = sum_x window(x - a) density(x) for every node a (periodic)."""
    rho = np.asarray(density, dtype=float).reshape(sgrid.shape)
    axes = tuple(range(sgrid.active_dims))
    spec = np.fft.rfftn(rho, axes=axes) * np.conj(np.fft.rfftn(window, axes=axes))
    return np.fft.irfftn(spec, s=sgrid.shape, axes=axes).ravel()


def _term_densities(values, sgrid, vgrid, spec):
    W2 = weight_W(vgrid.points, spec.ell) ** 2
    out = []
    for alpha, beta in multi_indices(spec.k, sgrid.active_dims):
        D = finite_diff(values, sgrid, vgrid, alpha, beta, spec.fd_order)
        out.append((D * D) @ W2 * vgrid.cell_volume)
    return out


def ul_sobolev_norm(values, sgrid, vgrid, spec, R=1.0):
    """Discrete H^{k, ell}_ul norm of a field of shape (n_x, n_v)."""
    window = window_weights(sgrid, R)
    total = 0.0
    for density in _term_densities(values, sgrid, vgrid, spec):
        total += max(np.max(windowed_integrals(density, sgrid, window)), 0.0)
    return float(np.sqrt(total))


def ul_sobolev_profile(seq, sgrid, vgrid, spec):
    """ul-norm at each time node of a sequence of shape (n_t, n_x, n_v)."""
    return np.array([ul_sobolev_norm(g, sgrid, vgrid, spec) for g in seq])


def spacetime_norm(seq, dt, sgrid, vgrid, spec):
    """M^{k, ell} norm: per multi-index, sup over a of the time trapezoid of
    the windowed integrals; summed over multi-indices, then sqrt."""
    seq = np.asarray(seq, dtype=float)
    if seq.ndim != 3 or seq.shape[0] == 0:
        raise ValueError("spacetime_norm needs a non-empty (n_t, n_x, n_v) sequence")
    if seq.shape[0] == 1:
        return 0.0
    window = window_weights(sgrid)
    per_time = [[windowed_integrals(dens, sgrid, window)
                 for dens in _term_densities(g, sgrid, vgrid, spec)] for g in seq]
    per_time = np.asarray(per_time)      # (n_t, n_terms, n_x)
    trap = np.full(seq.shape[0], dt)
    trap[0] = trap[-1] = 0.5 * dt
    integrated = np.tensordot(trap, per_time, axes=(0, 0))
    return float(np.sqrt(np.sum(np.maximum(integrated.max(axis=1), 0.0))))


def y_norm(seq, dt, sgrid, vgrid, spec, kappa):
    """sqrt(sup_t ||g(t)||^2_{k,ell} + kappa * ||g||^2_{M^{k, ell+1}})."""
    seq = np.asarray(seq, dtype=float)
    if seq.ndim != 3 or seq.shape[0] == 0:
        raise ValueError("y_norm needs a non-empty (n_t, n_x, n_v) sequence")
    sup_sq = np.max(ul_sobolev_profile(seq, sgrid, vgrid, spec) ** 2)
    m_sq = spacetime_norm(seq, dt, sgrid, vgrid, spec.raised()) ** 2
    return float(np.sqrt(sup_sq + kappa * m_sq))


def r_equivalence_check(values, sgrid, vgrid, spec, R):
    """Compare the phi_1 norm against the phi_R norm for R in {2, 3}.

    Returns ``(lower_ok, empirical_C)`` with empirical_C = norm_R / (R^3 norm_1).
    """
    if R not in (2, 3):
        raise ValueError(f"R must be 2 or 3, got {R!r}")
    n1 = ul_sobolev_norm(values, sgrid, vgrid, spec)
    nR = ul_sobolev_norm(values, sgrid, vgrid, spec, R=R)
    lower_ok = n1 <= nR * (1.0 + 1e-12) + 1e-300
    const = 0.0 if n1 == 0.0 else nR / (R ** 3 * n1)
    return bool(lower_ok), float(const)


def embedding_constant(values, sgrid, vgrid, fd_order=2, ell=0.0):
    """max |g| divided by the k = 4 ul-norm (a sanity statistic, not a bound)."""
    norm = ul_sobolev_norm(values, sgrid, vgrid, NormSpec(4, ell, fd_order))
    peak = float(np.max(np.abs(values)))
    return 0.0 if norm == 0.0 else peak / norm
