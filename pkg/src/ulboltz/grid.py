"""Phase-space discretization: velocity box, periodic spatial box, hemisphere
quadrature and the interpolation primitives used by every other module.

Array layout conventions
------------------------
A field is stored as a float64 array of shape ``(sgrid.size, vgrid.size)``.
The spatial index flattens the active axes in C order; the velocity index
flattens ``(i1, i2, i3)`` in C order, so ``v1`` is the slowest axis.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_count, check_positive, check_unit_vector

F_REP = "f"
G_REP = "g"


@dataclass(frozen=True)
class VelocityGrid:
    """Cell-centred uniform grid on the box ``[-v_max, v_max]^3``."""

    v_max: float
    n_per_axis: int

    @property
    def h(self):
        return 2.0 * self.v_max / self.n_per_axis

    @property
    def size(self):
        return self.n_per_axis ** 3

    @property
    def shape(self):
        return (self.n_per_axis,) * 3

    @property
    def nodes_1d(self):
        return -self.v_max + (np.arange(self.n_per_axis) + 0.5) * self.h

    @property
    def points(self):
        """Node coordinates, shape (size, 3)."""
        x = self.nodes_1d
        mesh = np.meshgrid(x, x, x, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @property
    def cell_volume(self):
        return self.h ** 3

    def flat_index(self, i1, i2, i3):
        n = self.n_per_axis
        return (i1 * n + i2) * n + i3


@dataclass(frozen=True)
class SpatialGrid:
    """Periodic box ``[-L, L)^d`` with ``d = active_dims`` resolved axes.

    Fields are constant along the inactive axes; transport uses only the
    velocity components of the active axes.
    """

    L: float
    n_per_axis: int
    active_dims: int = 1
    periodic: bool = field(default=True, init=False)

    @property
    def h(self):
        return 2.0 * self.L / self.n_per_axis

    @property
    def size(self):
        return self.n_per_axis ** self.active_dims

    @property
    def shape(self):
        return (self.n_per_axis,) * self.active_dims

    @property
    def nodes_1d(self):
        return -self.L + np.arange(self.n_per_axis) * self.h

    @property
    def points(self):
        """Node coordinates on the active axes, shape (size, active_dims)."""
        x = self.nodes_1d
        mesh = np.meshgrid(*([x] * self.active_dims), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def wrap(self, index):
        return np.mod(index, self.n_per_axis)


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Hemisphere rule around ``axis``: nodes (theta, phi), unit vectors and
    solid-angle weights (the sin(theta) Jacobian is included)."""

    axis: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    sigma: np.ndarray

    @property
    def size(self):
        return self.theta.size


@dataclass(frozen=True, eq=False)
class DistributionField:
    """Values of f or g on the phase-space grid at one time."""

    time: float
    representation: str
    values: np.ndarray
    sgrid: SpatialGrid
    vgrid: VelocityGrid

    def __post_init__(self):
        if self.representation not in (F_REP, G_REP):
            raise ValueError(f"unknown representation {self.representation!r}")
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.sgrid.size, self.vgrid.size):
            raise ValueError(
                f"values shape {values.shape} does not match grids "
                f"{(self.sgrid.size, self.vgrid.size)}")
        if not np.all(np.isfinite(values)):
            raise ValueError("DistributionField values must be finite")
        object.__setattr__(self, "values", values)

    def with_values(self, values, *, time=None, representation=None):
        return DistributionField(
            self.time if time is None else time,
            self.representation if representation is None else representation,
            values, self.sgrid, self.vgrid)


def build_velocity_grid(v_max, n, *, min_n=4):
    """Velocity grid with ``n`` cell-centred nodes per axis.

    ``min_n`` exists so tests can build degenerate grids (e.g. n=2); every
    solver path uses the default floor of 4.
    """
    v_max = check_positive("v_max", v_max)
    n = check_count("n", n, min_n)
    return VelocityGrid(v_max, n)


def build_spatial_grid(L, n, active_dims=1):
    L = check_positive("L", L)
    n = check_count("n", n, 2)
    if active_dims not in (1, 3):
        raise ValueError(f"active_dims must be 1 or 3, got {active_dims!r}")
    return SpatialGrid(L, n, active_dims)


def orthonormal_frame(axis):
    """Return (e1, e2) such that (e1, e2, axis) is a right-handed frame.

    Works on a single vector or a stack of shape (..., 3).
    """
    k = np.asarray(axis, dtype=float)
    helper = np.zeros_like(k)
    use_y = np.abs(k[..., 0]) > 0.9
    helper[..., 0] = np.where(use_y, 0.0, 1.0)
    helper[..., 1] = np.where(use_y, 1.0, 0.0)
    e1 = helper - np.sum(helper * k, axis=-1, keepdims=True) * k
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(k, e1)
    return e1, e2


def theta_edges(n_sub, theta_lo, grading=0.25, edges=None):
    """Subinterval edges in theta, from ``theta_lo`` up to pi/2.

    Interior edges are geometric, ``(pi/2) * grading**i``, unless given.
    """
    top = 0.5 * np.pi
    if edges is None:
        interior = [top * grading ** i for i in range(n_sub - 1, 0, -1)]
    else:
        interior = sorted(float(e) for e in edges)
    interior = [e for e in interior if theta_lo < e < top]
    return np.array([theta_lo, *interior, top])


def build_sphere_quadrature(axis, n_theta, n_phi, theta_min=0.0, *,
                            n_sub=2, grading=0.25, edges=None):
    """Composite Gauss-Legendre rule on the hemisphere around ``axis``.

    Parameters
    ----------
    axis : (3,) array
        Unit pole vector k; theta is measured from it.
    n_theta : int
        Total number of polar nodes, spread over the theta subintervals.
    n_phi : int
        Number of uniform azimuthal nodes.
    theta_min : float
        Lower polar limit; 0 integrates the full hemisphere.
    n_sub, grading, edges
        Subinterval layout, see :func:`theta_edges`. Passing ``edges``
        lets the caller put a subinterval boundary on a kernel jump.

    Notes
    -----
    Gauss-Legendre is applied in ``u = cos(theta)`` on each subinterval, so
    the rule is exact for polynomials in cos(theta) of degree
    ``2 * order - 1`` and the weights sum to ``2*pi*cos(theta_min)``.
    """
    axis = check_unit_vector("axis", axis)
    n_theta = check_count("n_theta", n_theta, 2)
    n_phi = check_count("n_phi", n_phi, 2)
    if not 0.0 <= theta_min < 0.5 * np.pi:
        raise ValueError(f"theta_min must lie in [0, pi/2), got {theta_min!r}")

    bounds = theta_edges(n_sub, theta_min, grading, edges)
    n_int = len(bounds) - 1
    if n_theta < n_int:
        raise ValueError(
            f"n_theta={n_theta} is smaller than the {n_int} theta subintervals")
    orders = np.full(n_int, n_theta // n_int)
    orders[n_int - n_theta % n_int:] += 1 if n_theta % n_int else 0

    thetas, u_weights = [], []
    for (lo, hi), order in zip(zip(bounds[:-1], bounds[1:]), orders):
        x, w = np.polynomial.legendre.leggauss(int(order))
        u_lo, u_hi = np.cos(hi), np.cos(lo)
        u = 0.5 * (u_hi - u_lo) * x + 0.5 * (u_hi + u_lo)
        thetas.append(np.arccos(u))
        u_weights.append(0.5 * (u_hi - u_lo) * w)
    theta_1d = np.concatenate(thetas)
    wu_1d = np.concatenate(u_weights)

    phi_1d = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    theta = np.repeat(theta_1d, n_phi)
    phi = np.tile(phi_1d, theta_1d.size)
    weights = np.repeat(wu_1d, n_phi) * (2.0 * np.pi / n_phi)

    e1, e2 = orthonormal_frame(axis)
    st, ct = np.sin(theta), np.cos(theta)
    sigma = ((st * np.cos(phi))[:, None] * e1
             + (st * np.sin(phi))[:, None] * e2
             + ct[:, None] * axis)
    return SphereQuadrature(axis, theta, phi, weights, sigma)


def interpolate_v(slice_values, vgrid, points):
    """Trilinear interpolation of a velocity slice at off-grid points.

    Inside the box but beyond the outermost nodes the coordinate is clamped
    (constant extension); outside the box the result is 0.
    """
    values = np.asarray(slice_values, dtype=float).reshape(vgrid.shape)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n, h = vgrid.n_per_axis, vgrid.h
    inside = np.all(np.abs(pts) <= vgrid.v_max, axis=-1)

    q = np.clip((pts + vgrid.v_max) / h - 0.5, 0.0, n - 1.0)
    i0 = np.minimum(np.floor(q).astype(int), n - 2)
    frac = q - i0
    out = np.zeros(pts.shape[0])
    for c1 in (0, 1):
        w1 = frac[:, 0] if c1 else 1.0 - frac[:, 0]
        for c2 in (0, 1):
            w2 = frac[:, 1] if c2 else 1.0 - frac[:, 1]
            for c3 in (0, 1):
                w3 = frac[:, 2] if c3 else 1.0 - frac[:, 2]
                out += (w1 * w2 * w3) * values[i0[:, 0] + c1, i0[:, 1] + c2,
                                               i0[:, 2] + c3]
    out[~inside] = 0.0
    if np.ndim(points) == 1:
        return out[0]
    return out


def shift_x(values, sgrid, displacement):
    """Periodic linear interpolation returning ``g(x + d)`` at every node.

    ``displacement`` is either one vector (length ``active_dims`` or 3) or
    one vector per velocity node, shape (n_v, active_dims) or (n_v, 3); only
    the active components are used.
    """
    values = np.asarray(values, dtype=float)
    n_v = values.shape[-1]
    d = np.asarray(displacement, dtype=float)
    if d.ndim == 1:
        d = np.broadcast_to(d, (n_v, d.size))
    d = d[:, :sgrid.active_dims]

    n = sgrid.n_per_axis
    out = values.reshape(sgrid.shape + (n_v,))
    base = np.arange(n)
    cols = np.arange(n_v)
    for axis in range(sgrid.active_dims):
        s = d[:, axis] / sgrid.h
        k = np.floor(s)
        frac = s - k
        k = k.astype(np.int64)
        moved = np.moveaxis(out, axis, 0)
        idx0 = np.mod(base[:, None] + k[None, :], n)
        idx1 = np.mod(idx0 + 1, n)
        lo = _gather(moved, idx0, cols)
        hi = _gather(moved, idx1, cols)
        moved = (1.0 - frac) * lo + frac * hi
        out = np.moveaxis(moved, 0, axis)
    return np.ascontiguousarray(out.reshape(values.shape))


def _gather(moved, idx, cols):
    # moved: (n, ..., n_v); idx: (n, n_v) row index per (node, velocity column)
    if moved.ndim == 2:
        return moved[idx, cols[None, :]]
    mid = moved.shape[1:-1]
    flat = moved.reshape(moved.shape[0], -1, moved.shape[-1])
    got = flat[idx[:, None, :], np.arange(flat.shape[1])[None, :, None],
               cols[None, None, :]]
    return got.reshape((moved.shape[0],) + mid + (moved.shape[-1],))
