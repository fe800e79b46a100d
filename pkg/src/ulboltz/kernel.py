"""Collision cross-section B_eps(v - v_*, sigma) = Phi_gamma(|v - v_*|) b_eps(cos theta)."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_unit_vector

HALF_PI = 0.5 * np.pi


class AdmissibilityError(ValueError):
    """Raised when (gamma, s, K, eps) leave the admissible parameter range."""


@dataclass(frozen=True)
class CrossSectionParams:
    """Parameters of the cutoff cross-section.

    ``K = 0`` is accepted and switches collisions off (free transport with
    damping); every other constraint is the admissible range of the
    existence theory.
    """

    gamma: float = -0.5
    s: float = 0.25
    K: float = 1.0
    eps: float = 0.2
    r_floor: float = 0.0

    def __post_init__(self):
        validate_cross_section(self.gamma, self.s, self.K, self.eps, self.r_floor)


def validate_cross_section(gamma, s, K, eps, r_floor=0.0):
    if not 0.0 < s < 0.5:
        raise AdmissibilityError(f"need 0 < s < 1/2, got s={s!r}")
    if not gamma > -1.5:
        raise AdmissibilityError(f"need gamma > -3/2, got gamma={gamma!r}")
    if not 2.0 * s + gamma < 1.0:
        raise AdmissibilityError(
            f"need 2s + gamma < 1, got 2s + gamma = {2.0 * s + gamma!r}")
    if K < 0:
        raise AdmissibilityError(f"need K >= 0, got K={K!r}")
    if not 0.0 < eps < 0.25 * np.pi:
        raise AdmissibilityError(f"need 0 < eps < pi/4, got eps={eps!r}")
    if r_floor < 0:
        raise AdmissibilityError(f"need r_floor >= 0, got r_floor={r_floor!r}")


def _check_theta(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0.0) or np.any(theta > HALF_PI):
        raise ValueError("theta must lie in (0, pi/2]")
    return theta


def b_angular(theta, params):
    """Angular factor K * theta**(-2 - 2s) on (0, pi/2]."""
    theta = _check_theta(theta)
    return params.K * theta ** (-2.0 - 2.0 * params.s)


def b_cutoff(theta, params):
    """Cutoff angular factor: b(theta) for theta >= 2 eps, b(eps) below.

    The plateau uses b(eps), not b(2 eps), so the profile jumps at
    theta = 2 eps; the tie goes to the b(theta) branch.
    """
    theta = _check_theta(theta)
    plateau = params.K * params.eps ** (-2.0 - 2.0 * params.s)
    return np.where(theta >= 2.0 * params.eps,
                    params.K * theta ** (-2.0 - 2.0 * params.s), plateau)


def b_cutoff_or_plateau(theta, params):
    """Like :func:`b_cutoff` but also accepts theta = 0 (plateau value)."""
    theta = np.asarray(theta, dtype=float)
    safe = np.where(theta > 0.0, theta, params.eps)
    return b_cutoff(np.minimum(safe, HALF_PI), params)


def phi_kinetic(r, params):
    """Kinetic factor |v - v_*|**gamma, floored at ``r_floor`` when gamma < 0."""
    r = np.asarray(r, dtype=float)
    if params.gamma < 0:
        return np.maximum(r, params.r_floor) ** params.gamma
    if params.gamma == 0:
        return np.ones_like(r)
    return r ** params.gamma


def cross_section(v, v_star, sigma, params):
    """B_eps(v - v_*, sigma) for single vectors.

    Returns 0 on the diagonal v = v_* and outside the hemisphere theta > pi/2.
    """
    sigma = check_unit_vector("sigma", sigma)
    rel = np.asarray(v, dtype=float) - np.asarray(v_star, dtype=float)
    r = float(np.linalg.norm(rel))
    if r == 0.0:
        return 0.0
    cos_t = float(np.dot(rel / r, sigma))
    if cos_t < 0.0:
        return 0.0
    theta = float(np.arccos(min(cos_t, 1.0)))
    return float(phi_kinetic(r, params) * b_cutoff_or_plateau(theta, params))


def angular_integral(params, n_theta=64, n_phi=4):
    """Numerical value of the integral of b_eps over the hemisphere."""
    from .grid import build_sphere_quadrature

    quad = build_sphere_quadrature(np.array([0.0, 0.0, 1.0]), n_theta, n_phi,
                                   edges=(2.0 * params.eps,), n_sub=2)
    return float(np.sum(quad.weights * b_cutoff(quad.theta, params)))
