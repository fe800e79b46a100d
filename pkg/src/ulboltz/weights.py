"""Time-dependent Maxwellian weight, polynomial weights and the f <-> g transform."""

import logging
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive
from .grid import F_REP, G_REP

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WeightParams:
    rho: float = 1.0
    kappa: float = 0.5

    def __post_init__(self):
        check_positive("rho", self.rho)
        check_positive("kappa", self.kappa)

    @property
    def T0(self):
        """Horizon rho / (2 kappa) on which rho - kappa t >= rho / 2."""
        return self.rho / (2.0 * self.kappa)


def _check_time(t, params):
    t = float(t)
    if not 0.0 <= t <= params.T0:
        raise ValueError(f"t={t!r} outside [0, T0={params.T0!r}]")
    return t


def japanese_sq(v):
    """<v>^2 = 1 + |v|^2 along the last axis."""
    v = np.asarray(v, dtype=float)
    return 1.0 + np.sum(v * v, axis=-1)


def mu(t, v, params):
    """exp(-(rho - kappa t)(1 + |v|^2)) for t in [0, T0]."""
    t = _check_time(t, params)
    return np.exp(-(params.rho - params.kappa * t) * japanese_sq(v))


def weight_W(v, ell):
    """(1 + |v|^2)^(ell / 2)."""
    return japanese_sq(v) ** (0.5 * ell)


def transform(field, direction, params):
    """Switch a :class:`~ulboltz.grid.DistributionField` between f and g.

    ``direction`` is ``"to_g"`` (divide by mu) or ``"to_f"`` (multiply).
    Nodes where mu underflows to 0 are mapped to g = 0 and counted in the log.
    """
    if direction == "to_g":
        if field.representation != F_REP:
            raise ValueError("to_g needs an f-representation field")
        weight = mu(field.time, field.vgrid.points, params)
        underflow = weight == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            g = field.values / weight[None, :]
        if np.any(underflow):
            g[:, underflow] = 0.0
            logger.info("to_g: mu underflows at %d velocity nodes; set to 0",
                        int(np.count_nonzero(underflow)))
        return field.with_values(g, representation=G_REP)
    if direction == "to_f":
        if field.representation != G_REP:
            raise ValueError("to_f needs a g-representation field")
        weight = mu(field.time, field.vgrid.points, params)
        return field.with_values(field.values * weight[None, :],
                                 representation=F_REP)
    raise ValueError(f"unknown direction {direction!r}")


def mu_factorization_residual(t, v, v_star, sigma, params):
    """Relative residual of mu(v_*) = mu(v)^-1 mu(v'_*) mu(v').

    The identity is exact because collisions conserve kinetic energy; the
    returned value measures only rounding.
    """
    from .collision import post_collision

    v_p, v_sp = post_collision(v, v_star, sigma)
    lhs = mu(t, v_star, params)
    rhs = mu(t, v_sp, params) * mu(t, v_p, params) / mu(t, v, params)
    return np.abs(lhs - rhs) / lhs


def weight_ratio(v, v_star, sigma, ell):
    """W_ell(v) / (W_ell(v'_*) W_ell(v')), bounded by 1 for ell >= 0."""
    from .collision import post_collision

    v_p, v_sp = post_collision(v, v_star, sigma)
    return weight_W(v, ell) / (weight_W(v_sp, ell) * weight_W(v_p, ell))
