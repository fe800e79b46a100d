"""Bracketing pre-runs for the constants the theory leaves unspecified.

C1 and C2 enter the time-horizon formula; C_kappa and C enter the uniform
bound envelope and the moment-gain bound. None of them can be computed from
first principles here, so each is fitted on a separate pre-run and then
declared in the report.
"""

import logging
import math

import numpy as np
from sklearn.base import clone

from ..norms import NormSpec, ul_sobolev_norm
from ..solver import NonFiniteIterateError, select_T

logger = logging.getLogger(__name__)

CONTRACTION_TARGET = 0.5
CKAPPA_FLOOR = 1e-3
SAFETY = 1.1


def _probe(estimator, g0, T, n_max):
    est = clone(estimator).set_params(T=T, n_max=n_max, compute_residual=False)
    try:
        est.fit(g0)
    except NonFiniteIterateError:
        return math.inf
    return est.report_.max_ratio


def bracket_T(estimator, g0, target=CONTRACTION_TARGET, n_max=5, T_start=None,
              max_probes=12):
    """Largest probed T whose first ``n_max`` contraction ratios stay <= target.

    Doubling from ``T_start`` while probes pass (capped at T0), halving while
    they fail. Returns ``(T, probes)`` with probes a list of (T, max_ratio).
    """
    T0 = estimator.rho / (2.0 * estimator.kappa)
    T = T0 / 8.0 if T_start is None else min(T_start, T0)
    probes = []
    ratio = _probe(estimator, g0, T, n_max)
    probes.append((T, ratio))
    if ratio <= target:
        while T < T0 and len(probes) < max_probes:
            nxt = min(2.0 * T, T0)
            r = _probe(estimator, g0, nxt, n_max)
            probes.append((nxt, r))
            if r > target:
                break
            T = nxt
        return T, probes
    while len(probes) < max_probes:
        T *= 0.5
        r = _probe(estimator, g0, T, n_max)
        probes.append((T, r))
        if r <= target:
            return T, probes
    raise RuntimeError(f"no contracting horizon found; probes {probes}")


def contraction_constants(estimator, g0, **kwargs):
    """(C1 = C2, T_bracket, probes): the common constant that makes the
    horizon formula return the bracketed T."""
    T_cal, probes = bracket_T(estimator, g0, **kwargs)
    sgrid, vgrid = estimator.make_grids()
    D0 = ul_sobolev_norm(g0, sgrid, vgrid, NormSpec(estimator.k, estimator.ell,
                                                    estimator.fd_order))
    _, T_unit = select_T(1.0, 1.0, D0, estimator.kappa)
    return T_unit / T_cal, T_cal, probes


def gronwall_envelope(t, g0_sq, C_kappa):
    """||g0||^2 e^{Ct} / (1 - (e^{Ct} - 1) ||g0||^2); inf once the denominator
    is no longer positive."""
    t = np.asarray(t, dtype=float)
    growth = np.exp(C_kappa * t)
    denom = 1.0 - (growth - 1.0) * g0_sq
    with np.errstate(divide="ignore"):
        return np.where(denom > 0, g0_sq * growth / np.where(denom > 0, denom, 1.0), np.inf)


def fit_c_kappa(times, norm_sq, floor=CKAPPA_FLOOR, safety=SAFETY):
    """Smallest C_kappa (times a safety factor) whose envelope covers the curve.

    With y = ||g(t)||^2 / ||g0||^2 and a = ||g0||^2 the envelope holds at t
    iff C t >= log(y (1 + a) / (1 + y a)).
    """
    norm_sq = np.asarray(norm_sq, dtype=float)
    a = float(norm_sq[0])
    if a == 0.0:
        return floor
    need = floor
    for t, val in zip(times[1:], norm_sq[1:]):
        y = val / a
        arg = y * (1.0 + a) / (1.0 + y * a)
        if arg > 1.0:
            need = max(need, safety * math.log(arg) / t)
    return need


def moment_bound(g0_sq, C, T_star):
    """2 ||g0||^2 (1 + 2 C T_* (1 + 2 ||g0||^2))."""
    return 2.0 * g0_sq * (1.0 + 2.0 * C * T_star * (1.0 + 2.0 * g0_sq))


def fit_c_moment(kappa_m_sq, g0_sq, T_star, safety=SAFETY):
    """Smallest C >= 0 (times a safety factor) meeting the moment bound."""
    if g0_sq == 0.0 or kappa_m_sq <= 2.0 * g0_sq:
        return 0.0
    return safety * (kappa_m_sq / (2.0 * g0_sq) - 1.0) / (2.0 * T_star * (1.0 + 2.0 * g0_sq))
