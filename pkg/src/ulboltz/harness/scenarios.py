"""Initial data library, all returned in g-representation at t = 0.

These are desk-scale stand-ins for the solution classes that motivate the
uniformly local setting: periodic data, data near vacuum or near a
Maxwellian, and a blend of two Maxwellians with a smooth transition across
the box (a periodic substitute for distinct limits at spatial infinity).
"""

import numpy as np

from ..grid import G_REP, DistributionField
from ..weights import WeightParams, japanese_sq

SCENARIOS = ("zero", "periodic", "near_vacuum", "near_maxwellian", "two_maxwellian",
             "random_smooth")

_DEFAULTS = {
    "zero": {},
    "periodic": {"amplitude": 0.25, "delta": 0.5, "modes": 2, "temperature": 0.25},
    "near_vacuum": {"amplitude": 0.01, "width": 1.0, "temperature": 0.25},
    "near_maxwellian": {"amplitude": 0.25, "delta": 0.5, "temperature": 0.25},
    "two_maxwellian": {"density_left": 0.25, "density_right": 0.1,
                       "velocity_left": 0.5, "velocity_right": -0.5,
                       "temperature_left": 0.25, "temperature_right": 0.2,
                       "sharpness": 3.0},
    "random_smooth": {"amplitude": 0.25, "n_modes": 3, "temperature": 0.25},
}


def scenario_defaults(name):
    if name not in _DEFAULTS:
        raise ValueError(f"unknown scenario {name!r}; choose from {SCENARIOS}")
    return dict(_DEFAULTS[name])


def _maxwellian_g(v, density, velocity, temperature, rho):
    """Maxwellian f divided by mu(0), evaluated without forming 1/mu."""
    if not 0 < temperature < 0.5 / rho:
        raise ValueError(
            f"temperature must lie in (0, 1/(2 rho)) = (0, {0.5 / rho!r}) so g decays, "
            f"got {temperature!r}")
    u = np.array([velocity, 0.0, 0.0])
    f_exp = -np.sum((v - u) ** 2, axis=-1) / (2.0 * temperature)
    return density * np.exp(f_exp + rho * japanese_sq(v))


def _coords(sgrid):
    return sgrid.points / sgrid.L        # in [-1, 1) per active axis


def make_scenario(name, params, sgrid, vgrid, wparams=None, seed=0):
    """g0 on the phase-space grid; ``params`` override the scenario defaults."""
    merged = scenario_defaults(name)
    unknown = set(params) - set(merged)
    if unknown:
        raise ValueError(f"unknown {name} parameters: {sorted(unknown)}")
    merged.update(params)
    p = merged
    wparams = wparams or WeightParams()
    rho = wparams.rho
    v = vgrid.points
    y = _coords(sgrid)

    if "delta" in p and not 0.0 <= p["delta"] <= 1.0:
        raise ValueError(f"delta must lie in [0, 1] to keep g0 >= 0, got {p['delta']!r}")
    if name == "zero":
        values = np.zeros((sgrid.size, vgrid.size))
    elif name == "periodic":
        modes = int(p["modes"])
        prof = np.prod(1.0 + p["delta"] * 0.5 * (np.cos(np.pi * y) + np.cos(modes * np.pi * y)),
                       axis=1)
        values = p["amplitude"] * prof[:, None] * _maxwellian_g(v, 1.0, 0.0, p["temperature"],
                                                                rho)[None, :]
    elif name == "near_vacuum":
        r2 = np.sum((y * sgrid.L) ** 2, axis=1) / p["width"] ** 2
        prof = np.exp(-r2)
        values = p["amplitude"] * prof[:, None] * _maxwellian_g(
            v, 1.0, 0.0, p["temperature"], rho)[None, :]
    elif name == "near_maxwellian":
        prof = np.prod(1.0 + p["delta"] * np.sin(np.pi * y), axis=1)
        values = p["amplitude"] * prof[:, None] * _maxwellian_g(
            v, 1.0, 0.0, p["temperature"], rho)[None, :]
    elif name == "two_maxwellian":
        ramp = 0.5 * (1.0 + np.tanh(p["sharpness"] * np.sin(np.pi * y[:, 0])))
        left = _maxwellian_g(v, p["density_left"], p["velocity_left"],
                             p["temperature_left"], rho)
        right = _maxwellian_g(v, p["density_right"], p["velocity_right"],
                              p["temperature_right"], rho)
        values = (1.0 - ramp)[:, None] * left[None, :] + ramp[:, None] * right[None, :]
    else:
        rng = np.random.default_rng(seed)
        n_modes = int(p["n_modes"])
        prof = np.ones(sgrid.size)
        for axis in range(sgrid.active_dims):
            coef = rng.normal(scale=0.3 / n_modes, size=n_modes)
            phase = rng.uniform(0.0, 2.0 * np.pi, size=n_modes)
            m = np.arange(1, n_modes + 1)
            prof = prof * (1.0 + np.cos(np.pi * np.outer(y[:, axis], m) + phase) @ coef)
        drift = rng.normal(scale=0.2)
        values = p["amplitude"] * (prof ** 2)[:, None] * _maxwellian_g(
            v, 1.0, drift, p["temperature"], rho)[None, :]

    return DistributionField(0.0, G_REP, values, sgrid, vgrid)
