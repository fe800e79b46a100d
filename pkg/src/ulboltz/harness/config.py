"""Flat ``key = value`` experiment configuration.

Lines starting with ``#`` and trailing ``# ...`` are comments. Scenario
parameters use the ``scenario.`` prefix, e.g. ``scenario.amplitude = 0.25``.
Unknown keys are rejected so that typos never silently fall back to a
default.
"""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from ..kernel import AdmissibilityError, validate_cross_section
from ..norms import NormSpec
from ..solver import DEFAULT_C1, DEFAULT_C2
from ..weights import WeightParams


class ConfigError(ValueError):
    """Parse or validation failure; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


AUTO = "auto"


@dataclass
class ExperimentConfig:
    # spatial and velocity grids
    L: float = 4.0
    active_dims: int = 1
    n_x: int = 32
    v_max: float = 5.0
    n_v: int = 8
    # cross-section
    gamma: float = -0.5
    s: float = 0.25
    K: float = 1.0
    eps: tuple = (0.2,)
    r_floor: object = AUTO
    n_theta: int = 4
    n_phi: int = 8
    # weight
    rho: float = 1.0
    kappa: float = 0.5
    # norms
    k: int = 1
    ell: float = 3.0
    fd_order: int = 2
    post_k: int = 2
    # solver
    T: object = AUTO
    n_steps: int = 8
    tol: float = 1e-6
    n_max: int = 25
    C1: float = DEFAULT_C1
    C2: float = DEFAULT_C2
    C_kappa: object = AUTO
    C_moment: object = AUTO
    # scenario and output
    scenario: str = "near_maxwellian"
    scenario_params: dict = field(default_factory=dict)
    seed: int = 0
    out: str = "runs/default"

    def __post_init__(self):
        self.validate()

    def validate(self):
        eps = tuple(self.eps) if isinstance(self.eps, (tuple, list)) else (self.eps,)
        if not eps:
            raise ConfigError("eps list is empty")
        self.eps = tuple(float(e) for e in eps)
        for e in self.eps:
            floor = 0.0 if self.r_floor == AUTO else float(self.r_floor)
            validate_cross_section(self.gamma, self.s, self.K, e, floor)
        WeightParams(self.rho, self.kappa)
        NormSpec(self.k, self.ell, self.fd_order)
        NormSpec(self.post_k, self.ell, self.fd_order)
        if self.L < 2.0:
            raise ConfigError(f"L must be >= 2 so the unit window fits, got {self.L!r}")
        if self.active_dims not in (1, 3):
            raise ConfigError(f"active_dims must be 1 or 3, got {self.active_dims!r}")
        if self.n_v < 4:
            raise ConfigError(f"n_v must be >= 4, got {self.n_v!r}")
        if self.n_x < 2 or self.n_steps < 1 or self.n_max < 1:
            raise ConfigError("n_x >= 2, n_steps >= 1 and n_max >= 1 are required")
        for name in ("v_max", "tol", "C1", "C2"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if self.T != AUTO and not float(self.T) > 0:
            raise ConfigError(f"T must be > 0 or auto, got {self.T!r}")
        for name in ("C_kappa", "C_moment"):
            val = getattr(self, name)
            if val != AUTO and float(val) < 0:
                raise ConfigError(f"{name} must be >= 0 or auto, got {val!r}")

    def with_eps(self, eps):
        return dataclasses.replace(self, eps=(float(eps),),
                                   scenario_params=dict(self.scenario_params))

    def solver_kwargs(self, eps=None):
        """Keyword arguments for :class:`ulboltz.solver.PicardSolver`."""
        return dict(
            v_max=self.v_max, n_v=self.n_v, L=self.L, n_x=self.n_x,
            active_dims=self.active_dims, gamma=self.gamma, s=self.s, K=self.K,
            eps=self.eps[0] if eps is None else eps,
            r_floor=None if self.r_floor == AUTO else float(self.r_floor),
            rho=self.rho, kappa=self.kappa, n_theta=self.n_theta, n_phi=self.n_phi,
            k=self.k, ell=self.ell, fd_order=self.fd_order,
            T=None if self.T == AUTO else float(self.T), n_steps=self.n_steps,
            tol=self.tol, n_max=self.n_max, C1=self.C1, C2=self.C2)

    def dumps(self):
        """Echo serialization; :func:`loads` of the result reproduces the config."""
        lines = []
        for f in dataclasses.fields(self):
            if f.name == "scenario_params":
                continue
            val = getattr(self, f.name)
            if f.name == "eps":
                val = ", ".join(repr(e) for e in val)
            lines.append(f"{f.name} = {_format(val)}")
        for key in sorted(self.scenario_params):
            lines.append(f"scenario.{key} = {_format(self.scenario_params[key])}")
        return "\n".join(lines) + "\n"


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_INT_KEYS = {"active_dims", "n_x", "n_v", "n_theta", "n_phi", "k", "fd_order",
             "post_k", "n_steps", "n_max", "seed"}
_STR_KEYS = {"scenario", "out"}
_AUTO_KEYS = {"r_floor", "T", "C_kappa", "C_moment"}


def _format(val):
    if isinstance(val, float):
        return repr(val)
    return str(val)


def _parse_number(text, as_int, key, line):
    try:
        if as_int:
            val = float(text)
            if val != int(val):
                raise ValueError
            return int(val)
        return float(text)
    except ValueError:
        kind = "integer" if as_int else "number"
        raise ConfigError(f"{key}: expected a {kind}, got {text!r}", line) from None


def _parse_value(key, text, line):
    if key in _STR_KEYS:
        return text
    if key == "eps":
        items = [t.strip() for t in text.split(",") if t.strip()]
        return tuple(_parse_number(t, False, key, line) for t in items)
    if key in _AUTO_KEYS and text.lower() == AUTO:
        return AUTO
    return _parse_number(text, key in _INT_KEYS, key, line)


def _scenario_value(text):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def loads(text):
    """Parse configuration text into a validated :class:`ExperimentConfig`."""
    values, scen = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, val = (p.strip() for p in body.partition("="))
        if not key or not val:
            raise ConfigError(f"empty key or value in {raw.strip()!r}", lineno)
        if key.startswith("scenario."):
            scen[key[len("scenario."):]] = _scenario_value(val)
            continue
        if key not in _FIELDS or key == "scenario_params":
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        values[key] = _parse_value(key, val, lineno)
    try:
        return ExperimentConfig(**values, scenario_params=scen)
    except (ConfigError, AdmissibilityError):
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path):
    return loads(Path(path).read_text())
