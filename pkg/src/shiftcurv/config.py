"""Problem configuration files (JSON) and the f~ presets they name."""

from dataclasses import asdict, dataclass

import numpy as np
from numpy.polynomial import legendre

from . import sphere
from .errors import NonPositiveDataError
from .solver import ProblemSpec
from .sphere import ScalarField

PRESETS = ("constant", "even_quadratic", "harmonic_even")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass
class Config:
    n: int
    k: int
    n_theta: int
    n_phi: int
    f_tilde_type: str
    f_tilde_params: dict
    gamma: object = "auto"
    steps: int = 10
    min_dt: float = 1e-4
    tol: float = 1e-10
    max_iter: int = 25
    seed: int = 0
    verify_tol: float = 2e-2

    def to_dict(self):
        """Canonical JSON form (what solution files echo back)."""
        d = asdict(self)
        return {
            "n": d["n"],
            "k": d["k"],
            "grid": {"n_theta": d["n_theta"], "n_phi": d["n_phi"]},
            "f_tilde": {"type": d["f_tilde_type"], "params": d["f_tilde_params"]},
            "gamma": d["gamma"],
            "continuation": {"steps": d["steps"], "min_dt": d["min_dt"]},
            "newton": {"tol": d["tol"], "max_iter": d["max_iter"]},
            "seed": d["seed"],
            "verify": {"tol": d["verify_tol"]},
        }


def _get(mapping, key, kind, default=None, required=True):
    if key not in mapping:
        if required:
            raise ConfigError(f"missing field '{key}'")
        return default
    val = mapping[key]
    if kind is int and (isinstance(val, bool) or not isinstance(val, int)):
        raise ConfigError(f"field '{key}' must be an integer")
    if kind is float and (isinstance(val, bool) or not isinstance(val, (int, float))):
        raise ConfigError(f"field '{key}' must be a number")
    if kind is str and not isinstance(val, str):
        raise ConfigError(f"field '{key}' must be a string")
    if kind is dict and not isinstance(val, dict):
        raise ConfigError(f"field '{key}' must be an object")
    return float(val) if kind is float else val


def parse_config(data):
    """Validate a decoded JSON object and return a Config."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    n = _get(data, "n", int)
    k = _get(data, "k", int)
    if n not in (1, 2):
        raise ConfigError(f"n must be 1 or 2, got {n}")
    if not 1 <= k <= n:
        raise ConfigError(f"k must satisfy 1 <= k <= n, got k={k}")
    grid = _get(data, "grid", dict)
    n_phi = _get(grid, "n_phi", int)
    n_theta = _get(grid, "n_theta", int, default=1, required=(n == 2))
    ft = _get(data, "f_tilde", dict)
    ftype = _get(ft, "type", str)
    if ftype not in PRESETS:
        raise ConfigError(f"unknown f_tilde preset '{ftype}'")
    params = _get(ft, "params", dict, default={}, required=False)
    gamma = data.get("gamma", "auto")
    if gamma != "auto":
        if isinstance(gamma, bool) or not isinstance(gamma, (int, float)) or gamma <= 0:
            raise ConfigError("gamma must be 'auto' or a positive number")
        gamma = float(gamma)
    cont = _get(data, "continuation", dict, default={}, required=False)
    newton = _get(data, "newton", dict, default={}, required=False)
    ver = _get(data, "verify", dict, default={}, required=False)
    cfg = Config(
        n=n, k=k, n_theta=n_theta, n_phi=n_phi,
        f_tilde_type=ftype, f_tilde_params=params, gamma=gamma,
        steps=_get(cont, "steps", int, 10, required=False),
        min_dt=_get(cont, "min_dt", float, 1e-4, required=False),
        tol=_get(newton, "tol", float, 1e-10, required=False),
        max_iter=_get(newton, "max_iter", int, 25, required=False),
        seed=_get(data, "seed", int, 0, required=False),
        verify_tol=_get(ver, "tol", float, 2e-2, required=False),
    )
    if cfg.steps < 1 or cfg.max_iter < 1 or cfg.min_dt <= 0 or cfg.tol <= 0:
        raise ConfigError("continuation/newton settings must be positive")
    try:
        build_grid(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def build_grid(cfg):
    return sphere.build_grid(cfg.n, cfg.n_theta if cfg.n == 2 else None, cfg.n_phi)


def _axis(params, n):
    axis = np.asarray(params.get("axis", [0.0] * n + [1.0]), dtype=float)
    if axis.shape != (n + 1,) or not np.linalg.norm(axis) > 0:
        raise ConfigError(f"axis must be a nonzero vector of length {n + 1}")
    return axis / np.linalg.norm(axis)


def _param(params, key, default=None):
    if key not in params:
        if default is None:
            raise ConfigError(f"f_tilde preset needs parameter '{key}'")
        return default
    val = params[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"f_tilde parameter '{key}' must be a number")
    return float(val)


def f_tilde_values(cfg, grid):
    """Evaluate the preset on the grid, raising NonPositiveDataError if f~ <= 0 anywhere.

    constant:        f~ = value
    even_quadratic:  f~ = 1 / (alpha + beta (x.e)^2)
    harmonic_even:   f~ = sum_m coeffs[m] P_{2m}(x.e), required >= floor (default 1e-8)
    """
    p = cfg.f_tilde_params
    if cfg.f_tilde_type == "constant":
        vals = np.full(grid.size, _param(p, "value"))
    elif cfg.f_tilde_type == "even_quadratic":
        z = grid.nodes @ _axis(p, cfg.n)
        denom = _param(p, "alpha") + _param(p, "beta") * z * z
        if np.any(denom <= 0):
            raise NonPositiveDataError("even_quadratic preset: alpha + beta (x.e)^2 must be positive")
        vals = 1.0 / denom
    else:
        coeffs = p.get("coeffs")
        if not isinstance(coeffs, list) or not coeffs or not all(
                isinstance(c, (int, float)) and not isinstance(c, bool) for c in coeffs):
            raise ConfigError("harmonic_even preset needs a non-empty numeric list 'coeffs'")
        z = grid.nodes @ _axis(p, cfg.n)
        series = np.zeros(2 * len(coeffs) - 1)
        series[::2] = coeffs
        # |z| keeps the even series bit-exactly even under x -> -x
        vals = legendre.legval(np.abs(z), series)
        floor = _param(p, "floor", 1e-8)
        if np.min(vals) < floor:
            raise NonPositiveDataError(
                f"harmonic_even preset falls to {np.min(vals):.6g}, below floor {floor:g}")
    if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
        raise NonPositiveDataError("f_tilde must be finite and positive at every node")
    return vals


def build_problem(cfg):
    grid = build_grid(cfg)
    ft = ScalarField(grid, f_tilde_values(cfg, grid))
    gamma = None if cfg.gamma == "auto" else cfg.gamma
    return ProblemSpec(cfg.n, cfg.k, ft, gamma)
