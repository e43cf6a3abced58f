"""Experiment configuration files (TOML, versioned by ``schema_version``)."""

from __future__ import annotations

import copy
import enum
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .dispersion import Form, ModelParams
from .final_state import in_theorem_range
from .grid import Grid
from .profiles import AnalyticProfile, Gaussian, HermiteGaussian, scaled_to_h0s

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """The configuration file is malformed or violates an invariant."""


class ExploratoryWarning(UserWarning):
    """Parameters fall outside the ranges covered by the decay theorems."""


class Suite(enum.Enum):
    PROPAGATE = "propagate"
    PROFILE_ERROR = "profile_error"
    SCATTER = "scatter"
    STRICHARTZ = "strichartz"
    DISPERSION_TABLE = "dispersion_table"


# defaults per suite; anything not listed here is rejected as a typo
SUITE_DEFAULTS: dict[Suite, dict[str, Any]] = {
    Suite.PROPAGATE: {
        "t_final": 10.0,
        "dt": 0.01,
        "snapshots": [],
        "gauge_check": False,
        "tail_guard": True,
    },
    Suite.PROFILE_ERROR: {
        "times": [4.0, 8.0, 16.0, 32.0, 64.0],
        "r": [2.0],
        "pointwise_time": 0.0,
        "pointwise_points": 41,
        "sobolev_s": 0.0,
        "sobolev_times": [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
    },
    Suite.SCATTER: {
        "t_start": 8.0,
        "t_max": 128.0,
        "per_unit_log": 100.0,
        "alpha_weight": 0.0,
        "max_iter": 12,
        "contraction_tol": 1e-10,
        "max_dt": 0.05,
        "slope_bound": 0.0,
    },
    Suite.STRICHARTZ: {
        "pairs": [[math.inf, 2.0]],
        "window": [1.0, 2.0],
        "samples": 64,
    },
    Suite.DISPERSION_TABLE: {
        "cases": [[2, 2.5], [3, 2.0]],
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    suite: Suite
    model: ModelParams
    grid: Grid
    profile: AnalyticProfile
    params: dict
    seed: int = 0
    raw: dict = field(default_factory=dict, compare=False)
    exploratory: bool = False


def _float_list(v, name: str) -> list:
    if not isinstance(v, (list, tuple)):
        raise ConfigError(f"{name} must be a list")
    return [float(x) for x in v]


def _parse_model(tbl: dict) -> ModelParams:
    tbl = dict(tbl)
    form = Form(tbl.pop("form", "canonical"))
    lam = float(tbl.pop("lam", 1.0))
    p = float(tbl.pop("p", 3.0))
    if form is Form.CANONICAL:
        m = ModelParams.canonical(lam, p)
    elif form is Form.NON_ELLIPTIC:
        m = ModelParams.non_elliptic(int(tbl.pop("sign", 1)), lam, p)
    else:
        ap = tbl.pop("alpha_perp", None)
        m = ModelParams.general(
            float(tbl.pop("alpha", 0.5)),
            float(tbl.pop("beta", 0.0)),
            float(tbl.pop("gamma", -0.25)),
            lam,
            p,
            None if ap is None else float(ap),
        )
    if tbl:
        raise ConfigError(f"unknown [model] keys: {sorted(tbl)}")
    return m


def _parse_grid(tbl: dict) -> Grid:
    try:
        L = tbl["half_length"]
        N = tbl["n_points"]
    except KeyError as e:
        raise ConfigError(f"[grid] needs {e.args[0]}") from None
    extra = set(tbl) - {"half_length", "n_points"}
    if extra:
        raise ConfigError(f"unknown [grid] keys: {sorted(extra)}")
    L = tuple(float(x) for x in L) if isinstance(L, list) else (float(L),)
    N = tuple(int(x) for x in N) if isinstance(N, list) else (int(N),)
    return Grid(L, N)


def _parse_profile(tbl: dict, d: int) -> AnalyticProfile:
    tbl = dict(tbl)
    kind = tbl.pop("kind", "gaussian")
    width = tbl.pop("width", 1.0)
    width = tuple(width) if isinstance(width, list) else float(width)
    center = tbl.pop("center", 0.0)
    center = tuple(center) if isinstance(center, list) else float(center)
    carrier = tbl.pop("carrier", 0.0)
    carrier = tuple(carrier) if isinstance(carrier, list) else float(carrier)
    order = tbl.pop("order", 0)
    amp = tbl.pop("amplitude", 1.0)
    amp = complex(*amp) if isinstance(amp, list) else float(amp)
    target = tbl.pop("h0s_target", None)
    s = float(tbl.pop("h0s_s", 0.0))
    if tbl:
        raise ConfigError(f"unknown [profile] keys: {sorted(tbl)}")
    if kind == "gaussian":
        psi = Gaussian(d, amp, width, center, carrier)
    elif kind == "hermite":
        order = tuple(order) if isinstance(order, list) else int(order)
        psi = HermiteGaussian(d, amp, width, order, center, carrier)
    else:
        raise ConfigError(f"unknown profile kind {kind!r}")
    if target is not None:
        psi = scaled_to_h0s(psi, float(target), s)
    return psi


def _parse_params(suite: Suite, tbl: dict) -> dict:
    defaults = SUITE_DEFAULTS[suite]
    extra = set(tbl) - set(defaults)
    if extra:
        raise ConfigError(f"unknown [{suite.value}] keys: {sorted(extra)}")
    params = {**defaults, **tbl}
    if suite is Suite.PROFILE_ERROR:
        params["times"] = _float_list(params["times"], "times")
        params["r"] = _float_list(params["r"], "r")
        params["sobolev_times"] = _float_list(params["sobolev_times"], "sobolev_times")
        if 0 < len(params["times"]) < 4:
            raise ConfigError("profile_error needs at least 4 times for a fit (or none to skip it)")
    elif suite is Suite.SCATTER:
        if not 3 <= params["t_start"] < params["t_max"]:
            raise ConfigError("scatter needs 3 <= t_start < t_max")
    elif suite is Suite.STRICHARTZ:
        params["pairs"] = [[float(q), float(r)] for q, r in params["pairs"]]
        params["window"] = _float_list(params["window"], "window")
        if len(params["window"]) != 2 or not 0 <= params["window"][0] < params["window"][1]:
            raise ConfigError("strichartz window must be [t0, t1] with 0 <= t0 < t1")
        if int(params["samples"]) < 64:
            raise ConfigError("strichartz needs samples >= 64")
    elif suite is Suite.PROPAGATE:
        if params["dt"] == 0 or params["t_final"] == 0:
            raise ConfigError("propagate needs non-zero dt and t_final")
    return params


def parse_config(data: dict) -> ExperimentConfig:
    raw = copy.deepcopy(data)
    data = dict(data)
    version = data.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    try:
        name = str(data.pop("name"))
        suite = Suite(data.pop("suite"))
    except KeyError as e:
        raise ConfigError(f"missing top-level key {e.args[0]!r}") from None
    except ValueError as e:
        raise ConfigError(str(e)) from None
    seed = int(data.pop("seed", 0))
    try:
        model = _parse_model(data.pop("model", {}))
        grid = _parse_grid(data.pop("grid", {}))
        profile = _parse_profile(data.pop("profile", {}), grid.d)
        params = _parse_params(suite, data.pop(suite.value, {}))
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from None
    if data:
        raise ConfigError(f"unknown top-level keys: {sorted(data)}")
    exploratory = False
    if suite is Suite.SCATTER and not in_theorem_range(grid.d, model.p):
        exploratory = True
        warnings.warn(f"(d, p) = ({grid.d}, {model.p}) is outside the theorem ranges; run is exploratory",
                      ExploratoryWarning, stacklevel=2)
    return ExperimentConfig(name, suite, model, grid, profile, params, seed, raw, exploratory)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    return parse_config(data)
