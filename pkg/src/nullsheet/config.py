"""Run configuration: YAML schema, validation, environment overrides.

A run is described by one YAML document with nested blocks; every numeric
tolerance knob of the pipeline is exposed here so runs are reproducible
from the file alone.  Any key can be overridden through environment
variables prefixed ``NULLSHEET_``, with ``__`` separating nesting levels
(e.g. ``NULLSHEET_SOLVER__REL_TOL=1e-8``).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import ConfigError
from .expressions import evaluate_scalar
from .initial_data import (
    InitialCurve,
    curve_from_expressions,
    curve_from_samples,
)
from .spacetime import SchwarzschildParams, Spacetime, minkowski_spherical, schwarzschild

ENV_PREFIX = "NULLSHEET_"


@dataclass(frozen=True)
class SpacetimeConfig:
    type: str = "schwarzschild"
    mass: float | None = None


@dataclass(frozen=True)
class InitialDataConfig:
    phi: list | str = field(default_factory=list)
    psi: list | str = field(default_factory=list)
    theta_range: tuple[float, float] = (0.0, 2.0 * math.pi)
    samples: int = 64
    periodic: bool = False
    signs: tuple[int, ...] = (1, 1)


@dataclass(frozen=True)
class SolverConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    t_end: float = 5.0
    max_steps: int = 100_000
    eps_horizon: float = 1e-8
    eps_axis: float = 1e-8


@dataclass(frozen=True)
class OutputConfig:
    format: str = "csv"
    path: str = "surface.csv"
    t_samples: int = 11
    theta_samples: int | None = None  # None: reuse the characteristic grid


@dataclass(frozen=True)
class OracleBlockConfig:
    example: int = 1
    case: str = "auto"
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CompareConfig:
    tol: float = 1e-6


@dataclass(frozen=True)
class RunConfig:
    spacetime: SpacetimeConfig
    initial_data: InitialDataConfig
    solver: SolverConfig
    output: OutputConfig
    oracle: OracleBlockConfig | None
    compare: CompareConfig
    seed: int = 0


_KNOWN_BLOCKS = {
    "spacetime",
    "initial_data",
    "solver",
    "output",
    "oracle",
    "compare",
    "seed",
}


def _require(mapping: dict, key: str, path: str):
    if key not in mapping or mapping[key] is None:
        raise ConfigError(f"{path}.{key}", "required field is missing")
    return mapping[key]


def _as_float(value, path: str) -> float:
    if isinstance(value, bool):
        raise ConfigError(path, f"expected a real number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return evaluate_scalar(value)
        except Exception as exc:
            raise ConfigError(path, f"not a number: {value!r} ({exc})") from exc
    raise ConfigError(path, f"expected a real number, got {value!r}")


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return value


def _as_bool(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(path, f"expected a boolean, got {value!r}")
    return value


def _check_mapping(value, path: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected a mapping, got {type(value).__name__}")
    return value


def parse_config(raw: dict) -> RunConfig:
    """Validate a raw mapping against the schema, applying defaults."""
    raw = _check_mapping(raw, "<root>")
    unknown = set(raw) - _KNOWN_BLOCKS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown top-level key")

    st_raw = _check_mapping(raw.get("spacetime", {}), "spacetime")
    st_type = st_raw.get("type", "schwarzschild")
    if st_type not in ("schwarzschild", "minkowski_spherical"):
        raise ConfigError("spacetime.type", f"unknown spacetime {st_type!r}")
    mass = None
    if st_type == "schwarzschild":
        mass = _as_float(_require(st_raw, "mass", "spacetime"), "spacetime.mass")
        if mass <= 0:
            raise ConfigError("spacetime.mass", f"must be positive, got {mass}")
    spacetime_cfg = SpacetimeConfig(type=st_type, mass=mass)

    id_raw = _check_mapping(raw.get("initial_data", {}), "initial_data")
    phi = _require(id_raw, "phi", "initial_data")
    psi = _require(id_raw, "psi", "initial_data")
    for name, value in (("phi", phi), ("psi", psi)):
        if isinstance(value, str):
            continue  # sample-file path
        if not isinstance(value, list) or len(value) != 4:
            raise ConfigError(
                f"initial_data.{name}",
                "expected 4 expressions or a sample-file path",
            )
    tr_raw = id_raw.get("theta_range", [0.0, 2.0 * math.pi])
    if not isinstance(tr_raw, (list, tuple)) or len(tr_raw) != 2:
        raise ConfigError("initial_data.theta_range", "expected [min, max]")
    theta_range = (
        _as_float(tr_raw[0], "initial_data.theta_range[0]"),
        _as_float(tr_raw[1], "initial_data.theta_range[1]"),
    )
    if not theta_range[1] > theta_range[0]:
        raise ConfigError("initial_data.theta_range", "max must exceed min")
    samples = _as_int(id_raw.get("samples", 64), "initial_data.samples")
    if samples < 4:
        raise ConfigError("initial_data.samples", "need at least 4 characteristics")
    periodic = _as_bool(id_raw.get("periodic", False), "initial_data.periodic")
    signs_raw = id_raw.get("signs", [1, 1])
    if not isinstance(signs_raw, list) or not all(s in (1, -1) for s in signs_raw):
        raise ConfigError("initial_data.signs", "expected a list of +1/-1 flags")
    initial_cfg = InitialDataConfig(
        phi=phi,
        psi=psi,
        theta_range=theta_range,
        samples=samples,
        periodic=periodic,
        signs=tuple(signs_raw),
    )

    sv_raw = _check_mapping(raw.get("solver", {}), "solver")
    solver_cfg = SolverConfig(
        rel_tol=_as_float(sv_raw.get("rel_tol", 1e-10), "solver.rel_tol"),
        abs_tol=_as_float(sv_raw.get("abs_tol", 1e-12), "solver.abs_tol"),
        t_end=_as_float(sv_raw.get("t_end", 5.0), "solver.t_end"),
        max_steps=_as_int(sv_raw.get("max_steps", 100_000), "solver.max_steps"),
        eps_horizon=_as_float(sv_raw.get("eps_horizon", 1e-8), "solver.eps_horizon"),
        eps_axis=_as_float(sv_raw.get("eps_axis", 1e-8), "solver.eps_axis"),
    )
    if solver_cfg.t_end <= 0:
        raise ConfigError("solver.t_end", "must be positive")

    out_raw = _check_mapping(raw.get("output", {}), "output")
    out_format = out_raw.get("format", "csv")
    if out_format not in ("csv", "json"):
        raise ConfigError("output.format", f"unknown format {out_format!r}")
    theta_samples = out_raw.get("theta_samples")
    if theta_samples is not None:
        theta_samples = _as_int(theta_samples, "output.theta_samples")
    output_cfg = OutputConfig(
        format=out_format,
        path=str(out_raw.get("path", "surface." + out_format)),
        t_samples=_as_int(out_raw.get("t_samples", 11), "output.t_samples"),
        theta_samples=theta_samples,
    )
    if output_cfg.t_samples < 2:
        raise ConfigError("output.t_samples", "need at least 2 time samples")

    oracle_cfg = None
    if raw.get("oracle") is not None:
        or_raw = _check_mapping(raw["oracle"], "oracle")
        example = _as_int(_require(or_raw, "example", "oracle"), "oracle.example")
        if example not in (1, 2, 3):
            raise ConfigError("oracle.example", f"must be 1, 2 or 3, got {example}")
        case = str(or_raw.get("case", "auto"))
        if case not in ("auto", "I", "II", "III"):
            raise ConfigError("oracle.case", f"must be auto/I/II/III, got {case!r}")
        oracle_cfg = OracleBlockConfig(
            example=example,
            case=case,
            params=_check_mapping(or_raw.get("params", {}), "oracle.params"),
        )

    cmp_raw = _check_mapping(raw.get("compare", {}), "compare")
    compare_cfg = CompareConfig(tol=_as_float(cmp_raw.get("tol", 1e-6), "compare.tol"))

    seed = _as_int(raw.get("seed", 0), "seed")

    return RunConfig(
        spacetime=spacetime_cfg,
        initial_data=initial_cfg,
        solver=solver_cfg,
        output=output_cfg,
        oracle=oracle_cfg,
        compare=compare_cfg,
        seed=seed,
    )


def apply_env_overrides(raw: dict, environ=None) -> dict:
    """Overlay NULLSHEET_* environment variables onto the raw mapping."""
    environ = os.environ if environ is None else environ
    for key, value in sorted(environ.items()):
        if not key.startswith(ENV_PREFIX):
            continue
        parts = [p.lower() for p in key[len(ENV_PREFIX):].split("__") if p]
        if not parts:
            continue
        node = raw
        for part in parts[:-1]:
            nxt = node.get(part)
            if not isinstance(nxt, dict):
                nxt = {}
                node[part] = nxt
            node = nxt
        node[parts[-1]] = yaml.safe_load(value)
    return raw


def load_config(path, environ=None) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "configuration must be a mapping")
    raw = apply_env_overrides(raw, environ=environ)
    return parse_config(raw)


def build_spacetime(cfg: RunConfig) -> Spacetime:
    if cfg.spacetime.type == "schwarzschild":
        return schwarzschild(SchwarzschildParams(m=cfg.spacetime.mass))
    return minkowski_spherical()


def _load_samples(path: str, field_path: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2)
    except OSError as exc:
        raise ConfigError(field_path, f"cannot read sample file {path!r}: {exc}")
    if data.shape[1] != 5:
        raise ConfigError(
            field_path,
            f"sample file must have 5 columns (vartheta + 4 components), "
            f"got {data.shape[1]}",
        )
    return data[:, 0], data[:, 1:]


def build_curve(cfg: RunConfig) -> InitialCurve:
    idc = cfg.initial_data
    if isinstance(idc.phi, str) or isinstance(idc.psi, str):
        if not (isinstance(idc.phi, str) and isinstance(idc.psi, str)):
            raise ConfigError(
                "initial_data", "phi and psi must both be files or both expressions"
            )
        th_phi, phi_vals = _load_samples(idc.phi, "initial_data.phi")
        th_psi, psi_vals = _load_samples(idc.psi, "initial_data.psi")
        if len(th_phi) != len(th_psi) or not np.allclose(th_phi, th_psi):
            raise ConfigError(
                "initial_data.psi", "sample grids of phi and psi files differ"
            )
        return curve_from_samples(th_phi, phi_vals, psi_vals, periodic=idc.periodic)
    try:
        return curve_from_expressions(
            [str(e) for e in idc.phi],
            [str(e) for e in idc.psi],
            idc.theta_range,
            periodic=idc.periodic,
        )
    except Exception as exc:
        raise ConfigError("initial_data", f"cannot build curve: {exc}") from exc
