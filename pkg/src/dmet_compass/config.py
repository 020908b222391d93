"""YAML run configuration: schema, validation and conversion to :class:`DmetConfig`.

Example::

    system:
      h_chain: {n: 8, d: 2.5, topology: linear}
    fragments:
      atoms_per_fragment: 2
    solver: compass
    solver_options:
      pool_kind: partial_pairing
      eps1: 1.0e-5
      eps2: 1.0e-7
    dmet:
      tolerance: 1.0e-5
      max_cycles: 50
    output:
      csv: results.csv
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import jsonschema
import yaml

from .driver import SOLVERS, DmetConfig, FcidumpSystem, HChainSystem, SolverOptions
from .embedding import ActiveSpace, FragmentScheme
from .vqe import OptimizerSettings


class ConfigError(ValueError):
    """Invalid configuration; ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


_positive = {"type": "number", "exclusiveMinimum": 0}
_solver = {"type": "string", "enum": list(SOLVERS)}
_active = {
    "type": "object",
    "additionalProperties": False,
    "required": ["n_electrons", "n_orbitals"],
    "properties": {
        "n_electrons": {"type": "integer", "minimum": 0},
        "n_orbitals": {"type": "integer", "minimum": 1},
    },
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["system", "fragments"],
    "properties": {
        "system": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "h_chain": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["n", "d"],
                    "properties": {
                        "n": {"type": "integer", "minimum": 2},
                        "d": _positive,
                        "topology": {"type": "string", "enum": ["linear", "ring"]},
                    },
                },
                "fcidump": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["path"],
                    "properties": {"path": {"type": "string"}, "atom_map_path": {"type": "string"}},
                },
            },
        },
        "fragments": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "atoms_per_fragment": {"type": "integer", "minimum": 1},
                "groups": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 0}},
                },
            },
        },
        "solver": _solver,
        "solvers": {"type": "array", "minItems": 1, "items": _solver},
        "solver_options": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "pool_kind": {"type": "string", "enum": ["partial_pairing", "opposite_spin"]},
                "eps1": _positive,
                "eps2": _positive,
                "cso_set": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "adapt_grad_tol": _positive,
                "optimizer": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "method": {"type": "string", "enum": ["SLSQP", "COBYLA", "Nelder-Mead"]},
                        "gradient": {"type": "string", "enum": ["analytic", "finite-difference"]},
                        "fd_step": _positive,
                        "energy_tol": _positive,
                        "step_tol": _positive,
                        "grad_tol": _positive,
                        "max_iter": {"type": "integer", "minimum": 1},
                    },
                },
            },
        },
        "active_space": {
            "oneOf": [
                _active,
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["per_fragment"],
                    "properties": {
                        "per_fragment": {"type": "object", "patternProperties": {"^[0-9]+$": _active}},
                    },
                },
            ]
        },
        "dmet": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tolerance": _positive,
                "max_cycles": {"type": "integer", "minimum": 1},
                "mu0": {"type": "number"},
                "mu1": {"type": "number"},
                "workers": {"type": "integer", "minimum": 1},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "csv": {"type": "string"},
                "verbosity": {"type": "string", "enum": ["quiet", "info", "debug"]},
            },
        },
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Validated file contents plus the derived driver configuration."""

    dmet: DmetConfig
    solvers: tuple[str, ...]
    csv: str | None
    verbosity: str
    geometry_id: str


def _field_path(error: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in error.absolute_path) or "<root>"


def validate(raw) -> None:
    """Raise :class:`ConfigError` naming the first invalid field."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping")
    system = raw.get("system")
    if isinstance(system, dict):
        sources = [k for k in ("h_chain", "fcidump") if k in system]
        if len(sources) > 1:
            raise ConfigError("give exactly one of h_chain or fcidump, not both", "system")
        if not sources:
            raise ConfigError("one of h_chain or fcidump is required", "system")
    frags = raw.get("fragments")
    if isinstance(frags, dict) and len({"atoms_per_fragment", "groups"} & set(frags)) != 1:
        raise ConfigError("give exactly one of atoms_per_fragment or groups", "fragments")
    errors = sorted(jsonschema.Draft7Validator(SCHEMA).iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError(errors[0].message, _field_path(errors[0]))


def _active_space(raw):
    def counts(d):
        return (int(d["n_electrons"]), int(d["n_orbitals"]))

    if raw is None:
        return None
    if "per_fragment" in raw:
        return {int(k): counts(v) for k, v in raw["per_fragment"].items()}
    return counts(raw)


def from_mapping(raw, base_dir: Path | None = None) -> RunConfig:
    """Build a :class:`RunConfig` from parsed YAML; relative paths resolve against ``base_dir``."""
    validate(raw)
    base_dir = base_dir or Path.cwd()
    sysraw = raw["system"]
    if "h_chain" in sysraw:
        hc = sysraw["h_chain"]
        system = HChainSystem(int(hc["n"]), float(hc["d"]), hc.get("topology", "linear"))
        geometry_id = f"H{system.n}-{system.topology}-d{system.d:g}"
    else:
        fd = sysraw["fcidump"]
        path = (base_dir / fd["path"]).resolve()
        if not path.is_file():
            raise ConfigError(f"FCIDUMP file not found: {path}", "system/fcidump/path")
        amap = fd.get("atom_map_path")
        if amap is not None:
            amap = (base_dir / amap).resolve()
            if not amap.is_file():
                raise ConfigError(f"atom map file not found: {amap}", "system/fcidump/atom_map_path")
            amap = str(amap)
        system = FcidumpSystem(str(path), amap)
        geometry_id = path.stem

    frags = raw["fragments"]
    scheme = (
        int(frags["atoms_per_fragment"])
        if "atoms_per_fragment" in frags
        else FragmentScheme(tuple(tuple(g) for g in frags["groups"]))
    )
    solvers = tuple(raw.get("solvers") or [raw.get("solver", "fci")])
    opts = dict(raw.get("solver_options", {}))
    optimizer = OptimizerSettings(**opts.pop("optimizer", {}))
    if "cso_set" in opts:
        opts["cso_set"] = tuple(opts["cso_set"])
    dm = raw.get("dmet", {})
    try:
        dmet = DmetConfig(
            system=system,
            fragments=scheme,
            solver=raw.get("solver", solvers[0]),
            options=SolverOptions(optimizer=optimizer, **opts),
            active_space=_active_space(raw.get("active_space")),
            tolerance=float(dm.get("tolerance", 1e-5)),
            max_cycles=int(dm.get("max_cycles", 50)),
            mu0=float(dm.get("mu0", 0.0)),
            mu1=float(dm.get("mu1", dm.get("mu0", 0.0) + 1e-3)),
            workers=dm.get("workers"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "dmet") from exc
    out = raw.get("output", {})
    csv = out.get("csv")
    if csv is not None:
        csv = str((base_dir / csv).resolve())
    return RunConfig(dmet, solvers, csv, out.get("verbosity", "info"), geometry_id)


def load_config(path) -> RunConfig:
    """Read and validate a YAML configuration file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"configuration file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML parse error: {exc}") from exc
    return from_mapping(raw, path.parent)
