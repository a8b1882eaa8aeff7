"""JSON run configuration: schema validation, defaults, curve construction.

A config file must name the ``domain`` (radial Fourier coefficients); all
other keys are optional with documented defaults.  Unknown keys are rejected
so typos fail loudly before any computation.  An empty file is treated as an
empty object, which then fails validation with a message naming ``domain``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .geometry import BoundaryCurve

DEFAULTS = {
    "k": 1.0,
    "ntheta": 128,
    "ns": 64,
    "seed": 0,
    "max_iter": 4000,
    "tol_factor": 1e-6,
    "output_dir": None,
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["domain"],
    "properties": {
        "domain": {
            "type": "object",
            "additionalProperties": False,
            "required": ["a0"],
            "properties": {
                "a0": {"type": "number", "exclusiveMinimum": 0},
                "cos_coeffs": {"type": "array", "items": {"type": "number"}},
                "sin_coeffs": {"type": "array", "items": {"type": "number"}},
            },
        },
        "mesh": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "ntheta": {"type": "integer", "minimum": 8},
                "ns": {"type": "integer", "minimum": 4},
            },
        },
        "eps": {"type": "number", "exclusiveMinimum": 0},
        "eps_list": {
            "type": "array",
            "items": {"type": "number", "exclusiveMinimum": 0},
            "minItems": 1,
        },
        "k": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "minimizer": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "max_iter": {"type": "integer", "minimum": 0},
                "tol_factor": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "output_dir": {"type": "string"},
    },
}


class ConfigError(ValueError):
    """Config parse/validation failure with a machine-readable record."""

    def __init__(self, message, path="", detail=None):
        super().__init__(message)
        self.record = {"error": "config", "message": message, "path": path}
        if detail:
            self.record.update(detail)


@dataclass
class RunConfig:
    """Validated configuration with defaults resolved."""

    domain: dict
    ntheta: int = DEFAULTS["ntheta"]
    ns: int = DEFAULTS["ns"]
    k: float = DEFAULTS["k"]
    eps: float = None
    eps_list: list = None
    seed: int = DEFAULTS["seed"]
    max_iter: int = DEFAULTS["max_iter"]
    tol_factor: float = DEFAULTS["tol_factor"]
    output_dir: str = None
    raw: dict = field(default_factory=dict, repr=False)

    def curve(self):
        return BoundaryCurve(
            self.domain["a0"],
            self.domain.get("cos_coeffs", ()),
            self.domain.get("sin_coeffs", ()),
        )

    def resolved(self):
        """Flat dict of the effective settings (for manifests)."""
        return {
            "domain": self.domain,
            "ntheta": self.ntheta,
            "ns": self.ns,
            "k": self.k,
            "eps": self.eps,
            "eps_list": self.eps_list,
            "seed": self.seed,
            "max_iter": self.max_iter,
            "tol_factor": self.tol_factor,
            "output_dir": self.output_dir,
        }


def validate_config(data):
    """Schema-check a config object and return the RunConfig with defaults."""
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as err:
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config key {path!r}: {err.message}", path=path) from err
    mesh = data.get("mesh", {})
    minimizer = data.get("minimizer", {})
    return RunConfig(
        domain=dict(data["domain"]),
        ntheta=int(mesh.get("ntheta", DEFAULTS["ntheta"])),
        ns=int(mesh.get("ns", DEFAULTS["ns"])),
        k=float(data.get("k", DEFAULTS["k"])),
        eps=data.get("eps"),
        eps_list=list(data["eps_list"]) if "eps_list" in data else None,
        seed=int(data.get("seed", DEFAULTS["seed"])),
        max_iter=int(minimizer.get("max_iter", DEFAULTS["max_iter"])),
        tol_factor=float(minimizer.get("tol_factor", DEFAULTS["tol_factor"])),
        output_dir=data.get("output_dir"),
        raw=data,
    )


def load_config(path):
    """Read, parse and validate a JSON config file.

    Raises ConfigError with line/field diagnostics on parse or schema
    failure; an empty file validates as {} and therefore reports the missing
    ``domain`` key.
    """
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {p}: {err}") from err
    if not text.strip():
        data = {}
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(
                f"config {p} is not valid JSON: {err.msg} "
                f"(line {err.lineno}, column {err.colno})",
                detail={"line": err.lineno, "column": err.colno},
            ) from err
    if not isinstance(data, dict):
        raise ConfigError(f"config {p} must contain a JSON object")
    return validate_config(data)
