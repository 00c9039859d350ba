"""Run configuration: JSON schema, defaults and override resolution.

Precedence, lowest to highest: built-in defaults, the config file,
``SEASURROGATE_*`` environment variables, command-line flags.  The fully
resolved document is written next to every command's outputs so a run can
be replayed with ``--config <out_dir>/resolved_config.json``.
"""

import copy
import os

import jsonschema

from . import io
from .errors import ConfigError, MissingArtifactError

ENV_PREFIX = "SEASURROGATE_"
RESOLVED_NAME = "resolved_config.json"

_POS_INT = {"type": "integer", "minimum": 1}
_NONNEG_INT = {"type": "integer", "minimum": 0}
_POS_NUM = {"type": "number", "exclusiveMinimum": 0}
_FRACTION = {"type": "number", "exclusiveMinimum": 0, "maximum": 1}
_POINT = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}


def _block(properties, required=()):
    return {"type": "object", "properties": properties, "required": list(required),
            "additionalProperties": False}


SCHEMA = _block({
    "seed": _NONNEG_INT,
    "vessel_preset": {"type": "string", "minLength": 1},
    "sea_state": {"oneOf": [{"type": "null"}, _block({
        "hs": _POS_NUM,
        "tp": _POS_NUM,
        "t1": _POS_NUM,
        "depth": {"oneOf": [_POS_NUM, {"enum": ["deep"]}]},
        "gravity": _POS_NUM,
        "heading_deg": {"type": "number"},
        "gamma": {"type": "number", "minimum": 1},
    }, required=["hs"])]},
    "discretization": _block({
        "n_components": _POS_INT,
        "energy_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "omega_min": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "omega_max": {"type": ["number", "null"], "exclusiveMinimum": 0},
    }),
    "dataset": _block({
        "num_sequences": _POS_INT,
        "steps": {"type": "integer", "minimum": 2},
        "num_test": _NONNEG_INT,
        "train_fraction": _FRACTION,
        "seeds": {"type": ["array", "null"], "items": _NONNEG_INT},
        "probes": {"type": ["array", "null"], "items": _POINT, "minItems": 1},
    }),
    "training": _block({
        "model": {"enum": ["recurrent", "functional"]},
        "cell_kind": {"enum": ["lstm", "gru", "vanilla"]},
        "layers": _POS_INT,
        "neurons": _POS_INT,
        "train_steps": _NONNEG_INT,
        "lr": _POS_NUM,
        "lr_final_ratio": _FRACTION,
        "clip_norm": _POS_NUM,
        "tbptt_len": _POS_INT,
        "log_every": _POS_INT,
    }),
    "functional": _block({
        "hidden": _POS_INT,
        "m": _POS_INT,
        "half_width": _POS_NUM,
        "lr": _POS_NUM,
        "steps": _NONNEG_INT,
        "causal": {"type": "boolean"},
        "probe": _NONNEG_INT,
        "log_every": _POS_INT,
    }),
    "sweep": _block({
        "cell_kinds": {"type": "array", "items": {"enum": ["lstm", "gru", "vanilla"]}, "minItems": 1},
        "layers": {"type": "array", "items": _POS_INT, "minItems": 1},
        "neurons": {"type": "array", "items": _POS_INT, "minItems": 1},
        "train_steps": {"type": "array", "items": _NONNEG_INT, "minItems": 1},
        "num_sequences": {"type": "array", "items": _POS_INT, "minItems": 1},
        "train_fractions": {"type": "array", "items": _FRACTION, "minItems": 1},
        "workers": _POS_INT,
    }),
    "io": _block({
        "out_dir": {"type": "string"},
        "dataset_dir": {"type": ["string", "null"]},
        "checkpoint": {"type": ["string", "null"]},
    }),
})

DEFAULTS = {
    "seed": 0,
    "vessel_preset": "catamaran-2dof",
    "sea_state": None,  # the preset's bundled sea state
    "discretization": {"n_components": 200, "energy_fraction": 0.999, "omega_min": None, "omega_max": None},
    "dataset": {"num_sequences": 4, "steps": 8000, "num_test": 1, "train_fraction": 1.0, "seeds": None,
                "probes": None},
    "training": {"model": "recurrent", "cell_kind": "lstm", "layers": 1, "neurons": 20, "train_steps": 2000,
                 "lr": 5e-3, "lr_final_ratio": 0.05, "clip_norm": 1.0, "tbptt_len": 64, "log_every": 100},
    "functional": {"hidden": 64, "m": 32, "half_width": 2.0, "lr": 1e-2, "steps": 2000, "causal": True,
                   "probe": 0, "log_every": 100},
    "sweep": {"cell_kinds": ["lstm"], "layers": [1, 3], "neurons": [15], "train_steps": [3000],
              "num_sequences": [3], "train_fractions": [2 / 3, 1 / 2, 1 / 4], "workers": 1},
    "io": {"out_dir": "run", "dataset_dir": None, "checkpoint": None},
}


def _merge(base, update):
    out = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def validate(doc):
    """Raise :class:`ConfigError` naming the offending field."""
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None
    sea = doc.get("sea_state")
    if sea and ("tp" in sea) == ("t1" in sea):
        raise ConfigError("config error at sea_state: give exactly one of 'tp' or 't1'")


def env_overrides(environ=None):
    """Overrides from ``SEASURROGATE_SEED``, ``_OUT_DIR``, ``_THREADS``, ``_PRESET``."""
    environ = os.environ if environ is None else environ
    out = {}
    try:
        if ENV_PREFIX + "SEED" in environ:
            out["seed"] = int(environ[ENV_PREFIX + "SEED"])
        if ENV_PREFIX + "THREADS" in environ:
            out.setdefault("sweep", {})["workers"] = int(environ[ENV_PREFIX + "THREADS"])
    except ValueError as exc:
        raise ConfigError(f"bad environment override: {exc}") from None
    if ENV_PREFIX + "OUT_DIR" in environ:
        out.setdefault("io", {})["out_dir"] = environ[ENV_PREFIX + "OUT_DIR"]
    if ENV_PREFIX + "PRESET" in environ:
        out["vessel_preset"] = environ[ENV_PREFIX + "PRESET"]
    return out


def load(path=None, overrides=None, environ=None):
    """Resolve a full configuration document.

    Parameters
    ----------
    path : path, optional
        JSON config file; may be partial.
    overrides : dict, optional
        Highest-precedence values (command-line flags).
    """
    doc = copy.deepcopy(DEFAULTS)
    if path is not None:
        if not os.path.exists(path):
            raise MissingArtifactError(path)
        user = io.read_json(path)
        if not isinstance(user, dict):
            raise ConfigError("config file must hold a JSON object")
        validate(_merge(DEFAULTS, user))
        doc = _merge(doc, user)
    doc = _merge(doc, env_overrides(environ))
    doc = _merge(doc, overrides or {})
    validate(doc)
    return doc


def write_resolved(doc, directory):
    io.write_json(os.path.join(directory, RESOLVED_NAME), doc)
