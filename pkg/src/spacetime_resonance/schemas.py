"""JSON schemas of the command configurations."""

from __future__ import annotations

import jsonschema

_SIGN = {"enum": [-1, 1]}
_GRID = {
    "type": "object",
    "properties": {
        "d": {"enum": [2, 3]},
        "N": {"type": "integer", "minimum": 8},
        "L": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["d", "N", "L"],
    "additionalProperties": False,
}
_VEC = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 3}

SYMBOL = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["Q0", "Q0i", "Qij", "expr", "const", "smooth", "phase_over_eta", "inverse"]},
        "signs": {"type": "array", "items": _SIGN, "minItems": 2, "maxItems": 2},
        "speeds": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 3, "maxItems": 3},
        "i": {"type": "integer", "minimum": 1},
        "j": {"type": "integer", "minimum": 1},
        "expr": {"type": "string"},
        "degree": {"type": ["number", "null"]},
        "value": {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]},
        "axis": {"enum": ["xi", "eta", "xi-eta"]},
        "d": {"enum": [2, 3]},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

PHASE = {
    "type": "object",
    "properties": {
        "signs": {"type": "array", "items": _SIGN, "minItems": 2, "maxItems": 2},
        "speeds": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 3, "maxItems": 3},
    },
    "required": ["signs"],
    "additionalProperties": False,
}

RESONANCE = {
    "type": "object",
    "properties": {
        "phase": PHASE,
        "xi": _VEC,
        "grid": _GRID,
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "mode": {"enum": ["cells", "absolute"]},
    },
    "required": ["phase", "xi", "grid", "tol", "mode"],
    "additionalProperties": False,
}

NULLCHECK = {
    "type": "object",
    "properties": {
        "symbol": SYMBOL,
        "phase": PHASE,
        "d": {"enum": [2, 3]},
        "samples_per_shell": {"type": "integer", "minimum": 1},
        "shells": {"type": "integer", "minimum": 4},
        "bulk_samples": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
    },
    "required": ["symbol", "phase", "d", "seed"],
    "additionalProperties": False,
}

PROBE = {
    "type": "object",
    "properties": {
        "symbol": SYMBOL,
        "p": {"type": "number", "minimum": 1},
        "q": {"type": "number", "minimum": 1},
        "r": {"type": "number", "minimum": 1},
        "smoothing": {"type": "number", "minimum": 0},
        "trials": {"type": "integer", "minimum": 1},
        "N_list": {"type": "array", "items": {"type": "integer", "minimum": 8}, "minItems": 1},
        "d": {"enum": [2, 3]},
        "L": {"type": "number", "exclusiveMinimum": 0},
        "rank": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
    },
    "required": ["symbol", "p", "q", "r", "trials", "N_list", "d", "L", "seed"],
    "additionalProperties": False,
}

PROPAGATE = {
    "type": "object",
    "properties": {
        "grid": _GRID,
        "width": {"type": "number", "exclusiveMinimum": 0},
        "speed": {"type": "number", "exclusiveMinimum": 0},
        "times": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
        "window": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    },
    "required": ["grid", "width", "times", "window"],
    "additionalProperties": False,
}

_INTERACTION = {
    "type": "object",
    "properties": {
        "target": {"type": "integer", "minimum": 0},
        "sources": {
            "type": "array",
            "items": {"type": "array", "prefixItems": [{"type": "integer", "minimum": 0}, {"type": "boolean"}], "minItems": 2, "maxItems": 2},
            "minItems": 2,
            "maxItems": 2,
        },
        "symbol": SYMBOL,
        "route": {"enum": ["auto", "direct", "separable"]},
        "coef": {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]},
    },
    "required": ["target", "sources", "symbol"],
    "additionalProperties": False,
}

_INITIAL = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["gaussian"]},
        "eps": {"type": "number", "exclusiveMinimum": 0},
        "width": {"type": "number", "exclusiveMinimum": 0},
        "phase_amplitude": {"type": "number", "minimum": 0},
        "phase_band": {"type": "integer", "minimum": 0},
        "sobolev_index": {"type": "integer", "minimum": 2},
    },
    "required": ["kind", "eps"],
    "additionalProperties": False,
}

SIMULATE = {
    "type": "object",
    "properties": {
        "grid": _GRID,
        "system": {
            "type": "object",
            "properties": {
                "components": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {"sign": _SIGN, "speed": {"type": "number", "exclusiveMinimum": 0}},
                        "required": ["sign", "speed"],
                        "additionalProperties": False,
                    },
                    "minItems": 1,
                },
                "interactions": {"type": "array", "items": _INTERACTION},
                "initial": _INITIAL,
            },
            "required": ["components", "interactions", "initial"],
            "additionalProperties": False,
        },
        "integrator": {
            "type": "object",
            "properties": {
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "t_end": {"type": "number", "exclusiveMinimum": 1},
                "rank": {"type": "integer", "minimum": 1},
            },
            "required": ["dt", "t_end"],
            "additionalProperties": False,
        },
        "reports": {
            "type": "object",
            "properties": {
                "every": {"type": "number", "exclusiveMinimum": 0},
                "times": {"type": "array", "items": {"type": "number", "minimum": 1}},
                "keys": {"type": "array", "items": {"type": "string"}},
                "checkpoints": {"type": "array", "items": {"type": "number", "minimum": 1}},
                "window": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            },
            "additionalProperties": False,
        },
        "xnorm": {
            "type": "object",
            "properties": {
                "N": {"type": "integer", "minimum": 2},
                "eps": {"type": "number", "exclusiveMinimum": 0},
                "gamma": {"type": "number", "exclusiveMinimum": 0},
                "a": {"type": "number", "exclusiveMinimum": 0},
                "b": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "seed": {"type": "integer", "minimum": 0},
    },
    "required": ["grid", "system", "integrator", "reports", "seed"],
    "additionalProperties": False,
}

FIT = {
    "type": "object",
    "properties": {
        "input": {"type": "string"},
        "key": {"type": "string"},
        "window": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    },
    "required": ["input", "key", "window"],
    "additionalProperties": False,
}

REPORT = {
    "type": "object",
    "properties": {
        "runs": {"type": "array", "items": {"type": "string"}},
        "keys": {"type": "array", "items": {"type": "string"}},
        "window": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    },
    "required": ["runs"],
    "additionalProperties": False,
}

SCHEMAS = {
    "resonance": RESONANCE,
    "nullcheck": NULLCHECK,
    "probe": PROBE,
    "propagate": PROPAGATE,
    "simulate": SIMULATE,
    "fit": FIT,
    "report": REPORT,
}


def validate(command: str, config: dict) -> None:
    """Raise :class:`jsonschema.ValidationError` if ``config`` does not match the command schema."""
    jsonschema.validate(config, SCHEMAS[command], cls=jsonschema.Draft202012Validator)
