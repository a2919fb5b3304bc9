"""JSON schemas of the command line outputs."""

_num = {"type": "number"}
_num_or_null = {"type": ["number", "null"]}
_count = {"type": "integer", "minimum": 0}

TEST_OUTCOME = {
    "type": "object",
    "required": ["test", "statistic", "score", "sigma", "threshold", "p_value", "reject",
                 "side", "alpha", "k", "n"],
    "properties": {
        "test": {"enum": ["scale-free", "location-scale-free"]},
        "statistic": _num,
        "score": _num,
        "sigma": {"type": "number", "exclusiveMinimum": 0},
        "threshold": _num_or_null,
        "p_value": {"type": "number", "minimum": 0, "maximum": 1},
        "reject": {"type": "boolean"},
        "side": {"enum": ["left", "right"]},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "k": {"type": "integer", "minimum": 1},
        "n": {"type": "integer", "minimum": 2},
    },
}

_SEPARATOR = {
    "type": "object",
    "required": ["kind", "gamma", "name"],
    "properties": {"kind": {"type": "string"}, "b": _num_or_null, "gamma": _num,
                   "name": {"type": "string"}},
}

TEST = {
    "type": "object",
    "required": ["separator", "observed", "n", "outcomes"],
    "properties": {
        "separator": _SEPARATOR,
        "observed": _count,
        "n": {"type": "integer", "minimum": 2},
        "outcomes": {"type": "array", "items": TEST_OUTCOME, "minItems": 1},
        "behavior": {
            "type": "object",
            "required": ["behavior", "exceed_fraction", "trend_stat", "interval", "reject"],
            "properties": {
                "behavior": {"enum": ["increasing_reject", "decreasing_accept", "oscillating"]},
                "exceed_fraction": {"type": "number", "minimum": 0, "maximum": 1},
                "trend_stat": _num,
                "interval": {"type": "array", "items": {"type": "integer"},
                             "minItems": 2, "maxItems": 2},
                "reject": {"type": "boolean"},
            },
        },
    },
}

_FIT = {
    "type": "object",
    "required": ["model", "params", "loglik", "n"],
    "properties": {
        "model": {"enum": ["Exponential", "Weibull2", "GPD"]},
        "params": {"type": "object", "additionalProperties": _num},
        "loglik": _num,
        "n": {"type": "integer", "minimum": 1},
        "iterations": _count,
    },
}

FIT = {
    "type": "object",
    "required": ["threshold", "n", "mean", "fits"],
    "properties": {
        "threshold": _num_or_null,
        "n": {"type": "integer", "minimum": 1},
        "mean": _num,
        "fits": {"type": "array", "items": _FIT, "minItems": 1},
    },
}

QQ = {
    "type": "object",
    "required": ["exp_quantile", "empirical"],
    "additionalProperties": {"type": "array", "items": _num},
}

CONDITION = {
    "type": "object",
    "required": ["condition", "parameter", "worst_margin", "holds", "witness", "lighter",
                 "heavier"],
    "properties": {
        "condition": {"enum": ["C_zero", "C_delta", "B", "Prop1"]},
        "parameter": _num,
        "worst_margin": _num,
        "holds": {"type": "boolean"},
        "witness": {"type": ["array", "null"], "items": _num},
        "lighter": {"type": "string"},
        "heavier": {"type": "string"},
    },
}

SIMULATE = {
    "type": "object",
    "required": ["spec", "k", "rate", "stderr", "n_errors"],
    "properties": {
        "spec": {"type": "object", "required": ["distribution", "test", "n", "m", "alpha",
                                                 "side", "seed", "k_grid"]},
        "k": {"type": "array", "items": {"type": "integer"}},
        "rate": {"type": "array", "items": {"type": ["number", "null"], "minimum": 0,
                                            "maximum": 1}},
        "stderr": {"type": "array", "items": _num_or_null},
        "n_errors": {"type": "array", "items": _count},
    },
}

CALIBRATE = {
    "type": "object",
    "required": ["kind", "side", "n", "m", "seed", "alpha", "k", "critical_values"],
    "properties": {
        "kind": {"enum": ["hasofer_wang", "ratio"]},
        "side": {"enum": ["left", "right"]},
        "alpha": {"type": "array", "items": _num},
        "k": {"type": "array", "items": {"type": "integer"}},
        "critical_values": {"type": "array", "items": {"type": "array", "items": _num}},
    },
}

SCHEMAS = {"test": TEST, "fit": FIT, "qq": QQ, "check-separability": CONDITION,
           "simulate": SIMULATE, "calibrate": CALIBRATE}
