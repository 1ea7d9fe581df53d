//! JSON schemas of the documents each subcommand writes.

use serde_json::{json, Value};

pub const NAMES: [&str; 8] = ["iomap", "reldeg", "bounds", "abel", "simulate", "montecarlo", "validate", "error"];

fn envelope(command: &str, result: Value) -> Value {
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": format!("cfnet {command}"),
        "type": "object",
        "required": ["tool", "version", "command", "input_sha256", "parameters", "result"],
        "properties": {
            "tool": {"const": "cfnet"},
            "version": {"type": "string"},
            "command": {"const": command},
            "input_sha256": {"type": ["string", "null"], "pattern": "^[0-9a-f]{64}$"},
            "parameters": {"type": "object"},
            "result": result,
        }
    })
}

fn rational() -> Value {
    json!({"type": "string", "pattern": "^-?[0-9]+(/[0-9]+)?$"})
}

fn node_map() -> Value {
    json!({"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}})
}

fn pair() -> Value {
    json!({
        "type": "object",
        "required": ["from", "to", "measured", "measurement", "consistent"],
        "properties": {
            "from": {"type": "integer", "minimum": 1},
            "to": {"type": "integer", "minimum": 1},
            "measured": {"type": ["integer", "null"]},
            "measurement": {
                "type": "object",
                "properties": {
                    "status": {"enum": ["defined", "undefined", "undetermined_at_truncation"]},
                    "degree": {"type": ["integer", "null"]},
                    "leading": {"oneOf": [rational(), {"type": "null"}]},
                    "exact_to": {"type": ["integer", "null"]}
                }
            },
            "consistent": {"type": "boolean"},
            "predicted": {"type": ["integer", "null"]},
            "condition": {"enum": ["fully_connected", "distinct", "repeated_sum_nonzero", "violated_unknown", "no_path"]},
            "certified": {"type": "boolean"},
            "node_degrees": node_map(),
            "accumulated": {"oneOf": [node_map(), {"type": "null"}]},
            "incoming": {"type": "object"},
            "repeated_sums": {"type": "array"}
        }
    })
}

fn validation() -> Value {
    json!({
        "type": "object",
        "required": ["from", "to", "degree", "T", "max_error", "expected_order"],
        "properties": {
            "from": {"type": "integer"}, "to": {"type": "integer"}, "degree": {"type": "integer"},
            "T": {"type": "number"}, "max_error": {"type": "number"}, "expected_order": {"type": "integer"}
        }
    })
}

pub fn schema(name: &str) -> Value {
    match name {
        "iomap" => envelope("iomap", json!({
            "type": "object",
            "required": ["m", "degree", "terms"],
            "properties": {
                "m": {"type": "integer"},
                "degree": {"type": "integer"},
                "terms": {"type": "array", "items": {
                    "type": "object",
                    "required": ["word", "coeff"],
                    "properties": {
                        "word": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                        "coeff": rational()
                    }
                }}
            }
        })),
        "reldeg" => envelope("reldeg", json!({
            "oneOf": [pair(), {"type": "object", "required": ["pairs"], "properties": {"pairs": {"type": "array", "items": pair()}}}]
        })),
        "bounds" => envelope("bounds", json!({
            "type": "object",
            "required": ["Kbar", "Mbar", "m", "M_inf", "t_star"],
            "properties": {
                "Kbar": {"type": "number"}, "Mbar": {"type": "number"}, "m": {"type": "integer"},
                "M_inf": {"type": "number"}, "t_star": {"type": "number"}
            }
        })),
        "abel" => envelope("abel", json!({
            "type": "object",
            "required": ["a", "z", "Mhat"],
            "properties": {
                "a": {"type": "array", "items": {"type": "string"}},
                "z": {"type": "array", "items": rational()},
                "Mhat": {"type": "array", "items": {"type": ["number", "null"]}}
            }
        })),
        "simulate" => envelope("simulate", json!({
            "type": "object",
            "required": ["escape_time", "node_escape_times", "threshold", "integrator", "method"],
            "properties": {
                "escape_time": {"type": ["number", "null"]},
                "node_escape_times": {"type": "array", "items": {"type": ["number", "null"]}},
                "threshold": {"type": ["number", "null"]},
                "integrator": {"type": "string"},
                "method": {"type": "object"},
                "times": {"type": "array", "items": {"type": "number"}},
                "outputs": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
            }
        })),
        "montecarlo" => envelope("montecarlo", json!({
            "type": "object",
            "required": ["pairs", "exact_rechecks", "undefined_connected_pairs"],
            "properties": {
                "pairs": {"type": "array", "items": {
                    "type": "object",
                    "properties": {
                        "from": {"type": "integer"}, "to": {"type": "integer"}, "has_path": {"type": "boolean"},
                        "defined": node_map(), "undefined": {"type": "integer"}, "undetermined": {"type": "integer"}
                    }
                }},
                "exact_rechecks": {"type": "integer"},
                "undefined_connected_pairs": {"type": "integer"},
                "designated": {"type": "object", "properties": {
                    "mean": {"type": "number"}, "min": {"type": "number"}, "max": {"type": "number"},
                    "histogram": {"type": "object", "properties": {
                        "edges": {"type": "array", "items": {"type": "number"}},
                        "counts": {"type": "array", "items": {"type": "integer"}}
                    }}
                }}
            }
        })),
        "validate" => envelope("validate", json!({
            "oneOf": [validation(), {
                "type": "object",
                "required": ["coarse", "fine", "observed_order", "expected_order"],
                "properties": {
                    "coarse": validation(), "fine": validation(),
                    "observed_order": {"type": "number"}, "expected_order": {"type": "integer"}
                }
            }]
        })),
        "error" => json!({
            "$schema": "https://json-schema.org/draft/2020-12/schema",
            "title": "cfnet error",
            "type": "object",
            "required": ["tool", "version", "error"],
            "properties": {
                "tool": {"const": "cfnet"},
                "version": {"type": "string"},
                "error": {
                    "type": "object",
                    "required": ["kind", "message"],
                    "properties": {"kind": {"type": "string"}, "message": {"type": "string"}}
                }
            }
        }),
        _ => unreachable!("schema names are checked by the parser"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_has_a_schema() {
        for name in NAMES {
            assert!(schema(name).is_object());
        }
    }
}
