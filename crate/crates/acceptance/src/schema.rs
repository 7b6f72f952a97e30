//! Validator for the JSON Schema keywords the published schemas use.
//! Unknown keywords are an error so a schema can never pass by being ignored.

use regex::Regex;
use serde_json::{Map, Value};

const ANNOTATIONS: [&str; 4] = ["$schema", "$id", "title", "description"];

pub fn validate(schema: &Value, instance: &Value) -> Result<(), String> {
    check(schema, instance, "$")
}

fn check(schema: &Value, v: &Value, path: &str) -> Result<(), String> {
    let s = schema
        .as_object()
        .ok_or_else(|| format!("{path}: schema node is not an object"))?;
    for (key, rule) in s {
        match key.as_str() {
            k if ANNOTATIONS.contains(&k) => {}
            "type" => check_type(rule, v, path)?,
            "const" => {
                if v != rule {
                    return Err(format!("{path}: expected {rule}, got {v}"));
                }
            }
            "enum" => {
                let opts = rule.as_array().ok_or("enum must be an array")?;
                if !opts.contains(v) {
                    return Err(format!("{path}: {v} not in {rule}"));
                }
            }
            "required" => {
                if let Some(obj) = v.as_object() {
                    for name in rule.as_array().ok_or("required must be an array")? {
                        let name = name.as_str().ok_or("required entries must be strings")?;
                        if !obj.contains_key(name) {
                            return Err(format!("{path}: missing {name:?}"));
                        }
                    }
                }
            }
            "properties" => {
                if let Some(obj) = v.as_object() {
                    let props = rule.as_object().ok_or("properties must be an object")?;
                    for (name, sub) in props {
                        if let Some(child) = obj.get(name) {
                            check(sub, child, &format!("{path}.{name}"))?;
                        }
                    }
                }
            }
            "additionalProperties" => {
                if let Some(obj) = v.as_object() {
                    check_additional(s, rule, obj, path)?;
                }
            }
            "items" => {
                if let Some(arr) = v.as_array() {
                    let skip = s.get("prefixItems").and_then(Value::as_array).map_or(0, Vec::len);
                    for (i, item) in arr.iter().enumerate().skip(skip) {
                        check(rule, item, &format!("{path}[{i}]"))?;
                    }
                }
            }
            "prefixItems" => {
                if let Some(arr) = v.as_array() {
                    for (i, (sub, item)) in rule
                        .as_array()
                        .ok_or("prefixItems must be an array")?
                        .iter()
                        .zip(arr)
                        .enumerate()
                    {
                        check(sub, item, &format!("{path}[{i}]"))?;
                    }
                }
            }
            "minItems" | "maxItems" => {
                if let Some(arr) = v.as_array() {
                    let n = rule.as_u64().ok_or("item bounds must be integers")? as usize;
                    let ok = if key == "minItems" {
                        arr.len() >= n
                    } else {
                        arr.len() <= n
                    };
                    if !ok {
                        return Err(format!("{path}: {} items violates {key} {n}", arr.len()));
                    }
                }
            }
            "minimum" | "maximum" | "exclusiveMinimum" | "exclusiveMaximum" => {
                if let Some(x) = v.as_f64() {
                    let b = rule.as_f64().ok_or("numeric bound must be a number")?;
                    let ok = match key.as_str() {
                        "minimum" => x >= b,
                        "maximum" => x <= b,
                        "exclusiveMinimum" => x > b,
                        _ => x < b,
                    };
                    if !ok {
                        return Err(format!("{path}: {x} violates {key} {b}"));
                    }
                }
            }
            "pattern" => {
                if let Some(text) = v.as_str() {
                    let re = Regex::new(rule.as_str().ok_or("pattern must be a string")?).map_err(|e| e.to_string())?;
                    if !re.is_match(text) {
                        return Err(format!("{path}: {text:?} does not match {rule}"));
                    }
                }
            }
            "oneOf" => {
                let branches = rule.as_array().ok_or("oneOf must be an array")?;
                let hits = branches.iter().filter(|b| check(b, v, path).is_ok()).count();
                if hits != 1 {
                    return Err(format!("{path}: {hits} oneOf branches match"));
                }
            }
            other => return Err(format!("{path}: unsupported keyword {other:?}")),
        }
    }
    Ok(())
}

fn check_additional(s: &Map<String, Value>, rule: &Value, obj: &Map<String, Value>, path: &str) -> Result<(), String> {
    let known = s.get("properties").and_then(Value::as_object);
    for (name, child) in obj {
        if known.is_some_and(|k| k.contains_key(name)) {
            continue;
        }
        match rule {
            Value::Bool(false) => return Err(format!("{path}: unexpected property {name:?}")),
            Value::Bool(true) => {}
            sub => check(sub, child, &format!("{path}.{name}"))?,
        }
    }
    Ok(())
}

fn type_matches(name: &str, v: &Value) -> Result<bool, String> {
    Ok(match name {
        "null" => v.is_null(),
        "boolean" => v.is_boolean(),
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64() || v.as_f64().is_some_and(|x| x.fract() == 0.0),
        other => return Err(format!("unknown type {other:?}")),
    })
}

fn check_type(rule: &Value, v: &Value, path: &str) -> Result<(), String> {
    let names: Vec<&str> = match rule {
        Value::String(s) => vec![s.as_str()],
        Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
        _ => return Err("type must be a string or array".into()),
    };
    for n in &names {
        if type_matches(n, v)? {
            return Ok(());
        }
    }
    Err(format!("{path}: {v} is not {names:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn catches_each_violation() {
        let schema = json!({
            "type": "object",
            "additionalProperties": false,
            "required": ["a"],
            "properties": {
                "a": {"type": "integer", "minimum": 0, "maximum": 3},
                "b": {"type": ["string", "null"], "pattern": "^#[0-9a-f]{2}$"},
                "c": {"type": "array", "minItems": 2, "maxItems": 2, "prefixItems": [{"const": 1}], "items": {"type": "number"}},
                "d": {"oneOf": [{"type": "null"}, {"enum": ["x"]}]}
            }
        });
        assert!(validate(&schema, &json!({"a": 1, "b": "#0f", "c": [1, 2.5], "d": "x"})).is_ok());
        assert!(validate(&schema, &json!({"a": 1, "b": null, "d": null})).is_ok());
        for bad in [
            json!({}),
            json!({"a": 4}),
            json!({"a": 1.5}),
            json!({"a": 1, "z": 0}),
            json!({"a": 1, "b": "#0F"}),
            json!({"a": 1, "c": [2, 2]}),
            json!({"a": 1, "c": [1]}),
            json!({"a": 1, "c": [1, "s"]}),
            json!({"a": 1, "d": "y"}),
        ] {
            assert!(validate(&schema, &bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn unknown_keyword_is_an_error() {
        assert!(validate(&json!({"format": "uri"}), &json!("x")).is_err());
    }
}
