//! A small JSON-schema checker covering the subset the shipped schemas use:
//! `type`, `properties`, `required`, `additionalProperties`, `items`,
//! `enum`, `minimum`, `maximum`, `minItems`, `maxItems`.
//!
//! The schemas are embedded at compile time from `schemas/` at the
//! repository root, so the binary validates against the same documents a
//! downstream consumer sees.

use serde_json::Value;

use super::IoError;

/// Names of the shipped schemas, one per document kind the crate reads or
/// writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaName {
    RunConfig,
    Run,
    Snapshot,
    Continuation,
    Report,
    Gh,
    MmpInput,
    MmpSchedule,
    Pipeline,
}

impl SchemaName {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemaName::RunConfig => "run_config",
            SchemaName::Run => "run",
            SchemaName::Snapshot => "snapshot",
            SchemaName::Continuation => "continuation",
            SchemaName::Report => "report",
            SchemaName::Gh => "gh",
            SchemaName::MmpInput => "mmp_input",
            SchemaName::MmpSchedule => "mmp_schedule",
            SchemaName::Pipeline => "pipeline",
        }
    }

    fn source(self) -> &'static str {
        match self {
            SchemaName::RunConfig => include_str!("../../../../schemas/run_config.schema.json"),
            SchemaName::Run => include_str!("../../../../schemas/run.schema.json"),
            SchemaName::Snapshot => include_str!("../../../../schemas/snapshot.schema.json"),
            SchemaName::Continuation => {
                include_str!("../../../../schemas/continuation.schema.json")
            }
            SchemaName::Report => include_str!("../../../../schemas/report.schema.json"),
            SchemaName::Gh => include_str!("../../../../schemas/gh.schema.json"),
            SchemaName::MmpInput => include_str!("../../../../schemas/mmp_input.schema.json"),
            SchemaName::MmpSchedule => {
                include_str!("../../../../schemas/mmp_schedule.schema.json")
            }
            SchemaName::Pipeline => include_str!("../../../../schemas/pipeline.schema.json"),
        }
    }
}

/// Checks `value` against the named shipped schema.
pub fn validate_against(value: &Value, name: SchemaName) -> Result<(), IoError> {
    let schema: Value =
        serde_json::from_str(name.source()).expect("shipped schemas are valid JSON");
    validate(value, &schema).map_err(|(path, detail)| IoError::Schema {
        schema: name.as_str(),
        path,
        detail,
    })
}

/// Checks `value` against an arbitrary schema document. On failure returns
/// the JSON-pointer-style path of the offending node and a description.
pub fn validate(value: &Value, schema: &Value) -> Result<(), (String, String)> {
    check(value, schema, "$")
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn matches_type(v: &Value, t: &str) -> bool {
    match t {
        // Schema integers admit any number with zero fractional part.
        "integer" => match v {
            Value::Number(n) => {
                n.is_i64() || n.is_u64() || n.as_f64().is_some_and(|x| x.fract() == 0.0)
            }
            _ => false,
        },
        other => type_name(v) == other,
    }
}

fn check(value: &Value, schema: &Value, path: &str) -> Result<(), (String, String)> {
    let obj = match schema {
        Value::Object(m) => m,
        Value::Bool(true) => return Ok(()),
        Value::Bool(false) => return Err((path.to_string(), "schema forbids any value".into())),
        _ => return Err((path.to_string(), "malformed schema node".into())),
    };

    if let Some(t) = obj.get("type") {
        let allowed: Vec<&str> = match t {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(|v| v.as_str()).collect(),
            _ => vec![],
        };
        if !allowed.iter().any(|t| matches_type(value, t)) {
            return Err((
                path.to_string(),
                format!("expected type {}, got {}", allowed.join("|"), type_name(value)),
            ));
        }
    }

    if let Some(Value::Array(options)) = obj.get("enum") {
        if !options.contains(value) {
            return Err((path.to_string(), format!("{value} not in enum")));
        }
    }

    if let Some(bound) = obj.get("minimum").and_then(Value::as_f64) {
        if let Some(x) = value.as_f64() {
            if x < bound {
                return Err((path.to_string(), format!("{x} below minimum {bound}")));
            }
        }
    }
    if let Some(bound) = obj.get("maximum").and_then(Value::as_f64) {
        if let Some(x) = value.as_f64() {
            if x > bound {
                return Err((path.to_string(), format!("{x} above maximum {bound}")));
            }
        }
    }

    if let Value::Array(items) = value {
        if let Some(min) = obj.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < min {
                return Err((path.to_string(), format!("fewer than {min} items")));
            }
        }
        if let Some(max) = obj.get("maxItems").and_then(Value::as_u64) {
            if (items.len() as u64) > max {
                return Err((path.to_string(), format!("more than {max} items")));
            }
        }
        if let Some(item_schema) = obj.get("items") {
            for (i, item) in items.iter().enumerate() {
                check(item, item_schema, &format!("{path}[{i}]"))?;
            }
        }
    }

    if let Value::Object(fields) = value {
        if let Some(Value::Array(required)) = obj.get("required") {
            for key in required.iter().filter_map(|v| v.as_str()) {
                if !fields.contains_key(key) {
                    return Err((path.to_string(), format!("missing required key {key:?}")));
                }
            }
        }
        let props = obj.get("properties").and_then(Value::as_object);
        if let Some(props) = props {
            for (key, sub) in props {
                if let Some(field) = fields.get(key) {
                    check(field, sub, &format!("{path}.{key}"))?;
                }
            }
        }
        match obj.get("additionalProperties") {
            Some(Value::Bool(false)) => {
                for key in fields.keys() {
                    if !props.is_some_and(|p| p.contains_key(key)) {
                        return Err((path.to_string(), format!("unexpected key {key:?}")));
                    }
                }
            }
            Some(extra @ Value::Object(_)) => {
                for (key, field) in fields {
                    if !props.is_some_and(|p| p.contains_key(key)) {
                        check(field, extra, &format!("{path}.{key}"))?;
                    }
                }
            }
            _ => {}
        }
    }

    Ok(())
}
