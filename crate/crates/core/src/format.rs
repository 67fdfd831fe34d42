//! Strict JSON reader and writer for license documents.
//!
//! The wire format is one JSON object per license:
//!
//! ```json
//! {"id":"L1","about":["A","B"],"top":{"and":[{"count":1},{"until":30}]},
//!  "permissions":[{"action":"play","asset":"A","constraint":"true"}]}
//! ```
//!
//! Constraints are the string `"true"` or a single-key object: `{"count":N}`,
//! `{"until":T}`, `{"interval":D}`, `{"and":[...]}`. Unknown or missing keys
//! are parse errors; every error carries the path of the offending field.
//! Serialization is canonical (sorted keys, no whitespace), so parse after
//! serialize is the identity on values.

use crate::license::{
    ActionKind, AssetId, Constraint, License, LicenseId, Permission, Right, Tick,
};
use serde_json::{Map, Value};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    /// The document is not well-formed JSON.
    #[error("syntax error: {0}")]
    Syntax(String),
    /// The document is JSON but not a valid license.
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl ParseError {
    fn invalid(path: &str, message: impl Into<String>) -> ParseError {
        ParseError::Invalid {
            path: path.to_string(),
            message: message.into(),
        }
    }
}

fn expect_object<'a>(value: &'a Value, path: &str) -> Result<&'a Map<String, Value>, ParseError> {
    value
        .as_object()
        .ok_or_else(|| ParseError::invalid(path, "expected an object"))
}

fn expect_string<'a>(value: &'a Value, path: &str) -> Result<&'a str, ParseError> {
    value
        .as_str()
        .ok_or_else(|| ParseError::invalid(path, "expected a string"))
}

fn expect_array<'a>(value: &'a Value, path: &str) -> Result<&'a Vec<Value>, ParseError> {
    value
        .as_array()
        .ok_or_else(|| ParseError::invalid(path, "expected an array"))
}

fn expect_integer(value: &Value, path: &str) -> Result<u64, ParseError> {
    value
        .as_u64()
        .ok_or_else(|| ParseError::invalid(path, "expected a non-negative integer"))
}

fn check_keys(
    object: &Map<String, Value>,
    allowed: &[&str],
    path: &str,
) -> Result<(), ParseError> {
    for key in object.keys() {
        if !allowed.contains(&key.as_str()) {
            let key_path = if path.is_empty() {
                key.clone()
            } else {
                format!("{path}.{key}")
            };
            return Err(ParseError::Invalid {
                path: key_path,
                message: "unknown key".to_string(),
            });
        }
    }
    for key in allowed {
        if !object.contains_key(*key) {
            return Err(ParseError::invalid(path, format!("missing key {key:?}")));
        }
    }
    Ok(())
}

fn parse_constraint(value: &Value, path: &str) -> Result<Constraint, ParseError> {
    match value {
        Value::String(s) if s == "true" => Ok(Constraint::True),
        Value::String(s) => Err(ParseError::invalid(
            path,
            format!("unknown constraint {s:?} (expected \"true\" or an object)"),
        )),
        Value::Object(object) => {
            if object.len() != 1 {
                return Err(ParseError::invalid(
                    path,
                    "a constraint object must have exactly one key",
                ));
            }
            let (key, inner) = object.iter().next().unwrap();
            let inner_path = format!("{path}.{key}");
            match key.as_str() {
                "count" => {
                    let n = expect_integer(inner, &inner_path)?;
                    let n = u32::try_from(n).map_err(|_| {
                        ParseError::invalid(&inner_path, "count total is too large")
                    })?;
                    Ok(Constraint::Count(n))
                }
                "until" => {
                    let t = expect_integer(inner, &inner_path)?;
                    Ok(Constraint::Until(Tick::new(t)))
                }
                "interval" => {
                    let d = expect_integer(inner, &inner_path)?;
                    Ok(Constraint::Interval(d))
                }
                "and" => {
                    let members = expect_array(inner, &inner_path)?;
                    let mut parts = Vec::new();
                    for (i, member) in members.iter().enumerate() {
                        parts.push(parse_constraint(member, &format!("{inner_path}[{i}]"))?);
                    }
                    Ok(Constraint::And(parts))
                }
                other => Err(ParseError::invalid(
                    path,
                    format!("unknown constraint key {other:?}"),
                )),
            }
        }
        _ => Err(ParseError::invalid(
            path,
            "expected \"true\" or a constraint object",
        )),
    }
}

/// Parses one license from an already-decoded JSON value. `path` prefixes
/// every reported error location (pass `""` for a standalone document).
pub fn parse_license_value(value: &Value, path: &str) -> Result<License, ParseError> {
    let at = |field: &str| -> String {
        if path.is_empty() {
            field.to_string()
        } else {
            format!("{path}.{field}")
        }
    };
    let object = expect_object(value, if path.is_empty() { "document" } else { path })?;
    check_keys(object, &["id", "about", "top", "permissions"], path)?;

    let id = expect_string(&object["id"], &at("id"))?;

    let about_items = expect_array(&object["about"], &at("about"))?;
    let mut about = BTreeSet::new();
    for (i, item) in about_items.iter().enumerate() {
        let item_path = format!("{}[{i}]", at("about"));
        let asset = expect_string(item, &item_path)?;
        if !about.insert(AssetId::new(asset)) {
            return Err(ParseError::invalid(
                &item_path,
                format!("duplicate asset {asset:?}"),
            ));
        }
    }

    let top = parse_constraint(&object["top"], &at("top"))?;

    let perm_items = expect_array(&object["permissions"], &at("permissions"))?;
    let mut permissions = Vec::new();
    for (i, item) in perm_items.iter().enumerate() {
        let perm_path = format!("{}[{i}]", at("permissions"));
        let perm = expect_object(item, &perm_path)?;
        check_keys(perm, &["action", "asset", "constraint"], &perm_path)?;
        let action_str = expect_string(&perm["action"], &format!("{perm_path}.action"))?;
        let action: ActionKind = action_str
            .parse()
            .map_err(|e: String| ParseError::invalid(&format!("{perm_path}.action"), e))?;
        let asset = expect_string(&perm["asset"], &format!("{perm_path}.asset"))?;
        let constraint =
            parse_constraint(&perm["constraint"], &format!("{perm_path}.constraint"))?;
        permissions.push(Permission::new(constraint, Right::new(asset, action)));
    }

    License::new(LicenseId::new(id), about, top, permissions).map_err(|e| {
        ParseError::Invalid {
            path: if path.is_empty() {
                e.path
            } else {
                format!("{path}.{}", e.path)
            },
            message: e.message,
        }
    })
}

/// Parses one license document from JSON text.
pub fn parse_license(text: &str) -> Result<License, ParseError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| ParseError::Syntax(e.to_string()))?;
    parse_license_value(&value, "")
}

fn constraint_value(constraint: &Constraint) -> Value {
    match constraint {
        Constraint::True => Value::String("true".to_string()),
        Constraint::Count(n) => serde_json::json!({ "count": n }),
        Constraint::Until(t) => serde_json::json!({ "until": t.value() }),
        Constraint::Interval(d) => serde_json::json!({ "interval": d }),
        Constraint::And(parts) => {
            serde_json::json!({ "and": parts.iter().map(constraint_value).collect::<Vec<_>>() })
        }
    }
}

/// Encodes one license as a JSON value in the wire format.
pub fn license_value(license: &License) -> Value {
    serde_json::json!({
        "id": license.id.as_str(),
        "about": license.about.iter().map(|a| a.as_str()).collect::<Vec<_>>(),
        "top": constraint_value(&license.top),
        "permissions": license
            .permissions
            .iter()
            .map(|p| {
                serde_json::json!({
                    "action": p.right.action.as_str(),
                    "asset": p.right.asset.as_str(),
                    "constraint": constraint_value(&p.constraint),
                })
            })
            .collect::<Vec<_>>(),
    })
}

/// Serializes one license canonically: keys sorted, members in document
/// order, no whitespace. Parsing the output yields the same value back.
pub fn serialize_license(license: &License) -> String {
    license_value(license).to_string()
}

/// The three-permission agreement used across the test suite: display c1,
/// display c2, print c2, everything unconstrained.
#[cfg(test)]
pub(crate) const EBOOK: &str = r#"{
    "id": "agr",
    "about": ["c1", "c2"],
    "top": "true",
    "permissions": [
        {"action": "display", "asset": "c1", "constraint": "true"},
        {"action": "display", "asset": "c2", "constraint": "true"},
        {"action": "print", "asset": "c2", "constraint": "true"}
    ]
}"#;

/// First license of the shared two-license fixture: one execution, valid
/// through tick 30, granting play on A and B.
#[cfg(test)]
pub(crate) const OVERLAP_L1: &str = r#"{"id":"L1","about":["A","B"],"top":{"and":[{"count":1},{"until":30}]},"permissions":[{"action":"play","asset":"A","constraint":"true"},{"action":"play","asset":"B","constraint":"true"}]}"#;

/// Second license of the shared fixture: ten executions, no deadline,
/// granting play on A and D.
#[cfg(test)]
pub(crate) const OVERLAP_L2: &str = r#"{"id":"L2","about":["A","D"],"top":{"count":10},"permissions":[{"action":"play","asset":"A","constraint":"true"},{"action":"play","asset":"D","constraint":"true"}]}"#;
