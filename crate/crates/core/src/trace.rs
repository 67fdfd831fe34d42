//! Observable events and their JSON Lines encoding.
//!
//! Every transition of the agent produces events; a trace is the ordered
//! event sequence of one run. On the wire each event is one JSON object per
//! line with a monotone `seq` field added by the writer.

use crate::agent::Decision;
use crate::license::{LicenseId, Right, Tick};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Why a right turned black.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ColorCause {
    /// The right itself was requested and served.
    Exercised,
    /// The serving of another right depleted the only license that could
    /// still serve this one, and the loss is accounted by coloring.
    ForcedDepletion,
}

/// One observable step of an agent run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Event {
    Installed { license: LicenseId },
    Ticked { now: Tick },
    Requested { decision: Decision },
    Colored { right: Right, cause: ColorCause },
    Rejected { right: Right, reason: String },
}

/// An ordered event sequence.
pub type Trace = Vec<Event>;

/// Encodes one event as a JSON object with the given sequence number.
pub fn event_value(seq: u64, event: &Event) -> Value {
    let mut value = serde_json::to_value(event).expect("events serialize");
    value
        .as_object_mut()
        .expect("events encode as objects")
        .insert("seq".to_string(), Value::from(seq));
    value
}

/// Encodes a trace as JSON Lines, one event per line, `seq` starting at 0.
pub fn to_json_lines(events: &[Event]) -> String {
    let mut out = String::new();
    for (seq, event) in events.iter().enumerate() {
        out.push_str(&event_value(seq as u64, event).to_string());
        out.push('\n');
    }
    out
}

/// Decodes a JSON Lines trace; `seq` fields are checked for monotonicity.
pub fn from_json_lines(text: &str) -> Result<Trace, String> {
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut value: Value =
            serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
        let object = value
            .as_object_mut()
            .ok_or_else(|| format!("line {}: expected an object", i + 1))?;
        let seq = object
            .remove("seq")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| format!("line {}: missing seq", i + 1))?;
        if seq != events.len() as u64 {
            return Err(format!(
                "line {}: seq {} out of order (expected {})",
                i + 1,
                seq,
                events.len()
            ));
        }
        let event: Event =
            serde_json::from_value(value).map_err(|e| format!("line {}: {e}", i + 1))?;
        events.push(event);
    }
    Ok(events)
}
