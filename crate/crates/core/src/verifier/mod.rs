//! Bounded exhaustive checking over small license installations.
//!
//! An [`Instance`] is a set of licenses plus an exploration horizon. The
//! submodules enumerate instances within size bounds ([`corpus`]), enumerate
//! every request/tick schedule up to the horizon ([`explore`]), decide the
//! two checked properties ([`check`]), and tabulate both choice policies
//! side by side ([`compare`]).
//!
//! The two properties:
//!
//! * **Safety** — whenever a license is chosen to serve a request, its
//!   constraints held at that moment.
//! * **Leads-to** — along every fair schedule, every right that starts
//!   white is black by the end: exercised, or knowingly sacrificed when its
//!   sole remaining license was depleted. A fair schedule is one that never
//!   starves a usable white right; a white right whose usability was
//!   destroyed by another request is the loss the check exists to find.
//!
//! Verdicts are decided over *all* schedules of exactly `horizon` steps, so
//! they are exhaustive within the bound and silent beyond it.

pub mod check;
pub mod compare;
pub mod corpus;
pub mod explore;

pub use check::{check_liveness, check_liveness_full, check_safety, horizon_warning};
pub use compare::{compare_choosers, Aggregates, Report, ReportRow};
pub use corpus::{canonical_instance_form, generate_corpus, CorpusBounds};
pub use explore::{classify_final, explore_requests, replay_trace, trace_is_fair, Exploration, FinalClass};

use crate::agent::{AgentError, AgentState};
use crate::format::{self, ParseError};
use crate::license::{Constraint, License, Right, Tick};
use crate::trace::{event_value, Event, Trace};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("bounds enumerate {candidates} candidate instances, over the cap of {cap}")]
    BoundsTooLarge { candidates: u128, cap: u64 },
    #[error("exploration exceeded the state cap of {cap}")]
    CapExceeded { cap: usize },
    #[error("trace does not replay: {0}")]
    Replay(String),
    #[error(transparent)]
    Agent(#[from] AgentError),
}

impl From<crate::eval::EvalError> for VerifyError {
    fn from(e: crate::eval::EvalError) -> Self {
        VerifyError::Agent(AgentError::State(e))
    }
}

/// A closed world to check: the licenses installed at time zero and the
/// number of steps to explore. Exploration branches over one request per
/// granted right plus the clock tick, so every maximal schedule has exactly
/// `horizon` steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub licenses: Vec<License>,
    pub horizon: Tick,
}

impl Instance {
    pub fn new(licenses: Vec<License>, horizon: Tick) -> Result<Instance, VerifyError> {
        if licenses.is_empty() {
            return Err(VerifyError::InvalidInstance(
                "an instance needs at least one license".into(),
            ));
        }
        if horizon.value() == 0 {
            return Err(VerifyError::InvalidInstance(
                "horizon must be at least 1".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for license in &licenses {
            license
                .validate()
                .map_err(|e| VerifyError::InvalidInstance(format!("license {}: {e}", license.id)))?;
            if !seen.insert(license.id.clone()) {
                return Err(VerifyError::InvalidInstance(format!(
                    "duplicate license id {}",
                    license.id
                )));
            }
        }
        Ok(Instance { licenses, horizon })
    }

    /// The agent with every license installed at time zero, plus the
    /// install events in instance order.
    pub fn setup(&self) -> (AgentState, Vec<Event>) {
        let mut state = AgentState::new();
        let mut events = Vec::new();
        for license in &self.licenses {
            let (next, event) = state
                .install(license.clone())
                .expect("instance license ids are unique");
            state = next;
            events.push(event);
        }
        (state, events)
    }

    /// Every right granted by some license of the instance.
    pub fn rights(&self) -> BTreeSet<Right> {
        self.licenses
            .iter()
            .flat_map(|l| l.granted_rights())
            .collect()
    }

    /// The latest `until` deadline anywhere in the instance, if any.
    pub fn max_deadline(&self) -> Option<Tick> {
        let mut latest: Option<Tick> = None;
        let mut consider = |c: &Constraint| {
            for node in c.conjuncts() {
                if let Constraint::Until(deadline) = node {
                    latest = Some(match latest {
                        Some(t) => t.max(*deadline),
                        None => *deadline,
                    });
                }
            }
        };
        for license in &self.licenses {
            consider(&license.top);
            for perm in &license.permissions {
                consider(&perm.constraint);
            }
        }
        latest
    }
}

fn invalid(path: &str, message: impl Into<String>) -> ParseError {
    ParseError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

/// Reads an instance document: `{"horizon": N, "licenses": [...]}`.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| ParseError::Syntax(e.to_string()))?;
    instance_from_value(&value)
}

pub fn instance_from_value(value: &Value) -> Result<Instance, ParseError> {
    let obj = value
        .as_object()
        .ok_or_else(|| invalid("instance", "expected an object"))?;
    for key in obj.keys() {
        if key != "horizon" && key != "licenses" {
            return Err(invalid(key, "unknown key"));
        }
    }
    let horizon = obj
        .get("horizon")
        .ok_or_else(|| invalid("horizon", "missing key"))?
        .as_u64()
        .ok_or_else(|| invalid("horizon", "expected a non-negative integer"))?;
    if horizon == 0 {
        return Err(invalid("horizon", "horizon must be at least 1"));
    }
    let license_values = obj
        .get("licenses")
        .ok_or_else(|| invalid("licenses", "missing key"))?
        .as_array()
        .ok_or_else(|| invalid("licenses", "expected an array"))?;
    let mut licenses = Vec::new();
    for (i, lv) in license_values.iter().enumerate() {
        licenses.push(format::parse_license_value(lv, &format!("licenses[{i}]"))?);
    }
    Instance::new(licenses, Tick::new(horizon)).map_err(|e| invalid("licenses", e.to_string()))
}

/// The canonical JSON value of an instance: sorted keys, licenses in
/// instance order.
pub fn instance_value(instance: &Instance) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("horizon".into(), Value::from(instance.horizon.value()));
    obj.insert(
        "licenses".into(),
        Value::Array(instance.licenses.iter().map(format::license_value).collect()),
    );
    Value::Object(obj)
}

pub fn serialize_instance(instance: &Instance) -> String {
    serde_json::to_string(&instance_value(instance)).expect("instance values serialize")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Safety,
    Liveness,
}

impl Property {
    pub fn as_str(self) -> &'static str {
        match self {
            Property::Safety => "safety",
            Property::Liveness => "liveness",
        }
    }
}

impl std::fmt::Display for Property {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Property {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "safety" => Ok(Property::Safety),
            "liveness" => Ok(Property::Liveness),
            other => Err(format!(
                "unknown property {other:?} (expected safety or liveness)"
            )),
        }
    }
}

/// Outcome of one property check. A verdict that does not hold always
/// carries the event sequence reaching the violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub property: Property,
    pub holds: bool,
    pub counterexample: Option<Trace>,
}

impl Verdict {
    pub fn holding(property: Property) -> Verdict {
        Verdict {
            property,
            holds: true,
            counterexample: None,
        }
    }

    pub fn violated(property: Property, counterexample: Trace) -> Verdict {
        Verdict {
            property,
            holds: false,
            counterexample: Some(counterexample),
        }
    }
}

/// The verdict as one JSON value; counterexample events carry `seq` fields
/// exactly as they would appear in a JSON Lines trace.
pub fn verdict_value(verdict: &Verdict) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("property".into(), Value::from(verdict.property.as_str()));
    obj.insert("holds".into(), Value::from(verdict.holds));
    if let Some(trace) = &verdict.counterexample {
        obj.insert(
            "counterexample".into(),
            Value::Array(
                trace
                    .iter()
                    .enumerate()
                    .map(|(i, e)| event_value(i as u64, e))
                    .collect(),
            ),
        );
    }
    Value::Object(obj)
}
