//! The agent state machine: installed licenses, constraint residue, a
//! clock, and a coloring that tracks which rights have been honored.
//!
//! Rights start white when installed. A right turns black when it is
//! exercised, or when serving a different right through the only license
//! that could still serve it depletes that license (the loss is then
//! accounted rather than silent). A right that stays white although no
//! license can ever serve it again is a lost right, the failure the
//! verifier hunts for.

use crate::eval::{
    self, ConstraintState, EvalError, NodePath, Slot, WindowEnd,
};
use crate::license::{Constraint, License, LicenseId, Right, Tick};
use crate::trace::{ColorCause, Event};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Black,
}

/// The record of one served request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub request: Right,
    pub chosen: LicenseId,
    pub at: Tick,
    /// The chosen license can serve no right at all in the successor state.
    pub depleted: bool,
    /// Rights colored black by this decision; always contains the request.
    pub blackened: BTreeSet<Right>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("license {0} is already installed")]
    DuplicateLicense(LicenseId),
    #[error("right {0} is not granted by any installed license")]
    UndefinedRight(Right),
    #[error("request {0} is not permitted")]
    NotPermitted(Right),
    #[error("chooser returned {chosen}, which does not grant {request}")]
    UnknownChoice { chosen: LicenseId, request: Right },
    #[error(transparent)]
    State(#[from] EvalError),
}

/// A license-choice policy. Candidates are always non-empty and always
/// usable for the request; an honest chooser returns one of them.
pub trait Chooser {
    fn name(&self) -> &str;
    fn choose(
        &self,
        candidates: &BTreeSet<LicenseId>,
        state: &AgentState,
        request: &Right,
    ) -> LicenseId;
}

/// Full agent state. Transitions are value-to-value: each returns the
/// successor state plus the events it emitted, leaving `self` untouched.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AgentState {
    licenses: BTreeMap<LicenseId, License>,
    constraints: ConstraintState,
    now: Tick,
    coloring: BTreeMap<Right, Color>,
}

impl AgentState {
    /// The empty agent: no licenses, no residue, time zero.
    pub fn new() -> Self {
        AgentState::default()
    }

    pub fn now(&self) -> Tick {
        self.now
    }

    pub fn licenses(&self) -> &BTreeMap<LicenseId, License> {
        &self.licenses
    }

    pub fn constraints(&self) -> &ConstraintState {
        &self.constraints
    }

    pub fn coloring(&self) -> &BTreeMap<Right, Color> {
        &self.coloring
    }

    /// Every right granted by some installed license.
    pub fn granted_rights(&self) -> BTreeSet<Right> {
        self.coloring.keys().cloned().collect()
    }

    /// Rebuilds a state piecewise. Used by generators that need arbitrary
    /// residues; the parts must belong together.
    pub fn from_parts(
        licenses: BTreeMap<LicenseId, License>,
        constraints: ConstraintState,
        now: Tick,
        coloring: BTreeMap<Right, Color>,
    ) -> Self {
        AgentState {
            licenses,
            constraints,
            now,
            coloring,
        }
    }

    /// Installs a license: fresh constraint residue, newly granted rights
    /// colored white (already-black rights stay black).
    pub fn install(&self, license: License) -> Result<(Self, Event), AgentError> {
        if self.licenses.contains_key(&license.id) {
            return Err(AgentError::DuplicateLicense(license.id));
        }
        let mut next = self.clone();
        next.constraints.register(&license);
        for right in license.granted_rights() {
            next.coloring.entry(right).or_insert(Color::White);
        }
        let event = Event::Installed {
            license: license.id.clone(),
        };
        next.licenses.insert(license.id.clone(), license);
        Ok((next, event))
    }

    /// Advances the clock by one tick. Nothing else changes.
    pub fn tick(&self) -> (Self, Event) {
        let mut next = self.clone();
        next.now = self.now.next();
        let now = next.now;
        (next, Event::Ticked { now })
    }

    /// The installed licenses able to serve `right` at the current time.
    pub fn usable(&self, right: &Right) -> BTreeSet<LicenseId> {
        self.licenses
            .values()
            .filter(|l| {
                eval::license_serves(l, &self.constraints, self.now, right)
                    .expect("constraint state covers installed licenses")
            })
            .map(|l| l.id.clone())
            .collect()
    }

    /// Every right some installed license grants at the current time.
    pub fn permission_set(&self) -> BTreeSet<Right> {
        eval::permission_set(self.licenses.values(), &self.constraints, self.now)
            .expect("constraint state covers installed licenses")
    }

    pub fn color_of(&self, right: &Right) -> Result<Color, AgentError> {
        self.coloring
            .get(right)
            .copied()
            .ok_or_else(|| AgentError::UndefinedRight(right.clone()))
    }

    /// White rights that no installed license can serve at any time from now
    /// on, given the current residue. Checked exhaustively over every
    /// constraint node via serviceability windows.
    pub fn lost_rights(&self) -> BTreeSet<Right> {
        self.coloring
            .iter()
            .filter(|(_, color)| **color == Color::White)
            .filter(|(right, _)| {
                self.licenses.values().all(|l| {
                    let window = eval::serve_window_end(l, &self.constraints, right)
                        .expect("constraint state covers installed licenses");
                    !window.reaches(self.now)
                })
            })
            .map(|(right, _)| right.clone())
            .collect()
    }

    /// Serves a request through the license picked by `chooser`, consuming
    /// counts, opening intervals, and coloring rights. The chooser's answer
    /// is executed even when it is not a candidate (so that a broken policy
    /// produces an observable constraint violation rather than being
    /// silently corrected); it only has to grant the right at all.
    pub fn request(
        &self,
        right: &Right,
        chooser: &dyn Chooser,
    ) -> Result<(Self, Decision, Vec<Event>), AgentError> {
        if !self.coloring.contains_key(right) {
            return Err(AgentError::UndefinedRight(right.clone()));
        }
        let candidates = self.usable(right);
        if candidates.is_empty() {
            return Err(AgentError::NotPermitted(right.clone()));
        }
        let chosen_id = chooser.choose(&candidates, self, right);
        let chosen = self
            .licenses
            .get(&chosen_id)
            .filter(|l| !l.permissions_for(right).is_empty())
            .ok_or_else(|| AgentError::UnknownChoice {
                chosen: chosen_id.clone(),
                request: right.clone(),
            })?
            .clone();

        let matched = eval::matched_permission(&chosen, &self.constraints, self.now, right)?
            .expect("permissions_for is non-empty");

        let mut next = self.clone();
        consume(&mut next.constraints, &chosen, Slot::Top, &chosen.top, self.now);
        consume(
            &mut next.constraints,
            &chosen,
            Slot::Permission(matched as u32),
            &chosen.permissions[matched].constraint,
            self.now,
        );

        let mut blackened = BTreeSet::new();
        let mut events = Vec::new();
        blackened.insert(right.clone());
        let mut colored = Vec::new();
        if next.coloring[right] == Color::White {
            next.coloring.insert(right.clone(), Color::Black);
            colored.push((right.clone(), ColorCause::Exercised));
        }

        let depleted = chosen.granted_rights().iter().all(|r| {
            !eval::license_serves(&chosen, &next.constraints, self.now, r)
                .expect("constraint state covers installed licenses")
        });
        if depleted && candidates.len() == 1 && candidates.contains(&chosen.id) {
            for other in chosen.granted_rights() {
                if other != *right && next.coloring[&other] == Color::White {
                    next.coloring.insert(other.clone(), Color::Black);
                    blackened.insert(other.clone());
                    colored.push((other, ColorCause::ForcedDepletion));
                }
            }
        }

        let decision = Decision {
            request: right.clone(),
            chosen: chosen.id.clone(),
            at: self.now,
            depleted,
            blackened,
        };
        events.push(Event::Requested {
            decision: decision.clone(),
        });
        for (r, cause) in colored {
            events.push(Event::Colored { right: r, cause });
        }
        Ok((next, decision, events))
    }
}

/// Applies one serving to the stateful nodes of one constraint slot:
/// decrements counts, opens unopened intervals.
fn consume(
    st: &mut ConstraintState,
    license: &License,
    slot: Slot,
    constraint: &Constraint,
    now: Tick,
) {
    let mut touch = |path: NodePath, node: &Constraint| match node {
        Constraint::Count(_) => st.decrement(&license.id, path),
        Constraint::Interval(_) => st.mark_first_use(&license.id, path, now),
        _ => {}
    };
    match constraint {
        Constraint::And(parts) => {
            for (i, part) in parts.iter().enumerate() {
                touch(NodePath::member(slot, i as u32), part);
            }
        }
        leaf => touch(NodePath::root(slot), leaf),
    }
}

/// Latest tick at which `state`'s license `id` could serve `right`, for
/// diagnostics. `None` when the license is not installed.
pub fn serve_window(state: &AgentState, id: &LicenseId, right: &Right) -> Option<WindowEnd> {
    state
        .licenses()
        .get(id)
        .map(|l| eval::serve_window_end(l, state.constraints(), right).expect("covered"))
}
