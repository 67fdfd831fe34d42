//! Exhaustive enumeration of request/tick schedules, and the fairness
//! classification of completed runs.
//!
//! From every state the explorer branches over each right the instance
//! defines — granted or not — plus one clock tick, so a schedule is any
//! length-`horizon` word over `requests ∪ {tick}`. A denied request is a
//! stutter step: it leaves the state alone and logs a rejection event.
//!
//! A completed run is *fair* when no right was starved by the schedule. A
//! step starves a white right when it leaves it usable yet unrequested — a
//! passed-up chance to exercise it — and letting a deadline expire under a
//! usable right is starvation too. A white right whose usability was
//! destroyed in one blow, by the very first step while no chance to request
//! it had yet been passed up, is not starved: it is a genuine loss, the
//! chooser's own doing, which is what the liveness check wants to isolate.

use super::{Instance, VerifyError};
use crate::agent::{AgentError, AgentState, Chooser};
use crate::agent::Color;
use crate::license::{LicenseId, Right};
use crate::trace::{Event, Trace};
use std::collections::BTreeSet;

/// All maximal schedules of an instance, as event traces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exploration {
    pub traces: Vec<Trace>,
    /// False when the step cap stopped the enumeration early. The traces
    /// already gathered are still complete runs; later schedules are simply
    /// missing.
    pub complete: bool,
}

/// How a completed run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FinalClass {
    /// The schedule starved a white right: it was still usable at the end,
    /// it expired at a clock tick, or some step passed it up — left it
    /// usable without requesting it — before it died.
    Unfair,
    /// Every white right got its chance. `lost` holds the white rights that
    /// are gone anyway — destroyed outright by a request step before any
    /// chance to exercise them was passed up.
    Fair { lost: BTreeSet<Right> },
}

/// Classifies a completed run from its final state plus the set of rights
/// the schedule starved along the way (passed up while usable, or expired
/// at a tick).
pub fn classify_final(state: &AgentState, starved: &BTreeSet<Right>) -> FinalClass {
    let mut lost = BTreeSet::new();
    for (right, color) in state.coloring() {
        if *color == Color::Black {
            continue;
        }
        if !state.usable(right).is_empty() || starved.contains(right) {
            return FinalClass::Unfair;
        }
        lost.insert(right.clone());
    }
    FinalClass::Fair { lost }
}

/// Rights that stopped being usable across one transition.
pub(crate) fn usability_deaths(before: &AgentState, after: &AgentState) -> BTreeSet<Right> {
    before
        .coloring()
        .keys()
        .filter(|r| !before.usable(r).is_empty() && after.usable(r).is_empty())
        .cloned()
        .collect()
}

/// Rights a transition passed up: white and usable on both sides of the
/// step, yet not the thing requested. Once a right has been passed up, any
/// later loss of it is starvation, not the chooser's fault.
pub(crate) fn passed_up(before: &AgentState, after: &AgentState) -> BTreeSet<Right> {
    before
        .coloring()
        .iter()
        .filter(|(r, color)| {
            **color == Color::White
                && !before.usable(r).is_empty()
                && after.coloring().get(*r) == Some(&Color::White)
                && !after.usable(r).is_empty()
        })
        .map(|(r, _)| r.clone())
        .collect()
}

/// The starvation a single step adds: rights it passed up, plus — for tick
/// steps — still-white rights whose usability it expired.
pub(crate) fn step_starvation(before: &AgentState, after: &AgentState, tick: bool) -> BTreeSet<Right> {
    let mut starved = passed_up(before, after);
    if tick {
        starved.extend(
            usability_deaths(before, after)
                .into_iter()
                .filter(|r| after.coloring().get(r) == Some(&Color::White)),
        );
    }
    starved
}

/// Enumerates every maximal schedule of the instance under the given
/// chooser, depth-first in right order with the tick branch last. With
/// `fair_only`, runs whose schedule starved a right are dropped. `step_cap`
/// bounds the total number of transitions taken.
pub fn explore_requests(
    instance: &Instance,
    chooser: &dyn Chooser,
    fair_only: bool,
    step_cap: usize,
) -> Result<Exploration, VerifyError> {
    let (root, install_events) = instance.setup();
    let mut dfs = Dfs {
        rights: instance.rights().into_iter().collect(),
        horizon: instance.horizon.value(),
        chooser,
        fair_only,
        step_cap,
        steps: 0,
        complete: true,
        traces: Vec::new(),
        events: install_events,
    };
    dfs.run(&root, 0, &BTreeSet::new())?;
    Ok(Exploration {
        traces: dfs.traces,
        complete: dfs.complete,
    })
}

struct Dfs<'a> {
    rights: Vec<Right>,
    horizon: u64,
    chooser: &'a dyn Chooser,
    fair_only: bool,
    step_cap: usize,
    steps: usize,
    complete: bool,
    traces: Vec<Trace>,
    events: Vec<Event>,
}

impl Dfs<'_> {
    fn run(
        &mut self,
        state: &AgentState,
        depth: u64,
        starved: &BTreeSet<Right>,
    ) -> Result<(), VerifyError> {
        if depth == self.horizon {
            if !self.fair_only
                || matches!(classify_final(state, starved), FinalClass::Fair { .. })
            {
                self.traces.push(self.events.clone());
            }
            return Ok(());
        }
        for i in 0..self.rights.len() {
            if !self.take_step() {
                return Ok(());
            }
            let right = self.rights[i].clone();
            let mark = self.events.len();
            match state.request(&right, self.chooser) {
                Ok((successor, _decision, events)) => {
                    let mut next_starved = starved.clone();
                    next_starved.extend(step_starvation(state, &successor, false));
                    self.events.extend(events);
                    self.run(&successor, depth + 1, &next_starved)?;
                }
                Err(err @ AgentError::NotPermitted(_)) => {
                    // A denied request is a stutter: it passes up every
                    // usable white right, the denied one included.
                    let mut next_starved = starved.clone();
                    next_starved.extend(step_starvation(state, state, false));
                    self.events.push(Event::Rejected {
                        right,
                        reason: err.to_string(),
                    });
                    self.run(state, depth + 1, &next_starved)?;
                }
                Err(other) => return Err(other.into()),
            }
            self.events.truncate(mark);
            if !self.complete {
                return Ok(());
            }
        }
        if !self.take_step() {
            return Ok(());
        }
        let (successor, event) = state.tick();
        let mut next_starved = starved.clone();
        next_starved.extend(step_starvation(state, &successor, true));
        let mark = self.events.len();
        self.events.push(event);
        self.run(&successor, depth + 1, &next_starved)?;
        self.events.truncate(mark);
        Ok(())
    }

    fn take_step(&mut self) -> bool {
        if self.steps >= self.step_cap {
            self.complete = false;
            return false;
        }
        self.steps += 1;
        true
    }
}

/// Replays a trace against its instance, returning the final state and the
/// rights the schedule starved along the way (passed up while usable, or
/// expired at a tick). Fails when the trace does not fit the instance: an
/// unknown license, a decision the agent will not reproduce, or a rejection
/// the agent would in fact grant.
pub fn replay_trace(
    instance: &Instance,
    trace: &Trace,
) -> Result<(AgentState, BTreeSet<Right>), VerifyError> {
    let mut state = AgentState::new();
    let mut starved = BTreeSet::new();
    for event in trace {
        match event {
            Event::Installed { license } => {
                let found = instance
                    .licenses
                    .iter()
                    .find(|l| &l.id == license)
                    .ok_or_else(|| {
                        VerifyError::Replay(format!("license {license} is not part of the instance"))
                    })?;
                let (next, _) = state.install(found.clone())?;
                state = next;
            }
            Event::Ticked { now } => {
                let (next, _) = state.tick();
                if next.now() != *now {
                    return Err(VerifyError::Replay(format!(
                        "tick to {now} does not match the clock at {}",
                        next.now()
                    )));
                }
                starved.extend(step_starvation(&state, &next, true));
                state = next;
            }
            Event::Requested { decision } => {
                let scripted = Scripted(decision.chosen.clone());
                let (next, replayed, _) = state.request(&decision.request, &scripted)?;
                if replayed != *decision {
                    return Err(VerifyError::Replay(format!(
                        "decision for {} diverges on replay",
                        decision.request
                    )));
                }
                starved.extend(step_starvation(&state, &next, false));
                state = next;
            }
            Event::Colored { right, .. } => {
                if state.color_of(right)? != Color::Black {
                    return Err(VerifyError::Replay(format!(
                        "{right} is recorded black but replays white"
                    )));
                }
            }
            Event::Rejected { right, .. } => {
                if state.coloring().contains_key(right) && !state.usable(right).is_empty() {
                    return Err(VerifyError::Replay(format!(
                        "rejected request {right} would in fact be granted"
                    )));
                }
                starved.extend(step_starvation(&state, &state, false));
            }
        }
    }
    Ok((state, starved))
}

/// Whether a completed trace is a fair schedule of the instance.
pub fn trace_is_fair(instance: &Instance, trace: &Trace) -> Result<bool, VerifyError> {
    let (state, starved) = replay_trace(instance, trace)?;
    Ok(matches!(
        classify_final(&state, &starved),
        FinalClass::Fair { .. }
    ))
}

/// Forces the replayed decision's choice instead of consulting a policy.
struct Scripted(LicenseId);

impl Chooser for Scripted {
    fn name(&self) -> &str {
        "scripted"
    }

    fn choose(
        &self,
        _candidates: &BTreeSet<LicenseId>,
        _state: &AgentState,
        _request: &Right,
    ) -> LicenseId {
        self.0.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choosers::BaselineChooser;
    use crate::format::{parse_license, OVERLAP_L1, OVERLAP_L2};
    use crate::label::PrecedenceTable;
    use crate::license::{ActionKind, AssetId, Constraint, License, LicenseId, Permission, Tick};

    fn single(top: Constraint) -> License {
        License::new(
            LicenseId::new("solo"),
            [AssetId::new("A")].into(),
            top,
            vec![Permission::new(
                Constraint::True,
                Right::new("A", ActionKind::Play),
            )],
        )
        .unwrap()
    }

    fn pair(top_a: Constraint, top_b: Constraint) -> Instance {
        let la = License::new(
            LicenseId::new("La"),
            [AssetId::new("A")].into(),
            top_a,
            vec![Permission::new(
                Constraint::True,
                Right::new("A", ActionKind::Play),
            )],
        )
        .unwrap();
        let lb = License::new(
            LicenseId::new("Lb"),
            [AssetId::new("B")].into(),
            top_b,
            vec![Permission::new(
                Constraint::True,
                Right::new("B", ActionKind::Play),
            )],
        )
        .unwrap();
        Instance::new(vec![la, lb], Tick::new(3)).unwrap()
    }

    fn overlap(horizon: u64) -> Instance {
        Instance::new(
            vec![
                parse_license(OVERLAP_L1).unwrap(),
                parse_license(OVERLAP_L2).unwrap(),
            ],
            Tick::new(horizon),
        )
        .unwrap()
    }

    fn baseline() -> BaselineChooser {
        BaselineChooser {
            table: PrecedenceTable::default(),
        }
    }

    #[test]
    fn one_right_one_step_gives_two_schedules() {
        let instance = Instance::new(vec![single(Constraint::Count(1))], Tick::new(1)).unwrap();
        let explored = explore_requests(&instance, &baseline(), false, 1_000).unwrap();
        assert!(explored.complete);
        assert_eq!(explored.traces.len(), 2);
        // Request branch first, tick branch last.
        assert!(explored.traces[0]
            .iter()
            .any(|e| matches!(e, Event::Requested { .. })));
        assert!(explored.traces[1]
            .iter()
            .any(|e| matches!(e, Event::Ticked { .. })));
    }

    #[test]
    fn branching_is_rights_plus_tick_to_the_horizon() {
        let instance = pair(Constraint::True, Constraint::True);
        let explored = explore_requests(&instance, &baseline(), false, 1_000_000).unwrap();
        assert!(explored.complete);
        // Two rights plus tick, three steps: 27 schedules.
        assert_eq!(explored.traces.len(), 27);
    }

    #[test]
    fn fairness_prunes_the_starved_schedules() {
        // One undepletable license: the only fair one-step schedule
        // exercises the right; idling leaves it usable and white.
        let instance = Instance::new(vec![single(Constraint::True)], Tick::new(1)).unwrap();
        let explored = explore_requests(&instance, &baseline(), true, 1_000).unwrap();
        assert_eq!(explored.traces.len(), 1);
        assert!(explored.traces[0]
            .iter()
            .any(|e| matches!(e, Event::Requested { .. })));
    }

    #[test]
    fn fair_only_retains_exactly_the_fair_traces() {
        let instance = overlap(2);
        let all = explore_requests(&instance, &baseline(), false, 1_000_000).unwrap();
        let fair = explore_requests(&instance, &baseline(), true, 1_000_000).unwrap();
        assert!(all.complete && fair.complete);
        let kept: Vec<bool> = all
            .traces
            .iter()
            .map(|t| trace_is_fair(&instance, t).unwrap())
            .collect();
        let expected: Vec<&Trace> = all
            .traces
            .iter()
            .zip(&kept)
            .filter(|(_, keep)| **keep)
            .map(|(t, _)| t)
            .collect();
        let got: Vec<&Trace> = fair.traces.iter().collect();
        assert_eq!(got, expected);
        assert!(!fair.traces.is_empty());
    }

    #[test]
    fn baseline_spends_the_shared_license_and_strands_a_right() {
        // Under the baseline policy some fair schedule of the overlapping
        // licenses ends with (B, play) white and unusable.
        let instance = overlap(2);
        let fair = explore_requests(&instance, &baseline(), true, 1_000_000).unwrap();
        let b_play = Right::new("B", ActionKind::Play);
        let stranded = fair.traces.iter().find(|t| {
            let (state, _) = replay_trace(&instance, t).unwrap();
            state.lost_rights().contains(&b_play)
        });
        assert!(stranded.is_some());
    }

    #[test]
    fn step_cap_flags_an_incomplete_enumeration() {
        let instance = pair(Constraint::True, Constraint::True);
        let explored = explore_requests(&instance, &baseline(), false, 5).unwrap();
        assert!(!explored.complete);
        assert!(explored.traces.len() < 27);
    }

    #[test]
    fn replay_rejects_a_tampered_trace() {
        let instance = Instance::new(vec![single(Constraint::True)], Tick::new(1)).unwrap();
        let explored = explore_requests(&instance, &baseline(), false, 1_000).unwrap();
        let mut trace = explored.traces[1].clone(); // the tick schedule
        trace.push(Event::Rejected {
            right: Right::new("A", ActionKind::Play),
            reason: "fabricated".into(),
        });
        let err = replay_trace(&instance, &trace).unwrap_err();
        assert!(matches!(err, VerifyError::Replay(_)));
    }
}
