//! Bounded checking of the two license-pool properties: *safety* — every
//! request the agent serves is served by a license whose constraints hold
//! at that moment — and *leads-to liveness* — along fair schedules, every
//! granted right is exercised by the horizon.
//!
//! Safety walks the reachable state graph breadth-first, re-evaluating the
//! chosen license against the pre-request state at every request edge.
//! Liveness sweeps layer by layer to exactly the horizon over states
//! augmented with one bit per right recording "the schedule starved this
//! right": some step passed it up while it sat usable and white, or a tick
//! expired it. A white right lost with its bit clear was destroyed outright
//! by the chooser's own spending, at the first step that could have touched
//! it — a genuine loss. Both checks rebuild a concrete counterexample trace
//! by replaying the found schedule through the real agent.

use super::explore::{classify_final, step_starvation, FinalClass};
use super::{Instance, Property, Verdict, VerifyError};
use crate::agent::{AgentError, AgentState, Chooser, Color};
use crate::eval::{license_serves, NodeKey};
use crate::license::{Right, Tick};
use crate::trace::{Event, Trace};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Compressed identity of an agent state: clock, count residues, interval
/// anchors, and the coloring as a bitmask. Field order fixes the
/// exploration order, which keeps counterexamples reproducible.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct StateKey {
    now: u64,
    counts: Vec<u32>,
    first_uses: Vec<Option<u64>>,
    black: u128,
}

/// A state key plus the starvation mask of the schedule that reached it:
/// one bit per right that was passed up while usable or expired at a tick.
type Aug = (StateKey, u128);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum StepLabel {
    Request(Right),
    Tick,
}

/// The fixed coordinate system for state keys: which stateful nodes and
/// which rights exist never changes after setup.
struct KeySchema {
    counts: Vec<NodeKey>,
    intervals: Vec<NodeKey>,
    rights: Vec<Right>,
}

impl KeySchema {
    fn of(root: &AgentState) -> Result<KeySchema, VerifyError> {
        let counts = root
            .constraints()
            .remaining_entries()
            .map(|(k, _)| k.clone())
            .collect();
        let intervals = root
            .constraints()
            .first_use_entries()
            .map(|(k, _)| k.clone())
            .collect();
        let rights: Vec<Right> = root.coloring().keys().cloned().collect();
        if rights.len() > 128 {
            return Err(VerifyError::InvalidInstance(
                "more than 128 distinct rights".into(),
            ));
        }
        Ok(KeySchema {
            counts,
            intervals,
            rights,
        })
    }

    fn key(&self, state: &AgentState) -> StateKey {
        StateKey {
            now: state.now().value(),
            counts: self
                .counts
                .iter()
                .map(|(license, path)| {
                    state
                        .constraints()
                        .remaining(license, *path)
                        .expect("schema covers every count node")
                })
                .collect(),
            first_uses: self
                .intervals
                .iter()
                .map(|(license, path)| {
                    state
                        .constraints()
                        .first_use(license, *path)
                        .expect("schema covers every interval node")
                        .map(Tick::value)
                })
                .collect(),
            black: self.black_mask(state),
        }
    }

    fn black_mask(&self, state: &AgentState) -> u128 {
        let mut mask = 0u128;
        for (i, right) in self.rights.iter().enumerate() {
            if state.coloring().get(right) == Some(&Color::Black) {
                mask |= 1 << i;
            }
        }
        mask
    }

    fn mask_of(&self, rights: &BTreeSet<Right>) -> u128 {
        let mut mask = 0u128;
        for right in rights {
            let i = self
                .rights
                .binary_search(right)
                .expect("schema covers every right");
            mask |= 1 << i;
        }
        mask
    }

    fn set_of(&self, mask: u128) -> BTreeSet<Right> {
        self.rights
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, r)| r.clone())
            .collect()
    }
}

/// Replays a schedule through a fresh agent, collecting the full trace.
fn replay_steps(
    instance: &Instance,
    chooser: &dyn Chooser,
    steps: &[StepLabel],
) -> Result<Trace, VerifyError> {
    let (mut state, mut trace) = instance.setup();
    for step in steps {
        match step {
            StepLabel::Request(right) => match state.request(right, chooser) {
                Ok((next, _decision, events)) => {
                    trace.extend(events);
                    state = next;
                }
                Err(err @ AgentError::NotPermitted(_)) => {
                    trace.push(Event::Rejected {
                        right: right.clone(),
                        reason: err.to_string(),
                    });
                }
                Err(other) => return Err(other.into()),
            },
            StepLabel::Tick => {
                let (next, event) = state.tick();
                trace.push(event);
                state = next;
            }
        }
    }
    Ok(trace)
}

fn assert_monotone(before: &AgentState, after: &AgentState) {
    for (right, color) in before.coloring() {
        if *color == Color::Black {
            assert_eq!(
                after.coloring().get(right),
                Some(&Color::Black),
                "coloring must be monotone: {right} flipped back to white",
            );
        }
    }
}

/// Exhaustively checks that within the horizon, every request the agent
/// serves is served by a license whose constraints hold in the state the
/// request arrived in.
pub fn check_safety(
    instance: &Instance,
    chooser: &dyn Chooser,
    state_cap: usize,
) -> Result<Verdict, VerifyError> {
    let (root, _) = instance.setup();
    let schema = KeySchema::of(&root)?;
    let horizon = instance.horizon.value();
    let root_key = schema.key(&root);
    let mut visited: BTreeSet<StateKey> = [root_key.clone()].into();
    let mut parents: BTreeMap<StateKey, (StateKey, StepLabel)> = BTreeMap::new();
    let mut frontier: VecDeque<(StateKey, AgentState, u64)> =
        VecDeque::from([(root_key, root, 0)]);

    while let Some((key, state, depth)) = frontier.pop_front() {
        if depth == horizon {
            continue;
        }
        let reach = |visited: &mut BTreeSet<StateKey>,
                     frontier: &mut VecDeque<(StateKey, AgentState, u64)>,
                     parents: &mut BTreeMap<StateKey, (StateKey, StepLabel)>,
                     successor: AgentState,
                     label: StepLabel|
         -> Result<(), VerifyError> {
            let succ_key = schema.key(&successor);
            if visited.insert(succ_key.clone()) {
                if visited.len() > state_cap {
                    return Err(VerifyError::CapExceeded { cap: state_cap });
                }
                parents.insert(succ_key.clone(), (key.clone(), label));
                frontier.push_back((succ_key, successor, depth + 1));
            }
            Ok(())
        };
        for right in &schema.rights {
            match state.request(right, chooser) {
                Ok((successor, decision, _events)) => {
                    let chosen = &state.licenses()[&decision.chosen];
                    if !license_serves(chosen, state.constraints(), state.now(), right)? {
                        let mut steps = path_to(&parents, &key);
                        steps.push(StepLabel::Request(right.clone()));
                        let trace = replay_steps(instance, chooser, &steps)?;
                        return Ok(Verdict::violated(Property::Safety, trace));
                    }
                    reach(
                        &mut visited,
                        &mut frontier,
                        &mut parents,
                        successor,
                        StepLabel::Request(right.clone()),
                    )?;
                }
                // A denied request leaves the state alone: a self-loop adds
                // no new reachable state.
                Err(AgentError::NotPermitted(_)) => {}
                Err(other) => return Err(other.into()),
            }
        }
        let (successor, _) = state.tick();
        reach(
            &mut visited,
            &mut frontier,
            &mut parents,
            successor,
            StepLabel::Tick,
        )?;
    }
    Ok(Verdict::holding(Property::Safety))
}

fn path_to(parents: &BTreeMap<StateKey, (StateKey, StepLabel)>, end: &StateKey) -> Vec<StepLabel> {
    let mut labels = Vec::new();
    let mut cursor = end.clone();
    while let Some((previous, label)) = parents.get(&cursor) {
        labels.push(label.clone());
        cursor = previous.clone();
    }
    labels.reverse();
    labels
}

/// Checks that along every fair schedule, each granted right is exercised
/// by the horizon. Returns the verdict alone; `check_liveness_full` also
/// reports the size of the worst fair loss.
pub fn check_liveness(
    instance: &Instance,
    chooser: &dyn Chooser,
    state_cap: usize,
) -> Result<Verdict, VerifyError> {
    check_liveness_full(instance, chooser, state_cap).map(|(verdict, _)| verdict)
}

/// Layered sweep to exactly the horizon. The returned count is the largest
/// number of rights any single fair schedule loses — 0 when the property
/// holds, at least 1 when it does not.
pub fn check_liveness_full(
    instance: &Instance,
    chooser: &dyn Chooser,
    state_cap: usize,
) -> Result<(Verdict, u32), VerifyError> {
    let (root, _) = instance.setup();
    let schema = KeySchema::of(&root)?;
    let horizon = instance.horizon.value();

    let mut layer: BTreeMap<Aug, AgentState> = BTreeMap::from([((schema.key(&root), 0), root)]);
    let mut parents: Vec<BTreeMap<Aug, (Aug, StepLabel)>> = Vec::new();
    let mut total = layer.len();

    for _ in 0..horizon {
        let mut next_layer: BTreeMap<Aug, AgentState> = BTreeMap::new();
        let mut next_parents: BTreeMap<Aug, (Aug, StepLabel)> = BTreeMap::new();
        for (aug, state) in &layer {
            let reach = |next_layer: &mut BTreeMap<Aug, AgentState>,
                             next_parents: &mut BTreeMap<Aug, (Aug, StepLabel)>,
                             successor: AgentState,
                             bits: u128,
                             label: StepLabel| {
                let succ: Aug = (schema.key(&successor), bits);
                if !next_layer.contains_key(&succ) {
                    next_parents.insert(succ.clone(), (aug.clone(), label));
                    next_layer.insert(succ, successor);
                }
            };
            for right in &schema.rights {
                match state.request(right, chooser) {
                    Ok((successor, _decision, _events)) => {
                        assert_monotone(state, &successor);
                        let starved = schema.mask_of(&step_starvation(state, &successor, false));
                        reach(
                            &mut next_layer,
                            &mut next_parents,
                            successor,
                            aug.1 | starved,
                            StepLabel::Request(right.clone()),
                        );
                    }
                    // A denied request is a stutter step: same state, and it
                    // passes up every usable white right.
                    Err(AgentError::NotPermitted(_)) => {
                        let starved = schema.mask_of(&step_starvation(state, state, false));
                        reach(
                            &mut next_layer,
                            &mut next_parents,
                            state.clone(),
                            aug.1 | starved,
                            StepLabel::Request(right.clone()),
                        );
                    }
                    Err(other) => return Err(other.into()),
                }
            }
            let (successor, _) = state.tick();
            assert_monotone(state, &successor);
            let starved = schema.mask_of(&step_starvation(state, &successor, true));
            reach(
                &mut next_layer,
                &mut next_parents,
                successor,
                aug.1 | starved,
                StepLabel::Tick,
            );
        }
        total += next_layer.len();
        if total > state_cap {
            return Err(VerifyError::CapExceeded { cap: state_cap });
        }
        parents.push(next_parents);
        layer = next_layer;
    }

    let mut max_lost = 0u32;
    let mut witness: Option<Aug> = None;
    for (aug, state) in &layer {
        match classify_final(state, &schema.set_of(aug.1)) {
            FinalClass::Unfair => {}
            FinalClass::Fair { lost } => {
                max_lost = max_lost.max(lost.len() as u32);
                if !lost.is_empty() && witness.is_none() {
                    witness = Some(aug.clone());
                }
            }
        }
    }
    if let Some(aug) = witness {
        let steps = aug_path(&parents, &aug);
        let trace = replay_steps(instance, chooser, &steps)?;
        return Ok((Verdict::violated(Property::Liveness, trace), max_lost));
    }
    Ok((Verdict::holding(Property::Liveness), max_lost))
}

fn aug_path(parents: &[BTreeMap<Aug, (Aug, StepLabel)>], end: &Aug) -> Vec<StepLabel> {
    let mut labels = Vec::with_capacity(parents.len());
    let mut cursor = end.clone();
    for layer in parents.iter().rev() {
        let (previous, label) = layer
            .get(&cursor)
            .expect("every layered state has a parent")
            .clone();
        labels.push(label);
        cursor = previous;
    }
    labels.reverse();
    labels
}

/// A liveness verdict only speaks up to the horizon. When the horizon does
/// not clear the latest deadline in the instance, say so.
pub fn horizon_warning(instance: &Instance) -> Option<String> {
    let deadline = instance.max_deadline()?;
    if instance.horizon <= deadline {
        Some(format!(
            "horizon {} does not clear the latest deadline {deadline}; \
             behavior past the bound is unchecked",
            instance.horizon
        ))
    } else {
        None
    }
}
