//! Constraint-state tracking and permission evaluation.
//!
//! Stateful constraint nodes (counts and intervals) live outside the license
//! document in a [`ConstraintState`], keyed by license id plus the node's
//! path inside the document. Evaluation reads the residue; transitions in
//! [`crate::agent`] update it.

use crate::license::{Constraint, License, LicenseId, Right, Tick};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Which constraint of a license a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    Top,
    Permission(u32),
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Top => f.write_str("top"),
            Slot::Permission(i) => write!(f, "permissions[{i}].constraint"),
        }
    }
}

/// Path of a constraint node: the slot's root, or one member of the
/// conjunction at that root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodePath {
    pub slot: Slot,
    pub child: Option<u32>,
}

impl NodePath {
    pub fn root(slot: Slot) -> Self {
        NodePath { slot, child: None }
    }

    pub fn member(slot: Slot, index: u32) -> Self {
        NodePath {
            slot,
            child: Some(index),
        }
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.child {
            None => write!(f, "{}", self.slot),
            Some(i) => write!(f, "{}.and[{i}]", self.slot),
        }
    }
}

pub type NodeKey = (LicenseId, NodePath);

/// Evaluation failure: the state has no entry for a stateful node, which
/// only happens when a license was never registered (a construction bug).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no tracked state for {license} {path} (license not registered)")]
    MissingState { license: LicenseId, path: NodePath },
}

/// Residue of all stateful constraint nodes across installed licenses:
/// remaining executions per count node, first-use instant per interval node.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ConstraintState {
    remaining: BTreeMap<NodeKey, u32>,
    first_use: BTreeMap<NodeKey, Option<Tick>>,
}

/// Walks the stateful nodes of one constraint with their paths.
fn stateful_nodes<'a>(
    constraint: &'a Constraint,
    slot: Slot,
) -> impl Iterator<Item = (NodePath, &'a Constraint)> {
    let parts: Vec<(NodePath, &Constraint)> = match constraint {
        Constraint::And(parts) => parts
            .iter()
            .enumerate()
            .map(|(i, p)| (NodePath::member(slot, i as u32), p))
            .collect(),
        leaf => vec![(NodePath::root(slot), leaf)],
    };
    parts.into_iter()
}

/// All (path, node) pairs of a license: top constraint plus each permission.
pub fn license_nodes(license: &License) -> Vec<(NodePath, &Constraint)> {
    let mut nodes: Vec<(NodePath, &Constraint)> =
        stateful_nodes(&license.top, Slot::Top).collect();
    for (i, perm) in license.permissions.iter().enumerate() {
        nodes.extend(stateful_nodes(&perm.constraint, Slot::Permission(i as u32)));
    }
    nodes
}

impl ConstraintState {
    pub fn new() -> Self {
        ConstraintState::default()
    }

    /// Creates fresh entries for every count and interval node of `license`:
    /// full budgets, no first uses. Existing entries for the same license id
    /// are overwritten; the caller guards against duplicate installs.
    pub fn register(&mut self, license: &License) {
        for (path, node) in license_nodes(license) {
            let key = (license.id.clone(), path);
            match node {
                Constraint::Count(total) => {
                    self.remaining.insert(key, *total);
                }
                Constraint::Interval(_) => {
                    self.first_use.insert(key, None);
                }
                _ => {}
            }
        }
    }

    pub fn remaining(&self, license: &LicenseId, path: NodePath) -> Option<u32> {
        self.remaining.get(&(license.clone(), path)).copied()
    }

    pub fn first_use(&self, license: &LicenseId, path: NodePath) -> Option<Option<Tick>> {
        self.first_use.get(&(license.clone(), path)).copied()
    }

    /// Overwrites the residue of a count node. Low-level; meant for building
    /// test states and generated evaluation scenarios.
    pub fn set_remaining(&mut self, license: &LicenseId, path: NodePath, value: u32) {
        self.remaining.insert((license.clone(), path), value);
    }

    /// Overwrites the first use of an interval node. Low-level, as above.
    pub fn set_first_use(&mut self, license: &LicenseId, path: NodePath, value: Option<Tick>) {
        self.first_use.insert((license.clone(), path), value);
    }

    /// Consumes one execution from a count node, saturating at zero.
    pub(crate) fn decrement(&mut self, license: &LicenseId, path: NodePath) {
        if let Some(v) = self.remaining.get_mut(&(license.clone(), path)) {
            *v = v.saturating_sub(1);
        }
    }

    /// Records the first use of an interval node; later uses never move it.
    pub(crate) fn mark_first_use(&mut self, license: &LicenseId, path: NodePath, now: Tick) {
        if let Some(slot) = self.first_use.get_mut(&(license.clone(), path)) {
            if slot.is_none() {
                *slot = Some(now);
            }
        }
    }

    pub fn remaining_entries(&self) -> impl Iterator<Item = (&NodeKey, u32)> {
        self.remaining.iter().map(|(k, v)| (k, *v))
    }

    pub fn first_use_entries(&self) -> impl Iterator<Item = (&NodeKey, Option<Tick>)> {
        self.first_use.iter().map(|(k, v)| (k, *v))
    }
}

fn eval_leaf(
    node: &Constraint,
    st: &ConstraintState,
    license: &LicenseId,
    path: NodePath,
    now: Tick,
) -> Result<bool, EvalError> {
    match node {
        Constraint::True => Ok(true),
        Constraint::Count(_) => {
            let remaining = st.remaining(license, path).ok_or(EvalError::MissingState {
                license: license.clone(),
                path,
            })?;
            Ok(remaining > 0)
        }
        Constraint::Until(deadline) => Ok(now <= *deadline),
        Constraint::Interval(duration) => {
            let first = st.first_use(license, path).ok_or(EvalError::MissingState {
                license: license.clone(),
                path,
            })?;
            Ok(match first {
                None => true,
                Some(start) => now <= start.plus(*duration),
            })
        }
        Constraint::And(_) => unreachable!("conjunctions are flat"),
    }
}

/// Evaluates the constraint rooted at `slot` of license `license` at time
/// `now`, reading residue from `st`.
pub fn eval_constraint(
    constraint: &Constraint,
    st: &ConstraintState,
    license: &LicenseId,
    slot: Slot,
    now: Tick,
) -> Result<bool, EvalError> {
    for (path, node) in stateful_nodes(constraint, slot) {
        if !eval_leaf(node, st, license, path, now)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether permission `index` of `license` is satisfied on its own (the
/// top-level constraint is not consulted).
pub fn permission_satisfied(
    license: &License,
    st: &ConstraintState,
    index: usize,
    now: Tick,
) -> Result<bool, EvalError> {
    let perm = &license.permissions[index];
    eval_constraint(
        &perm.constraint,
        st,
        &license.id,
        Slot::Permission(index as u32),
        now,
    )
}

/// The permission that a request for `right` exercises: the first one for
/// `right` whose constraint is satisfied, falling back to the first one for
/// `right` at all (so that a forced, invalid choice still has a defined
/// target). `None` when the license does not mention the right.
pub fn matched_permission(
    license: &License,
    st: &ConstraintState,
    now: Tick,
    right: &Right,
) -> Result<Option<usize>, EvalError> {
    let indices = license.permissions_for(right);
    for &i in &indices {
        if permission_satisfied(license, st, i, now)? {
            return Ok(Some(i));
        }
    }
    Ok(indices.first().copied())
}

/// Whether `license` can serve `right` at `now`: its top constraint holds
/// and some permission for the right is satisfied.
pub fn license_serves(
    license: &License,
    st: &ConstraintState,
    now: Tick,
    right: &Right,
) -> Result<bool, EvalError> {
    if !eval_constraint(&license.top, st, &license.id, Slot::Top, now)? {
        return Ok(false);
    }
    for i in license.permissions_for(right) {
        if permission_satisfied(license, st, i, now)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Every right granted right now by some license in `licenses`.
pub fn permission_set<'a>(
    licenses: impl IntoIterator<Item = &'a License>,
    st: &ConstraintState,
    now: Tick,
) -> Result<BTreeSet<Right>, EvalError> {
    let mut rights = BTreeSet::new();
    for license in licenses {
        if !eval_constraint(&license.top, st, &license.id, Slot::Top, now)? {
            continue;
        }
        for (i, perm) in license.permissions.iter().enumerate() {
            if rights.contains(&perm.right) {
                continue;
            }
            if permission_satisfied(license, st, i, now)? {
                rights.insert(perm.right.clone());
            }
        }
    }
    Ok(rights)
}

/// Whether `right` is granted at `now` by some license in `licenses`.
pub fn permitted<'a>(
    right: &Right,
    licenses: impl IntoIterator<Item = &'a License>,
    st: &ConstraintState,
    now: Tick,
) -> Result<bool, EvalError> {
    for license in licenses {
        if license_serves(license, st, now, right)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Last instant at which something can still be satisfied, given the current
/// residue. Every constraint's satisfaction set is a prefix of the timeline,
/// so a window is fully described by how it ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowEnd {
    /// Unsatisfiable at any time (an exhausted count).
    Never,
    /// Satisfiable exactly up to and including this tick.
    At(Tick),
    /// Satisfiable at every future tick.
    Unbounded,
}

impl WindowEnd {
    fn meet(self, other: WindowEnd) -> WindowEnd {
        match (self, other) {
            (WindowEnd::Never, _) | (_, WindowEnd::Never) => WindowEnd::Never,
            (WindowEnd::Unbounded, w) | (w, WindowEnd::Unbounded) => w,
            (WindowEnd::At(a), WindowEnd::At(b)) => WindowEnd::At(a.min(b)),
        }
    }

    fn join(self, other: WindowEnd) -> WindowEnd {
        match (self, other) {
            (WindowEnd::Unbounded, _) | (_, WindowEnd::Unbounded) => WindowEnd::Unbounded,
            (WindowEnd::Never, w) | (w, WindowEnd::Never) => w,
            (WindowEnd::At(a), WindowEnd::At(b)) => WindowEnd::At(a.max(b)),
        }
    }

    /// Whether the window still contains some tick `>= now`.
    pub fn reaches(self, now: Tick) -> bool {
        match self {
            WindowEnd::Never => false,
            WindowEnd::At(end) => now <= end,
            WindowEnd::Unbounded => true,
        }
    }
}

fn constraint_window(
    constraint: &Constraint,
    st: &ConstraintState,
    license: &LicenseId,
    slot: Slot,
) -> Result<WindowEnd, EvalError> {
    let mut window = WindowEnd::Unbounded;
    for (path, node) in stateful_nodes(constraint, slot) {
        let node_window = match node {
            Constraint::True => WindowEnd::Unbounded,
            Constraint::Count(_) => {
                let remaining = st.remaining(license, path).ok_or(EvalError::MissingState {
                    license: license.clone(),
                    path,
                })?;
                if remaining > 0 {
                    WindowEnd::Unbounded
                } else {
                    WindowEnd::Never
                }
            }
            Constraint::Until(deadline) => WindowEnd::At(*deadline),
            Constraint::Interval(duration) => {
                let first = st.first_use(license, path).ok_or(EvalError::MissingState {
                    license: license.clone(),
                    path,
                })?;
                match first {
                    None => WindowEnd::Unbounded,
                    Some(start) => WindowEnd::At(start.plus(*duration)),
                }
            }
            Constraint::And(_) => unreachable!("conjunctions are flat"),
        };
        window = window.meet(node_window);
    }
    Ok(window)
}

/// End of the window in which `license` can serve `right`, given the current
/// residue: the best (latest-ending) permission window intersected with the
/// top-level one. Exhaustive over all constraint nodes.
pub fn serve_window_end(
    license: &License,
    st: &ConstraintState,
    right: &Right,
) -> Result<WindowEnd, EvalError> {
    let top = constraint_window(&license.top, st, &license.id, Slot::Top)?;
    let mut best = WindowEnd::Never;
    for i in license.permissions_for(right) {
        let perm = constraint_window(
            &license.permissions[i].constraint,
            st,
            &license.id,
            Slot::Permission(i as u32),
        )?;
        best = best.join(perm.meet(top));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::license::{ActionKind, AssetId, Permission};

    fn license(id: &str, top: Constraint, perms: Vec<(Constraint, &str, ActionKind)>) -> License {
        let about: BTreeSet<AssetId> = perms.iter().map(|(_, a, _)| AssetId::new(*a)).collect();
        License::new(
            LicenseId::new(id),
            about,
            top,
            perms
                .into_iter()
                .map(|(c, a, act)| Permission::new(c, Right::new(a, act)))
                .collect(),
        )
        .unwrap()
    }

    fn overlap_l1() -> License {
        license(
            "L1",
            Constraint::And(vec![Constraint::Count(1), Constraint::Until(Tick::new(30))]),
            vec![
                (Constraint::True, "A", ActionKind::Play),
                (Constraint::True, "B", ActionKind::Play),
            ],
        )
    }

    fn overlap_l2() -> License {
        license(
            "L2",
            Constraint::Count(10),
            vec![
                (Constraint::True, "A", ActionKind::Play),
                (Constraint::True, "D", ActionKind::Play),
            ],
        )
    }

    #[test]
    fn true_constraint_always_holds() {
        let st = ConstraintState::new();
        let id = LicenseId::new("L");
        assert!(eval_constraint(&Constraint::True, &st, &id, Slot::Top, Tick::new(99)).unwrap());
    }

    #[test]
    fn exhausted_count_fails() {
        let l = license("L", Constraint::Count(1), vec![(Constraint::True, "A", ActionKind::Play)]);
        let mut st = ConstraintState::new();
        st.register(&l);
        st.set_remaining(&l.id, NodePath::root(Slot::Top), 0);
        assert!(!eval_constraint(&l.top, &st, &l.id, Slot::Top, Tick::ZERO).unwrap());
    }

    #[test]
    fn count_and_until_window() {
        let l = overlap_l1();
        let mut st = ConstraintState::new();
        st.register(&l);
        assert!(eval_constraint(&l.top, &st, &l.id, Slot::Top, Tick::new(30)).unwrap());
        assert!(!eval_constraint(&l.top, &st, &l.id, Slot::Top, Tick::new(31)).unwrap());
    }

    #[test]
    fn interval_opens_on_first_use() {
        let l = license(
            "L",
            Constraint::Interval(5),
            vec![(Constraint::True, "A", ActionKind::Play)],
        );
        let mut st = ConstraintState::new();
        st.register(&l);
        let path = NodePath::root(Slot::Top);
        assert!(eval_constraint(&l.top, &st, &l.id, Slot::Top, Tick::new(1000)).unwrap());
        st.mark_first_use(&l.id, path, Tick::new(3));
        assert!(eval_constraint(&l.top, &st, &l.id, Slot::Top, Tick::new(8)).unwrap());
        assert!(!eval_constraint(&l.top, &st, &l.id, Slot::Top, Tick::new(9)).unwrap());
        st.mark_first_use(&l.id, path, Tick::new(7));
        assert_eq!(st.first_use(&l.id, path), Some(Some(Tick::new(3))));
    }

    #[test]
    fn missing_state_is_an_error() {
        let st = ConstraintState::new();
        let id = LicenseId::new("L");
        let err =
            eval_constraint(&Constraint::Count(1), &st, &id, Slot::Top, Tick::ZERO).unwrap_err();
        assert!(matches!(err, EvalError::MissingState { .. }));
    }

    #[test]
    fn permission_set_over_empty_list_is_empty() {
        let st = ConstraintState::new();
        assert!(permission_set([], &st, Tick::ZERO).unwrap().is_empty());
    }

    #[test]
    fn permission_set_drops_licenses_with_failed_top() {
        let l1 = overlap_l1();
        let l2 = overlap_l2();
        let mut st = ConstraintState::new();
        st.register(&l1);
        st.register(&l2);
        st.set_remaining(&l1.id, NodePath::member(Slot::Top, 0), 0);
        let set = permission_set([&l1, &l2], &st, Tick::ZERO).unwrap();
        assert_eq!(
            set,
            [Right::new("A", ActionKind::Play), Right::new("D", ActionKind::Play)]
                .into_iter()
                .collect()
        );
    }

    #[test]
    fn permitted_checks_one_right() {
        let l1 = overlap_l1();
        let mut st = ConstraintState::new();
        st.register(&l1);
        assert!(permitted(&Right::new("B", ActionKind::Play), [&l1], &st, Tick::ZERO).unwrap());
        assert!(!permitted(&Right::new("D", ActionKind::Play), [&l1], &st, Tick::ZERO).unwrap());
        assert!(
            !permitted(&Right::new("B", ActionKind::Play), [&l1], &st, Tick::new(31)).unwrap()
        );
    }

    #[test]
    fn serve_window_combines_top_and_permission() {
        let l = license(
            "L",
            Constraint::Until(Tick::new(10)),
            vec![
                (Constraint::Until(Tick::new(4)), "A", ActionKind::Play),
                (Constraint::True, "A", ActionKind::Display),
            ],
        );
        let mut st = ConstraintState::new();
        st.register(&l);
        assert_eq!(
            serve_window_end(&l, &st, &Right::new("A", ActionKind::Play)).unwrap(),
            WindowEnd::At(Tick::new(4))
        );
        assert_eq!(
            serve_window_end(&l, &st, &Right::new("A", ActionKind::Display)).unwrap(),
            WindowEnd::At(Tick::new(10))
        );
        assert_eq!(
            serve_window_end(&l, &st, &Right::new("B", ActionKind::Play)).unwrap(),
            WindowEnd::Never
        );
    }

    #[test]
    fn matched_permission_prefers_satisfied() {
        let l = license(
            "L",
            Constraint::True,
            vec![
                (Constraint::Count(1), "A", ActionKind::Play),
                (Constraint::True, "A", ActionKind::Play),
            ],
        );
        let mut st = ConstraintState::new();
        st.register(&l);
        let r = Right::new("A", ActionKind::Play);
        assert_eq!(matched_permission(&l, &st, Tick::ZERO, &r).unwrap(), Some(0));
        st.set_remaining(&l.id, NodePath::root(Slot::Permission(0)), 0);
        assert_eq!(matched_permission(&l, &st, Tick::ZERO, &r).unwrap(), Some(1));
        st.set_remaining(&l.id, NodePath::root(Slot::Permission(0)), 0);
        assert_eq!(
            matched_permission(&l, &st, Tick::ZERO, &Right::new("Z", ActionKind::Play)).unwrap(),
            None
        );
    }
}
