//! License choice policies: the consume-the-scarcest baseline and its
//! label-aware refinement.
//!
//! Both policies order candidates by the same total key and pick the
//! minimum. The baseline orders by dominant constraint kind (scarcer kinds
//! first), then earliest deadline, then id. The labeled policy prepends one
//! bit: licenses whose label is both `multi` and `last` sort behind
//! everything else, because consuming their final execution destroys the
//! sibling rights they still grant. When no candidate is penalized the two
//! policies agree.

use crate::agent::{AgentState, Chooser};
use crate::eval::ConstraintState;
use crate::label::{compute_label, dominant_constraint, PrecedenceTable};
use crate::license::{Constraint, License, LicenseId, Right, Tick};
use std::cmp::Ordering;
use std::collections::BTreeSet;
use thiserror::Error;

/// Sort key of one candidate license. Order: penalized last, then dominant
/// rank, then earliest deadline (no deadline sorts last), then id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceKey {
    pub penalized: bool,
    pub dominant_rank: usize,
    pub deadline: Option<Tick>,
    pub id: LicenseId,
}

impl Ord for ChoiceKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.penalized
            .cmp(&other.penalized)
            .then_with(|| self.dominant_rank.cmp(&other.dominant_rank))
            .then_with(|| match (&self.deadline, &other.deadline) {
                (Some(a), Some(b)) => a.cmp(b),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            })
            .then_with(|| self.id.cmp(&other.id))
    }
}

impl PartialOrd for ChoiceKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The earliest `until` deadline anywhere in the license, if any.
pub fn earliest_deadline(license: &License) -> Option<Tick> {
    let mut earliest: Option<Tick> = None;
    let mut consider = |c: &Constraint| {
        for node in c.conjuncts() {
            if let Constraint::Until(deadline) = node {
                earliest = Some(match earliest {
                    Some(t) => t.min(*deadline),
                    None => *deadline,
                });
            }
        }
    };
    consider(&license.top);
    for perm in &license.permissions {
        consider(&perm.constraint);
    }
    earliest
}

/// The full sort key of `license` in the given state.
pub fn choice_key(
    license: &License,
    st: &ConstraintState,
    table: &PrecedenceTable,
) -> ChoiceKey {
    let label = compute_label(license, st, table)
        .expect("constraint state covers installed licenses");
    ChoiceKey {
        penalized: label.multi && label.last,
        dominant_rank: table.rank(dominant_constraint(license, table)),
        deadline: earliest_deadline(license),
        id: license.id.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChooseError {
    #[error("cannot choose from an empty candidate set")]
    EmptyCandidates,
    #[error("candidate {0} is not installed")]
    UnknownCandidate(LicenseId),
}

fn choose_by_key(
    candidates: &BTreeSet<LicenseId>,
    state: &AgentState,
    table: &PrecedenceTable,
    penalize: bool,
) -> Result<LicenseId, ChooseError> {
    if candidates.is_empty() {
        return Err(ChooseError::EmptyCandidates);
    }
    let mut best: Option<ChoiceKey> = None;
    for id in candidates {
        let license = state
            .licenses()
            .get(id)
            .ok_or_else(|| ChooseError::UnknownCandidate(id.clone()))?;
        let mut key = choice_key(license, state.constraints(), table);
        if !penalize {
            key.penalized = false;
        }
        match &best {
            Some(current) if *current <= key => {}
            _ => best = Some(key),
        }
    }
    Ok(best.expect("candidates are non-empty").id)
}

/// The consume-the-scarcest policy: dominant constraint kind, then earliest
/// deadline, then id. Labels play no part.
pub fn choose_baseline(
    candidates: &BTreeSet<LicenseId>,
    state: &AgentState,
    table: &PrecedenceTable,
) -> Result<LicenseId, ChooseError> {
    choose_by_key(candidates, state, table, false)
}

/// The label-aware policy: identical to the baseline except that candidates
/// labeled both `multi` and `last` are deferred whenever any unpenalized
/// candidate exists.
pub fn choose_labeled(
    candidates: &BTreeSet<LicenseId>,
    state: &AgentState,
    table: &PrecedenceTable,
) -> Result<LicenseId, ChooseError> {
    choose_by_key(candidates, state, table, true)
}

/// The baseline policy as an agent chooser.
#[derive(Debug, Clone)]
pub struct BaselineChooser {
    pub table: PrecedenceTable,
}

impl Chooser for BaselineChooser {
    fn name(&self) -> &str {
        "oma"
    }
    fn choose(
        &self,
        candidates: &BTreeSet<LicenseId>,
        state: &AgentState,
        _request: &Right,
    ) -> LicenseId {
        choose_baseline(candidates, state, &self.table).expect("candidates are non-empty")
    }
}

/// The label-aware policy as an agent chooser.
#[derive(Debug, Clone)]
pub struct LabeledChooser {
    pub table: PrecedenceTable,
}

impl Chooser for LabeledChooser {
    fn name(&self) -> &str {
        "labeled"
    }
    fn choose(
        &self,
        candidates: &BTreeSet<LicenseId>,
        state: &AgentState,
        _request: &Right,
    ) -> LicenseId {
        choose_labeled(candidates, state, &self.table).expect("candidates are non-empty")
    }
}

/// Name-addressable chooser selection, as used by configuration and flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChooserKind {
    Oma,
    Labeled,
}

impl ChooserKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChooserKind::Oma => "oma",
            ChooserKind::Labeled => "labeled",
        }
    }

    pub fn build(self, table: PrecedenceTable) -> Box<dyn Chooser> {
        match self {
            ChooserKind::Oma => Box::new(BaselineChooser { table }),
            ChooserKind::Labeled => Box::new(LabeledChooser { table }),
        }
    }
}

impl std::str::FromStr for ChooserKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oma" => Ok(ChooserKind::Oma),
            "labeled" => Ok(ChooserKind::Labeled),
            other => Err(format!(
                "unknown chooser {other:?} (expected oma or labeled)"
            )),
        }
    }
}

impl std::fmt::Display for ChooserKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
