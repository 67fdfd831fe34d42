//! License labels: breadth, dominant constraint kind, and last-execution.
//!
//! A label summarizes how risky it is to consume a license right now:
//! whether it grants more than one distinct right (`multi`), which
//! constraint kind dominates it under the configured precedence, and whether
//! a count that gates every use of the license is down to its final
//! execution (`last`). The labeled chooser penalizes licenses that are both
//! `multi` and `last`, because consuming those destroys sibling rights.

use crate::eval::{ConstraintState, EvalError, NodePath, Slot};
use crate::license::{Constraint, ConstraintKind, License};
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use thiserror::Error;

/// A strict total order over the four constraint kinds; earlier means more
/// urgent to consume. The default puts deadlines first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecedenceTable {
    order: [ConstraintKind; 4],
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct PrecedenceError(String);

impl Default for PrecedenceTable {
    fn default() -> Self {
        PrecedenceTable {
            order: [
                ConstraintKind::Until,
                ConstraintKind::Interval,
                ConstraintKind::Count,
                ConstraintKind::Unconstrained,
            ],
        }
    }
}

impl PrecedenceTable {
    pub fn new(order: [ConstraintKind; 4]) -> Result<Self, PrecedenceError> {
        for kind in ConstraintKind::ALL {
            if !order.contains(&kind) {
                return Err(PrecedenceError(format!(
                    "precedence order must list every constraint kind exactly once (missing {kind})"
                )));
            }
        }
        Ok(PrecedenceTable { order })
    }

    pub fn order(&self) -> &[ConstraintKind; 4] {
        &self.order
    }

    /// Position of `kind` in the order; lower outranks higher.
    pub fn rank(&self, kind: ConstraintKind) -> usize {
        self.order.iter().position(|k| *k == kind).expect("total")
    }
}

impl FromStr for PrecedenceTable {
    type Err = PrecedenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let kinds: Vec<ConstraintKind> = s
            .split(',')
            .map(|part| part.trim().parse().map_err(PrecedenceError))
            .collect::<Result<_, _>>()?;
        let order: [ConstraintKind; 4] = kinds.try_into().map_err(|v: Vec<_>| {
            PrecedenceError(format!("expected 4 constraint kinds, got {}", v.len()))
        })?;
        PrecedenceTable::new(order)
    }
}

/// The highest-precedence constrained kind occurring anywhere in the
/// license; `Unconstrained` exactly when only `True` nodes occur.
pub fn dominant_constraint(license: &License, table: &PrecedenceTable) -> ConstraintKind {
    let mut best: Option<ConstraintKind> = None;
    let mut consider = |c: &Constraint| {
        for node in c.conjuncts() {
            let kind = node.kind().expect("conjunctions are flat");
            if kind == ConstraintKind::Unconstrained {
                continue;
            }
            match best {
                Some(current) if table.rank(kind) >= table.rank(current) => {}
                _ => best = Some(kind),
            }
        }
    };
    consider(&license.top);
    for perm in &license.permissions {
        consider(&perm.constraint);
    }
    best.unwrap_or(ConstraintKind::Unconstrained)
}

/// Chooser-facing summary of one license in one state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    /// Grants more than one distinct right.
    pub multi: bool,
    /// Dominant constraint kind under the configured precedence.
    pub dominant: ConstraintKind,
    /// Some count gating every use of the license is at exactly one
    /// remaining execution.
    pub last: bool,
}

/// Paths of the count nodes whose satisfaction is necessary for every
/// permission: counts in the top constraint, plus counts in the sole
/// permission's constraint when the license grants exactly one permission.
pub fn governing_count_paths(license: &License) -> Vec<NodePath> {
    let mut paths = Vec::new();
    let mut collect = |c: &Constraint, slot: Slot| match c {
        Constraint::Count(_) => paths.push(NodePath::root(slot)),
        Constraint::And(parts) => {
            for (i, part) in parts.iter().enumerate() {
                if matches!(part, Constraint::Count(_)) {
                    paths.push(NodePath::member(slot, i as u32));
                }
            }
        }
        _ => {}
    };
    collect(&license.top, Slot::Top);
    if license.permissions.len() == 1 {
        collect(&license.permissions[0].constraint, Slot::Permission(0));
    }
    paths
}

/// Computes the label of `license` in the given state.
pub fn compute_label(
    license: &License,
    st: &ConstraintState,
    table: &PrecedenceTable,
) -> Result<Label, EvalError> {
    let multi = license.granted_rights().len() > 1;
    let dominant = dominant_constraint(license, table);
    let mut last = false;
    for path in governing_count_paths(license) {
        let remaining = st
            .remaining(&license.id, path)
            .ok_or(EvalError::MissingState {
                license: license.id.clone(),
                path,
            })?;
        if remaining == 1 {
            last = true;
            break;
        }
    }
    Ok(Label {
        multi,
        dominant,
        last,
    })
}
