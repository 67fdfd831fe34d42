//! License abstract syntax: assets, actions, rights, constraints, permissions.
//!
//! A license is an agreement granting a set of permissions over the assets it
//! is `about`, gated by a top-level constraint that applies to every
//! permission plus a per-permission constraint. Constraints are conjunctions
//! of at most one node per kind: `True`, `Count`, `Until`, `Interval`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Identifier of a content item. Compared by exact string equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AssetId(String);

impl AssetId {
    pub fn new(id: impl Into<String>) -> Self {
        AssetId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AssetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Identifier of a license document. Ties in the choosers break on its order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LicenseId(String);

impl LicenseId {
    pub fn new(id: impl Into<String>) -> Self {
        LicenseId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LicenseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The closed set of actions a permission can grant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Play,
    Display,
    Print,
    Execute,
}

impl ActionKind {
    pub const ALL: [ActionKind; 4] = [
        ActionKind::Play,
        ActionKind::Display,
        ActionKind::Print,
        ActionKind::Execute,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Play => "play",
            ActionKind::Display => "display",
            ActionKind::Print => "print",
            ActionKind::Execute => "execute",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "play" => Ok(ActionKind::Play),
            "display" => Ok(ActionKind::Display),
            "print" => Ok(ActionKind::Print),
            "execute" => Ok(ActionKind::Execute),
            other => Err(format!(
                "unknown action {other:?} (expected play, display, print, or execute)"
            )),
        }
    }
}

/// A pair of asset and action: the unit of granting, coloring, and loss.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Right {
    pub asset: AssetId,
    pub action: ActionKind,
}

impl Right {
    pub fn new(asset: impl Into<String>, action: ActionKind) -> Self {
        Right {
            asset: AssetId::new(asset),
            action,
        }
    }
}

impl fmt::Display for Right {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.asset, self.action)
    }
}

/// Discrete model time. Starts at zero and only moves forward.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Tick(u64);

impl Tick {
    pub const ZERO: Tick = Tick(0);

    pub fn new(value: u64) -> Self {
        Tick(value)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn next(self) -> Tick {
        Tick(self.0 + 1)
    }

    /// Saturating addition of a duration, used for interval window ends.
    pub fn plus(self, duration: u64) -> Tick {
        Tick(self.0.saturating_add(duration))
    }
}

impl fmt::Display for Tick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The kind of a constraint leaf, used for dominance ordering and labels.
/// `Unconstrained` stands for the absence of any constrained leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Until,
    Interval,
    Count,
    Unconstrained,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 4] = [
        ConstraintKind::Until,
        ConstraintKind::Interval,
        ConstraintKind::Count,
        ConstraintKind::Unconstrained,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintKind::Until => "until",
            ConstraintKind::Interval => "interval",
            ConstraintKind::Count => "count",
            ConstraintKind::Unconstrained => "unconstrained",
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstraintKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "until" => Ok(ConstraintKind::Until),
            "interval" => Ok(ConstraintKind::Interval),
            "count" => Ok(ConstraintKind::Count),
            "unconstrained" => Ok(ConstraintKind::Unconstrained),
            other => Err(format!(
                "unknown constraint kind {other:?} (expected until, interval, count, or unconstrained)"
            )),
        }
    }
}

/// A usage constraint. `And` is kept flat: members are leaves with pairwise
/// distinct kinds, so a conjunction never nests and never repeats a kind.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    /// Always satisfied.
    True,
    /// Satisfied while a stateful execution budget remains. The payload is
    /// the total budget; the live residue is tracked per node in
    /// [`crate::eval::ConstraintState`].
    Count(u32),
    /// Satisfied while `now <= deadline`.
    Until(Tick),
    /// Satisfied until `duration` ticks have passed since the first use of
    /// the license node; before any use it is satisfied unconditionally.
    Interval(u64),
    /// Conjunction of the members.
    And(Vec<Constraint>),
}

impl Constraint {
    /// Kind of a leaf node; `None` for a conjunction.
    pub fn kind(&self) -> Option<ConstraintKind> {
        match self {
            Constraint::True => Some(ConstraintKind::Unconstrained),
            Constraint::Count(_) => Some(ConstraintKind::Count),
            Constraint::Until(_) => Some(ConstraintKind::Until),
            Constraint::Interval(_) => Some(ConstraintKind::Interval),
            Constraint::And(_) => None,
        }
    }

    /// Members of the conjunction, or the node itself for a leaf.
    pub fn conjuncts(&self) -> &[Constraint] {
        match self {
            Constraint::And(parts) => parts,
            other => std::slice::from_ref(other),
        }
    }

    /// Flattens nested conjunctions and collapses single-member ones.
    pub fn normalized(self) -> Constraint {
        match self {
            Constraint::And(parts) => {
                let mut flat = Vec::new();
                for part in parts {
                    match part.normalized() {
                        Constraint::And(inner) => flat.extend(inner),
                        leaf => flat.push(leaf),
                    }
                }
                if flat.len() == 1 {
                    flat.pop().unwrap()
                } else {
                    Constraint::And(flat)
                }
            }
            leaf => leaf,
        }
    }
}

/// Grants one action over one asset, gated by its own constraint on top of
/// the license-level one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permission {
    pub constraint: Constraint,
    pub right: Right,
}

impl Permission {
    pub fn new(constraint: Constraint, right: Right) -> Self {
        Permission { constraint, right }
    }
}

/// An agreement: `about` assets, a top-level constraint over the whole
/// document, and the granted permissions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct License {
    pub id: LicenseId,
    pub about: BTreeSet<AssetId>,
    pub top: Constraint,
    pub permissions: Vec<Permission>,
}

/// A structural defect found while validating a license, with the path of
/// the offending field in the document.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct LicenseError {
    pub path: String,
    pub message: String,
}

impl LicenseError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        LicenseError {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl License {
    /// Builds a license, normalizing all constraints and validating the
    /// result.
    pub fn new(
        id: LicenseId,
        about: BTreeSet<AssetId>,
        top: Constraint,
        permissions: Vec<Permission>,
    ) -> Result<License, LicenseError> {
        let license = License {
            id,
            about,
            top: top.normalized(),
            permissions: permissions
                .into_iter()
                .map(|p| Permission::new(p.constraint.normalized(), p.right))
                .collect(),
        };
        license.validate()?;
        Ok(license)
    }

    /// Checks every structural invariant: non-empty identifiers, at least
    /// one permission, permission assets inside `about`, positive totals and
    /// durations, and flat conjunctions without repeated kinds.
    pub fn validate(&self) -> Result<(), LicenseError> {
        if self.id.as_str().is_empty() {
            return Err(LicenseError::new("id", "license id must be non-empty"));
        }
        for asset in &self.about {
            if asset.as_str().is_empty() {
                return Err(LicenseError::new("about", "asset ids must be non-empty"));
            }
        }
        validate_constraint(&self.top, "top")?;
        if self.permissions.is_empty() {
            return Err(LicenseError::new(
                "permissions",
                "a license must grant at least one permission",
            ));
        }
        for (i, perm) in self.permissions.iter().enumerate() {
            if perm.right.asset.as_str().is_empty() {
                return Err(LicenseError::new(
                    format!("permissions[{i}].asset"),
                    "asset ids must be non-empty",
                ));
            }
            if !self.about.contains(&perm.right.asset) {
                return Err(LicenseError::new(
                    format!("permissions[{i}].asset"),
                    format!("asset {:?} is not in about", perm.right.asset.as_str()),
                ));
            }
            validate_constraint(&perm.constraint, &format!("permissions[{i}].constraint"))?;
        }
        Ok(())
    }

    /// The distinct rights granted by this license.
    pub fn granted_rights(&self) -> BTreeSet<Right> {
        self.permissions.iter().map(|p| p.right.clone()).collect()
    }

    /// Indices of the permissions granting `right`, in document order.
    pub fn permissions_for(&self, right: &Right) -> Vec<usize> {
        self.permissions
            .iter()
            .enumerate()
            .filter(|(_, p)| &p.right == right)
            .map(|(i, _)| i)
            .collect()
    }
}

fn validate_leaf(c: &Constraint, path: &str) -> Result<(), LicenseError> {
    match c {
        Constraint::True | Constraint::Until(_) => Ok(()),
        Constraint::Count(total) => {
            if *total < 1 {
                Err(LicenseError::new(path, "count total must be at least 1"))
            } else {
                Ok(())
            }
        }
        Constraint::Interval(duration) => {
            if *duration < 1 {
                Err(LicenseError::new(
                    path,
                    "interval duration must be at least 1",
                ))
            } else {
                Ok(())
            }
        }
        Constraint::And(_) => Err(LicenseError::new(path, "nested conjunction")),
    }
}

fn validate_constraint(c: &Constraint, path: &str) -> Result<(), LicenseError> {
    match c {
        Constraint::And(parts) => {
            if parts.is_empty() {
                return Err(LicenseError::new(path, "empty conjunction"));
            }
            if parts.len() == 1 {
                return Err(LicenseError::new(
                    path,
                    "single-member conjunction (collapse it to the member)",
                ));
            }
            let mut seen = BTreeSet::new();
            for (i, part) in parts.iter().enumerate() {
                let part_path = format!("{path}.and[{i}]");
                validate_leaf(part, &part_path)?;
                let kind = part.kind().expect("leaf after validate_leaf");
                if !seen.insert(kind) {
                    return Err(LicenseError::new(
                        part_path,
                        format!("duplicate constraint kind {kind} in one conjunction"),
                    ));
                }
            }
            Ok(())
        }
        leaf => validate_leaf(leaf, path),
    }
}
