//! Rights-expression engine and bounded verifier.
//!
//! The library parses JSON license agreements (assets, permissions,
//! constraints), evaluates which rights they permit as counts deplete and
//! deadlines pass, picks a serving license per request under two policies,
//! and exhaustively checks small installations for constraint violations
//! and permanent loss of still-unused rights.
//!
//! Modules, bottom up:
//!
//! * [`license`] — abstract syntax: assets, actions, rights, constraints,
//!   licenses, and their validation.
//! * [`format`] — the strict JSON reader and canonical writer.
//! * [`eval`] — constraint evaluation against mutable residue (remaining
//!   counts, interval first-use marks) and serviceability windows.
//! * [`label`] — the (multi, dominant, last) license label and the
//!   constraint-kind precedence table.
//! * [`trace`] — the JSON Lines event log emitted by agent runs.
//! * [`agent`] — the stateful agent: install, tick, request, coloring of
//!   rights, and loss detection.
//! * [`choosers`] — the baseline license-choice policy and its label-aware
//!   refinement.
//! * [`verifier`] — bounded exhaustive checking: instance enumeration,
//!   schedule exploration, safety and leads-to verdicts, policy comparison.

pub mod agent;
pub mod choosers;
pub mod eval;
pub mod format;
pub mod label;
pub mod license;
pub mod trace;
pub mod verifier;

pub use agent::{AgentState, Chooser, Color, Decision};
pub use choosers::{BaselineChooser, ChooserKind, LabeledChooser};
pub use eval::ConstraintState;
pub use label::{Label, PrecedenceTable};
pub use license::{ActionKind, AssetId, Constraint, License, LicenseId, Permission, Right, Tick};
pub use trace::{Event, Trace};
pub use verifier::{Instance, Property, Verdict};
