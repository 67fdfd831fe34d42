//! Side-by-side verification of the two chooser policies over a corpus,
//! with the aggregate that matters: on which instances does each policy
//! lose rights, and is the labeled policy's failure set contained in the
//! baseline's?

use super::check::{check_liveness_full, check_safety};
use super::Instance;
use crate::agent::Chooser;
use crate::choosers::ChooserKind;
use crate::label::PrecedenceTable;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// One chooser's verdicts on one instance. A check that could not finish
/// (cap exceeded, oversized instance) leaves its verdict empty and explains
/// itself in the note.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub instance: String,
    pub chooser: String,
    pub safety: Option<bool>,
    pub liveness: Option<bool>,
    pub lost_rights: u32,
    pub note: String,
}

/// The cross-policy summary, always recomputable from the rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aggregates {
    pub oma_liveness_failures: Vec<String>,
    pub labeled_liveness_failures: Vec<String>,
    pub labeled_subset_of_oma: bool,
    pub strict_subset: bool,
}

impl Aggregates {
    /// Recomputes the aggregate block from the rows. The block stored in a
    /// report is exactly this function of its rows.
    pub fn of(rows: &[ReportRow]) -> Aggregates {
        let failures = |name: &str| -> Vec<String> {
            rows.iter()
                .filter(|r| r.chooser == name && r.liveness == Some(false))
                .map(|r| r.instance.clone())
                .collect()
        };
        let oma = failures("oma");
        let labeled = failures("labeled");
        let oma_set: BTreeSet<&String> = oma.iter().collect();
        let subset = labeled.iter().all(|i| oma_set.contains(i));
        let strict = subset && labeled.len() < oma.len();
        Aggregates {
            oma_liveness_failures: oma,
            labeled_liveness_failures: labeled,
            labeled_subset_of_oma: subset,
            strict_subset: strict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub aggregates: Aggregates,
}

/// Runs both policies over every instance. Instances are named by their
/// zero-based position, zero-padded so rows sort the way they ran.
pub fn compare_choosers(
    corpus: &[Instance],
    table: &PrecedenceTable,
    state_cap: usize,
) -> Report {
    let mut rows = Vec::with_capacity(corpus.len() * 2);
    for (index, instance) in corpus.iter().enumerate() {
        for kind in [ChooserKind::Oma, ChooserKind::Labeled] {
            let chooser = kind.build(table.clone());
            rows.push(run_row(
                format!("{index:06}"),
                kind,
                chooser.as_ref(),
                instance,
                state_cap,
            ));
        }
    }
    let aggregates = Aggregates::of(&rows);
    Report { rows, aggregates }
}

fn run_row(
    instance_name: String,
    kind: ChooserKind,
    chooser: &dyn Chooser,
    instance: &Instance,
    state_cap: usize,
) -> ReportRow {
    let mut notes: Vec<String> = Vec::new();
    let safety = match check_safety(instance, chooser, state_cap) {
        Ok(verdict) => Some(verdict.holds),
        Err(e) => {
            notes.push(format!("safety: {e}"));
            None
        }
    };
    let (liveness, lost_rights) = match check_liveness_full(instance, chooser, state_cap) {
        Ok((verdict, lost)) => (Some(verdict.holds), lost),
        Err(e) => {
            notes.push(format!("liveness: {e}"));
            (None, 0)
        }
    };
    ReportRow {
        instance: instance_name,
        chooser: kind.as_str().to_string(),
        safety,
        liveness,
        lost_rights,
        note: notes.join("; "),
    }
}

pub fn render_json(report: &Report) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("reports serialize");
    out.push('\n');
    out
}

pub fn render_text(report: &Report) -> String {
    fn cell(verdict: Option<bool>) -> &'static str {
        match verdict {
            Some(true) => "holds",
            Some(false) => "fails",
            None => "error",
        }
    }
    fn yes_no(flag: bool) -> &'static str {
        if flag {
            "yes"
        } else {
            "no"
        }
    }

    let header = ["instance", "chooser", "safety", "liveness", "lost", "note"];
    let body: Vec<[String; 6]> = report
        .rows
        .iter()
        .map(|r| {
            [
                r.instance.clone(),
                r.chooser.clone(),
                cell(r.safety).to_string(),
                cell(r.liveness).to_string(),
                r.lost_rights.to_string(),
                r.note.clone(),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &body {
        for (width, value) in widths.iter_mut().zip(row.iter()) {
            *width = (*width).max(value.len());
        }
    }
    let render = |cells: &[&str]| -> String {
        let mut line = String::new();
        for (i, value) in cells.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(&format!("{value:<width$}", width = widths[i]));
        }
        line.trim_end().to_string()
    };

    let mut lines = Vec::with_capacity(body.len() + 6);
    lines.push(render(&header));
    for row in &body {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        lines.push(render(&cells));
    }
    let agg = &report.aggregates;
    lines.push(String::new());
    lines.push(format!(
        "oma liveness failures: {}",
        agg.oma_liveness_failures.len()
    ));
    lines.push(format!(
        "labeled liveness failures: {}",
        agg.labeled_liveness_failures.len()
    ));
    lines.push(format!(
        "labeled failures within oma failures: {}",
        yes_no(agg.labeled_subset_of_oma)
    ));
    lines.push(format!(
        "strictly fewer labeled failures: {}",
        yes_no(agg.strict_subset)
    ));
    lines.join("\n") + "\n"
}
