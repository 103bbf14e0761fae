//! JSON documents emitted by the command-line tool.
//!
//! Every document carries a `report` discriminator. Field names are frozen
//! by the schema in `schema/report.schema.json`.

use serde::{Deserialize, Serialize};

use crate::classify::{morin_classify, Verdict};
use crate::forms::{FormSpec, PiRotation};
use crate::germ::SingularChainReport;
use crate::isotopy::{isotopy_of_germ, InvariantLabel, IsotopyReport, Witness, WitnessStep};
use crate::parse::GermSource;
use crate::ruling::RulingCheck;

/// JSON schema describing [`Document`].
pub const SCHEMA: &str = include_str!("../schema/report.schema.json");

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_us: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "snake_case")]
pub enum Document {
    Germ(Report),
    Table(TableReport),
    Witness(WitnessReport),
    Ruling(RulingReport),
}

impl Document {
    pub fn timing_mut(&mut self) -> &mut Timing {
        match self {
            Document::Germ(r) => &mut r.timing,
            Document::Table(r) => &mut r.timing,
            Document::Witness(r) => &mut r.timing,
            Document::Ruling(r) => &mut r.timing,
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }
}

/// Classification of a single germ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub command: String,
    /// The germ as canonical source text.
    pub input: String,
    pub r_max: usize,
    pub verdict: Verdict,
    pub chain: Option<SingularChainReport>,
    pub isotopy: Option<IsotopyReport>,
    pub fuzz: Option<FuzzSummary>,
    pub seed: Option<u64>,
    pub timing: Timing,
}

impl Report {
    /// Classifies `src` up to `r_max`, adding isotopy data for Morin germs.
    pub fn classify(command: &str, src: &GermSource, r_max: usize) -> crate::Result<Report> {
        let f = src.to_map_jet();
        let result = morin_classify(&f, r_max)?;
        let isotopy = match result.verdict {
            Verdict::Morin { r } => Some(isotopy_of_germ(&f, r)?),
            _ => None,
        };
        Ok(Report {
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            input: src.to_string(),
            r_max,
            verdict: result.verdict,
            chain: result.evidence,
            isotopy,
            fuzz: None,
            seed: None,
            timing: Timing::default(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub trials: usize,
    pub degree: u32,
    /// Verdicts of the conjugated germs, in trial order.
    pub verdicts: Vec<Verdict>,
    /// Every trial reproduced the verdict of the input.
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableCell {
    pub r: usize,
    pub a: usize,
    pub case_id: usize,
    pub class_count: usize,
    pub invariant_label: InvariantLabel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableReport {
    pub tool_version: String,
    pub r_max: usize,
    pub a_max: usize,
    /// `class_counts[r-1][a-1]`.
    pub class_counts: Vec<Vec<usize>>,
    pub cells: Vec<TableCell>,
    pub timing: Timing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub tool_version: String,
    pub spec: FormSpec,
    pub from: (i8, i8),
    pub to: (i8, i8),
    pub source_rotations: Vec<PiRotation>,
    pub target_rotations: Vec<PiRotation>,
    pub steps: Vec<WitnessStep>,
    /// The steps were re-applied and matched the target form exactly.
    pub verified: bool,
    pub timing: Timing,
}

impl WitnessReport {
    pub fn new(w: &Witness, verified: bool) -> WitnessReport {
        WitnessReport {
            tool_version: TOOL_VERSION.to_string(),
            spec: w.spec,
            from: w.from,
            to: w.to,
            source_rotations: w.source_rotations().into_iter().cloned().collect(),
            target_rotations: w.target_rotations().into_iter().cloned().collect(),
            steps: w.steps.clone(),
            verified,
            timing: Timing::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RulingReport {
    pub tool_version: String,
    pub input: String,
    pub check: RulingCheck,
    pub timing: Timing,
}

/// Table cells for `1 <= r <= r_max`, `1 <= a <= a_max`, non-suspension case.
pub fn isotopy_table(r_max: usize, a_max: usize) -> crate::Result<TableReport> {
    let mut class_counts = Vec::with_capacity(r_max);
    let mut cells = Vec::new();
    for r in 1..=r_max {
        let mut row = Vec::with_capacity(a_max);
        for a in 1..=a_max {
            let rep = crate::isotopy::isotopy_classify(r, a, false)?;
            row.push(rep.class_count);
            cells.push(TableCell {
                r,
                a,
                case_id: rep.case_id,
                class_count: rep.class_count,
                invariant_label: rep.invariant_label,
            });
        }
        class_counts.push(row);
    }
    Ok(TableReport {
        tool_version: TOOL_VERSION.to_string(),
        r_max,
        a_max,
        class_counts,
        cells,
        timing: Timing::default(),
    })
}
