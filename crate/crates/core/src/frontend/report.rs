//! Report values and their text and structured renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Diagnostic;
use crate::algebra::OpPoly;
use crate::matrix::OpVector;
use crate::realize::{ConditionResidual, ExtractionMode, RealizabilityReport, Verdict};
use crate::system::ThetaBarConvention;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Structured,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub row: usize,
    pub col: usize,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub name: String,
    pub label: String,
    pub pass: bool,
    pub rows: usize,
    pub cols: usize,
    /// Nonzero residual entries, 1-based.
    pub nonzero: Vec<ResidualEntry>,
    /// Full residual layout; filled by `explain`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<String>>>,
}

impl ConditionEntry {
    pub fn from_residual(c: &ConditionResidual, names: &[String], full: bool) -> Self {
        let r = &c.residual;
        ConditionEntry {
            name: c.name.clone(),
            label: c.label.clone(),
            pass: c.pass,
            rows: r.rows(),
            cols: r.cols(),
            nonzero: c
                .nonzero()
                .into_iter()
                .map(|(row, col, p)| ResidualEntry {
                    row: row + 1,
                    col: col + 1,
                    value: p.to_text(names),
                })
                .collect(),
            matrix: full.then(|| {
                (0..r.rows())
                    .map(|i| (0..r.cols()).map(|j| r.get(i, j).to_text(names)).collect())
                    .collect()
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSection {
    pub pass: bool,
    pub shape_violations: Vec<String>,
    pub conditions: Vec<ConditionEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizabilitySection {
    /// The noise commutation matrix doubles to `J̄`.
    pub premise: bool,
    pub pass: bool,
    pub conditions: Vec<ConditionEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HamiltonianSection {
    pub text: String,
    pub self_adjoint: bool,
    /// The realizability conditions failed; the value is diagnostic only.
    pub advisory: bool,
    pub reproduction: ConditionEntry,
    pub sign_convention: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NbarSection {
    pub literal: Option<u32>,
    pub graded: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    pub theta_bar: ThetaBarConvention,
    pub extraction_mode: ExtractionMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub agree: bool,
    pub max_error: f64,
    pub checked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSection {
    pub cutoff: u32,
    pub exact: bool,
    pub tolerance: f64,
    pub checks: Vec<OracleCheck>,
}

impl OracleSection {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.agree)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub system_name: String,
    pub exit_code: i32,
    pub diagnostics: Vec<Diagnostic>,
    pub class: Option<ClassSection>,
    pub preservation: Vec<ConditionEntry>,
    pub realizability: Option<RealizabilitySection>,
    pub hamiltonian: Option<HamiltonianSection>,
    pub coupling: Option<Vec<String>>,
    pub oscillator: Vec<ConditionEntry>,
    pub nbar: Option<NbarSection>,
    pub conventions: Option<Conventions>,
    pub verdict: Option<Verdict>,
    pub synthesized: Option<String>,
    pub oracle: Option<OracleSection>,
}

pub const SIGN_CONVENTION: &str =
    "the overall sign of H̄ is the one for which −i[ā, H̄] = Ā − ½B̄C̄ holds; −H̄ would generate the negated drift";

impl Report {
    pub fn empty(command: &str, system_name: &str) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            command: command.to_string(),
            system_name: system_name.to_string(),
            exit_code: 0,
            diagnostics: Vec::new(),
            class: None,
            preservation: Vec::new(),
            realizability: None,
            hamiltonian: None,
            coupling: None,
            oscillator: Vec::new(),
            nbar: None,
            conventions: None,
            verdict: None,
            synthesized: None,
            oracle: None,
        }
    }

    pub fn failure(command: &str, system_name: &str, d: Diagnostic) -> Self {
        let mut r = Report::empty(command, system_name);
        r.exit_code = 2;
        r.diagnostics.push(d);
        r
    }

    /// Fill the analysis sections from a realizability report.
    pub fn with_analysis(mut self, rep: &RealizabilityReport, names: &[String], full: bool) -> Self {
        let entry = |c: &ConditionResidual| ConditionEntry::from_residual(c, names, full);
        let class = &rep.class;
        self.class = Some(ClassSection {
            pass: class.pass(),
            shape_violations: class.shape.violations.clone(),
            conditions: [&class.output_commutes, &class.drift_symmetry, &class.generator_identity]
                .into_iter()
                .map(entry)
                .collect(),
        });
        self.preservation = rep.preservation.iter().map(entry).collect();
        self.realizability = Some(RealizabilitySection {
            premise: rep.realizability.premise,
            pass: rep.realizability.pass(),
            conditions: rep.realizability.conditions.iter().map(entry).collect(),
        });
        let ex = &rep.extraction;
        self.hamiltonian = Some(HamiltonianSection {
            text: ex.hamiltonian.to_text(names),
            self_adjoint: ex.self_adjoint,
            advisory: ex.advisory,
            reproduction: entry(&ex.reproduction),
            sign_convention: SIGN_CONVENTION.to_string(),
        });
        self.coupling = rep.coupling().map(|l| vector_text(l, names));
        self.oscillator = rep.oscillator.iter().map(entry).collect();
        self.nbar = Some(NbarSection {
            literal: class.nbar_literal,
            graded: rep.nbar_graded.iter().copied().collect(),
        });
        self.conventions = Some(Conventions {
            theta_bar: rep.convention,
            extraction_mode: ex.mode,
        });
        self.verdict = Some(rep.verdict);
        self
    }

    pub fn to_structured(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_structured(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

pub fn vector_text(v: &OpVector, names: &[String]) -> Vec<String> {
    v.iter().map(|p: &OpPoly| p.to_text(names)).collect()
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Structured => {
            let mut s = report.to_structured();
            s.push('\n');
            s
        }
        Format::Text => render_text(report),
    }
}

fn status(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn condition_text(out: &mut String, c: &ConditionEntry) {
    let _ = writeln!(out, "  {:<34} {:<48} {}", c.name, c.label, status(c.pass));
    if let Some(m) = &c.matrix {
        let width = m.iter().flatten().map(|s| s.chars().count()).max().unwrap_or(1);
        for row in m {
            let cells: Vec<String> = row.iter().map(|s| format!("{s:>width$}")).collect();
            let _ = writeln!(out, "      [ {} ]", cells.join("  "));
        }
    } else {
        for e in &c.nonzero {
            let _ = writeln!(out, "      ({}, {}): {}", e.row, e.col, e.value);
        }
    }
}

fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "== {} {} ==", r.command, r.system_name);
    for d in &r.diagnostics {
        let _ = writeln!(out, "error: {d}");
    }
    if let Some(c) = &r.class {
        let _ = writeln!(out, "class membership: {}", status(c.pass));
        for v in &c.shape_violations {
            let _ = writeln!(out, "  shape: {v}");
        }
        for e in &c.conditions {
            condition_text(&mut out, e);
        }
    }
    if let Some(n) = &r.nbar {
        let lit = n.literal.map_or("undefined".to_string(), |v| v.to_string());
        let graded: Vec<String> = n.graded.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "n̄: literal {lit}, graded {{{}}}", graded.join(", "));
    }
    if let Some(c) = &r.conventions {
        let _ = writeln!(out, "conventions: Θ̄ {}, extraction {}", c.theta_bar, c.extraction_mode);
    }
    if !r.preservation.is_empty() {
        let _ = writeln!(out, "commutation preservation (T̄ from the noise model):");
        for e in &r.preservation {
            condition_text(&mut out, e);
        }
    }
    if let Some(p) = &r.realizability {
        let premise = if p.premise { "holds" } else { "VIOLATED" };
        let _ = writeln!(out, "physical realizability: {} (premise T̄ = J̄ {premise})", status(p.pass));
        for e in &p.conditions {
            condition_text(&mut out, e);
        }
    }
    if let Some(h) = &r.hamiltonian {
        let tag = if h.advisory { " (advisory)" } else { "" };
        let _ = writeln!(out, "hamiltonian{tag}: H̄ = {}", h.text);
        let _ = writeln!(out, "  self-adjoint: {}", if h.self_adjoint { "yes" } else { "no" });
        let _ = writeln!(out, "  sign: {}", h.sign_convention);
        condition_text(&mut out, &h.reproduction);
    }
    if let Some(l) = &r.coupling {
        let _ = writeln!(out, "coupling: L̄ = [{}]", l.join("; "));
    }
    if !r.oscillator.is_empty() {
        let _ = writeln!(out, "oscillator representation:");
        for e in &r.oscillator {
            condition_text(&mut out, e);
        }
    }
    if let Some(s) = &r.synthesized {
        let _ = writeln!(out, "synthesized system:");
        for line in s.lines() {
            if line.is_empty() {
                out.push('\n');
            } else {
                let _ = writeln!(out, "  {line}");
            }
        }
    }
    if let Some(o) = &r.oracle {
        let mode = if o.exact { "exact rational" } else { "floating point" };
        let _ = writeln!(out, "Fock oracle (cutoff {}, {mode}): {}", o.cutoff, status(o.pass()));
        for c in &o.checks {
            let _ = writeln!(
                out,
                "  {:<34} {} (max relative error {:e}, {} elements)",
                c.name,
                status(c.agree),
                c.max_error,
                c.checked
            );
        }
    }
    if let Some(v) = r.verdict {
        let _ = writeln!(out, "verdict: {v}");
    }
    let _ = writeln!(out, "exit code: {}", r.exit_code);
    out
}
