//! Report and mesh emission: one JSON object per run, one CSV row per
//! grid sample. Files are written to a temporary sibling and renamed, so
//! failures never leave partial artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use mtrap::verify::VerificationReport;

use crate::config::ScenarioEcho;

#[derive(Serialize)]
pub struct CorrespondenceSummary {
    pub support_identity_max: f64,
    pub pipeline_agreement_max: f64,
    pub rank_flagged_samples: usize,
    pub samples: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub passed: bool,
    pub failed_checks: Vec<String>,
}

#[derive(Serialize)]
pub struct ReportFile<'a> {
    pub scenario: &'a ScenarioEcho,
    pub result: &'a str,
    pub failed_checks: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<&'a VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correspondence: Option<&'a CorrespondenceSummary>,
}

pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn render_report(report: &ReportFile) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// CSV mesh: chart coordinates, ambient coordinates of phi, the
/// marginally-trapped residual and the degeneracy flag.
pub fn render_mesh(report: &VerificationReport, vars: &[String], dim: usize) -> String {
    let mut out = String::new();
    for v in vars {
        let _ = write!(out, "{v},");
    }
    for i in 0..dim {
        let _ = write!(out, "phi{i},");
    }
    out.push_str("residual_mt,degenerate\n");
    for rec in &report.records {
        for c in &rec.x {
            let _ = write!(out, "{c},");
        }
        if rec.phi.is_empty() {
            for _ in 0..dim {
                out.push_str("nan,");
            }
        } else {
            for c in &rec.phi {
                let _ = write!(out, "{c},");
            }
        }
        let mt = if rec.residual_mt.is_nan() {
            "nan".to_string()
        } else {
            format!("{}", rec.residual_mt)
        };
        let _ = writeln!(out, "{mt},{}", u8::from(rec.degenerate));
    }
    out
}
