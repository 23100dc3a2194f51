//! `mtrap`: scenario-driven construction and verification of marginally
//! trapped codimension-two submanifolds.
//!
//! Exit codes: 0 when every asserted check passes, 1 when a named check
//! or construction fails, 2 for configuration errors.

mod config;
mod presets;
mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{build_scenario, ConfigError, ConfigFile, Runner, Scenario};
use mtrap::verify::{grid_points, sweep};
use report::{render_mesh, render_report, write_atomic, CorrespondenceSummary, ReportFile};

#[derive(Parser)]
#[command(
    name = "mtrap",
    version,
    about = "Construct marginally trapped codimension-two submanifolds of flat and spherical \
             pseudo-Riemannian space forms and verify the trapping condition numerically.",
    after_help = "Scenario files are flat TOML: a [scenario] section plus optional [constants] \
                  and [tolerances]. Expressions use chart variables (u, v, ...), literals, \
                  + - * /, integer powers ^, sin, cos, exp and the constant pi. \
                  Use `run preset:<name>` for a built-in scenario (see list-presets)."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file (or `preset:<name>`)
    Run {
        /// Path to a scenario file, or `preset:<name>`
        config: String,
        /// Override the grid resolution, e.g. 32x32
        #[arg(long)]
        grid: Option<String>,
        /// Directory for report/mesh outputs
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the jet mode (analytic|fd)
        #[arg(long)]
        mode: Option<String>,
        /// Override the tau branch index
        #[arg(long)]
        branch: Option<usize>,
    },
    /// List the built-in presets and demo scenarios
    ListPresets,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::ListPresets => {
            print!("{}", presets::table());
            ExitCode::SUCCESS
        }
        Cmd::Run {
            config,
            grid,
            out,
            mode,
            branch,
        } => {
            match run(
                &config,
                grid.as_deref(),
                out.as_deref(),
                mode.as_deref(),
                branch,
            ) {
                Ok(code) => code,
                Err(e) => {
                    if e.is::<ConfigError>()
                        || e.is::<toml::de::Error>()
                        || e.is::<mtrap::Error>() && is_config_class(&e)
                    {
                        eprintln!("{e}");
                        ExitCode::from(2)
                    } else {
                        eprintln!("FAIL: {e}");
                        ExitCode::from(1)
                    }
                }
            }
        }
    }
}

/// Expression and scenario-shape problems are configuration errors;
/// geometric degeneracies found while constructing are check failures.
fn is_config_class(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<mtrap::Error>(),
        Some(mtrap::Error::Syntax { .. })
            | Some(mtrap::Error::UnknownSymbol { .. })
            | Some(mtrap::Error::InvalidInput(_))
    )
}

fn load_config(spec: &str) -> anyhow::Result<ConfigFile> {
    let text = if let Some(name) = spec.strip_prefix("preset:") {
        presets::find(name)
            .ok_or_else(|| ConfigError(format!("unknown preset `{name}`")))?
            .toml
            .to_string()
    } else {
        std::fs::read_to_string(spec)
            .map_err(|e| ConfigError(format!("cannot read `{spec}`: {e}")))?
    };
    let cfg: ConfigFile = toml::from_str(&text)?;
    Ok(cfg)
}

fn run(
    spec: &str,
    grid_override: Option<&str>,
    out_dir: Option<&Path>,
    mode_override: Option<&str>,
    branch_override: Option<usize>,
) -> anyhow::Result<ExitCode> {
    let mut cfg = load_config(spec)?;
    if let Some(mode) = mode_override {
        cfg.scenario.mode = Some(mode.to_string());
    }
    if let Some(branch) = branch_override {
        cfg.scenario.branch = Some(branch);
    }
    if let Some(g) = grid_override {
        let cells: Result<Vec<usize>, _> = g.split('x').map(str::parse).collect();
        cfg.scenario.grid =
            Some(cells.map_err(|_| ConfigError(format!("bad --grid `{g}`, expected NxM")))?);
    }
    let scenario = build_scenario(cfg)?;
    let out_dir = out_dir.unwrap_or_else(|| Path::new("."));

    match &scenario.runner {
        Runner::Sweep(candidate) => {
            let report = sweep(candidate, &scenario.grid, &scenario.checks, scenario.mode)?;
            let result = if report.passed { "pass" } else { "fail" };
            let file = ReportFile {
                scenario: &scenario.echo,
                result,
                failed_checks: &report.failed_checks,
                error: None,
                verification: Some(&report),
                correspondence: None,
            };
            if let Some(path) = &scenario.report_path {
                write_atomic(&out_dir.join(path), &render_report(&file)?)?;
            } else {
                print!("{}", render_report(&file)?);
            }
            if let Some(path) = &scenario.mesh_path {
                let mesh = render_mesh(&report, &candidate.vars, candidate.target.dim());
                write_atomic(&out_dir.join(path), &mesh)?;
            }
            if report.passed {
                println!("PASS {}", scenario.echo.name);
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "FAIL {}: {}",
                    scenario.echo.name,
                    report.failed_checks.join(", ")
                );
                Ok(ExitCode::from(1))
            }
        }
        Runner::Correspondence(corr) => {
            let summary = run_correspondence(corr, &scenario)?;
            let result = if summary.passed { "pass" } else { "fail" };
            let failed = summary.failed_checks.clone();
            let file = ReportFile {
                scenario: &scenario.echo,
                result,
                failed_checks: &failed,
                error: None,
                verification: None,
                correspondence: Some(&summary),
            };
            if let Some(path) = &scenario.report_path {
                write_atomic(&out_dir.join(path), &render_report(&file)?)?;
            } else {
                print!("{}", render_report(&file)?);
            }
            if summary.passed {
                println!("PASS {}", scenario.echo.name);
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("FAIL {}: {}", scenario.echo.name, failed.join(", "));
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn run_correspondence(
    corr: &mtrap::construct::LorentzCorrespondence,
    scenario: &Scenario,
) -> anyhow::Result<CorrespondenceSummary> {
    let tol_support = scenario
        .tolerances
        .get("support_identity")
        .copied()
        .unwrap_or(1e-10);
    let tol_agree = scenario
        .tolerances
        .get("pipeline_agreement")
        .copied()
        .unwrap_or(1e-8);
    let points = grid_points(&corr.seed.domain, &scenario.grid);
    let mut support_max: f64 = 0.0;
    let mut agree_max: f64 = 0.0;
    for x in &points {
        support_max = support_max.max(corr.support_identity_residual(x)?);
        agree_max = agree_max.max(corr.agreement_residual(x)?);
    }
    let flagged = corr.immersion_rank_flags(6)?.len();
    let mut failed = Vec::new();
    if support_max > tol_support {
        failed.push("support_identity".to_string());
    }
    if agree_max > tol_agree {
        failed.push("pipeline_agreement".to_string());
    }
    let mut tols = BTreeMap::new();
    tols.insert("support_identity".to_string(), tol_support);
    tols.insert("pipeline_agreement".to_string(), tol_agree);
    Ok(CorrespondenceSummary {
        support_identity_max: support_max,
        pipeline_agreement_max: agree_max,
        rank_flagged_samples: flagged,
        samples: points.len(),
        tolerances: tols,
        passed: failed.is_empty(),
        failed_checks: failed,
    })
}
