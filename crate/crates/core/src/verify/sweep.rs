//! Grid sweeps: run the selected checks per sample and aggregate.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::construct::{CandidateImmersion, Provenance};
use crate::error::{Error, Result};
use crate::tausolve::TauRoots;

use super::{
    first_fundamental_form, immersion_jet, immersion_jet_richardson, lemma_geo_oracle,
    lemma_geozero_oracle, normal_frame, null_normal_rank_residual, null_sff_check, shape_data,
    surface_checks, ImmersionJet, JetMode,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckKind {
    MarginallyTrapped,
    HReconstruction,
    SphereMembership,
    NullSff,
    RicciFlatNormal,
    NullNormalRank,
    SeedOracle,
    TauResidual,
    SurfaceIdentities,
    NullPoints,
}

#[derive(Debug, Clone, Copy)]
pub struct CheckSpec {
    pub kind: CheckKind,
    /// Maximum allowed aggregate; `None` means report-only.
    pub tol: Option<f64>,
}

impl CheckSpec {
    pub fn new(kind: CheckKind, tol: f64) -> Self {
        CheckSpec {
            kind,
            tol: Some(tol),
        }
    }

    pub fn report_only(kind: CheckKind) -> Self {
        CheckSpec { kind, tol: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckAggregate {
    pub max: f64,
    pub mean: f64,
    pub count: usize,
    pub worst_at: Vec<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord {
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub residual_mt: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub candidate: String,
    pub grid: Vec<usize>,
    pub mode: String,
    pub samples: usize,
    pub degenerate: usize,
    pub degenerate_reasons: BTreeMap<String, usize>,
    pub checks: BTreeMap<String, CheckAggregate>,
    pub null_point_count: Option<usize>,
    /// Accepted/rejected tau roots at the domain-center sample.
    pub tau_center: Option<TauRoots>,
    pub passed: bool,
    pub failed_checks: Vec<String>,
    #[serde(skip)]
    pub records: Vec<SampleRecord>,
}

impl VerificationReport {
    /// Recompute the marginally-trapped aggregate from the records; the
    /// stored aggregates must match.
    pub fn recomputed_mt_max(&self) -> Option<f64> {
        self.records
            .iter()
            .filter(|r| !r.degenerate)
            .map(|r| r.residual_mt)
            .fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
    }
}

/// Cell-center sample points, row-major over the axes.
pub fn grid_points(domain: &[(f64, f64)], cells: &[usize]) -> Vec<Vec<f64>> {
    assert_eq!(domain.len(), cells.len());
    let mut pts: Vec<Vec<f64>> = vec![Vec::new()];
    for (a, &(lo, hi)) in domain.iter().enumerate() {
        let k = cells[a];
        let mut next = Vec::with_capacity(pts.len() * k);
        for base in &pts {
            for i in 0..k {
                let mut p = base.clone();
                p.push(lo + (i as f64 + 0.5) * (hi - lo) / k as f64);
                next.push(p);
            }
        }
        pts = next;
    }
    pts
}

/// Default check set for a candidate: the marginally-trapped residual and
/// the H-reconstruction identity everywhere, plus what the provenance
/// supports.
pub fn default_checks(c: &CandidateImmersion, mode: JetMode) -> Vec<CheckSpec> {
    let mt_tol = match mode {
        JetMode::Analytic => 1e-6,
        JetMode::Fd { .. } => 1e-4,
    };
    let mut out = vec![
        CheckSpec::new(CheckKind::MarginallyTrapped, mt_tol),
        CheckSpec::new(CheckKind::HReconstruction, 1e-8),
    ];
    if c.is_sphere_target() {
        out.push(CheckSpec::new(CheckKind::SphereMembership, 1e-10));
    }
    match c.provenance {
        Provenance::NullHyperplaneGraph => {
            out.push(CheckSpec::new(CheckKind::NullSff, 1e-8));
            out.push(CheckSpec::new(CheckKind::RicciFlatNormal, 1e-8));
            out.push(CheckSpec::new(CheckKind::NullNormalRank, 1e-6));
        }
        Provenance::Corollary1 => {
            out.push(CheckSpec::new(CheckKind::SurfaceIdentities, 1e-7));
            out.push(CheckSpec::report_only(CheckKind::NullPoints));
            out.push(CheckSpec::new(CheckKind::TauResidual, 1e-7));
        }
        Provenance::SupportFunction { .. } => {
            out.push(CheckSpec::new(CheckKind::TauResidual, 1e-7));
            // the surface identity suite applies whenever tau is the
            // (1,1) trace root s_vv - s_uu, i.e. to both (1,1) paths
            if (c.sig.p, c.sig.q) == (1, 1) {
                out.push(CheckSpec::new(CheckKind::SurfaceIdentities, 1e-7));
                out.push(CheckSpec::report_only(CheckKind::NullPoints));
            }
        }
        Provenance::HypersurfaceFlat { .. } | Provenance::GaussSphere { .. } => {
            out.push(CheckSpec::new(CheckKind::TauResidual, 1e-7));
            out.push(CheckSpec::new(CheckKind::SeedOracle, 1e-7));
        }
        Provenance::Raw => {}
    }
    out
}

struct Accumulator {
    sum: f64,
    max: f64,
    count: usize,
    worst_at: Vec<f64>,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator {
            sum: 0.0,
            max: f64::NEG_INFINITY,
            count: 0,
            worst_at: Vec::new(),
        }
    }

    fn push(&mut self, x: &[f64], value: f64) {
        self.sum += value;
        self.count += 1;
        if value > self.max {
            self.max = value;
            self.worst_at = x.to_vec();
        }
    }
}

fn is_sample_degeneracy(e: &Error) -> bool {
    matches!(
        e,
        Error::EvalDomain { .. }
            | Error::DegenerateChartPoint { .. }
            | Error::DegenerateSample { .. }
            | Error::NotLorentzianPlane { .. }
    )
}

struct SampleOutcome {
    values: Vec<(&'static str, f64)>,
    residual_mt: f64,
    null_point: Option<bool>,
}

fn run_sample(
    c: &CandidateImmersion,
    x: &[f64],
    checks: &[CheckSpec],
    jet: &ImmersionJet,
    mode: JetMode,
    tol: f64,
) -> Result<SampleOutcome> {
    let amb = c.target;
    let sphere_mode = c.is_sphere_target();
    let (g, _sig, degenerate) = first_fundamental_form(jet, &amb, tol);
    if degenerate {
        return Err(Error::DegenerateSample { at: x.to_vec() });
    }
    let provenance_normal = c.null_normal_at(x)?;
    let frame = normal_frame(jet, &amb, sphere_mode, provenance_normal.as_ref(), tol)?;
    let shape = shape_data(jet, &frame, &g, &amb, sphere_mode, tol)?;

    let mut values: Vec<(&'static str, f64)> = Vec::new();
    let mut null_point = None;
    for spec in checks {
        match spec.kind {
            CheckKind::MarginallyTrapped => values.push(("marginally_trapped", shape.residual_mt)),
            CheckKind::HReconstruction => {
                values.push(("h_reconstruction", shape.reconstruction_residual))
            }
            CheckKind::SphereMembership => {
                values.push(("sphere_membership", (amb.sq_norm(&jet.point) - 1.0).abs()))
            }
            CheckKind::NullSff => {
                let r = null_sff_check(&shape);
                values.push(("null_sff", r.max_pairing));
                values.push(("h_nu_collinear", r.h_nu_max));
            }
            CheckKind::RicciFlatNormal => {
                values.push(("ricci_flat_normal", super::ricci_flat_normal_check(&shape)))
            }
            CheckKind::NullNormalRank => {
                let step = match mode {
                    JetMode::Fd { step } => step,
                    JetMode::Analytic => 1e-3,
                };
                values.push(("normal_rank", null_normal_rank_residual(c, x, step)?));
            }
            CheckKind::SeedOracle => {
                let seed = c
                    .seed()
                    .ok_or_else(|| Error::InvalidInput("seed oracle needs a seed".into()))?;
                let tau = c
                    .tau_at(x)?
                    .ok_or_else(|| Error::InvalidInput("seed oracle needs tau".into()))?;
                let r = if sphere_mode {
                    lemma_geo_oracle(seed, tau, jet, &amb)?
                } else {
                    lemma_geozero_oracle(seed, tau, jet, &amb)?
                };
                values.push(("seed_oracle_metric", r.metric));
                values.push(("seed_oracle_sff", r.sff));
            }
            CheckKind::TauResidual => {
                if let Some(r) = c.tau_residual_at(x)? {
                    values.push(("tau_residual", r));
                }
            }
            CheckKind::SurfaceIdentities => {
                let sigma = c
                    .sigma
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("surface checks need sigma".into()))?;
                let sc = surface_checks(jet, sigma, &amb)?;
                values.push(("efg_closed_form", sc.closed_form_residual));
                values.push(("weak_conformal", sc.weak_conformal));
                values.push(("omega_factorization", (sc.omega_num - sc.omega_cf).abs()));
                values.push((
                    "omega_prime_identity",
                    (sc.omega_prime_num - sc.omega_prime_cf).abs(),
                ));
                values.push(("flatness", sc.flatness.abs()));
                values.push(("lagrangian_omega", sc.lagrangian_omega.abs()));
            }
            CheckKind::NullPoints => {
                let sigma = c
                    .sigma
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("null points need sigma".into()))?;
                let sc = surface_checks(jet, sigma, &amb)?;
                null_point = Some(sc.null_point <= 1e-9 * (1.0 + sc.e_num.abs()));
            }
        }
    }
    Ok(SampleOutcome {
        values,
        residual_mt: shape.residual_mt,
        null_point,
    })
}

/// Run the checks over the grid and aggregate per check name.
///
/// Degenerate samples (degenerate metric, frame failures, evaluation
/// domain errors) are counted and excluded from the residual maxima; if
/// every sample degenerates the sweep fails with `NothingVerifiable`.
/// In fd mode a sample whose worst check lands within 10x of its
/// tolerance is retried once with Richardson extrapolation.
pub fn sweep(
    c: &CandidateImmersion,
    cells: &[usize],
    checks: &[CheckSpec],
    mode: JetMode,
) -> Result<VerificationReport> {
    let tol = 1e-9;
    let points = grid_points(&c.domain, cells);
    let mut degenerate = 0usize;
    let mut reasons: BTreeMap<String, usize> = BTreeMap::new();
    let mut accs: BTreeMap<&'static str, Accumulator> = BTreeMap::new();
    let mut records = Vec::with_capacity(points.len());
    let mut null_points = 0usize;
    let tol_by_name = |name: &str| -> Option<f64> {
        let kind = match name {
            "marginally_trapped" => CheckKind::MarginallyTrapped,
            "h_reconstruction" => CheckKind::HReconstruction,
            "sphere_membership" => CheckKind::SphereMembership,
            "null_sff" | "h_nu_collinear" => CheckKind::NullSff,
            "ricci_flat_normal" => CheckKind::RicciFlatNormal,
            "normal_rank" => CheckKind::NullNormalRank,
            "seed_oracle_metric" | "seed_oracle_sff" => CheckKind::SeedOracle,
            "tau_residual" => CheckKind::TauResidual,
            "efg_closed_form"
            | "weak_conformal"
            | "omega_factorization"
            | "omega_prime_identity" => CheckKind::SurfaceIdentities,
            "flatness" | "lagrangian_omega" => return None,
            _ => return None,
        };
        checks.iter().find(|s| s.kind == kind).and_then(|s| s.tol)
    };

    for x in &points {
        let jet = match immersion_jet(c, x, mode) {
            Ok(j) => j,
            Err(e) if is_sample_degeneracy(&e) => {
                degenerate += 1;
                *reasons.entry(short_reason(&e)).or_insert(0) += 1;
                records.push(SampleRecord {
                    x: x.clone(),
                    phi: Vec::new(),
                    residual_mt: f64::NAN,
                    degenerate: true,
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut outcome = match run_sample(c, x, checks, &jet, mode, tol) {
            Ok(o) => o,
            Err(e) if is_sample_degeneracy(&e) => {
                degenerate += 1;
                *reasons.entry(short_reason(&e)).or_insert(0) += 1;
                records.push(SampleRecord {
                    x: x.clone(),
                    phi: jet.point.iter().copied().collect(),
                    residual_mt: f64::NAN,
                    degenerate: true,
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        // Richardson retry for near-miss fd samples
        if let JetMode::Fd { step } = mode {
            let near_miss = outcome
                .values
                .iter()
                .any(|(name, v)| tol_by_name(name).is_some_and(|t| *v > t && *v < 10.0 * t));
            if near_miss {
                let rjet = immersion_jet_richardson(c, x, step)?;
                if let Ok(better) = run_sample(c, x, checks, &rjet, mode, tol) {
                    let worse = |vals: &[(&str, f64)]| -> f64 {
                        vals.iter()
                            .map(|(name, v)| tol_by_name(name).map_or(0.0, |t| v / t))
                            .fold(0.0, f64::max)
                    };
                    if worse(&better.values) < worse(&outcome.values) {
                        outcome = better;
                    }
                }
            }
        }
        for (name, value) in &outcome.values {
            accs.entry(name)
                .or_insert_with(Accumulator::new)
                .push(x, *value);
        }
        if outcome.null_point == Some(true) {
            null_points += 1;
        }
        records.push(SampleRecord {
            x: x.clone(),
            phi: jet.point.iter().copied().collect(),
            residual_mt: outcome.residual_mt,
            degenerate: false,
        });
    }

    if degenerate == points.len() {
        return Err(Error::NothingVerifiable);
    }

    let mut check_map = BTreeMap::new();
    let mut failed = Vec::new();
    for (name, acc) in accs {
        let tolerance = tol_by_name(name);
        let pass = tolerance.is_none_or(|t| acc.max <= t);
        if !pass {
            failed.push(name.to_string());
        }
        check_map.insert(
            name.to_string(),
            CheckAggregate {
                max: acc.max,
                mean: acc.sum / acc.count as f64,
                count: acc.count,
                worst_at: acc.worst_at,
                tolerance,
                pass,
            },
        );
    }

    let center: Vec<f64> = c
        .domain
        .iter()
        .zip(&c.hard_bounds)
        .map(|((lo, hi), b)| match b {
            Some((blo, bhi)) => (0.5 * (lo + hi)).clamp(blo + 0.1, bhi - 0.1),
            None => 0.5 * (lo + hi),
        })
        .collect();
    let tau_center = c.tau_roots_at(&center).ok().flatten();
    let has_null_points = checks.iter().any(|s| s.kind == CheckKind::NullPoints);

    Ok(VerificationReport {
        candidate: c.name.clone(),
        grid: cells.to_vec(),
        mode: mode.label(),
        samples: points.len(),
        degenerate,
        degenerate_reasons: reasons,
        checks: check_map,
        null_point_count: has_null_points.then_some(null_points),
        tau_center,
        passed: failed.is_empty(),
        failed_checks: failed,
        records,
    })
}

fn short_reason(e: &Error) -> String {
    match e {
        Error::EvalDomain { .. } => "eval_domain".into(),
        Error::DegenerateChartPoint { .. } => "chart_point".into(),
        Error::DegenerateSample { .. } => "degenerate_sample".into(),
        Error::NotLorentzianPlane { .. } => "normal_plane_not_lorentzian".into(),
        other => format!("{other}"),
    }
}
