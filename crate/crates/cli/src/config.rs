//! Scenario files: flat TOML with a `[scenario]` section, optional
//! `[constants]` for expression symbols and `[tolerances]` for per-check
//! overrides.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use mtrap::construct::{self, seeds, CandidateImmersion};
use mtrap::pseudolin::Signature;
use mtrap::scalarlang::{self, FieldExpr};
use mtrap::verify::{CheckKind, CheckSpec, JetMode};

#[derive(Debug, Deserialize)]
pub struct ConfigFile {
    pub scenario: ScenarioRaw,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRaw {
    pub name: String,
    pub theorem: String,
    pub p: usize,
    pub q: usize,
    pub sigma: Option<String>,
    /// Graph function for null-hyperplane scenarios.
    pub f: Option<String>,
    /// Seed preset for the hypersurface constructions.
    pub seed: Option<String>,
    pub radius: Option<f64>,
    pub major: Option<f64>,
    pub minor: Option<f64>,
    pub theta: Option<f64>,
    pub semi_axis_a: Option<f64>,
    pub semi_axis_c: Option<f64>,
    pub branch: Option<usize>,
    pub grid: Option<Vec<usize>>,
    /// Flattened lo/hi pairs overriding the default box.
    pub domain: Option<Vec<f64>>,
    pub mode: Option<String>,
    pub fd_step: Option<f64>,
    /// Seed for the randomized suites (sigma = "random").
    pub seed_rng: Option<u64>,
    pub checks: Option<Vec<String>>,
    pub report: Option<String>,
    pub mesh: Option<String>,
}

/// Echoed back into the report verbatim.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioEcho {
    pub name: String,
    pub theorem: String,
    pub p: usize,
    pub q: usize,
    pub sigma: Option<String>,
    pub f: Option<String>,
    pub seed: Option<String>,
    pub branch: usize,
    pub grid: Vec<usize>,
    pub mode: String,
    pub seed_rng: u64,
}

#[derive(Debug)]
pub enum Runner {
    Sweep(Box<CandidateImmersion>),
    Correspondence(Box<construct::LorentzCorrespondence>),
}

pub struct Scenario {
    pub echo: ScenarioEcho,
    pub runner: Runner,
    pub grid: Vec<usize>,
    pub mode: JetMode,
    pub checks: Vec<CheckSpec>,
    pub report_path: Option<String>,
    pub mesh_path: Option<String>,
    pub tolerances: BTreeMap<String, f64>,
}

/// Semantic validation failure (exit code 2, like parse errors).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

fn check_kind_by_name(name: &str) -> Option<CheckKind> {
    Some(match name {
        "marginally_trapped" => CheckKind::MarginallyTrapped,
        "h_reconstruction" => CheckKind::HReconstruction,
        "sphere_membership" => CheckKind::SphereMembership,
        "null_sff" => CheckKind::NullSff,
        "ricci_flat_normal" => CheckKind::RicciFlatNormal,
        "normal_rank" => CheckKind::NullNormalRank,
        "seed_oracle" => CheckKind::SeedOracle,
        "tau_residual" => CheckKind::TauResidual,
        "surface_identities" => CheckKind::SurfaceIdentities,
        "null_points" => CheckKind::NullPoints,
        _ => return None,
    })
}

fn parse_sigma(
    raw: &ScenarioRaw,
    constants: &BTreeMap<String, f64>,
    n: usize,
) -> Result<FieldExpr, ConfigError> {
    let src = raw.sigma.as_deref().ok_or_else(|| {
        bad(format!(
            "theorem `{}` needs sigma = \"<expr>\"",
            raw.theorem
        ))
    })?;
    if src == "random" {
        return Ok(scalarlang::random_trig_expr(n, raw.seed_rng.unwrap_or(42)));
    }
    let vars: Vec<String> = mtrap::jets::make_chart(Signature::new(raw.p, raw.q))
        .vars()
        .to_vec();
    let consts: Vec<(String, f64)> = constants.iter().map(|(k, v)| (k.clone(), *v)).collect();
    scalarlang::parse(src, &vars, &consts).map_err(|e| bad(format!("sigma: {e}")))
}

fn build_seed(
    raw: &ScenarioRaw,
    constants: &BTreeMap<String, f64>,
) -> Result<seeds::SeedHypersurface, ConfigError> {
    let name = raw
        .seed
        .as_deref()
        .ok_or_else(|| bad("hypersurface scenarios need seed = \"<preset>\""))?;
    Ok(match name {
        "cylinder" => seeds::cylinder(raw.radius.unwrap_or(1.0)),
        "sphere" => seeds::sphere(raw.radius.unwrap_or(1.0)),
        "torus" => seeds::torus(raw.major.unwrap_or(2.0), raw.minor.unwrap_or(0.5)),
        "catenoid" => seeds::catenoid(),
        "ellipsoid" => seeds::ellipsoid(
            raw.semi_axis_a.unwrap_or(1.0),
            raw.semi_axis_c.unwrap_or(1.5),
        ),
        "graph" => {
            let src = raw
                .f
                .as_deref()
                .ok_or_else(|| bad("seed = \"graph\" needs f = \"<expr>\""))?;
            let vars = vec!["u".to_string(), "v".to_string()];
            let consts: Vec<(String, f64)> =
                constants.iter().map(|(k, v)| (k.clone(), *v)).collect();
            let f = scalarlang::parse(src, &vars, &consts).map_err(|e| bad(format!("f: {e}")))?;
            seeds::graph_flat("graph seed", f, 1.0)
        }
        "latitude" => seeds::latitude_product(raw.theta.unwrap_or(0.5)),
        other => return Err(bad(format!("unknown seed preset `{other}`"))),
    })
}

pub fn build_scenario(cfg: ConfigFile) -> Result<Scenario, anyhow::Error> {
    let raw = &cfg.scenario;
    let sig = Signature::new(raw.p, raw.q);
    let n = sig.n();
    let branch = raw.branch.unwrap_or(0);
    let mode = match raw.mode.as_deref().unwrap_or("analytic") {
        "analytic" => JetMode::Analytic,
        "fd" => JetMode::Fd {
            step: raw.fd_step.unwrap_or(1e-3),
        },
        other => return Err(bad(format!("mode must be analytic|fd, got `{other}`")).into()),
    };

    let runner = match raw.theorem.as_str() {
        "support_function" => {
            let sigma = parse_sigma(raw, &cfg.constants, n)?;
            Runner::Sweep(Box::new(construct::from_support_function(
                sigma, sig, branch,
            )?))
        }
        "corollary1" => {
            if (raw.p, raw.q) != (1, 1) {
                return Err(bad("corollary1 requires (p,q) = (1,1)").into());
            }
            let sigma = parse_sigma(raw, &cfg.constants, n)?;
            Runner::Sweep(Box::new(construct::corollary1_surface(sigma)?))
        }
        "hypersurface_flat" => {
            let seed = build_seed(raw, &cfg.constants)?;
            Runner::Sweep(Box::new(construct::from_hypersurface_flat(seed, branch)?))
        }
        "gauss_sphere" | "corollary3" => {
            if raw.theorem == "corollary3" && (raw.p, raw.q) != (1, 1) {
                return Err(bad("corollary3 requires (p,q) = (1,1)").into());
            }
            let seed = build_seed(raw, &cfg.constants)?;
            Runner::Sweep(Box::new(construct::from_gauss_sphere(seed, branch)?))
        }
        "null_hyperplane" => {
            if (raw.p, raw.q) != (1, 1) {
                return Err(bad("the shipped null-hyperplane embedding is (p,q) = (1,1)").into());
            }
            let src = raw
                .f
                .as_deref()
                .ok_or_else(|| bad("null_hyperplane needs f = \"<expr>\""))?;
            let vars = vec!["u".to_string(), "v".to_string()];
            let consts: Vec<(String, f64)> =
                cfg.constants.iter().map(|(k, v)| (k.clone(), *v)).collect();
            let f = scalarlang::parse(src, &vars, &consts).map_err(|e| bad(format!("f: {e}")))?;
            let nu0 = nalgebra::DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]);
            let comps = vec![f.clone(), scalarlang::var(0), f, scalarlang::var(1)];
            let domain = vec![(0.0, std::f64::consts::TAU), (0.0, std::f64::consts::TAU)];
            Runner::Sweep(Box::new(construct::null_hyperplane_graph(
                nu0,
                mtrap::pseudolin::AmbientSpace::flat(2, 2),
                sig,
                comps,
                domain,
            )?))
        }
        "correspondence" => {
            if raw.q != 0 {
                return Err(bad("correspondence requires q = 0").into());
            }
            let sigma = parse_sigma(raw, &cfg.constants, n)?;
            Runner::Correspondence(Box::new(construct::lorentzian_correspondence(sigma, sig)?))
        }
        other => return Err(bad(format!("unknown theorem tag `{other}`")).into()),
    };

    // domain override
    let mut runner = runner;
    if let Some(flat) = &raw.domain {
        if flat.len() != 2 * n {
            return Err(bad(format!(
                "domain needs {} numbers (lo/hi per variable)",
                2 * n
            ))
            .into());
        }
        let boxed: Vec<(f64, f64)> = flat.chunks(2).map(|c| (c[0], c[1])).collect();
        if let Runner::Sweep(c) = &mut runner {
            c.domain = boxed;
        }
    }

    let grid = match &raw.grid {
        Some(g) if g.len() == n => g.clone(),
        Some(_) => return Err(bad(format!("grid needs {n} entries")).into()),
        None => vec![16; n],
    };

    // check list: defaults per provenance, optionally restricted, with
    // tolerance overrides by check name
    let mut checks = match &runner {
        Runner::Sweep(c) => mtrap::verify::default_checks(c, mode),
        Runner::Correspondence(_) => Vec::new(),
    };
    if let Some(selected) = &raw.checks {
        let mut kinds = Vec::new();
        for name in selected {
            let kind =
                check_kind_by_name(name).ok_or_else(|| bad(format!("unknown check `{name}`")))?;
            kinds.push(kind);
        }
        checks.retain(|spec| kinds.contains(&spec.kind));
        for kind in kinds {
            if !checks.iter().any(|s| s.kind == kind) {
                checks.push(CheckSpec::report_only(kind));
            }
        }
    }
    for (name, tol) in &cfg.tolerances {
        let kind = check_kind_by_name(name)
            .ok_or_else(|| bad(format!("unknown tolerance key `{name}`")))?;
        for spec in checks.iter_mut() {
            if spec.kind == kind {
                spec.tol = Some(*tol);
            }
        }
    }

    let echo = ScenarioEcho {
        name: raw.name.clone(),
        theorem: raw.theorem.clone(),
        p: raw.p,
        q: raw.q,
        sigma: raw.sigma.clone(),
        f: raw.f.clone(),
        seed: raw.seed.clone(),
        branch,
        grid: grid.clone(),
        mode: mode.label(),
        seed_rng: raw.seed_rng.unwrap_or(42),
    };

    Ok(Scenario {
        echo,
        runner,
        grid,
        mode,
        checks,
        report_path: raw.report.clone(),
        mesh_path: raw.mesh.clone(),
        tolerances: cfg.tolerances,
    })
}
