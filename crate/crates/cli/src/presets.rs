//! Built-in demo scenarios, runnable as `mtrap run preset:<name>`.

pub struct Preset {
    pub name: &'static str,
    pub anchor: &'static str,
    pub note: &'static str,
    pub toml: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "flat-torus",
        anchor: "corollary1-constant",
        note: "constant support function 0.5; exact jets, residual at rounding level",
        toml: r#"
[scenario]
name = "flat-torus"
theorem = "corollary1"
p = 1
q = 1
sigma = "0.5"
grid = [32, 32]
mode = "analytic"
report = "flat-torus-report.json"
mesh = "flat-torus-mesh.csv"

[tolerances]
marginally_trapped = 1e-10
"#,
    },
    Preset {
        name: "corollary1-random-trig",
        anchor: "corollary1-surface-identities",
        note: "seeded random trig support function; surface identity suite",
        toml: r#"
[scenario]
name = "corollary1-random-trig"
theorem = "corollary1"
p = 1
q = 1
sigma = "random"
seed_rng = 42
grid = [24, 24]
mode = "analytic"
report = "corollary1-random-report.json"
"#,
    },
    Preset {
        name: "support-function-21",
        anchor: "support-function-n3",
        note: "three-dimensional candidate over S^2 x S^1, quadratic tau polynomial",
        toml: r#"
[scenario]
name = "support-function-21"
theorem = "support_function"
p = 2
q = 1
sigma = "0.5"
grid = [8, 8, 8]
mode = "fd"
fd_step = 0.001
report = "support21-report.json"
"#,
    },
    Preset {
        name: "cylinder-thm-zero",
        anchor: "cylinder-thm-zero",
        note: "flat direction sends the focal midpoint to infinity: reports no admissible tau",
        toml: r#"
[scenario]
name = "cylinder-thm-zero"
theorem = "hypersurface_flat"
p = 2
q = 0
seed = "cylinder"
radius = 1.0
grid = [64, 16]
mode = "fd"
report = "cylinder-report.json"
"#,
    },
    Preset {
        name: "torus-thm-zero",
        anchor: "torus-thm-zero",
        note: "nonconstant tau branch (midpoint of inverse curvatures) on the outer torus",
        toml: r#"
[scenario]
name = "torus-thm-zero"
theorem = "hypersurface_flat"
p = 2
q = 0
seed = "torus"
major = 2.0
minor = 0.5
grid = [24, 24]
mode = "fd"
fd_step = 0.001
report = "torus-report.json"
mesh = "torus-mesh.csv"
"#,
    },
    Preset {
        name: "catenoid-thm-zero",
        anchor: "minimal-seed-tau-zero",
        note: "minimal seed: tau = 0 is the admissible root and the lift stays minimal",
        toml: r#"
[scenario]
name = "catenoid-thm-zero"
theorem = "hypersurface_flat"
p = 2
q = 0
seed = "catenoid"
grid = [16, 24]
mode = "fd"
fd_step = 0.001
report = "catenoid-report.json"
"#,
    },
    Preset {
        name: "sphere-umbilic-reject",
        anchor: "umbilic-rejection",
        note: "round sphere: the only root hits det(Id - tau A) = 0 and is rejected",
        toml: r#"
[scenario]
name = "sphere-umbilic-reject"
theorem = "hypersurface_flat"
p = 2
q = 0
seed = "sphere"
radius = 1.0
grid = [8, 8]
mode = "fd"
report = "sphere-report.json"
"#,
    },
    Preset {
        name: "latitude-corollary3",
        anchor: "latitude-corollary3",
        note: "latitude circle x S^1 in S^2 x S^1; tau = tan(theta)/2 into the unit quadric",
        toml: r#"
[scenario]
name = "latitude-corollary3"
theorem = "corollary3"
p = 1
q = 1
seed = "latitude"
theta = 0.5
grid = [24, 24]
mode = "fd"
fd_step = 0.001
report = "latitude-report.json"
"#,
    },
    Preset {
        name: "null-hyperplane-graph",
        anchor: "null-hyperplane-graph",
        note: "graph in a null hyperplane of the neutral R^4: null second fundamental form",
        toml: r#"
[scenario]
name = "null-hyperplane-graph"
theorem = "null_hyperplane"
p = 1
q = 1
f = "sin(u)*cos(v)"
grid = [24, 24]
mode = "analytic"
report = "null-graph-report.json"
"#,
    },
    Preset {
        name: "correspondence-height",
        anchor: "lorentzian-correspondence",
        note: "q = 0: support data vs hypersurface data agree; 2 sigma3 is the support function",
        toml: r#"
[scenario]
name = "correspondence-height"
theorem = "correspondence"
p = 2
q = 0
sigma = "cos(u)/4"
grid = [12, 12]
report = "correspondence-report.json"
"#,
    },
    Preset {
        name: "degenerate-zero-sigma",
        anchor: "degenerate-support",
        note: "sigma = 0 collapses the candidate; every root is metric-degenerate (exit 1)",
        toml: r#"
[scenario]
name = "degenerate-zero-sigma"
theorem = "support_function"
p = 1
q = 1
sigma = "0"
grid = [8, 8]
report = "degenerate-report.json"
"#,
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn table() -> String {
    let mut out = String::new();
    let width = PRESETS.iter().map(|p| p.name.len()).max().unwrap_or(0);
    let awidth = PRESETS.iter().map(|p| p.anchor.len()).max().unwrap_or(0);
    out.push_str(&format!(
        "{:width$}  {:awidth$}  note\n",
        "preset", "anchor"
    ));
    for p in PRESETS {
        out.push_str(&format!(
            "{:width$}  {:awidth$}  {}\n",
            p.name, p.anchor, p.note
        ));
    }
    out
}
