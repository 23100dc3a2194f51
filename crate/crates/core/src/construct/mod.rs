//! The representation formulas: candidate marginally trapped immersions
//! from seed data, and the inverse decompositions.
//!
//! Constructors return a [`CandidateImmersion`], which evaluates the
//! immersion pointwise and knows its provenance: target space, selected
//! tau branch, the null normal the formula distinguishes, and (when
//! meaningful) the support function. Verification consumes candidates
//! through that surface.
//!
//! Root selection: at each sample the accepted roots are sorted and a
//! fixed branch index picks one. Root collisions or a changing accepted
//! count abort with `RootBranchLost` instead of silently permuting
//! branches.

pub mod correspondence;
pub mod seeds;

pub use correspondence::{lorentzian_correspondence, LorentzCorrespondence};
pub use seeds::SeedHypersurface;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::{make_chart, ProductSphereChart};
use crate::pseudolin::{AmbientSpace, Signature, SignedVector, DEFAULT_TOL};
use crate::scalarlang::{
    add, cos, differentiate, jet, lit, mul, neg, sin, sub, var, FieldExpr, Jet4,
};
use crate::tausolve::{
    real_roots, tau_poly_det_derivative, tau_poly_from_matrix, TauPolynomial, TauRoots,
};

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub enum Provenance {
    SupportFunction {
        branch: usize,
    },
    Corollary1,
    HypersurfaceFlat {
        branch: usize,
    },
    GaussSphere {
        branch: usize,
    },
    NullHyperplaneGraph,
    /// Raw closed-form map with no construction behind it.
    Raw,
}

#[derive(Debug, Clone)]
enum NormalField {
    None,
    Constant(SignedVector),
    Chart(ProductSphereChart),
}

#[derive(Debug, Clone)]
enum Kind {
    /// Closed-form components; analytic jets available.
    Closed {
        components: Vec<FieldExpr>,
        normal: NormalField,
    },
    /// General support-function construction, pointwise.
    SupportMap {
        chart: ProductSphereChart,
        branch: usize,
    },
    /// Flat hypersurface seed, phi = (sigma + tau nu, tau).
    SeedFlat {
        seed: SeedHypersurface,
        branch: usize,
        forced_tau: Option<f64>,
    },
    /// Product-sphere hypersurface seed, phi = nu + tau sigma.
    SeedSphere {
        seed: SeedHypersurface,
        branch: usize,
    },
}

#[derive(Debug, Clone)]
pub struct CandidateImmersion {
    pub name: String,
    pub target: AmbientSpace,
    pub sig: Signature,
    pub vars: Vec<String>,
    pub domain: Vec<(f64, f64)>,
    pub hard_bounds: Vec<Option<(f64, f64)>>,
    /// Support function, when the construction has one.
    pub sigma: Option<FieldExpr>,
    pub provenance: Provenance,
    kind: Kind,
    tol: f64,
}

impl CandidateImmersion {
    pub fn eval(&self, x: &[f64]) -> Result<SignedVector> {
        match &self.kind {
            Kind::Closed { components, .. } => {
                let mut out = DVector::zeros(components.len());
                for (i, c) in components.iter().enumerate() {
                    out[i] = c.eval(x)?;
                }
                Ok(out)
            }
            Kind::SupportMap { chart, branch } => {
                let sigma = self.sigma.as_ref().expect("support candidate has sigma");
                let (phi, _, _) = support_eval(chart, sigma, x, *branch, self.tol)?;
                Ok(phi)
            }
            Kind::SeedFlat {
                seed,
                branch,
                forced_tau,
            } => {
                let tau = match forced_tau {
                    Some(t) => *t,
                    None => pick_branch(&flat_tau_roots(seed, x, self.tol)?, *branch, x)?,
                };
                let s = seed.sigma_at(x)?;
                let nu = seed.nu_at(x)?;
                let mut out = DVector::zeros(seed.dim() + 1);
                for i in 0..seed.dim() {
                    out[i] = s[i] + tau * nu[i];
                }
                out[seed.dim()] = tau;
                Ok(out)
            }
            Kind::SeedSphere { seed, branch } => {
                let tau = pick_branch(&sphere_tau_roots(seed, x, self.tol)?, *branch, x)?;
                let s = seed.sigma_at(x)?;
                let nu = seed.nu_at(x)?;
                Ok(nu + s * tau)
            }
        }
    }

    /// Closed-form components when analytic jets are possible.
    pub fn closed_components(&self) -> Option<&[FieldExpr]> {
        match &self.kind {
            Kind::Closed { components, .. } => Some(components),
            _ => None,
        }
    }

    /// The null normal distinguished by the construction, if any.
    pub fn null_normal_at(&self, x: &[f64]) -> Result<Option<SignedVector>> {
        Ok(match &self.kind {
            Kind::Closed {
                normal: NormalField::None,
                ..
            } => None,
            Kind::Closed {
                normal: NormalField::Constant(v),
                ..
            } => Some(v.clone()),
            Kind::Closed {
                normal: NormalField::Chart(chart),
                ..
            } => Some(chart.nu(x)?),
            Kind::SupportMap { chart, .. } => Some(chart.nu(x)?),
            Kind::SeedFlat { seed, .. } => {
                let nu = seed.nu_at(x)?;
                let mut out = DVector::zeros(seed.dim() + 1);
                for i in 0..seed.dim() {
                    out[i] = nu[i];
                }
                out[seed.dim()] = 1.0;
                Some(out)
            }
            Kind::SeedSphere { seed, .. } => Some(seed.sigma_at(x)?),
        })
    }

    /// The tau value used at x, when the construction selects one.
    pub fn tau_at(&self, x: &[f64]) -> Result<Option<f64>> {
        Ok(match &self.kind {
            Kind::SupportMap { chart, branch } => {
                let sigma = self.sigma.as_ref().unwrap();
                let (_, tau, _) = support_eval(chart, sigma, x, *branch, self.tol)?;
                Some(tau)
            }
            Kind::SeedFlat {
                seed,
                branch,
                forced_tau,
            } => Some(match forced_tau {
                Some(t) => *t,
                None => pick_branch(&flat_tau_roots(seed, x, self.tol)?, *branch, x)?,
            }),
            Kind::SeedSphere { seed, branch } => Some(pick_branch(
                &sphere_tau_roots(seed, x, self.tol)?,
                *branch,
                x,
            )?),
            Kind::Closed { .. } => match self.provenance {
                // tau = sigma_vv - sigma_uu for the explicit surface formula
                Provenance::Corollary1 => {
                    let sigma = self.sigma.as_ref().unwrap();
                    let j = jet(sigma, x, 2)?;
                    Some(j.d2(1, 1) - j.d2(0, 0))
                }
                _ => None,
            },
        })
    }

    /// Accepted and rejected roots at x, for reports.
    pub fn tau_roots_at(&self, x: &[f64]) -> Result<Option<TauRoots>> {
        Ok(match &self.kind {
            Kind::SupportMap { chart, .. } => {
                let sigma = self.sigma.as_ref().unwrap();
                let (tp, b) = support_tau_polynomial(chart, sigma, x)?;
                let id = DMatrix::identity(b.nrows(), b.nrows());
                Some(real_roots(&tp, |t| (&b + &id * t).determinant(), self.tol)?)
            }
            Kind::SeedFlat { seed, .. } => Some(flat_tau_roots(seed, x, self.tol)?),
            Kind::SeedSphere { seed, .. } => Some(sphere_tau_roots(seed, x, self.tol)?),
            Kind::Closed { .. } if self.provenance == Provenance::Corollary1 => {
                let chart = make_chart(self.sig);
                let sigma = self.sigma.as_ref().unwrap();
                let (tp, b) = support_tau_polynomial(&chart, sigma, x)?;
                let id = DMatrix::identity(b.nrows(), b.nrows());
                Some(real_roots(&tp, |t| (&b + &id * t).determinant(), self.tol)?)
            }
            Kind::Closed { .. } => None,
        })
    }

    /// |t(tau_used)| / (1 + coefficient scale): pointwise root validity.
    pub fn tau_residual_at(&self, x: &[f64]) -> Result<Option<f64>> {
        let tau = match self.tau_at(x)? {
            Some(t) => t,
            None => return Ok(None),
        };
        let tp: Option<TauPolynomial> = match &self.kind {
            Kind::SupportMap { chart, .. } => {
                let sigma = self.sigma.as_ref().unwrap();
                Some(support_tau_polynomial(chart, sigma, x)?.0)
            }
            Kind::Closed { .. } if self.provenance == Provenance::Corollary1 => {
                let chart = make_chart(self.sig);
                let sigma = self.sigma.as_ref().unwrap();
                Some(support_tau_polynomial(&chart, sigma, x)?.0)
            }
            Kind::SeedFlat { seed, .. } => {
                let a = seed.shape_operator(x)?;
                let id = DMatrix::identity(a.nrows(), a.nrows());
                Some(tau_poly_det_derivative(&id, &(-&a))?)
            }
            Kind::SeedSphere { seed, .. } => {
                let a = seed.shape_operator(x)?;
                let id = DMatrix::identity(a.nrows(), a.nrows());
                Some(tau_poly_from_matrix(&(-&a), &id)?)
            }
            _ => None,
        };
        Ok(tp.map(|tp| tp.eval(tau).abs() / (1.0 + tp.scale())))
    }

    pub fn seed(&self) -> Option<&SeedHypersurface> {
        match &self.kind {
            Kind::SeedFlat { seed, .. } | Kind::SeedSphere { seed, .. } => Some(seed),
            _ => None,
        }
    }

    pub fn is_sphere_target(&self) -> bool {
        matches!(
            self.target.curvature,
            crate::pseudolin::Curvature::UnitSphere
        )
    }
}

fn pick_branch(roots: &TauRoots, branch: usize, x: &[f64]) -> Result<f64> {
    for w in roots.roots.windows(2) {
        if (w[1] - w[0]).abs() < 1e-7 * (1.0 + w[0].abs()) {
            return Err(Error::RootBranchLost {
                at: x.to_vec(),
                detail: format!("root collision near {:.6}", w[0]),
            });
        }
    }
    roots
        .roots
        .get(branch)
        .copied()
        .ok_or_else(|| Error::RootBranchLost {
            at: x.to_vec(),
            detail: format!("branch {branch} of {} accepted roots", roots.roots.len()),
        })
}

/// B(x) = diag(eps) (sigma Id + 2 Hess) in the orthonormal frame: the
/// matrix whose inverse is the shape operator of the mean Gauss map, so
/// t(tau) = tr adj(B + tau Id).
pub fn support_tau_polynomial(
    chart: &ProductSphereChart,
    sigma: &FieldExpr,
    x: &[f64],
) -> Result<(TauPolynomial, DMatrix<f64>)> {
    let n = chart.n();
    let sj = jet(sigma, x, 2)?;
    let frame = chart.orthonormal_frame(x)?;
    let h = chart.covariant_hessian(&sj, x, &frame)?;
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let base = if i == j { sj.value } else { 0.0 };
            b[(i, j)] = frame.signs[i] * (base + 2.0 * h[(i, j)]);
        }
    }
    let id = DMatrix::identity(n, n);
    let tp = tau_poly_from_matrix(&b, &id)?;
    Ok((tp, b))
}

/// Raw real roots of the support polynomial with the degeneracy filter
/// disabled (used by the Lorentzian correspondence, where the interesting
/// examples are exactly the degenerate ones).
pub fn support_tau_roots_unfiltered(
    chart: &ProductSphereChart,
    sigma: &FieldExpr,
    x: &[f64],
    tol: f64,
) -> Result<TauRoots> {
    let (tp, _) = support_tau_polynomial(chart, sigma, x)?;
    real_roots(&tp, |_| 1.0, tol)
}

/// phi = tau nu + sigma conj(nu) + 2 grad(sigma) at x.
pub fn support_phi(
    chart: &ProductSphereChart,
    sigma_jet: &Jet4,
    x: &[f64],
    tau: f64,
) -> Result<SignedVector> {
    let nu = chart.nu(x)?;
    let nu_bar = chart.nu_bar(x)?;
    let grad = chart.intrinsic_gradient(sigma_jet, x)?;
    Ok(nu * tau + nu_bar * sigma_jet.value + grad * 2.0)
}

fn support_eval(
    chart: &ProductSphereChart,
    sigma: &FieldExpr,
    x: &[f64],
    branch: usize,
    tol: f64,
) -> Result<(SignedVector, f64, TauRoots)> {
    let (tp, b) = support_tau_polynomial(chart, sigma, x)?;
    let id = DMatrix::identity(b.nrows(), b.nrows());
    let roots = real_roots(&tp, |t| (&b + &id * t).determinant(), tol)?;
    let tau = pick_branch(&roots, branch, x)?;
    let sj = jet(sigma, x, 2)?;
    let phi = support_phi(chart, &sj, x, tau)?;
    Ok((phi, tau, roots))
}

fn flat_tau_roots(seed: &SeedHypersurface, x: &[f64], tol: f64) -> Result<TauRoots> {
    let a = seed.shape_operator(x)?;
    let id = DMatrix::identity(a.nrows(), a.nrows());
    let tp = tau_poly_det_derivative(&id, &(-&a))?;
    real_roots(&tp, |t| (&id - &a * t).determinant(), tol)
}

/// Accepted/rejected roots for a flat hypersurface seed at x; exposed so
/// degenerate cases (umbilic rejection) can be inspected directly.
pub fn hypersurface_flat_tau_roots(
    seed: &SeedHypersurface,
    x: &[f64],
    tol: f64,
) -> Result<TauRoots> {
    flat_tau_roots(seed, x, tol)
}

fn sphere_tau_roots(seed: &SeedHypersurface, x: &[f64], tol: f64) -> Result<TauRoots> {
    let a = seed.shape_operator(x)?;
    let id = DMatrix::identity(a.nrows(), a.nrows());
    let tp = tau_poly_from_matrix(&(-&a), &id)?;
    real_roots(&tp, |t| (&id * t - &a).determinant(), tol)
}

pub fn gauss_sphere_tau_roots(seed: &SeedHypersurface, x: &[f64], tol: f64) -> Result<TauRoots> {
    sphere_tau_roots(seed, x, tol)
}

/// Probe the accepted-root structure over a coarse grid. Fails with
/// `NoAdmissibleTau` when no sample has any accepted root and with
/// `RootBranchLost` when the requested branch is never reachable; with
/// `strict_count` a varying accepted count is itself a branch loss (the
/// flat hypersurface contract).
fn probe_branches<F>(
    domain: &[(f64, f64)],
    hard_bounds: &[Option<(f64, f64)>],
    branch: usize,
    strict_count: bool,
    roots_at: F,
) -> Result<()>
where
    F: Fn(&[f64]) -> Result<TauRoots>,
{
    let probes = seeds::probe_points(domain, hard_bounds, 5);
    let mut counts: Vec<(Vec<f64>, usize)> = Vec::new();
    for x in &probes {
        match roots_at(x) {
            Ok(r) => counts.push((x.clone(), r.roots.len())),
            Err(Error::EvalDomain { .. })
            | Err(Error::DegenerateChartPoint { .. })
            | Err(Error::DegenerateSample { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    if counts.is_empty() || counts.iter().all(|(_, c)| *c == 0) {
        return Err(Error::NoAdmissibleTau);
    }
    if strict_count {
        let first = counts[0].1;
        if let Some((x, c)) = counts.iter().find(|(_, c)| *c != first) {
            return Err(Error::RootBranchLost {
                at: x.clone(),
                detail: format!("accepted root count varies across the domain ({first} vs {c})"),
            });
        }
    }
    let best = counts.iter().map(|(_, c)| *c).max().unwrap();
    if best <= branch {
        return Err(Error::RootBranchLost {
            at: counts[0].0.clone(),
            detail: format!("branch {branch} of at most {best} accepted roots"),
        });
    }
    Ok(())
}

/// Support-function construction: phi = tau nu + sigma conj(nu) + 2 grad sigma
/// over the universal cover of S^p x S^q, with tau an accepted root of
/// tr adj(B + tau Id), B = diag(eps)(sigma Id + 2 Hess sigma).
pub fn from_support_function(
    sigma: FieldExpr,
    sig: Signature,
    branch: usize,
) -> Result<CandidateImmersion> {
    let chart = make_chart(sig);
    if let Some(maxv) = sigma.max_var() {
        if maxv >= sig.n() {
            return Err(Error::InvalidInput(format!(
                "sigma references variable index {maxv}, chart has {}",
                sig.n()
            )));
        }
    }
    let tol = DEFAULT_TOL;
    probe_branches(chart.domain(), chart.hard_bounds(), branch, false, |x| {
        let (tp, b) = support_tau_polynomial(&chart, &sigma, x)?;
        let id = DMatrix::identity(b.nrows(), b.nrows());
        real_roots(&tp, |t| (&b + &id * t).determinant(), tol)
    })?;
    Ok(CandidateImmersion {
        name: format!("support-function (p,q)=({},{})", sig.p, sig.q),
        target: AmbientSpace::flat(sig.p + 1, sig.q + 1),
        sig,
        vars: chart.vars().to_vec(),
        domain: chart.domain().to_vec(),
        hard_bounds: chart.hard_bounds().to_vec(),
        sigma: Some(sigma),
        provenance: Provenance::SupportFunction { branch },
        kind: Kind::SupportMap { chart, branch },
        tol,
    })
}

/// The explicit (1,1) surface formula
/// `[(sigma - s_uu + s_vv + 2i s_u) e^{iu}, (-sigma - s_uu + s_vv - 2i s_v) e^{iv}]`
/// written out in real coordinates; equals the support-function
/// construction with tau = s_vv - s_uu.
pub fn corollary1_surface(sigma: FieldExpr) -> Result<CandidateImmersion> {
    let sig = Signature::new(1, 1);
    if let Some(maxv) = sigma.max_var() {
        if maxv >= 2 {
            return Err(Error::InvalidInput(
                "corollary-1 surfaces are functions of (u,v)".into(),
            ));
        }
    }
    let (u, v) = (var(0), var(1));
    let s_u = differentiate(&sigma, 0);
    let s_v = differentiate(&sigma, 1);
    let s_uu = differentiate(&s_u, 0);
    let s_vv = differentiate(&s_v, 1);
    let s1 = add(sub(sigma.clone(), s_uu.clone()), s_vv.clone());
    let s2 = add(sub(neg(sigma.clone()), s_uu), s_vv);
    let two_su = mul(lit(2.0), s_u);
    let two_sv = mul(lit(2.0), s_v);
    let components = vec![
        sub(
            mul(s1.clone(), cos(u.clone())),
            mul(two_su.clone(), sin(u.clone())),
        ),
        add(mul(s1, sin(u.clone())), mul(two_su, cos(u))),
        add(
            mul(s2.clone(), cos(v.clone())),
            mul(two_sv.clone(), sin(v.clone())),
        ),
        sub(mul(s2, sin(v.clone())), mul(two_sv, cos(v))),
    ];
    let chart = make_chart(sig);
    Ok(CandidateImmersion {
        name: "corollary-1 surface".into(),
        target: AmbientSpace::flat(2, 2),
        sig,
        vars: chart.vars().to_vec(),
        domain: chart.domain().to_vec(),
        hard_bounds: chart.hard_bounds().to_vec(),
        sigma: Some(sigma),
        provenance: Provenance::Corollary1,
        kind: Kind::Closed {
            components,
            normal: NormalField::Chart(chart),
        },
        tol: DEFAULT_TOL,
    })
}

/// Graph data inside a null hyperplane: checks membership
/// `<phi, nu0> = 0` (and `<phi,phi> = 1` for sphere targets) on a probe
/// grid, then packages the candidate for null-second-fundamental-form
/// verification.
pub fn null_hyperplane_graph(
    nu0: SignedVector,
    target: AmbientSpace,
    sig: Signature,
    components: Vec<FieldExpr>,
    domain: Vec<(f64, f64)>,
) -> Result<CandidateImmersion> {
    let n = sig.n();
    if components.len() != target.dim() {
        return Err(Error::InvalidInput(format!(
            "expected {} components, got {}",
            target.dim(),
            components.len()
        )));
    }
    let nn = target.inner(&nu0, &nu0);
    let scale = nu0.amax();
    if scale == 0.0 || nn.abs() > 1e-10 * scale * scale {
        return Err(Error::InvalidInput(format!(
            "nu0 must be a nonzero null vector (<nu0,nu0> = {nn:.3e})"
        )));
    }
    let probes = seeds::probe_points(&domain, &vec![None; n], 6);
    for x in &probes {
        let mut phi = DVector::zeros(target.dim());
        for (i, c) in components.iter().enumerate() {
            phi[i] = c.eval(x)?;
        }
        let resid = target.inner(&phi, &nu0).abs();
        let memb_scale = 1.0 + phi.amax() * scale;
        if resid > 1e-10 * memb_scale {
            return Err(Error::NotInNullHyperplane {
                at: x.clone(),
                residual: resid,
            });
        }
        if target.curvature == crate::pseudolin::Curvature::UnitSphere {
            let quadric = (target.sq_norm(&phi) - 1.0).abs();
            if quadric > 1e-10 * memb_scale {
                return Err(Error::NotInNullHyperplane {
                    at: x.clone(),
                    residual: quadric,
                });
            }
        }
    }
    Ok(CandidateImmersion {
        name: "null-hyperplane graph".into(),
        target,
        sig,
        vars: crate::jets::make_chart(sig).vars().to_vec(),
        domain,
        hard_bounds: vec![None; n],
        sigma: None,
        provenance: Provenance::NullHyperplaneGraph,
        kind: Kind::Closed {
            components,
            normal: NormalField::Constant(nu0),
        },
        tol: DEFAULT_TOL,
    })
}

fn seed_signature(seed: &SeedHypersurface) -> Result<Signature> {
    let center: Vec<f64> = seed
        .domain
        .iter()
        .zip(&seed.hard_bounds)
        .map(|((lo, hi), b)| match b {
            Some((blo, bhi)) => (0.5 * (lo + hi)).clamp(blo + 0.1, bhi - 0.1),
            None => 0.5 * (lo + hi),
        })
        .collect();
    let g = seed.metric(&center)?;
    let (p, q, z) = crate::pseudolin::gram_signature(&g, 1e-9);
    if z > 0 {
        return Err(Error::InvalidInput(format!(
            "seed `{}` has degenerate induced metric at {center:?}",
            seed.name
        )));
    }
    Ok(Signature::new(p, q))
}

/// Flat-hypersurface lift: phi = (sigma + tau nu, tau) with tau an
/// accepted root of d/dtau det(Id - tau A), the cleared numerator of
/// tr((Id - tau A)^{-1} A). For a diagonalizable shape operator the root
/// is the midpoint of the inverse principal curvatures, so seeds with a
/// flat direction have no admissible tau.
pub fn from_hypersurface_flat(seed: SeedHypersurface, branch: usize) -> Result<CandidateImmersion> {
    if seed.ambient.curvature != crate::pseudolin::Curvature::Flat || seed.product_split.is_some() {
        return Err(Error::InvalidInput(
            "flat construction needs a flat seed".into(),
        ));
    }
    seed.validate(1e-7)?;
    let sig = seed_signature(&seed)?;
    let tol = DEFAULT_TOL;
    probe_branches(&seed.domain, &seed.hard_bounds, branch, true, |x| {
        flat_tau_roots(&seed, x, tol)
    })?;
    Ok(CandidateImmersion {
        name: format!("{} -> flat space form", seed.name),
        target: AmbientSpace::flat(seed.ambient.plus, seed.ambient.minus + 1),
        sig,
        vars: seed.vars.clone(),
        domain: seed.domain.clone(),
        hard_bounds: seed.hard_bounds.clone(),
        sigma: None,
        provenance: Provenance::HypersurfaceFlat { branch },
        kind: Kind::SeedFlat {
            seed,
            branch,
            forced_tau: None,
        },
        tol,
    })
}

/// Flat-hypersurface assembly with a caller-supplied constant tau, bypassing
/// root selection. Used to exercise the first/second fundamental form
/// identities, which hold for every tau.
pub fn from_hypersurface_flat_forced_tau(
    seed: SeedHypersurface,
    tau: f64,
) -> Result<CandidateImmersion> {
    seed.validate(1e-7)?;
    let sig = seed_signature(&seed)?;
    Ok(CandidateImmersion {
        name: format!("{} -> flat space form (forced tau={tau})", seed.name),
        target: AmbientSpace::flat(seed.ambient.plus, seed.ambient.minus + 1),
        sig,
        vars: seed.vars.clone(),
        domain: seed.domain.clone(),
        hard_bounds: seed.hard_bounds.clone(),
        sigma: None,
        provenance: Provenance::HypersurfaceFlat { branch: 0 },
        kind: Kind::SeedFlat {
            seed,
            branch: 0,
            forced_tau: Some(tau),
        },
        tol: DEFAULT_TOL,
    })
}

/// Sphere-form construction: phi = nu + tau sigma into the unit quadric,
/// with tau an accepted root of tr adj(tau Id - A). For surfaces (n = 2)
/// the unique root is the scalar mean curvature of the seed.
pub fn from_gauss_sphere(seed: SeedHypersurface, branch: usize) -> Result<CandidateImmersion> {
    let split = seed.product_split.ok_or_else(|| {
        Error::InvalidInput("sphere construction needs a product-sphere seed".into())
    })?;
    seed.validate(1e-7)?;
    let sig = seed_signature(&seed)?;
    let tol = DEFAULT_TOL;
    probe_branches(&seed.domain, &seed.hard_bounds, branch, false, |x| {
        sphere_tau_roots(&seed, x, tol)
    })?;
    let minus = seed.dim() - split;
    Ok(CandidateImmersion {
        name: format!("{} -> spherical space form", seed.name),
        target: AmbientSpace::unit_sphere(split, minus),
        sig,
        vars: seed.vars.clone(),
        domain: seed.domain.clone(),
        hard_bounds: seed.hard_bounds.clone(),
        sigma: None,
        provenance: Provenance::GaussSphere { branch },
        kind: Kind::SeedSphere { seed, branch },
        tol,
    })
}

/// The mean-Gauss-map data of a support-function candidate at one chart
/// point: the null direction nu normalized to the product of unit
/// spheres, the jet of the support function, and the selected tau root.
#[derive(Debug, Clone)]
pub struct MeanGaussPoint {
    pub nu: SignedVector,
    pub sigma_jet: Jet4,
    pub tau: f64,
}

impl CandidateImmersion {
    /// Mean-Gauss-map data at x for candidates that carry a support
    /// function (the general construction and the explicit surface form).
    pub fn mean_gauss_point(&self, x: &[f64]) -> Result<Option<MeanGaussPoint>> {
        let relevant = matches!(
            self.provenance,
            Provenance::SupportFunction { .. } | Provenance::Corollary1
        );
        if !relevant {
            return Ok(None);
        }
        let sigma = self.sigma.as_ref().expect("support candidates carry sigma");
        let tau = match self.tau_at(x)? {
            Some(t) => t,
            None => return Ok(None),
        };
        let chart = match &self.kind {
            Kind::SupportMap { chart, .. } => chart.clone(),
            _ => make_chart(self.sig),
        };
        Ok(Some(MeanGaussPoint {
            nu: chart.nu(x)?,
            sigma_jet: jet(sigma, x, 4)?,
            tau,
        }))
    }
}

/// Assemble a candidate directly from closed-form components, with no
/// construction provenance. Lets arbitrary parametrized maps run through
/// the same verification machinery.
pub fn closed_candidate(
    name: &str,
    target: AmbientSpace,
    sig: Signature,
    components: Vec<FieldExpr>,
    domain: Vec<(f64, f64)>,
) -> Result<CandidateImmersion> {
    if components.len() != target.dim() {
        return Err(Error::InvalidInput(format!(
            "expected {} components, got {}",
            target.dim(),
            components.len()
        )));
    }
    let n = sig.n();
    if domain.len() != n {
        return Err(Error::InvalidInput(
            "domain box must match the chart dimension".into(),
        ));
    }
    Ok(CandidateImmersion {
        name: name.into(),
        target,
        sig,
        vars: make_chart(sig).vars().to_vec(),
        domain,
        hard_bounds: vec![None; n],
        sigma: None,
        provenance: Provenance::Raw,
        kind: Kind::Closed {
            components,
            normal: NormalField::None,
        },
        tol: DEFAULT_TOL,
    })
}

/// Result of peeling a flat-target candidate back into hypersurface data.
#[derive(Debug, Clone)]
pub struct FlatDecomposition {
    pub sigma: SignedVector,
    pub tau: f64,
    /// max_a |<d_a sigma, nu>| in the seed ambient.
    pub legendrian_residual: f64,
    /// max-norm of (sigma + tau nu, tau) - phi.
    pub roundtrip_residual: f64,
}

/// Null projection of a flat-target candidate: sigma = psi - tau nu for
/// phi = (psi, tau) and null normal scaled to last component 1.
pub fn decompose_flat(
    x: &[f64],
    phi: &SignedVector,
    d_phi: &[SignedVector],
    nu_tilde: &SignedVector,
    d_nu_tilde: &[SignedVector],
    target: &AmbientSpace,
) -> Result<FlatDecomposition> {
    let nn = target.dim();
    let last = nu_tilde[nn - 1];
    if last.abs() < 1e-9 {
        return Err(Error::NormalizationFailure { at: x.to_vec() });
    }
    let seed_amb = AmbientSpace::flat(target.plus, target.minus - 1);
    let nu: SignedVector = nu_tilde.rows(0, nn - 1) / last;
    let tau = phi[nn - 1];
    let psi: SignedVector = phi.rows(0, nn - 1).into();
    let sigma = &psi - &nu * tau;

    let mut legendrian: f64 = 0.0;
    for (a, dp) in d_phi.iter().enumerate() {
        let d_tau = dp[nn - 1];
        let d_last = d_nu_tilde[a][nn - 1];
        let d_nu: SignedVector = (d_nu_tilde[a].rows(0, nn - 1) * last
            - nu_tilde.rows(0, nn - 1) * d_last)
            / (last * last);
        let d_psi: SignedVector = dp.rows(0, nn - 1).into();
        let d_sigma = &d_psi - &d_nu * tau - &nu * d_tau;
        legendrian = legendrian.max(seed_amb.inner(&d_sigma, &nu).abs());
    }

    let mut rebuilt = DVector::zeros(nn);
    for i in 0..nn - 1 {
        rebuilt[i] = sigma[i] + tau * nu[i];
    }
    rebuilt[nn - 1] = tau;
    let roundtrip = (rebuilt - phi).amax();
    Ok(FlatDecomposition {
        sigma,
        tau,
        legendrian_residual: legendrian,
        roundtrip_residual: roundtrip,
    })
}

#[derive(Debug, Clone)]
pub struct SphereDecomposition {
    pub nu: SignedVector,
    pub tau: f64,
    /// |<nu, sigma>| in the full ambient.
    pub orthogonality_residual: f64,
    /// max_a |<d_a nu, sigma>|.
    pub gauss_residual: f64,
    /// max_a |<d_a sigma, nu>|.
    pub legendrian_residual: f64,
    pub roundtrip_residual: f64,
}

/// Inverse of the sphere-form construction: tau is the plus-block
/// Euclidean pairing <phi', sigma'>, and nu = phi - tau sigma.
pub fn decompose_sphere(
    phi: &SignedVector,
    d_phi: &[SignedVector],
    sigma: &SignedVector,
    d_sigma: &[SignedVector],
    split: usize,
    target: &AmbientSpace,
) -> Result<SphereDecomposition> {
    let tau: f64 = (0..split).map(|i| phi[i] * sigma[i]).sum();
    let nu = phi - sigma * tau;
    let orthogonality = target.inner(&nu, sigma).abs();
    let mut gauss: f64 = 0.0;
    let mut legendrian: f64 = 0.0;
    for (a, dp) in d_phi.iter().enumerate() {
        let d_tau: f64 = (0..split)
            .map(|i| dp[i] * sigma[i] + phi[i] * d_sigma[a][i])
            .sum();
        let d_nu = dp - d_sigma[a].clone() * tau - sigma * d_tau;
        gauss = gauss.max(target.inner(&d_nu, sigma).abs());
        legendrian = legendrian.max(target.inner(&d_sigma[a], &nu).abs());
    }
    let roundtrip = (&nu + sigma * tau - phi).amax();
    Ok(SphereDecomposition {
        nu,
        tau,
        orthogonality_residual: orthogonality,
        gauss_residual: gauss,
        legendrian_residual: legendrian,
        roundtrip_residual: roundtrip,
    })
}

#[cfg(test)]
mod tests;
