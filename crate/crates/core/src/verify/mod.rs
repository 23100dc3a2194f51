//! Numerical extrinsic geometry of candidate immersions: fundamental
//! forms, null normal frames, mean curvature, the marginally-trapped
//! residual, and the auxiliary identities the constructions satisfy.

mod surface;
mod sweep;

pub use surface::{surface_checks, SurfaceChecks};
pub use sweep::{
    default_checks, grid_points, sweep, CheckAggregate, CheckKind, CheckSpec, SampleRecord,
    VerificationReport,
};

use nalgebra::{DMatrix, DVector};

use crate::construct::{CandidateImmersion, SeedHypersurface};
use crate::error::{Error, Result};
use crate::fd;
use crate::pseudolin::{
    gram_signature, null_frame_from_plane, signed_gram_schmidt, AmbientSpace, NullNormalFrame,
    SignedVector,
};
use crate::scalarlang::jet;

/// How immersion derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JetMode {
    /// Exact jets through closed-form components.
    Analytic,
    /// 4th-order central differences with the given step.
    Fd { step: f64 },
}

impl JetMode {
    pub fn label(&self) -> String {
        match self {
            JetMode::Analytic => "analytic".into(),
            JetMode::Fd { step } => format!("fd(step={step})"),
        }
    }
}

/// Point, first and second derivatives of a candidate at one sample, in
/// chart coordinates.
#[derive(Debug, Clone)]
pub struct ImmersionJet {
    pub x: Vec<f64>,
    pub point: SignedVector,
    pub d1: Vec<SignedVector>,
    pub d2: Vec<Vec<SignedVector>>,
}

fn fd_vector_partial(
    c: &CandidateImmersion,
    x: &[f64],
    multi: &[usize],
    h: f64,
    dim: usize,
) -> Result<SignedVector> {
    let n = x.len();
    let mut per_axis = vec![0usize; n];
    for &a in multi {
        per_axis[a] += 1;
    }
    let axes: Vec<usize> = (0..n).filter(|&a| per_axis[a] > 0).collect();
    let stencils: Vec<fd::Stencil> = axes
        .iter()
        .map(|&a| fd::axis_stencil(per_axis[a]))
        .collect();
    let mut acc = DVector::zeros(dim);
    let mut tap_idx = vec![0usize; axes.len()];
    let mut point = x.to_vec();
    loop {
        let mut weight = 1.0;
        for (k, &a) in axes.iter().enumerate() {
            let (off, w) = stencils[k].taps[tap_idx[k]];
            weight *= w;
            point[a] = x[a] + off as f64 * h;
        }
        acc += c.eval(&point)? * weight;
        let mut k = 0;
        loop {
            if k == axes.len() {
                let total: u32 = stencils.iter().map(|s| s.h_pow).sum();
                return Ok(acc / h.powi(total as i32));
            }
            tap_idx[k] += 1;
            if tap_idx[k] < stencils[k].taps.len() {
                break;
            }
            tap_idx[k] = 0;
            point[axes[k]] = x[axes[k]];
            k += 1;
        }
    }
}

fn check_margin(c: &CandidateImmersion, x: &[f64], step: f64) -> Result<()> {
    for (a, bound) in c.hard_bounds.iter().enumerate() {
        if let Some((lo, hi)) = bound {
            if x[a] - 2.0 * step < *lo || x[a] + 2.0 * step > *hi {
                return Err(Error::BoundaryMargin { at: x.to_vec() });
            }
        }
    }
    Ok(())
}

/// Value and derivatives of the candidate at x.
///
/// Analytic mode is exact and only available when the candidate has
/// closed-form components; fd mode works for every candidate but must
/// stay 2 steps inside any hard domain bound.
pub fn immersion_jet(c: &CandidateImmersion, x: &[f64], mode: JetMode) -> Result<ImmersionJet> {
    let n = c.sig.n();
    let dim = c.target.dim();
    match mode {
        JetMode::Analytic => {
            let comps = c.closed_components().ok_or(Error::AnalyticUnavailable)?;
            let mut point = DVector::zeros(dim);
            let mut d1 = vec![DVector::zeros(dim); n];
            let mut d2 = vec![vec![DVector::zeros(dim); n]; n];
            for (i, comp) in comps.iter().enumerate() {
                let j = jet(comp, x, 2)?;
                point[i] = j.value;
                for a in 0..n {
                    d1[a][i] = j.d1(a);
                    for b in 0..n {
                        d2[a][b][i] = j.d2(a, b);
                    }
                }
            }
            Ok(ImmersionJet {
                x: x.to_vec(),
                point,
                d1,
                d2,
            })
        }
        JetMode::Fd { step } => {
            check_margin(c, x, step)?;
            let point = c.eval(x)?;
            let mut d1 = Vec::with_capacity(n);
            for a in 0..n {
                d1.push(fd_vector_partial(c, x, &[a], step, dim)?);
            }
            let mut d2 = vec![vec![DVector::zeros(dim); n]; n];
            for a in 0..n {
                for b in a..n {
                    let v = fd_vector_partial(c, x, &[a, b], step, dim)?;
                    d2[a][b] = v.clone();
                    d2[b][a] = v;
                }
            }
            Ok(ImmersionJet {
                x: x.to_vec(),
                point,
                d1,
                d2,
            })
        }
    }
}

/// Richardson-extrapolated fd jet (entries combined from steps h and h/2).
pub fn immersion_jet_richardson(
    c: &CandidateImmersion,
    x: &[f64],
    step: f64,
) -> Result<ImmersionJet> {
    let coarse = immersion_jet(c, x, JetMode::Fd { step })?;
    let fine = immersion_jet(c, x, JetMode::Fd { step: step / 2.0 })?;
    let comb = |a: &SignedVector, b: &SignedVector| -> SignedVector {
        let mut out = b.clone();
        for i in 0..out.len() {
            out[i] = fd::richardson4(a[i], b[i]);
        }
        out
    };
    let n = coarse.d1.len();
    let d1: Vec<SignedVector> = (0..n).map(|a| comb(&coarse.d1[a], &fine.d1[a])).collect();
    let mut d2 = vec![vec![DVector::zeros(coarse.point.len()); n]; n];
    for a in 0..n {
        for b in 0..n {
            d2[a][b] = comb(&coarse.d2[a][b], &fine.d2[a][b]);
        }
    }
    Ok(ImmersionJet {
        x: fine.x,
        point: fine.point,
        d1,
        d2,
    })
}

/// Induced metric in chart coordinates with its eigenvalue signature.
pub fn first_fundamental_form(
    jet: &ImmersionJet,
    amb: &AmbientSpace,
    tol: f64,
) -> (DMatrix<f64>, (usize, usize, usize), bool) {
    let n = jet.d1.len();
    let g = DMatrix::from_fn(n, n, |a, b| amb.inner(&jet.d1[a], &jet.d1[b]));
    let scale = g.amax().max(f64::MIN_POSITIVE);
    let sig = gram_signature(&g, tol * scale);
    let degenerate = sig.2 > 0;
    (g, sig, degenerate)
}

/// Null frame of the normal plane of the candidate at this jet.
///
/// The normal plane is the signed orthogonal complement of span(d phi)
/// (also of phi itself in sphere mode). When the construction carries a
/// distinguished null normal, nu is aligned with it and xi rescaled to
/// keep the pairing 2.
pub fn normal_frame(
    jet: &ImmersionJet,
    amb: &AmbientSpace,
    sphere_mode: bool,
    provenance: Option<&SignedVector>,
    tol: f64,
) -> Result<NullNormalFrame> {
    let dim = amb.dim();
    let n = jet.d1.len();
    let rows = n + usize::from(sphere_mode);
    let mut constraints = DMatrix::zeros(rows, dim);
    let metric = amb.metric_matrix();
    for a in 0..n {
        let gv = &metric * &jet.d1[a];
        for i in 0..dim {
            constraints[(a, i)] = gv[i];
        }
    }
    if sphere_mode {
        let gv = &metric * &jet.point;
        for i in 0..dim {
            constraints[(n, i)] = gv[i];
        }
    }
    // kernel via the Euclidean Gram of the constraints
    let gram = constraints.transpose() * &constraints;
    let eig = nalgebra::SymmetricEigen::new(gram);
    let mut idx: Vec<usize> = (0..dim).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let lam_max = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let kernel_dim = idx
        .iter()
        .filter(|&&i| eig.eigenvalues[i] <= tol * lam_max)
        .count();
    if kernel_dim != dim - rows {
        return Err(Error::DegenerateSample { at: jet.x.clone() });
    }
    if kernel_dim != 2 {
        return Err(Error::DegenerateSample { at: jet.x.clone() });
    }
    let k1: SignedVector = eig.eigenvectors.column(idx[0]).into();
    let k2: SignedVector = eig.eigenvectors.column(idx[1]).into();
    let frame = null_frame_from_plane(&k1, &k2, amb, tol)?;
    let Some(w) = provenance else {
        return Ok(frame);
    };

    // null vectors in a Lorentzian plane pair to zero iff proportional
    let with_nu = amb.inner(w, &frame.nu).abs();
    let with_xi = amb.inner(w, &frame.xi).abs();
    let other = if with_nu <= with_xi {
        frame.xi
    } else {
        frame.nu
    };
    let pairing = amb.inner(w, &other);
    if pairing.abs() <= tol {
        return Err(Error::DegenerateSample { at: jet.x.clone() });
    }
    Ok(NullNormalFrame {
        nu: w.clone(),
        xi: other * (2.0 / pairing),
    })
}

/// Second fundamental form data and the marginally-trapped residual.
#[derive(Debug, Clone)]
pub struct ShapeData {
    /// Induced metric in chart coordinates.
    pub metric: DMatrix<f64>,
    /// g-orthonormal tangent frame (ambient vectors) and its signs.
    pub frame: Vec<SignedVector>,
    pub frame_signs: Vec<f64>,
    pub normal: NullNormalFrame,
    /// <h(e_a, e_b), nu> and <h(e_a, e_b), xi> in the tangent frame.
    pub h_nu: DMatrix<f64>,
    pub h_xi: DMatrix<f64>,
    pub mean_curvature: SignedVector,
    /// |<H,H>| / (|h|^2 + eps).
    pub residual_mt: f64,
    pub h_norm_sq: f64,
    /// Direct trace of h versus the null-frame reconstruction of H,
    /// scaled by 1 + |H| (H grows without bound near null points).
    pub reconstruction_residual: f64,
    pub degenerate: bool,
}

const MT_NORMALIZER_EPS: f64 = 1e-30;

pub fn shape_data(
    jet: &ImmersionJet,
    normal: &NullNormalFrame,
    metric: &DMatrix<f64>,
    amb: &AmbientSpace,
    sphere_mode: bool,
    tol: f64,
) -> Result<ShapeData> {
    let n = jet.d1.len();
    let (frame, signs, coeffs) = signed_gram_schmidt(&jet.d1, amb, tol)
        .map_err(|_| Error::DegenerateSample { at: jet.x.clone() })?;

    // normal parts of the second derivatives, chart basis
    let mut t_nu = DMatrix::zeros(n, n);
    let mut t_xi = DMatrix::zeros(n, n);
    let mut normal_parts = vec![vec![DVector::zeros(amb.dim()); n]; n];
    for r in 0..n {
        for s in 0..n {
            let mut w = jet.d2[r][s].clone();
            if sphere_mode {
                let along = amb.inner(&w, &jet.point);
                w -= &jet.point * along;
            }
            let wn = amb.inner(&w, &normal.nu);
            let wx = amb.inner(&w, &normal.xi);
            t_nu[(r, s)] = wn;
            t_xi[(r, s)] = wx;
            normal_parts[r][s] = (&normal.nu * wx + &normal.xi * wn) * 0.5;
        }
    }
    let h_nu = &coeffs * &t_nu * coeffs.transpose();
    let h_xi = &coeffs * &t_xi * coeffs.transpose();

    // direct trace against the chart metric
    let ginv = metric
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateSample { at: jet.x.clone() })?;
    let mut mean = DVector::zeros(amb.dim());
    for r in 0..n {
        for s in 0..n {
            mean += &normal_parts[r][s] * (ginv[(r, s)] / n as f64);
        }
    }
    // reconstruction through the frame traces, relative to |H|
    let tr_nu: f64 = (0..n).map(|a| signs[a] * h_nu[(a, a)]).sum();
    let tr_xi: f64 = (0..n).map(|a| signs[a] * h_xi[(a, a)]).sum();
    let mean_rec = (&normal.nu * tr_xi + &normal.xi * tr_nu) / (2.0 * n as f64);
    let reconstruction_residual = (&mean - &mean_rec).amax() / (1.0 + mean.amax());

    let mut h_norm_sq = 0.0;
    for a in 0..n {
        for b in 0..n {
            let hv = (&normal.nu * h_xi[(a, b)] + &normal.xi * h_nu[(a, b)]) * 0.5;
            h_norm_sq += hv.norm_squared();
        }
    }
    let residual_mt = amb.sq_norm(&mean).abs() / (h_norm_sq + MT_NORMALIZER_EPS);

    Ok(ShapeData {
        metric: metric.clone(),
        frame,
        frame_signs: signs,
        normal: normal.clone(),
        h_nu,
        h_xi,
        mean_curvature: mean,
        residual_mt,
        h_norm_sq,
        reconstruction_residual,
        degenerate: false,
    })
}

/// Null second-fundamental-form report.
#[derive(Debug, Clone, Copy)]
pub struct NullSffReport {
    /// max |<h(e_a,e_b), h(e_c,e_d)>|.
    pub max_pairing: f64,
    /// max |<h(e_a,e_b), nu>|; zero iff h is collinear to nu.
    pub h_nu_max: f64,
}

pub fn null_sff_check(shape: &ShapeData) -> NullSffReport {
    let n = shape.frame_signs.len();
    // <h_ab, h_cd> = (h_xi[ab] h_nu[cd] + h_nu[ab] h_xi[cd]) / 2
    let mut max_pairing: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let p = 0.5
                        * (shape.h_xi[(a, b)] * shape.h_nu[(c, d)]
                            + shape.h_nu[(a, b)] * shape.h_xi[(c, d)]);
                    max_pairing = max_pairing.max(p.abs());
                }
            }
        }
    }
    NullSffReport {
        max_pairing,
        h_nu_max: shape.h_nu.amax(),
    }
}

/// Max-norm of the commutator [A_nu, A_xi]; zero iff the normal bundle
/// is flat for this codimension-two frame.
pub fn ricci_flat_normal_check(shape: &ShapeData) -> f64 {
    let n = shape.frame_signs.len();
    let eps = DMatrix::from_fn(n, n, |i, j| if i == j { shape.frame_signs[i] } else { 0.0 });
    let a_nu = &eps * &shape.h_nu;
    let a_xi = &eps * &shape.h_xi;
    (&a_nu * &a_xi - &a_xi * &a_nu).amax()
}

/// Residuals of the closed-form first/second fundamental forms of the
/// hypersurface constructions against the numerically computed ones.
#[derive(Debug, Clone, Copy)]
pub struct SeedOracleResiduals {
    pub metric: f64,
    pub sff: f64,
}

/// Flat case: g~ = g - 2 tau g(A.,.) + tau^2 g(A., A.) and
/// h~ = g(., A.) - tau g(A., A.), both against the candidate jet.
pub fn lemma_geozero_oracle(
    seed: &SeedHypersurface,
    tau: f64,
    jet: &ImmersionJet,
    target: &AmbientSpace,
) -> Result<SeedOracleResiduals> {
    let x = &jet.x;
    let n = seed.n();
    let g = seed.metric(x)?;
    let a = seed.shape_operator(x)?;
    let ga = &g * &a;
    let ga_sym = (&ga + ga.transpose()) * 0.5;
    let atga = a.transpose() * &g * &a;
    let m = DMatrix::identity(n, n) - &a * tau;
    let g_cf = m.transpose() * &g * &m;
    let h_cf = &ga_sym - &atga * tau;

    let g_num = DMatrix::from_fn(n, n, |r, s| target.inner(&jet.d1[r], &jet.d1[s]));
    // null normal (nu, 1)
    let nu = seed.nu_at(x)?;
    let mut nu_tilde = DVector::zeros(target.dim());
    for i in 0..seed.dim() {
        nu_tilde[i] = nu[i];
    }
    nu_tilde[seed.dim()] = 1.0;
    let h_num = DMatrix::from_fn(n, n, |r, s| target.inner(&jet.d2[r][s], &nu_tilde));
    Ok(SeedOracleResiduals {
        metric: (&g_cf - &g_num).amax(),
        sff: (&h_cf - &h_num).amax(),
    })
}

/// Sphere case: g~ = tau^2 g - 2 tau g(A.,.) + g(A., A.) and
/// h_sigma = g(A.,.) - tau g(.,.).
pub fn lemma_geo_oracle(
    seed: &SeedHypersurface,
    tau: f64,
    jet: &ImmersionJet,
    target: &AmbientSpace,
) -> Result<SeedOracleResiduals> {
    let x = &jet.x;
    let n = seed.n();
    let g = seed.metric(x)?;
    let a = seed.shape_operator(x)?;
    let ga = &g * &a;
    let ga_sym = (&ga + ga.transpose()) * 0.5;
    let atga = a.transpose() * &g * &a;
    let g_cf = &g * (tau * tau) - &ga_sym * (2.0 * tau) + &atga;
    let h_cf = &ga_sym - &g * tau;

    let g_num = DMatrix::from_fn(n, n, |r, s| target.inner(&jet.d1[r], &jet.d1[s]));
    let sigma = seed.sigma_at(x)?;
    let h_num = DMatrix::from_fn(n, n, |r, s| target.inner(&jet.d2[r][s], &sigma));
    Ok(SeedOracleResiduals {
        metric: (&g_cf - &g_num).amax(),
        sff: (&h_cf - &h_num).amax(),
    })
}

/// Second singular value of d(nu) over max(1, first): at most `tol` when
/// the aligned null normal has rank <= 1.
pub fn null_normal_rank_residual(c: &CandidateImmersion, x: &[f64], step: f64) -> Result<f64> {
    let n = c.sig.n();
    let dim = c.target.dim();
    let mut cols = DMatrix::zeros(dim, n);
    for a in 0..n {
        for i in 0..dim {
            let f = |t: &[f64]| -> Result<f64> {
                let nu = c
                    .null_normal_at(t)?
                    .ok_or_else(|| Error::InvalidInput("no provenance normal".into()))?;
                Ok(nu[i])
            };
            cols[(i, a)] = fd::partial(f, x, &[a], step)?;
        }
    }
    let svd = cols.svd(false, false);
    let mut vals: Vec<f64> = svd.singular_values.iter().copied().collect();
    vals.sort_by(|p, q| q.partial_cmp(p).unwrap());
    let first = vals.first().copied().unwrap_or(0.0);
    let second = vals.get(1).copied().unwrap_or(0.0);
    Ok(second / first.max(1.0))
}
