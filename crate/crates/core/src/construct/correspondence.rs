//! The Lorentzian (q = 0) correspondence between the two representation
//! formulas: the support-function data sigma3 on S^n turns into the
//! hypersurface seed sigma2 = 2 sigma3 nu2 + 2 grad sigma3 with Gauss map
//! nu2 and tau offset tau2 = tau3 - sigma3, and 2 sigma3 is the support
//! function of sigma2.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::jets::{make_chart, ProductSphereChart};
use crate::pseudolin::{AmbientSpace, Signature, SignedVector};
use crate::scalarlang::{add, jet, lit, mul, FieldExpr};
use crate::tausolve::TauRoots;

use super::seeds::{probe_points, SeedHypersurface};
use super::{support_phi, support_tau_roots_unfiltered};

#[derive(Debug, Clone)]
pub struct LorentzCorrespondence {
    pub chart: ProductSphereChart,
    pub sigma3: FieldExpr,
    /// The induced flat seed sigma2 with Gauss map nu2.
    pub seed: SeedHypersurface,
}

/// Build the correspondence data for signature (n, 0).
pub fn lorentzian_correspondence(
    sigma3: FieldExpr,
    sig: Signature,
) -> Result<LorentzCorrespondence> {
    if sig.q != 0 {
        return Err(Error::InvalidInput(
            "the correspondence requires the Lorentzian case q = 0".into(),
        ));
    }
    let chart = make_chart(sig);
    let n = sig.n();
    // sigma2 components: 2 sigma3 nu2 + 2 grad sigma3, first n+1 coordinates
    let grad = chart.gradient_exprs(&sigma3);
    let nu_comps = chart.components();
    let mut sigma2 = Vec::with_capacity(n + 1);
    for i in 0..n + 1 {
        sigma2.push(add(
            mul(mul(lit(2.0), sigma3.clone()), nu_comps[i].clone()),
            mul(lit(2.0), grad[i].clone()),
        ));
    }
    let nu2: Vec<FieldExpr> = nu_comps[..n + 1].to_vec();
    let seed = SeedHypersurface {
        name: "correspondence seed".into(),
        vars: chart.vars().to_vec(),
        domain: chart.domain().to_vec(),
        hard_bounds: chart.hard_bounds().to_vec(),
        ambient: AmbientSpace::flat(n + 1, 0),
        sigma: sigma2,
        nu: nu2,
        product_split: None,
        vertical_shift: 0.0,
    };
    Ok(LorentzCorrespondence {
        chart,
        sigma3,
        seed,
    })
}

impl LorentzCorrespondence {
    /// |<sigma2, nu2> - 2 sigma3| at x (Euclidean seed ambient).
    pub fn support_identity_residual(&self, x: &[f64]) -> Result<f64> {
        let s2 = self.seed.sigma_at(x)?;
        let n2 = self.seed.nu_at(x)?;
        let s3 = self.sigma3.eval(x)?;
        Ok((self.seed.ambient.inner(&s2, &n2) - 2.0 * s3).abs())
    }

    /// Samples of a k^n probe grid where sigma2 drops rank (is not an
    /// immersion), with the smallest singular value of d(sigma2).
    pub fn immersion_rank_flags(&self, k: usize) -> Result<Vec<(Vec<f64>, f64)>> {
        let probes = probe_points(&self.seed.domain, &self.seed.hard_bounds, k);
        let mut flagged = Vec::new();
        for x in probes {
            let ds = self.seed.d_sigma(&x)?;
            let svd = ds.svd(false, false);
            let smax = svd.singular_values.max();
            let smin = svd.singular_values.min();
            if smin <= 1e-9 * (1.0 + smax) {
                flagged.push((x, smin));
            }
        }
        Ok(flagged)
    }

    /// Raw tau3 roots of the support polynomial at x (degeneracy filter
    /// off: the constant and eigenfunction examples are degenerate).
    pub fn tau3_roots(&self, x: &[f64]) -> Result<TauRoots> {
        support_tau_roots_unfiltered(&self.chart, &self.sigma3, x, 1e-9)
    }

    /// Support-function side: phi3 = tau3 nu + sigma3 conj(nu) + 2 grad.
    pub fn support_side_phi(&self, x: &[f64], tau3: f64) -> Result<SignedVector> {
        let sj = jet(&self.sigma3, x, 2)?;
        support_phi(&self.chart, &sj, x, tau3)
    }

    /// Hypersurface side: phi2 = (sigma2 + tau2 nu2, tau2), tau2 = tau3 - sigma3.
    pub fn hypersurface_side_phi(&self, x: &[f64], tau3: f64) -> Result<SignedVector> {
        let tau2 = tau3 - self.sigma3.eval(x)?;
        let s2 = self.seed.sigma_at(x)?;
        let n2 = self.seed.nu_at(x)?;
        let dim = self.seed.dim();
        let mut out = DVector::zeros(dim + 1);
        for i in 0..dim {
            out[i] = s2[i] + tau2 * n2[i];
        }
        out[dim] = tau2;
        Ok(out)
    }

    /// Pointwise difference between the two constructions at the first
    /// raw tau3 root.
    pub fn agreement_residual(&self, x: &[f64]) -> Result<f64> {
        let roots = self.tau3_roots(x)?;
        let tau3 = roots
            .roots
            .first()
            .copied()
            .or_else(|| roots.rejected.first().map(|(t, _)| *t))
            .ok_or(Error::NoAdmissibleTau)?;
        let phi3 = self.support_side_phi(x, tau3)?;
        let phi2 = self.hypersurface_side_phi(x, tau3)?;
        Ok((phi3 - phi2).amax())
    }
}
