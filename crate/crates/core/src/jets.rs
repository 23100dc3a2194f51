//! Geometry of the parameter space S^p x S^q: charts on the universal
//! cover, orthonormal tangent frames, intrinsic gradients and covariant
//! Hessians of scalar fields.
//!
//! Charts are built from expression components, so every derivative used
//! downstream is exact. Circle factors use one unconstrained angle;
//! higher spheres use iterated spherical coordinates (orthogonal, with a
//! diagonal round metric), restricted away from the poles. An S^0 factor
//! is the fixed scalar +1, which lets the Lorentzian (q = 0) case run
//! through the same code path.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::pseudolin::{AmbientSpace, Signature, SignedVector};
use crate::scalarlang::{
    add, cos, differentiate, div, jet, lit, mul, powi, sin, var, FieldExpr, Jet4,
};

/// Frame pivots below this are chart degeneracies (pole proximity).
pub const FRAME_PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ProductSphereChart {
    sig: Signature,
    vars: Vec<String>,
    /// n+2 expression components of nu over the n chart variables.
    components: Vec<FieldExpr>,
    /// Default sampling box per variable.
    domain: Vec<(f64, f64)>,
    /// Hard bounds (pole exclusion); `None` for unconstrained angles.
    hard_bounds: Vec<Option<(f64, f64)>>,
    /// Diagonal of the positive round metric in chart coordinates.
    metric_diag: Vec<FieldExpr>,
    /// +1 for variables of the plus factor, -1 for the minus factor.
    var_signs: Vec<f64>,
}

/// Orthonormal tangent frame at a chart point.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    /// Ambient frame vectors e_1..e_n.
    pub vectors: Vec<SignedVector>,
    /// Chart coefficients: e_i = sum_a coeffs[(i,a)] d_a(nu).
    pub coeffs: DMatrix<f64>,
    /// eps_i = <e_i, e_i>, +1 for i <= p then -1.
    pub signs: Vec<f64>,
}

fn chart_var_names(n: usize) -> Vec<String> {
    match n {
        1 => vec!["u".into()],
        2 => vec!["u".into(), "v".into()],
        3 => vec!["u".into(), "v".into(), "w".into()],
        _ => (1..=n).map(|i| format!("u{i}")).collect(),
    }
}

/// Iterated spherical chart of S^m starting at variable `offset`.
/// Returns (components, metric diagonal, domains, hard bounds).
#[allow(clippy::type_complexity)]
fn sphere_factor(
    m: usize,
    offset: usize,
) -> (
    Vec<FieldExpr>,
    Vec<FieldExpr>,
    Vec<(f64, f64)>,
    Vec<Option<(f64, f64)>>,
) {
    use std::f64::consts::PI;
    if m == 0 {
        return (vec![lit(1.0)], Vec::new(), Vec::new(), Vec::new());
    }
    if m == 1 {
        return (
            vec![cos(var(offset)), sin(var(offset))],
            vec![lit(1.0)],
            vec![(0.0, 2.0 * PI)],
            vec![None],
        );
    }
    // x_1 = cos t_1, x_k = sin t_1 ... sin t_{k-1} cos t_k, x_{m+1} = sin t_1 ... sin t_m
    let mut comps = Vec::with_capacity(m + 1);
    let mut running = lit(1.0);
    for k in 0..m {
        comps.push(mul(running.clone(), cos(var(offset + k))));
        running = mul(running, sin(var(offset + k)));
    }
    comps.push(running);
    let mut diag = Vec::with_capacity(m);
    let mut acc = lit(1.0);
    for k in 0..m {
        diag.push(acc.clone());
        acc = mul(acc, powi(sin(var(offset + k)), 2));
    }
    let mut domains = Vec::with_capacity(m);
    let mut bounds = Vec::with_capacity(m);
    let margin = 0.4;
    for k in 0..m {
        if k + 1 == m {
            domains.push((0.0, 2.0 * PI));
            bounds.push(None);
        } else {
            domains.push((margin, PI - margin));
            bounds.push(Some((1e-6, PI - 1e-6)));
        }
    }
    (comps, diag, domains, bounds)
}

/// Chart of the universal cover of S^p x S^q, plus-factor variables first.
pub fn make_chart(sig: Signature) -> ProductSphereChart {
    let (mut comps, mut diag, mut domain, mut bounds) = sphere_factor(sig.p, 0);
    let (c2, d2, dom2, b2) = sphere_factor(sig.q, sig.p);
    comps.extend(c2);
    diag.extend(d2);
    domain.extend(dom2);
    bounds.extend(b2);
    let mut var_signs = vec![1.0; sig.p];
    var_signs.extend(vec![-1.0; sig.q]);
    ProductSphereChart {
        sig,
        vars: chart_var_names(sig.n()),
        components: comps,
        domain,
        hard_bounds: bounds,
        metric_diag: diag,
        var_signs,
    }
}

impl ProductSphereChart {
    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn n(&self) -> usize {
        self.sig.n()
    }

    /// Ambient space of nu: flat R^{n+2} with signature (p+1, q+1).
    pub fn ambient(&self) -> AmbientSpace {
        AmbientSpace::flat(self.sig.p + 1, self.sig.q + 1)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn components(&self) -> &[FieldExpr] {
        &self.components
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn hard_bounds(&self) -> &[Option<(f64, f64)>] {
        &self.hard_bounds
    }

    pub fn var_signs(&self) -> &[f64] {
        &self.var_signs
    }

    pub fn nu(&self, x: &[f64]) -> Result<SignedVector> {
        let mut out = DVector::zeros(self.components.len());
        for (i, c) in self.components.iter().enumerate() {
            out[i] = c.eval(x)?;
        }
        Ok(out)
    }

    pub fn nu_bar(&self, x: &[f64]) -> Result<SignedVector> {
        Ok(self.ambient().conjugate(&self.nu(x)?))
    }

    /// Chart derivative, column a = d_a(nu).
    pub fn d_nu(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let dim = self.components.len();
        let n = self.n();
        let mut out = DMatrix::zeros(dim, n);
        for (i, c) in self.components.iter().enumerate() {
            let j = jet(c, x, 1)?;
            for a in 0..n {
                out[(i, a)] = j.d1(a);
            }
        }
        Ok(out)
    }

    /// Second chart derivatives, `[a][b]` = d_a d_b (nu).
    pub fn d2_nu(&self, x: &[f64]) -> Result<Vec<Vec<SignedVector>>> {
        let dim = self.components.len();
        let n = self.n();
        let mut out = vec![vec![DVector::zeros(dim); n]; n];
        for (i, c) in self.components.iter().enumerate() {
            let j = jet(c, x, 2)?;
            for a in 0..n {
                for b in 0..n {
                    out[a][b][i] = j.d2(a, b);
                }
            }
        }
        Ok(out)
    }

    /// Values of the positive round-metric diagonal at x.
    pub fn metric_diag_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.metric_diag.iter().map(|e| e.eval(x)).collect()
    }

    /// Orthonormal tangent frame, plus-directions first. The iterated
    /// spherical coordinates are orthogonal, so this is a normalization
    /// of the coordinate basis; conditioning failures surface as
    /// [`Error::DegenerateChartPoint`].
    pub fn orthonormal_frame(&self, x: &[f64]) -> Result<TangentFrame> {
        let n = self.n();
        let dnu = self.d_nu(x)?;
        let diag = self.metric_diag_at(x)?;
        let mut vectors = Vec::with_capacity(n);
        let mut coeffs = DMatrix::zeros(n, n);
        for a in 0..n {
            let gaa = diag[a];
            if gaa.abs() <= FRAME_PIVOT_TOL {
                return Err(Error::DegenerateChartPoint { pivot: gaa });
            }
            let inv = 1.0 / gaa.sqrt();
            vectors.push(dnu.column(a) * inv);
            coeffs[(a, a)] = inv;
        }
        Ok(TangentFrame {
            vectors,
            coeffs,
            signs: self.var_signs.clone(),
        })
    }

    /// Intrinsic gradient of a field with jet `j` at x: the tangent vector
    /// V with `<V, W> = d(sigma)(W)` for all tangent W. In block terms this
    /// is (grad' sigma, -grad'' sigma).
    pub fn intrinsic_gradient(&self, j: &Jet4, x: &[f64]) -> Result<SignedVector> {
        let n = self.n();
        let dnu = self.d_nu(x)?;
        let diag = self.metric_diag_at(x)?;
        let mut v = DVector::zeros(self.components.len());
        for a in 0..n {
            let coeff = self.var_signs[a] * j.d1(a) / diag[a];
            v += dnu.column(a) * coeff;
        }
        Ok(v)
    }

    /// Symbolic components of the intrinsic gradient of `sigma`.
    pub fn gradient_exprs(&self, sigma: &FieldExpr) -> Vec<FieldExpr> {
        let n = self.n();
        let mut out = vec![lit(0.0); self.components.len()];
        for a in 0..n {
            let coeff = div(
                mul(lit(self.var_signs[a]), differentiate(sigma, a)),
                self.metric_diag[a].clone(),
            );
            for (c, slot) in self.components.iter().zip(out.iter_mut()) {
                let term = mul(coeff.clone(), differentiate(c, a));
                *slot = add(slot.clone(), term);
            }
        }
        out
    }

    /// Covariant Hessian H_ij = <D_{e_i} (grad sigma), e_j> in the given
    /// orthonormal frame; symmetrized. Requires a jet of order >= 2.
    pub fn covariant_hessian(
        &self,
        j: &Jet4,
        x: &[f64],
        frame: &TangentFrame,
    ) -> Result<DMatrix<f64>> {
        let n = self.n();
        let amb = self.ambient();
        let dnu = self.d_nu(x)?;
        let d2nu = self.d2_nu(x)?;
        let diag = self.metric_diag_at(x)?;
        let diag_jets: Vec<Jet4> = self
            .metric_diag
            .iter()
            .map(|e| jet(e, x, 1))
            .collect::<Result<_>>()?;

        // gradient chart components a_k and their chart derivatives
        let mut a_val = vec![0.0; n];
        for k in 0..n {
            a_val[k] = self.var_signs[k] * j.d1(k) / diag[k];
        }
        // d_b V as ambient vectors
        let mut dv = Vec::with_capacity(n);
        for b in 0..n {
            let mut col = DVector::zeros(self.components.len());
            for k in 0..n {
                let da_k = self.var_signs[k]
                    * (j.d2(k, b) / diag[k] - j.d1(k) * diag_jets[k].d1(b) / (diag[k] * diag[k]));
                col += dnu.column(k) * da_k;
                col += &d2nu[b][k] * a_val[k];
            }
            dv.push(col);
        }

        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            // D_{e_i} V = sum_b coeffs[(i,b)] d_b V
            let mut dei = DVector::zeros(self.components.len());
            for b in 0..n {
                dei += &dv[b] * frame.coeffs[(i, b)];
            }
            for jj in 0..n {
                h[(i, jj)] = amb.inner(&dei, &frame.vectors[jj]);
            }
        }
        // symmetric by construction up to rounding
        let sym = (&h + h.transpose()) * 0.5;
        Ok(sym)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd;
    use crate::scalarlang::{parse, random_trig_expr};

    fn sig11() -> Signature {
        Signature::new(1, 1)
    }

    #[test]
    fn chart_11_matches_angle_form() {
        let chart = make_chart(sig11());
        let x = [0.8, -0.3];
        let nu = chart.nu(&x).unwrap();
        let expect = DVector::from_vec(vec![
            0.8f64.cos(),
            0.8f64.sin(),
            (-0.3f64).cos(),
            (-0.3f64).sin(),
        ]);
        assert!((nu - expect).amax() < 1e-15);
    }

    #[test]
    fn chart_points_stay_on_both_unit_spheres() {
        for (p, q) in [(1, 1), (2, 0), (0, 2), (2, 1), (1, 2)] {
            let chart = make_chart(Signature::new(p, q));
            for t in 0..12 {
                let x: Vec<f64> = (0..chart.n())
                    .map(|a| 0.7 + 0.13 * (t as f64) + 0.21 * a as f64)
                    .collect();
                let nu = chart.nu(&x).unwrap();
                let plus: f64 = (0..p + 1).map(|i| nu[i] * nu[i]).sum();
                let minus: f64 = (p + 1..p + q + 2).map(|i| nu[i] * nu[i]).sum();
                assert!((plus - 1.0).abs() < 1e-12, "|nu'| at ({p},{q})");
                assert!((minus - 1.0).abs() < 1e-12, "|nu''| at ({p},{q})");
            }
        }
    }

    #[test]
    fn s0_factor_is_constant_plus_one() {
        let chart = make_chart(Signature::new(2, 0));
        let nu = chart.nu(&[0.9, 1.7]).unwrap();
        assert_eq!(nu.len(), 4);
        assert_eq!(nu[3], 1.0);
    }

    #[test]
    fn frame_11_is_coordinate_basis() {
        let chart = make_chart(sig11());
        let x = [1.1, 0.4];
        let f = chart.orthonormal_frame(&x).unwrap();
        let expect0 = DVector::from_vec(vec![-(1.1f64.sin()), 1.1f64.cos(), 0.0, 0.0]);
        assert!((f.vectors[0].clone() - expect0).amax() < 1e-15);
        assert_eq!(f.signs, vec![1.0, -1.0]);
        let amb = chart.ambient();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { f.signs[i] } else { 0.0 };
                assert!((amb.inner(&f.vectors[i], &f.vectors[j]) - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn frame_20_longitude_normalization_and_pole() {
        let chart = make_chart(Signature::new(2, 0));
        let colat = 1.0;
        let f = chart.orthonormal_frame(&[colat, 0.3]).unwrap();
        let amb = chart.ambient();
        assert!((amb.inner(&f.vectors[1], &f.vectors[1]) - 1.0).abs() < 1e-12);
        // near the pole the longitude pivot degenerates
        let err = chart.orthonormal_frame(&[1e-8, 0.3]);
        assert!(matches!(err, Err(Error::DegenerateChartPoint { .. })));
    }

    #[test]
    fn gradient_examples() {
        let chart = make_chart(sig11());
        // constant field
        let e = parse("0.7", chart.vars(), &[]).unwrap();
        let j = jet(&e, &[0.2, 0.9], 1).unwrap();
        assert!(chart.intrinsic_gradient(&j, &[0.2, 0.9]).unwrap().amax() < 1e-15);
        // sigma = u at (pi/2, 0): gradient is d_u = (-1, 0, 0, 0)
        let e = parse("u", chart.vars(), &[]).unwrap();
        let x = [std::f64::consts::FRAC_PI_2, 0.0];
        let j = jet(&e, &x, 1).unwrap();
        let g = chart.intrinsic_gradient(&j, &x).unwrap();
        let expect = DVector::from_vec(vec![-1.0, 0.0, 0.0, 0.0]);
        assert!((g - expect).amax() < 1e-12);
    }

    #[test]
    fn gradient_defining_property_and_legendrian_identities() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (p, q) in [(1, 1), (2, 0), (2, 1)] {
            let chart = make_chart(Signature::new(p, q));
            let amb = chart.ambient();
            let sigma = random_trig_expr(chart.n(), 40 + p as u64 * 3 + q as u64);
            for _ in 0..8 {
                let x: Vec<f64> = chart
                    .domain()
                    .iter()
                    .map(|(lo, hi)| rng.gen_range(*lo..*hi))
                    .collect();
                let x: Vec<f64> = x
                    .iter()
                    .zip(chart.hard_bounds())
                    .map(|(&v, b)| match b {
                        Some((lo, hi)) => v.clamp(lo + 0.3, hi - 0.3),
                        None => v,
                    })
                    .collect();
                let j = jet(&sigma, &x, 1).unwrap();
                let grad = chart.intrinsic_gradient(&j, &x).unwrap();
                let nu = chart.nu(&x).unwrap();
                let nu_bar = chart.nu_bar(&x).unwrap();
                assert!(amb.inner(&grad, &nu).abs() < 1e-10);
                assert!(amb.inner(&grad, &nu_bar).abs() < 1e-10);
                // <grad, W> = d sigma (W) for random tangent W
                let dnu = chart.d_nu(&x).unwrap();
                for _ in 0..100 {
                    let w: Vec<f64> = (0..chart.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let mut wamb = DVector::zeros(amb.dim());
                    let mut dsw = 0.0;
                    for a in 0..chart.n() {
                        wamb += dnu.column(a) * w[a];
                        dsw += j.d1(a) * w[a];
                    }
                    assert!((amb.inner(&grad, &wamb) - dsw).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn hessian_11_is_chart_partials() {
        let chart = make_chart(sig11());
        let sigma = parse("sin(u)*cos(v) + 0.3*u*v", chart.vars(), &[]).unwrap();
        let x = [0.6, -0.8];
        let j = jet(&sigma, &x, 2).unwrap();
        let frame = chart.orthonormal_frame(&x).unwrap();
        let h = chart.covariant_hessian(&j, &x, &frame).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert!((h[(a, b)] - j.d2(a, b)).abs() < 1e-12, "entry ({a},{b})");
            }
        }
    }

    #[test]
    fn hessian_of_height_on_s2_is_minus_z_metric() {
        let chart = make_chart(Signature::new(2, 0));
        // height along the chart axis: z = cos(u)
        let sigma = parse("cos(u)", chart.vars(), &[]).unwrap();
        for &u in &[0.7, 1.3, 2.2] {
            let x = [u, 1.1];
            let j = jet(&sigma, &x, 2).unwrap();
            let frame = chart.orthonormal_frame(&x).unwrap();
            let h = chart.covariant_hessian(&j, &x, &frame).unwrap();
            let z = u.cos();
            for a in 0..2 {
                for b in 0..2 {
                    let expect = if a == b { -z } else { 0.0 };
                    assert!((h[(a, b)] - expect).abs() < 1e-11, "u={u} ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn hessian_matches_finite_differences_of_gradient() {
        let chart = make_chart(Signature::new(2, 1));
        let amb = chart.ambient();
        let sigma = random_trig_expr(3, 99);
        let x = [1.2, 0.9, -0.5];
        let j = jet(&sigma, &x, 2).unwrap();
        let frame = chart.orthonormal_frame(&x).unwrap();
        let h = chart.covariant_hessian(&j, &x, &frame).unwrap();
        // directional fd of the ambient gradient field, paired with the
        // frame held fixed at x
        let n = chart.n();
        for i in 0..n {
            for jj in 0..n {
                let mut dv = DVector::zeros(amb.dim());
                for b in 0..n {
                    let c = frame.coeffs[(i, b)];
                    if c == 0.0 {
                        continue;
                    }
                    for comp in 0..amb.dim() {
                        let v_comp = |t: &[f64]| -> crate::error::Result<f64> {
                            let jt = jet(&sigma, t, 1)?;
                            let g = chart.intrinsic_gradient(&jt, t)?;
                            Ok(g[comp])
                        };
                        dv[comp] += c * fd::partial(v_comp, &x, &[b], 1e-4).unwrap();
                    }
                }
                let fd_val = amb.inner(&dv, &frame.vectors[jj]);
                assert!(
                    (h[(i, jj)] - fd_val).abs() < 1e-8,
                    "({i},{jj}): {} vs {fd_val}",
                    h[(i, jj)]
                );
            }
        }
    }
}
