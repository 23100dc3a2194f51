//! Seed hypersurfaces: analytic immersions with Gauss maps, shipped as
//! built-in presets plus expression-defined graphs.
//!
//! A seed carries expression components for both the immersion and its
//! unit normal, so first derivatives (hence induced metric and shape
//! operator) are exact. The optional vertical shift realizes the
//! translation freedom `sigma + t0 nu` of the flat construction.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::pseudolin::{AmbientSpace, SignedVector};
use crate::scalarlang::{
    add, cos, div, exp, jet, lit, mul, neg, powi, sin, sqrt, sub, var, FieldExpr,
};

#[derive(Debug, Clone)]
pub struct SeedHypersurface {
    pub name: String,
    pub vars: Vec<String>,
    pub domain: Vec<(f64, f64)>,
    pub hard_bounds: Vec<Option<(f64, f64)>>,
    /// Ambient of the seed itself (flat R^{n+1} or the product-sphere
    /// ambient R^{n+3}).
    pub ambient: AmbientSpace,
    pub sigma: Vec<FieldExpr>,
    pub nu: Vec<FieldExpr>,
    /// For product-sphere seeds, the size p+2 of the first block.
    pub product_split: Option<usize>,
    /// sigma_eff = sigma + vertical_shift * nu.
    pub vertical_shift: f64,
}

impl SeedHypersurface {
    pub fn n(&self) -> usize {
        self.vars.len()
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim()
    }

    pub fn with_vertical_shift(mut self, t0: f64) -> Self {
        self.vertical_shift = t0;
        self
    }

    pub fn sigma_at(&self, x: &[f64]) -> Result<SignedVector> {
        let mut out = DVector::zeros(self.dim());
        for (i, (s, nv)) in self.sigma.iter().zip(&self.nu).enumerate() {
            out[i] = s.eval(x)? + self.vertical_shift * nv.eval(x)?;
        }
        Ok(out)
    }

    pub fn nu_at(&self, x: &[f64]) -> Result<SignedVector> {
        let mut out = DVector::zeros(self.dim());
        for (i, nv) in self.nu.iter().enumerate() {
            out[i] = nv.eval(x)?;
        }
        Ok(out)
    }

    /// First derivatives of sigma_eff, column a.
    pub fn d_sigma(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.n();
        let mut out = DMatrix::zeros(self.dim(), n);
        for (i, (s, nv)) in self.sigma.iter().zip(&self.nu).enumerate() {
            let js = jet(s, x, 1)?;
            let jn = jet(nv, x, 1)?;
            for a in 0..n {
                out[(i, a)] = js.d1(a) + self.vertical_shift * jn.d1(a);
            }
        }
        Ok(out)
    }

    pub fn d_nu(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.n();
        let mut out = DMatrix::zeros(self.dim(), n);
        for (i, nv) in self.nu.iter().enumerate() {
            let jn = jet(nv, x, 1)?;
            for a in 0..n {
                out[(i, a)] = jn.d1(a);
            }
        }
        Ok(out)
    }

    /// Induced metric g_ab = <d_a sigma, d_b sigma>.
    pub fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let ds = self.d_sigma(x)?;
        let n = self.n();
        let mut g = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let ca: SignedVector = ds.column(a).into();
                let cb: SignedVector = ds.column(b).into();
                g[(a, b)] = self.ambient.inner(&ca, &cb);
            }
        }
        Ok(g)
    }

    /// Shape operator A with d(nu) = -d(sigma) A, as a matrix acting on
    /// chart components (column a = coefficients of A d_a).
    pub fn shape_operator(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.n();
        let ds = self.d_sigma(x)?;
        let dn = self.d_nu(x)?;
        let g = self.metric(x)?;
        let mut s = DMatrix::zeros(n, n);
        for c in 0..n {
            for a in 0..n {
                let dc: SignedVector = ds.column(c).into();
                let da: SignedVector = dn.column(a).into();
                s[(c, a)] = self.ambient.inner(&dc, &da);
            }
        }
        g.lu()
            .solve(&(-s))
            .ok_or_else(|| Error::DegenerateSample { at: x.to_vec() })
    }

    /// Check the seed invariants on a coarse probe grid.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let probes = probe_points(&self.domain, &self.hard_bounds, 4);
        for x in &probes {
            let nu = self.nu_at(x)?;
            let unit = (self.ambient.sq_norm(&nu) - 1.0).abs();
            if unit > tol {
                return Err(Error::InvalidInput(format!(
                    "seed `{}`: |<nu,nu>-1| = {unit:.3e} at {x:?}",
                    self.name
                )));
            }
            let ds = self.d_sigma(x)?;
            for a in 0..self.n() {
                let col: SignedVector = ds.column(a).into();
                let tangency = self.ambient.inner(&col, &nu).abs();
                if tangency > tol {
                    return Err(Error::InvalidInput(format!(
                        "seed `{}`: <d sigma, nu> = {tangency:.3e} at {x:?}",
                        self.name
                    )));
                }
            }
            if let Some(split) = self.product_split {
                let sig = self.sigma_at(x)?;
                let plus: f64 = (0..split).map(|i| sig[i] * sig[i]).sum();
                let minus: f64 = (split..self.dim()).map(|i| sig[i] * sig[i]).sum();
                if (plus - 1.0).abs() > tol || (minus - 1.0).abs() > tol {
                    return Err(Error::InvalidInput(format!(
                        "seed `{}`: point off the unit product at {x:?}",
                        self.name
                    )));
                }
                let tangent_plus: f64 = (0..split).map(|i| nu[i] * sig[i]).sum();
                let tangent_minus: f64 = (split..self.dim()).map(|i| nu[i] * sig[i]).sum();
                if tangent_plus.abs() > tol || tangent_minus.abs() > tol {
                    return Err(Error::InvalidInput(format!(
                        "seed `{}`: nu not tangent to the product at {x:?}",
                        self.name
                    )));
                }
            }
            // A must be g-self-adjoint: gA symmetric
            let g = self.metric(x)?;
            let a = self.shape_operator(x)?;
            let ga = &g * &a;
            let asym = (&ga - ga.transpose()).amax();
            if asym > 1e-8 * (1.0 + ga.amax()) {
                return Err(Error::InvalidInput(format!(
                    "seed `{}`: shape operator not g-self-adjoint ({asym:.3e}) at {x:?}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Probe grid: k points per axis, clamped inside hard bounds.
pub(crate) fn probe_points(
    domain: &[(f64, f64)],
    hard_bounds: &[Option<(f64, f64)>],
    k: usize,
) -> Vec<Vec<f64>> {
    let n = domain.len();
    let mut pts = vec![Vec::new()];
    for a in 0..n {
        let (lo, hi) = domain[a];
        let (lo, hi) = match hard_bounds.get(a).copied().flatten() {
            Some((blo, bhi)) => (lo.max(blo + 1e-3), hi.min(bhi - 1e-3)),
            None => (lo, hi),
        };
        let mut next = Vec::new();
        for base in &pts {
            for i in 0..k {
                let t = lo + (i as f64 + 0.5) * (hi - lo) / k as f64;
                let mut p = base.clone();
                p.push(t);
                next.push(p);
            }
        }
        pts = next;
    }
    pts
}

fn uv_vars() -> Vec<String> {
    vec!["u".into(), "v".into()]
}

fn cosh_expr(e: FieldExpr) -> FieldExpr {
    mul(lit(0.5), add(exp(e.clone()), exp(neg(e))))
}

fn sinh_expr(e: FieldExpr) -> FieldExpr {
    mul(lit(0.5), sub(exp(e.clone()), exp(neg(e))))
}

/// Round cylinder of the given radius in Euclidean R^3, inward normal
/// (principal curvatures 1/r and 0).
pub fn cylinder(radius: f64) -> SeedHypersurface {
    let (u, v) = (var(0), var(1));
    SeedHypersurface {
        name: format!("cylinder r={radius}"),
        vars: uv_vars(),
        domain: vec![(0.0, 2.0 * std::f64::consts::PI), (-1.0, 1.0)],
        hard_bounds: vec![None, None],
        ambient: AmbientSpace::flat(3, 0),
        sigma: vec![
            mul(lit(radius), cos(u.clone())),
            mul(lit(radius), sin(u.clone())),
            v,
        ],
        nu: vec![neg(cos(u.clone())), neg(sin(u)), lit(0.0)],
        product_split: None,
        vertical_shift: 0.0,
    }
}

/// Round sphere of the given radius in Euclidean R^3, inward normal
/// (umbilic, both curvatures 1/r).
pub fn sphere(radius: f64) -> SeedHypersurface {
    let (u, v) = (var(0), var(1));
    let sigma = vec![
        mul(lit(radius), mul(sin(u.clone()), cos(v.clone()))),
        mul(lit(radius), mul(sin(u.clone()), sin(v.clone()))),
        mul(lit(radius), cos(u.clone())),
    ];
    let nu = vec![
        neg(mul(sin(u.clone()), cos(v.clone()))),
        neg(mul(sin(u.clone()), sin(v.clone()))),
        neg(cos(u)),
    ];
    SeedHypersurface {
        name: format!("sphere r={radius}"),
        vars: uv_vars(),
        domain: vec![
            (0.5, std::f64::consts::PI - 0.5),
            (0.0, 2.0 * std::f64::consts::PI),
        ],
        hard_bounds: vec![Some((1e-6, std::f64::consts::PI - 1e-6)), None],
        ambient: AmbientSpace::flat(3, 0),
        sigma,
        nu,
        product_split: None,
        vertical_shift: 0.0,
    }
}

/// Torus of revolution (major radius R, tube radius r) in Euclidean R^3,
/// inward normal: curvatures 1/r and cos(u)/(R + r cos(u)), both positive
/// on the outer half |u| < pi/2.
pub fn torus(major: f64, minor: f64) -> SeedHypersurface {
    let (u, v) = (var(0), var(1));
    let ring = add(lit(major), mul(lit(minor), cos(u.clone())));
    let sigma = vec![
        mul(ring.clone(), cos(v.clone())),
        mul(ring, sin(v.clone())),
        mul(lit(minor), sin(u.clone())),
    ];
    let nu = vec![
        neg(mul(cos(u.clone()), cos(v.clone()))),
        neg(mul(cos(u.clone()), sin(v))),
        neg(sin(u)),
    ];
    SeedHypersurface {
        name: format!("torus R={major} r={minor}"),
        vars: uv_vars(),
        domain: vec![(-1.2, 1.2), (0.0, 2.0 * std::f64::consts::PI)],
        hard_bounds: vec![Some((-1.45, 1.45)), None],
        ambient: AmbientSpace::flat(3, 0),
        sigma,
        nu,
        product_split: None,
        vertical_shift: 0.0,
    }
}

/// Catenoid in Euclidean R^3: a minimal seed (curvatures +/- 1/cosh^2 u),
/// so tau = 0 is the admissible root.
pub fn catenoid() -> SeedHypersurface {
    let (u, v) = (var(0), var(1));
    let ch = cosh_expr(u.clone());
    let sh = sinh_expr(u.clone());
    let sigma = vec![
        mul(ch.clone(), cos(v.clone())),
        mul(ch.clone(), sin(v.clone())),
        u.clone(),
    ];
    let nu = vec![
        div(cos(v.clone()), ch.clone()),
        div(sin(v), ch.clone()),
        neg(div(sh, ch)),
    ];
    SeedHypersurface {
        name: "catenoid".into(),
        vars: uv_vars(),
        domain: vec![(-1.0, 1.0), (0.0, 2.0 * std::f64::consts::PI)],
        hard_bounds: vec![None, None],
        ambient: AmbientSpace::flat(3, 0),
        sigma,
        nu,
        product_split: None,
        vertical_shift: 0.0,
    }
}

/// Ellipsoid of revolution x^2/a^2 + y^2/a^2 + z^2/c^2 = 1, inward normal.
pub fn ellipsoid(a: f64, c: f64) -> SeedHypersurface {
    let (u, v) = (var(0), var(1));
    let sigma = vec![
        mul(lit(a), mul(sin(u.clone()), cos(v.clone()))),
        mul(lit(a), mul(sin(u.clone()), sin(v.clone()))),
        mul(lit(c), cos(u.clone())),
    ];
    let norm = sqrt(add(
        div(powi(sin(u.clone()), 2), lit(a * a)),
        div(powi(cos(u.clone()), 2), lit(c * c)),
    ));
    let nu = vec![
        neg(div(
            mul(sin(u.clone()), cos(v.clone())),
            mul(lit(a), norm.clone()),
        )),
        neg(div(mul(sin(u.clone()), sin(v)), mul(lit(a), norm.clone()))),
        neg(div(cos(u), mul(lit(c), norm))),
    ];
    SeedHypersurface {
        name: format!("ellipsoid a={a} c={c}"),
        vars: uv_vars(),
        domain: vec![
            (0.5, std::f64::consts::PI - 0.5),
            (0.0, 2.0 * std::f64::consts::PI),
        ],
        hard_bounds: vec![Some((1e-6, std::f64::consts::PI - 1e-6)), None],
        ambient: AmbientSpace::flat(3, 0),
        sigma,
        nu,
        product_split: None,
        vertical_shift: 0.0,
    }
}

/// Graph z = f(u,v) over the plane in Euclidean R^3.
pub fn graph_flat(name: &str, f: FieldExpr, box_half: f64) -> SeedHypersurface {
    let (u, v) = (var(0), var(1));
    let fu = crate::scalarlang::differentiate(&f, 0);
    let fv = crate::scalarlang::differentiate(&f, 1);
    let norm = sqrt(add(lit(1.0), add(powi(fu.clone(), 2), powi(fv.clone(), 2))));
    let nu = vec![
        neg(div(fu, norm.clone())),
        neg(div(fv, norm.clone())),
        div(lit(1.0), norm),
    ];
    SeedHypersurface {
        name: name.into(),
        vars: uv_vars(),
        domain: vec![(-box_half, box_half), (-box_half, box_half)],
        hard_bounds: vec![None, None],
        ambient: AmbientSpace::flat(3, 0),
        sigma: vec![u, v, f],
        nu,
        product_split: None,
        vertical_shift: 0.0,
    }
}

/// Latitude circle (angle `theta` above the equator) times S^1, a
/// Lorentzian hypersurface of S^2 x S^1; shape operator diag(tan theta, 0).
pub fn latitude_product(theta: f64) -> SeedHypersurface {
    let (u, v) = (var(0), var(1));
    let (st, ct) = (theta.sin(), theta.cos());
    let sigma = vec![
        mul(lit(ct), cos(u.clone())),
        mul(lit(ct), sin(u.clone())),
        lit(st),
        cos(v.clone()),
        sin(v),
    ];
    let nu = vec![
        neg(mul(lit(st), cos(u.clone()))),
        neg(mul(lit(st), sin(u))),
        lit(ct),
        lit(0.0),
        lit(0.0),
    ];
    SeedHypersurface {
        name: format!("latitude theta={theta} x S1"),
        vars: uv_vars(),
        domain: vec![
            (0.0, 2.0 * std::f64::consts::PI),
            (0.0, 2.0 * std::f64::consts::PI),
        ],
        hard_bounds: vec![None, None],
        ambient: AmbientSpace::flat(3, 2),
        sigma,
        nu,
        product_split: Some(3),
        vertical_shift: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for seed in [
            cylinder(1.0),
            sphere(1.0),
            torus(2.0, 0.5),
            catenoid(),
            ellipsoid(1.0, 1.7),
            graph_flat(
                "bump",
                crate::scalarlang::parse("0.2*sin(u)*cos(v)", &uv_vars(), &[]).unwrap(),
                1.0,
            ),
            latitude_product(0.5),
        ] {
            seed.validate(1e-9)
                .unwrap_or_else(|e| panic!("{}: {e}", seed.name));
        }
    }

    #[test]
    fn cylinder_shape_operator() {
        let seed = cylinder(2.0);
        let a = seed.shape_operator(&[0.7, 0.1]).unwrap();
        assert!((a[(0, 0)] - 0.5).abs() < 1e-12);
        assert!(a[(1, 1)].abs() < 1e-12);
        assert!(a[(0, 1)].abs() < 1e-12 && a[(1, 0)].abs() < 1e-12);
    }

    #[test]
    fn torus_shape_operator() {
        let (bigr, r) = (2.0, 0.5);
        let seed = torus(bigr, r);
        let u = 0.6;
        let a = seed.shape_operator(&[u, 1.9]).unwrap();
        assert!((a[(0, 0)] - 1.0 / r).abs() < 1e-10);
        let expect = u.cos() / (bigr + r * u.cos());
        assert!((a[(1, 1)] - expect).abs() < 1e-10);
    }

    #[test]
    fn catenoid_is_minimal() {
        let seed = catenoid();
        for x in [[0.3, 1.0], [-0.8, 4.0]] {
            let a = seed.shape_operator(&x).unwrap();
            assert!(a.trace().abs() < 1e-10, "trace {}", a.trace());
        }
    }

    #[test]
    fn latitude_shape_operator_and_metric() {
        let theta = 0.5f64;
        let seed = latitude_product(theta);
        let x = [1.3, 2.1];
        let a = seed.shape_operator(&x).unwrap();
        assert!((a[(0, 0)] - theta.tan()).abs() < 1e-12);
        assert!(a[(1, 1)].abs() < 1e-12);
        let g = seed.metric(&x).unwrap();
        assert!((g[(0, 0)] - theta.cos().powi(2)).abs() < 1e-12);
        assert!((g[(1, 1)] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn vertical_shift_translates_along_nu() {
        let seed = cylinder(1.0).with_vertical_shift(0.25);
        let x = [0.4, 0.2];
        let s = seed.sigma_at(&x).unwrap();
        // inward shift reduces the radius
        let radial = (s[0] * s[0] + s[1] * s[1]).sqrt();
        assert!((radial - 0.75).abs() < 1e-12);
        seed.validate(1e-9).unwrap();
    }
}
