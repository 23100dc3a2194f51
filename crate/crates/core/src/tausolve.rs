//! The admissible-tau polynomials and their real roots.
//!
//! Each representation formula selects tau as a root of a rational trace:
//! `tr((M0 + tau M1)^{-1})` cleared of its denominator gives the
//! polynomial `t(tau) = tr(adj(M0 + tau M1))` of degree at most n-1.
//! Roots where the determinant also vanishes are metric degeneracies
//! (tau hitting an inverse principal curvature) and are rejected rather
//! than returned.
//!
//! The flat hypersurface formula needs the companion quantity
//! `d/dtau det(M0 + tau M1)`, which by Jacobi's formula clears
//! `tr((M0 + tau M1)^{-1} M1)`; see [`tau_poly_det_derivative`].

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Which representation formula produced a polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TauForm {
    /// Flat hypersurface seeds, `Id - tau A`.
    FlatHypersurface,
    /// Product-sphere hypersurface seeds, `tau Id - A`.
    SphereHypersurface,
    /// Support-function data, `tau Id + B`.
    SupportFunction,
    Generic,
}

#[derive(Debug, Clone, Serialize)]
pub struct TauPolynomial {
    /// Coefficients, ascending order.
    pub coeffs: Vec<f64>,
    pub form: TauForm,
}

impl TauPolynomial {
    pub fn eval(&self, tau: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * tau + c;
        }
        acc
    }

    pub fn scale(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Degree after trimming leading coefficients below `tol * scale`.
    pub fn trimmed_degree(&self, tol: f64) -> usize {
        let scale = self.scale().max(f64::MIN_POSITIVE);
        let mut deg = 0;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c.abs() > tol * scale {
                deg = k;
            }
        }
        deg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RejectReason {
    Complex,
    MetricDegenerate,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct TauRoots {
    /// Accepted real roots, sorted ascending.
    pub roots: Vec<f64>,
    /// Discarded roots (real part for complex pairs) with reasons.
    pub rejected: Vec<(f64, RejectReason)>,
}

/// Adjugate by cofactor minors for n <= 4, Faddeev-LeVerrier above.
pub fn adjugate(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    if n == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    if n <= 4 {
        let minor = |r: usize, c: usize| -> f64 {
            let sub = m.clone().remove_row(r).remove_column(c);
            sub.determinant()
        };
        return DMatrix::from_fn(n, n, |i, j| {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            sign * minor(j, i)
        });
    }
    // Faddeev-LeVerrier: B_k = M B_{k-1} + c_k I, adj = (-1)^{n-1} B_{n-1}
    let mut b = DMatrix::identity(n, n);
    for k in 1..n {
        let mb = m * &b;
        let c = -mb.trace() / k as f64;
        b = mb + DMatrix::identity(n, n) * c;
    }
    if n.is_multiple_of(2) {
        -b
    } else {
        b
    }
}

fn interpolate(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    let k = nodes.len();
    let vand = DMatrix::from_fn(k, k, |i, j| nodes[i].powi(j as i32));
    let rhs = nalgebra::DVector::from_column_slice(values);
    let sol = vand.lu().solve(&rhs).expect("interpolation nodes distinct");
    sol.iter().copied().collect()
}

fn interp_nodes(k: usize) -> Vec<f64> {
    // small integers centered at zero: perfectly conditioned at these sizes
    (0..k).map(|i| i as f64 - (k as f64 - 1.0) / 2.0).collect()
}

/// `t(tau) = tr(adj(M0 + tau M1))`, the cleared numerator of
/// `tr((M0 + tau M1)^{-1})`. Degree at most n-1.
///
/// For n = 1 the trace of a 1x1 inverse never vanishes, so there is no
/// admissible tau.
pub fn tau_poly_from_matrix(m0: &DMatrix<f64>, m1: &DMatrix<f64>) -> Result<TauPolynomial> {
    let n = m0.nrows();
    assert_eq!(m0.ncols(), n);
    assert_eq!(m1.nrows(), n);
    assert_eq!(m1.ncols(), n);
    if n == 1 {
        return Err(Error::NoAdmissibleTau);
    }
    let nodes = interp_nodes(n);
    let values: Vec<f64> = nodes
        .iter()
        .map(|&t| adjugate(&(m0 + m1 * t)).trace())
        .collect();
    Ok(TauPolynomial {
        coeffs: interpolate(&nodes, &values),
        form: TauForm::Generic,
    })
}

/// `d/dtau det(M0 + tau M1)`; by Jacobi's formula this equals
/// `tr(adj(M0 + tau M1) M1)`, the cleared numerator of
/// `tr((M0 + tau M1)^{-1} M1)`. Degree at most n-1.
pub fn tau_poly_det_derivative(m0: &DMatrix<f64>, m1: &DMatrix<f64>) -> Result<TauPolynomial> {
    let n = m0.nrows();
    assert_eq!(m0.ncols(), n);
    assert_eq!(m1.nrows(), n);
    assert_eq!(m1.ncols(), n);
    let nodes = interp_nodes(n + 1);
    let values: Vec<f64> = nodes.iter().map(|&t| (m0 + m1 * t).determinant()).collect();
    let det_coeffs = interpolate(&nodes, &values);
    let deriv: Vec<f64> = det_coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect();
    Ok(TauPolynomial {
        coeffs: deriv,
        form: TauForm::Generic,
    })
}

fn companion_real_roots(coeffs: &[f64], tol: f64) -> (Vec<f64>, Vec<f64>) {
    // coeffs ascending, leading coefficient nonzero, degree >= 1
    let deg = coeffs.len() - 1;
    if deg == 1 {
        return (vec![-coeffs[0] / coeffs[1]], Vec::new());
    }
    let lead = coeffs[deg];
    let mut comp = DMatrix::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    let eig = comp.complex_eigenvalues();
    let mut real = Vec::new();
    let mut complex = Vec::new();
    for z in eig.iter() {
        if z.im.abs() <= tol * (1.0 + z.re.abs()) {
            real.push(z.re);
        } else {
            complex.push(z.re);
        }
    }
    (real, complex)
}

/// Isolate and filter the real roots of `tp`.
///
/// A root is accepted when it is numerically real and `|det_check(tau)|`
/// stays at or above `tol` (degenerate-metric exclusion); rejected roots
/// are reported with their reason. Multiple roots within the merge
/// tolerance collapse to one.
pub fn real_roots<F>(tp: &TauPolynomial, det_check: F, tol: f64) -> Result<TauRoots>
where
    F: Fn(f64) -> f64,
{
    let scale = tp.scale();
    if scale <= tol {
        return Err(Error::IdenticallyZero);
    }
    let deg = tp.trimmed_degree(tol);
    if deg == 0 {
        return Ok(TauRoots::default());
    }
    let coeffs: Vec<f64> = tp.coeffs[..=deg].to_vec();
    let (mut real, complex) = companion_real_roots(&coeffs, tol);
    real.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut merged: Vec<f64> = Vec::new();
    for r in real {
        match merged.last() {
            Some(&last) if (r - last).abs() <= 1e-8 * (1.0 + r.abs()) => {}
            _ => merged.push(r),
        }
    }
    let mut out = TauRoots::default();
    for z in complex {
        out.rejected.push((z, RejectReason::Complex));
    }
    for r in merged {
        if det_check(r).abs() >= tol {
            out.roots.push(r);
        } else {
            out.rejected.push((r, RejectReason::MetricDegenerate));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};

    fn diag(entries: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(entries))
    }

    const TOL: f64 = 1e-9;

    #[test]
    fn flat_form_two_curvatures() {
        // t(tau) = (1 - tau k1) + (1 - tau k2), root 2/(k1 + k2)
        let (k1, k2) = (1.0, 2.0);
        let a = diag(&[k1, k2]);
        let id = DMatrix::identity(2, 2);
        let tp = tau_poly_from_matrix(&id, &(-&a)).unwrap();
        assert!((tp.eval(0.0) - 2.0).abs() < 1e-12);
        let roots = real_roots(&tp, |t| (&id - &a * t).determinant(), TOL).unwrap();
        assert_eq!(roots.roots.len(), 1);
        assert!((roots.roots[0] - 2.0 / (k1 + k2)).abs() < 1e-12);
    }

    #[test]
    fn sphere_form_umbilic_rejection() {
        let a = 0.7;
        let am = diag(&[a, a]);
        let id = DMatrix::identity(2, 2);
        // t(tau) = tr adj(tau Id - A) = 2(tau - a)
        let tp = tau_poly_from_matrix(&(-&am), &id).unwrap();
        assert!((tp.eval(1.0) - 2.0 * (1.0 - a)).abs() < 1e-12);
        let roots = real_roots(&tp, |t| (&id * t - &am).determinant(), TOL).unwrap();
        assert!(roots.roots.is_empty());
        assert_eq!(roots.rejected.len(), 1);
        assert!((roots.rejected[0].0 - a).abs() < 1e-10);
        assert_eq!(roots.rejected[0].1, RejectReason::MetricDegenerate);
    }

    #[test]
    fn support_form_constant_sigma() {
        // B = diag(c, -c), t(tau) = 2 tau, root 0
        let c = 0.5;
        let b = diag(&[c, -c]);
        let id = DMatrix::identity(2, 2);
        let tp = tau_poly_from_matrix(&b, &id).unwrap();
        let roots = real_roots(&tp, |t| (&b + &id * t).determinant(), TOL).unwrap();
        assert_eq!(roots.roots, vec![0.0]);
    }

    #[test]
    fn n1_has_no_admissible_tau() {
        let one = DMatrix::from_element(1, 1, 2.0);
        assert!(matches!(
            tau_poly_from_matrix(&one, &one),
            Err(Error::NoAdmissibleTau)
        ));
    }

    #[test]
    fn real_roots_examples() {
        let tp = TauPolynomial {
            coeffs: vec![0.0, 2.0],
            form: TauForm::Generic,
        };
        assert_eq!(real_roots(&tp, |_| 1.0, TOL).unwrap().roots, vec![0.0]);
        let tp = TauPolynomial {
            coeffs: vec![2.0, -3.0],
            form: TauForm::Generic,
        };
        let r = real_roots(&tp, |_| 1.0, TOL).unwrap().roots;
        assert_eq!(r.len(), 1);
        assert!((r[0] - 2.0 / 3.0).abs() < 1e-14);
        let tp = TauPolynomial {
            coeffs: vec![0.0, 0.0],
            form: TauForm::Generic,
        };
        assert!(matches!(
            real_roots(&tp, |_| 1.0, TOL),
            Err(Error::IdenticallyZero)
        ));
    }

    #[test]
    fn multiple_roots_collapse() {
        // (tau - 1)^2
        let tp = TauPolynomial {
            coeffs: vec![1.0, -2.0, 1.0],
            form: TauForm::Generic,
        };
        let r = real_roots(&tp, |_| 1.0, TOL).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn det_derivative_matches_adjugate_weighted_trace() {
        // Jacobi: d/dtau det(M0 + tau M1) = tr(adj(M0 + tau M1) M1)
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for n in 2..=4 {
            for _ in 0..40 {
                let m0 = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
                let m1 = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
                let tp = tau_poly_det_derivative(&m0, &m1).unwrap();
                for &t in &[-0.8, 0.13, 0.9] {
                    let direct = (adjugate(&(&m0 + &m1 * t)) * &m1).trace();
                    assert!((tp.eval(t) - direct).abs() < 1e-8 * (1.0 + direct.abs()));
                }
            }
        }
    }

    #[test]
    fn focal_midpoint_root_of_det_derivative() {
        // d/dtau det(I - tau A) for A = diag(k1, k2): root at (1/k1 + 1/k2)/2
        let (k1, k2) = (0.8, 2.5);
        let a = diag(&[k1, k2]);
        let id = DMatrix::identity(2, 2);
        let tp = tau_poly_det_derivative(&id, &(-&a)).unwrap();
        let roots = real_roots(&tp, |t| (&id - &a * t).determinant(), TOL).unwrap();
        assert_eq!(roots.roots.len(), 1);
        assert!((roots.roots[0] - 0.5 * (1.0 / k1 + 1.0 / k2)).abs() < 1e-12);
        // a flat direction (k2 = 0) sends the midpoint to infinity: no roots
        let a = diag(&[1.0, 0.0]);
        let tp = tau_poly_det_derivative(&id, &(-&a)).unwrap();
        let roots = real_roots(&tp, |t| (&id - &a * t).determinant(), TOL).unwrap();
        assert!(roots.roots.is_empty());
    }

    #[test]
    fn inverse_trace_oracle_on_random_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut accepted_total = 0;
        for _ in 0..500 {
            let n = *[2usize, 3, 4].get(rng.gen_range(0..3)).unwrap();
            let m0 = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let m1 = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let tp = tau_poly_from_matrix(&m0, &m1).unwrap();
            let roots = match real_roots(&tp, |t| (&m0 + &m1 * t).determinant(), TOL) {
                Ok(r) => r,
                Err(Error::IdenticallyZero) => continue,
                Err(e) => panic!("{e}"),
            };
            for &tau in &roots.roots {
                let m = &m0 + &m1 * tau;
                let inv = m.try_inverse().expect("det filtered");
                let resid = inv.trace().abs();
                let norm = inv.norm();
                assert!(
                    resid <= 1e-7 * norm,
                    "resid {resid:.3e} vs {:.3e}",
                    1e-7 * norm
                );
                accepted_total += 1;
            }
        }
        assert!(
            accepted_total > 200,
            "oracle exercised {accepted_total} roots"
        );
    }

    #[test]
    fn cleared_polynomial_identity_at_random_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..60 {
            let n = *[2usize, 3, 4].get(rng.gen_range(0..3)).unwrap();
            let m0 = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let m1 = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let tp = tau_poly_from_matrix(&m0, &m1).unwrap();
            let t0 = rng.gen_range(-1.5..1.5);
            let m = &m0 + &m1 * t0;
            if m.determinant().abs() < 1e-3 {
                continue;
            }
            let inv = m.clone().try_inverse().unwrap();
            let expect = inv.trace() * m.determinant();
            let got = tp.eval(t0);
            assert!(
                (got - expect).abs() <= 1e-8 * (1.0 + expect.abs()),
                "{got} vs {expect}"
            );
        }
    }

    #[test]
    fn minimality_tr_adj_zero_implies_root_zero() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut count = 0;
        while count < 50 {
            let n = *[2usize, 3, 4].get(rng.gen_range(0..3)).unwrap();
            // diagonal with tr(adj) = 0 exactly, then a similarity transform
            let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..1.5)).collect();
            match n {
                2 => d[1] = -d[0],
                3 => {
                    let s = d[0] * d[1];
                    let den = d[0] + d[1];
                    d[2] = -s / den;
                }
                _ => {
                    let (a, b, c) = (d[0], d[1], d[2]);
                    let den = a * b + a * c + b * c;
                    d[3] = -a * b * c / den;
                }
            }
            let m0d = diag(&d);
            let p: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            if p.determinant().abs() < 0.1 {
                continue;
            }
            let m0 = &p * &m0d * p.try_inverse().unwrap();
            let m1 = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let tp = tau_poly_from_matrix(&m0, &m1).unwrap();
            assert!(tp.eval(0.0).abs() <= 1e-10 * (1.0 + tp.scale()));
            let roots = real_roots(&tp, |_| 1.0, TOL).unwrap();
            assert!(
                roots.roots.iter().any(|r| r.abs() <= 1e-6),
                "roots {:?} missing 0 (n={n})",
                roots.roots
            );
            count += 1;
        }
    }
}
