//! Signed linear algebra for R^N with signature (r,s).
//!
//! Coordinates are stored dense; the first `r` directions carry `+`, the
//! last `s` carry `-`. All expected dimensions are small (N <= 16), so no
//! sparse or blocked paths exist.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Raw coordinate vector in a signed ambient space.
pub type SignedVector = DVector<f64>;

/// Default relative tolerance for degeneracy decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tangent signature (p,q) of the submanifolds under construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Self {
        let sig = Signature { p, q };
        assert!(sig.n() >= 1, "signature must have p+q >= 1");
        sig
    }

    /// Dimension n = p + q.
    pub fn n(&self) -> usize {
        self.p + self.q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Curvature {
    Flat,
    UnitSphere,
}

/// A signed inner-product space R^N, optionally restricted to the unit
/// quadric `<x,x> = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AmbientSpace {
    /// Number of `+` directions r.
    pub plus: usize,
    /// Number of `-` directions s.
    pub minus: usize,
    pub curvature: Curvature,
}

impl AmbientSpace {
    pub fn flat(plus: usize, minus: usize) -> Self {
        AmbientSpace {
            plus,
            minus,
            curvature: Curvature::Flat,
        }
    }

    pub fn unit_sphere(plus: usize, minus: usize) -> Self {
        AmbientSpace {
            plus,
            minus,
            curvature: Curvature::UnitSphere,
        }
    }

    pub fn dim(&self) -> usize {
        self.plus + self.minus
    }

    /// Sign of coordinate direction `i`.
    pub fn eps(&self, i: usize) -> f64 {
        if i < self.plus {
            1.0
        } else {
            -1.0
        }
    }

    /// Signed inner product `sum_{i<=r} x_i y_i - sum_{i>r} x_i y_i`.
    ///
    /// Dimension mismatches are usage errors and panic.
    pub fn inner(&self, x: &SignedVector, y: &SignedVector) -> f64 {
        assert_eq!(x.len(), self.dim(), "inner: x has wrong dimension");
        assert_eq!(y.len(), self.dim(), "inner: y has wrong dimension");
        let mut acc = 0.0;
        for i in 0..self.plus {
            acc += x[i] * y[i];
        }
        for i in self.plus..self.dim() {
            acc -= x[i] * y[i];
        }
        acc
    }

    /// `<x,x>`.
    pub fn sq_norm(&self, x: &SignedVector) -> f64 {
        self.inner(x, x)
    }

    /// Conjugation `(x', x'') -> (x', -x'')`: the second (minus) block is
    /// negated. Involutive; `<x, conj(x)>` is the Euclidean square norm.
    pub fn conjugate(&self, x: &SignedVector) -> SignedVector {
        assert_eq!(x.len(), self.dim(), "conjugate: wrong dimension");
        let mut out = x.clone();
        for i in self.plus..self.dim() {
            out[i] = -out[i];
        }
        out
    }

    /// Metric matrix diag(+1,...,-1,...) as a dense matrix.
    pub fn metric_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                self.eps(i)
            } else {
                0.0
            }
        })
    }
}

/// Pair (nu, xi) of null normals with `<nu,nu> = <xi,xi> = 0`, `<nu,xi> = 2`.
#[derive(Debug, Clone)]
pub struct NullNormalFrame {
    pub nu: SignedVector,
    pub xi: SignedVector,
}

impl NullNormalFrame {
    /// Max violation of the three frame equations.
    pub fn residual(&self, amb: &AmbientSpace) -> f64 {
        let a = amb.inner(&self.nu, &self.nu).abs();
        let b = amb.inner(&self.xi, &self.xi).abs();
        let c = (amb.inner(&self.nu, &self.xi) - 2.0).abs();
        a.max(b).max(c)
    }
}

fn first_nonzero_sign(v: &SignedVector) -> f64 {
    let scale = v.amax().max(f64::MIN_POSITIVE);
    for &c in v.iter() {
        if c.abs() > 1e-12 * scale {
            return c.signum();
        }
    }
    1.0
}

/// Build the deterministic null frame spanning the plane of (b1, b2).
///
/// The 2x2 Gram of (b1, b2) is diagonalized in closed form; nu is taken
/// along the null direction whose first nonzero coordinate is positive and
/// xi is scaled so that `<nu,xi> = 2`. Fails with [`Error::NotLorentzianPlane`]
/// when the plane is degenerate or definite at the given tolerance.
pub fn null_frame_from_plane(
    b1: &SignedVector,
    b2: &SignedVector,
    amb: &AmbientSpace,
    tol: f64,
) -> Result<NullNormalFrame> {
    let a = amb.inner(b1, b1);
    let b = amb.inner(b1, b2);
    let c = amb.inner(b2, b2);
    let scale = a.abs().max(b.abs()).max(c.abs()).max(f64::MIN_POSITIVE);
    // Indefinite iff det = ac - b^2 < 0.
    let disc = b * b - a * c;
    if disc <= tol * scale * scale {
        return Err(Error::NotLorentzianPlane { discriminant: disc });
    }

    // Closed-form symmetric 2x2 eigendecomposition of [[a,b],[b,c]].
    let half_tr = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let lam_plus = half_tr + rad;
    let lam_minus = half_tr - rad;
    let eigvec = |lam: f64| -> (f64, f64) {
        // (A - lam I) v = 0; pick the better-conditioned row.
        let r1 = (a - lam).abs().max(b.abs());
        let r2 = b.abs().max((c - lam).abs());
        let (x, y) = if r1 >= r2 {
            (-b, a - lam)
        } else {
            (c - lam, -b)
        };
        let norm = (x * x + y * y).sqrt();
        if norm == 0.0 {
            (1.0, 0.0)
        } else {
            (x / norm, y / norm)
        }
    };

    let (u1, u2) = eigvec(lam_plus);
    let (w1, w2) = eigvec(lam_minus);
    let mut u: SignedVector = b1 * u1 + b2 * u2;
    let mut w: SignedVector = b1 * w1 + b2 * w2;
    // <u,u> = lam_plus > 0, <w,w> = lam_minus < 0 for unit eigvecs.
    u /= lam_plus.sqrt();
    w /= (-lam_minus).sqrt();
    u *= first_nonzero_sign(&u);
    w *= first_nonzero_sign(&w);

    let mut nu = &u + &w;
    nu *= first_nonzero_sign(&nu);
    let xi0 = &u - &w;
    let pairing = amb.inner(&nu, &xi0);
    debug_assert!(pairing.abs() > 1.0);
    let xi = xi0 * (2.0 / pairing);
    Ok(NullNormalFrame { nu, xi })
}

/// Eigenvalue signature (plus, minus, zero) of a symmetric matrix, with
/// zeros decided by the absolute tolerance `tol`.
pub fn gram_signature(g: &DMatrix<f64>, tol: f64) -> (usize, usize, usize) {
    assert_eq!(g.nrows(), g.ncols(), "gram_signature: matrix not square");
    let sym = nalgebra::SymmetricEigen::new(g.clone());
    let mut plus = 0;
    let mut minus = 0;
    let mut zero = 0;
    for &lam in sym.eigenvalues.iter() {
        if lam > tol {
            plus += 1;
        } else if lam < -tol {
            minus += 1;
        } else {
            zero += 1;
        }
    }
    (plus, minus, zero)
}

/// Signed Gram-Schmidt with pivoting on |<w,w>|.
///
/// Returns orthonormal vectors (`<e_i,e_i> = sign_i` in {+1,-1}) spanning
/// the same space as the inputs, the signs, and the coefficient matrix C
/// with `e_i = sum_a C[(i,a)] v_a`. Pivot order is deterministic: at each
/// step the remaining vector with the largest |<w,w>| after projection,
/// ties broken by input order.
pub fn signed_gram_schmidt(
    vectors: &[SignedVector],
    amb: &AmbientSpace,
    tol: f64,
) -> Result<(Vec<SignedVector>, Vec<f64>, DMatrix<f64>)> {
    let k = vectors.len();
    let mut work: Vec<SignedVector> = vectors.to_vec();
    // coeffs[j] = expression of work[j] in the input basis
    let mut coeffs: Vec<DVector<f64>> = (0..k)
        .map(|j| DVector::from_fn(k, |i, _| if i == j { 1.0 } else { 0.0 }))
        .collect();
    let mut used = vec![false; k];
    let mut frame = Vec::with_capacity(k);
    let mut signs = Vec::with_capacity(k);
    let mut frame_coeffs = Vec::with_capacity(k);
    let scale = vectors
        .iter()
        .map(|v| amb.inner(v, v).abs())
        .fold(f64::MIN_POSITIVE, f64::max);

    for _ in 0..k {
        let mut best = None;
        let mut best_norm = -1.0;
        for (j, w) in work.iter().enumerate() {
            if used[j] {
                continue;
            }
            let nn = amb.inner(w, w).abs();
            if nn > best_norm {
                best_norm = nn;
                best = Some(j);
            }
        }
        let j = best.expect("gram-schmidt: no vector left");
        if best_norm <= tol * scale {
            return Err(Error::DegenerateChartPoint { pivot: best_norm });
        }
        used[j] = true;
        let nn = amb.inner(&work[j], &work[j]);
        let sign = nn.signum();
        let inv = 1.0 / nn.abs().sqrt();
        let e = &work[j] * inv;
        let ce = &coeffs[j] * inv;
        for m in 0..k {
            if used[m] {
                continue;
            }
            // subtract the signed projection onto e
            let proj = sign * amb.inner(&work[m], &e);
            work[m] = &work[m] - &e * proj;
            coeffs[m] = &coeffs[m] - &ce * proj;
        }
        frame.push(e);
        signs.push(sign);
        frame_coeffs.push(ce);
    }

    let coeff_mat = DMatrix::from_fn(k, k, |i, a| frame_coeffs[i][a]);
    Ok((frame, signs, coeff_mat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v4(a: f64, b: f64, c: f64, d: f64) -> SignedVector {
        DVector::from_vec(vec![a, b, c, d])
    }

    fn r42() -> AmbientSpace {
        AmbientSpace::flat(2, 2)
    }

    #[test]
    fn inner_examples() {
        let amb = r42();
        assert_eq!(
            amb.inner(&v4(1.0, 0.0, 0.0, 0.0), &v4(1.0, 0.0, 0.0, 0.0)),
            1.0
        );
        assert_eq!(
            amb.inner(&v4(1.0, 0.0, 1.0, 0.0), &v4(1.0, 0.0, 1.0, 0.0)),
            0.0
        );
        assert_eq!(
            amb.inner(&v4(1.0, 0.0, 1.0, 0.0), &v4(1.0, 0.0, -1.0, 0.0)),
            2.0
        );
    }

    #[test]
    #[should_panic(expected = "wrong dimension")]
    fn inner_dimension_mismatch_panics() {
        let amb = r42();
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        amb.inner(&x, &x);
    }

    #[test]
    fn conjugate_examples() {
        let amb = r42();
        let x = v4(1.0, 2.0, 3.0, 4.0);
        assert_eq!(amb.conjugate(&x), v4(1.0, 2.0, -3.0, -4.0));
        assert_eq!(amb.conjugate(&amb.conjugate(&x)), x);
        // product-sphere point: <nu, conj nu> = |nu'|^2 + |nu''|^2 = 2
        let nu = v4(0.6, 0.8, (0.3f64).cos(), (0.3f64).sin());
        let paired = amb.inner(&nu, &amb.conjugate(&nu));
        assert!((paired - 2.0).abs() < 1e-15);
    }

    #[test]
    fn null_frame_examples() {
        let amb = r42();
        let f = null_frame_from_plane(
            &v4(1.0, 0.0, 1.0, 0.0),
            &v4(1.0, 0.0, -1.0, 0.0),
            &amb,
            DEFAULT_TOL,
        )
        .unwrap();
        assert!((&f.nu - v4(1.0, 0.0, 1.0, 0.0)).amax() < 1e-12);
        assert!((&f.xi - v4(1.0, 0.0, -1.0, 0.0)).amax() < 1e-12);

        let f = null_frame_from_plane(
            &v4(1.0, 0.0, 0.0, 0.0),
            &v4(0.0, 0.0, 1.0, 0.0),
            &amb,
            DEFAULT_TOL,
        )
        .unwrap();
        assert!((&f.nu - v4(1.0, 0.0, 1.0, 0.0)).amax() < 1e-12);
        assert!((&f.xi - v4(1.0, 0.0, -1.0, 0.0)).amax() < 1e-12);

        let err = null_frame_from_plane(
            &v4(1.0, 0.0, 0.0, 0.0),
            &v4(0.0, 1.0, 0.0, 0.0),
            &amb,
            DEFAULT_TOL,
        );
        assert!(matches!(err, Err(Error::NotLorentzianPlane { .. })));
    }

    #[test]
    fn gram_signature_examples() {
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        assert_eq!(gram_signature(&g, 1e-9), (1, 1, 0));
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-12]));
        assert_eq!(gram_signature(&g, 1e-9), (1, 0, 1));
        // closed-form flat-torus metric at c = 0.5
        let c = 0.5;
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![c * c, -c * c]));
        assert_eq!(gram_signature(&g, 1e-9), (1, 1, 0));
    }

    proptest! {
        #[test]
        fn inner_symmetric_bilinear(
            xs in proptest::collection::vec(-8i32..8, 4),
            ys in proptest::collection::vec(-8i32..8, 4),
            zs in proptest::collection::vec(-8i32..8, 4),
            a in -4i32..4,
        ) {
            let amb = r42();
            let x = DVector::from_iterator(4, xs.iter().map(|&v| v as f64));
            let y = DVector::from_iterator(4, ys.iter().map(|&v| v as f64));
            let z = DVector::from_iterator(4, zs.iter().map(|&v| v as f64));
            let a = a as f64;
            prop_assert!((amb.inner(&x, &y) - amb.inner(&y, &x)).abs() < 1e-12);
            let lhs = amb.inner(&(&x * a + &z), &y);
            let rhs = a * amb.inner(&x, &y) + amb.inner(&z, &y);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn conjugation_preserves_inner_after_double_flip(
            xs in proptest::collection::vec(-1.0f64..1.0, 4),
            ys in proptest::collection::vec(-1.0f64..1.0, 4),
        ) {
            let amb = r42();
            let x = DVector::from_vec(xs);
            let y = DVector::from_vec(ys);
            let xc = amb.conjugate(&x);
            let yc = amb.conjugate(&y);
            prop_assert!((amb.inner(&amb.conjugate(&xc), &amb.conjugate(&yc)) - amb.inner(&x, &y)).abs() < 1e-12);
            // conjugation against one argument realizes the Euclidean pairing
            let euclid: f64 = x.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
            prop_assert!((amb.inner(&x, &yc) - euclid).abs() < 1e-12);
        }

        #[test]
        fn null_frame_equations_on_random_planes(
            c1 in -2.0f64..2.0, c2 in -2.0f64..2.0,
            c3 in -2.0f64..2.0, c4 in -2.0f64..2.0,
        ) {
            let amb = r42();
            // span a plane guaranteed to contain +/- directions, then shear it
            let b1 = v4(1.0, 0.2 * c1, 0.1 * c2, 0.0);
            let b2 = v4(0.1 * c3, 0.0, 1.0, 0.3 * c4);
            let gram_det = amb.inner(&b1, &b1) * amb.inner(&b2, &b2)
                - amb.inner(&b1, &b2) * amb.inner(&b1, &b2);
            prop_assume!(-gram_det >= 1e-6);
            let f = null_frame_from_plane(&b1, &b2, &amb, DEFAULT_TOL).unwrap();
            prop_assert!(f.residual(&amb) < 1e-10);
        }

        #[test]
        fn gram_signature_congruence_invariant(
            d in proptest::collection::vec(-3i32..3, 3),
            p in proptest::collection::vec(-2i32..2, 9),
        ) {
            let diag = DMatrix::from_diagonal(&DVector::from_iterator(3, d.iter().map(|&v| v as f64)));
            let pm = DMatrix::from_iterator(3, 3, p.iter().map(|&v| v as f64));
            prop_assume!(pm.determinant().abs() > 0.5);
            let congruent = &pm * &diag * pm.transpose();
            prop_assert_eq!(gram_signature(&congruent, 1e-9), gram_signature(&diag, 1e-9));
        }
    }
}
