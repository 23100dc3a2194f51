//! The (1,1) surface identity suite: closed-form first fundamental form
//! coefficients, weak conformality, null points, the flatness and
//! omega-Lagrangian classifiers, and the two symplectic pairings of the
//! neutral R^4.

use crate::error::Result;
use crate::pseudolin::{AmbientSpace, SignedVector};
use crate::scalarlang::{jet, FieldExpr};

use super::ImmersionJet;

/// Complex structure J(x1,x2,x3,x4) = (-x2, x1, -x4, x3).
pub fn apply_j(v: &SignedVector) -> SignedVector {
    SignedVector::from_vec(vec![-v[1], v[0], -v[3], v[2]])
}

/// Para-complex structure K(x1,x2,x3,x4) = (x3, x4, x1, x2).
pub fn apply_k(v: &SignedVector) -> SignedVector {
    SignedVector::from_vec(vec![v[2], v[3], v[0], v[1]])
}

#[derive(Debug, Clone, Copy)]
pub struct SurfaceChecks {
    pub e_num: f64,
    pub f_num: f64,
    pub g_num: f64,
    pub e_cf: f64,
    pub f_cf: f64,
    pub g_cf: f64,
    /// max |numeric - closed form| over E, F, G.
    pub closed_form_residual: f64,
    /// max(|E + G|, |F|): weak conformality of the induced metric.
    pub weak_conformal: f64,
    /// |E|; vanishes exactly at the null points
    /// sigma + s_uu + s_vv = +/- 2 s_uv.
    pub null_point: f64,
    /// (d_uu - d_vv) E: zero iff the induced metric is flat.
    pub flatness: f64,
    /// s_u + s_v + s_vvv - s_uuv - s_uvv + s_uuu: zero iff Lagrangian
    /// for omega.
    pub lagrangian_omega: f64,
    pub omega_num: f64,
    pub omega_cf: f64,
    pub omega_prime_num: f64,
    /// Full closed form of the K-pairing: cos(u-v) E plus a sin(u-v)
    /// term that vanishes exactly when
    /// s_v - s_u + s_vvv - s_uuv + s_uvv - s_uuu = 0 (constants and
    /// fields of u+v).
    pub omega_prime_cf: f64,
    /// The cos(u-v) E part alone, reported for comparison.
    pub omega_prime_cos_part: f64,
}

/// Evaluate the identity suite at one sample of a (1,1) candidate built
/// from the support function `sigma` (tau = s_vv - s_uu).
pub fn surface_checks(
    ijet: &ImmersionJet,
    sigma: &FieldExpr,
    amb: &AmbientSpace,
) -> Result<SurfaceChecks> {
    let x = &ijet.x;
    let sj = jet(sigma, x, 4)?;
    let s = sj.value;
    let (s_u, s_v) = (sj.d1(0), sj.d1(1));
    let (s_uu, s_uv, s_vv) = (sj.d2(0, 0), sj.d2(0, 1), sj.d2(1, 1));
    let tau = s_vv - s_uu;

    let e_cf = (2.0 * s_uu + tau + s).powi(2) - 4.0 * s_uv * s_uv;
    let f_cf = 4.0 * s_uv * (s_uu - s_vv + tau);
    let g_cf = -(2.0 * s_vv - tau + s).powi(2) + 4.0 * s_uv * s_uv;

    let e_num = amb.inner(&ijet.d1[0], &ijet.d1[0]);
    let f_num = amb.inner(&ijet.d1[0], &ijet.d1[1]);
    let g_num = amb.inner(&ijet.d1[1], &ijet.d1[1]);
    let closed_form_residual = (e_num - e_cf)
        .abs()
        .max((f_num - f_cf).abs())
        .max((g_num - g_cf).abs());
    let weak_conformal = (e_num + g_num).abs().max(f_num.abs());

    // flatness: (d_uu - d_vv)(S^2 - 4 T^2) with S = s + s_uu + s_vv, T = s_uv
    let big_s = s + s_uu + s_vv;
    let s_uuu = sj.d3(0, 0, 0);
    let s_uuv = sj.d3(0, 0, 1);
    let s_uvv = sj.d3(0, 1, 1);
    let s_vvv = sj.d3(1, 1, 1);
    let su = s_u + s_uuu + s_uvv;
    let sv = s_v + s_uuv + s_vvv;
    let suu = s_uu + sj.d4(0, 0, 0, 0) + sj.d4(0, 0, 1, 1);
    let svv = s_vv + sj.d4(0, 0, 1, 1) + sj.d4(1, 1, 1, 1);
    let tu = s_uuv;
    let tv = s_uvv;
    let tuu = sj.d4(0, 0, 0, 1);
    let tvv = sj.d4(0, 1, 1, 1);
    let flatness = 2.0 * (su * su + big_s * suu)
        - 8.0 * (tu * tu + s_uv * tuu)
        - 2.0 * (sv * sv + big_s * svv)
        + 8.0 * (tv * tv + s_uv * tvv);

    let lagrangian_omega = s_u + s_v + s_vvv - s_uuv - s_uvv + s_uuu;

    let omega_num = amb.inner(&apply_j(&ijet.d1[0]), &ijet.d1[1]);
    let omega_cf = (big_s + 2.0 * s_uv) * (-lagrangian_omega);
    let omega_prime_num = amb.inner(&apply_k(&ijet.d1[0]), &ijet.d1[1]);
    let omega_prime_cos_part = (x[0] - x[1]).cos() * e_cf;
    let skew = s_v - s_u + s_vvv - s_uuv + s_uvv - s_uuu;
    let omega_prime_cf = omega_prime_cos_part + (x[0] - x[1]).sin() * (big_s - 2.0 * s_uv) * skew;

    Ok(SurfaceChecks {
        e_num,
        f_num,
        g_num,
        e_cf,
        f_cf,
        g_cf,
        closed_form_residual,
        weak_conformal,
        null_point: e_cf.abs(),
        flatness,
        lagrangian_omega,
        omega_num,
        omega_cf,
        omega_prime_num,
        omega_prime_cf,
        omega_prime_cos_part,
    })
}
