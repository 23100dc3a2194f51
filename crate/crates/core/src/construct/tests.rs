use nalgebra::DVector;

use super::seeds;
use super::*;
use crate::fd;
use crate::scalarlang::parse;

fn uv() -> Vec<String> {
    vec!["u".into(), "v".into()]
}

fn fd_columns<F>(f: F, x: &[f64], dim: usize, h: f64) -> Vec<SignedVector>
where
    F: Fn(&[f64]) -> Result<SignedVector> + Copy,
{
    (0..x.len())
        .map(|a| {
            let mut col = DVector::zeros(dim);
            for i in 0..dim {
                col[i] = fd::partial(|t| Ok(f(t)?[i]), x, &[a], h).unwrap();
            }
            col
        })
        .collect()
}

#[test]
fn flat_torus_support_candidate() {
    let sigma = parse("0.5", &uv(), &[]).unwrap();
    let cand = from_support_function(sigma, Signature::new(1, 1), 0).unwrap();
    let x = [0.9, -1.4];
    let phi = cand.eval(&x).unwrap();
    let c = 0.5;
    let expect = DVector::from_vec(vec![
        c * x[0].cos(),
        c * x[0].sin(),
        -c * x[1].cos(),
        -c * x[1].sin(),
    ]);
    assert!((phi - expect).amax() < 1e-12);
    assert!(cand.tau_at(&x).unwrap().unwrap().abs() < 1e-12);
    assert!(cand.tau_residual_at(&x).unwrap().unwrap() < 1e-12);
}

#[test]
fn sigma_zero_is_rejected_as_degenerate() {
    let sigma = parse("0", &uv(), &[]).unwrap();
    let err = from_support_function(sigma, Signature::new(1, 1), 0);
    assert!(matches!(err, Err(Error::NoAdmissibleTau)), "{err:?}");
}

#[test]
fn out_of_range_branch_is_lost() {
    let sigma = parse("0.5", &uv(), &[]).unwrap();
    let err = from_support_function(sigma, Signature::new(1, 1), 3);
    assert!(matches!(err, Err(Error::RootBranchLost { .. })), "{err:?}");
}

#[test]
fn corollary1_constant_is_product_of_circles() {
    let sigma = parse("0.5", &uv(), &[]).unwrap();
    let cand = corollary1_surface(sigma).unwrap();
    let x = [1.2, 0.3];
    let phi = cand.eval(&x).unwrap();
    let c = 0.5;
    let expect = DVector::from_vec(vec![
        c * x[0].cos(),
        c * x[0].sin(),
        -c * x[1].cos(),
        -c * x[1].sin(),
    ]);
    assert!((phi - expect).amax() < 1e-14);
}

#[test]
fn corollary1_agrees_with_support_path_on_a_grid() {
    let sigma = parse("0.3 + 0.1*sin(u)*cos(v)", &uv(), &[]).unwrap();
    let closed = corollary1_surface(sigma.clone()).unwrap();
    let general = from_support_function(sigma, Signature::new(1, 1), 0).unwrap();
    let mut max_diff: f64 = 0.0;
    for i in 0..32 {
        for j in 0..32 {
            let x = [
                (i as f64 + 0.5) * std::f64::consts::TAU / 32.0,
                (j as f64 + 0.5) * std::f64::consts::TAU / 32.0,
            ];
            let d = (closed.eval(&x).unwrap() - general.eval(&x).unwrap()).amax();
            max_diff = max_diff.max(d);
        }
    }
    assert!(max_diff < 1e-10, "two-path disagreement {max_diff:.3e}");
}

#[test]
fn null_graph_membership() {
    let vars = uv();
    let f = parse("sin(u)*cos(v)", &vars, &[]).unwrap();
    let nu0 = DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]);
    let amb = AmbientSpace::flat(2, 2);
    let comps = vec![f.clone(), var(0), f.clone(), var(1)];
    let domain = vec![(0.0, std::f64::consts::TAU), (0.0, std::f64::consts::TAU)];
    let cand = null_hyperplane_graph(
        nu0.clone(),
        amb,
        Signature::new(1, 1),
        comps,
        domain.clone(),
    )
    .unwrap();
    let x = [0.4, 2.0];
    let phi = cand.eval(&x).unwrap();
    assert!(amb.inner(&phi, &nu0).abs() < 1e-15);

    // shifting the third coordinate leaves the hyperplane
    let comps = vec![f.clone(), var(0), add(f.clone(), lit(1e-3)), var(1)];
    let err = null_hyperplane_graph(
        nu0.clone(),
        amb,
        Signature::new(1, 1),
        comps,
        domain.clone(),
    );
    assert!(
        matches!(err, Err(Error::NotInNullHyperplane { .. })),
        "{err:?}"
    );

    // a non-null direction is invalid input
    let bad = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
    let comps = vec![f.clone(), var(0), f, var(1)];
    let err = null_hyperplane_graph(bad, amb, Signature::new(1, 1), comps, domain);
    assert!(matches!(err, Err(Error::InvalidInput(_))), "{err:?}");
}

#[test]
fn latitude_candidate_has_mean_curvature_root_and_unit_norm() {
    for &theta in &[0.2f64, 0.5, 1.0] {
        let seed = seeds::latitude_product(theta);
        let cand = from_gauss_sphere(seed, 0).unwrap();
        let x = [2.0, 0.7];
        let tau = cand.tau_at(&x).unwrap().unwrap();
        assert!((tau - theta.tan() / 2.0).abs() < 1e-10, "theta={theta}");
        let phi = cand.eval(&x).unwrap();
        assert!((cand.target.sq_norm(&phi) - 1.0).abs() < 1e-12);
        assert!(cand.tau_residual_at(&x).unwrap().unwrap() < 1e-12);
    }
}

#[test]
fn umbilic_seeds_reject_their_only_root() {
    let seed = seeds::sphere(1.0);
    let roots = hypersurface_flat_tau_roots(&seed, &[1.0, 2.0], 1e-9).unwrap();
    assert!(roots.roots.is_empty());
    assert!(roots
        .rejected
        .iter()
        .any(|(t, r)| (*t - 1.0).abs() < 1e-9
            && *r == crate::tausolve::RejectReason::MetricDegenerate));
    let err = from_hypersurface_flat(seed, 0);
    assert!(matches!(err, Err(Error::NoAdmissibleTau)), "{err:?}");

    // sphere-form umbilic: tau = a rejected the same way
    let seed = seeds::latitude_product(0.5);
    let x = [0.3, 0.3];
    let roots = gauss_sphere_tau_roots(&seed, &x, 1e-9).unwrap();
    assert_eq!(roots.roots.len(), 1);
}

#[test]
fn cylinder_has_no_admissible_tau() {
    // A flat principal direction sends the midpoint of the inverse
    // curvatures to infinity: tr((Id - tau A)^{-1} A) = (1/r)/(1 - tau/r)
    // never vanishes, so the construction yields no candidate.
    let seed = seeds::cylinder(1.0);
    let roots = hypersurface_flat_tau_roots(&seed, &[0.3, 0.0], 1e-9).unwrap();
    assert!(roots.roots.is_empty());
    let err = from_hypersurface_flat(seed, 0);
    assert!(matches!(err, Err(Error::NoAdmissibleTau)), "{err:?}");
}

#[test]
fn torus_candidate_uses_focal_midpoint() {
    let (bigr, r) = (2.0, 0.5);
    let cand = from_hypersurface_flat(seeds::torus(bigr, r), 0).unwrap();
    let x = [0.4, 1.0];
    let tau = cand.tau_at(&x).unwrap().unwrap();
    let k1 = 1.0 / r;
    let k2 = x[0].cos() / (bigr + r * x[0].cos());
    assert!((tau - 0.5 * (1.0 / k1 + 1.0 / k2)).abs() < 1e-9);
    assert!(cand.tau_residual_at(&x).unwrap().unwrap() < 1e-10);
    let phi = cand.eval(&x).unwrap();
    assert_eq!(phi.len(), 4);
    assert!((phi[3] - tau).abs() < 1e-14);
}

#[test]
fn minimal_seed_takes_tau_zero() {
    let cand = from_hypersurface_flat(seeds::catenoid(), 0).unwrap();
    let x = [0.2, 1.1];
    let tau = cand.tau_at(&x).unwrap().unwrap();
    assert!(tau.abs() < 1e-10, "catenoid root {tau}");
    let phi = cand.eval(&x).unwrap();
    let sigma = seeds::catenoid().sigma_at(&x).unwrap();
    for i in 0..3 {
        assert!((phi[i] - sigma[i]).abs() < 1e-10);
    }
    assert!(phi[3].abs() < 1e-10);
}

#[test]
fn decompose_flat_roundtrip_on_torus() {
    let cand = from_hypersurface_flat(seeds::torus(2.0, 0.5), 0).unwrap();
    let x = [0.5, 2.4];
    let phi = cand.eval(&x).unwrap();
    let d_phi = fd_columns(|t| cand.eval(t), &x, 4, 1e-4);
    let nu_tilde = cand.null_normal_at(&x).unwrap().unwrap();
    let d_nu = fd_columns(|t| Ok(cand.null_normal_at(t)?.unwrap()), &x, 4, 1e-4);
    let dec = decompose_flat(&x, &phi, &d_phi, &nu_tilde, &d_nu, &cand.target).unwrap();
    assert!(dec.roundtrip_residual < 1e-12);
    assert!(
        dec.legendrian_residual < 1e-8,
        "{:.3e}",
        dec.legendrian_residual
    );
    let seed_sigma = seeds::torus(2.0, 0.5).sigma_at(&x).unwrap();
    assert!((dec.sigma - seed_sigma).amax() < 1e-9);
    let tau = cand.tau_at(&x).unwrap().unwrap();
    assert!((dec.tau - tau).abs() < 1e-12);
}

#[test]
fn decompose_flat_needs_normalizable_normal() {
    let amb = AmbientSpace::flat(2, 2);
    let phi = DVector::from_vec(vec![1.0, 0.0, 1.0, 0.5]);
    let nu = DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]);
    let err = decompose_flat(&[0.0, 0.0], &phi, &[], &nu, &[], &amb);
    assert!(matches!(err, Err(Error::NormalizationFailure { .. })));
}

#[test]
fn decompose_sphere_roundtrip_on_latitude() {
    let theta = 0.5f64;
    let seed = seeds::latitude_product(theta);
    let cand = from_gauss_sphere(seed.clone(), 0).unwrap();
    let x = [1.0, 0.2];
    let phi = cand.eval(&x).unwrap();
    let d_phi = fd_columns(|t| cand.eval(t), &x, 5, 1e-4);
    let sig_v = seed.sigma_at(&x).unwrap();
    let d_sig = fd_columns(|t| seed.sigma_at(t), &x, 5, 1e-4);
    let dec = decompose_sphere(&phi, &d_phi, &sig_v, &d_sig, 3, &cand.target).unwrap();
    assert!((dec.tau - theta.tan() / 2.0).abs() < 1e-12);
    assert!(dec.roundtrip_residual < 1e-13);
    assert!(dec.orthogonality_residual < 1e-12);
    assert!(dec.gauss_residual < 1e-9);
    assert!(dec.legendrian_residual < 1e-9);
    // tau = 0 edge: decomposing phi = nu returns (phi, 0)
    let nu_only = seed.nu_at(&x).unwrap();
    let d_nu = fd_columns(|t| seed.nu_at(t), &x, 5, 1e-4);
    let dec = decompose_sphere(&nu_only, &d_nu, &sig_v, &d_sig, 3, &cand.target).unwrap();
    assert!(dec.tau.abs() < 1e-12);
    assert!((dec.nu - nu_only).amax() < 1e-13);
}

#[test]
fn correspondence_constant_field_is_round_sphere() {
    let sig = Signature::new(2, 0);
    let c = 0.3;
    let corr = lorentzian_correspondence(lit(c), sig).unwrap();
    let x = [1.1, 0.8];
    let s2 = corr.seed.sigma_at(&x).unwrap();
    assert!((s2.norm() - 2.0 * c).abs() < 1e-12, "radius 2c");
    assert!(corr.support_identity_residual(&x).unwrap() < 1e-12);
    assert!(corr.agreement_residual(&x).unwrap() < 1e-12);
}

#[test]
fn correspondence_height_eigenfunction_degenerates_to_a_point() {
    let sig = Signature::new(2, 0);
    let chart_vars = vec!["u".into(), "v".into()];
    let sigma3 = parse("cos(u)/4", &chart_vars, &[]).unwrap();
    let corr = lorentzian_correspondence(sigma3, sig).unwrap();
    let x = [0.9, 2.0];
    // the chart carries the height axis first, so sigma2 is the constant
    // map (1/2, 0, 0): rank drops everywhere
    let s2 = corr.seed.sigma_at(&x).unwrap();
    let expect = DVector::from_vec(vec![0.5, 0.0, 0.0]);
    assert!((s2 - expect).amax() < 1e-12);
    let flags = corr.immersion_rank_flags(3).unwrap();
    assert_eq!(flags.len(), 9, "every sample flagged");
    assert!(corr.support_identity_residual(&x).unwrap() < 1e-10);
    assert!(corr.agreement_residual(&x).unwrap() < 1e-10);
}

#[test]
fn correspondence_full_pipeline_nondegenerate() {
    // A field with non-umbilic Hessian keeps both sides immersed; the
    // hypersurface machinery then reproduces the support-function
    // construction pointwise.
    let sig = Signature::new(2, 0);
    let chart_vars = vec!["u".into(), "v".into()];
    let sigma3 = parse("0.5 + 0.1*sin(u)^2*cos(v)", &chart_vars, &[]).unwrap();
    let corr = lorentzian_correspondence(sigma3.clone(), sig).unwrap();
    assert!(corr.immersion_rank_flags(3).unwrap().is_empty());
    let support = from_support_function(sigma3, sig, 0).unwrap();
    let flat = from_hypersurface_flat(corr.seed.clone(), 0).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let x = [0.7 + 0.35 * i as f64, 0.3 + 1.1 * j as f64];
            let diff = (support.eval(&x).unwrap() - flat.eval(&x).unwrap()).amax();
            assert!(diff < 1e-8, "pipeline disagreement {diff:.3e} at {x:?}");
            assert!(corr.agreement_residual(&x).unwrap() < 1e-8);
        }
    }
}

#[test]
fn mean_gauss_point_invariants() {
    let sigma = parse("0.3 + 0.1*sin(u)*cos(v)", &uv(), &[]).unwrap();
    let cand = from_support_function(sigma, Signature::new(1, 1), 0).unwrap();
    let amb = AmbientSpace::flat(2, 2);
    let x = [0.8, 1.9];
    let mg = cand.mean_gauss_point(&x).unwrap().unwrap();
    // nu is null and normalized to the product of unit circles
    assert!(amb.sq_norm(&mg.nu).abs() < 1e-14);
    assert!((mg.nu[0] * mg.nu[0] + mg.nu[1] * mg.nu[1] - 1.0).abs() < 1e-14);
    assert!((mg.nu[2] * mg.nu[2] + mg.nu[3] * mg.nu[3] - 1.0).abs() < 1e-14);
    // tau is the selected root and the jet matches the field
    assert_eq!(Some(mg.tau), cand.tau_at(&x).unwrap());
    assert_eq!(mg.sigma_jet.value, cand.sigma.as_ref().unwrap().eval(&x).unwrap());
    // closed-form surfaces expose the same data
    let closed = corollary1_surface(cand.sigma.clone().unwrap()).unwrap();
    let mg2 = closed.mean_gauss_point(&x).unwrap().unwrap();
    assert!((mg2.tau - mg.tau).abs() < 1e-12);
    // seed-backed candidates have no mean-Gauss data
    let seedc = from_hypersurface_flat(seeds::torus(2.0, 0.5), 0).unwrap();
    assert!(seedc.mean_gauss_point(&[0.4, 1.0]).unwrap().is_none());
}
