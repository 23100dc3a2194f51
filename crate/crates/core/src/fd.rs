//! Fourth-order central finite differences.
//!
//! These stencils serve two roles: the `fd` jet mode for candidates that
//! only evaluate pointwise, and the independent oracle against which the
//! exact rule-based jets are tested. Higher single-axis orders are built
//! by convolving the first- and second-derivative stencils; mixed partials
//! are tensor products, hence symmetric in their axes by construction.

use crate::error::Result;

/// 1D stencil: (offset, weight) pairs and the power of h divided out.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub taps: Vec<(i32, f64)>,
    pub h_pow: u32,
}

fn d1_stencil() -> Stencil {
    Stencil {
        taps: vec![
            (-2, 1.0 / 12.0),
            (-1, -8.0 / 12.0),
            (1, 8.0 / 12.0),
            (2, -1.0 / 12.0),
        ],
        h_pow: 1,
    }
}

fn d2_stencil() -> Stencil {
    Stencil {
        taps: vec![
            (-2, -1.0 / 12.0),
            (-1, 16.0 / 12.0),
            (0, -30.0 / 12.0),
            (1, 16.0 / 12.0),
            (2, -1.0 / 12.0),
        ],
        h_pow: 2,
    }
}

fn convolve(a: &Stencil, b: &Stencil) -> Stencil {
    let mut taps: std::collections::BTreeMap<i32, f64> = std::collections::BTreeMap::new();
    for &(i, wi) in &a.taps {
        for &(j, wj) in &b.taps {
            *taps.entry(i + j).or_insert(0.0) += wi * wj;
        }
    }
    Stencil {
        taps: taps.into_iter().filter(|(_, w)| *w != 0.0).collect(),
        h_pow: a.h_pow + b.h_pow,
    }
}

/// Stencil for a single-axis derivative of the given order (1..=4).
pub fn axis_stencil(order: usize) -> Stencil {
    match order {
        1 => d1_stencil(),
        2 => d2_stencil(),
        3 => convolve(&d1_stencil(), &d2_stencil()),
        4 => convolve(&d2_stencil(), &d2_stencil()),
        _ => panic!("axis derivative order must be 1..=4"),
    }
}

/// Maximum |offset| used by the tensor-product stencil for `multi`.
pub fn stencil_reach(multi: &[usize], n: usize) -> i32 {
    let mut per_axis = vec![0usize; n];
    for &a in multi {
        per_axis[a] += 1;
    }
    per_axis
        .iter()
        .map(|&ord| {
            if ord == 0 {
                0
            } else {
                axis_stencil(ord)
                    .taps
                    .iter()
                    .map(|&(o, _)| o.abs())
                    .max()
                    .unwrap()
            }
        })
        .max()
        .unwrap_or(0)
}

/// Central-difference partial derivative of `f` for the multi-index
/// `multi` (axis indices with repetition, total order 1..=4), step `h`.
pub fn partial<F>(f: F, x: &[f64], multi: &[usize], h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    assert!(!multi.is_empty() && multi.len() <= 4);
    let n = x.len();
    let mut per_axis = vec![0usize; n];
    for &a in multi {
        assert!(a < n, "axis out of range");
        per_axis[a] += 1;
    }
    let axes: Vec<usize> = (0..n).filter(|&a| per_axis[a] > 0).collect();
    let stencils: Vec<Stencil> = axes.iter().map(|&a| axis_stencil(per_axis[a])).collect();

    let mut acc = 0.0;
    let mut tap_idx = vec![0usize; axes.len()];
    let mut point = x.to_vec();
    loop {
        let mut weight = 1.0;
        for (k, &a) in axes.iter().enumerate() {
            let (off, w) = stencils[k].taps[tap_idx[k]];
            weight *= w;
            point[a] = x[a] + off as f64 * h;
        }
        acc += weight * f(&point)?;
        // advance the odometer
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

/// Richardson combination of two 4th-order estimates at steps h and h/2.
pub fn richardson4(coarse: f64, fine: f64) -> f64 {
    (16.0 * fine - coarse) / 15.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_reproduce_exp_derivatives() {
        // all derivatives of exp at 0 equal 1
        let f = |x: &[f64]| Ok(x[0].exp());
        for order in 1..=4 {
            let multi: Vec<usize> = vec![0; order];
            let h = if order <= 2 { 1e-3 } else { 2e-2 };
            let d = partial(f, &[0.0], &multi, h).unwrap();
            let tol = if order <= 2 { 1e-10 } else { 1e-7 };
            assert!((d - 1.0).abs() < tol, "order {order}: {d}");
        }
    }

    #[test]
    fn mixed_partials_of_a_product() {
        // f = sin(u) cos(v): f_uv = -cos(u) sin(v)
        let f = |x: &[f64]| Ok(x[0].sin() * x[1].cos());
        let x = [0.7, 0.3];
        let d = partial(f, &x, &[0, 1], 1e-3).unwrap();
        let expect = -x[0].cos() * x[1].sin();
        assert!((d - expect).abs() < 1e-9);
        // f_uuv = sin(u) sin(v)
        let d = partial(f, &x, &[0, 0, 1], 2e-2).unwrap();
        let expect = x[0].sin() * x[1].sin();
        assert!((d - expect).abs() < 1e-7);
    }

    #[test]
    fn third_and_fourth_single_axis() {
        let f = |x: &[f64]| Ok((2.0 * x[0]).sin());
        let x = [0.35];
        let d3 = partial(f, &x, &[0, 0, 0], 2e-2).unwrap();
        assert!((d3 - (-8.0 * (2.0 * x[0]).cos())).abs() < 1e-6);
        let d4 = partial(f, &x, &[0, 0, 0, 0], 2e-2).unwrap();
        assert!((d4 - 16.0 * (2.0 * x[0]).sin()).abs() < 2e-5);
    }
}
