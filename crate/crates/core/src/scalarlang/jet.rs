//! Pointwise jets: value and partial derivatives up to order 4.
//!
//! Jets propagate through the expression tree with the Leibniz rule
//! (products, as a sum over index subsets) and Faa di Bruno's formula
//! (univariate compositions, as a sum over set partitions written out
//! explicitly per order). Tensors are stored dense and filled entrywise,
//! so symmetry under index permutation holds by construction.

use nalgebra::{DMatrix, DVector};

use super::{FieldExpr, EVAL_GUARD};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Jet4 {
    n: usize,
    order: usize,
    pub value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
    third: Vec<f64>,
    fourth: Vec<f64>,
}

impl Jet4 {
    fn zero(n: usize, order: usize) -> Self {
        Jet4 {
            n,
            order,
            value: 0.0,
            grad: if order >= 1 { vec![0.0; n] } else { Vec::new() },
            hess: if order >= 2 {
                vec![0.0; n * n]
            } else {
                Vec::new()
            },
            third: if order >= 3 {
                vec![0.0; n * n * n]
            } else {
                Vec::new()
            },
            fourth: if order >= 4 {
                vec![0.0; n * n * n * n]
            } else {
                Vec::new()
            },
        }
    }

    pub fn constant(n: usize, order: usize, value: f64) -> Self {
        let mut j = Jet4::zero(n, order);
        j.value = value;
        j
    }

    pub fn variable(n: usize, order: usize, i: usize, value: f64) -> Self {
        let mut j = Jet4::zero(n, order);
        j.value = value;
        if order >= 1 {
            j.grad[i] = 1.0;
        }
        j
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn d1(&self, i: usize) -> f64 {
        self.grad[i]
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.n + j]
    }

    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        self.third[(i * self.n + j) * self.n + k]
    }

    pub fn d4(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.fourth[((i * self.n + j) * self.n + k) * self.n + l]
    }

    /// Partial derivative for an arbitrary multi-index (len 0..=4).
    pub fn partial(&self, idx: &[usize]) -> f64 {
        match idx.len() {
            0 => self.value,
            1 => self.d1(idx[0]),
            2 => self.d2(idx[0], idx[1]),
            3 => self.d3(idx[0], idx[1], idx[2]),
            4 => self.d4(idx[0], idx[1], idx[2], idx[3]),
            _ => panic!("jets carry at most 4 derivative orders"),
        }
    }

    pub fn gradient_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.grad)
    }

    pub fn hessian_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.d2(i, j))
    }

    fn zip(&self, o: &Jet4, f: impl Fn(f64, f64) -> f64) -> Jet4 {
        debug_assert_eq!(self.n, o.n);
        debug_assert_eq!(self.order, o.order);
        let mut out = Jet4::zero(self.n, self.order);
        out.value = f(self.value, o.value);
        for (dst, (a, b)) in out.grad.iter_mut().zip(self.grad.iter().zip(&o.grad)) {
            *dst = f(*a, *b);
        }
        for (dst, (a, b)) in out.hess.iter_mut().zip(self.hess.iter().zip(&o.hess)) {
            *dst = f(*a, *b);
        }
        for (dst, (a, b)) in out.third.iter_mut().zip(self.third.iter().zip(&o.third)) {
            *dst = f(*a, *b);
        }
        for (dst, (a, b)) in out.fourth.iter_mut().zip(self.fourth.iter().zip(&o.fourth)) {
            *dst = f(*a, *b);
        }
        out
    }

    fn add(&self, o: &Jet4) -> Jet4 {
        self.zip(o, |a, b| a + b)
    }

    fn sub(&self, o: &Jet4) -> Jet4 {
        self.zip(o, |a, b| a - b)
    }

    fn neg(&self) -> Jet4 {
        let mut out = self.clone();
        out.value = -out.value;
        for v in out
            .grad
            .iter_mut()
            .chain(out.hess.iter_mut())
            .chain(out.third.iter_mut())
            .chain(out.fourth.iter_mut())
        {
            *v = -*v;
        }
        out
    }

    /// Leibniz product over index-position subsets.
    fn mul(&self, o: &Jet4) -> Jet4 {
        let n = self.n;
        let mut out = Jet4::zero(n, self.order);
        let prod_entry = |pos: &[usize]| -> f64 {
            let k = pos.len();
            let mut acc = 0.0;
            let mut left = Vec::with_capacity(k);
            let mut right = Vec::with_capacity(k);
            for mask in 0..(1u32 << k) {
                left.clear();
                right.clear();
                for (b, &p) in pos.iter().enumerate() {
                    if mask & (1 << b) != 0 {
                        left.push(p);
                    } else {
                        right.push(p);
                    }
                }
                acc += self.partial(&left) * o.partial(&right);
            }
            acc
        };
        out.value = self.value * o.value;
        if self.order >= 1 {
            for i in 0..n {
                out.grad[i] = prod_entry(&[i]);
            }
        }
        if self.order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    out.hess[i * n + j] = prod_entry(&[i, j]);
                }
            }
        }
        if self.order >= 3 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        out.third[(i * n + j) * n + k] = prod_entry(&[i, j, k]);
                    }
                }
            }
        }
        if self.order >= 4 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            out.fourth[((i * n + j) * n + k) * n + l] = prod_entry(&[i, j, k, l]);
                        }
                    }
                }
            }
        }
        out
    }

    /// Faa di Bruno composition with a univariate function given by its
    /// derivatives `phi[0..=4]` at `self.value`.
    fn compose(&self, phi: &[f64; 5]) -> Jet4 {
        let n = self.n;
        let f = self;
        let mut out = Jet4::zero(n, self.order);
        out.value = phi[0];
        if self.order >= 1 {
            for i in 0..n {
                out.grad[i] = phi[1] * f.d1(i);
            }
        }
        if self.order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    out.hess[i * n + j] = phi[2] * f.d1(i) * f.d1(j) + phi[1] * f.d2(i, j);
                }
            }
        }
        if self.order >= 3 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let v = phi[3] * f.d1(i) * f.d1(j) * f.d1(k)
                            + phi[2]
                                * (f.d2(i, j) * f.d1(k)
                                    + f.d2(i, k) * f.d1(j)
                                    + f.d2(j, k) * f.d1(i))
                            + phi[1] * f.d3(i, j, k);
                        out.third[(i * n + j) * n + k] = v;
                    }
                }
            }
        }
        if self.order >= 4 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let singles = f.d1(i) * f.d1(j) * f.d1(k) * f.d1(l);
                            let pair_singles = f.d2(i, j) * f.d1(k) * f.d1(l)
                                + f.d2(i, k) * f.d1(j) * f.d1(l)
                                + f.d2(i, l) * f.d1(j) * f.d1(k)
                                + f.d2(j, k) * f.d1(i) * f.d1(l)
                                + f.d2(j, l) * f.d1(i) * f.d1(k)
                                + f.d2(k, l) * f.d1(i) * f.d1(j);
                            let pair_pairs = f.d2(i, j) * f.d2(k, l)
                                + f.d2(i, k) * f.d2(j, l)
                                + f.d2(i, l) * f.d2(j, k);
                            let triples = f.d3(i, j, k) * f.d1(l)
                                + f.d3(i, j, l) * f.d1(k)
                                + f.d3(i, k, l) * f.d1(j)
                                + f.d3(j, k, l) * f.d1(i);
                            let v = phi[4] * singles
                                + phi[3] * pair_singles
                                + phi[2] * (pair_pairs + triples)
                                + phi[1] * f.d4(i, j, k, l);
                            out.fourth[((i * n + j) * n + k) * n + l] = v;
                        }
                    }
                }
            }
        }
        out
    }
}

fn sin_table(t: f64) -> [f64; 5] {
    let (s, c) = t.sin_cos();
    [s, c, -s, -c, s]
}

fn cos_table(t: f64) -> [f64; 5] {
    let (s, c) = t.sin_cos();
    [c, -s, -c, s, c]
}

fn exp_table(t: f64) -> [f64; 5] {
    let e = t.exp();
    [e; 5]
}

fn recip_table(t: f64) -> [f64; 5] {
    let r = 1.0 / t;
    let r2 = r * r;
    [r, -r2, 2.0 * r2 * r, -6.0 * r2 * r2, 24.0 * r2 * r2 * r]
}

fn sqrt_table(t: f64) -> [f64; 5] {
    let s = t.sqrt();
    [
        s,
        0.5 / s,
        -0.25 / (s * t),
        0.375 / (s * t * t),
        -0.9375 / (s * t * t * t),
    ]
}

fn powi_table(t: f64, k: i32) -> [f64; 5] {
    let mut out = [0.0; 5];
    for (m, slot) in out.iter_mut().enumerate() {
        let m = m as i32;
        // falling factorial k(k-1)...(k-m+1); zero kills the term exactly
        let mut coeff = 1.0;
        for step in 0..m {
            coeff *= (k - step) as f64;
        }
        if coeff == 0.0 {
            *slot = 0.0;
        } else {
            *slot = coeff * t.powi(k - m);
        }
    }
    out
}

/// Exact jet of `e` at `x` carrying derivatives up to `order` (0..=4).
pub fn jet(e: &FieldExpr, x: &[f64], order: usize) -> Result<Jet4> {
    assert!(order <= 4, "jets carry at most 4 derivative orders");
    let n = x.len();
    Ok(match e {
        FieldExpr::Lit(c) => Jet4::constant(n, order, *c),
        FieldExpr::Var(i) => Jet4::variable(n, order, *i, x[*i]),
        FieldExpr::Neg(a) => jet(a, x, order)?.neg(),
        FieldExpr::Add(a, b) => jet(a, x, order)?.add(&jet(b, x, order)?),
        FieldExpr::Sub(a, b) => jet(a, x, order)?.sub(&jet(b, x, order)?),
        FieldExpr::Mul(a, b) => jet(a, x, order)?.mul(&jet(b, x, order)?),
        FieldExpr::Div(a, b) => {
            let jb = jet(b, x, order)?;
            if jb.value.abs() <= EVAL_GUARD {
                return Err(Error::EvalDomain {
                    what: format!("division by {:.3e}", jb.value),
                });
            }
            jet(a, x, order)?.mul(&jb.compose(&recip_table(jb.value)))
        }
        FieldExpr::Pow(a, k) => {
            let ja = jet(a, x, order)?;
            if *k < 0 && ja.value.abs() <= EVAL_GUARD {
                return Err(Error::EvalDomain {
                    what: format!("negative power of {:.3e}", ja.value),
                });
            }
            ja.compose(&powi_table(ja.value, *k))
        }
        FieldExpr::Sin(a) => {
            let ja = jet(a, x, order)?;
            ja.compose(&sin_table(ja.value))
        }
        FieldExpr::Cos(a) => {
            let ja = jet(a, x, order)?;
            ja.compose(&cos_table(ja.value))
        }
        FieldExpr::Exp(a) => {
            let ja = jet(a, x, order)?;
            ja.compose(&exp_table(ja.value))
        }
        FieldExpr::Sqrt(a) => {
            let ja = jet(a, x, order)?;
            if ja.value <= EVAL_GUARD {
                return Err(Error::EvalDomain {
                    what: format!("sqrt of {:.3e}", ja.value),
                });
            }
            ja.compose(&sqrt_table(ja.value))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::super::{parse, random_trig_expr};
    use super::*;

    fn uv() -> Vec<String> {
        vec!["u".into(), "v".into()]
    }

    #[test]
    fn constant_jet() {
        let e = parse("0.5", &uv(), &[]).unwrap();
        let j = jet(&e, &[1.2, -0.3], 4).unwrap();
        assert_eq!(j.value, 0.5);
        for i in 0..2 {
            assert_eq!(j.d1(i), 0.0);
            for jj in 0..2 {
                assert_eq!(j.d2(i, jj), 0.0);
                for k in 0..2 {
                    assert_eq!(j.d3(i, jj, k), 0.0);
                    for l in 0..2 {
                        assert_eq!(j.d4(i, jj, k, l), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn cosine_derivative_ladder() {
        let e = parse("cos(u)", &uv(), &[]).unwrap();
        let j = jet(&e, &[0.0, 0.0], 4).unwrap();
        assert_eq!(j.value, 1.0);
        assert_eq!(j.d1(0), 0.0);
        assert_eq!(j.d2(0, 0), -1.0);
        assert_eq!(j.d3(0, 0, 0), 0.0);
        assert_eq!(j.d4(0, 0, 0, 0), 1.0);
    }

    #[test]
    fn cross_partials() {
        let e = parse("sin(u)*cos(v)", &uv(), &[]).unwrap();
        let x = [std::f64::consts::FRAC_PI_4, 0.0];
        let j = jet(&e, &x, 2).unwrap();
        // sigma_uv = cos(u) * (-sin(v)) = 0 at v = 0
        assert!(j.d2(0, 1).abs() < 1e-15);
        let expect_uu = -(std::f64::consts::FRAC_PI_4.sin());
        assert!((j.d2(0, 0) - expect_uu).abs() < 1e-15);
    }

    #[test]
    fn mixed_partials_symmetric_exactly() {
        let vars = uv();
        let e = parse(
            "sin(2*u + 0.3)*cos(v)^2 - exp(0.2*v)/(2 + cos(u)) + u^3*v",
            &vars,
            &[],
        )
        .unwrap();
        let j = jet(&e, &[0.4, -1.1], 4).unwrap();
        for i in 0..2 {
            for jj in 0..2 {
                assert_eq!(j.d2(i, jj), j.d2(jj, i));
                for k in 0..2 {
                    let base = j.d3(i, jj, k);
                    assert_eq!(base, j.d3(i, k, jj));
                    assert_eq!(base, j.d3(jj, i, k));
                    for l in 0..2 {
                        let b4 = j.d4(i, jj, k, l);
                        assert_eq!(b4, j.d4(l, k, jj, i));
                        assert_eq!(b4, j.d4(jj, i, l, k));
                    }
                }
            }
        }
    }

    #[test]
    fn quartic_powers_and_quotients() {
        // f = u^4: fourth derivative 24, exact
        let e = parse("u^4", &uv(), &[]).unwrap();
        let j = jet(&e, &[1.5, 0.0], 4).unwrap();
        assert_eq!(j.d4(0, 0, 0, 0), 24.0);
        // f = 1/u at u=2: f'''' = 24/u^5
        let e = parse("1/u", &uv(), &[]).unwrap();
        let j = jet(&e, &[2.0, 0.0], 4).unwrap();
        assert!((j.d4(0, 0, 0, 0) - 24.0 / 32.0).abs() < 1e-14);
    }

    #[test]
    fn random_trig_jets_match_symbolic_third_order() {
        for seed in 0..6u64 {
            let e = random_trig_expr(2, seed);
            let du = super::super::differentiate(&e, 0);
            let duv = super::super::differentiate(&du, 1);
            let duvv = super::super::differentiate(&duv, 1);
            let x = [0.9 + seed as f64 * 0.17, -0.6 + seed as f64 * 0.05];
            let j = jet(&e, &x, 3).unwrap();
            assert!((j.d3(0, 1, 1) - duvv.eval(&x).unwrap()).abs() < 1e-11);
        }
    }
}
