//! Scalar-field expressions over chart coordinates.
//!
//! The user-facing grammar (see [`parse`]) covers numeric literals, chart
//! variables, `+ - * /`, integer powers `^`, `sin`, `cos`, `exp` and named
//! constants. Differentiation is exact and rule-based: [`jet`] evaluates
//! an expression together with its partial derivatives up to order 4 at a
//! point, and [`differentiate`] produces the derivative expression itself
//! (used when assembling closed-form immersions). Finite differences never
//! enter here; they exist only in [`crate::fd`] as an independent oracle.
//!
//! `sqrt` is available to programmatic constructors (seed normals need
//! it) but is deliberately not part of the parsed grammar.

mod jet;
mod parser;

pub use jet::{jet, Jet4};
pub use parser::parse;

use rand::Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};

/// Denominators (and sqrt arguments) closer to zero than this are domain
/// errors.
pub const EVAL_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum FieldExpr {
    Lit(f64),
    /// Index into the chart variable list.
    Var(usize),
    Neg(Box<FieldExpr>),
    Add(Box<FieldExpr>, Box<FieldExpr>),
    Sub(Box<FieldExpr>, Box<FieldExpr>),
    Mul(Box<FieldExpr>, Box<FieldExpr>),
    Div(Box<FieldExpr>, Box<FieldExpr>),
    /// Integer power; keeps derivatives total.
    Pow(Box<FieldExpr>, i32),
    Sin(Box<FieldExpr>),
    Cos(Box<FieldExpr>),
    Exp(Box<FieldExpr>),
    Sqrt(Box<FieldExpr>),
}

pub fn lit(x: f64) -> FieldExpr {
    FieldExpr::Lit(x)
}

pub fn var(i: usize) -> FieldExpr {
    FieldExpr::Var(i)
}

fn lit_value(e: &FieldExpr) -> Option<f64> {
    match e {
        FieldExpr::Lit(x) => Some(*x),
        _ => None,
    }
}

/// Sum with constant folding of the additive identity.
pub fn add(a: FieldExpr, b: FieldExpr) -> FieldExpr {
    let (la, lb) = (lit_value(&a), lit_value(&b));
    if let (Some(x), Some(y)) = (la, lb) {
        return lit(x + y);
    }
    if la == Some(0.0) {
        return b;
    }
    if lb == Some(0.0) {
        return a;
    }
    FieldExpr::Add(Box::new(a), Box::new(b))
}

pub fn sub(a: FieldExpr, b: FieldExpr) -> FieldExpr {
    let (la, lb) = (lit_value(&a), lit_value(&b));
    if let (Some(x), Some(y)) = (la, lb) {
        return lit(x - y);
    }
    if lb == Some(0.0) {
        return a;
    }
    if la == Some(0.0) {
        return neg(b);
    }
    FieldExpr::Sub(Box::new(a), Box::new(b))
}

pub fn neg(a: FieldExpr) -> FieldExpr {
    match a {
        FieldExpr::Lit(x) => lit(-x),
        FieldExpr::Neg(inner) => *inner,
        _ => FieldExpr::Neg(Box::new(a)),
    }
}

pub fn mul(a: FieldExpr, b: FieldExpr) -> FieldExpr {
    let (la, lb) = (lit_value(&a), lit_value(&b));
    if let (Some(x), Some(y)) = (la, lb) {
        return lit(x * y);
    }
    if la == Some(0.0) || lb == Some(0.0) {
        return lit(0.0);
    }
    if la == Some(1.0) {
        return b;
    }
    if lb == Some(1.0) {
        return a;
    }
    FieldExpr::Mul(Box::new(a), Box::new(b))
}

pub fn div(a: FieldExpr, b: FieldExpr) -> FieldExpr {
    let (la, lb) = (lit_value(&a), lit_value(&b));
    if la == Some(0.0) {
        return lit(0.0);
    }
    if lb == Some(1.0) {
        return a;
    }
    FieldExpr::Div(Box::new(a), Box::new(b))
}

pub fn powi(a: FieldExpr, k: i32) -> FieldExpr {
    match k {
        0 => lit(1.0),
        1 => a,
        _ => FieldExpr::Pow(Box::new(a), k),
    }
}

pub fn sin(a: FieldExpr) -> FieldExpr {
    FieldExpr::Sin(Box::new(a))
}

pub fn cos(a: FieldExpr) -> FieldExpr {
    FieldExpr::Cos(Box::new(a))
}

pub fn exp(a: FieldExpr) -> FieldExpr {
    FieldExpr::Exp(Box::new(a))
}

pub fn sqrt(a: FieldExpr) -> FieldExpr {
    FieldExpr::Sqrt(Box::new(a))
}

impl FieldExpr {
    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            FieldExpr::Lit(_) => None,
            FieldExpr::Var(i) => Some(*i),
            FieldExpr::Neg(e)
            | FieldExpr::Pow(e, _)
            | FieldExpr::Sin(e)
            | FieldExpr::Cos(e)
            | FieldExpr::Exp(e)
            | FieldExpr::Sqrt(e) => e.max_var(),
            FieldExpr::Add(a, b)
            | FieldExpr::Sub(a, b)
            | FieldExpr::Mul(a, b)
            | FieldExpr::Div(a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, None) => x,
                (None, y) => y,
            },
        }
    }

    /// Evaluate at a chart point.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            FieldExpr::Lit(c) => *c,
            FieldExpr::Var(i) => x[*i],
            FieldExpr::Neg(e) => -e.eval(x)?,
            FieldExpr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            FieldExpr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            FieldExpr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            FieldExpr::Div(a, b) => {
                let den = b.eval(x)?;
                if den.abs() <= EVAL_GUARD {
                    return Err(Error::EvalDomain {
                        what: format!("division by {den:.3e}"),
                    });
                }
                a.eval(x)? / den
            }
            FieldExpr::Pow(e, k) => {
                let base = e.eval(x)?;
                if *k < 0 && base.abs() <= EVAL_GUARD {
                    return Err(Error::EvalDomain {
                        what: format!("negative power of {base:.3e}"),
                    });
                }
                base.powi(*k)
            }
            FieldExpr::Sin(e) => e.eval(x)?.sin(),
            FieldExpr::Cos(e) => e.eval(x)?.cos(),
            FieldExpr::Exp(e) => e.eval(x)?.exp(),
            FieldExpr::Sqrt(e) => {
                let t = e.eval(x)?;
                if t <= EVAL_GUARD {
                    return Err(Error::EvalDomain {
                        what: format!("sqrt of {t:.3e}"),
                    });
                }
                t.sqrt()
            }
        })
    }
}

/// Exact derivative expression with respect to variable `v`.
pub fn differentiate(e: &FieldExpr, v: usize) -> FieldExpr {
    match e {
        FieldExpr::Lit(_) => lit(0.0),
        FieldExpr::Var(i) => lit(if *i == v { 1.0 } else { 0.0 }),
        FieldExpr::Neg(a) => neg(differentiate(a, v)),
        FieldExpr::Add(a, b) => add(differentiate(a, v), differentiate(b, v)),
        FieldExpr::Sub(a, b) => sub(differentiate(a, v), differentiate(b, v)),
        FieldExpr::Mul(a, b) => add(
            mul(differentiate(a, v), (**b).clone()),
            mul((**a).clone(), differentiate(b, v)),
        ),
        FieldExpr::Div(a, b) => div(
            sub(
                mul(differentiate(a, v), (**b).clone()),
                mul((**a).clone(), differentiate(b, v)),
            ),
            powi((**b).clone(), 2),
        ),
        FieldExpr::Pow(a, k) => mul(
            mul(lit(*k as f64), powi((**a).clone(), k - 1)),
            differentiate(a, v),
        ),
        FieldExpr::Sin(a) => mul(cos((**a).clone()), differentiate(a, v)),
        FieldExpr::Cos(a) => neg(mul(sin((**a).clone()), differentiate(a, v))),
        FieldExpr::Exp(a) => mul(exp((**a).clone()), differentiate(a, v)),
        FieldExpr::Sqrt(a) => div(differentiate(a, v), mul(lit(2.0), sqrt((**a).clone()))),
    }
}

// Display with minimal parentheses; the printed form re-parses to the same
// tree, which is the normal form used by the round-trip property.
fn prec(e: &FieldExpr) -> u8 {
    match e {
        FieldExpr::Add(..) | FieldExpr::Sub(..) => 1,
        FieldExpr::Mul(..) | FieldExpr::Div(..) => 2,
        FieldExpr::Neg(..) => 3,
        FieldExpr::Pow(..) => 4,
        _ => 5,
    }
}

fn fmt_child(f: &mut std::fmt::Formatter<'_>, e: &FieldExpr, min: u8) -> std::fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl std::fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldExpr::Lit(x) => {
                if *x < 0.0 {
                    write!(f, "({x})")
                } else {
                    write!(f, "{x}")
                }
            }
            FieldExpr::Var(i) => write!(f, "${i}"),
            FieldExpr::Neg(e) => {
                write!(f, "-")?;
                fmt_child(f, e, 3)
            }
            FieldExpr::Add(a, b) => {
                fmt_child(f, a, 1)?;
                write!(f, " + ")?;
                // right child needs strictly higher precedence to re-parse
                fmt_child(f, b, 2)
            }
            FieldExpr::Sub(a, b) => {
                fmt_child(f, a, 1)?;
                write!(f, " - ")?;
                fmt_child(f, b, 2)
            }
            FieldExpr::Mul(a, b) => {
                fmt_child(f, a, 2)?;
                write!(f, "*")?;
                fmt_child(f, b, 3)
            }
            FieldExpr::Div(a, b) => {
                fmt_child(f, a, 2)?;
                write!(f, "/")?;
                fmt_child(f, b, 3)
            }
            FieldExpr::Pow(e, k) => {
                fmt_child(f, e, 5)?;
                write!(f, "^{k}")
            }
            FieldExpr::Sin(e) => write!(f, "sin({e})"),
            FieldExpr::Cos(e) => write!(f, "cos({e})"),
            FieldExpr::Exp(e) => write!(f, "exp({e})"),
            FieldExpr::Sqrt(e) => write!(f, "sqrt({e})"),
        }
    }
}

/// Render with variable names substituted for `$i` placeholders.
pub fn pretty(e: &FieldExpr, vars: &[String]) -> String {
    let raw = format!("{e}");
    let mut out = raw;
    for (i, name) in vars.iter().enumerate().rev() {
        out = out.replace(&format!("${i}"), name);
    }
    out
}

/// Seeded random trigonometric polynomial over `n_vars` chart variables:
/// a constant offset plus a few low-frequency sine/cosine products. Used
/// by the randomized identity suites and the demo presets.
pub fn random_trig_expr(n_vars: usize, seed: u64) -> FieldExpr {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut e = lit(rng.gen_range(0.25..0.55));
    let terms = rng.gen_range(2..=4);
    for _ in 0..terms {
        let mut term = lit(rng.gen_range(0.02..0.12));
        for v in 0..n_vars {
            let freq = rng.gen_range(1..=2) as f64;
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let angle = add(mul(lit(freq), var(v)), lit(phase));
            term = mul(
                term,
                if rng.gen_bool(0.5) {
                    sin(angle)
                } else {
                    cos(angle)
                },
            );
        }
        e = add(e, term);
    }
    e
}
