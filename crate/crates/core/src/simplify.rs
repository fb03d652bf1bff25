//! Simplification and the zero certificate.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canon::{canonicalize, to_expr};
use crate::expr::{BinaryOp, Expr, Name, UnaryOp};
use crate::{RatFun, Rational};

/// Random points tried when looking for a nonzero witness.
pub const WITNESS_POINTS: usize = 64;
/// A witness must exceed this magnitude.
pub const WITNESS_THRESHOLD: f64 = 1e-6;
/// Points where a divisor is this small are discarded.
pub const MIN_DENOMINATOR: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum ZeroVerdict {
    CertifiedZero,
    WitnessNonzero { point: BTreeMap<String, f64>, value: f64 },
    Undecided,
}

impl ZeroVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, ZeroVerdict::CertifiedZero)
    }

    pub fn label(&self) -> &'static str {
        match self {
            ZeroVerdict::CertifiedZero => "certified-zero",
            ZeroVerdict::WitnessNonzero { .. } => "witness-nonzero",
            ZeroVerdict::Undecided => "undecided",
        }
    }
}

/// Canonical rendering of `e`; returns `e` unchanged when it cannot be
/// canonicalized (unsupported function, division by zero, ...).
pub fn simplify(e: &Expr) -> Expr {
    match canonicalize::<Rational>(e) {
        Ok(r) => to_expr(&r),
        Err(_) => e.clone(),
    }
}

/// Draws a value from `±[0.3, 2.7]`.
pub fn sample_value(rng: &mut impl Rng) -> f64 {
    let mag = rng.gen_range(0.3..2.7);
    if rng.gen_bool(0.5) {
        mag
    } else {
        -mag
    }
}

pub fn random_point(names: impl IntoIterator<Item = Name>, rng: &mut impl Rng) -> HashMap<Name, f64> {
    names.into_iter().map(|n| (n, sample_value(rng))).collect()
}

fn free_symbols(e: &Expr) -> Vec<Name> {
    let mut names: Vec<Name> = e.vars().into_iter().collect();
    names.extend(e.params());
    names
}

/// Looks for a point where `e` is defined and clearly nonzero.
pub fn numeric_witness(e: &Expr, seed: u64) -> ZeroVerdict {
    let names = free_symbols(e);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..WITNESS_POINTS {
        let point = random_point(names.iter().cloned(), &mut rng);
        if let Ok(v) = e.eval_with(&point, MIN_DENOMINATOR) {
            if v.abs() > WITNESS_THRESHOLD {
                let point = point.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
                return ZeroVerdict::WitnessNonzero { point, value: v };
            }
        }
    }
    ZeroVerdict::Undecided
}

/// `CertifiedZero` exactly when the canonical form of `e` is 0.
pub fn zero_certificate(e: &Expr, seed: u64) -> ZeroVerdict {
    match canonicalize::<Rational>(e) {
        Ok(r) if r.is_zero() => ZeroVerdict::CertifiedZero,
        _ => numeric_witness(e, seed),
    }
}

/// Same as [`zero_certificate`] for an already canonical form.
pub fn certify_form(r: &RatFun, seed: u64) -> ZeroVerdict {
    if r.is_zero() {
        ZeroVerdict::CertifiedZero
    } else {
        numeric_witness(&to_expr(r), seed)
    }
}

/// Structural clean-up used for display: folds constants and removes
/// identities without reordering anything else.
pub fn tidy(e: &Expr) -> Expr {
    match e {
        Expr::Unary(op, c) => tidy_unary(*op, tidy(c)),
        Expr::Binary(op, l, r) => tidy_binary(*op, tidy(l), tidy(r)),
        Expr::Diff(vs, c) => Expr::Diff(vs.clone(), std::sync::Arc::new(tidy(c))),
        _ => e.clone(),
    }
}

fn tidy_unary(op: UnaryOp, c: Expr) -> Expr {
    match (op, c) {
        (UnaryOp::Neg, Expr::Const(k)) => Expr::Const(-k),
        (UnaryOp::Neg, Expr::Unary(UnaryOp::Neg, inner)) => (*inner).clone(),
        (UnaryOp::Exp, c) if c.is_zero() => Expr::one(),
        (op, c) => Expr::unary(op, c),
    }
}

fn is_const(e: &Expr, v: i64) -> bool {
    e.as_const().is_some_and(|c| *c == Rational::from_integer(v.into()))
}

fn fold(op: BinaryOp, a: &Rational, b: &Rational) -> Option<Rational> {
    Some(match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div => {
            if b.is_zero() {
                return None;
            }
            a / b
        }
        BinaryOp::Pow => {
            if !b.is_integer() {
                return None;
            }
            let n = b.to_integer().to_i32().filter(|n| n.abs() <= 64)?;
            if n < 0 && a.is_zero() {
                return None;
            }
            num_traits::pow::Pow::pow(a, n)
        }
    })
}

fn tidy_binary(op: BinaryOp, l: Expr, r: Expr) -> Expr {
    if let (Some(a), Some(b)) = (l.as_const(), r.as_const()) {
        if let Some(v) = fold(op, a, b) {
            return Expr::Const(v);
        }
    }
    match op {
        BinaryOp::Add if l.is_zero() => r,
        BinaryOp::Add | BinaryOp::Sub if r.is_zero() => l,
        BinaryOp::Sub if l.is_zero() => tidy_unary(UnaryOp::Neg, r),
        BinaryOp::Add => match r {
            Expr::Unary(UnaryOp::Neg, inner) => Expr::binary(BinaryOp::Sub, l, (*inner).clone()),
            Expr::Const(k) if k.is_negative() => Expr::binary(BinaryOp::Sub, l, Expr::Const(-k)),
            r => Expr::binary(BinaryOp::Add, l, r),
        },
        BinaryOp::Sub => match r {
            Expr::Unary(UnaryOp::Neg, inner) => Expr::binary(BinaryOp::Add, l, (*inner).clone()),
            Expr::Const(k) if k.is_negative() => Expr::binary(BinaryOp::Add, l, Expr::Const(-k)),
            r => Expr::binary(BinaryOp::Sub, l, r),
        },
        BinaryOp::Mul if is_const(&l, 1) => r,
        BinaryOp::Mul if is_const(&r, 1) => l,
        BinaryOp::Mul if is_const(&l, -1) => tidy_unary(UnaryOp::Neg, r),
        BinaryOp::Mul => match (l, r) {
            (Expr::Unary(UnaryOp::Neg, a), r) => tidy_unary(UnaryOp::Neg, tidy_binary(BinaryOp::Mul, (*a).clone(), r)),
            (Expr::Const(k), r) if !k.is_integer() => {
                let n = Expr::Const(Rational::from_integer(k.numer().clone()));
                let d = Expr::Const(Rational::from_integer(k.denom().clone()));
                let top = tidy_binary(BinaryOp::Mul, n, r);
                Expr::binary(BinaryOp::Div, top, d)
            }
            (l, r) => Expr::binary(BinaryOp::Mul, l, r),
        },
        BinaryOp::Div if is_const(&r, 1) => l,
        BinaryOp::Pow if is_const(&r, 1) => l,
        BinaryOp::Pow if r.is_zero() => Expr::one(),
        _ => Expr::binary(op, l, r),
    }
}

/// True when `tidy` produced a literal constant `1`.
pub fn is_literal_one(e: &Expr) -> bool {
    e.as_const().is_some_and(|c| c.is_one())
}
