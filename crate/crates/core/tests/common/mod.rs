//! Shared generators and numeric helpers for the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use closedform::simplify::sample_value;
use closedform::{name, BinaryOp, Expr, Name, UnaryOp};
use proptest::prelude::*;
use rand::Rng;

pub const VARS: [&str; 2] = ["x", "t"];
pub const PARAMS: [&str; 2] = ["a", "b"];

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn leaf(rng: &mut impl Rng) -> Expr {
    match rng.gen_range(0..6) {
        0 | 1 => Expr::var(VARS[rng.gen_range(0..2)]),
        2 => Expr::param(PARAMS[rng.gen_range(0..2)]),
        3 => Expr::int(rng.gen_range(1..4)),
        4 => Expr::ratio(rng.gen_range(-3..4), rng.gen_range(1..4)),
        _ => Expr::var("x"),
    }
}

/// Random expression over the full grammar: arithmetic, small integer
/// powers and every unary function.
pub fn fuzz_expr(rng: &mut impl Rng, depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return leaf(rng);
    }
    let d = depth - 1;
    match rng.gen_range(0..12) {
        0 | 1 => Expr::binary(BinaryOp::Add, fuzz_expr(rng, d), fuzz_expr(rng, d)),
        2 => Expr::binary(BinaryOp::Sub, fuzz_expr(rng, d), fuzz_expr(rng, d)),
        3 | 4 => Expr::binary(BinaryOp::Mul, fuzz_expr(rng, d), fuzz_expr(rng, d)),
        5 => Expr::binary(BinaryOp::Div, fuzz_expr(rng, d), fuzz_expr(rng, d)),
        6 => Expr::pow(fuzz_expr(rng, d), Expr::int(rng.gen_range(-2..4))),
        7 => Expr::unary(UnaryOp::Neg, fuzz_expr(rng, d)),
        8 => Expr::exp(fuzz_expr(rng, d.min(1))),
        9 => Expr::unary(UnaryOp::Log, fuzz_expr(rng, d)),
        10 => Expr::unary(if rng.gen() { UnaryOp::Sin } else { UnaryOp::Cos }, fuzz_expr(rng, d)),
        _ => Expr::unary(UnaryOp::Sqrt, fuzz_expr(rng, d)),
    }
}

/// Random expression that is smooth on the whole sampling domain, so
/// finite differences stay accurate: denominators are bounded away from 0.
pub fn smooth_expr(rng: &mut impl Rng, depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return leaf(rng);
    }
    let d = depth - 1;
    match rng.gen_range(0..9) {
        0 | 1 => Expr::binary(BinaryOp::Add, smooth_expr(rng, d), smooth_expr(rng, d)),
        2 => Expr::binary(BinaryOp::Sub, smooth_expr(rng, d), smooth_expr(rng, d)),
        3 | 4 => Expr::binary(BinaryOp::Mul, smooth_expr(rng, d), smooth_expr(rng, d)),
        5 => {
            let g = smooth_expr(rng, d.min(1));
            let den = Expr::binary(BinaryOp::Add, Expr::int(1), Expr::binary(BinaryOp::Mul, g.clone(), g));
            Expr::binary(BinaryOp::Div, smooth_expr(rng, d), den)
        }
        6 => Expr::pow(smooth_expr(rng, d), Expr::int(rng.gen_range(0..4))),
        7 => Expr::exp(Expr::unary(UnaryOp::Sin, smooth_expr(rng, d.min(1)))),
        _ => Expr::unary(if rng.gen() { UnaryOp::Sin } else { UnaryOp::Cos }, smooth_expr(rng, d)),
    }
}

pub fn random_bindings(rng: &mut impl Rng) -> HashMap<Name, f64> {
    VARS.iter().chain(PARAMS.iter()).map(|s| (name(s), sample_value(rng))).collect()
}

pub fn eval(e: &Expr, at: &HashMap<Name, f64>) -> Option<f64> {
    e.eval_with(at, 1e-9).ok()
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

fn arb_leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        prop::sample::select(VARS.to_vec()).prop_map(Expr::var),
        prop::sample::select(PARAMS.to_vec()).prop_map(Expr::param),
        (0i64..5).prop_map(Expr::int),
        (1i64..5, 2i64..5).prop_map(|(n, d)| Expr::ratio(n, d)),
    ]
}

/// Proptest strategy mirroring [`fuzz_expr`] without `log`/`sqrt`.
pub fn arb_expr() -> impl Strategy<Value = Expr> {
    arb_leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::binary(BinaryOp::Add, l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::binary(BinaryOp::Sub, l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::binary(BinaryOp::Mul, l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::binary(BinaryOp::Div, l, r)),
            (inner.clone(), 0i64..4).prop_map(|(b, n)| Expr::pow(b, Expr::int(n))),
            inner.clone().prop_map(|e| Expr::unary(UnaryOp::Neg, e)),
            inner.clone().prop_map(|e| Expr::unary(UnaryOp::Sin, e)),
            inner.clone().prop_map(|e| Expr::unary(UnaryOp::Cos, e)),
            inner.prop_map(Expr::exp),
        ]
    })
}

/// False when nudging every input by a relative `1e-12` moves `e` by more
/// than `tol`: near a pole f64 evaluation itself is not trustworthy there.
pub fn well_conditioned(e: &Expr, at: &HashMap<Name, f64>, tol: f64) -> bool {
    let nudged: HashMap<Name, f64> = at.iter().map(|(k, v)| (k.clone(), v * (1.0 + 1e-12))).collect();
    match (eval(e, at), eval(e, &nudged)) {
        (Some(a), Some(b)) => close(a, b, tol),
        _ => false,
    }
}
