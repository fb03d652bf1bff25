//! Immutable expression trees.
//!
//! Constants are exact rationals. Binary operators stay binary at the tree
//! level so that every node is an insertion site; n-ary flattening only
//! happens inside the canonical form (see [`crate::canon`]).

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::scalar::Real;
use crate::Rational;

pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Neg,
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl UnaryOp {
    pub const FUNCTIONS: [UnaryOp; 5] =
        [UnaryOp::Exp, UnaryOp::Log, UnaryOp::Sin, UnaryOp::Cos, UnaryOp::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<UnaryOp> {
        Some(match s {
            "neg" => UnaryOp::Neg,
            "exp" => UnaryOp::Exp,
            "log" | "ln" => UnaryOp::Log,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "sqrt" => UnaryOp::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Add => "add",
            BinaryOp::Sub => "sub",
            BinaryOp::Mul => "mul",
            BinaryOp::Div => "div",
            BinaryOp::Pow => "pow",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinaryOp> {
        Some(match s {
            "+" | "add" => BinaryOp::Add,
            "-" | "sub" => BinaryOp::Sub,
            "*" | "mul" => BinaryOp::Mul,
            "/" | "div" => BinaryOp::Div,
            "^" | "pow" => BinaryOp::Pow,
            _ => return None,
        })
    }
}

/// Partial derivative of the unknown field, e.g. `u_xx` or `u_xt`.
///
/// `vars` is kept sorted, so mixed partials that differ only in order are
/// the same atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DerivAtom {
    pub unknown: Name,
    pub vars: Vec<Name>,
}

impl DerivAtom {
    pub fn new(unknown: Name, mut vars: Vec<Name>) -> Self {
        vars.sort();
        DerivAtom { unknown, vars }
    }

    pub fn order(&self) -> usize {
        self.vars.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Const(Rational),
    Var(Name),
    Param(Name),
    /// The unknown field itself (`u`), only meaningful inside an operator.
    Field(Name),
    Deriv(DerivAtom),
    /// Group derivative `Dxx(...)`, applied after the unknown is substituted.
    Diff(Vec<Name>, Arc<Expr>),
    Unary(UnaryOp, Arc<Expr>),
    Binary(BinaryOp, Arc<Expr>, Arc<Expr>),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Const(Rational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::Const(Rational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn var(s: &str) -> Expr {
        Expr::Var(name(s))
    }

    pub fn param(s: &str) -> Expr {
        Expr::Param(name(s))
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Expr {
        Expr::Unary(op, Arc::new(e))
    }

    pub fn binary(op: BinaryOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Arc::new(l), Arc::new(r))
    }

    pub fn exp(e: Expr) -> Expr {
        Expr::unary(UnaryOp::Exp, e)
    }

    pub fn pow(base: Expr, exponent: Expr) -> Expr {
        Expr::binary(BinaryOp::Pow, base, exponent)
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_leaf(&self) -> bool {
        matches!(
            self,
            Expr::Const(_) | Expr::Var(_) | Expr::Param(_) | Expr::Field(_) | Expr::Deriv(_)
        )
    }

    pub fn children(&self) -> Vec<&Arc<Expr>> {
        match self {
            Expr::Unary(_, c) | Expr::Diff(_, c) => vec![c],
            Expr::Binary(_, l, r) => vec![l, r],
            _ => vec![],
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn params(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Param(p) = e {
                out.insert(p.clone());
            }
        });
        out
    }

    pub fn vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Var(v) = e {
                out.insert(v.clone());
            }
        });
        out
    }

    pub fn contains_var(&self, v: &str) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(e, Expr::Var(n) if &**n == v) {
                found = true;
            }
        });
        found
    }

    pub fn contains_param(&self, p: &str) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(e, Expr::Param(n) if &**n == p) {
                found = true;
            }
        });
        found
    }

    /// True when the tree mentions the unknown field or any of its derivatives.
    pub fn mentions_unknown(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(e, Expr::Field(_) | Expr::Deriv(_) | Expr::Diff(..)) {
                found = true;
            }
        });
        found
    }

    /// Replaces every leaf for which `f` returns `Some`.
    pub fn map_leaves(&self, f: &impl Fn(&Expr) -> Option<Expr>) -> Expr {
        if let Some(r) = f(self) {
            return r;
        }
        match self {
            Expr::Unary(op, c) => Expr::unary(*op, c.map_leaves(f)),
            Expr::Diff(vs, c) => Expr::Diff(vs.clone(), Arc::new(c.map_leaves(f))),
            Expr::Binary(op, l, r) => Expr::binary(*op, l.map_leaves(f), r.map_leaves(f)),
            _ => self.clone(),
        }
    }

    pub fn substitute_params<V: AsRef<Expr>>(&self, map: &HashMap<Name, V>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        self.map_leaves(&|e| match e {
            Expr::Param(p) => map.get(p).map(|v| v.as_ref().clone()),
            _ => None,
        })
    }

    pub fn substitute_var(&self, var: &str, value: &Expr) -> Expr {
        self.map_leaves(&|e| match e {
            Expr::Var(v) if &**v == var => Some(value.clone()),
            _ => None,
        })
    }

    pub fn rename_params(&self, map: &HashMap<Name, Name>) -> Expr {
        self.map_leaves(&|e| match e {
            Expr::Param(p) => map.get(p).map(|n| Expr::Param(n.clone())),
            _ => None,
        })
    }

    /// Prefix s-expression, e.g. `(exp (+ x (* a t)))`.
    pub fn to_sexp(&self) -> String {
        let mut s = String::new();
        self.write_sexp(&mut s);
        s
    }

    fn write_sexp(&self, out: &mut String) {
        match self {
            Expr::Const(c) => out.push_str(&c.to_string()),
            Expr::Var(n) | Expr::Param(n) | Expr::Field(n) => out.push_str(n),
            Expr::Deriv(d) => {
                out.push_str(&d.unknown);
                out.push('_');
                for v in &d.vars {
                    out.push_str(v);
                }
            }
            Expr::Diff(vs, c) => {
                out.push_str("(D (");
                out.push_str(&vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "));
                out.push_str(") ");
                c.write_sexp(out);
                out.push(')');
            }
            Expr::Unary(op, c) => {
                out.push('(');
                out.push_str(op.name());
                out.push(' ');
                c.write_sexp(out);
                out.push(')');
            }
            Expr::Binary(op, l, r) => {
                out.push('(');
                out.push_str(op.symbol());
                out.push(' ');
                l.write_sexp(out);
                out.push(' ');
                r.write_sexp(out);
                out.push(')');
            }
        }
    }

    pub fn eval_numeric<F: Real>(&self, bindings: &HashMap<Name, F>) -> Result<F, EvalError> {
        self.eval_with(bindings, F::zero())
    }

    /// Like [`Expr::eval_numeric`] but treats any divisor with magnitude
    /// at or below `min_denominator` as a division by zero.
    pub fn eval_with<F: Real>(
        &self,
        bindings: &HashMap<Name, F>,
        min_denominator: F,
    ) -> Result<F, EvalError> {
        let v = match self {
            Expr::Const(c) => F::from_rational(c),
            Expr::Var(n) | Expr::Param(n) => *bindings
                .get(n)
                .ok_or_else(|| EvalError::Unbound(n.to_string()))?,
            Expr::Field(_) | Expr::Deriv(_) | Expr::Diff(..) => {
                return Err(EvalError::Unevaluable(self.to_string()))
            }
            Expr::Unary(op, c) => {
                let x = c.eval_with(bindings, min_denominator)?;
                match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                    UnaryOp::Log => {
                        if x <= F::zero() {
                            return Err(EvalError::Undefined("log of non-positive value"));
                        }
                        x.ln()
                    }
                    UnaryOp::Sqrt => {
                        if x < F::zero() {
                            return Err(EvalError::Undefined("sqrt of negative value"));
                        }
                        x.sqrt()
                    }
                }
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval_with(bindings, min_denominator)?;
                match op {
                    BinaryOp::Pow => eval_pow(a, r, bindings, min_denominator)?,
                    _ => {
                        let b = r.eval_with(bindings, min_denominator)?;
                        match op {
                            BinaryOp::Add => a + b,
                            BinaryOp::Sub => a - b,
                            BinaryOp::Mul => a * b,
                            BinaryOp::Div => {
                                if b.abs() <= min_denominator {
                                    return Err(EvalError::Undefined("division by zero"));
                                }
                                a / b
                            }
                            BinaryOp::Pow => unreachable!(),
                        }
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Undefined("non-finite value"))
        }
    }
}

fn eval_pow<F: Real>(
    base: F,
    exponent: &Expr,
    bindings: &HashMap<Name, F>,
    min_denominator: F,
) -> Result<F, EvalError> {
    if let Expr::Const(c) = exponent {
        if c.is_integer() {
            let n = c.to_integer().to_i32().ok_or(EvalError::Undefined("exponent too large"))?;
            if n < 0 && base.abs() <= min_denominator {
                return Err(EvalError::Undefined("division by zero"));
            }
            return Ok(base.powi(n));
        }
    }
    let e = exponent.eval_with(bindings, min_denominator)?;
    if base < F::zero() {
        return Err(EvalError::Undefined("non-integer power of negative value"));
    }
    if base.is_zero() && e < F::zero() {
        return Err(EvalError::Undefined("division by zero"));
    }
    Ok(base.powf(e))
}

impl AsRef<Expr> for Expr {
    fn as_ref(&self) -> &Expr {
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("undefined: {0}")]
    Undefined(&'static str),
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("cannot evaluate `{0}` numerically")]
    Unevaluable(String),
}

macro_rules! impl_binop {
    ($tr:ident, $method:ident, $op:expr) => {
        impl std::ops::$tr for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
    };
}

impl_binop!(Add, add, BinaryOp::Add);
impl_binop!(Sub, sub, BinaryOp::Sub);
impl_binop!(Mul, mul, BinaryOp::Mul);
impl_binop!(Div, div, BinaryOp::Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}

// Formatting precedence levels. Sums < products < unary minus < powers < atoms.
const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) => {
            if !c.is_integer() {
                PREC_PRODUCT
            } else if c.is_negative() {
                PREC_NEG
            } else {
                PREC_ATOM
            }
        }
        Expr::Unary(UnaryOp::Neg, _) => PREC_NEG,
        Expr::Binary(op, ..) => match op {
            BinaryOp::Add | BinaryOp::Sub => PREC_SUM,
            BinaryOp::Mul | BinaryOp::Div => PREC_PRODUCT,
            BinaryOp::Pow => PREC_POW,
        },
        _ => PREC_ATOM,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(n) | Expr::Param(n) | Expr::Field(n) => f.write_str(n),
            Expr::Deriv(d) => {
                write!(f, "{}_", d.unknown)?;
                d.vars.iter().try_for_each(|v| f.write_str(v))
            }
            Expr::Diff(vs, c) => {
                f.write_str("D")?;
                vs.iter().try_for_each(|v| f.write_str(v))?;
                write!(f, "({c})")
            }
            Expr::Unary(UnaryOp::Neg, c) => {
                f.write_str("-")?;
                write_operand(f, c, precedence(c) < PREC_NEG)
            }
            Expr::Unary(op, c) => write!(f, "{}({c})", op.name()),
            Expr::Binary(op, l, r) => {
                let p = precedence(self);
                match op {
                    BinaryOp::Pow => {
                        write_operand(f, l, precedence(l) <= PREC_POW)?;
                        f.write_str("^")?;
                        write_operand(f, r, precedence(r) < PREC_NEG)
                    }
                    BinaryOp::Add | BinaryOp::Sub => {
                        write_operand(f, l, precedence(l) < p)?;
                        write!(f, " {} ", op.symbol())?;
                        write_operand(f, r, precedence(r) <= p)
                    }
                    BinaryOp::Mul | BinaryOp::Div => {
                        write_operand(f, l, precedence(l) < p)?;
                        f.write_str(op.symbol())?;
                        write_operand(f, r, precedence(r) <= p)
                    }
                }
            }
        }
    }
}

/// One step of a path from the root of an expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    Left,
    Right,
    Only,
}

/// Address of a node inside an [`Expr`], as a path from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PositionId(pub Vec<Step>);

impl PositionId {
    pub fn root() -> Self {
        PositionId(Vec::new())
    }

    pub fn child(&self, step: Step) -> Self {
        let mut p = self.0.clone();
        p.push(step);
        PositionId(p)
    }

    pub fn resolve<'a>(&self, e: &'a Expr) -> Option<&'a Expr> {
        let mut cur = e;
        for step in &self.0 {
            cur = match (cur, step) {
                (Expr::Unary(_, c), Step::Only) | (Expr::Diff(_, c), Step::Only) => c,
                (Expr::Binary(_, l, _), Step::Left) => l,
                (Expr::Binary(_, _, r), Step::Right) => r,
                _ => return None,
            };
        }
        Some(cur)
    }

    pub fn is_prefix_of(&self, other: &PositionId) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for PositionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("root")?;
        for s in &self.0 {
            f.write_str(match s {
                Step::Left => ".left",
                Step::Right => ".right",
                Step::Only => ".only",
            })?;
        }
        Ok(())
    }
}

/// Preorder enumeration of every node position in `e`.
pub fn positions(e: &Expr) -> Vec<PositionId> {
    fn go(e: &Expr, at: PositionId, out: &mut Vec<PositionId>) {
        out.push(at.clone());
        match e {
            Expr::Unary(_, c) | Expr::Diff(_, c) => go(c, at.child(Step::Only), out),
            Expr::Binary(_, l, r) => {
                go(l, at.child(Step::Left), out);
                go(r, at.child(Step::Right), out);
            }
            _ => {}
        }
    }
    let mut out = Vec::with_capacity(e.node_count());
    go(e, PositionId::root(), &mut out);
    out
}

/// Exact tree equality; `x + 1` and `1 + x` are different trees.
pub fn structural_eq(a: &Expr, b: &Expr) -> bool {
    a == b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bind(pairs: &[(&str, f64)]) -> HashMap<Name, f64> {
        pairs.iter().map(|(k, v)| (name(k), *v)).collect()
    }

    #[test]
    fn eval_examples() {
        let e = Expr::exp(Expr::var("x"));
        assert_eq!(e.eval_numeric(&bind(&[("x", 0.0)])), Ok(1.0));

        let e = (Expr::param("B") + Expr::var("x")) / (Expr::param("A") + Expr::var("t"));
        let v = e.eval_numeric(&bind(&[("A", 1.0), ("B", 1.0), ("x", 2.0), ("t", 0.0)]));
        assert_eq!(v, Ok(3.0));

        let e = Expr::one() / Expr::var("x");
        assert!(matches!(e.eval_numeric(&bind(&[("x", 0.0)])), Err(EvalError::Undefined(_))));
    }

    #[test]
    fn eval_domain_errors() {
        let b = bind(&[("x", -1.0)]);
        assert!(Expr::unary(UnaryOp::Log, Expr::var("x")).eval_numeric(&b).is_err());
        assert!(Expr::unary(UnaryOp::Sqrt, Expr::var("x")).eval_numeric(&b).is_err());
        assert!(Expr::var("y").eval_numeric(&b).is_err());
        let e = Expr::pow(Expr::var("x"), Expr::int(2));
        assert_eq!(e.eval_numeric(&b), Ok(1.0));
    }

    #[test]
    fn eval_is_generic_over_float_width() {
        let e = Expr::exp(Expr::var("x")) * Expr::int(2);
        let b32: HashMap<Name, f32> = [(name("x"), 0.0f32)].into_iter().collect();
        assert_eq!(e.eval_numeric(&b32), Ok(2.0f32));
    }

    #[test]
    fn positions_examples() {
        assert_eq!(positions(&Expr::var("x")), vec![PositionId::root()]);
        let e = Expr::exp(Expr::var("x"));
        assert_eq!(
            positions(&e),
            vec![PositionId::root(), PositionId::root().child(Step::Only)]
        );
        assert_eq!(positions(&(Expr::var("x") + Expr::int(1))).len(), 3);
    }

    #[test]
    fn positions_resolve_to_nodes() {
        let e = Expr::param("A") * Expr::exp(Expr::var("x") / Expr::int(2));
        let ps = positions(&e);
        assert_eq!(ps.len(), e.node_count());
        for p in &ps {
            assert!(p.resolve(&e).is_some());
        }
        assert_eq!(ps[4].resolve(&e), Some(&Expr::var("x")));
        assert!(PositionId(vec![Step::Only]).resolve(&e).is_none());
    }

    #[test]
    fn format_examples() {
        assert_eq!((Expr::var("x") + Expr::int(1)).to_string(), "x + 1");
        let e = Expr::exp(Expr::var("x") + Expr::param("a") * Expr::var("t"));
        assert_eq!(e.to_string(), "exp(x + a*t)");
        assert!(!structural_eq(
            &(Expr::var("x") + Expr::int(1)),
            &(Expr::int(1) + Expr::var("x"))
        ));
    }

    #[test]
    fn format_parenthesizes() {
        let x = || Expr::var("x");
        let y = || Expr::var("y");
        assert_eq!((x() - (y() + x())).to_string(), "x - (y + x)");
        assert_eq!(((x() + y()) * x()).to_string(), "(x + y)*x");
        assert_eq!(Expr::pow(-x(), Expr::int(2)).to_string(), "(-x)^2");
        assert_eq!((-Expr::pow(x(), Expr::int(2))).to_string(), "-x^2");
        assert_eq!((x() / (y() * x())).to_string(), "x/(y*x)");
        assert_eq!(Expr::pow(Expr::ratio(1, 3), x()).to_string(), "(1/3)^x");
        assert_eq!(Expr::pow(x(), Expr::int(-1)).to_string(), "x^-1");
    }

    #[test]
    fn sexp_of_heat_solution() {
        let e = Expr::exp(Expr::var("x") + Expr::param("a") * Expr::var("t"));
        assert_eq!(e.to_sexp(), "(exp (+ x (* a t)))");
        assert_eq!((-Expr::ratio(-1, 3)).to_sexp(), "(neg -1/3)");
    }
}
