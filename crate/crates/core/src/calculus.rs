//! Differentiation, substitution of a candidate for the unknown, and the
//! PDE residual.

use std::collections::HashMap;
use std::sync::Arc;

use crate::canon::{canonicalize, canonicalize_with, derivative, to_expr, CanonError};
use crate::expr::{Expr, Name};
use crate::problem::PdeProblem;
use crate::{RatFun, Rational};

/// Exact partial derivative `∂e/∂v`, simplified.
pub fn differentiate(e: &Expr, v: &str) -> Result<Expr, CanonError> {
    let r = canonicalize::<Rational>(e)?;
    Ok(to_expr(&derivative(&r, v)?))
}

/// Iterated derivative of a canonical form.
pub fn differentiate_form(r: &RatFun, vars: &[Name]) -> Result<RatFun, CanonError> {
    let mut out = r.clone();
    for v in vars {
        out = derivative(&out, v)?;
    }
    Ok(out)
}

/// Derivatives of one candidate, cached by (sorted) variable list.
struct DerivCache {
    table: HashMap<Vec<Name>, RatFun>,
}

impl DerivCache {
    fn new(candidate: RatFun) -> Self {
        let mut table = HashMap::new();
        table.insert(Vec::new(), candidate);
        DerivCache { table }
    }

    fn get(&mut self, vars: &[Name]) -> Result<RatFun, CanonError> {
        if let Some(r) = self.table.get(vars) {
            return Ok(r.clone());
        }
        let (last, prefix) = vars.split_last().expect("empty list is cached");
        let base = self.get(prefix)?;
        let d = derivative(&base, last)?;
        self.table.insert(vars.to_vec(), d.clone());
        Ok(d)
    }
}

fn lower(
    e: &Expr,
    unknown: &str,
    cache: &mut DerivCache,
) -> Result<RatFun, CanonError> {
    canonicalize_with(e, &mut |node| match node {
        Expr::Field(u) if &**u == unknown => Some(cache.get(&[])),
        Expr::Deriv(d) if &*d.unknown == unknown => Some(cache.get(&d.vars)),
        Expr::Diff(vs, body) => Some(lower(body, unknown, cache).and_then(|b| differentiate_form(&b, vs))),
        _ => None,
    })
}

/// Canonical form of the operator with `candidate` substituted for the
/// unknown `unknown`. Group derivatives `D..(...)` are applied after
/// substitution.
pub fn residual_form(operator: &Expr, unknown: &str, candidate: &Expr) -> Result<RatFun, CanonError> {
    let c = canonicalize::<Rational>(candidate)?;
    residual_of_form(operator, unknown, c)
}

pub fn residual_of_form(operator: &Expr, unknown: &str, candidate: RatFun) -> Result<RatFun, CanonError> {
    let mut cache = DerivCache::new(candidate);
    lower(operator, unknown, &mut cache)
}

/// Replaces the unknown and its partials in `operator` by `candidate` and
/// its (simplified) derivatives. The result contains no derivative atoms.
pub fn substitute_unknown(operator: &Expr, unknown: &str, candidate: &Expr) -> Result<Expr, CanonError> {
    let c = canonicalize::<Rational>(candidate)?;
    let mut cache = DerivCache::new(c);
    substitute_rec(operator, unknown, candidate, &mut cache)
}

fn substitute_rec(
    e: &Expr,
    unknown: &str,
    candidate: &Expr,
    cache: &mut DerivCache,
) -> Result<Expr, CanonError> {
    Ok(match e {
        Expr::Field(u) if &**u == unknown => candidate.clone(),
        Expr::Deriv(d) if &*d.unknown == unknown => to_expr(&cache.get(&d.vars)?),
        Expr::Field(_) | Expr::Deriv(_) => return Err(CanonError::UnknownField(e.to_string())),
        Expr::Diff(vs, body) => {
            let inner = substitute_rec(body, unknown, candidate, cache)?;
            let r = canonicalize::<Rational>(&inner)?;
            to_expr(&differentiate_form(&r, vs)?)
        }
        Expr::Unary(op, c) => Expr::Unary(*op, Arc::new(substitute_rec(c, unknown, candidate, cache)?)),
        Expr::Binary(op, l, r) => Expr::Binary(
            *op,
            Arc::new(substitute_rec(l, unknown, candidate, cache)?),
            Arc::new(substitute_rec(r, unknown, candidate, cache)?),
        ),
        _ => e.clone(),
    })
}

/// The simplified residual `N[candidate]`.
pub fn residual(problem: &PdeProblem, candidate: &Expr) -> Result<Expr, CanonError> {
    let r = residual_form(&problem.operator, &problem.unknown, candidate)?;
    Ok(to_expr(&r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::name;
    use crate::parse::{parse_expr, parse_expr_with, ParseContext};
    use crate::simplify::simplify;

    fn p(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    fn op(s: &str) -> Expr {
        let ctx = ParseContext::new(vec![name("x"), name("t")], Some(name("u")));
        parse_expr_with(s, &ctx).unwrap()
    }

    fn same(a: &Expr, b: &str) {
        assert_eq!(simplify(a), simplify(&p(b)), "{a} vs {b}");
    }

    #[test]
    fn derivative_examples() {
        same(&differentiate(&p("exp(x + a*t)"), "x").unwrap(), "exp(x + a*t)");
        same(&differentiate(&p("(B+x)/(A+t)"), "t").unwrap(), "-(B+x)/(A+t)^2");
        let dx = differentiate(&p("A + 2*a*B*t + B*x^2"), "x").unwrap();
        same(&differentiate(&dx, "x").unwrap(), "2*B");
        assert!(differentiate(&p("u_x"), "x").is_err());
    }

    #[test]
    fn heat_substitution() {
        let heat = op("u_t - a*u_xx");
        let s = substitute_unknown(&heat, "u", &p("exp(x + a*t)")).unwrap();
        same(&s, "a*exp(x+a*t) - a*exp(x+a*t)");
        assert!(residual_form(&heat, "u", &p("exp(x + a*t)")).unwrap().is_zero());
        let r = residual_form(&heat, "u", &p("exp(x + 2*a*t)")).unwrap();
        assert_eq!(to_expr(&r), simplify(&p("a*exp(x + 2*a*t)")));
        let r = residual_form(&heat, "u", &p("exp(x + c*t)")).unwrap();
        assert_eq!(to_expr(&r), simplify(&p("(c - a)*exp(x + c*t)")));
    }

    #[test]
    fn group_derivative_operator() {
        let burgers = op("u_t + u*u_x - u_xx - Dxx(u_t + u*u_x)");
        assert!(residual_form(&burgers, "u", &p("(B+x)/(A+t)")).unwrap().is_zero());
        let r = residual_form(&burgers, "u", &p("A*exp(c*t + x/2)")).unwrap();
        assert_eq!(to_expr(&r), simplify(&p("(3*c/4 - 1/4)*A*exp(c*t + x/2)")));
        let s = substitute_unknown(&burgers, "u", &p("(B+x)/(A+t)")).unwrap();
        assert!(!s.mentions_unknown());
        assert_eq!(simplify(&s), Expr::zero());
    }
}
