//! Solving for undetermined parameters so that a residual vanishes.
//!
//! The numerator of the residual is split into coefficients of its
//! basis monomials (everything that is not an unknown parameter). Each
//! coefficient must vanish, giving a small polynomial system in the
//! unknowns. It is solved by linear elimination, splitting off monomial
//! factors, and exact quadratic roots. Every solution is checked by
//! substituting it back.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::canon::{canonicalize, to_expr, CanonError};
use crate::expr::{Expr, Name};
use crate::gcd::{exact_div, monomial_content};
use crate::poly::{Exponent, Gen};
use crate::ratfun::substitute_poly;
use crate::{RatFun, RatPoly, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResolveLimits {
    /// Largest number of unknowns that may appear in the system.
    pub max_unknowns: usize,
    /// Largest degree of any unknown in any equation.
    pub max_degree: i64,
    /// Cap on explored branches.
    pub max_branches: usize,
}

impl Default for ResolveLimits {
    fn default() -> Self {
        ResolveLimits { max_unknowns: 3, max_degree: 2, max_branches: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Unresolvable {
    #[error("{found} unknown parameters appear, at most {limit} are solved for")]
    TooManyUnknowns { found: usize, limit: usize },
    #[error("`{param}` appears with degree {degree}")]
    DegreeTooHigh { param: String, degree: i64 },
    #[error("no parameter values make the residual vanish")]
    NoSolution,
    #[error(transparent)]
    Canon(#[from] CanonError),
}

pub type Assignment = BTreeMap<Name, Expr>;

type Partial = Vec<(Name, RatFun)>;

struct Solver<'a> {
    limits: &'a ResolveLimits,
    branches: usize,
}

fn param_gen(u: &Name) -> Gen {
    Gen::Param(u.clone())
}

fn degree(eq: &RatPoly, u: &Name) -> i64 {
    eq.degree_in(&param_gen(u)).to_integer()
}

fn present<'n>(eq: &RatPoly, unknowns: &'n [Name]) -> Vec<&'n Name> {
    unknowns.iter().filter(|u| eq.contains_gen(&param_gen(u))).collect()
}

fn substitute(eqs: &[RatPoly], u: &Name, value: &RatFun) -> Result<Vec<RatPoly>, CanonError> {
    let g = param_gen(u);
    eqs.iter()
        .map(|e| {
            if !e.contains_gen(&g) {
                return Ok(e.clone());
            }
            Ok(substitute_poly(e, &|h: &Gen| (*h == g).then(|| value.clone()))?.num().clone())
        })
        .collect()
}

fn without(unknowns: &[Name], u: &Name) -> Vec<Name> {
    unknowns.iter().filter(|v| *v != u).cloned().collect()
}

fn tidy_system(eqs: Vec<RatPoly>) -> Vec<RatPoly> {
    let mut out: Vec<RatPoly> = Vec::new();
    for e in eqs {
        if e.is_zero() {
            continue;
        }
        let e = e.monic();
        if !out.contains(&e) {
            out.push(e);
        }
    }
    out
}

impl Solver<'_> {
    fn solve(&mut self, eqs: Vec<RatPoly>, unknowns: &[Name]) -> Result<Vec<Partial>, CanonError> {
        self.branches += 1;
        if self.branches > self.limits.max_branches {
            return Ok(Vec::new());
        }
        let eqs = tidy_system(eqs);
        if eqs.is_empty() {
            return Ok(vec![Vec::new()]);
        }
        if eqs.iter().any(|e| present(e, unknowns).is_empty()) {
            return Ok(Vec::new());
        }

        // a*u + b = 0 with a free of unknowns
        for u in unknowns {
            for e in &eqs {
                if degree(e, u) != 1 {
                    continue;
                }
                let coeffs = e.coeffs_in(&param_gen(u));
                let a = &coeffs[&1];
                if !present(a, unknowns).is_empty() {
                    continue;
                }
                let b = coeffs.get(&0).cloned().unwrap_or_default();
                let value = RatFun::new(-&b, a.clone())?;
                return self.assign(&eqs, unknowns, u, value);
            }
        }

        // u^k * f = 0 splits into f = 0 or u = 0
        let gens: BTreeSet<Gen> = unknowns.iter().map(param_gen).collect();
        for (i, e) in eqs.iter().enumerate() {
            let content = monomial_content(e, &gens);
            if content.is_one() {
                continue;
            }
            let mut out = Vec::new();
            let cofactor = exact_div(e, &RatPoly::term(content.clone(), Rational::from_integer(1.into())))
                .expect("monomial content divides");
            let mut reduced = eqs.clone();
            reduced[i] = cofactor;
            out.extend(self.solve(reduced, unknowns)?);
            for (g, _) in content.pairs() {
                let Gen::Param(u) = g else { continue };
                out.extend(self.assign(&eqs, unknowns, u, RatFun::zero())?);
            }
            return Ok(out);
        }

        // a*u^2 + b*u + c = 0 in a single unknown
        for e in &eqs {
            let here = present(e, unknowns);
            let [u] = here.as_slice() else { continue };
            if degree(e, u) != 2 {
                continue;
            }
            let coeffs = e.coeffs_in(&param_gen(u));
            let zero = RatPoly::zero();
            let (mut a, mut b, mut c) =
                (coeffs[&2].clone(), coeffs.get(&1).unwrap_or(&zero).clone(), coeffs.get(&0).unwrap_or(&zero).clone());
            // the '+' root comes first when the leading coefficient is positive
            if a.leading_coefficient() < Rational::from_integer(0.into()) {
                (a, b, c) = (-&a, -&b, -&c);
            }
            let (a, b, c) = (&a, &b, &c);
            let four = RatPoly::constant(Rational::from_integer(4.into()));
            let disc = &(b * b) - &(&four * &(a * c));
            let Some(root) = disc.sqrt() else {
                return Ok(Vec::new());
            };
            let two_a = a.scale(&Rational::from_integer(2.into()));
            let mut out = Vec::new();
            let mut roots = vec![RatFun::new(&root - b, two_a.clone())?];
            if !root.is_zero() {
                roots.push(RatFun::new(&(-&root) - b, two_a)?);
            }
            for value in roots {
                out.extend(self.assign(&eqs, unknowns, u, value)?);
            }
            return Ok(out);
        }
        Ok(Vec::new())
    }

    fn assign(
        &mut self,
        eqs: &[RatPoly],
        unknowns: &[Name],
        u: &Name,
        value: RatFun,
    ) -> Result<Vec<Partial>, CanonError> {
        let next = substitute(eqs, u, &value)?;
        let rest = without(unknowns, u);
        let mut out = Vec::new();
        for mut sol in self.solve(next, &rest)? {
            sol.push((u.clone(), value.clone()));
            out.push(sol);
        }
        Ok(out)
    }
}

/// Turns an elimination chain into explicit values. The chain lists the
/// innermost unknown first; each value mentions only earlier entries.
fn back_substitute(chain: Partial) -> Result<BTreeMap<Name, RatFun>, CanonError> {
    let mut done: BTreeMap<Name, RatFun> = BTreeMap::new();
    for (u, v) in chain {
        let known = done.clone();
        let v = v.substitute_gens(&|g: &Gen| match g {
            Gen::Param(p) => known.get(p).cloned(),
            _ => None,
        })?;
        done.insert(u, v);
    }
    Ok(done)
}

/// Equations in the unknowns: one per basis monomial of the numerator.
/// `coefficient` decides which generators belong to the coefficient ring.
pub fn equations(residual: &RatFun, coefficient: impl Fn(&Gen) -> bool) -> Vec<RatPoly> {
    residual.num().group_by(coefficient).into_values().collect()
}

fn substitute_expr(e: &Expr, values: &Assignment) -> Expr {
    let map: HashMap<Name, Expr> = values.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    e.substitute_params(&map)
}

/// All solutions found for `unknowns` (listed in priority order), each
/// verified by substitution. `coefficient` selects the generators that
/// may appear in equation coefficients; everything else forms the basis.
pub fn solve_for(
    residual: &RatFun,
    unknowns: &[Name],
    coefficient: impl Fn(&Gen) -> bool,
    limits: &ResolveLimits,
) -> Result<Vec<Assignment>, Unresolvable> {
    if residual.is_zero() {
        return Ok(vec![Assignment::new()]);
    }
    let eqs = equations(residual, coefficient);
    let active: Vec<Name> = unknowns
        .iter()
        .filter(|u| eqs.iter().any(|e| e.contains_gen(&param_gen(u))))
        .cloned()
        .collect();
    if active.len() > limits.max_unknowns {
        return Err(Unresolvable::TooManyUnknowns { found: active.len(), limit: limits.max_unknowns });
    }
    for e in &eqs {
        for u in &active {
            let d = e.degree_in(&param_gen(u));
            if d > Exponent::from_integer(limits.max_degree) {
                return Err(Unresolvable::DegreeTooHigh { param: u.to_string(), degree: d.to_integer() });
            }
        }
    }
    let mut solver = Solver { limits, branches: 0 };
    let chains = solver.solve(eqs, &active)?;
    let original = to_expr(residual);
    let mut out: Vec<Assignment> = Vec::new();
    for chain in chains {
        let values = back_substitute(chain)?;
        let values: Assignment = values.iter().map(|(k, v)| (k.clone(), to_expr(v))).collect();
        let check = substitute_expr(&original, &values);
        match canonicalize::<Rational>(&check) {
            Ok(r) if r.is_zero() && !out.contains(&values) => out.push(values),
            _ => {}
        }
    }
    if out.is_empty() {
        return Err(Unresolvable::NoSolution);
    }
    Ok(out)
}

/// Values for `fresh` that make `residual` vanish identically; the first
/// solution found. Other parameters are treated as symbols.
pub fn resolve_parameters(residual: &Expr, fresh: &[Name]) -> Result<Assignment, Unresolvable> {
    let r = canonicalize::<Rational>(residual)?;
    let mut all = solve_for(&r, fresh, Gen::is_param, &ResolveLimits::default())?;
    Ok(all.swap_remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::name;
    use crate::parse::parse_expr;

    fn p(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    fn names(list: &[&str]) -> Vec<Name> {
        list.iter().map(|s| name(s)).collect()
    }

    #[test]
    fn linear_in_one_fresh_param() {
        let sol = resolve_parameters(&p("(c - a)*exp(x + c*t)"), &names(&["c"])).unwrap();
        assert_eq!(sol[&name("c")], p("a"));
        let sol = resolve_parameters(&p("(3*c/4 - 1/4)*A*exp(c*t + x/2)"), &names(&["c"])).unwrap();
        assert_eq!(sol[&name("c")], Expr::ratio(1, 3));
    }

    #[test]
    fn quadratic_roots() {
        let r = canonicalize::<Rational>(&p("(c^2 - a^2)*exp(x + c*t)")).unwrap();
        let sols = solve_for(&r, &names(&["c"]), Gen::is_param, &ResolveLimits::default()).unwrap();
        assert_eq!(sols.len(), 2);
        assert_eq!(sols[0][&name("c")], p("a"));
        assert_eq!(sols[1][&name("c")], -p("a"));
    }

    #[test]
    fn factor_branches() {
        let r = canonicalize::<Rational>(&p("(A^2 - A)*(x + B)/(p + t)^2")).unwrap();
        let sols = solve_for(&r, &names(&["p", "A", "B"]), Gen::is_param, &ResolveLimits::default()).unwrap();
        assert_eq!(sols[0].get(&name("A")), Some(&Expr::one()));
        assert!(sols.iter().any(|s| s.get(&name("A")) == Some(&Expr::zero())));
    }

    #[test]
    fn inconsistent_and_limits() {
        assert_eq!(
            resolve_parameters(&p("exp(x + c*t) + 1 + 0*c"), &names(&["c"])),
            Err(Unresolvable::NoSolution)
        );
        assert!(matches!(
            resolve_parameters(&p("c^3 - a"), &names(&["c"])),
            Err(Unresolvable::DegreeTooHigh { .. })
        ));
        assert!(matches!(
            resolve_parameters(&p("c*x + d*y + e*t + f"), &names(&["c", "d", "e", "f"])),
            Err(Unresolvable::TooManyUnknowns { found: 4, limit: 3 })
        ));
    }

    #[test]
    fn chained_unknowns() {
        let sol = resolve_parameters(&p("(c - 2*a*B) + (B - 3)*x"), &names(&["c", "B"])).unwrap();
        assert_eq!(sol[&name("B")], Expr::int(3));
        assert_eq!(canonicalize::<Rational>(&(sol[&name("c")].clone() - p("6*a"))).unwrap(), RatFun::zero());
    }
}
