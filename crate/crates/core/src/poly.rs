//! Sparse multivariate polynomials over a [`Coefficient`] field.
//!
//! Generators are variables, parameters and transcendental kernels. Kernel
//! arguments are stored as canonical expressions, so two kernels are the
//! same generator exactly when their canonical arguments are equal.
//! Exponents are small rationals: exp-kernels form a Laurent (and
//! Puiseux) ring, everything else only ever carries non-negative integers.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::expr::{Expr, Name};
use crate::scalar::Coefficient;

pub type Exponent = Rational64;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    Var(Name),
    Param(Name),
    /// `exp(key)`; the key is a monomial, or a monomial over a denominator.
    Exp(Arc<Expr>),
    Log(Arc<Expr>),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    /// Principal `q`-th root of the argument.
    Root(Arc<Expr>, u32),
}

impl Gen {
    pub fn is_param(&self) -> bool {
        matches!(self, Gen::Param(_))
    }

    pub fn is_exp(&self) -> bool {
        matches!(self, Gen::Exp(_))
    }

    /// The expression a kernel is applied to, if any.
    pub fn argument(&self) -> Option<&Expr> {
        match self {
            Gen::Exp(a) | Gen::Log(a) | Gen::Sin(a) | Gen::Cos(a) | Gen::Root(a, _) => Some(a),
            Gen::Var(_) | Gen::Param(_) => None,
        }
    }

    /// True when the generator can depend on variable `v`.
    pub fn depends_on_var(&self, v: &str) -> bool {
        match self {
            Gen::Var(n) => &**n == v,
            Gen::Param(_) => false,
            _ => self.argument().is_some_and(|a| a.contains_var(v)),
        }
    }

    pub fn mentions_param(&self, p: &str) -> bool {
        match self {
            Gen::Param(n) => &**n == p,
            Gen::Var(_) => false,
            _ => self.argument().is_some_and(|a| a.contains_param(p)),
        }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::Var(n) | Gen::Param(n) => f.write_str(n),
            Gen::Exp(a) => write!(f, "exp({a})"),
            Gen::Log(a) => write!(f, "log({a})"),
            Gen::Sin(a) => write!(f, "sin({a})"),
            Gen::Cos(a) => write!(f, "cos({a})"),
            Gen::Root(a, q) => write!(f, "root{q}({a})"),
        }
    }
}

/// Power product of generators, sorted by generator, no zero exponents.
///
/// Ordered by total degree, then lexicographically on exponent vectors
/// (smaller generators are more significant). This is a monomial order:
/// it is compatible with multiplication.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<(Gen, Exponent)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn gen(g: Gen) -> Self {
        Monomial(vec![(g, Exponent::one())])
    }

    pub fn from_pairs(mut pairs: Vec<(Gen, Exponent)>) -> Self {
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Gen, Exponent)> = Vec::with_capacity(pairs.len());
        for (g, e) in pairs {
            match out.last_mut() {
                Some((lg, le)) if *lg == g => *le += e,
                _ => out.push((g, e)),
            }
        }
        out.retain(|(_, e)| !e.is_zero());
        Monomial(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(Gen, Exponent)] {
        &self.0
    }

    pub fn total_degree(&self) -> Exponent {
        self.0.iter().map(|(_, e)| *e).sum()
    }

    pub fn exponent(&self, g: &Gen) -> Exponent {
        self.0
            .binary_search_by(|(h, _)| h.cmp(g))
            .map(|i| self.0[i].1)
            .unwrap_or_else(|_| Exponent::zero())
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = self.0[i].1 + other.0[j].1;
                    if !e.is_zero() {
                        out.push((self.0[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    pub fn inverse(&self) -> Monomial {
        Monomial(self.0.iter().map(|(g, e)| (g.clone(), -*e)).collect())
    }

    /// `self / other` when every exponent stays non-negative, or the
    /// generator is an exp-kernel (where negative exponents are units).
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let q = self.mul(&other.inverse());
        q.0.iter().all(|(g, e)| g.is_exp() || !Signed::is_negative(e)).then_some(q)
    }

    pub fn pow(&self, n: Exponent) -> Monomial {
        if n.is_zero() {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(g, e)| (g.clone(), *e * n)).collect())
    }

    pub fn without(&self, g: &Gen) -> Monomial {
        Monomial(self.0.iter().filter(|(h, _)| h != g).cloned().collect())
    }

    /// Splits into the part made of generators satisfying `pred` and the rest.
    pub fn split(&self, pred: impl Fn(&Gen) -> bool) -> (Monomial, Monomial) {
        let (a, b): (Vec<_>, Vec<_>) = self.0.iter().cloned().partition(|(g, _)| pred(g));
        (Monomial(a), Monomial(b))
    }

    pub fn map_exponents(&self, f: impl Fn(&Gen, Exponent) -> Exponent) -> Monomial {
        Monomial::from_pairs(self.0.iter().map(|(g, e)| (g.clone(), f(g, *e))).collect())
    }
}

fn lex_cmp(a: &[(Gen, Exponent)], b: &[(Gen, Exponent)]) -> Ordering {
    let zero = Exponent::zero();
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.get(i), b.get(j)) {
            (None, None) => return Ordering::Equal,
            (Some((_, ea)), None) => return ea.cmp(&zero),
            (None, Some((_, eb))) => return zero.cmp(eb),
            (Some((ga, ea)), Some((gb, eb))) => match ga.cmp(gb) {
                Ordering::Less => return ea.cmp(&zero),
                Ordering::Greater => return zero.cmp(eb),
                Ordering::Equal => {
                    if ea != eb {
                        return ea.cmp(eb);
                    }
                    i += 1;
                    j += 1;
                }
            },
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| lex_cmp(&self.0, &other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, (g, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if e.is_one() {
                write!(f, "{g}")?;
            } else {
                write!(f, "{g}^({e})")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly<C> {
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coefficient> Default for Poly<C> {
    fn default() -> Self {
        Poly::zero()
    }
}

impl<C: Coefficient> Poly<C> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Poly::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Poly::term(Monomial::one(), c)
    }

    pub fn gen(g: Gen) -> Self {
        Poly::term(Monomial::gen(g), C::one())
    }

    pub fn term(m: Monomial, c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// The value of a constant polynomial (zero included).
    pub fn as_constant(&self) -> Option<C> {
        match self.terms.len() {
            0 => Some(C::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, C)> {
        self.terms.into_iter()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &C)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coefficient(&self) -> C {
        self.leading_term().map(|(_, c)| c.clone()).unwrap_or_else(C::zero)
    }

    pub fn single_term(&self) -> Option<(&Monomial, &C)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn gens(&self) -> BTreeSet<Gen> {
        self.terms
            .keys()
            .flat_map(|m| m.pairs().iter().map(|(g, _)| g.clone()))
            .collect()
    }

    pub fn contains_gen(&self, g: &Gen) -> bool {
        self.terms.keys().any(|m| !m.exponent(g).is_zero())
    }

    pub fn degree_in(&self, g: &Gen) -> Exponent {
        self.terms.keys().map(|m| m.exponent(g)).max().unwrap_or_else(Exponent::zero)
    }

    pub fn min_exponent_in(&self, g: &Gen) -> Exponent {
        self.terms.keys().map(|m| m.exponent(g)).min().unwrap_or_else(Exponent::zero)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k.clone() * c.clone())).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        if m.is_one() {
            return self.clone();
        }
        Poly::from_terms(self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn map_monomials(&self, f: impl Fn(&Monomial) -> Monomial) -> Self {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (f(m), c.clone())))
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    /// Divides out the leading coefficient.
    pub fn monic(&self) -> Self {
        match self.leading_term() {
            None => Poly::zero(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&(C::one() / c.clone())),
        }
    }

    /// Views `self` as a univariate polynomial in `g` with integer
    /// exponents; coefficients are polynomials free of `g`.
    pub fn coeffs_in(&self, g: &Gen) -> BTreeMap<i64, Poly<C>> {
        let mut out: BTreeMap<i64, Poly<C>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exponent(g);
            debug_assert!(e.is_integer());
            out.entry(e.to_integer()).or_default().add_term(m.without(g), c.clone());
        }
        out
    }

    pub fn from_coeffs(g: &Gen, coeffs: &BTreeMap<i64, Poly<C>>) -> Self {
        let mut p = Poly::zero();
        for (e, c) in coeffs {
            let m = Monomial::from_pairs(vec![(g.clone(), Exponent::from_integer(*e))]);
            for (k, v) in c.terms() {
                p.add_term(k.mul(&m), v.clone());
            }
        }
        p
    }

    /// Groups terms by the part of each monomial not matched by `coef`,
    /// returning `basis monomial -> coefficient polynomial`.
    pub fn group_by(&self, coef: impl Fn(&Gen) -> bool) -> BTreeMap<Monomial, Poly<C>> {
        let mut out: BTreeMap<Monomial, Poly<C>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (inner, basis) = m.split(&coef);
            out.entry(basis).or_default().add_term(inner, c.clone());
        }
        out
    }

    /// Exact square root when `self` is the square of a polynomial.
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (m, c) = self.leading_term()?;
        let half = Exponent::new(1, 2);
        let root_lt = Poly::term(m.pow(half), c.sqrt_exact()?);
        if !m.pairs().iter().all(|(g, e)| g.is_exp() || (*e * half).is_integer()) {
            return None;
        }
        let (lm, lc) = {
            let (a, b) = root_lt.leading_term()?;
            (a.clone(), b.clone())
        };
        let two = C::one() + C::one();
        let mut root = root_lt;
        for _ in 0..=self.len() + 1 {
            let rem = self - &(&root * &root);
            let Some((rm, rc)) = rem.leading_term() else {
                return Some(root);
            };
            let q = rm.div(&lm)?;
            root = &root + &Poly::term(q, rc.clone() / (two.clone() * lc.clone()));
        }
        let rem = self - &(&root * &root);
        rem.is_zero().then_some(root)
    }
}

impl<C: Coefficient> std::ops::Add for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: &Poly<C>) -> Poly<C> {
        let (big, small) = if self.len() >= rhs.len() { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        for (m, c) in small.terms() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<C: Coefficient> std::ops::Sub for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = self.clone();
        for (m, c) in rhs.terms() {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coefficient> std::ops::Mul for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: &Poly<C>) -> Poly<C> {
        let mut out = Poly::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in rhs.terms() {
                out.add_term(a.mul(b), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Coefficient> std::ops::Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

impl<C: Coefficient> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if m.is_one() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "({c})*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::name;
    use crate::Rational;

    type P = Poly<Rational>;

    fn v(s: &str) -> P {
        P::gen(Gen::Var(name(s)))
    }

    fn k(n: i64) -> P {
        P::constant(Rational::from_integer(n.into()))
    }

    #[test]
    fn ring_identities() {
        let x = v("x");
        let y = v("y");
        let lhs = (&x + &y).pow(2);
        let rhs = &(&(&x * &x) + &(&k(2) * &(&x * &y))) + &(&y * &y);
        assert_eq!(lhs, rhs);
        assert!((&lhs - &rhs).is_zero());
    }

    #[test]
    fn monomial_order_is_graded() {
        let x = Monomial::gen(Gen::Var(name("x")));
        let t = Monomial::gen(Gen::Var(name("t")));
        assert!(x.mul(&x) > x.mul(&t) || x.mul(&x) < x.mul(&t));
        assert!(x.mul(&t) > x);
        assert!(x > Monomial::one());
        // multiplicative compatibility
        assert_eq!(x.cmp(&t), x.mul(&x).cmp(&t.mul(&x)));
    }

    #[test]
    fn square_roots() {
        let a = P::gen(Gen::Param(name("a")));
        let sq = (&(&k(2) * &a) + &v("x")).pow(2);
        let r = sq.sqrt().unwrap();
        assert_eq!(&r * &r, sq);
        assert!((&sq + &k(1)).sqrt().is_none());
        assert_eq!(k(4).sqrt(), Some(k(2)));
        assert!(k(2).sqrt().is_none());
    }

    #[test]
    fn grouping_by_basis() {
        let a = P::gen(Gen::Param(name("a")));
        let c = P::gen(Gen::Param(name("c")));
        let p = &(&(&c - &a) * &v("x")) + &c;
        let g = p.group_by(Gen::is_param);
        assert_eq!(g.len(), 2);
        assert_eq!(g[&Monomial::one()], c);
    }
}
