//! Normalized quotients of polynomials.

use std::fmt;

use num_traits::Zero;

use crate::canon::{apply_relations, CanonError};
use crate::gcd::reduce_fraction;
use crate::poly::{Exponent, Gen, Monomial, Poly};
use crate::scalar::Coefficient;

/// `num / den` with `gcd(num, den) = 1`, `den` monic, and no negative or
/// spare exp-kernel powers in `den`. Two equal rational combinations of
/// the same generators have identical representations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction<C> {
    num: Poly<C>,
    den: Poly<C>,
}

impl<C: Coefficient> RationalFunction<C> {
    pub fn zero() -> Self {
        RationalFunction { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        RationalFunction { num: Poly::constant(c), den: Poly::one() }
    }

    pub fn gen(g: Gen) -> Self {
        RationalFunction { num: Poly::gen(g), den: Poly::one() }
    }

    pub fn monomial(m: Monomial, c: C) -> Self {
        Self::from_poly(Poly::term(m, c))
    }

    /// Wraps a polynomial that is already free of reducible powers.
    pub fn from_poly(p: Poly<C>) -> Self {
        RationalFunction { num: p, den: Poly::one() }
    }

    /// Builds and normalizes `num / den`.
    pub fn new(num: Poly<C>, den: Poly<C>) -> Result<Self, CanonError> {
        if den.is_zero() {
            return Err(CanonError::DivisionByZero);
        }
        let (n1, n2) = apply_relations(num)?;
        let (d1, d2) = apply_relations(den)?;
        let (num, den) = if n2.is_one() && d2.is_one() {
            (n1, d1)
        } else {
            (&n1 * &d2, &n2 * &d1)
        };
        if den.is_zero() {
            return Err(CanonError::DivisionByZero);
        }
        if let Some(k) = rationalizer(&den) {
            return Self::new(&num * &k, &den * &k);
        }
        Ok(Self::normalize(num, den))
    }

    fn normalize(num: Poly<C>, den: Poly<C>) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let (num, den) = reduce_fraction(&num, &den);
        let shift = exp_shift(&den);
        let (num, den) = if shift.is_one() {
            (num, den)
        } else {
            let inv = shift.inverse();
            (num.mul_monomial(&inv), den.mul_monomial(&inv))
        };
        let lc = den.leading_coefficient();
        if lc.is_one() {
            RationalFunction { num, den }
        } else {
            let inv = C::one() / lc;
            RationalFunction { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn num(&self) -> &Poly<C> {
        &self.num
    }

    pub fn den(&self) -> &Poly<C> {
        &self.den
    }

    pub fn into_parts(self) -> (Poly<C>, Poly<C>) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<C> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn gens(&self) -> std::collections::BTreeSet<Gen> {
        let mut g = self.num.gens();
        g.extend(self.den.gens());
        g
    }

    pub fn add(&self, other: &Self) -> Result<Self, CanonError> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.den == other.den {
            return Self::new(&self.num + &other.num, self.den.clone());
        }
        Self::new(
            &(&self.num * &other.den) + &(&other.num * &self.den),
            &self.den * &other.den,
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CanonError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RationalFunction { num: -&self.num, den: self.den.clone() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, CanonError> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        if self.is_one() {
            return Ok(other.clone());
        }
        if other.is_one() {
            return Ok(self.clone());
        }
        Self::new(&self.num * &other.num, &self.den * &other.den)
    }

    pub fn div(&self, other: &Self) -> Result<Self, CanonError> {
        if other.is_zero() {
            return Err(CanonError::DivisionByZero);
        }
        Self::new(&self.num * &other.den, &self.den * &other.num)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RationalFunction { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn recip(&self) -> Result<Self, CanonError> {
        Self::one().div(self)
    }

    pub fn powi(&self, n: i64) -> Result<Self, CanonError> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Replaces generators by rational functions; `f` returns `None` to
    /// keep a generator as is.
    pub fn substitute_gens(
        &self,
        f: &impl Fn(&Gen) -> Option<Self>,
    ) -> Result<Self, CanonError> {
        let n = substitute_poly(&self.num, f)?;
        let d = substitute_poly(&self.den, f)?;
        n.div(&d)
    }
}

/// Evaluates `p` with some generators replaced by rational functions.
pub fn substitute_poly<C: Coefficient>(
    p: &Poly<C>,
    f: &impl Fn(&Gen) -> Option<RationalFunction<C>>,
) -> Result<RationalFunction<C>, CanonError> {
    let mut acc = RationalFunction::zero();
    let mut kept = Poly::zero();
    for (m, c) in p.terms() {
        let mut factor = RationalFunction::constant(c.clone());
        let mut rest = Vec::new();
        for (g, e) in m.pairs() {
            match f(g) {
                Some(v) => {
                    if !e.is_integer() {
                        return Err(CanonError::UnsupportedFunction(format!(
                            "fractional power of substituted generator {g}"
                        )));
                    }
                    factor = factor.mul(&v.powi(e.to_integer())?)?;
                }
                None => rest.push((g.clone(), *e)),
            }
        }
        if factor.is_polynomial() && factor.num().as_constant().is_some() {
            kept.add_term(Monomial::from_pairs(rest), factor.num().leading_coefficient());
        } else {
            let part = factor.mul(&RationalFunction::monomial(Monomial::from_pairs(rest), C::one()))?;
            acc = acc.add(&part)?;
        }
    }
    acc.add(&RationalFunction::new(kept, Poly::one())?)
}

/// A factor that clears one root generator from a denominator: the
/// complementary power for `b*r^k`, or the conjugate for `a + b*sqrt(E)`.
fn rationalizer<C: Coefficient>(den: &Poly<C>) -> Option<Poly<C>> {
    for g in den.gens() {
        let Gen::Root(_, q) = g else { continue };
        let coeffs = den.coeffs_in(&g);
        let q = i64::from(q);
        if coeffs.len() == 1 {
            let k = *coeffs.keys().next()?;
            return Some(Poly::term(
                Monomial::from_pairs(vec![(g.clone(), Exponent::from_integer(q - k))]),
                C::one(),
            ));
        }
        if q == 2 && coeffs.len() == 2 {
            let a = coeffs.get(&0)?;
            let b = coeffs.get(&1)?;
            return Some(a - &(b * &Poly::gen(g.clone())));
        }
    }
    None
}

/// Minimal exp-kernel powers common to every term of `p`.
fn exp_shift<C: Coefficient>(p: &Poly<C>) -> Monomial {
    let mut pairs = Vec::new();
    for g in p.gens() {
        if g.is_exp() {
            let lo = p.min_exponent_in(&g);
            if lo != Exponent::zero() {
                pairs.push((g, lo));
            }
        }
    }
    Monomial::from_pairs(pairs)
}

impl<C: Coefficient> fmt::Display for RationalFunction<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}
