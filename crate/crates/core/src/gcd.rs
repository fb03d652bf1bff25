//! Multivariate polynomial gcd and exact division.
//!
//! Both work recursively: a polynomial is viewed as univariate in its
//! largest generator with coefficients in the remaining ones. The gcd uses
//! a primitive pseudo-remainder sequence. These routines expect
//! non-negative integer exponents; [`reduce_fraction`] maps exp-kernel
//! exponents (which may be negative or fractional) into that range first.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::Zero;

use crate::poly::{Exponent, Gen, Monomial, Poly};
use crate::scalar::Coefficient;

fn main_gen<C: Coefficient>(a: &Poly<C>, b: &Poly<C>) -> Option<Gen> {
    a.gens().into_iter().chain(b.gens()).max()
}

fn leading(coeffs: &BTreeMap<i64, Poly<impl Coefficient>>) -> i64 {
    coeffs.keys().next_back().copied().unwrap_or(0)
}

/// `a / b` when `b` divides `a` exactly.
pub fn exact_div<C: Coefficient>(a: &Poly<C>, b: &Poly<C>) -> Option<Poly<C>> {
    if b.is_zero() {
        return None;
    }
    if a.is_zero() {
        return Some(Poly::zero());
    }
    if let Some(c) = b.as_constant() {
        return Some(a.scale(&(C::one() / c)));
    }
    if let (Some((ma, ca)), Some((mb, cb))) = (a.single_term(), b.single_term()) {
        let m = ma.div(mb)?;
        return Some(Poly::term(m, ca.clone() / cb.clone()));
    }
    let g = b.gens().into_iter().max()?;
    let bc = b.coeffs_in(&g);
    let db = leading(&bc);
    let lb = &bc[&db];
    let mut rem = a.coeffs_in(&g);
    let mut quot: BTreeMap<i64, Poly<C>> = BTreeMap::new();
    while let Some((&da, lead)) = rem.iter().next_back() {
        if da < db {
            return None;
        }
        let q = exact_div(lead, lb)?;
        for (e, c) in &bc {
            let k = e + da - db;
            let cur = rem.remove(&k).unwrap_or_default();
            let next = &cur - &(&q * c);
            if !next.is_zero() {
                rem.insert(k, next);
            }
        }
        quot.insert(da - db, q);
    }
    Some(Poly::from_coeffs(&g, &quot))
}

fn content_in<C: Coefficient>(p: &Poly<C>, g: &Gen) -> Poly<C> {
    let mut acc = Poly::zero();
    for c in p.coeffs_in(g).values() {
        acc = gcd(&acc, c);
        if acc.is_one() {
            break;
        }
    }
    acc
}

fn pseudo_rem<C: Coefficient>(a: &Poly<C>, b: &Poly<C>, g: &Gen) -> Poly<C> {
    let bc = b.coeffs_in(g);
    let db = leading(&bc);
    let lb = bc[&db].clone();
    let mut r = a.clone();
    loop {
        let rc = r.coeffs_in(g);
        if r.is_zero() || leading(&rc) < db {
            return r;
        }
        let dr = leading(&rc);
        let shift = Monomial::from_pairs(vec![(g.clone(), Exponent::from_integer(dr - db))]);
        r = &(&lb * &r) - &(&rc[&dr] * &b.mul_monomial(&shift));
    }
}

/// Monic greatest common divisor. `gcd(0, 0) = 0`.
pub fn gcd<C: Coefficient>(a: &Poly<C>, b: &Poly<C>) -> Poly<C> {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.as_constant().is_some() || b.as_constant().is_some() {
        return Poly::one();
    }
    if a == b {
        return a.monic();
    }
    if let (Some((ma, _)), Some((mb, _))) = (a.single_term(), b.single_term()) {
        let m = Monomial::from_pairs(
            ma.pairs()
                .iter()
                .map(|(g, e)| (g.clone(), (*e).min(mb.exponent(g)).max(Exponent::zero())))
                .collect(),
        );
        return Poly::term(m, C::one());
    }
    let Some(g) = main_gen(a, b) else {
        return Poly::one();
    };
    match (a.contains_gen(&g), b.contains_gen(&g)) {
        (true, false) => return gcd(&content_in(a, &g), b),
        (false, true) => return gcd(a, &content_in(b, &g)),
        _ => {}
    }
    let ca = content_in(a, &g);
    let cb = content_in(b, &g);
    let c = gcd(&ca, &cb);
    let mut r0 = exact_div(a, &ca).expect("content divides");
    let mut r1 = exact_div(b, &cb).expect("content divides");
    if r0.degree_in(&g) < r1.degree_in(&g) {
        std::mem::swap(&mut r0, &mut r1);
    }
    let pp = loop {
        let r = pseudo_rem(&r0, &r1, &g);
        if r.is_zero() {
            break r1;
        }
        if !r.contains_gen(&g) {
            break Poly::one();
        }
        let cr = content_in(&r, &g);
        r0 = r1;
        r1 = exact_div(&r, &cr).expect("content divides");
    };
    let pp = exact_div(&pp, &content_in(&pp, &g)).expect("content divides");
    (&c * &pp).monic()
}

/// Per-generator exponent map that turns exp-kernel exponents into
/// non-negative integers: `e -> (e - shift) * scale`.
struct ExpTransform {
    scale: BTreeMap<Gen, i64>,
}

impl ExpTransform {
    fn new<C: Coefficient>(polys: &[&Poly<C>]) -> Self {
        let mut scale: BTreeMap<Gen, i64> = BTreeMap::new();
        for p in polys {
            for (m, _) in p.terms() {
                for (g, e) in m.pairs() {
                    if g.is_exp() {
                        let s = scale.entry(g.clone()).or_insert(1);
                        *s = s.lcm(e.denom());
                    }
                }
            }
        }
        ExpTransform { scale }
    }

    fn shift<C: Coefficient>(&self, p: &Poly<C>) -> Monomial {
        Monomial::from_pairs(
            self.scale.keys().map(|g| (g.clone(), p.min_exponent_in(g))).collect(),
        )
    }

    fn forward<C: Coefficient>(&self, p: &Poly<C>, shift: &Monomial) -> Poly<C> {
        p.mul_monomial(&shift.inverse()).map_monomials(|m| {
            m.map_exponents(|g, e| match self.scale.get(g) {
                Some(s) => e * Exponent::from_integer(*s),
                None => e,
            })
        })
    }

    fn backward<C: Coefficient>(&self, p: &Poly<C>, shift: &Monomial) -> Poly<C> {
        p.map_monomials(|m| {
            m.map_exponents(|g, e| match self.scale.get(g) {
                Some(s) => e / Exponent::from_integer(*s),
                None => e,
            })
        })
        .mul_monomial(shift)
    }
}

/// Cancels the common factor of `num / den`, treating exp-kernel
/// monomials as units. Returns the reduced pair; `den` is not yet
/// normalized.
pub fn reduce_fraction<C: Coefficient>(num: &Poly<C>, den: &Poly<C>) -> (Poly<C>, Poly<C>) {
    if num.is_zero() {
        return (Poly::zero(), Poly::one());
    }
    if den.as_constant().is_some() {
        return (num.clone(), den.clone());
    }
    let tr = ExpTransform::new(&[num, den]);
    let sn = tr.shift(num);
    let sd = tr.shift(den);
    let n = tr.forward(num, &sn);
    let d = tr.forward(den, &sd);
    let g = gcd(&n, &d);
    let (n, d) = if g.is_one() {
        (n, d)
    } else {
        (exact_div(&n, &g).expect("gcd divides"), exact_div(&d, &g).expect("gcd divides"))
    };
    (tr.backward(&n, &sn), tr.backward(&d, &sd))
}

/// Generators shared by every term of `p`, with their minimal exponent.
pub fn monomial_content<C: Coefficient>(p: &Poly<C>, among: &BTreeSet<Gen>) -> Monomial {
    let mut pairs = Vec::new();
    for g in among {
        let lo = p.min_exponent_in(g);
        if lo > Exponent::zero() {
            pairs.push((g.clone(), lo));
        }
    }
    Monomial::from_pairs(pairs)
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
    fn difference_of_squares() {
        let x = v("x");
        let a = &(&x * &x) - &k(1);
        let b = &x - &k(1);
        assert_eq!(gcd(&a, &b), b);
        assert_eq!(exact_div(&a, &b), Some(&x + &k(1)));
        assert_eq!(exact_div(&a, &(&x - &k(2))), None);
    }

    #[test]
    fn multivariate_common_factor() {
        let (x, y, t) = (v("x"), v("y"), v("t"));
        let f = &(&x * &y) + &t;
        let a = &f * &(&x + &k(3));
        let b = &f * &(&(&y * &y) - &t);
        let g = gcd(&a, &b);
        assert_eq!(g, f.monic());
        assert_eq!(gcd(&(&x + &k(1)), &(&y + &k(1))), k(1));
    }

    #[test]
    fn coprime_after_scaling() {
        let x = v("x");
        let a = (&x * &k(6)).pow(2);
        let b = &x * &k(4);
        assert_eq!(gcd(&a, &b), x);
    }

    #[test]
    fn exp_units_cancel() {
        let e = P::gen(Gen::Exp(std::sync::Arc::new(crate::expr::Expr::var("x"))));
        let x = v("x");
        let num = &e * &x;
        let den = &(&e * &e) * &x;
        let (n, d) = reduce_fraction(&num, &den);
        // e*x / (e^2*x) = 1/e, with e a unit
        assert_eq!(n.len(), 1);
        assert_eq!(d.len(), 1);
        assert!(!d.contains_gen(&Gen::Var(name("x"))));
    }
}
