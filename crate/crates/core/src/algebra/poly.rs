//! Sparse polynomials in `x0..x3` over an arbitrary [`Ring`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;

use super::monomial::Monomial;
use super::ring::{Integers, Ring};
use crate::error::{Error, Result};
use crate::field::Gf;

/// A polynomial stored as a map from monomials to nonzero coefficients.
/// Iteration (and serialization) runs from the leading term down.
#[derive(Clone, PartialEq)]
pub struct MultiPoly<R: Ring> {
    ring: R,
    terms: BTreeMap<Monomial, R::Elem>,
}

impl<R: Ring> fmt::Debug for MultiPoly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{}]({})", self.ring.tag(), self.to_text())
    }
}

impl<R: Ring> fmt::Display for MultiPoly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl<R: Ring> MultiPoly<R> {
    pub fn zero(ring: &R) -> Self {
        MultiPoly { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &R, c: R::Elem) -> Self {
        Self::from_terms(ring, [(Monomial::ONE, c)])
    }

    pub fn one(ring: &R) -> Self {
        Self::constant(ring, ring.one())
    }

    pub fn var(ring: &R, i: usize) -> Self {
        Self::from_terms(ring, [(Monomial::var(i), ring.one())])
    }

    /// Linear form `sum c_i x_i`.
    pub fn linear(ring: &R, coeffs: [i64; 4]) -> Self {
        Self::from_terms(
            ring,
            (0..4).map(|i| (Monomial::var(i), ring.from_i64(coeffs[i]))),
        )
    }

    /// Collects terms, summing repeated monomials and dropping zeros.
    pub fn from_terms(ring: &R, terms: impl IntoIterator<Item = (Monomial, R::Elem)>) -> Self {
        let mut map: BTreeMap<Monomial, R::Elem> = BTreeMap::new();
        for (m, c) in terms {
            match map.get_mut(&m) {
                Some(v) => *v = ring.add(v, &c),
                None => {
                    map.insert(m, c);
                }
            }
        }
        map.retain(|_, c| !ring.is_zero(c));
        MultiPoly { ring: ring.clone(), terms: map }
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms from the leading (largest) monomial down.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &R::Elem)> {
        self.terms.iter().rev()
    }

    pub fn coeff(&self, m: &Monomial) -> R::Elem {
        self.terms.get(m).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &R::Elem)> {
        self.terms.iter().next_back()
    }

    /// Largest total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    /// The common degree of all terms, if homogeneous and nonzero.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let d = self.degree()?;
        self.terms.keys().all(|m| m.degree() == d).then_some(d)
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::RingMismatch(self.ring.tag().to_string(), other.ring.tag().to_string()))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            match terms.get_mut(m) {
                Some(v) => {
                    *v = self.ring.add(v, c);
                    if self.ring.is_zero(v) {
                        terms.remove(m);
                    }
                }
                None => {
                    terms.insert(*m, c.clone());
                }
            }
        }
        Ok(MultiPoly { ring: self.ring.clone(), terms })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg_poly())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let r = &self.ring;
        let mut terms: BTreeMap<Monomial, R::Elem> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = r.mul(ca, cb);
                match terms.get_mut(&m) {
                    Some(v) => *v = r.add(v, &c),
                    None => {
                        terms.insert(m, c);
                    }
                }
            }
        }
        terms.retain(|_, c| !r.is_zero(c));
        Ok(MultiPoly { ring: r.clone(), terms })
    }

    fn neg_poly(&self) -> Self {
        MultiPoly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (*m, self.ring.neg(c))).collect(),
        }
    }

    pub fn scalar_mul(&self, c: &R::Elem) -> Self {
        Self::from_terms(&self.ring, self.terms.iter().map(|(m, v)| (*m, self.ring.mul(v, c))))
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        MultiPoly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.ring);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluation at a point with coordinates in the coefficient ring.
    pub fn eval(&self, x: &[R::Elem; 4]) -> R::Elem {
        let r = &self.ring;
        let maxdeg = self.terms.keys().flat_map(|m| m.0).max().unwrap_or(0) as usize;
        let powers: Vec<Vec<R::Elem>> = x
            .iter()
            .map(|xi| {
                let mut v = Vec::with_capacity(maxdeg + 1);
                v.push(r.one());
                for k in 1..=maxdeg {
                    let next = r.mul(&v[k - 1], xi);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = r.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..4 {
                if m.0[i] > 0 {
                    t = r.mul(&t, &powers[i][m.0[i] as usize]);
                }
            }
            acc = r.add(&acc, &t);
        }
        acc
    }

    /// Substitutes `x_i -> values[i]`.
    pub fn compose(&self, values: &[MultiPoly<R>; 4]) -> Result<Self> {
        for v in values {
            self.check_ring(v)?;
        }
        let maxdeg = self.terms.keys().flat_map(|m| m.0).max().unwrap_or(0) as u32;
        let powers: Vec<Vec<MultiPoly<R>>> = values
            .iter()
            .map(|v| {
                let mut out = vec![Self::one(&self.ring)];
                for k in 1..=maxdeg as usize {
                    let next = &out[k - 1] * v;
                    out.push(next);
                }
                out
            })
            .collect();
        let mut acc = Self::zero(&self.ring);
        for (m, c) in &self.terms {
            let mut t = Self::constant(&self.ring, c.clone());
            for i in 0..4 {
                if m.0[i] > 0 {
                    t = &t * &powers[i][m.0[i] as usize];
                }
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// Partial derivative with respect to `x_i`.
    pub fn derivative(&self, i: usize) -> Self {
        let r = &self.ring;
        Self::from_terms(
            r,
            self.terms.iter().filter(|(m, _)| m.0[i] > 0).map(|(m, c)| {
                let mut e = *m;
                let k = e.0[i];
                e.0[i] -= 1;
                (e, r.mul(c, &r.from_i64(k as i64)))
            }),
        )
    }

    /// Maps coefficients into another ring.
    pub fn map_ring<S: Ring>(&self, target: &S, f: impl Fn(&R::Elem) -> S::Elem) -> MultiPoly<S> {
        MultiPoly::from_terms(target, self.terms.iter().map(|(m, c)| (*m, f(c))))
    }

    /// Leading-term division by `self`. Returns the quotient when `self`
    /// divides `g` exactly and `None` otherwise (including a coefficient
    /// division that fails in a non-field ring).
    pub fn exact_divides(&self, g: &Self) -> Result<Option<Self>> {
        self.check_ring(g)?;
        let (lm, lc) = match self.leading_term() {
            Some((m, c)) => (*m, c.clone()),
            None => return Err(Error::DivisionByZero),
        };
        let r = &self.ring;
        let mut rem = g.clone();
        let mut quot: Vec<(Monomial, R::Elem)> = Vec::new();
        while let Some((m, c)) = rem.leading_term().map(|(m, c)| (*m, c.clone())) {
            let Some(qm) = lm.div_into(&m) else {
                return Ok(None);
            };
            let Some(qc) = r.div_exact(&c, &lc) else {
                return Ok(None);
            };
            let sub = self.mul_monomial(&qm).scalar_mul(&qc);
            rem = rem.try_sub(&sub)?;
            quot.push((qm, qc));
        }
        Ok(Some(Self::from_terms(r, quot)))
    }

    /// Remainder of multivariate division by a single polynomial over a
    /// field: every term of the result is not divisible by the leading
    /// monomial of `divisor`.
    pub fn rem(&self, divisor: &Self) -> Result<Self> {
        self.check_ring(divisor)?;
        let (lm, lc) = match divisor.leading_term() {
            Some((m, c)) => (*m, c.clone()),
            None => return Err(Error::DivisionByZero),
        };
        let r = &self.ring;
        let mut work = self.clone();
        let mut out: Vec<(Monomial, R::Elem)> = Vec::new();
        while let Some((m, c)) = work.leading_term().map(|(m, c)| (*m, c.clone())) {
            match (lm.div_into(&m), r.div_exact(&c, &lc)) {
                (Some(qm), Some(qc)) => {
                    work = work.try_sub(&divisor.mul_monomial(&qm).scalar_mul(&qc))?;
                }
                _ => {
                    work.terms.remove(&m);
                    out.push((m, c));
                }
            }
        }
        Ok(Self::from_terms(r, out))
    }

    /// Canonical text: terms from the leading monomial down, each written
    /// `c*x0^e0*x1^e1*x2^e2*x3^e3`, joined by `+`/`-`; `0` for zero.
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (idx, (m, c)) in self.terms().enumerate() {
            let neg = self.ring.is_negative(c);
            if neg {
                s.push('-');
            } else if idx > 0 {
                s.push('+');
            }
            s.push_str(&self.ring.fmt_abs(c));
            s.push('*');
            s.push_str(&m.to_string());
        }
        s
    }

    /// Human-readable text such as `x0^3 - 2*x1*x3^2 + 1`.
    pub fn to_pretty(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (idx, (m, c)) in self.terms().enumerate() {
            let neg = self.ring.is_negative(c);
            match (idx, neg) {
                (0, true) => s.push('-'),
                (0, false) => {}
                (_, true) => s.push_str(" - "),
                (_, false) => s.push_str(" + "),
            }
            let vars: Vec<String> = (0..4)
                .filter(|&i| m.0[i] > 0)
                .map(|i| if m.0[i] == 1 { format!("x{i}") } else { format!("x{i}^{}", m.0[i]) })
                .collect();
            let abs = self.ring.fmt_abs(c);
            if vars.is_empty() {
                s.push_str(&abs);
            } else if abs == "1" {
                s.push_str(&vars.join("*"));
            } else {
                s.push_str(&format!("{abs}*{}", vars.join("*")));
            }
        }
        s
    }

    /// Parses the canonical text form (terms may appear in any order).
    pub fn parse(ring: &R, text: &str) -> Result<Self> {
        let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if text == "0" {
            return Ok(Self::zero(ring));
        }
        let bad = |t: &str| Error::Parse(format!("bad term {t:?}"));
        let mut terms = Vec::new();
        let mut rest = text.as_str();
        while !rest.is_empty() {
            let (negative, body) = match rest.as_bytes()[0] {
                b'-' => (true, &rest[1..]),
                b'+' => (false, &rest[1..]),
                _ => (false, rest),
            };
            let end = body.find(['+', '-']).unwrap_or(body.len());
            let term = &body[..end];
            rest = &body[end..];
            let mut parts = term.split('*');
            let coeff = parts.next().ok_or_else(|| bad(term))?;
            let mut c = ring.parse_abs(coeff).ok_or_else(|| bad(term))?;
            if negative {
                c = ring.neg(&c);
            }
            let mut e = [0u16; 4];
            for factor in parts {
                let (var, exp) = factor.split_once('^').unwrap_or((factor, "1"));
                let i: usize = var.strip_prefix('x').and_then(|v| v.parse().ok()).ok_or_else(|| bad(term))?;
                if i > 3 {
                    return Err(bad(term));
                }
                e[i] += exp.parse::<u16>().map_err(|_| bad(term))?;
            }
            terms.push((Monomial(e), c));
        }
        Ok(Self::from_terms(ring, terms))
    }
}

impl MultiPoly<Integers> {
    /// Reduction of integer coefficients into a finite field.
    pub fn to_field(&self, f: &Gf) -> MultiPoly<Gf> {
        self.map_ring(f, |c: &BigInt| f.embed_bigint(c))
    }
}

impl<R: Ring> Add for &MultiPoly<R> {
    type Output = MultiPoly<R>;
    fn add(self, rhs: Self) -> MultiPoly<R> {
        self.try_add(rhs).expect("ring mismatch in polynomial addition")
    }
}

impl<R: Ring> Sub for &MultiPoly<R> {
    type Output = MultiPoly<R>;
    fn sub(self, rhs: Self) -> MultiPoly<R> {
        self.try_sub(rhs).expect("ring mismatch in polynomial subtraction")
    }
}

impl<R: Ring> Mul for &MultiPoly<R> {
    type Output = MultiPoly<R>;
    fn mul(self, rhs: Self) -> MultiPoly<R> {
        self.try_mul(rhs).expect("ring mismatch in polynomial multiplication")
    }
}

impl<R: Ring> Neg for &MultiPoly<R> {
    type Output = MultiPoly<R>;
    fn neg(self) -> MultiPoly<R> {
        self.neg_poly()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ring::Rationals;
    use proptest::prelude::*;

    fn x(i: usize) -> MultiPoly<Integers> {
        MultiPoly::var(&Integers, i)
    }

    #[test]
    fn difference_of_squares() {
        let a = &x(0) + &x(1);
        let b = &x(0) - &x(1);
        let expect = &x(0).pow(2) - &x(1).pow(2);
        assert_eq!(&a * &b, expect);
    }

    #[test]
    fn pretty_text() {
        let f = &(&x(0).pow(3) - &(&x(1) * &x(3).pow(2)).scalar_mul(&BigInt::from(2))) + &MultiPoly::one(&Integers);
        assert_eq!(f.to_pretty(), "x0^3 - 2*x1*x3^2 + 1");
        assert_eq!((-&x(2)).to_pretty(), "-x2");
        assert_eq!(MultiPoly::zero(&Integers).to_pretty(), "0");
    }

    #[test]
    fn eval_product_of_variables() {
        let p = &(&x(0) * &x(1)) * &(&x(2) * &x(3));
        let one = BigInt::from(1);
        assert_eq!(p.eval(&[one.clone(), one.clone(), one.clone(), one]), BigInt::from(1));
    }

    #[test]
    fn exact_division_cases() {
        let f = &x(0) + &x(1);
        let g = &x(0).pow(2) - &x(1).pow(2);
        assert_eq!(f.exact_divides(&g).unwrap(), Some(&x(0) - &x(1)));
        let g2 = &(&x(0) * &x(1)) + &x(2).pow(2);
        assert_eq!(x(0).exact_divides(&g2).unwrap(), None);
        assert_eq!(MultiPoly::zero(&Integers).exact_divides(&g2), Err(Error::DivisionByZero));
    }

    #[test]
    fn integer_division_respects_content() {
        // 2x0 divides 4x0^2 over Z but not 3x0^2.
        let two_x = x(0).scalar_mul(&BigInt::from(2));
        let g = x(0).pow(2).scalar_mul(&BigInt::from(4));
        assert!(two_x.exact_divides(&g).unwrap().is_some());
        let h = x(0).pow(2).scalar_mul(&BigInt::from(3));
        assert!(two_x.exact_divides(&h).unwrap().is_none());
    }

    #[test]
    fn ring_mismatch_is_reported() {
        let a = x(0);
        let f = Gf::new(17, 1).unwrap();
        let b = MultiPoly::var(&f, 0);
        let ar = a.map_ring(&f, |c| f.embed_bigint(c));
        assert_eq!(ar, b);
        let f2 = Gf::new(19, 1).unwrap();
        let c = MultiPoly::var(&f2, 0);
        assert!(matches!(b.try_add(&c), Err(Error::RingMismatch(_, _))));
    }

    #[test]
    fn text_format() {
        let p = &x(0).pow(3).scalar_mul(&BigInt::from(-1)) + &(&x(1) * &x(3)).scalar_mul(&BigInt::from(2));
        assert_eq!(p.to_text(), "-1*x0^3*x1^0*x2^0*x3^0+2*x0^0*x1^1*x2^0*x3^1");
        assert_eq!(MultiPoly::parse(&Integers, &p.to_text()).unwrap(), p);
        let q = MultiPoly::parse(&Rationals, "3/2*x0^1*x1^0*x2^0*x3^0-1/2*x3").unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(MultiPoly::<Integers>::zero(&Integers).to_text(), "0");
    }

    #[test]
    fn derivative_and_rem() {
        let p = &x(0).pow(4) + &(&x(1) * &x(2)).pow(2);
        assert_eq!(p.derivative(0), x(0).pow(3).scalar_mul(&BigInt::from(4)));
        let f = Gf::new(17, 1).unwrap();
        let pf = p.to_field(&f);
        let d = (&x(0).pow(2) + &x(1).pow(2)).to_field(&f);
        let r = pf.rem(&d).unwrap();
        // remainder is congruent to p and has no term divisible by x0^2
        assert!(r.terms().all(|(m, _)| m.0[0] < 2));
        let diff = &pf - &r;
        assert!(d.exact_divides(&diff).unwrap().is_some());
    }

    fn arb_poly(max_terms: usize, max_deg: u16) -> impl Strategy<Value = MultiPoly<Integers>> {
        prop::collection::vec(((0..=max_deg, 0..=max_deg, 0..=max_deg, 0..=max_deg), -5i64..=5), 0..max_terms)
            .prop_map(|ts| {
                MultiPoly::from_terms(
                    &Integers,
                    ts.into_iter().map(|((a, b, c, d), k)| (Monomial([a, b, c, d]), BigInt::from(k))),
                )
            })
    }

    proptest! {
        #[test]
        fn text_round_trip(p in arb_poly(8, 4)) {
            prop_assert_eq!(MultiPoly::parse(&Integers, &p.to_text()).unwrap(), p);
        }

        #[test]
        fn divides_product_over_f17(a in arb_poly(6, 2), b in arb_poly(6, 2)) {
            let f = Gf::new(17, 1).unwrap();
            let a = a.to_field(&f);
            let b = b.to_field(&f);
            prop_assume!(!a.is_zero());
            let g = &a * &b;
            prop_assert_eq!(a.exact_divides(&g).unwrap(), Some(b));
        }
    }
}
