//! Dense homogeneous forms over a prime field.
//!
//! Used where sparse maps are too slow: the degree-27 composite of the
//! cofactor maps and the degree-108 determinant built from it. A form of
//! degree `d` is stored through its dehomogenization `x0 = 1`: the cube
//! `coeffs[e1 + s*e2 + s^2*e3]` with stride `s = d + 1`, and `e0` implied.
//! Index arithmetic is additive in the exponents, so a product only needs
//! offset sums once both factors are laid out with the product's stride.

use super::monomial::Monomial;
use super::poly::MultiPoly;
use crate::error::{Error, Result};
use crate::field::Gf;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FpForm {
    p: u32,
    degree: u32,
    coeffs: Vec<u32>,
}

#[inline]
fn cube_index(e: [u16; 4], stride: usize) -> usize {
    e[1] as usize + stride * (e[2] as usize + stride * e[3] as usize)
}

fn cube_len(degree: u32) -> usize {
    let s = degree as usize + 1;
    s * s * s
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

impl FpForm {
    pub fn zero(p: u32, degree: u32) -> Self {
        FpForm { p, degree, coeffs: vec![0; cube_len(degree)] }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn stride(&self) -> usize {
        self.degree as usize + 1
    }

    /// Nonzero terms as `(monomial, coefficient)`, in no particular order.
    pub fn terms(&self) -> Vec<(Monomial, u32)> {
        let d = self.degree as u16;
        let s = self.stride();
        let mut out = Vec::new();
        for e3 in 0..=d {
            for e2 in 0..=d - e3 {
                for e1 in 0..=d - e3 - e2 {
                    let c = self.coeffs[e1 as usize + s * (e2 as usize + s * e3 as usize)];
                    if c != 0 {
                        out.push((Monomial([d - e1 - e2 - e3, e1, e2, e3]), c));
                    }
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn coeff(&self, m: &Monomial) -> u32 {
        if m.degree() != self.degree {
            return 0;
        }
        self.coeffs[cube_index(m.0, self.stride())]
    }

    pub fn set(&mut self, m: &Monomial, c: u32) {
        assert_eq!(m.degree(), self.degree);
        let s = self.stride();
        self.coeffs[cube_index(m.0, s)] = c % self.p;
    }

    /// From a homogeneous polynomial over a prime field (zero needs `degree`).
    pub fn from_poly(f: &MultiPoly<Gf>, degree: u32) -> Result<Self> {
        let field = f.ring();
        if field.n() != 1 {
            return Err(Error::InvalidArgument("dense forms need a prime field".into()));
        }
        let mut out = FpForm::zero(field.p(), degree);
        for (m, c) in f.terms() {
            if m.degree() != degree {
                return Err(Error::InvalidArgument(format!("term {m} is not of degree {degree}")));
            }
            out.set(m, *c);
        }
        Ok(out)
    }

    pub fn to_poly(&self, field: &Gf) -> MultiPoly<Gf> {
        assert_eq!(field.p(), self.p);
        MultiPoly::from_terms(field, self.terms())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.p, self.degree), (other.p, other.degree));
        let p = self.p;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| (a + b) % p).collect();
        FpForm { p, degree: self.degree, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(self.p - 1))
    }

    pub fn scale(&self, c: u32) -> Self {
        let p = self.p as u64;
        let c = c as u64 % p;
        FpForm {
            p: self.p,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|&a| (a as u64 * c % p) as u32).collect(),
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Self, c: u32) {
        assert_eq!((self.p, self.degree), (other.p, other.degree));
        let p = self.p as u64;
        let c = c as u64 % p;
        if c == 0 {
            return;
        }
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = ((*a as u64 + c * b as u64) % p) as u32;
        }
    }

    /// Nonzero terms laid out with stride `s`.
    fn offsets(&self, s: usize) -> Vec<(usize, u64)> {
        self.terms().into_iter().map(|(m, c)| (cube_index(m.0, s), c as u64)).collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let degree = self.degree + other.degree;
        let s = degree as usize + 1;
        let a = self.offsets(s);
        let b = other.offsets(s);
        let p = self.p as u64;
        // Products are < p^2; with p < 2^16 millions of them fit in a u64.
        let lazy = self.p < (1 << 16);
        let mut acc = vec![0u64; cube_len(degree)];
        for &(ia, ca) in &a {
            if lazy {
                for &(ib, cb) in &b {
                    acc[ia + ib] += ca * cb;
                }
            } else {
                for &(ib, cb) in &b {
                    acc[ia + ib] = (acc[ia + ib] + ca * cb % p) % p;
                }
            }
        }
        FpForm { p: self.p, degree, coeffs: acc.into_iter().map(|v| (v % p) as u32).collect() }
    }

    pub fn eval(&self, field: &Gf, x: &[u32; 4]) -> u32 {
        let mut acc = 0u32;
        for (m, c) in self.terms() {
            let mut t = c;
            for i in 0..4 {
                t = field.mul(t, field.pow(x[i], m.0[i] as u64));
            }
            acc = field.add(acc, t);
        }
        acc
    }

    /// Division by a nonzero form in descending lex order (which is graded
    /// lex within one degree). Returns `(quotient, remainder)`; every term of
    /// the remainder is not divisible by the leading monomial of `divisor`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        assert_eq!(self.p, divisor.p);
        let dterms = divisor.terms();
        let Some(&(lm, lc)) = dterms.iter().max_by(|a, b| a.0.cmp(&b.0)) else {
            return Err(Error::DivisionByZero);
        };
        if divisor.degree > self.degree {
            return Ok((FpForm::zero(self.p, 0), self.clone()));
        }
        let p = self.p as u64;
        let d = self.degree as u16;
        let s = self.stride();
        let qdeg = self.degree - divisor.degree;
        let mut quot = FpForm::zero(self.p, qdeg);
        let qs = quot.stride();
        let lc_inv = inv_mod(lc, self.p) as u64;
        let lm_idx = cube_index(lm.0, s) as isize;
        let offs: Vec<(isize, u64)> = dterms.iter().map(|(m, c)| (cube_index(m.0, s) as isize - lm_idx, *c as u64)).collect();
        let mut rem = self.coeffs.clone();
        for e0 in (0..=d).rev() {
            for e1 in (0..=d - e0).rev() {
                for e2 in (0..=d - e0 - e1).rev() {
                    let e3 = d - e0 - e1 - e2;
                    let m = Monomial([e0, e1, e2, e3]);
                    let idx = cube_index(m.0, s);
                    let c = rem[idx];
                    if c == 0 {
                        continue;
                    }
                    let Some(qm) = lm.div_into(&m) else {
                        continue;
                    };
                    let qc = c as u64 * lc_inv % p;
                    quot.coeffs[cube_index(qm.0, qs)] = qc as u32;
                    let neg = p - qc;
                    for &(off, tc) in &offs {
                        let j = (idx as isize + off) as usize;
                        rem[j] = ((rem[j] as u64 + neg * tc) % p) as u32;
                    }
                }
            }
        }
        Ok((quot, FpForm { p: self.p, degree: self.degree, coeffs: rem }))
    }

    /// The quotient when `divisor` divides `self` exactly.
    pub fn exact_div(&self, divisor: &Self) -> Result<Option<Self>> {
        let (q, r) = self.div_rem(divisor)?;
        Ok(r.is_zero().then_some(q))
    }
}

/// Determinant of a 4×4 matrix of forms of equal degree, by expansion
/// through 2×2 minors of the bottom rows.
pub fn det4_forms(m: &[[FpForm; 4]; 4]) -> FpForm {
    let p = m[0][0].p;
    let d = m[0][0].degree;
    // 2×2 minors of rows 2,3.
    let mut minor2 = std::collections::HashMap::new();
    for a in 0..4 {
        for b in a + 1..4 {
            let v = m[2][a].mul(&m[3][b]).sub(&m[2][b].mul(&m[3][a]));
            minor2.insert((a, b), v);
        }
    }
    // 3×3 minors of rows 1..3 excluding column j.
    let mut total = FpForm::zero(p, 4 * d);
    for j in 0..4 {
        let cols: Vec<usize> = (0..4).filter(|&c| c != j).collect();
        let mut minor3 = FpForm::zero(p, 3 * d);
        for (k, &c) in cols.iter().enumerate() {
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let t = m[1][c].mul(&minor2[&(rest[0], rest[1])]);
            if k % 2 == 0 {
                minor3 = minor3.add(&t);
            } else {
                minor3 = minor3.sub(&t);
            }
        }
        let t = m[0][j].mul(&minor3);
        if j % 2 == 0 {
            total = total.add(&t);
        } else {
            total = total.sub(&t);
        }
    }
    total
}
