//! Finite fields `F_{p^n}`.
//!
//! Elements are `u32` indices: the coefficient vector `c_0 + c_1 t + ...`
//! of the residue modulo the field modulus, read as the base-`p` integer
//! `c_0 + c_1 p + c_2 p^2 + ...`. Fields of order at most [`TABLE_BUDGET`]
//! also carry exp/log/Zech tables, which turn multiplication into one
//! lookup and addition (odd characteristic) into two.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use crate::algebra::ring::{Ring, RingTag};
use crate::error::{Error, Result};

/// Largest field order that gets exp/log/Zech tables.
pub const TABLE_BUDGET: u32 = 1 << 20;

const NO_LOG: u32 = u32::MAX;

/// Static description of a finite field plus its lookup tables.
pub struct FieldSpec {
    p: u32,
    n: u32,
    q: u32,
    /// Monic modulus, coefficients low to high (length `n + 1`).
    modulus: Vec<u32>,
    tables: Option<Tables>,
}

struct Tables {
    generator: u32,
    /// `exp[k] = g^k`, doubled in length so `exp[log a + log b]` needs no reduction.
    exp: Vec<u32>,
    log: Vec<u32>,
    /// `zech[k] = log(1 + g^k)`, or `NO_LOG` when `1 + g^k = 0`.
    zech: Vec<u32>,
}

/// Shared handle to a finite field. Cheap to clone.
#[derive(Clone)]
pub struct Gf(Arc<FieldSpec>);

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf({}^{}, modulus {:?})", self.0.p, self.0.n, self.0.modulus)
    }
}

impl PartialEq for Gf {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.modulus == other.0.modulus)
    }
}

impl Eq for Gf {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Dense polynomials over a prime field, coefficients low to high.
mod fp_poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let p = p as u64;
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p;
            }
        }
        let mut out: Vec<u32> = out.into_iter().map(|v| v as u32).collect();
        trim(&mut out);
        out
    }

    pub fn inv_mod(a: u32, p: u32) -> u32 {
        let mut acc = 1u64;
        let mut base = a as u64 % p as u64;
        let mut e = p as u64 - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p as u64;
            }
            base = base * base % p as u64;
            e >>= 1;
        }
        acc as u32
    }

    /// Remainder of `a` modulo a nonzero `m`.
    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = inv_mod(m[dm], p) as u64;
        let p64 = p as u64;
        while r.len() > dm {
            let top = r.len() - 1;
            let c = r[top] as u64 * lead_inv % p64;
            if c != 0 {
                let shift = top - dm;
                for (i, &mi) in m.iter().enumerate() {
                    let sub = c * mi as u64 % p64;
                    r[shift + i] = ((r[shift + i] as u64 + p64 - sub) % p64) as u32;
                }
            }
            r.pop();
            trim(&mut r);
        }
        r
    }

    pub fn mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        rem(&mul(a, b, p), m, p)
    }

    pub fn powmod(a: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
        let mut acc = vec![1u32];
        let mut base = rem(a, m, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(&acc, &base, m, p);
            }
            e >>= 1;
            if e > 0 {
                base = mulmod(&base, &base, m, p);
            }
        }
        rem(&acc, m, p)
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut out = vec![0u32; a.len().max(b.len())];
        for (i, o) in out.iter_mut().enumerate() {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            *o = (x + p - y) % p;
        }
        trim(&mut out);
        out
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        if let Some(&lc) = a.last() {
            let inv = inv_mod(lc, p) as u64;
            for c in a.iter_mut() {
                *c = (*c as u64 * inv % p as u64) as u32;
            }
        }
        a
    }
}

/// Irreducibility of a monic polynomial of degree `n` over `F_p`:
/// `x^{p^n} = x mod f` and `gcd(x^{p^d} - x, f) = 1` for every proper divisor `d | n`.
pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let n = modulus.len() - 1;
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let x = vec![0u32, 1];
    let mut h = x.clone();
    for d in 1..=n {
        h = fp_poly::powmod(&h, p as u64, modulus, p);
        if d < n && n.is_multiple_of(d) {
            let diff = fp_poly::sub(&h, &x, p);
            if fp_poly::gcd(&diff, modulus, p).len() != 1 {
                return false;
            }
        }
    }
    let mut hx = h;
    fp_poly::trim(&mut hx);
    hx == x
}

impl Gf {
    /// The field `F_{p^n}` with the deterministic modulus: the smallest monic
    /// irreducible of degree `n` when the low-order coefficients are read as
    /// base-`p` digits (`c_0` least significant). For `n = 1` the modulus is `t`.
    pub fn new(p: u32, n: u32) -> Result<Gf> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("extension degree must be >= 1".into()));
        }
        let q = checked_order(p, n)?;
        let modulus = if n == 1 {
            vec![0, 1]
        } else {
            let mut found = None;
            for c in 0..q {
                let mut m = digits_of(c, p, n as usize);
                m.push(1);
                if is_irreducible(&m, p) {
                    found = Some(m);
                    break;
                }
            }
            found.expect("an irreducible polynomial of every degree exists")
        };
        Ok(Gf(Arc::new(FieldSpec::build(p, n, q, modulus))))
    }

    /// A field with an explicitly chosen modulus (monic, low to high).
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Gf> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        let n = modulus.len().saturating_sub(1) as u32;
        if n == 0 || modulus.last() != Some(&1) || modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidArgument(format!("not a monic modulus over F_{p}: {modulus:?}")));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::InvalidArgument(format!("modulus {modulus:?} is reducible over F_{p}")));
        }
        let q = checked_order(p, n)?;
        Ok(Gf(Arc::new(FieldSpec::build(p, n, q, modulus))))
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.0.p
    }
    #[inline]
    pub fn n(&self) -> u32 {
        self.0.n
    }
    #[inline]
    pub fn q(&self) -> u32 {
        self.0.q
    }
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }
    pub fn has_tables(&self) -> bool {
        self.0.tables.is_some()
    }
    pub fn generator(&self) -> Option<u32> {
        self.0.tables.as_ref().map(|t| t.generator)
    }

    /// All elements in ascending index order.
    pub fn elements(&self) -> Range<u32> {
        0..self.0.q
    }

    /// Image of a rational integer in the prime subfield.
    pub fn embed_int(&self, v: i64) -> u32 {
        v.rem_euclid(self.0.p as i64) as u32
    }

    pub fn embed_bigint(&self, v: &BigInt) -> u32 {
        let p = BigInt::from(self.0.p);
        let r = v.mod_floor(&p);
        r.to_u32().expect("residue fits")
    }

    /// Residue coefficients `c_0..c_{n-1}`.
    pub fn digits(&self, x: u32) -> Vec<u32> {
        digits_of(x, self.0.p, self.0.n as usize)
    }

    pub fn from_digits(&self, digits: &[u32]) -> u32 {
        let p = self.0.p;
        digits.iter().rev().fold(0u32, |acc, &d| acc * p + d % p)
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = &*self.0;
        if s.p == 2 {
            return a ^ b;
        }
        if s.n == 1 {
            let c = a + b;
            return if c >= s.p { c - s.p } else { c };
        }
        if a == 0 {
            return b;
        }
        if b == 0 {
            return a;
        }
        match &s.tables {
            Some(t) => {
                let m = s.q - 1;
                let la = t.log[a as usize];
                let lb = t.log[b as usize];
                let d = if lb >= la { lb - la } else { lb + m - la };
                let z = t.zech[d as usize];
                if z == NO_LOG {
                    0
                } else {
                    t.exp[(la + z) as usize]
                }
            }
            None => self.add_residue(a, b),
        }
    }

    /// Digit-wise addition, independent of the tables.
    pub fn add_residue(&self, a: u32, b: u32) -> u32 {
        let p = self.0.p;
        let da = self.digits(a);
        let db = self.digits(b);
        let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
        self.from_digits(&sum)
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        let s = &*self.0;
        if s.p == 2 || a == 0 {
            return a;
        }
        if s.n == 1 {
            return s.p - a;
        }
        let d: Vec<u32> = self.digits(a).into_iter().map(|c| (s.p - c) % s.p).collect();
        self.from_digits(&d)
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = &*self.0;
        if s.n == 1 {
            return ((a as u64 * b as u64) % s.p as u64) as u32;
        }
        match &s.tables {
            Some(t) => t.exp[(t.log[a as usize] + t.log[b as usize]) as usize],
            None => self.mul_residue(a, b),
        }
    }

    /// Multiplication through polynomial arithmetic modulo the field modulus.
    pub fn mul_residue(&self, a: u32, b: u32) -> u32 {
        let s = &*self.0;
        let prod = fp_poly::mulmod(&self.digits(a), &self.digits(b), &s.modulus, s.p);
        self.from_digits(&prod)
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        if let Some(t) = &self.0.tables {
            let m = (self.0.q - 1) as u64;
            let k = (t.log[a as usize] as u64 * (e % m)) % m;
            return t.exp[k as usize];
        }
        let mut acc = 1u32;
        let mut base = a;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(base, base);
            }
        }
        acc
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        let s = &*self.0;
        if s.n == 1 {
            return Ok(fp_poly::inv_mod(a, s.p));
        }
        match &s.tables {
            Some(t) => {
                let m = s.q - 1;
                let l = t.log[a as usize];
                Ok(t.exp[((m - l) % m) as usize])
            }
            None => Ok(self.pow(a, s.q as u64 - 2)),
        }
    }

    /// The `p`-th power map.
    #[inline]
    pub fn frobenius(&self, a: u32) -> u32 {
        self.pow(a, self.0.p as u64)
    }

    /// Smallest `d | n` with `x^{p^d} = x`, i.e. the degree of the smallest
    /// subfield containing `x`.
    pub fn min_subfield_degree(&self, x: u32) -> u32 {
        let mut y = x;
        for d in 1..=self.0.n {
            y = self.frobenius(y);
            if y == x {
                return d;
            }
        }
        self.0.n
    }

    /// `exp[k] = g^k` for `0 <= k < 2(q - 1)`, when tables are present.
    pub fn exp_table(&self) -> Option<&[u32]> {
        self.0.tables.as_ref().map(|t| t.exp.as_slice())
    }

    /// `log[a]` for nonzero `a`, when tables are present.
    pub fn log_table(&self) -> Option<&[u32]> {
        self.0.tables.as_ref().map(|t| t.log.as_slice())
    }

    /// Discrete logarithm to the table generator.
    pub fn log(&self, a: u32) -> Option<u32> {
        let t = self.0.tables.as_ref()?;
        (a != 0).then(|| t.log[a as usize])
    }

    /// `log(1 + g^k)`, `None` if `1 + g^k = 0` or tables are absent.
    pub fn zech_log(&self, k: u32) -> Option<u32> {
        let t = self.0.tables.as_ref()?;
        let z = t.zech[(k % (self.0.q - 1)) as usize];
        (z != NO_LOG).then_some(z)
    }

    /// Base-`p` digit string, most significant coefficient first; digits are
    /// separated by `.` when `p > 10`.
    pub fn format_elem(&self, x: u32) -> String {
        if self.0.n == 1 {
            return x.to_string();
        }
        let d = self.digits(x);
        let sep = if self.0.p > 10 { "." } else { "" };
        d.iter().rev().map(|c| c.to_string()).collect::<Vec<_>>().join(sep)
    }

    /// Inverse of [`Gf::format_elem`].
    pub fn parse_elem(&self, s: &str) -> Result<u32> {
        let bad = || Error::Parse(format!("bad element {s:?} for F_{}^{}", self.0.p, self.0.n));
        if self.0.n == 1 {
            let v: u32 = s.trim().parse().map_err(|_| bad())?;
            return if v < self.0.p { Ok(v) } else { Err(bad()) };
        }
        let parts: Vec<u32> = if self.0.p > 10 {
            s.split('.').map(|t| t.parse::<u32>().map_err(|_| bad())).collect::<Result<_>>()?
        } else {
            s.chars().map(|c| c.to_digit(10).ok_or_else(bad)).collect::<Result<_>>()?
        };
        if parts.len() != self.0.n as usize || parts.iter().any(|&c| c >= self.0.p) {
            return Err(bad());
        }
        let low_first: Vec<u32> = parts.into_iter().rev().collect();
        Ok(self.from_digits(&low_first))
    }
}

fn checked_order(p: u32, n: u32) -> Result<u32> {
    p.checked_pow(n)
        .filter(|&q| q < (1u32 << 31))
        .ok_or(Error::FieldTooLarge { p, n })
}

fn digits_of(mut x: u32, p: u32, n: usize) -> Vec<u32> {
    let mut d = Vec::with_capacity(n);
    for _ in 0..n {
        d.push(x % p);
        x /= p;
    }
    d
}

impl FieldSpec {
    fn build(p: u32, n: u32, q: u32, modulus: Vec<u32>) -> FieldSpec {
        let mut spec = FieldSpec { p, n, q, modulus, tables: None };
        if q <= TABLE_BUDGET {
            spec.tables = Some(spec.build_tables());
        }
        spec
    }

    fn residue_mul(&self, a: u32, b: u32) -> u32 {
        let da = digits_of(a, self.p, self.n as usize);
        let db = digits_of(b, self.p, self.n as usize);
        let prod = fp_poly::mulmod(&da, &db, &self.modulus, self.p);
        prod.iter().rev().fold(0u32, |acc, &d| acc * self.p + d)
    }

    fn residue_pow(&self, a: u32, mut e: u64) -> u32 {
        let mut acc = 1u32;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.residue_mul(acc, base);
            }
            e >>= 1;
            if e > 0 {
                base = self.residue_mul(base, base);
            }
        }
        acc
    }

    fn build_tables(&self) -> Tables {
        let q = self.q;
        let order = (q - 1) as u64;
        let factors = prime_factors(order);
        let generator = if q == 2 {
            1
        } else {
            (2..q)
                .find(|&c| factors.iter().all(|&r| self.residue_pow(c, order / r) != 1))
                .expect("the multiplicative group of a finite field is cyclic")
        };
        let m = (q - 1) as usize;
        let mut exp = vec![0u32; 2 * m];
        let mut log = vec![NO_LOG; q as usize];
        let mut cur = 1u32;
        for k in 0..m {
            assert_eq!(log[cur as usize], NO_LOG, "generator order is below q-1");
            exp[k] = cur;
            log[cur as usize] = k as u32;
            cur = self.residue_mul(cur, generator);
        }
        assert_eq!(cur, 1, "generator order does not divide q-1");
        for k in 0..m {
            exp[m + k] = exp[k];
        }
        let mut zech = vec![NO_LOG; m];
        for (k, z) in zech.iter_mut().enumerate() {
            let mut d = digits_of(exp[k], self.p, self.n as usize);
            d[0] = (d[0] + 1) % self.p;
            let s = d.iter().rev().fold(0u32, |acc, &c| acc * self.p + c);
            if s != 0 {
                *z = log[s as usize];
            }
        }
        Tables { generator, exp, log, zech }
    }
}

impl Ring for Gf {
    type Elem = u32;

    fn tag(&self) -> RingTag {
        RingTag::Finite { p: self.0.p, n: self.0.n }
    }
    fn zero(&self) -> u32 {
        0
    }
    fn one(&self) -> u32 {
        1
    }
    fn from_i64(&self, v: i64) -> u32 {
        self.embed_int(v)
    }
    fn from_bigint(&self, v: &BigInt) -> u32 {
        if v.is_negative() || v.bits() > 62 {
            self.embed_bigint(v)
        } else {
            self.embed_int(v.to_i64().expect("small"))
        }
    }
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    fn add(&self, a: &u32, b: &u32) -> u32 {
        Gf::add(self, *a, *b)
    }
    fn neg(&self, a: &u32) -> u32 {
        Gf::neg(self, *a)
    }
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        Gf::sub(self, *a, *b)
    }
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        Gf::mul(self, *a, *b)
    }
    fn div_exact(&self, a: &u32, b: &u32) -> Option<u32> {
        self.inv(*b).ok().map(|bi| Gf::mul(self, *a, bi))
    }
    fn fmt_abs(&self, a: &u32) -> String {
        self.format_elem(*a)
    }
    fn parse_abs(&self, s: &str) -> Option<u32> {
        self.parse_elem(s).ok()
    }
    fn pow(&self, a: &u32, e: u64) -> u32 {
        Gf::pow(self, *a, e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_moduli() {
        assert_eq!(Gf::new(2, 1).unwrap().modulus(), &[0, 1]);
        assert_eq!(Gf::new(2, 2).unwrap().modulus(), &[1, 1, 1]);
        assert_eq!(Gf::new(2, 4).unwrap().modulus(), &[1, 1, 0, 0, 1]);
    }

    /// Brute-force irreducibility: no monic factor of degree <= n/2.
    fn brute_irreducible(m: &[u32], p: u32) -> bool {
        let n = m.len() - 1;
        for d in 1..=n / 2 {
            let count = (p as u64).pow(d as u32);
            for c in 0..count {
                let mut f = digits_of(c as u32, p, d);
                f.push(1);
                if fp_poly::rem(m, &f, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn rabin_agrees_with_brute_force_over_small_fields() {
        for (p, n) in [(2u32, 2usize), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (5, 2)] {
            let q = p.pow(n as u32);
            for c in 0..q {
                let mut m = digits_of(c, p, n);
                m.push(1);
                assert_eq!(is_irreducible(&m, p), brute_irreducible(&m, p), "{m:?} over F_{p}");
            }
        }
    }

    #[test]
    fn pinned_modulus_is_first_irreducible_in_order() {
        for (p, n) in [(2u32, 4u32), (2, 8), (3, 3), (17, 2)] {
            let f = Gf::new(p, n).unwrap();
            let m = f.modulus();
            let index = m[..n as usize].iter().rev().fold(0u32, |a, &c| a * p + c);
            for c in 0..index {
                let mut cand = digits_of(c, p, n as usize);
                cand.push(1);
                assert!(!brute_irreducible(&cand, p));
            }
            assert!(brute_irreducible(m, p));
        }
    }

    #[test]
    fn f4_arithmetic() {
        let f = Gf::new(2, 2).unwrap();
        // t * t = t + 1
        assert_eq!(f.mul(2, 2), 3);
        assert_eq!(f.elements().collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert_eq!(f.format_elem(3), "11");
    }

    #[test]
    fn fermat_and_frobenius_order() {
        let f = Gf::new(2, 4).unwrap();
        for x in f.elements() {
            assert_eq!(f.pow(x, 16), x);
        }
        for n in 1..=10u32 {
            let f = Gf::new(2, n).unwrap();
            for x in f.elements() {
                let mut y = x;
                for _ in 0..n {
                    y = f.frobenius(y);
                }
                assert_eq!(y, x);
            }
        }
    }

    #[test]
    fn table_and_residue_paths_agree() {
        for (p, n) in [(2u32, 1u32), (2, 3), (2, 5), (3, 3), (5, 2), (2, 10), (17, 2), (31, 2)] {
            let f = Gf::new(p, n).unwrap();
            assert!(f.has_tables());
            let q = f.q();
            let step = if q > 64 { 7 } else { 1 };
            for a in (0..q).step_by(step) {
                for b in 0..q {
                    assert_eq!(f.mul(a, b), f.mul_residue(a, b), "mul {a} {b} in F_{p}^{n}");
                    assert_eq!(f.add(a, b), f.add_residue(a, b), "add {a} {b} in F_{p}^{n}");
                }
            }
        }
    }

    #[test]
    fn exhaustive_inverses_up_to_1024() {
        for (p, n) in [(2u32, 10u32), (3, 6), (17, 2), (101, 1)] {
            let f = Gf::new(p, n).unwrap();
            for x in 1..f.q() {
                assert_eq!(f.mul(f.inv(x).unwrap(), x), 1);
            }
            assert_eq!(f.inv(0), Err(Error::DivisionByZero));
        }
    }

    #[test]
    fn generator_has_full_order() {
        for (p, n) in [(2u32, 8u32), (17, 2), (3, 5)] {
            let f = Gf::new(p, n).unwrap();
            let g = f.generator().unwrap();
            let q1 = (f.q() - 1) as u64;
            for r in prime_factors(q1) {
                assert_ne!(f.pow(g, q1 / r), 1);
            }
        }
    }

    #[test]
    fn subfield_degrees_in_f16() {
        let f = Gf::new(2, 4).unwrap();
        assert_eq!(f.min_subfield_degree(0), 1);
        assert_eq!(f.min_subfield_degree(1), 1);
        let g = f.generator().unwrap();
        assert_eq!(f.min_subfield_degree(g), 4);
        // g^5 has order 3, a generator of F_4^x.
        assert_eq!(f.min_subfield_degree(f.pow(g, 5)), 2);
        // Exhaustive oracle: smallest d with x^(2^d) = x.
        for x in f.elements() {
            let d = (1..=4).find(|&d| f.pow(x, 1 << d) == x).unwrap();
            assert_eq!(f.min_subfield_degree(x), d);
        }
    }

    #[test]
    fn subfield_degree_divides_n() {
        for n in 1..=8u32 {
            let f = Gf::new(2, n).unwrap();
            for x in f.elements() {
                assert_eq!(n % f.min_subfield_degree(x), 0);
            }
        }
    }

    #[test]
    fn large_prime_field_without_tables() {
        let f = Gf::new(1_048_583, 1).unwrap();
        assert!(!f.has_tables());
        let a = 123_456;
        assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
    }

    #[test]
    fn rejects_composite() {
        assert_eq!(Gf::new(15, 1).unwrap_err(), Error::NotPrime(15));
        assert!(Gf::with_modulus(2, vec![1, 0, 1]).is_err());
    }

    #[test]
    fn element_text_round_trip() {
        let f = Gf::new(17, 2).unwrap();
        for x in f.elements() {
            assert_eq!(f.parse_elem(&f.format_elem(x)).unwrap(), x);
        }
        let f = Gf::new(2, 5).unwrap();
        for x in f.elements() {
            assert_eq!(f.parse_elem(&f.format_elem(x)).unwrap(), x);
        }
    }

    #[test]
    fn randomized_inverses_large_extension() {
        use rand::{Rng, SeedableRng};
        let f = Gf::new(2, 20).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100_000 {
            let x = rng.gen_range(1..f.q());
            assert_eq!(f.mul(x, f.inv(x).unwrap()), 1);
        }
    }
}
