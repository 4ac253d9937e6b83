//! From point counts to a Picard-rank certificate: traces of Frobenius,
//! Newton's identities, the palindromic degree-20 characteristic polynomial
//! on the complement of the algebraic classes, and a root-of-unity count.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::json;

use crate::counting::CountTable;
use crate::error::{Error, Result};
use crate::lattice::{discriminant_group, exclude_index2_overlattice, GramForm};

/// Dimension of the part of `H²` carrying the reconstructed polynomial.
pub const W_DIM: usize = 20;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Univariate polynomial over `Q`, coefficients low to high, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QPoly(Vec<BigRational>);

impl QPoly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|v| v.is_zero()) {
            c.pop();
        }
        QPoly(c)
    }

    pub fn from_ints(c: &[i64]) -> Self {
        QPoly::new(c.iter().map(|&v| rat(v)).collect())
    }

    pub fn zero() -> Self {
        QPoly(Vec::new())
    }

    pub fn one() -> Self {
        QPoly::from_ints(&[1])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.0.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn mul(&self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut c = vec![BigRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        QPoly::new(c)
    }

    pub fn scale(&self, k: &BigRational) -> QPoly {
        QPoly::new(self.0.iter().map(|c| c * k).collect())
    }

    pub fn monic(&self) -> QPoly {
        match self.0.last() {
            Some(l) => self.scale(&l.recip()),
            None => QPoly::zero(),
        }
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, d: &QPoly) -> Result<(QPoly, QPoly)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let lead_inv = d.0[dd].recip();
        let mut r = self.0.clone();
        let mut q = vec![BigRational::zero(); self.0.len().saturating_sub(dd)];
        while r.len() > dd && !r.is_empty() {
            let top = r.len() - 1;
            let c = &r[top] * &lead_inv;
            if !c.is_zero() {
                for (i, dc) in d.0.iter().enumerate() {
                    r[top - dd + i] -= &c * dc;
                }
                q[top - dd] = c;
            }
            r.pop();
        }
        Ok((QPoly::new(q), QPoly::new(r)))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            // monic remainders keep the rational coefficients from growing
            let r = a.div_rem(&b).expect("nonzero divisor").1;
            a = b;
            b = if r.is_zero() { r } else { r.monic() };
        }
        a.monic()
    }

    /// `t^deg f(1/t)`.
    pub fn reverse(&self) -> QPoly {
        QPoly::new(self.0.iter().rev().cloned().collect())
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c < &BigRational::zero();
            let abs = if neg { -c } else { c.clone() };
            let sign = match (first, neg) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            let coef = if abs.is_one() && i > 0 { String::new() } else if abs.is_integer() { abs.to_string() } else { format!("({abs})") };
            let var = match i {
                0 => String::new(),
                1 => "t".into(),
                _ => format!("t^{i}"),
            };
            write!(f, "{sign}{coef}{var}")?;
            first = false;
        }
        Ok(())
    }
}

/// Euler's totient.
pub fn totient(n: u64) -> u64 {
    let mut n0 = n;
    let mut out = n;
    let mut p = 2;
    while p * p <= n0 {
        if n0.is_multiple_of(p) {
            while n0.is_multiple_of(p) {
                n0 /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if n0 > 1 {
        out -= out / n0;
    }
    out
}

fn mobius(n: u64) -> i8 {
    let mut n = n;
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// The `d`-th cyclotomic polynomial, `Π_{k | d} (t^k − 1)^{μ(d/k)}`.
pub fn cyclotomic(d: u64) -> QPoly {
    let binom = |k: u64| {
        let mut c = vec![0i64; k as usize + 1];
        c[0] = -1;
        c[k as usize] = 1;
        QPoly::from_ints(&c)
    };
    let divisors: Vec<u64> = (1..=d).filter(|k| d.is_multiple_of(*k)).collect();
    let num = divisors.iter().filter(|&&k| mobius(d / k) == 1).fold(QPoly::one(), |acc, &k| acc.mul(&binom(k)));
    divisors.iter().filter(|&&k| mobius(d / k) == -1).fold(num, |acc, &k| acc.div_rem(&binom(k)).expect("nonzero").0)
}

/// All `d` with `φ(d) ≤ bound`. Since `φ(d) ≥ sqrt(d / 2)`, the search stops
/// at `2 bound²`.
pub fn orders_with_totient_at_most(bound: u64) -> Vec<u64> {
    (1..=2 * bound * bound.max(1)).filter(|&d| totient(d) <= bound).collect()
}

/// Roots of `f` that are roots of unity, with multiplicity, for `deg f ≤ bound`.
///
/// `gcd(f, t^M − 1)` factors as `Π_d gcd(f, Φ_d)` over the pairwise coprime
/// `Φ_d` with `d | M`, so it is assembled one cyclotomic factor at a time; this
/// keeps every remainder sequence small. The gcd is stripped repeatedly to
/// count multiplicity.
pub fn count_unit_roots_up_to(f: &QPoly, bound: u64) -> usize {
    let mut total = 0;
    for d in orders_with_totient_at_most(bound) {
        let phi = cyclotomic(d);
        let mut f = f.clone();
        loop {
            let g = f.gcd(&phi);
            let k = g.degree().unwrap_or(0);
            if k == 0 || f.degree().unwrap_or(0) == 0 {
                break;
            }
            total += k;
            f = f.div_rem(&g).expect("nonzero").0;
        }
    }
    total
}

/// Unit-root count for polynomials of degree at most 22.
pub fn count_unit_roots(f: &QPoly) -> usize {
    count_unit_roots_up_to(f, f.degree().unwrap_or(0).max(1) as u64)
}

/// The same count by trial division with each `Φ_d`.
pub fn count_unit_roots_trial(f: &QPoly) -> usize {
    let bound = f.degree().unwrap_or(0).max(1) as u64;
    let mut f = f.clone();
    let mut total = 0;
    for d in orders_with_totient_at_most(bound) {
        let phi = cyclotomic(d);
        loop {
            let (q, r) = f.div_rem(&phi).expect("nonzero");
            if !r.is_zero() || f.degree().unwrap_or(0) == 0 {
                break;
            }
            total += totient(d) as usize;
            f = q;
        }
    }
    total
}

/// Frobenius traces and their elementary symmetric functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceData {
    pub q: BigInt,
    /// `Tr((F_q*)ⁿ) = (#X(F_{qⁿ}) − 1 − q²ⁿ)/qⁿ`, `n = 1..N`.
    pub traces_full: Vec<BigRational>,
    /// `traces_full − dim V`.
    pub traces_w: Vec<BigRational>,
    /// `e_0 = 1, e_1, .., e_N`.
    pub e: Vec<BigRational>,
}

/// Newton's identities: `n e_n = Σ_{i=1}^{n} (−1)^{i−1} e_{n−i} p_i`.
pub fn newton_elementary(power_sums: &[BigRational]) -> Vec<BigRational> {
    let mut e = vec![BigRational::one()];
    for n in 1..=power_sums.len() {
        let mut s = BigRational::zero();
        for i in 1..=n {
            let t = &e[n - i] * &power_sums[i - 1];
            if i % 2 == 1 {
                s += t;
            } else {
                s -= t;
            }
        }
        e.push(s / rat(n as i64));
    }
    e.remove(0);
    e
}

/// Inverse of [`newton_elementary`]: power sums `p_1..p_N` from `e_1..e_N`.
pub fn power_sums(e: &[BigRational]) -> Vec<BigRational> {
    let ek = |k: usize| if k == 0 { BigRational::one() } else { e[k - 1].clone() };
    let mut p: Vec<BigRational> = Vec::new();
    for n in 1..=e.len() {
        // p_n = Σ_{i=1}^{n-1} (−1)^{i−1} e_i p_{n−i} + (−1)^{n−1} n e_n
        let mut s = BigRational::zero();
        for i in 1..n {
            let t = ek(i) * &p[n - i - 1];
            if i % 2 == 1 {
                s += t;
            } else {
                s -= t;
            }
        }
        let t = ek(n) * rat(n as i64);
        if n % 2 == 1 {
            s += t;
        } else {
            s -= t;
        }
        p.push(s);
    }
    p
}

/// Traces from a count table; `v_dim` is the dimension of the span of the
/// hyperplane and curve classes, on which Frobenius acts trivially.
pub fn traces_from_counts(table: &CountTable, v_dim: u32) -> TraceData {
    let q = BigInt::from(table.p);
    let traces_full: Vec<BigRational> = table.entries.iter().map(|e| {
        let qn = q.pow(e.n);
        BigRational::new(BigInt::from(e.count) - 1 - &qn * &qn, qn)
    }).collect();
    let traces_w: Vec<BigRational> = traces_full.iter().map(|t| t - rat(v_dim as i64)).collect();
    let mut e = vec![BigRational::one()];
    e.extend(newton_elementary(&traces_w));
    TraceData { q, traces_full, traces_w, e }
}

/// Monic degree-20 polynomial with the sign of its functional equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharPoly20 {
    poly: QPoly,
    sign: i8,
}

impl CharPoly20 {
    /// Checks monicity and degree and reads the sign off the coefficients.
    pub fn new(poly: QPoly) -> Result<Self> {
        if poly.degree() != Some(W_DIM) {
            return Err(Error::InvalidArgument(format!("expected degree {W_DIM}, got {:?}", poly.degree())));
        }
        if !poly.coeff(W_DIM).is_one() {
            return Err(Error::NotMonic);
        }
        let rev = poly.reverse();
        let sign = if rev == poly {
            1
        } else if rev == poly.scale(&rat(-1)) {
            -1
        } else {
            return Err(Error::InvalidArgument("polynomial satisfies no functional equation".into()));
        };
        Ok(CharPoly20 { poly, sign })
    }

    pub fn poly(&self) -> &QPoly {
        &self.poly
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// `c_0..c_20`.
    pub fn coeffs(&self) -> Vec<BigRational> {
        (0..=W_DIM).map(|i| self.poly.coeff(i)).collect()
    }

    pub fn is_palindromic(&self) -> bool {
        self.sign == 1
    }
}

/// `t²⁰ − e₁t¹⁹ + e₂t¹⁸ − … + e₁₀t¹⁰` completed palindromically. A nonzero
/// middle coefficient forces the sign +1; a zero one leaves it open.
pub fn build_charpoly(e: &[BigRational]) -> Result<CharPoly20> {
    let half = W_DIM / 2;
    if e.len() < half {
        return Err(Error::InsufficientData(format!("need e_1..e_{half}, have {}", e.len())));
    }
    if e[half - 1].is_zero() {
        return Err(Error::AmbiguousSign);
    }
    let mut c = vec![BigRational::zero(); W_DIM + 1];
    c[W_DIM] = BigRational::one();
    c[0] = BigRational::one();
    for i in 1..=half {
        let v = if i % 2 == 0 { e[i - 1].clone() } else { -e[i - 1].clone() };
        c[W_DIM - i] = v.clone();
        c[i] = v;
    }
    CharPoly20::new(QPoly::new(c))
}

/// True iff every coefficient is an integer.
pub fn integrality_check(f: &CharPoly20) -> bool {
    f.coeffs().iter().all(|c| c.is_integer())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PicardStatus {
    /// Bounds meet.
    Certified(u32),
    /// Bounds differ.
    Interval,
    /// Fewer than ten counts; no polynomial was reconstructed.
    InsufficientData,
}

/// What the bounds rest on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evidence {
    pub counts: Vec<u64>,
    pub traces: TraceData,
    pub charpoly: Option<CharPoly20>,
    pub unit_roots: Option<usize>,
    pub integral: Option<bool>,
    pub gram: GramForm,
    pub gram_det: BigInt,
    pub discriminant: Vec<BigInt>,
    pub overlattice_excluded: bool,
    pub assumption: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PicardCertificate {
    pub lower_bound: u32,
    pub upper_bound: u32,
    pub status: PicardStatus,
    pub evidence: Evidence,
}

impl PicardCertificate {
    pub fn rank(&self) -> Option<u32> {
        match self.status {
            PicardStatus::Certified(r) => Some(r),
            _ => None,
        }
    }

    /// Structured report with every rational as an exact fraction string.
    pub fn report(&self) -> serde_json::Value {
        let fr = |v: &[BigRational]| v.iter().map(fraction_string).collect::<Vec<_>>();
        let ev = &self.evidence;
        let status = match self.status {
            PicardStatus::Certified(_) => "certified",
            PicardStatus::Interval => "interval",
            PicardStatus::InsufficientData => "insufficient data",
        };
        let charpoly = ev.charpoly.as_ref().map(|f| {
            json!({
                "coefficients": fr(&f.coeffs()),
                "sign": f.sign(),
                "text": f.poly().to_string(),
            })
        });
        json!({
            "status": status,
            "rank": self.rank(),
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "counts": ev.counts,
            "q": ev.traces.q.to_string(),
            "traces_full": fr(&ev.traces.traces_full),
            "traces_w": fr(&ev.traces.traces_w),
            "e": fr(&ev.traces.e[1..]),
            "charpoly": charpoly,
            "unit_roots": ev.unit_roots,
            "integral": ev.integral,
            "gram": ev.gram.rows().iter().map(|r| r.iter().map(|c| c.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "gram_det": ev.gram_det.to_string(),
            "discriminant_group": ev.discriminant.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "index2_overlattice_excluded": ev.overlattice_excluded,
            "assumption": ev.assumption,
        })
    }
}

pub const V_ASSUMPTION: &str =
    "Frobenius fixes the hyperplane class and the determinantal curve class; the Gram form shows they span a rank-2 sublattice";

/// Lower bound 2 from the nondegenerate Gram form; upper bound
/// `2 + #(unit roots of f_W)`.
pub fn certify_picard(table: &CountTable, gram: &GramForm) -> Result<PicardCertificate> {
    let gram_det = gram.det();
    if gram_det.is_zero() {
        return Err(Error::DegenerateForm);
    }
    let discriminant = discriminant_group(gram)?;
    let lower = 2u32;
    let traces = traces_from_counts(table, lower);
    let mut evidence = Evidence {
        counts: table.counts(),
        traces: traces.clone(),
        charpoly: None,
        unit_roots: None,
        integral: None,
        gram: gram.clone(),
        gram_det,
        discriminant,
        overlattice_excluded: exclude_index2_overlattice(gram),
        assumption: V_ASSUMPTION.into(),
    };
    let full = lower + W_DIM as u32;
    if traces.traces_w.len() < W_DIM / 2 {
        return Ok(PicardCertificate { lower_bound: lower, upper_bound: full, status: PicardStatus::InsufficientData, evidence });
    }
    let f = build_charpoly(&traces.e[1..=W_DIM / 2])?;
    let units = count_unit_roots(f.poly());
    evidence.integral = Some(integrality_check(&f));
    evidence.unit_roots = Some(units);
    evidence.charpoly = Some(f);
    let upper = lower + units as u32;
    let status = if upper == lower { PicardStatus::Certified(lower) } else { PicardStatus::Interval };
    Ok(PicardCertificate { lower_bound: lower, upper_bound: upper, status, evidence })
}

/// `a/b` as a reduced fraction string; integers print without a denominator.
pub fn fraction_string(r: &BigRational) -> String {
    let g = r.numer().gcd(r.denom());
    let (n, d) = (r.numer() / &g, r.denom() / &g);
    if d.is_one() {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}
