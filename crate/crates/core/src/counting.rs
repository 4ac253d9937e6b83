//! Counting and enumerating points of quartic surfaces in `P³(F_q)`.
//!
//! `P³` is split into the charts `x_c = 1` with earlier coordinates zero.
//! In each chart all coordinates but `x3` are fixed, the quartic becomes a
//! univariate polynomial of degree at most 4 in `x3`, and its roots in `F_q`
//! are counted.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::algebra::poly::MultiPoly;
use crate::algebra::PolyMatrix;
use crate::cayley::{rank4, FormEvaluator};
use crate::error::{Error, Result};
use crate::field::Gf;

/// Default cap on `q³` for point enumeration.
pub const ENUMERATION_BUDGET: u64 = 1 << 27;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RootMethod {
    /// Evaluate the univariate at every element of `F_q`.
    #[default]
    Direct,
    /// `deg gcd(f, t^q - t)`.
    Gcd,
}

#[derive(Clone, Debug, Default)]
pub struct CountConfig {
    pub method: RootMethod,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Record wall time per entry of a count table.
    pub timings: bool,
}

/// One affine chart: `x_leading = 1`, earlier coordinates 0, later free.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Chart {
    pub leading: usize,
    pub free: u32,
}

/// The chart decomposition of `P³(F_q)` and its work blocks.
#[derive(Clone, Debug)]
pub struct ChartPlan {
    pub q: u64,
    pub charts: [Chart; 4],
}

impl ChartPlan {
    pub fn new(q: u64) -> Self {
        ChartPlan { q, charts: std::array::from_fn(|c| Chart { leading: c, free: 3 - c as u32 }) }
    }

    pub fn chart_size(&self, c: usize) -> u64 {
        self.q.pow(self.charts[c].free)
    }

    /// `q³ + q² + q + 1`.
    pub fn total(&self) -> u64 {
        (0..4).map(|c| self.chart_size(c)).sum()
    }

    /// Blocks of chart 0, one per value of `x1`; the other charts form a
    /// single trailing block.
    pub fn blocks(&self) -> u64 {
        self.q + 1
    }
}

/// Point counts `#S(F_{p^n})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountEntry {
    pub n: u32,
    pub q: u64,
    pub count: u64,
    pub elapsed: Option<Duration>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    pub p: u32,
    pub entries: Vec<CountEntry>,
}

impl CountTable {
    pub fn counts(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.count).collect()
    }

    pub fn from_counts(p: u32, counts: &[u64]) -> Self {
        let entries = counts.iter().enumerate().map(|(i, &count)| {
            let n = i as u32 + 1;
            CountEntry { n, q: (p as u64).pow(n), count, elapsed: None }
        }).collect();
        CountTable { p, entries }
    }
}

/// The quartic restricted to the lines `(x0, x1, x2, t)`.
struct LineSpecializer {
    field: Gf,
    /// `(e0, e1, e2, e3, c)` for each term.
    terms: Vec<([u16; 4], u32)>,
}

impl LineSpecializer {
    fn new(f: &MultiPoly<Gf>, field: &Gf) -> Self {
        LineSpecializer { field: field.clone(), terms: f.terms().map(|(m, c)| (m.0, *c)).collect() }
    }

    /// `d[e3][e2] = Σ c x0^e0 x1^e1` over terms with those exponents.
    fn fold_prefix(&self, x0: u32, x1: u32) -> [[u32; 5]; 5] {
        let f = &self.field;
        let mut d = [[0u32; 5]; 5];
        for (e, c) in &self.terms {
            let v = f.mul(*c, f.mul(f.pow(x0, e[0] as u64), f.pow(x1, e[1] as u64)));
            let slot = &mut d[e[3] as usize][e[2] as usize];
            *slot = f.add(*slot, v);
        }
        d
    }

    /// Coefficients `c_0..c_4` of the univariate in `t` at `x2 = b`.
    #[inline]
    fn line(&self, d: &[[u32; 5]; 5], b: u32) -> [u32; 5] {
        let f = &self.field;
        std::array::from_fn(|e3| {
            let row = &d[e3];
            row.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, b), c))
        })
    }
}

/// Counts roots in `F_q` of univariates of degree at most 4.
struct RootCounter<'a> {
    field: &'a Gf,
    method: RootMethod,
    /// Tables for the characteristic-2 log-domain path.
    logs: Option<(&'a [u32], &'a [u32])>,
}

impl<'a> RootCounter<'a> {
    fn new(field: &'a Gf, method: RootMethod) -> Self {
        let logs = match (field.p(), field.exp_table(), field.log_table()) {
            (2, Some(e), Some(l)) if field.q() >= 8 => Some((e, l)),
            _ => None,
        };
        RootCounter { field, method, logs }
    }

    fn count(&self, c: &[u32; 5]) -> u64 {
        if c.iter().all(|&v| v == 0) {
            return self.field.q() as u64;
        }
        match self.method {
            RootMethod::Direct => match self.logs {
                Some((exp, log)) => self.direct_char2(c, exp, log),
                None => self.direct(c),
            },
            RootMethod::Gcd => gcd_root_count(self.field, c),
        }
    }

    fn direct(&self, c: &[u32; 5]) -> u64 {
        let f = self.field;
        f.elements().filter(|&t| horner(f, c, t) == 0).count() as u64
    }

    /// `f(g^k) = Σ_i exp[log c_i + i k]`, additions being XOR.
    fn direct_char2(&self, c: &[u32; 5], exp: &[u32], log: &[u32]) -> u64 {
        let m = self.field.q() - 1;
        let mut idx = [0u32; 5];
        let mut step = [0u32; 5];
        let mut len = 0;
        for (i, &v) in c.iter().enumerate() {
            if v != 0 {
                idx[len] = log[v as usize];
                step[len] = i as u32;
                len += 1;
            }
        }
        let mut zeros = (c[0] == 0) as u64;
        for _ in 0..m {
            let mut acc = 0;
            for s in 0..len {
                acc ^= exp[idx[s] as usize];
                let v = idx[s] + step[s];
                idx[s] = if v >= m { v - m } else { v };
            }
            zeros += (acc == 0) as u64;
        }
        zeros
    }
}

#[inline]
fn horner(f: &Gf, c: &[u32; 5], t: u32) -> u32 {
    c.iter().rev().fold(0, |acc, &v| f.add(f.mul(acc, t), v))
}

/// Small dense polynomials over `F_q`, low to high, at most degree 8.
type Small = ([u32; 9], usize);

fn small_trim(mut a: Small) -> Small {
    while a.1 > 0 && a.0[a.1 - 1] == 0 {
        a.1 -= 1;
    }
    a
}

fn small_rem(f: &Gf, a: Small, m: &Small) -> Small {
    let mut a = small_trim(a);
    let inv = f.inv(m.0[m.1 - 1]).expect("nonzero leading coefficient");
    while a.1 >= m.1 {
        let lead = f.mul(a.0[a.1 - 1], inv);
        let shift = a.1 - m.1;
        for i in 0..m.1 {
            a.0[shift + i] = f.sub(a.0[shift + i], f.mul(lead, m.0[i]));
        }
        a = small_trim(a);
    }
    a
}

fn small_mulmod(f: &Gf, a: &Small, b: &Small, m: &Small) -> Small {
    let mut out = ([0u32; 9], 0);
    if a.1 == 0 || b.1 == 0 {
        return out;
    }
    for i in 0..a.1 {
        for j in 0..b.1 {
            out.0[i + j] = f.add(out.0[i + j], f.mul(a.0[i], b.0[j]));
        }
    }
    out.1 = a.1 + b.1 - 1;
    small_rem(f, out, m)
}

/// Number of distinct roots in `F_q` of a nonzero polynomial of degree ≤ 4.
fn gcd_root_count(f: &Gf, c: &[u32; 5]) -> u64 {
    let mut m: Small = ([0; 9], 5);
    m.0[..5].copy_from_slice(c);
    let m = small_trim(m);
    if m.1 <= 1 {
        return 0;
    }
    // t^q mod m by square and multiply
    let t: Small = small_rem(f, ([0, 1, 0, 0, 0, 0, 0, 0, 0], 2), &m);
    let mut acc: Small = small_rem(f, ([1, 0, 0, 0, 0, 0, 0, 0, 0], 1), &m);
    let mut base = t;
    let mut e = f.q() as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = small_mulmod(f, &acc, &base, &m);
        }
        e >>= 1;
        if e > 0 {
            base = small_mulmod(f, &base, &base, &m);
        }
    }
    // acc - t
    let mut r = acc;
    if r.1 < 2 {
        r.1 = 2;
    }
    r.0[1] = f.sub(r.0[1], 1);
    let mut a = m;
    let mut b = small_trim(r);
    while b.1 > 0 {
        let rem = small_rem(f, a, &b);
        a = b;
        b = rem;
    }
    (a.1 - 1) as u64
}

/// Runs `job` on a dedicated pool of `threads` workers, or inline on the
/// global pool for `None`.
pub fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn check_quartic(f: &MultiPoly<Gf>) -> Result<()> {
    match f.homogeneous_degree() {
        Some(4) => Ok(()),
        _ if f.is_zero() => Err(Error::InvalidArgument("the zero polynomial is not a quartic".into())),
        _ => Err(Error::InvalidArgument("expected a homogeneous quartic".into())),
    }
}

/// Lifts a form over the prime field `F_p` into `F_{p^n}`.
pub fn lift_to(f: &MultiPoly<Gf>, field: &Gf) -> Result<MultiPoly<Gf>> {
    let base = f.ring();
    if base == field {
        return Ok(f.clone());
    }
    if base.n() != 1 || base.p() != field.p() {
        return Err(Error::RingMismatch(format!("F_{}^{}", base.p(), base.n()), format!("F_{}^{}", field.p(), field.n())));
    }
    // prime-field elements keep their index in every extension
    Ok(f.map_ring(field, |&c| c))
}

/// `#{x ∈ P³(F_q) : f(x) = 0}` for a quartic over `field`.
pub fn count_points_over(f: &MultiPoly<Gf>, field: &Gf, cfg: &CountConfig) -> Result<u64> {
    let f = lift_to(f, field)?;
    check_quartic(&f)?;
    let spec = LineSpecializer::new(&f, field);
    let q = field.q();
    with_pool(cfg.threads, || {
        let roots = RootCounter::new(field, cfg.method);
        let chart0: Vec<u64> = (0..q)
            .into_par_iter()
            .map(|a| {
                let d = spec.fold_prefix(1, a);
                (0..q).map(|b| roots.count(&spec.line(&d, b))).sum::<u64>()
            })
            .collect();
        let d1 = spec.fold_prefix(0, 1);
        let chart1: u64 = (0..q).map(|b| roots.count(&spec.line(&d1, b))).sum();
        let d2 = spec.fold_prefix(0, 0);
        let chart2 = roots.count(&spec.line(&d2, 1));
        let chart3 = (spec.line(&d2, 0)[4] == 0) as u64;
        chart0.iter().sum::<u64>() + chart1 + chart2 + chart3
    })
}

/// `#S(F_{p^n})` for a quartic over `F_p`.
pub fn count_points(f: &MultiPoly<Gf>, n: u32) -> Result<u64> {
    count_points_with(f, n, &CountConfig::default())
}

pub fn count_points_with(f: &MultiPoly<Gf>, n: u32, cfg: &CountConfig) -> Result<u64> {
    let field = Gf::new(f.ring().p(), n)?;
    count_points_over(f, &field, cfg)
}

/// Counts for `n = 1..=n_max`.
pub fn count_table(f: &MultiPoly<Gf>, n_max: u32, cfg: &CountConfig) -> Result<CountTable> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let p = f.ring().p();
    let mut entries = Vec::new();
    for n in 1..=n_max {
        let start = Instant::now();
        let count = count_points_with(f, n, cfg)?;
        let elapsed = cfg.timings.then(|| start.elapsed());
        entries.push(CountEntry { n, q: (p as u64).pow(n), count, elapsed });
    }
    Ok(CountTable { p, entries })
}

/// Every normalized point of `P³(F_q)`, chart by chart.
pub fn projective_points(q: u32) -> impl Iterator<Item = [u32; 4]> {
    (0..4usize).flat_map(move |c| {
        (0..q.pow(3 - c as u32)).map(move |t| {
            let mut x = [0u32; 4];
            x[c] = 1;
            let mut t = t;
            for v in (c + 1..4).rev() {
                x[v] = t % q;
                t /= q;
            }
            x
        })
    })
}

/// Brute-force count by evaluating `f` at every point of `P³(F_q)`.
pub fn count_points_naive(f: &MultiPoly<Gf>, field: &Gf) -> Result<u64> {
    let f = lift_to(f, field)?;
    let ev = FormEvaluator::new(&f);
    Ok(projective_points(field.q()).filter(|x| ev.eval(x) == 0).count() as u64)
}

/// All `F_q`-points of `f = 0`, normalized (first nonzero coordinate 1),
/// ordered by chart, then lexicographically.
pub fn enumerate_surface_points(f: &MultiPoly<Gf>, field: &Gf) -> Result<Vec<[u32; 4]>> {
    enumerate_surface_points_capped(f, field, ENUMERATION_BUDGET)
}

pub fn enumerate_surface_points_capped(f: &MultiPoly<Gf>, field: &Gf, budget: u64) -> Result<Vec<[u32; 4]>> {
    let f = lift_to(f, field)?;
    check_quartic(&f)?;
    let q = field.q();
    if (q as u64).pow(3) > budget {
        return Err(Error::BudgetExceeded(format!("q^3 = {} exceeds {budget}", (q as u64).pow(3))));
    }
    let spec = LineSpecializer::new(&f, field);
    let roots_of = |c: &[u32; 5]| -> Vec<u32> { field.elements().filter(|&t| horner(field, c, t) == 0).collect() };
    let mut chart0: Vec<Vec<[u32; 4]>> = (0..q)
        .into_par_iter()
        .map(|a| {
            let d = spec.fold_prefix(1, a);
            let mut out = Vec::new();
            for b in 0..q {
                for t in roots_of(&spec.line(&d, b)) {
                    out.push([1, a, b, t]);
                }
            }
            out
        })
        .collect();
    let mut pts: Vec<[u32; 4]> = chart0.drain(..).flatten().collect();
    let d1 = spec.fold_prefix(0, 1);
    for b in 0..q {
        for t in roots_of(&spec.line(&d1, b)) {
            pts.push([0, 1, b, t]);
        }
    }
    let d2 = spec.fold_prefix(0, 0);
    for t in roots_of(&spec.line(&d2, 1)) {
        pts.push([0, 0, 1, t]);
    }
    if spec.line(&d2, 0)[4] == 0 {
        pts.push([0, 0, 0, 1]);
    }
    Ok(pts)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothnessEntry {
    pub k: u32,
    pub q: u64,
    pub surface_points: u64,
    pub singular_points: Vec<[u32; 4]>,
}

/// Singular points of `f = 0` over `F_{p^k}`, `k ≤ k_max`. A bounded scan:
/// finding none says nothing about larger fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothnessReport {
    pub p: u32,
    pub entries: Vec<SmoothnessEntry>,
}

impl SmoothnessReport {
    pub fn smooth(&self) -> bool {
        self.entries.iter().all(|e| e.singular_points.is_empty())
    }
}

pub fn smoothness_scan(f: &MultiPoly<Gf>, k_max: u32) -> Result<SmoothnessReport> {
    let p = f.ring().p();
    let mut entries = Vec::new();
    for k in 1..=k_max {
        let field = Gf::new(p, k)?;
        let lifted = lift_to(f, &field)?;
        let partials: Vec<FormEvaluator> = (0..4).map(|i| FormEvaluator::new(&lifted.derivative(i))).collect();
        let pts = enumerate_surface_points(&lifted, &field)?;
        let singular_points = pts.iter().copied().filter(|x| partials.iter().all(|d| d.eval(x) == 0)).collect();
        entries.push(SmoothnessEntry { k, q: field.q() as u64, surface_points: pts.len() as u64, singular_points });
    }
    Ok(SmoothnessReport { p, entries })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rank3Report {
    pub points: u64,
    /// Points where the rank is not 3, with the rank found.
    pub failures: Vec<([u32; 4], usize)>,
}

impl Rank3Report {
    pub fn all_rank3(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Rank of `M(x)` at every point of `det M = 0` over `field`.
pub fn rank3_scan(m: &PolyMatrix<Gf>, field: &Gf) -> Result<Rank3Report> {
    if m.ring().p() != field.p() {
        return Err(Error::RingMismatch(m.ring().p().to_string(), field.p().to_string()));
    }
    let lifted = PolyMatrix::from_fn(|r, c| lift_to(m.get(r, c), field).expect("same characteristic"));
    let lin = crate::cayley::LinearMatrix::new(&lifted)?;
    let pts = enumerate_surface_points(&lifted.det(), field)?;
    let failures = pts.iter().filter_map(|x| {
        let r = rank4(field, &lin.eval(x));
        (r != 3).then_some((*x, r))
    }).collect();
    Ok(Rank3Report { points: pts.len() as u64, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::monomial::Monomial;
    use crate::cayley::Tritensor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bundled_quartic(p: u32) -> MultiPoly<Gf> {
        let f = Gf::new(p, 1).unwrap();
        Tritensor::bundled().to_field(&f).matrix(0).det()
    }

    fn monomial(f: &Gf, e: [u16; 4]) -> MultiPoly<Gf> {
        MultiPoly::from_terms(f, [(Monomial(e), 1)])
    }

    #[test]
    fn chart_plan_covers_projective_space() {
        for q in [2u64, 3, 16, 17] {
            let plan = ChartPlan::new(q);
            assert_eq!(plan.total(), q * q * q + q * q + q + 1);
            assert_eq!(projective_points(q as u32).count() as u64, plan.total());
        }
    }

    #[test]
    fn small_counts() {
        let q = bundled_quartic(2);
        assert_eq!(count_points(&q, 1).unwrap(), 6);
        assert_eq!(count_points(&q, 4).unwrap(), 258);
        let f2 = Gf::new(2, 1).unwrap();
        assert_eq!(count_points(&monomial(&f2, [4, 0, 0, 0]), 1).unwrap(), 7);
        // x0 x1 x2 x3 vanishes on the 15 - 1 points with a zero coordinate
        assert_eq!(count_points(&monomial(&f2, [1, 1, 1, 1]), 1).unwrap(), 14);
        assert!(count_points(&MultiPoly::zero(&f2), 1).is_err());
    }

    #[test]
    fn product_of_coordinates_by_inclusion_exclusion() {
        // points with some zero coordinate: all points minus (q-1)^3
        for (p, n) in [(2u32, 1u32), (2, 2), (3, 1), (5, 1), (2, 3)] {
            let f = Gf::new(p, 1).unwrap();
            let q = (p as u64).pow(n);
            let expect = q * q * q + q * q + q + 1 - (q - 1).pow(3);
            assert_eq!(count_points(&monomial(&f, [1, 1, 1, 1]), n).unwrap(), expect);
        }
    }

    #[test]
    fn methods_and_paths_agree_with_naive_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (p, n) in [(2u32, 1u32), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (5, 1), (7, 1), (13, 1)] {
            let base = Gf::new(p, 1).unwrap();
            let field = Gf::new(p, n).unwrap();
            for _ in 0..3 {
                let f = MultiPoly::from_terms(&base, Monomial::all_of_degree(4).into_iter().map(|m| (m, rng.gen_range(0..p))));
                if f.is_zero() {
                    continue;
                }
                let naive = count_points_naive(&f, &field).unwrap();
                for method in [RootMethod::Direct, RootMethod::Gcd] {
                    let cfg = CountConfig { method, ..Default::default() };
                    assert_eq!(count_points_over(&f, &field, &cfg).unwrap(), naive, "p={p} n={n} {method:?}");
                }
                assert_eq!(enumerate_surface_points(&f, &field).unwrap().len() as u64, naive);
            }
        }
    }

    #[test]
    fn enumeration_is_normalized_and_on_the_surface() {
        let q = bundled_quartic(2);
        let f4 = Gf::new(2, 2).unwrap();
        let pts = enumerate_surface_points(&q, &Gf::new(2, 1).unwrap()).unwrap();
        assert_eq!(pts.len(), 6);
        let lifted = lift_to(&q, &f4).unwrap();
        let pts4 = enumerate_surface_points(&lifted, &f4).unwrap();
        assert_eq!(pts4.len(), 26);
        for x in &pts4 {
            assert_eq!(lifted.eval(x), 0);
            assert_eq!(*x.iter().find(|&&c| c != 0).unwrap(), 1);
        }
        let mut sorted = pts4.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 26);
        assert!(matches!(enumerate_surface_points_capped(&q, &f4, 10), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn smoothness() {
        let rep = smoothness_scan(&bundled_quartic(2), 3).unwrap();
        assert!(rep.smooth());
        assert_eq!(rep.entries.iter().map(|e| e.surface_points).collect::<Vec<_>>(), vec![6, 26, 90]);
        let f2 = Gf::new(2, 1).unwrap();
        let rep = smoothness_scan(&monomial(&f2, [4, 0, 0, 0]), 1).unwrap();
        assert_eq!(rep.entries[0].singular_points.len(), 7);
        let f3 = Gf::new(3, 1).unwrap();
        let deg = &monomial(&f3, [2, 2, 0, 0]) + &monomial(&f3, [0, 0, 2, 2]);
        let rep = smoothness_scan(&deg, 1).unwrap();
        assert!(rep.entries[0].singular_points.contains(&[0, 1, 0, 0]));
    }

    #[test]
    fn rank3() {
        for p in [2u32, 17] {
            let f = Gf::new(p, 1).unwrap();
            let m = Tritensor::bundled().to_field(&f).matrix(0);
            let rep = rank3_scan(&m, &f).unwrap();
            assert!(rep.all_rank3());
            if p == 2 {
                assert_eq!(rep.points, 6);
            }
        }
        let f = Gf::new(3, 1).unwrap();
        let diag = Tritensor::diagonal(&f).matrix(0);
        let rep = rank3_scan(&diag, &f).unwrap();
        assert!(rep.failures.contains(&([0, 0, 1, 1], 2)));
    }

    #[test]
    fn thread_count_independence() {
        let q = bundled_quartic(2);
        let counts: Vec<u64> = [1, 2, 8]
            .iter()
            .map(|&t| count_points_with(&q, 5, &CountConfig { threads: Some(t), ..Default::default() }).unwrap())
            .collect();
        assert_eq!(counts, vec![1146; 3]);
    }
}
