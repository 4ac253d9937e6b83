//! Periodic points of the automorphism over finite fields and the
//! degree-18 presentation of `g` by exact linear algebra over `F_p`.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::dense::FpForm;
use crate::algebra::linalg::{fp_rank, FpEchelon};
use crate::algebra::monomial::Monomial;
use crate::algebra::poly::MultiPoly;
use crate::cayley::{normalize, symbolic_composition, AutomorphismChain, Composite, MapQuadruple, Tritensor};
use crate::counting::{enumerate_surface_points, lift_to, smoothness_scan};
use crate::error::{Error, Result};
use crate::field::Gf;
use crate::lattice::lefschetz_number;

/// A self-map of the points of a surface over a finite field.
pub trait PointMap: Sync {
    fn field(&self) -> &Gf;
    fn on_surface(&self, x: &[u32; 4]) -> bool;
    fn apply(&self, x: &[u32; 4]) -> Result<[u32; 4]>;
    fn apply_inverse(&self, x: &[u32; 4]) -> Result<[u32; 4]>;
}

impl PointMap for AutomorphismChain {
    fn field(&self) -> &Gf {
        AutomorphismChain::field(self)
    }

    fn on_surface(&self, x: &[u32; 4]) -> bool {
        AutomorphismChain::on_surface(self, 0, x)
    }

    fn apply(&self, x: &[u32; 4]) -> Result<[u32; 4]> {
        AutomorphismChain::apply(self, x)
    }

    fn apply_inverse(&self, x: &[u32; 4]) -> Result<[u32; 4]> {
        AutomorphismChain::apply_inverse(self, x)
    }
}

/// The chain with cofactor columns (and rows) tried from `first` onwards.
pub struct ColumnOrder<'a> {
    pub chain: &'a AutomorphismChain,
    pub first: usize,
}

impl PointMap for ColumnOrder<'_> {
    fn field(&self) -> &Gf {
        self.chain.field()
    }

    fn on_surface(&self, x: &[u32; 4]) -> bool {
        self.chain.on_surface(0, x)
    }

    fn apply(&self, x: &[u32; 4]) -> Result<[u32; 4]> {
        let mut v = *x;
        for n in 0..3 {
            v = self.chain.forward_stage_from(n, &v, self.first)?;
        }
        Ok(v)
    }

    fn apply_inverse(&self, x: &[u32; 4]) -> Result<[u32; 4]> {
        let mut v = *x;
        for n in (0..3).rev() {
            v = self.chain.inverse_stage_from(n, &v, self.first)?;
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicPoint {
    pub coords: [u32; 4],
    /// Degree of the smallest field containing the coordinates.
    pub degree: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicReport {
    pub p: u32,
    pub t: u32,
    pub period: u32,
    pub surface_points: u64,
    /// `#{x : g^period(x) = x}` over `F_{p^t}`.
    pub fixed_count: u64,
    /// Periodic points whose field of definition has degree exactly `t`.
    pub new_points: u64,
    /// Fixed points of `g` itself; reported, not interpreted.
    pub fixed_points_of_g: u64,
    /// Points where some stage had no nonvanishing cofactor.
    pub undefined: u64,
    /// Every periodic point satisfied `g^{period−1}(x) = g⁻¹(x)`.
    pub inverse_verified: bool,
    /// Lefschetz number of `g^period`.
    pub lefschetz_bound: u64,
    pub points: Vec<PeriodicPoint>,
}

fn point_degree(field: &Gf, x: &[u32; 4]) -> u32 {
    x.iter().fold(1, |acc, &c| acc.lcm(&field.min_subfield_degree(c)))
}

enum Orbit {
    Undefined,
    Moved { fixed_by_g: bool },
    Periodic { fixed_by_g: bool, inverse_ok: bool },
}

fn orbit_of(map: &impl PointMap, x: &[u32; 4], period: u32) -> Orbit {
    let mut v = *x;
    let mut before_last = *x;
    let mut fixed_by_g = false;
    for step in 1..=period {
        before_last = v;
        v = match map.apply(&v) {
            Ok(v) => v,
            Err(_) => return Orbit::Undefined,
        };
        if step == 1 {
            fixed_by_g = v == *x;
        }
    }
    if v != *x {
        return Orbit::Moved { fixed_by_g };
    }
    let inverse_ok = map.apply_inverse(x).is_ok_and(|w| w == before_last);
    Orbit::Periodic { fixed_by_g, inverse_ok }
}

/// Points of `points` with `g^period(x) = x` under `map`.
pub fn periodic_points_of(map: &impl PointMap, points: &[[u32; 4]], period: u32) -> Result<PeriodicReport> {
    if period == 0 {
        return Err(Error::InvalidArgument("period must be at least 1".into()));
    }
    let field = map.field();
    let orbits: Vec<Orbit> = points.par_iter().map(|x| orbit_of(map, x, period)).collect();
    let mut report = PeriodicReport {
        p: field.p(),
        t: field.n(),
        period,
        surface_points: points.len() as u64,
        fixed_count: 0,
        new_points: 0,
        fixed_points_of_g: 0,
        undefined: 0,
        inverse_verified: true,
        lefschetz_bound: lefschetz_number(period as i64)?.to_u64().unwrap_or(u64::MAX),
        points: Vec::new(),
    };
    for (x, o) in points.iter().zip(orbits) {
        match o {
            Orbit::Undefined => report.undefined += 1,
            Orbit::Moved { fixed_by_g } => report.fixed_points_of_g += fixed_by_g as u64,
            Orbit::Periodic { fixed_by_g, inverse_ok } => {
                report.fixed_points_of_g += fixed_by_g as u64;
                report.inverse_verified &= inverse_ok;
                let degree = point_degree(field, x);
                report.new_points += (degree == field.n()) as u64;
                report.points.push(PeriodicPoint { coords: *x, degree });
            }
        }
    }
    report.fixed_count = report.points.len() as u64;
    Ok(report)
}

fn check_prime_field(t: &Tritensor<Gf>) -> Result<u32> {
    let f = t.ring();
    if f.n() != 1 {
        return Err(Error::InvalidArgument("the tritensor must be defined over a prime field".into()));
    }
    Ok(f.p())
}

/// Bad reduction shows up as a vanishing determinant or a singular point
/// of `S(F_p)`.
fn check_reduction(t: &Tritensor<Gf>) -> Result<MultiPoly<Gf>> {
    let f = t.matrix(0).det();
    if f.is_zero() {
        return Err(Error::BadReduction(format!("det M0 vanishes mod {}", t.ring().p())));
    }
    let scan = smoothness_scan(&f, 1)?;
    if !scan.smooth() {
        return Err(Error::BadReduction(format!("S is singular mod {}", t.ring().p())));
    }
    Ok(f)
}

/// Periodic points of `g` on `S(F_{p^t_deg})`.
pub fn find_periodic_points(t: &Tritensor<Gf>, t_deg: u32, period: u32) -> Result<PeriodicReport> {
    let p = check_prime_field(t)?;
    let f = check_reduction(t)?;
    let field = Gf::new(p, t_deg)?;
    let chain = AutomorphismChain::new(&t.map_ring(&field, |&c| c))?;
    let points = enumerate_surface_points(&f, &field)?;
    periodic_points_of(&chain, &points, period)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitPartition {
    /// Galois orbit sizes, ascending.
    pub orbits: Vec<u32>,
    /// Orbit sizes the reports can see; all others are untested.
    pub tested_degrees: Vec<u32>,
}

/// Galois orbits of periodic points, by degree of the field of definition.
pub fn orbit_partition(reports: &[PeriodicReport]) -> OrbitPartition {
    let mut tested = BTreeMap::new();
    for r in reports {
        for d in (1..=r.t).filter(|d| r.t % d == 0) {
            let best = tested.entry(d).or_insert(r);
            if r.t > best.t {
                *best = r;
            }
        }
    }
    let mut orbits = Vec::new();
    for (&d, r) in &tested {
        let n = r.points.iter().filter(|x| x.degree == d).count() as u32;
        orbits.extend(std::iter::repeat_n(d, (n / d) as usize));
    }
    OrbitPartition { orbits, tested_degrees: tested.keys().copied().collect() }
}

pub const G_DEGREE: u32 = 18;

/// Unknowns of the degree-18 system: the coefficients of `(G_0, …, G_3)`,
/// component-major, monomials in descending graded-lex order.
#[derive(Clone, Debug)]
pub struct Degree18System {
    p: u32,
    monomials: Vec<Monomial>,
    /// Positions of monomials not divisible by the leading monomial of
    /// `det M0`; these span the forms modulo `det M0`.
    normal: Vec<usize>,
    det: FpForm,
}

impl Degree18System {
    pub fn new(det_m0: &FpForm) -> Result<Self> {
        let lead = det_m0
            .terms()
            .into_iter()
            .map(|(m, _)| m)
            .max()
            .ok_or(Error::DivisionByZero)?;
        let monomials = Monomial::all_of_degree(G_DEGREE);
        let normal = (0..monomials.len()).filter(|&i| !lead.divides(&monomials[i])).collect();
        Ok(Degree18System { p: det_m0.p(), monomials, normal, det: det_m0.clone() })
    }

    pub fn unknowns(&self) -> usize {
        4 * self.monomials.len()
    }

    pub fn reduced_unknowns(&self) -> usize {
        4 * self.normal.len()
    }

    /// `4 · #{degree-18 monomials divisible by the leading monomial}`.
    pub fn vanishing_dim(&self) -> usize {
        4 * (self.monomials.len() - self.normal.len())
    }

    /// The prime-field rows `y_c G_i(x) − y_i G_c(x) = 0`, `i ≠ c`, where
    /// `y = g(x)` is normalized with `y_c = 1`; each row over `F_{p^k}` is
    /// split along the power basis.
    pub fn rows_at(&self, field: &Gf, x: &[u32; 4], y: &[u32; 4]) -> Vec<Vec<u32>> {
        let y = normalize(field, y).expect("image is a projective point");
        let c = y.iter().position(|&v| v == 1).expect("normalized");
        let vals = monomial_values(field, &self.monomials, x);
        let nm = self.monomials.len();
        let k = field.n() as usize;
        let mut rows = Vec::with_capacity(3 * k);
        for i in (0..4).filter(|&i| i != c) {
            let mut split = vec![vec![0u32; self.unknowns()]; k];
            let ny = field.neg(y[i]);
            for (m, &v) in vals.iter().enumerate() {
                for (r, d) in field.digits(v).into_iter().enumerate() {
                    split[r][i * nm + m] = d;
                }
                for (r, d) in field.digits(field.mul(ny, v)).into_iter().enumerate() {
                    split[r][c * nm + m] = d;
                }
            }
            rows.extend(split);
        }
        rows
    }

    /// Restriction of a full row to the normal-monomial unknowns.
    pub fn reduce_row(&self, row: &[u32]) -> Vec<u32> {
        let nm = self.monomials.len();
        (0..4).flat_map(|i| self.normal.iter().map(move |&m| row[i * nm + m])).collect()
    }

    /// Coefficient vector of a quadruple of degree-18 forms.
    pub fn pack(&self, g: &[FpForm; 4]) -> Vec<u32> {
        g.iter().flat_map(|f| self.monomials.iter().map(move |m| f.coeff(m))).collect()
    }

    fn unpack_reduced(&self, v: &[u32]) -> [FpForm; 4] {
        let nn = self.normal.len();
        std::array::from_fn(|i| {
            let mut f = FpForm::zero(self.p, G_DEGREE);
            for (j, &m) in self.normal.iter().enumerate() {
                f.set(&self.monomials[m], v[i * nn + j]);
            }
            f
        })
    }
}

fn monomial_values(field: &Gf, monomials: &[Monomial], x: &[u32; 4]) -> Vec<u32> {
    let d = monomials.first().map_or(0, |m| m.degree()) as usize;
    let pw: Vec<Vec<u32>> = x
        .iter()
        .map(|&c| {
            let mut row = vec![1u32; d + 1];
            for e in 1..=d {
                row[e] = field.mul(row[e - 1], c);
            }
            row
        })
        .collect();
    monomials
        .iter()
        .map(|m| (0..4).fold(1, |acc, i| field.mul(acc, pw[i][m.0[i] as usize])))
        .collect()
}

#[derive(Clone, Debug)]
pub struct Degree18Config {
    /// Extension degrees `k` of the sample fields, used round-robin.
    pub extensions: Vec<u32>,
    pub batch_points: usize,
    /// Maximum number of sample points.
    pub sample_budget: usize,
    pub seed: u64,
}

impl Default for Degree18Config {
    fn default() -> Self {
        Degree18Config { extensions: vec![1, 2, 3], batch_points: 48, sample_budget: 4000, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Degree18Result {
    pub p: u32,
    pub seed: u64,
    pub unknowns: usize,
    pub kernel_dim: usize,
    /// `kernel_dim − quotient_dim`, measured.
    pub vanishing_dim: usize,
    /// `4 · C(17, 3)` by counting degree-14 multiples of the leading monomial.
    pub expected_vanishing_dim: usize,
    pub quotient_dim: usize,
    /// Rank of the representatives after reduction mod `det M0`.
    pub quotient_rank: usize,
    pub samples: usize,
    /// Full kernel dimension after each batch.
    pub history: Vec<usize>,
    #[serde(skip)]
    pub representatives: Vec<[FpForm; 4]>,
}

impl Degree18Result {
    pub fn consistent(&self) -> bool {
        self.vanishing_dim == self.expected_vanishing_dim && self.quotient_rank == self.quotient_dim
    }

    pub fn to_quadruples(&self, field: &Gf) -> Result<Vec<MapQuadruple<Gf>>> {
        self.representatives
            .iter()
            .map(|g| MapQuadruple::new(std::array::from_fn(|i| g[i].to_poly(field)), 0, 0))
            .collect()
    }
}

/// Random points of `f = 0` in the chart `x0 = 1`, by picking `(x1, x2)`
/// and solving the quartic in `x3`.
struct ChartSampler {
    field: Gf,
    terms: Vec<([u16; 4], u32)>,
}

impl ChartSampler {
    fn new(f: &MultiPoly<Gf>) -> Self {
        ChartSampler { field: f.ring().clone(), terms: f.terms().map(|(m, &c)| (m.0, c)).collect() }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> [u32; 4] {
        let f = &self.field;
        let q = f.q();
        loop {
            let (a, b) = (rng.gen_range(0..q), rng.gen_range(0..q));
            let mut c = [0u32; 5];
            for (e, v) in &self.terms {
                let t = f.mul(*v, f.mul(f.pow(a, e[1] as u64), f.pow(b, e[2] as u64)));
                c[e[3] as usize] = f.add(c[e[3] as usize], t);
            }
            let roots: Vec<u32> = f.elements().filter(|&t| c.iter().rev().fold(0, |acc, &k| f.add(f.mul(acc, t), k)) == 0).collect();
            if let Some(&t) = roots.choose(rng) {
                return [1, a, b, t];
            }
        }
    }
}

enum Source {
    Listed(Vec<[u32; 4]>),
    Random(ChartSampler),
}

/// Solves for quadruples of degree-18 forms that agree with `g` on `S`.
pub fn degree18_solve(t: &Tritensor<Gf>, cfg: &Degree18Config) -> Result<Degree18Result> {
    let p = check_prime_field(t)?;
    let f = check_reduction(t)?;
    if cfg.extensions.is_empty() || cfg.batch_points == 0 {
        return Err(Error::InvalidArgument("need at least one extension and a nonzero batch".into()));
    }
    let det = FpForm::from_poly(&f, 4)?;
    let sys = Degree18System::new(&det)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sources = Vec::new();
    for &k in &cfg.extensions {
        let field = Gf::new(p, k)?;
        let chain = AutomorphismChain::new(&t.map_ring(&field, |&c| c))?;
        let lifted = lift_to(&f, &field)?;
        let source = if k == 1 {
            let mut pts = enumerate_surface_points(&lifted, &field)?;
            pts.shuffle(&mut rng);
            Source::Listed(pts)
        } else {
            Source::Random(ChartSampler::new(&lifted))
        };
        sources.push((field, chain, source));
    }
    let mut full = FpEchelon::new(p, sys.unknowns());
    let mut reduced = FpEchelon::new(p, sys.reduced_unknowns());
    let mut history = Vec::new();
    let mut samples = 0;
    let mut batch = 0;
    let mut last: Option<(usize, usize)> = None;
    loop {
        if samples >= cfg.sample_budget {
            return Err(Error::Unstable(history.len()));
        }
        let live: Vec<usize> = (0..sources.len())
            .filter(|&i| !matches!(&sources[i].2, Source::Listed(v) if v.is_empty()))
            .collect();
        if live.is_empty() {
            return Err(Error::Unstable(history.len()));
        }
        let (field, chain, source) = &mut sources[live[batch % live.len()]];
        batch += 1;
        let mut drawn = 0;
        while drawn < cfg.batch_points && samples < cfg.sample_budget {
            let x = match source {
                Source::Listed(v) => match v.pop() {
                    Some(x) => x,
                    None => break,
                },
                Source::Random(s) => s.sample(&mut rng),
            };
            let Ok(y) = chain.apply(&x) else { continue };
            for row in sys.rows_at(field, &x, &y) {
                reduced.insert(&sys.reduce_row(&row));
                full.insert(&row);
            }
            drawn += 1;
            samples += 1;
        }
        let now = (full.kernel_dim(), reduced.kernel_dim());
        history.push(now.0);
        if drawn == cfg.batch_points && last == Some(now) {
            break;
        }
        if drawn == cfg.batch_points {
            last = Some(now);
        }
    }
    let representatives: Vec<[FpForm; 4]> = reduced.kernel_basis().iter().map(|v| sys.unpack_reduced(v)).collect();
    let remainders: Vec<Vec<u32>> = representatives
        .iter()
        .map(|g| {
            let r: [FpForm; 4] = std::array::from_fn(|i| g[i].div_rem(&sys.det).expect("nonzero det").1);
            sys.pack(&r)
        })
        .collect();
    let kernel_dim = full.kernel_dim();
    let quotient_dim = representatives.len();
    Ok(Degree18Result {
        p,
        seed: cfg.seed,
        unknowns: sys.unknowns(),
        kernel_dim,
        vanishing_dim: kernel_dim.saturating_sub(quotient_dim),
        expected_vanishing_dim: sys.vanishing_dim(),
        quotient_dim,
        quotient_rank: if remainders.is_empty() { 0 } else { fp_rank(p, &remainders) },
        samples,
        history,
        representatives,
    })
}

/// `det M0 | F_i G_j − F_j G_i` for every quadruple and every `i < j`.
pub fn verify_quadruples(comp: &Composite, det_m0: &FpForm, quads: &[[FpForm; 4]]) -> bool {
    quads.iter().all(|g| {
        (0..4).all(|i| {
            (i + 1..4).all(|j| {
                let h = comp.forms[i].mul(&g[j]).sub(&comp.forms[j].mul(&g[i]));
                h.exact_div(det_m0).is_ok_and(|q| q.is_some())
            })
        })
    })
}

/// Checks the representatives against the degree-27 composite over `F_p`.
pub fn verify_degree18(result: &Degree18Result, t: &Tritensor<Gf>) -> Result<bool> {
    check_prime_field(t)?;
    let comp = symbolic_composition(t)?;
    let det = FpForm::from_poly(&t.matrix(0).det(), 4)?;
    Ok(verify_quadruples(&comp, &det, &result.representatives))
}

/// Evaluates a degree-18 quadruple at points over an extension field.
struct QuadEvaluator {
    terms: [Vec<(Monomial, u32)>; 4],
}

impl QuadEvaluator {
    fn new(g: &[FpForm; 4]) -> Self {
        QuadEvaluator { terms: std::array::from_fn(|i| g[i].terms()) }
    }

    fn vanishes(&self, field: &Gf, pw: &[Vec<u32>; 4]) -> bool {
        self.terms.iter().all(|terms| {
            terms.iter().fold(0, |acc, (m, c)| {
                let t = (0..4).fold(*c, |t, i| field.mul(t, pw[i][m.0[i] as usize]));
                field.add(acc, t)
            }) == 0
        })
    }
}

fn powers(field: &Gf, x: &[u32; 4], d: usize) -> [Vec<u32>; 4] {
    std::array::from_fn(|i| {
        let mut row = vec![1u32; d + 1];
        for e in 1..=d {
            row[e] = field.mul(row[e - 1], x[i]);
        }
        row
    })
}

/// For each quadruple, which of `points` it vanishes at entirely.
pub fn base_locus(quads: &[[FpForm; 4]], field: &Gf, points: &[[u32; 4]]) -> Vec<Vec<bool>> {
    let evs: Vec<QuadEvaluator> = quads.iter().map(QuadEvaluator::new).collect();
    let d = quads.first().map_or(0, |g| g[0].degree()) as usize;
    let per_point: Vec<Vec<bool>> = points
        .par_iter()
        .map(|x| {
            let pw = powers(field, x, d);
            evs.iter().map(|e| e.vanishes(field, &pw)).collect()
        })
        .collect();
    (0..quads.len()).map(|q| per_point.iter().map(|v| v[q]).collect()).collect()
}

/// The first triple of loci (in lexicographic order) with empty intersection.
pub fn free_triple(locus: &[Vec<bool>]) -> Option<[usize; 3]> {
    let n = locus.len();
    let len = locus.first().map_or(0, |v| v.len());
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if (0..len).all(|i| !(locus[a][i] && locus[b][i] && locus[c][i])) {
                    return Some([a, b, c]);
                }
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasePointReport {
    pub tested_degrees: Vec<u32>,
    pub points_tested: usize,
    /// Base points of each representative on its own.
    pub single_base_points: Vec<usize>,
    /// Indices of a triple with no common base point, if one was found.
    pub triple: Option<[usize; 3]>,
}

/// Looks for three representatives with no common zero on `S(F_{p^k})`,
/// `k ≤ k_max`.
pub fn base_point_free_triple(result: &Degree18Result, t: &Tritensor<Gf>, k_max: u32) -> Result<BasePointReport> {
    let p = check_prime_field(t)?;
    let f = t.matrix(0).det();
    let mut common: Vec<Vec<bool>> = Vec::new();
    let mut points_tested = 0;
    for k in 1..=k_max {
        let field = Gf::new(p, k)?;
        let pts = enumerate_surface_points(&f, &field)?;
        points_tested += pts.len();
        let locus = base_locus(&result.representatives, &field, &pts);
        if common.is_empty() {
            common = locus;
        } else {
            for (acc, more) in common.iter_mut().zip(locus) {
                acc.extend(more);
            }
        }
    }
    let single_base_points = common.iter().map(|v| v.iter().filter(|&&b| b).count()).collect();
    let triple = free_triple(&common);
    Ok(BasePointReport { tested_degrees: (1..=k_max).collect(), points_tested, single_base_points, triple })
}
