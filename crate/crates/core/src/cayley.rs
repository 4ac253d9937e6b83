//! Tritensors, their three determinantal matrices, and the automorphism
//! `g` assembled from cofactor maps `S0 -> S1 -> S2 -> S0`.
//!
//! Index convention for `a[i][j][k]`:
//!
//! * `M0[k][j] = Σ_i a[i][j][k] x_i`
//! * `M1[i][k] = Σ_j a[i][j][k] y_j`
//! * `M2[j][i] = Σ_k a[i][j][k] z_k`
//!
//! so that `M0(x) y = 0 ⇔ ᵗx M1(y) = 0`, `M1(y) z = 0 ⇔ ᵗy M2(z) = 0` and
//! `M2(z) x = 0 ⇔ ᵗz M0(x) = 0`. A column of `adj M_n` therefore maps
//! `S_n` to `S_{n+1}`, and a row of `adj M_{n+1}` maps back.

use serde::Deserialize;

use crate::algebra::dense::{det4_forms, FpForm};
use crate::algebra::monomial::Monomial;
use crate::algebra::poly::MultiPoly;
use crate::algebra::ring::{Integers, Ring};
use crate::algebra::PolyMatrix;
use crate::error::{Error, Result};
use crate::field::Gf;

pub const BUNDLED_TRITENSOR: &str = include_str!("../fixtures/example_tritensor.json");

/// A 4×4×4 coefficient array over a ring.
#[derive(Clone, Debug)]
pub struct Tritensor<R: Ring> {
    ring: R,
    a: Vec<R::Elem>,
}

impl<R: Ring> PartialEq for Tritensor<R> {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a
    }
}

fn idx(i: usize, j: usize, k: usize) -> usize {
    16 * i + 4 * j + k
}

impl<R: Ring> Tritensor<R> {
    pub fn from_fn(ring: &R, f: impl FnMut(usize, usize, usize) -> R::Elem) -> Self {
        let mut f = f;
        let a = (0..64).map(|t| f(t / 16, (t / 4) % 4, t % 4)).collect();
        Tritensor { ring: ring.clone(), a }
    }

    /// `a[i][j][k] = 1` iff `i = j = k`; every matrix is diagonal.
    pub fn diagonal(ring: &R) -> Self {
        Self::from_fn(ring, |i, j, k| if i == j && j == k { ring.one() } else { ring.zero() })
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &R::Elem {
        &self.a[idx(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: R::Elem) {
        self.a[idx(i, j, k)] = v;
    }

    pub fn map_ring<S: Ring>(&self, target: &S, f: impl Fn(&R::Elem) -> S::Elem) -> Tritensor<S> {
        Tritensor { ring: target.clone(), a: self.a.iter().map(f).collect() }
    }

    fn linear(&self, coeff: impl Fn(usize) -> R::Elem) -> MultiPoly<R> {
        MultiPoly::from_terms(&self.ring, (0..4).map(|v| (Monomial::var(v), coeff(v))))
    }

    /// `M_n` under the pinned convention.
    pub fn matrix(&self, n: usize) -> PolyMatrix<R> {
        match n % 3 {
            0 => PolyMatrix::from_fn(|k, j| self.linear(|i| self.get(i, j, k).clone())),
            1 => PolyMatrix::from_fn(|i, k| self.linear(|j| self.get(i, j, k).clone())),
            _ => PolyMatrix::from_fn(|j, i| self.linear(|k| self.get(i, j, k).clone())),
        }
    }

    /// Recovers the tritensor from `M0`; entries must be linear forms.
    pub fn from_m0(m0: &PolyMatrix<R>) -> Result<Self> {
        let ring = m0.ring().clone();
        let mut out = Self::from_fn(&ring, |_, _, _| ring.zero());
        for k in 0..4 {
            for j in 0..4 {
                let c = linear_coeffs(m0.get(k, j)).ok_or_else(|| {
                    Error::InvalidArgument(format!("entry ({k},{j}) of M0 is not a linear form"))
                })?;
                for (i, v) in c.into_iter().enumerate() {
                    out.set(i, j, k, v);
                }
            }
        }
        Ok(out)
    }

    pub fn bilinear_consistency_check(&self) -> Consistency {
        check_bilinear(&self.matrix(0), &self.matrix(1), &self.matrix(2))
    }
}

impl Tritensor<Integers> {
    pub fn to_field(&self, f: &Gf) -> Tritensor<Gf> {
        self.map_ring(f, |c| f.embed_bigint(c))
    }

    /// The bundled example tensor over `Z`.
    pub fn bundled() -> Self {
        parse_tritensor(BUNDLED_TRITENSOR).expect("bundled fixture parses").tensor
    }
}

#[derive(Deserialize)]
struct TritensorFileRaw {
    ring: String,
    p: Option<u64>,
    a: Vec<Vec<Vec<i64>>>,
}

/// A tritensor read from its JSON description.
#[derive(Clone, Debug)]
pub struct TritensorFile {
    pub tensor: Tritensor<Integers>,
    /// Set when the file declares `"ring": "Fp"`.
    pub prime: Option<u32>,
}

impl TritensorFile {
    /// The tensor over `F_p`, where `p` is the declared prime or `default_p`.
    pub fn over_prime(&self, default_p: u32) -> Result<Tritensor<Gf>> {
        let f = Gf::new(self.prime.unwrap_or(default_p), 1)?;
        Ok(self.tensor.to_field(&f))
    }
}

/// Parses `{"ring": "Z" | "Fp", "p": ..., "a": [4][4][4]}`.
pub fn parse_tritensor(text: &str) -> Result<TritensorFile> {
    let raw: TritensorFileRaw = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let prime = match (raw.ring.as_str(), raw.p) {
        ("Z", None) => None,
        ("Z", Some(_)) => return Err(Error::Parse("ring Z takes no prime".into())),
        ("Fp", Some(p)) => {
            if !crate::field::is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            Some(u32::try_from(p).map_err(|_| Error::Parse(format!("prime {p} is too large")))?)
        }
        ("Fp", None) => return Err(Error::Parse("ring Fp needs a prime p".into())),
        (r, _) => return Err(Error::Parse(format!("unknown ring {r:?}"))),
    };
    let shape_ok = raw.a.len() == 4 && raw.a.iter().all(|r| r.len() == 4 && r.iter().all(|c| c.len() == 4));
    if !shape_ok {
        return Err(Error::Parse("tensor must have shape 4x4x4".into()));
    }
    let tensor = Tritensor::from_fn(&Integers, |i, j, k| raw.a[i][j][k].into());
    Ok(TritensorFile { tensor, prime })
}

/// Coefficients of a linear form, or `None` if `f` has other terms.
pub fn linear_coeffs<R: Ring>(f: &MultiPoly<R>) -> Option<[R::Elem; 4]> {
    if f.terms().any(|(m, _)| m.degree() != 1) {
        return None;
    }
    Some(std::array::from_fn(|v| f.coeff(&Monomial::var(v))))
}

/// Outcome of comparing the bilinear forms behind `M0, M1, M2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Consistency {
    Consistent,
    /// Entries that are not linear forms; `(matrix, row, column)`.
    NotLinear(usize, usize, usize),
    /// The identity linking `M_a` and `M_b` fails at coefficient `a_{ijk}`.
    Mismatch { pair: (usize, usize), i: usize, j: usize, k: usize },
}

impl Consistency {
    pub fn is_ok(&self) -> bool {
        *self == Consistency::Consistent
    }
}

/// Checks `M0(x)y = ᵗx M1(y)`, `M1(y)z = ᵗy M2(z)` and `M2(z)x = ᵗz M0(x)`
/// as identities of bilinear forms: both sides of each are `Σ a_{ijk} u v`,
/// so they agree iff the coefficient arrays read off the two matrices agree.
pub fn check_bilinear<R: Ring>(m0: &PolyMatrix<R>, m1: &PolyMatrix<R>, m2: &PolyMatrix<R>) -> Consistency {
    let mut lin: Vec<Vec<[R::Elem; 4]>> = Vec::new();
    for (n, m) in [m0, m1, m2].into_iter().enumerate() {
        let mut entries = Vec::with_capacity(16);
        for r in 0..4 {
            for c in 0..4 {
                match linear_coeffs(m.get(r, c)) {
                    Some(v) => entries.push(v),
                    None => return Consistency::NotLinear(n, r, c),
                }
            }
        }
        lin.push(entries);
    }
    let e = |n: usize, r: usize, c: usize, v: usize| &lin[n][4 * r + c][v];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                // coefficient of x_i y_j in row k of M0(x)y, resp. column k of ᵗx M1(y)
                if e(0, k, j, i) != e(1, i, k, j) {
                    return Consistency::Mismatch { pair: (0, 1), i, j, k };
                }
                if e(1, i, k, j) != e(2, j, i, k) {
                    return Consistency::Mismatch { pair: (1, 2), i, j, k };
                }
                if e(2, j, i, k) != e(0, k, j, i) {
                    return Consistency::Mismatch { pair: (2, 0), i, j, k };
                }
            }
        }
    }
    Consistency::Consistent
}

/// `S_n : det M_n = 0`.
#[derive(Clone, Debug)]
pub struct DeterminantalSurface<R: Ring> {
    pub which: usize,
    pub matrix: PolyMatrix<R>,
    pub quartic: MultiPoly<R>,
}

impl<R: Ring> DeterminantalSurface<R> {
    pub fn is_degenerate(&self) -> bool {
        self.quartic.is_zero()
    }
}

/// The three surfaces; fails when `det M0` vanishes identically. Degenerate
/// `M1`, `M2` are returned and flagged by [`DeterminantalSurface::is_degenerate`].
pub fn matrices_from_tritensor<R: Ring>(t: &Tritensor<R>) -> Result<[DeterminantalSurface<R>; 3]> {
    let out: [DeterminantalSurface<R>; 3] = std::array::from_fn(|n| {
        let matrix = t.matrix(n);
        let quartic = matrix.det();
        DeterminantalSurface { which: n, matrix, quartic }
    });
    if out[0].is_degenerate() {
        return Err(Error::ZeroDeterminant(0));
    }
    Ok(out)
}

/// Four forms of a common degree defining a rational map `S_source ⇢ S_target`.
#[derive(Clone, Debug)]
pub struct MapQuadruple<R: Ring> {
    pub polys: [MultiPoly<R>; 4],
    pub degree: u32,
    pub source: usize,
    pub target: usize,
}

impl<R: Ring> MapQuadruple<R> {
    pub fn new(polys: [MultiPoly<R>; 4], source: usize, target: usize) -> Result<Self> {
        let mut degree = None;
        for f in polys.iter().filter(|f| !f.is_zero()) {
            let d = f.homogeneous_degree().ok_or_else(|| Error::InvalidArgument("map entries must be homogeneous".into()))?;
            if degree.is_some_and(|d0| d0 != d) {
                return Err(Error::InvalidArgument("map entries have different degrees".into()));
            }
            degree = Some(d);
        }
        let degree = degree.ok_or_else(|| Error::InvalidArgument("all four map entries vanish".into()))?;
        Ok(MapQuadruple { polys, degree, source, target })
    }

    pub fn eval(&self, x: &[R::Elem; 4]) -> [R::Elem; 4] {
        std::array::from_fn(|i| self.polys[i].eval(x))
    }
}

fn nonzero_det<R: Ring>(t: &Tritensor<R>, n: usize) -> Result<PolyMatrix<R>> {
    let m = t.matrix(n);
    if m.det().is_zero() {
        return Err(Error::ZeroDeterminant(n % 3));
    }
    Ok(m)
}

/// The columns of `adj M_n`, maps `S_n -> S_{n+1}`.
pub fn forward_map<R: Ring>(t: &Tritensor<R>, n: usize) -> Result<Vec<MapQuadruple<R>>> {
    let adj = nonzero_det(t, n)?.adjugate();
    (0..4).filter_map(|j| {
        let col = adj.column(j);
        (!col.iter().all(|f| f.is_zero())).then(|| MapQuadruple::new(col, n % 3, (n + 1) % 3))
    }).collect()
}

/// The rows of `adj M_{n+1}`, maps `S_{n+1} -> S_n`.
pub fn inverse_map<R: Ring>(t: &Tritensor<R>, n: usize) -> Result<Vec<MapQuadruple<R>>> {
    let adj = nonzero_det(t, n + 1)?.adjugate();
    (0..4).filter_map(|i| {
        let row = adj.row(i);
        (!row.iter().all(|f| f.is_zero())).then(|| MapQuadruple::new(row, (n + 1) % 3, n % 3))
    }).collect()
}

/// Scales a nonzero vector so its first nonzero coordinate is 1.
pub fn normalize(field: &Gf, v: &[u32; 4]) -> Option<[u32; 4]> {
    let lead = *v.iter().find(|&&c| c != 0)?;
    let inv = field.inv(lead).ok()?;
    Some(v.map(|c| field.mul(c, inv)))
}

fn point_text(field: &Gf, x: &[u32; 4]) -> String {
    let parts: Vec<String> = x.iter().map(|&c| field.format_elem(c)).collect();
    format!("({})", parts.join(":"))
}

/// The first quadruple that does not vanish at `x`, normalized.
pub fn eval_map(quads: &[MapQuadruple<Gf>], x: &[u32; 4]) -> Result<[u32; 4]> {
    let field = quads.first().map(|q| q.polys[0].ring().clone()).ok_or_else(|| Error::InvalidArgument("no quadruples".into()))?;
    for q in quads {
        if let Some(v) = normalize(&field, &q.eval(x)) {
            return Ok(v);
        }
    }
    Err(Error::Undefined(point_text(&field, x)))
}

/// Fast evaluation of a fixed homogeneous polynomial over a field.
#[derive(Clone, Debug)]
pub struct FormEvaluator {
    field: Gf,
    degree: u32,
    terms: Vec<([u16; 4], u32)>,
}

impl FormEvaluator {
    pub fn new(f: &MultiPoly<Gf>) -> Self {
        FormEvaluator {
            field: f.ring().clone(),
            degree: f.degree().unwrap_or(0),
            terms: f.terms().map(|(m, c)| (m.0, *c)).collect(),
        }
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }

    pub fn eval(&self, x: &[u32; 4]) -> u32 {
        let f = &self.field;
        let d = self.degree as usize;
        let mut pw = [[0u32; 8]; 4];
        let tall = d >= 8;
        if !tall {
            for i in 0..4 {
                pw[i][0] = 1;
                for e in 1..=d {
                    pw[i][e] = f.mul(pw[i][e - 1], x[i]);
                }
            }
        }
        let mut acc = 0;
        for (e, c) in &self.terms {
            let mut t = *c;
            for i in 0..4 {
                let v = if tall { f.pow(x[i], e[i] as u64) } else { pw[i][e[i] as usize] };
                t = f.mul(t, v);
            }
            acc = f.add(acc, t);
        }
        acc
    }
}

/// A matrix of linear forms, evaluated by direct contraction.
#[derive(Clone, Debug)]
pub struct LinearMatrix {
    field: Gf,
    /// `c[r][col][v]`: coefficient of the `v`-th variable in entry `(r, col)`.
    c: [[[u32; 4]; 4]; 4],
}

impl LinearMatrix {
    pub fn new(m: &PolyMatrix<Gf>) -> Result<Self> {
        let mut c = [[[0u32; 4]; 4]; 4];
        for r in 0..4 {
            for col in 0..4 {
                c[r][col] = linear_coeffs(m.get(r, col)).ok_or_else(|| Error::InvalidArgument("matrix entries must be linear".into()))?;
            }
        }
        Ok(LinearMatrix { field: m.ring().clone(), c })
    }

    pub fn eval(&self, x: &[u32; 4]) -> [[u32; 4]; 4] {
        let f = &self.field;
        std::array::from_fn(|r| {
            std::array::from_fn(|col| {
                (0..4).fold(0, |acc, v| f.add(acc, f.mul(self.c[r][col][v], x[v])))
            })
        })
    }
}

/// `adj m` over a finite field without intermediate allocation.
fn adjugate_gf(f: &Gf, m: &[[u32; 4]; 4]) -> [[u32; 4]; 4] {
    let det3 = |r: [usize; 3], c: [usize; 3]| {
        let e = |i: usize, j: usize| m[r[i]][c[j]];
        let t0 = f.sub(f.mul(e(1, 1), e(2, 2)), f.mul(e(1, 2), e(2, 1)));
        let t1 = f.sub(f.mul(e(1, 0), e(2, 2)), f.mul(e(1, 2), e(2, 0)));
        let t2 = f.sub(f.mul(e(1, 0), e(2, 1)), f.mul(e(1, 1), e(2, 0)));
        f.add(f.sub(f.mul(e(0, 0), t0), f.mul(e(0, 1), t1)), f.mul(e(0, 2), t2))
    };
    let others = |k: usize| -> [usize; 3] {
        let mut out = [0; 3];
        let mut n = 0;
        for v in (0..4).filter(|&v| v != k) {
            out[n] = v;
            n += 1;
        }
        out
    };
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let d = det3(others(j), others(i));
            if (i + j) % 2 == 1 { f.neg(d) } else { d }
        })
    })
}

/// Rank of a 4×4 matrix over a field.
pub fn rank4(field: &Gf, m: &[[u32; 4]; 4]) -> usize {
    let mut m = *m;
    let mut rank = 0;
    for col in 0..4 {
        let Some(pr) = (rank..4).find(|&r| m[r][col] != 0) else { continue };
        m.swap(rank, pr);
        let inv = field.inv(m[rank][col]).expect("nonzero pivot");
        for r in 0..4 {
            if r != rank && m[r][col] != 0 {
                let f = field.mul(m[r][col], inv);
                for c in col..4 {
                    m[r][c] = field.sub(m[r][c], field.mul(f, m[rank][c]));
                }
            }
        }
        rank += 1;
    }
    rank
}

/// The automorphism `g = φ_{2→0} ∘ φ_{1→2} ∘ φ_{0→1}` of `S0` over a field,
/// together with its inverse chain.
#[derive(Clone, Debug)]
pub struct AutomorphismChain {
    field: Gf,
    tensor: Tritensor<Gf>,
    matrices: [LinearMatrix; 3],
    quartics: [FormEvaluator; 3],
    forward: [Vec<MapQuadruple<Gf>>; 3],
    inverse: [Vec<MapQuadruple<Gf>>; 3],
}

/// How many points of `S0` the constructor pushes once round the chain.
const ORIENTATION_SAMPLES: usize = 8;
const ORIENTATION_SCAN: u64 = 1 << 18;

impl AutomorphismChain {
    pub fn new(t: &Tritensor<Gf>) -> Result<Self> {
        let field = t.ring().clone();
        let surfaces = matrices_from_tritensor(t)?;
        for s in &surfaces {
            if s.is_degenerate() {
                return Err(Error::ZeroDeterminant(s.which));
            }
        }
        let matrices = [0, 1, 2].map(|n| LinearMatrix::new(&surfaces[n].matrix));
        let [m0, m1, m2] = matrices;
        let chain = AutomorphismChain {
            field,
            tensor: t.clone(),
            matrices: [m0?, m1?, m2?],
            quartics: std::array::from_fn(|n| FormEvaluator::new(&surfaces[n].quartic)),
            forward: [forward_map(t, 0)?, forward_map(t, 1)?, forward_map(t, 2)?],
            inverse: [inverse_map(t, 0)?, inverse_map(t, 1)?, inverse_map(t, 2)?],
        };
        chain.check_orientation()?;
        Ok(chain)
    }

    /// Pushes a few points of `S0` around the chain and confirms every
    /// stage lands on the next surface.
    fn check_orientation(&self) -> Result<()> {
        for x in self.sample_points(ORIENTATION_SAMPLES) {
            let mut v = x;
            for n in 0..3 {
                v = match self.forward_stage(n, &v) {
                    Ok(v) => v,
                    // rank < 3 points are reported by `apply`, not here
                    Err(Error::Undefined(_)) => break,
                    Err(e) => return Err(e),
                };
                if self.quartics[(n + 1) % 3].eval(&v) != 0 {
                    return Err(Error::Orientation(format!(
                        "stage {n} maps {} off S{}",
                        point_text(&self.field, &x),
                        (n + 1) % 3
                    )));
                }
            }
        }
        Ok(())
    }

    /// Up to `k` points of `S0` from a bounded scan of the chart `x0 = 1`.
    fn sample_points(&self, k: usize) -> Vec<[u32; 4]> {
        let q = self.field.q() as u64;
        let mut out = Vec::new();
        let total = (q * q * q).min(ORIENTATION_SCAN);
        for t in 0..total {
            let x = [1, (t / (q * q)) as u32, ((t / q) % q) as u32, (t % q) as u32];
            if self.quartics[0].eval(&x) == 0 {
                out.push(x);
                if out.len() == k {
                    break;
                }
            }
        }
        out
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }

    pub fn tensor(&self) -> &Tritensor<Gf> {
        &self.tensor
    }

    pub fn quartic(&self, n: usize) -> &FormEvaluator {
        &self.quartics[n % 3]
    }

    pub fn forward_quadruples(&self, n: usize) -> &[MapQuadruple<Gf>] {
        &self.forward[n % 3]
    }

    pub fn inverse_quadruples(&self, n: usize) -> &[MapQuadruple<Gf>] {
        &self.inverse[n % 3]
    }

    pub fn on_surface(&self, n: usize, x: &[u32; 4]) -> bool {
        self.quartics[n % 3].eval(x) == 0
    }

    /// `S_n -> S_{n+1}`: first nonvanishing column of `adj M_n(x)`.
    pub fn forward_stage(&self, n: usize, x: &[u32; 4]) -> Result<[u32; 4]> {
        self.forward_stage_from(n, x, 0)
    }

    /// `forward_stage` trying columns in the order `first, first + 1, …` mod 4.
    pub fn forward_stage_from(&self, n: usize, x: &[u32; 4], first: usize) -> Result<[u32; 4]> {
        let adj = adjugate_gf(&self.field, &self.matrices[n % 3].eval(x));
        for j in (0..4).map(|k| (first + k) % 4) {
            let col = std::array::from_fn(|i| adj[i][j]);
            if let Some(v) = normalize(&self.field, &col) {
                return Ok(v);
            }
        }
        Err(Error::Undefined(point_text(&self.field, x)))
    }

    /// `S_{n+1} -> S_n`: first nonvanishing row of `adj M_{n+1}(y)`.
    pub fn inverse_stage(&self, n: usize, y: &[u32; 4]) -> Result<[u32; 4]> {
        self.inverse_stage_from(n, y, 0)
    }

    pub fn inverse_stage_from(&self, n: usize, y: &[u32; 4], first: usize) -> Result<[u32; 4]> {
        let adj = adjugate_gf(&self.field, &self.matrices[(n + 1) % 3].eval(y));
        for i in (0..4).map(|k| (first + k) % 4) {
            if let Some(v) = normalize(&self.field, &adj[i]) {
                return Ok(v);
            }
        }
        Err(Error::Undefined(point_text(&self.field, y)))
    }

    fn check_on_s0(&self, x: &[u32; 4]) -> Result<()> {
        if x.iter().all(|&c| c == 0) || !self.on_surface(0, x) {
            return Err(Error::NotOnSurface(point_text(&self.field, x)));
        }
        Ok(())
    }

    /// `g(x)` for `x ∈ S0`.
    pub fn apply(&self, x: &[u32; 4]) -> Result<[u32; 4]> {
        self.check_on_s0(x)?;
        let y = self.forward_stage(0, x)?;
        let z = self.forward_stage(1, &y)?;
        self.forward_stage(2, &z)
    }

    /// `g⁻¹(x)` for `x ∈ S0`: `S0 -> S2 -> S1 -> S0` through adjugate rows.
    pub fn apply_inverse(&self, x: &[u32; 4]) -> Result<[u32; 4]> {
        self.check_on_s0(x)?;
        let z = self.inverse_stage(2, x)?;
        let y = self.inverse_stage(1, &z)?;
        self.inverse_stage(0, &y)
    }

    /// `g(x)` through the symbolic cofactor quadruples.
    pub fn apply_symbolic(&self, x: &[u32; 4]) -> Result<[u32; 4]> {
        self.check_on_s0(x)?;
        let y = eval_map(&self.forward[0], x)?;
        let z = eval_map(&self.forward[1], &y)?;
        eval_map(&self.forward[2], &z)
    }

    pub fn apply_inverse_symbolic(&self, x: &[u32; 4]) -> Result<[u32; 4]> {
        self.check_on_s0(x)?;
        let z = eval_map(&self.inverse[2], x)?;
        let y = eval_map(&self.inverse[1], &z)?;
        eval_map(&self.inverse[0], &y)
    }
}

/// `F = G2 ∘ G1 ∘ G0` for the first cofactor columns `G_n` of `M_n`, as
/// dense forms of degree 27 over a prime field.
#[derive(Clone, Debug)]
pub struct Composite {
    pub forms: [FpForm; 4],
}

fn column_forms(t: &Tritensor<Gf>, n: usize, j: usize) -> Result<[FpForm; 4]> {
    let col = t.matrix(n).adjugate().column(j);
    let mut out = Vec::with_capacity(4);
    for f in &col {
        out.push(FpForm::from_poly(f, 3)?);
    }
    Ok(out.try_into().expect("four entries"))
}

/// `h(v_0, .., v_3)` for a cubic form `h` and substituted forms `v`.
fn substitute(h: &MultiPoly<Gf>, v: &[FpForm; 4]) -> FpForm {
    let p = v[0].p();
    let d = v[0].degree() * 3;
    let mut acc = FpForm::zero(p, d);
    let mut cache: std::collections::HashMap<[u16; 4], FpForm> = std::collections::HashMap::new();
    for (m, c) in h.terms() {
        let prod = cache.entry(m.0).or_insert_with(|| {
            let mut r: Option<FpForm> = None;
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    r = Some(match r {
                        None => v[i].clone(),
                        Some(r) => r.mul(&v[i]),
                    });
                }
            }
            r.expect("nonconstant monomial")
        });
        acc.add_scaled(prod, *c);
    }
    acc
}

fn compose_forms(outer: &[MultiPoly<Gf>; 4], inner: &[FpForm; 4]) -> [FpForm; 4] {
    std::array::from_fn(|i| substitute(&outer[i], inner))
}

/// The degree-27 composite for column choice 0 at every stage.
pub fn symbolic_composition(t: &Tritensor<Gf>) -> Result<Composite> {
    let field = t.ring();
    if field.n() != 1 {
        return Err(Error::InvalidArgument("symbolic composition needs a prime field".into()));
    }
    for n in 0..3 {
        nonzero_det(t, n)?;
    }
    let g0 = column_forms(t, 0, 0)?;
    let g1 = t.matrix(1).adjugate().column(0);
    let g2 = t.matrix(2).adjugate().column(0);
    let h = compose_forms(&g1, &g0);
    let forms = compose_forms(&g2, &h);
    Ok(Composite { forms })
}

impl Composite {
    pub fn degree(&self) -> u32 {
        self.forms[0].degree()
    }

    pub fn to_polys(&self, field: &Gf) -> [MultiPoly<Gf>; 4] {
        std::array::from_fn(|i| self.forms[i].to_poly(field))
    }

    /// `F(x)` at a point over an extension of the prime field.
    pub fn eval(&self, field: &Gf, x: &[u32; 4]) -> [u32; 4] {
        std::array::from_fn(|i| self.forms[i].eval(field, x))
    }

    /// `det M0(F(x))` as a form of degree 108.
    pub fn det_m0(&self, t: &Tritensor<Gf>) -> Result<FpForm> {
        let lin = LinearMatrix::new(&t.matrix(0))?;
        let p = t.ring().p();
        let m: [[FpForm; 4]; 4] = std::array::from_fn(|r| {
            std::array::from_fn(|c| {
                let mut e = FpForm::zero(p, self.degree());
                for v in 0..4 {
                    e.add_scaled(&self.forms[v], lin.c[r][c][v]);
                }
                e
            })
        });
        Ok(det4_forms(&m))
    }
}

/// Result of dividing `det M0(F(x))` by `det M0(x)`.
#[derive(Clone, Debug)]
pub struct CompositeCheck {
    pub p: u32,
    pub composite_degree: u32,
    pub composite_terms: [usize; 4],
    pub divisible: bool,
    pub quotient_degree: Option<u32>,
}

/// Builds `F` over `F_p` and tests `det M0(x) | det M0(F(x))` exactly.
pub fn verify_composite(t: &Tritensor<Gf>) -> Result<(Composite, CompositeCheck)> {
    let comp = symbolic_composition(t)?;
    let big = comp.det_m0(t)?;
    let q0 = FpForm::from_poly(&t.matrix(0).det(), 4)?;
    let quotient = big.exact_div(&q0)?;
    let check = CompositeCheck {
        p: t.ring().p(),
        composite_degree: comp.degree(),
        composite_terms: std::array::from_fn(|i| comp.forms[i].len()),
        divisible: quotient.is_some(),
        quotient_degree: quotient.map(|q| q.degree()),
    };
    Ok((comp, check))
}
