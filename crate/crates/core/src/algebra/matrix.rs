//! 4×4 matrices of polynomials and of ring elements: determinants by
//! cofactor expansion and adjugates.

use super::poly::MultiPoly;
use super::ring::Ring;

/// A 4×4 matrix of polynomials over a common ring.
#[derive(Clone, PartialEq, Debug)]
pub struct PolyMatrix<R: Ring> {
    pub entries: [[MultiPoly<R>; 4]; 4],
}

impl<R: Ring> PolyMatrix<R> {
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> MultiPoly<R>) -> Self {
        PolyMatrix { entries: std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))) }
    }

    pub fn ring(&self) -> &R {
        self.entries[0][0].ring()
    }

    pub fn get(&self, i: usize, j: usize) -> &MultiPoly<R> {
        &self.entries[i][j]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.entries[j][i].clone())
    }

    pub fn swap_rows(&self, a: usize, b: usize) -> Self {
        let mut out = self.clone();
        out.entries.swap(a, b);
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let ring = self.ring().clone();
        Self::from_fn(|i, j| {
            (0..4).fold(MultiPoly::zero(&ring), |acc, k| &acc + &(&self.entries[i][k] * &other.entries[k][j]))
        })
    }

    /// Common degree of all nonzero entries, if there is one.
    pub fn entry_degree(&self) -> Option<u32> {
        let mut deg = None;
        for row in &self.entries {
            for e in row {
                if e.is_zero() {
                    continue;
                }
                let d = e.homogeneous_degree()?;
                match deg {
                    None => deg = Some(d),
                    Some(d0) if d0 != d => return None,
                    _ => {}
                }
            }
        }
        deg
    }

    pub fn row(&self, i: usize) -> [MultiPoly<R>; 4] {
        self.entries[i].clone()
    }

    pub fn column(&self, j: usize) -> [MultiPoly<R>; 4] {
        std::array::from_fn(|i| self.entries[i][j].clone())
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> MultiPoly<R> {
        let rows: Vec<Vec<&MultiPoly<R>>> = self.entries.iter().map(|r| r.iter().collect()).collect();
        det_poly(self.ring(), &rows)
    }

    /// The cofactor matrix `P` with `M P = P M = det(M) I`:
    /// `P[i][j] = (-1)^(i+j) det(M with row j and column i deleted)`.
    pub fn adjugate(&self) -> Self {
        Self::from_fn(|i, j| {
            let minor: Vec<Vec<&MultiPoly<R>>> = (0..4)
                .filter(|&r| r != j)
                .map(|r| (0..4).filter(|&c| c != i).map(|c| &self.entries[r][c]).collect())
                .collect();
            let d = det_poly(self.ring(), &minor);
            if (i + j) % 2 == 1 {
                -&d
            } else {
                d
            }
        })
    }

    /// Evaluates every entry at `x`.
    pub fn eval(&self, x: &[R::Elem; 4]) -> [[R::Elem; 4]; 4] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.entries[i][j].eval(x)))
    }
}

fn det_poly<R: Ring>(ring: &R, rows: &[Vec<&MultiPoly<R>>]) -> MultiPoly<R> {
    let n = rows.len();
    if n == 1 {
        return rows[0][0].clone();
    }
    if n == 2 {
        return &(rows[0][0] * rows[1][1]) - &(rows[0][1] * rows[1][0]);
    }
    let mut acc = MultiPoly::zero(ring);
    for j in 0..n {
        if rows[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<&MultiPoly<R>>> = rows[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v).collect())
            .collect();
        let term = rows[0][j] * &det_poly(ring, &minor);
        acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// Determinant of a square matrix of ring elements (cofactor expansion).
pub fn det_elems<R: Ring>(ring: &R, m: &[Vec<R::Elem>]) -> R::Elem {
    let n = m.len();
    match n {
        0 => ring.one(),
        1 => m[0][0].clone(),
        2 => ring.sub(&ring.mul(&m[0][0], &m[1][1]), &ring.mul(&m[0][1], &m[1][0])),
        _ => {
            let mut acc = ring.zero();
            for j in 0..n {
                if ring.is_zero(&m[0][j]) {
                    continue;
                }
                let minor: Vec<Vec<R::Elem>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
                    .collect();
                let t = ring.mul(&m[0][j], &det_elems(ring, &minor));
                acc = if j % 2 == 0 { ring.add(&acc, &t) } else { ring.sub(&acc, &t) };
            }
            acc
        }
    }
}

/// Adjugate of a 4×4 matrix of ring elements.
pub fn adjugate_elems<R: Ring>(ring: &R, m: &[[R::Elem; 4]; 4]) -> [[R::Elem; 4]; 4] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let minor: Vec<Vec<R::Elem>> = (0..4)
                .filter(|&r| r != j)
                .map(|r| (0..4).filter(|&c| c != i).map(|c| m[r][c].clone()).collect())
                .collect();
            let d = det_elems(ring, &minor);
            if (i + j) % 2 == 1 {
                ring.neg(&d)
            } else {
                d
            }
        })
    })
}

pub fn det4_elems<R: Ring>(ring: &R, m: &[[R::Elem; 4]; 4]) -> R::Elem {
    let rows: Vec<Vec<R::Elem>> = m.iter().map(|r| r.to_vec()).collect();
    det_elems(ring, &rows)
}

/// Product of a 4×4 matrix with a column vector.
pub fn mat_vec<R: Ring>(ring: &R, m: &[[R::Elem; 4]; 4], v: &[R::Elem; 4]) -> [R::Elem; 4] {
    std::array::from_fn(|i| (0..4).fold(ring.zero(), |acc, k| ring.add(&acc, &ring.mul(&m[i][k], &v[k]))))
}

/// Row vector times matrix, `ᵗv M`.
pub fn vec_mat<R: Ring>(ring: &R, v: &[R::Elem; 4], m: &[[R::Elem; 4]; 4]) -> [R::Elem; 4] {
    std::array::from_fn(|j| (0..4).fold(ring.zero(), |acc, k| ring.add(&acc, &ring.mul(&v[k], &m[k][j]))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ring::Integers;
    use crate::field::Gf;
    use rand::{Rng, SeedableRng};

    fn x(i: usize) -> MultiPoly<Integers> {
        MultiPoly::var(&Integers, i)
    }

    fn diag() -> PolyMatrix<Integers> {
        PolyMatrix::from_fn(|i, j| if i == j { x(i) } else { MultiPoly::zero(&Integers) })
    }

    fn random_linear_matrix(rng: &mut impl Rng) -> PolyMatrix<Integers> {
        PolyMatrix::from_fn(|_, _| {
            let c: [i64; 4] = std::array::from_fn(|_| rng.gen_range(-3..=3));
            MultiPoly::linear(&Integers, c)
        })
    }

    #[test]
    fn diagonal_det_and_adjugate() {
        let m = diag();
        let prod = &(&x(0) * &x(1)) * &(&x(2) * &x(3));
        assert_eq!(m.det(), prod);
        let adj = m.adjugate();
        assert_eq!(adj.get(0, 0), &(&(&x(1) * &x(2)) * &x(3)));
        assert_eq!(adj.get(1, 1), &(&(&x(0) * &x(2)) * &x(3)));
        assert_eq!(adj.get(2, 2), &(&(&x(0) * &x(1)) * &x(3)));
        assert_eq!(adj.get(3, 3), &(&(&x(0) * &x(1)) * &x(2)));
        assert!(adj.get(0, 1).is_zero());
    }

    #[test]
    fn equal_rows_give_zero() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut m = random_linear_matrix(&mut rng);
        m.entries[2] = m.entries[0].clone();
        assert!(m.det().is_zero());
    }

    #[test]
    fn row_swap_negates() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let m = random_linear_matrix(&mut rng);
            let a = rng.gen_range(0..4);
            let b = (a + rng.gen_range(1..4)) % 4;
            assert_eq!(m.swap_rows(a, b).det(), -&m.det());
        }
    }

    #[test]
    fn adjugate_law_and_transpose() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let m = random_linear_matrix(&mut rng);
            let d = m.det();
            let adj = m.adjugate();
            let left = adj.mul(&m);
            let right = m.mul(&adj);
            for i in 0..4 {
                for j in 0..4 {
                    let expect = if i == j { d.clone() } else { MultiPoly::zero(&Integers) };
                    assert_eq!(left.get(i, j), &expect);
                    assert_eq!(right.get(i, j), &expect);
                }
            }
            assert_eq!(m.transpose().adjugate(), adj.transpose());
            assert!(adj.entry_degree().is_none_or(|e| e == 3));
        }
    }

    #[test]
    fn symbolic_det_matches_numeric_det() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for (p, n) in [(2u32, 1u32), (2, 2), (17, 1), (101, 1)] {
            let f = Gf::new(p, n).unwrap();
            let m = random_linear_matrix(&mut rng);
            let mf = PolyMatrix::from_fn(|i, j| m.get(i, j).to_field(&f));
            let d = mf.det();
            for _ in 0..1000 {
                let pt: [u32; 4] = std::array::from_fn(|_| rng.gen_range(0..f.q()));
                let numeric = det4_elems(&f, &mf.eval(&pt));
                assert_eq!(d.eval(&pt), numeric);
            }
        }
    }

    #[test]
    fn numeric_adjugate_matches_symbolic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let f = Gf::new(17, 1).unwrap();
        let m = random_linear_matrix(&mut rng);
        let mf = PolyMatrix::from_fn(|i, j| m.get(i, j).to_field(&f));
        let adj = mf.adjugate();
        for _ in 0..50 {
            let pt: [u32; 4] = std::array::from_fn(|_| rng.gen_range(0..17));
            assert_eq!(adjugate_elems(&f, &mf.eval(&pt)), adj.eval(&pt));
        }
    }
}
