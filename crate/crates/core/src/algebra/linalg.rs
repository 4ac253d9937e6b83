//! Dense linear algebra over prime fields.

/// Row echelon form over `F_p`, grown one row at a time.
///
/// Pivot rows are kept sorted by pivot column and normalized to a leading 1.
/// Pivot selection is the first nonzero entry of the reduced incoming row.
#[derive(Clone, Debug)]
pub struct FpEchelon {
    p: u32,
    ncols: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
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

impl FpEchelon {
    pub fn new(p: u32, ncols: usize) -> Self {
        FpEchelon { p, ncols, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn kernel_dim(&self) -> usize {
        self.ncols - self.rows.len()
    }

    pub fn pivot_columns(&self) -> &[usize] {
        &self.pivots
    }

    /// Reduces `row` against the current pivots; returns the reduced row.
    pub fn reduce(&self, row: &[u32]) -> Vec<u32> {
        assert_eq!(row.len(), self.ncols);
        let p = self.p as u64;
        let step = (self.p as u64 - 1) * (self.p as u64 - 1);
        // Stay lazy while the accumulated bound cannot overflow.
        let lazy_limit = if step == 0 { u64::MAX } else { (u64::MAX / 2) / step };
        let mut v: Vec<u64> = row.iter().map(|&c| (c % self.p) as u64).collect();
        let mut pending = 0u64;
        for (piv, &c) in self.rows.iter().zip(&self.pivots) {
            let lead = v[c] % p;
            if lead == 0 {
                continue;
            }
            let f = p - lead;
            for (a, &b) in v[c..].iter_mut().zip(&piv[c..]) {
                *a += f * b as u64;
            }
            pending += 1;
            if pending >= lazy_limit {
                v.iter_mut().for_each(|a| *a %= p);
                pending = 0;
            }
        }
        v.into_iter().map(|a| (a % p) as u32).collect()
    }

    /// Adds a row; returns true when it was independent of the previous ones.
    pub fn insert(&mut self, row: &[u32]) -> bool {
        let mut v = self.reduce(row);
        let Some(c) = v.iter().position(|&a| a != 0) else {
            return false;
        };
        let inv = inv_mod(v[c], self.p) as u64;
        let p = self.p as u64;
        for a in v[c..].iter_mut() {
            *a = (*a as u64 * inv % p) as u32;
        }
        let pos = self.pivots.partition_point(|&k| k < c);
        self.pivots.insert(pos, c);
        self.rows.insert(pos, v);
        true
    }

    /// Whether `row` lies in the row space.
    pub fn contains(&self, row: &[u32]) -> bool {
        self.reduce(row).iter().all(|&a| a == 0)
    }

    /// Reduced row echelon form of the current rows.
    pub fn rref(&self) -> Vec<Vec<u32>> {
        let p = self.p as u64;
        let mut rows = self.rows.clone();
        for k in (0..rows.len()).rev() {
            let c = self.pivots[k];
            let (head, tail) = rows.split_at_mut(k);
            let piv = &tail[0];
            for r in head.iter_mut() {
                let lead = r[c] as u64;
                if lead == 0 {
                    continue;
                }
                let f = p - lead;
                for (a, &b) in r[c..].iter_mut().zip(&piv[c..]) {
                    *a = ((*a as u64 + f * b as u64) % p) as u32;
                }
            }
        }
        rows
    }

    /// Basis of the right kernel `{v : row . v = 0 for all rows}`, one
    /// vector per free column `f` with `v[f] = 1` and zeros at the other
    /// free columns. Found by back substitution, so the cost scales with
    /// the kernel dimension rather than the rank.
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        let p = self.p as u64;
        let mut is_pivot = vec![false; self.ncols];
        for &c in &self.pivots {
            is_pivot[c] = true;
        }
        (0..self.ncols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = vec![0u32; self.ncols];
                v[f] = 1;
                for (row, &c) in self.rows.iter().zip(&self.pivots).rev() {
                    let s = row[c + 1..].iter().zip(&v[c + 1..]).fold(0u64, |acc, (&a, &b)| (acc + a as u64 * b as u64) % p);
                    v[c] = ((p - s) % p) as u32;
                }
                v
            })
            .collect()
    }
}

/// Right kernel basis of the matrix with the given rows over `F_p`.
pub fn fp_kernel_basis(p: u32, ncols: usize, rows: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut ech = FpEchelon::new(p, ncols);
    for r in rows {
        ech.insert(r);
    }
    ech.kernel_basis()
}

/// Rank by textbook in-place elimination, pivoting down each column in turn.
pub fn fp_rank(p: u32, rows: &[Vec<u32>]) -> usize {
    let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&c| (c % p) as u64).collect()).collect();
    let p = p as u64;
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pr) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = inv_mod(m[rank][col] as u32, p as u32) as u64;
        for r in 0..m.len() {
            if r == rank || m[r][col] == 0 {
                continue;
            }
            let f = m[r][col] * inv % p;
            for c in col..ncols {
                let sub = f * m[rank][c] % p;
                m[r][c] = (m[r][c] + p - sub) % p;
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trivial_kernels() {
        assert_eq!(fp_kernel_basis(17, 5, &[vec![0; 5]]).len(), 5);
        let id: Vec<Vec<u32>> = (0..4).map(|i| (0..4).map(|j| (i == j) as u32).collect()).collect();
        assert!(fp_kernel_basis(17, 4, &id).is_empty());
    }

    fn dot(a: &[u32], b: &[u32], p: u32) -> u32 {
        (a.iter().zip(b).map(|(&x, &y)| x as u64 * y as u64).sum::<u64>() % p as u64) as u32
    }

    proptest! {
        #[test]
        fn kernel_vectors_annihilate_rows(
            p in prop::sample::select(vec![2u32, 3, 17, 101]),
            rows in prop::collection::vec(prop::collection::vec(0u32..200, 12), 0..10),
        ) {
            let rows: Vec<Vec<u32>> = rows.into_iter().map(|r| r.into_iter().map(|c| c % p).collect()).collect();
            let ker = fp_kernel_basis(p, 12, &rows);
            for v in &ker {
                for r in &rows {
                    prop_assert_eq!(dot(r, v, p), 0);
                }
            }
            // dimension agrees with an independently computed rank, on the transpose too
            let rank = fp_rank(p, &rows);
            prop_assert_eq!(ker.len(), 12 - rank);
            if !rows.is_empty() {
                let t: Vec<Vec<u32>> = (0..12).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
                prop_assert_eq!(fp_rank(p, &t), rank);
            }
            prop_assert_eq!(fp_rank(p, &ker), ker.len());
        }
    }
}
