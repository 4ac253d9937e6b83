use std::cmp::Ordering;
use std::fmt;

/// Exponent vector of a monomial in `x0..x3`.
///
/// Ordered graded-lexicographically: total degree first, then the exponent
/// of `x0`, then `x1`, and so on (`x0 > x1 > x2 > x3`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub [u16; 4]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0; 4]);

    pub fn var(i: usize) -> Monomial {
        let mut e = [0; 4];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(std::array::from_fn(|i| self.0[i] + other.0[i]))
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, if `self` divides `other`.
    pub fn div_into(&self, other: &Monomial) -> Option<Monomial> {
        self.divides(other).then(|| Monomial(std::array::from_fn(|i| other.0[i] - self.0[i])))
    }

    /// All monomials of total degree `d`, in descending graded-lex order.
    pub fn all_of_degree(d: u32) -> Vec<Monomial> {
        let d = d as u16;
        let mut out = Vec::with_capacity(count_of_degree(d as u32));
        for e0 in (0..=d).rev() {
            for e1 in (0..=d - e0).rev() {
                for e2 in (0..=d - e0 - e1).rev() {
                    out.push(Monomial([e0, e1, e2, d - e0 - e1 - e2]));
                }
            }
        }
        out
    }
}

/// Number of monomials of degree `d` in four variables, `C(d + 3, 3)`.
pub fn count_of_degree(d: u32) -> usize {
    let d = d as usize;
    (d + 1) * (d + 2) * (d + 3) / 6
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.0;
        write!(f, "x0^{}*x1^{}*x2^{}*x3^{}", e[0], e[1], e[2], e[3])
    }
}
