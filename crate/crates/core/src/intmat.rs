//! Small square integer matrices with overflow-checked arithmetic.
//!
//! Used by the search kernels, where millions of candidates are screened
//! before the survivors are re-verified with exact rationals.

use num_bigint::BigInt;
use num_integer::Integer;

use crate::linalg::{QMatrix, Rational};
use crate::patterns::RankProfile;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Self {
        IntMatrix { n, data: vec![0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[i64] {
        &self.data
    }

    /// Entry `(i, j)`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.n + j] = v;
    }

    /// `None` unless the matrix is square with integral entries fitting in `i64`.
    pub fn from_qmatrix(m: &QMatrix) -> Option<Self> {
        if !m.is_square() {
            return None;
        }
        Some(IntMatrix {
            n: m.rows(),
            data: m.to_i64()?,
        })
    }

    pub fn to_qmatrix(&self) -> QMatrix {
        let entries = self
            .data
            .iter()
            .map(|&v| Rational::from_integer(BigInt::from(v)))
            .collect();
        QMatrix::from_entries(self.n, self.n, entries).expect("shape is consistent")
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn checked_mul(&self, rhs: &IntMatrix) -> Option<IntMatrix> {
        let n = self.n;
        let mut out = IntMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let b = rhs.data[k * n + j];
                    if b != 0 {
                        let cell = &mut out.data[i * n + j];
                        *cell = cell.checked_add(a.checked_mul(b)?)?;
                    }
                }
            }
        }
        Some(out)
    }

    pub fn checked_add_scaled(&self, rhs: &IntMatrix, c: i64) -> Option<IntMatrix> {
        let mut out = self.clone();
        out.add_scaled_in_place(rhs, c)?;
        Some(out)
    }

    /// `self += c * rhs`; returns `None` (leaving `self` partially updated) on overflow.
    pub fn add_scaled_in_place(&mut self, rhs: &IntMatrix, c: i64) -> Option<()> {
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            if b != 0 {
                *a = a.checked_add(b.checked_mul(c)?)?;
            }
        }
        Some(())
    }

    /// Whether `self * self = 0`, computed without overflow in `i128`.
    pub fn squares_to_zero(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let mut acc: i128 = 0;
                for k in 0..n {
                    acc += i128::from(self.data[i * n + k]) * i128::from(self.data[k * n + j]);
                }
                if acc != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Divides by the (positive) gcd of all entries.
    pub fn normalize_projective(&mut self) {
        let g = self.data.iter().fold(0i64, |g, &v| g.gcd(&v));
        if g > 1 {
            for v in &mut self.data {
                *v /= g;
            }
        }
    }

    pub fn max_abs(&self) -> i64 {
        self.data.iter().map(|v| v.saturating_abs()).max().unwrap_or(0)
    }

    /// Corner ranks `q_{i,j}`; `None` if an intermediate value overflows `i128`.
    pub fn corner_ranks(&self) -> Option<RankProfile> {
        let n = self.n;
        let mut q = vec![0u32; n * n];
        for i in 0..n {
            let block: Vec<Vec<i128>> = (i..n)
                .map(|r| self.data[r * n..(r + 1) * n].iter().map(|&v| i128::from(v)).collect())
                .collect();
            let prefix = prefix_column_ranks(block, n)?;
            q[i * n..(i + 1) * n].copy_from_slice(&prefix);
        }
        Some(RankProfile::from_table(n, q))
    }
}

/// Rank of the first `j` columns for every `j`, by fraction-free elimination
/// that processes columns left to right.
fn prefix_column_ranks(mut a: Vec<Vec<i128>>, cols: usize) -> Option<Vec<u32>> {
    let rows = a.len();
    let mut out = vec![0u32; cols];
    let mut prow = 0;
    let mut prev: i128 = 1;
    for c in 0..cols {
        if prow < rows {
            if let Some(p) = (prow..rows).find(|&r| a[r][c] != 0) {
                a.swap(prow, p);
                let pivot = a[prow][c];
                for r in prow + 1..rows {
                    let factor = a[r][c];
                    for k in c..cols {
                        let v = pivot.checked_mul(a[r][k])?.checked_sub(factor.checked_mul(a[prow][k])?)?;
                        a[r][k] = v / prev;
                    }
                }
                prev = pivot;
                prow += 1;
            }
        }
        out[c] = prow as u32;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::corner_ranks;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn corner_ranks_agree_with_rationals(n in 1usize..6, entries in prop::collection::vec(-3i64..=3, 36)) {
            let mut m = IntMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    m.set(i, j, entries[i * 6 + j]);
                }
            }
            prop_assert_eq!(m.corner_ranks().unwrap(), corner_ranks(&m.to_qmatrix()));
        }

        #[test]
        fn products_agree_with_rationals(entries in prop::collection::vec(-50i64..=50, 32)) {
            let mut a = IntMatrix::zeros(4);
            let mut b = IntMatrix::zeros(4);
            for k in 0..16 {
                a.data[k] = entries[k];
                b.data[k] = entries[16 + k];
            }
            let prod = a.checked_mul(&b).unwrap();
            prop_assert_eq!(prod.to_qmatrix(), &a.to_qmatrix() * &b.to_qmatrix());
            prop_assert_eq!(prod.is_zero(), (&a.to_qmatrix() * &b.to_qmatrix()).is_zero());
        }
    }

    #[test]
    fn overflow_is_reported() {
        let mut a = IntMatrix::identity(2);
        a.set(0, 1, i64::MAX);
        assert!(a.checked_mul(&a).is_none());
    }

    #[test]
    fn projective_normalization() {
        let mut a = IntMatrix::zeros(2);
        a.set(0, 1, -4);
        a.set(1, 0, 6);
        a.normalize_projective();
        assert_eq!(a.data(), &[0, -2, 3, 0]);
    }
}
