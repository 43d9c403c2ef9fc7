//! Bilinear ε-forms, the adjoint `star`, the involution `delta = -star`, and
//! exact bases of the Borel subalgebra `b`, of `g(ε)` and of `b(ε)`.
//!
//! Gram matrices are fixed once: the antidiagonal `J_n` for ε = +1 and the
//! block matrix `[[0, J_l], [-J_l, 0]]` for ε = -1. Every sign that appears in
//! `star` or `delta` is derived from the Gram matrix, never hand-coded.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{frac, rat, QMatrix, Rational};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("a symplectic form needs an even dimension, got {0}")]
    OddSymplectic(usize),
    #[error("expected an {expected}x{expected} matrix, got {rows}x{cols}")]
    DimensionMismatch { expected: usize, rows: usize, cols: usize },
    #[error("n = {n} is not 2l for l = {l}")]
    OddN { n: usize, l: usize },
    #[error("the {0:?} basis needs an ε-form")]
    FormRequired(LieLabel),
}

/// Sign of an ε-form: `+1` orthogonal, `-1` symplectic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i64", try_from = "i64")]
pub enum Epsilon {
    Plus,
    Minus,
}

impl Epsilon {
    pub fn as_i64(self) -> i64 {
        match self {
            Epsilon::Plus => 1,
            Epsilon::Minus => -1,
        }
    }

    pub fn as_rational(self) -> Rational {
        rat(self.as_i64())
    }
}

impl From<Epsilon> for i64 {
    fn from(e: Epsilon) -> i64 {
        e.as_i64()
    }
}

impl TryFrom<i64> for Epsilon {
    type Error = String;
    fn try_from(v: i64) -> Result<Self, String> {
        match v {
            1 => Ok(Epsilon::Plus),
            -1 => Ok(Epsilon::Minus),
            other => Err(format!("epsilon must be +1 or -1, got {other}")),
        }
    }
}

impl FromStr for Epsilon {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "+1" | "1" | "+" => Ok(Epsilon::Plus),
            "-1" | "-" => Ok(Epsilon::Minus),
            other => Err(format!("epsilon must be +1 or -1, got {other:?}")),
        }
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Epsilon::Plus => "+1",
            Epsilon::Minus => "-1",
        })
    }
}

/// Classical type of the pair `(n, ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassicalType {
    A,
    B,
    C,
    D,
}

impl ClassicalType {
    pub fn of(n: usize, epsilon: Epsilon) -> ClassicalType {
        match (epsilon, n % 2) {
            (Epsilon::Plus, 1) => ClassicalType::B,
            (Epsilon::Plus, _) => ClassicalType::D,
            (Epsilon::Minus, _) => ClassicalType::C,
        }
    }
}

/// A non-degenerate ε-form on `Q^n` given by its canonical Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsForm {
    n: usize,
    epsilon: Epsilon,
    gram: QMatrix,
    gram_inv: QMatrix,
}

impl EpsForm {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    pub fn gram(&self) -> &QMatrix {
        &self.gram
    }

    /// `<v, w>` for column vectors given as slices.
    pub fn pair(&self, v: &[Rational], w: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                let g = &self.gram[(i, j)];
                if !g.is_zero() {
                    acc += &v[i] * g * &w[j];
                }
            }
        }
        acc
    }

    fn check_square(&self, a: &QMatrix) -> Result<(), FormError> {
        if a.rows() != self.n || a.cols() != self.n {
            return Err(FormError::DimensionMismatch {
                expected: self.n,
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        Ok(())
    }
}

/// `i* = n + 1 - i` (1-based).
pub fn dual_index(n: usize, i: usize) -> usize {
    n + 1 - i
}

/// The canonical Gram matrix of an ε-form on `Q^n`.
pub fn gram_matrix(n: usize, epsilon: Epsilon) -> Result<EpsForm, FormError> {
    if epsilon == Epsilon::Minus && n % 2 == 1 {
        return Err(FormError::OddSymplectic(n));
    }
    let mut gram = QMatrix::zeros(n, n);
    for i in 1..=n {
        let sign = if epsilon == Epsilon::Minus && i > n / 2 { -1 } else { 1 };
        gram[(i - 1, dual_index(n, i) - 1)] = rat(sign);
    }
    let gram_inv = gram.inverse().expect("canonical Gram matrices are invertible");
    Ok(EpsForm {
        n,
        epsilon,
        gram,
        gram_inv,
    })
}

/// Adjoint with respect to the form: `A* = G^{-1} A^t G`.
pub fn star(a: &QMatrix, form: &EpsForm) -> Result<QMatrix, FormError> {
    form.check_square(a)?;
    Ok(&(&form.gram_inv * &a.transpose()) * &form.gram)
}

/// The involution `delta(A) = -A*`; its fixed points are the Lie algebra `g(ε)`.
pub fn delta(a: &QMatrix, form: &EpsForm) -> Result<QMatrix, FormError> {
    Ok(-&star(a, form)?)
}

pub fn is_delta_fixed(a: &QMatrix, form: &EpsForm) -> bool {
    delta(a, form).map(|d| &d == a).unwrap_or(false)
}

/// Which Lie algebra a [`LieBasis`] spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LieLabel {
    /// Upper-triangular matrices.
    B,
    /// `{x : x* = -x}`.
    GEps,
    /// Intersection of the two.
    BEps,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieBasis {
    pub label: LieLabel,
    pub n: usize,
    pub basis: Vec<QMatrix>,
}

impl LieBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

pub fn lie_basis(label: LieLabel, n: usize, form: Option<&EpsForm>) -> Result<LieBasis, FormError> {
    let basis = match label {
        LieLabel::B => {
            let mut out = Vec::with_capacity(n * (n + 1) / 2);
            for i in 1..=n {
                for j in i..=n {
                    out.push(QMatrix::unit(n, i, j));
                }
            }
            out
        }
        LieLabel::GEps | LieLabel::BEps => {
            let form = form.ok_or(FormError::FormRequired(label))?;
            form.check_square(&QMatrix::zeros(n, n))?;
            let positions: Vec<(usize, usize)> = (1..=n)
                .flat_map(|i| (1..=n).map(move |j| (i, j)))
                .filter(|&(i, j)| label == LieLabel::GEps || i <= j)
                .collect();
            fixed_subspace_basis(form, &positions)
        }
    };
    Ok(LieBasis { label, n, basis })
}

/// Basis of the `delta`-fixed matrices supported on the given 1-based positions.
pub(crate) fn fixed_subspace_basis(form: &EpsForm, positions: &[(usize, usize)]) -> Vec<QMatrix> {
    let n = form.n;
    // Column k of the system holds the n^2 entries of star(E_k) + E_k.
    let mut system = QMatrix::zeros(n * n, positions.len());
    for (k, &(i, j)) in positions.iter().enumerate() {
        let e = QMatrix::unit(n, i, j);
        let image = &star(&e, form).expect("square by construction") + &e;
        for r in 0..n {
            for c in 0..n {
                system[(r * n + c, k)] = image[(r, c)].clone();
            }
        }
    }
    system
        .nullspace()
        .into_iter()
        .map(|coeffs| {
            let mut m = QMatrix::zeros(n, n);
            for (c, &(i, j)) in coeffs.iter().zip(positions) {
                m[(i - 1, j - 1)] = c.clone();
            }
            m
        })
        .collect()
}

/// `dim g(ε)` for the canonical form on `Q^n`.
pub fn dim_g_eps(n: usize, epsilon: Epsilon) -> usize {
    match epsilon {
        Epsilon::Plus => n * (n - 1) / 2,
        Epsilon::Minus => n * (n + 1) / 2,
    }
}

/// The permutation matrix swapping coordinates `l` and `l* = l + 1` in dimension `2l`.
pub fn pll_star(n: usize, l: usize) -> Result<QMatrix, FormError> {
    if n != 2 * l || l == 0 {
        return Err(FormError::OddN { n, l });
    }
    let mut p = QMatrix::identity(n);
    let (a, b) = (l - 1, dual_index(n, l) - 1);
    p[(a, a)] = Rational::zero();
    p[(b, b)] = Rational::zero();
    p[(a, b)] = Rational::one();
    p[(b, a)] = Rational::one();
    Ok(p)
}

/// `exp(x)` for a nilpotent matrix, as the finite power series.
pub fn exp_nilpotent(x: &QMatrix) -> QMatrix {
    let n = x.rows();
    let mut acc = QMatrix::identity(n);
    let mut term = QMatrix::identity(n);
    for k in 1..=n {
        term = (&term * x).scale(&frac(1, k as i64));
        if term.is_zero() {
            return acc;
        }
        acc = &acc + &term;
    }
    assert!(term.is_zero(), "exp_nilpotent called on a non-nilpotent matrix");
    acc
}

/// Root vectors of the nilradical of `b(ε)`: `E_ij + delta(E_ij)` for `i < j`,
/// deduplicated up to sign and with zero vectors dropped.
pub fn b_eps_root_elements(form: &EpsForm) -> Vec<QMatrix> {
    let n = form.n;
    let mut out: Vec<QMatrix> = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            let e = QMatrix::unit(n, i, j);
            let x = &e + &delta(&e, form).expect("square");
            if x.is_zero() {
                continue;
            }
            let neg = -&x;
            if !out.iter().any(|y| *y == x || *y == neg) {
                out.push(x);
            }
        }
    }
    out
}

/// Root vectors `E_ij`, `i < j`, of the nilradical of `b`.
pub fn b_root_elements(n: usize) -> Vec<QMatrix> {
    let mut out = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            out.push(QMatrix::unit(n, i, j));
        }
    }
    out
}

fn nonzero_small(rng: &mut impl Rng, bound: i64) -> i64 {
    loop {
        let v = rng.gen_range(-bound..=bound);
        if v != 0 {
            return v;
        }
    }
}

/// A random invertible upper-triangular rational matrix, i.e. an element of `B`.
pub fn random_borel_element(rng: &mut impl Rng, n: usize) -> QMatrix {
    let mut g = QMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = frac(nonzero_small(rng, 3), rng.gen_range(1..=3));
        for j in i + 1..n {
            g[(i, j)] = rat(rng.gen_range(-3..=3));
        }
    }
    g
}

/// A random element `exp(x) * t` of `B(ε)`: `x` a small integral combination of
/// the nilradical root vectors and `t` a rational torus point with `t_i t_{i*} = 1`.
pub fn random_borel_eps_element(rng: &mut impl Rng, form: &EpsForm) -> QMatrix {
    let n = form.n;
    let mut x = QMatrix::zeros(n, n);
    for root in b_eps_root_elements(form) {
        x = &x + &root.scale(&rat(rng.gen_range(-2..=2)));
    }
    let mut diag = vec![Rational::one(); n];
    for i in 1..=n / 2 {
        let t = frac(nonzero_small(rng, 3), rng.gen_range(1..=3));
        diag[dual_index(n, i) - 1] = t.recip();
        diag[i - 1] = t;
    }
    if n % 2 == 1 && rng.gen_bool(0.5) {
        diag[n / 2] = rat(-1);
    }
    &exp_nilpotent(&x) * &QMatrix::diagonal(&diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn basis_vector(n: usize, i: usize) -> Vec<Rational> {
        (0..n).map(|k| if k == i { Rational::one() } else { Rational::zero() }).collect()
    }

    #[test]
    fn gram_examples() {
        let g = gram_matrix(2, Epsilon::Plus).unwrap();
        assert_eq!(g.gram(), &QMatrix::from_i64_rows(&[vec![0, 1], vec![1, 0]]));
        let g = gram_matrix(2, Epsilon::Minus).unwrap();
        assert_eq!(g.gram(), &QMatrix::from_i64_rows(&[vec![0, 1], vec![-1, 0]]));
        let g = gram_matrix(4, Epsilon::Minus).unwrap();
        assert_eq!(
            g.gram(),
            &QMatrix::from_i64_rows(&[
                vec![0, 0, 0, 1],
                vec![0, 0, 1, 0],
                vec![0, -1, 0, 0],
                vec![-1, 0, 0, 0],
            ])
        );
        assert_eq!(gram_matrix(3, Epsilon::Minus), Err(FormError::OddSymplectic(3)));
    }

    #[test]
    fn gram_is_epsilon_symmetric() {
        for n in 1..=7 {
            for eps in [Epsilon::Plus, Epsilon::Minus] {
                let Ok(f) = gram_matrix(n, eps) else { continue };
                assert_eq!(f.gram().transpose(), f.gram().scale(&eps.as_rational()));
            }
        }
    }

    #[test]
    fn star_examples() {
        let f = gram_matrix(4, Epsilon::Plus).unwrap();
        assert_eq!(star(&QMatrix::identity(4), &f).unwrap(), QMatrix::identity(4));
        assert_eq!(star(&QMatrix::unit(4, 1, 2), &f).unwrap(), QMatrix::unit(4, 3, 4));
        assert!(matches!(
            star(&QMatrix::identity(3), &f),
            Err(FormError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn star_satisfies_adjoint_identity_on_basis() {
        for (n, eps) in [(4, Epsilon::Minus), (4, Epsilon::Plus), (5, Epsilon::Plus), (6, Epsilon::Minus)] {
            let f = gram_matrix(n, eps).unwrap();
            for (i, j) in [(3, 1), (1, 2), (n, 1), (2, n - 1)] {
                let a = QMatrix::unit(n, i, j);
                let s = star(&a, &f).unwrap();
                for p in 0..n {
                    for q in 0..n {
                        let v = basis_vector(n, p);
                        let w = basis_vector(n, q);
                        let aw: Vec<Rational> = (0..n).map(|r| a[(r, q)].clone()).collect();
                        let sv: Vec<Rational> = (0..n).map(|r| s[(r, p)].clone()).collect();
                        assert_eq!(f.pair(&v, &aw), f.pair(&sv, &w));
                    }
                }
            }
        }
    }

    #[test]
    fn symplectic_star_of_e31() {
        // G^{-1} E_13 G for the symplectic Gram matrix of size 4.
        let f = gram_matrix(4, Epsilon::Minus).unwrap();
        let s = star(&QMatrix::unit(4, 3, 1), &f).unwrap();
        assert_eq!(s, QMatrix::unit(4, 4, 2).scale(&rat(-1)));
    }

    #[test]
    fn delta_examples() {
        let f = gram_matrix(4, Epsilon::Plus).unwrap();
        assert!(delta(&QMatrix::zeros(4, 4), &f).unwrap().is_zero());
        let m = &QMatrix::unit(4, 3, 1) - &QMatrix::unit(4, 4, 2);
        assert_eq!(delta(&m, &f).unwrap(), m);
        for i in 1..=4 {
            for j in 1..=4 {
                let d = delta(&QMatrix::unit(4, i, j), &f).unwrap();
                let expected = QMatrix::unit(4, dual_index(4, j), dual_index(4, i)).scale(&rat(-1));
                assert_eq!(d, expected);
            }
        }
    }

    #[test]
    fn lie_basis_dimensions() {
        let plus = gram_matrix(4, Epsilon::Plus).unwrap();
        let minus = gram_matrix(4, Epsilon::Minus).unwrap();
        assert_eq!(lie_basis(LieLabel::B, 4, None).unwrap().dim(), 10);
        assert_eq!(lie_basis(LieLabel::GEps, 4, Some(&plus)).unwrap().dim(), 6);
        assert_eq!(lie_basis(LieLabel::GEps, 4, Some(&minus)).unwrap().dim(), 10);
        assert_eq!(lie_basis(LieLabel::BEps, 4, Some(&plus)).unwrap().dim(), 4);
        assert_eq!(
            lie_basis(LieLabel::BEps, 4, None),
            Err(FormError::FormRequired(LieLabel::BEps))
        );
    }

    #[test]
    fn lie_basis_elements_satisfy_their_conditions() {
        for (n, eps) in [(4, Epsilon::Plus), (5, Epsilon::Plus), (4, Epsilon::Minus), (6, Epsilon::Minus)] {
            let f = gram_matrix(n, eps).unwrap();
            let g = lie_basis(LieLabel::GEps, n, Some(&f)).unwrap();
            assert_eq!(g.dim(), dim_g_eps(n, eps));
            for x in &g.basis {
                assert_eq!(star(x, &f).unwrap(), -x);
            }
            let b = lie_basis(LieLabel::BEps, n, Some(&f)).unwrap();
            let rank = n / 2;
            assert_eq!(b.dim(), (g.dim() + rank) / 2);
            for x in &b.basis {
                assert!(x.is_upper_triangular());
                assert!(is_delta_fixed(x, &f));
            }
        }
    }

    #[test]
    fn orthogonal_lie_algebra_elements_have_even_rank() {
        for n in [4, 5] {
            let f = gram_matrix(n, Epsilon::Plus).unwrap();
            for x in lie_basis(LieLabel::GEps, n, Some(&f)).unwrap().basis {
                assert_eq!(x.rank() % 2, 0);
            }
        }
    }

    #[test]
    fn pll_star_examples() {
        let p = pll_star(4, 2).unwrap();
        let mut expected = QMatrix::identity(4);
        expected[(1, 1)] = Rational::zero();
        expected[(2, 2)] = Rational::zero();
        expected[(1, 2)] = Rational::one();
        expected[(2, 1)] = Rational::one();
        assert_eq!(p, expected);
        assert_eq!(&p * &p, QMatrix::identity(4));
        let f = gram_matrix(4, Epsilon::Plus).unwrap();
        assert_eq!(star(&p, &f).unwrap(), p.inverse().unwrap());
        let m = &QMatrix::unit(4, 3, 1) - &QMatrix::unit(4, 4, 2);
        let nn = &QMatrix::unit(4, 2, 1) - &QMatrix::unit(4, 4, 3);
        assert_eq!(&(&p * &m) * &p, nn);
        assert_eq!(pll_star(5, 2), Err(FormError::OddN { n: 5, l: 2 }));
    }

    #[test]
    fn pll_star_has_determinant_minus_one() {
        // A transposition matrix: one swap away from the identity.
        let p = pll_star(6, 3).unwrap();
        let moved = (0..6).filter(|&i| p[(i, i)].is_zero()).count();
        assert_eq!(moved, 2);
    }

    #[test]
    fn conjugating_borel_eps_by_pll_star_stays_in_borel_eps() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for l in [2usize, 3] {
            let n = 2 * l;
            let f = gram_matrix(n, Epsilon::Plus).unwrap();
            let p = pll_star(n, l).unwrap();
            for _ in 0..100 {
                let g = random_borel_eps_element(&mut rng, &f);
                assert!(g.is_upper_triangular());
                assert_eq!(star(&g, &f).unwrap(), g.inverse().unwrap());
                let h = &(&p * &g) * &p;
                assert!(h.is_upper_triangular());
                assert_eq!(star(&h, &f).unwrap(), h.inverse().unwrap());
            }
        }
    }

    #[test]
    fn root_elements_lie_in_b_eps() {
        for (n, eps) in [(4, Epsilon::Plus), (5, Epsilon::Plus), (4, Epsilon::Minus)] {
            let f = gram_matrix(n, eps).unwrap();
            let roots = b_eps_root_elements(&f);
            let b = lie_basis(LieLabel::BEps, n, Some(&f)).unwrap();
            assert_eq!(roots.len(), b.dim() - n / 2);
            for x in roots {
                assert!(x.is_strictly_upper());
                assert!(is_delta_fixed(&x, &f));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn star_is_an_anti_involution(seed in any::<u64>(), half in 1usize..4, odd in any::<bool>(), symplectic in any::<bool>()) {
            let eps = if symplectic { Epsilon::Minus } else { Epsilon::Plus };
            let n = 2 * half + usize::from(odd && !symplectic);
            let f = gram_matrix(n, eps).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_borel_element(&mut rng, n).transpose();
            let b = random_borel_element(&mut rng, n);
            prop_assert_eq!(star(&star(&a, &f).unwrap(), &f).unwrap(), a.clone());
            prop_assert_eq!(star(&(&a * &b), &f).unwrap(), &star(&b, &f).unwrap() * &star(&a, &f).unwrap());
            prop_assert_eq!(star(&(&a + &b), &f).unwrap(), &star(&a, &f).unwrap() + &star(&b, &f).unwrap());
            prop_assert_eq!(delta(&delta(&a, &f).unwrap(), &f).unwrap(), a);
        }

        #[test]
        fn delta_fixed_points_lie_in_g_eps(seed in any::<u64>(), symplectic in any::<bool>()) {
            let eps = if symplectic { Epsilon::Minus } else { Epsilon::Plus };
            let f = gram_matrix(4, eps).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_borel_element(&mut rng, 4);
            let fixed = (&a + &delta(&a, &f).unwrap()).scale(&frac(1, 2));
            prop_assert!(is_delta_fixed(&fixed, &f));
            let g = lie_basis(LieLabel::GEps, 4, Some(&f)).unwrap();
            let mut stacked = QMatrix::zeros(16, g.dim() + 1);
            for (k, x) in g.basis.iter().chain(std::iter::once(&fixed)).enumerate() {
                for e in 0..16 {
                    stacked[(e, k)] = x.entries()[e].clone();
                }
            }
            prop_assert_eq!(stacked.rank(), g.dim());
        }

        #[test]
        fn random_borel_eps_elements_are_isometries(seed in any::<u64>(), n in 2usize..6, symplectic in any::<bool>()) {
            let eps = if symplectic && n % 2 == 0 { Epsilon::Minus } else { Epsilon::Plus };
            let f = gram_matrix(n, eps).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_borel_eps_element(&mut rng, &f);
            prop_assert!(g.is_upper_triangular());
            prop_assert_eq!(star(&g, &f).unwrap(), g.inverse().unwrap());
        }
    }
}
