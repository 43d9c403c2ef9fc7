//! Borel orbits of 2-nilpotent matrices: stabilizer and orbit dimensions,
//! the distinguished elements `M_gamma` and `N_gamma`, symmetric orbit
//! representatives, and a brute-force census over small prime fields.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::forms::{
    dual_index, gram_matrix, is_delta_fixed, lie_basis, EpsForm, Epsilon, FormError, LieLabel,
};
use crate::intmat::IntMatrix;
use crate::linalg::{ff_reduce, FFMatrix, LinalgError, QMatrix, Rational};
use crate::patterns::{
    corner_ranks, corner_ranks_ff, enumerate_patterns, pattern_profile, pattern_to_matrix, LinkPattern,
    RankProfile,
};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum OrbitError {
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("matrix is not square-zero")]
    Not2Nilpotent,
    #[error("matrix is not fixed by delta")]
    NotDeltaFixed,
    #[error("state space of {states} exceeds the bound {bound}")]
    TooLarge { states: u128, bound: u128 },
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn check_gamma_params(n: usize, l: usize) -> Result<(), OrbitError> {
    if l < 2 || (n != 2 * l && n != 2 * l + 1) {
        return Err(OrbitError::BadParameters(format!("need l >= 2 and n in {{2l, 2l+1}}, got n = {n}, l = {l}")));
    }
    Ok(())
}

/// `M_gamma = E_{l*,1} - ε E_{1*,l}` in dimension `n`.
pub fn build_mgamma(n: usize, l: usize, epsilon: Epsilon) -> Result<QMatrix, OrbitError> {
    check_gamma_params(n, l)?;
    if epsilon == Epsilon::Minus && n % 2 == 1 {
        return Err(OrbitError::BadParameters(format!("ε = -1 needs an even n, got {n}")));
    }
    let a = QMatrix::unit(n, dual_index(n, l), 1);
    let b = QMatrix::unit(n, dual_index(n, 1), l).scale(&epsilon.as_rational());
    Ok(&a - &b)
}

/// `N_gamma = E_{l,1} - E_{1*,l*}` in dimension `n`.
pub fn build_ngamma(n: usize, l: usize) -> Result<QMatrix, OrbitError> {
    check_gamma_params(n, l)?;
    Ok(&QMatrix::unit(n, l, 1) - &QMatrix::unit(n, dual_index(n, 1), dual_index(n, l)))
}

pub fn is_two_nilpotent(a: &QMatrix) -> bool {
    a.is_square() && (a * a).is_zero()
}

/// `dim b = n(n+1)/2`.
pub fn dim_b(n: usize) -> usize {
    n * (n + 1) / 2
}

/// `dim b(ε)`: half of `dim g(ε)` plus the rank `floor(n/2)`.
pub fn dim_b_eps(n: usize, epsilon: Epsilon) -> usize {
    (crate::forms::dim_g_eps(n, epsilon) + n / 2) / 2
}

/// Dimension of `{x in span(basis) : [x, a] = 0}`.
pub fn centralizer_dim(basis: &[QMatrix], a: &QMatrix) -> usize {
    let n = a.rows();
    let mut system = QMatrix::zeros(n * n, basis.len());
    for (k, x) in basis.iter().enumerate() {
        let c = x.commutator(a);
        for (e, v) in c.entries().iter().enumerate() {
            if !v.is_zero() {
                system[(e, k)] = v.clone();
            }
        }
    }
    basis.len() - system.rank()
}

/// `(dim B.a, dim Stab_B(a))` for a square-zero matrix `a`.
pub fn orbit_dim_a(a: &QMatrix) -> Result<(usize, usize), OrbitError> {
    if !is_two_nilpotent(a) {
        return Err(OrbitError::Not2Nilpotent);
    }
    let n = a.rows();
    let basis = lie_basis(LieLabel::B, n, None)?;
    let stab = centralizer_dim(&basis.basis, a);
    Ok((dim_b(n) - stab, stab))
}

/// `(dim B(ε).a, dim Stab_{B(ε)}(a))` for a delta-fixed square-zero matrix.
pub fn orbit_dim_eps(a: &QMatrix, form: &EpsForm) -> Result<(usize, usize), OrbitError> {
    if !is_two_nilpotent(a) {
        return Err(OrbitError::Not2Nilpotent);
    }
    if a.rows() != form.n() || !is_delta_fixed(a, form) {
        return Err(OrbitError::NotDeltaFixed);
    }
    let basis = lie_basis(LieLabel::BEps, form.n(), Some(form))?;
    let stab = centralizer_dim(&basis.basis, a);
    Ok((basis.dim() - stab, stab))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymmetricData {
    pub epsilon: Epsilon,
    #[serde(skip)]
    pub fixed_representative: QMatrix,
    /// Further delta-fixed matrices with the same profile, differing from the
    /// representative in the coefficients of self-paired arcs. Over the
    /// rationals these can lie in different orbits (square classes); over an
    /// algebraically closed field they are all conjugate.
    #[serde(skip)]
    pub alternatives: Vec<QMatrix>,
    pub dim_orbit_eps: usize,
    pub dim_stab_eps: usize,
}

/// One `B`-orbit of square-zero matrices, optionally with its symmetric part.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitRecord {
    pub pattern: LinkPattern,
    #[serde(skip)]
    pub representative: QMatrix,
    #[serde(skip)]
    pub profile: RankProfile,
    pub dim_orbit: usize,
    pub dim_stab: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetric: Option<SymmetricData>,
}

impl OrbitRecord {
    pub fn n(&self) -> usize {
        self.pattern.n()
    }

    /// The matrix used for the given group: the fixed representative for `B(ε)`.
    pub fn matrix_for(&self, symmetric: bool) -> &QMatrix {
        match (&self.symmetric, symmetric) {
            (Some(s), true) => &s.fixed_representative,
            _ => &self.representative,
        }
    }

    /// Representatives usable as starting points: for `B(ε)` the fixed
    /// representative followed by its alternatives.
    pub fn starts_for(&self, symmetric: bool) -> Vec<QMatrix> {
        match (&self.symmetric, symmetric) {
            (Some(s), true) => std::iter::once(&s.fixed_representative).chain(&s.alternatives).cloned().collect(),
            _ => vec![self.representative.clone()],
        }
    }

    /// Orbit dimension in the relevant group, if available.
    pub fn dim_in(&self, symmetric: bool) -> Option<usize> {
        if symmetric {
            self.symmetric.as_ref().map(|s| s.dim_orbit_eps)
        } else {
            Some(self.dim_orbit)
        }
    }
}

fn type_a_record(pattern: &LinkPattern) -> OrbitRecord {
    let representative = pattern_to_matrix(pattern);
    let (dim_orbit, dim_stab) = orbit_dim_a(&representative).expect("pattern matrices are square-zero");
    OrbitRecord {
        pattern: pattern.clone(),
        profile: pattern_profile(pattern),
        representative,
        dim_orbit,
        dim_stab,
        symmetric: None,
    }
}

/// Type-A records for every link pattern, in enumeration order.
pub fn enumerate_orbits(n: usize) -> Vec<OrbitRecord> {
    enumerate_patterns(n).par_iter().map(type_a_record).collect()
}

/// Why a delta-symmetric pattern has no symmetric representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OmissionReason {
    /// Some corner block is antisymmetric up to row reversal but the pattern
    /// demands odd rank there.
    OddAntisymmetricCorner { row: usize, col: usize },
    /// Exhaustive search over small coefficients found nothing.
    SearchExhausted,
    /// The search space exceeded the cap and was not fully explored.
    SearchCapped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OmittedPattern {
    pub pattern: LinkPattern,
    pub reason: OmissionReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricOrbits {
    pub n: usize,
    pub epsilon: Epsilon,
    pub records: Vec<OrbitRecord>,
    pub omitted: Vec<OmittedPattern>,
}

/// Largest number of candidates the fallback search may visit per pattern.
pub const FALLBACK_CAP: u64 = 390_625;

/// One `B(ε)`-orbit for every delta-symmetric pattern that meets the fixed locus.
pub fn enumerate_symmetric_orbits(n: usize, epsilon: Epsilon) -> Result<SymmetricOrbits, OrbitError> {
    let form = gram_matrix(n, epsilon)?;
    let b_eps = lie_basis(LieLabel::BEps, n, Some(&form))?;
    let results: Vec<Result<OrbitRecord, OmittedPattern>> = enumerate_patterns(n)
        .par_iter()
        .filter(|p| p.is_delta_symmetric())
        .map(|p| {
            let mut alternatives = symmetric_representatives(p, &form)?;
            let fixed = alternatives.remove(0);
            let mut record = type_a_record(p);
            let stab = centralizer_dim(&b_eps.basis, &fixed);
            record.symmetric = Some(SymmetricData {
                epsilon,
                fixed_representative: fixed,
                alternatives,
                dim_orbit_eps: b_eps.dim() - stab,
                dim_stab_eps: stab,
            });
            Ok(record)
        })
        .collect();
    let mut records = Vec::new();
    let mut omitted = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(o) => omitted.push(o),
        }
    }
    Ok(SymmetricOrbits {
        n,
        epsilon,
        records,
        omitted,
    })
}

fn accepts(a: &QMatrix, target: &RankProfile, form: &EpsForm) -> bool {
    is_two_nilpotent(a) && is_delta_fixed(a, form) && corner_ranks(a) == *target
}

/// A delta-fixed square-zero matrix with the profile of `p`, or the reason none was found.
pub fn symmetric_representative(p: &LinkPattern, form: &EpsForm) -> Result<QMatrix, OmittedPattern> {
    symmetric_representatives(p, form).map(|mut v| v.swap_remove(0))
}

/// Every candidate of the direct construction that works (nonempty), or the
/// single matrix found by the fallback search.
pub fn symmetric_representatives(p: &LinkPattern, form: &EpsForm) -> Result<Vec<QMatrix>, OmittedPattern> {
    let target = pattern_profile(p);
    let n = p.n();
    // Arc orbits under delta: pairs {(s,t), (t*,s*)} and self-paired arcs s -> s*.
    let mut paired = Vec::new();
    let mut self_paired = Vec::new();
    for &(s, t) in p.arcs() {
        let image = (dual_index(n, t), dual_index(n, s));
        if image == (s, t) {
            self_paired.push((s, t));
        } else if (s, t) < image {
            paired.push((s, t));
        }
    }
    let fold = |e: &QMatrix| -> QMatrix { e + &crate::forms::delta(e, form).expect("square") };
    let mut base = QMatrix::zeros(n, n);
    for &(s, t) in &paired {
        base = &base + &fold(&QMatrix::unit(n, t, s));
    }
    let self_terms: Vec<QMatrix> = self_paired.iter().map(|&(s, t)| fold(&QMatrix::unit(n, t, s))).collect();
    let coeffs: Vec<Rational> = [1, -1, 2, -2].iter().map(|&c| crate::linalg::rat(c)).collect();
    let combos = coeffs.len().pow(self_terms.len() as u32);
    let mut found = Vec::new();
    for mut code in 0..combos {
        let mut a = base.clone();
        for term in &self_terms {
            a = &a + &term.scale(&coeffs[code % coeffs.len()]);
            code /= coeffs.len();
        }
        if accepts(&a, &target, form) {
            found.push(a);
        }
    }
    if !found.is_empty() {
        return Ok(found);
    }
    if let Some((row, col)) = odd_antisymmetric_corner(p, form) {
        return Err(OmittedPattern {
            pattern: p.clone(),
            reason: OmissionReason::OddAntisymmetricCorner { row, col },
        });
    }
    fallback_search(p, &target, form).map(|a| vec![a])
}

/// For ε = +1 the corner block at `(s*, s)` of any matrix in `g(ε)` has even
/// rank, because reversing its rows gives an antisymmetric matrix.
fn odd_antisymmetric_corner(p: &LinkPattern, form: &EpsForm) -> Option<(usize, usize)> {
    if form.epsilon() != Epsilon::Plus {
        return None;
    }
    let n = p.n();
    let target = pattern_profile(p);
    (1..=n)
        .map(|s| (dual_index(n, s), s))
        .find(|&(row, col)| target.get(row, col) % 2 == 1)
}

/// Exhaustive search over the delta-fixed matrices supported where the `B`-orbit
/// of the pattern lives (rows `<= t`, columns `>= s` for some arc `s -> t`).
fn fallback_search(p: &LinkPattern, target: &RankProfile, form: &EpsForm) -> Result<QMatrix, OmittedPattern> {
    let n = p.n();
    let positions: Vec<(usize, usize)> = (1..=n)
        .flat_map(|i| (1..=n).map(move |j| (i, j)))
        .filter(|&(i, j)| p.arcs().iter().any(|&(s, t)| i <= t && j >= s))
        .collect();
    let basis: Vec<IntMatrix> = crate::forms::fixed_subspace_basis(form, &positions)
        .iter()
        .map(|b| IntMatrix::from_qmatrix(&b.primitive()).expect("fixed-subspace bases are integral"))
        .collect();
    let dim = basis.len() as u32;
    let (range, reason) = if 5u64.checked_pow(dim).is_some_and(|c| c <= FALLBACK_CAP) {
        (2i64, OmissionReason::SearchExhausted)
    } else if 3u64.checked_pow(dim).is_some_and(|c| c <= FALLBACK_CAP) {
        (1i64, OmissionReason::SearchCapped)
    } else {
        return Err(OmittedPattern {
            pattern: p.clone(),
            reason: OmissionReason::SearchCapped,
        });
    };
    let width = 2 * range + 1;
    let mut digits = vec![-range; basis.len()];
    let mut current = IntMatrix::zeros(n);
    for b in &basis {
        current.add_scaled_in_place(b, -range).expect("small coefficients");
    }
    loop {
        if current.squares_to_zero() && current.corner_ranks().as_ref() == Some(target) {
            let q = current.to_qmatrix();
            if accepts(&q, target, form) {
                return Ok(q);
            }
        }
        // Odometer step: every changed digit adds or removes one basis vector.
        let mut k = 0;
        loop {
            if k == digits.len() {
                return Err(OmittedPattern {
                    pattern: p.clone(),
                    reason,
                });
            }
            if digits[k] < range {
                digits[k] += 1;
                current.add_scaled_in_place(&basis[k], 1).expect("small coefficients");
                break;
            }
            digits[k] = -range;
            current.add_scaled_in_place(&basis[k], -(width - 1)).expect("small coefficients");
            k += 1;
        }
    }
}

/// Per-profile result of the finite-field census.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusEntry {
    pub profile: RankProfile,
    pub orbit_count: usize,
    pub orbit_sizes: Vec<usize>,
}

/// Default bound on `q^dim g(ε)` for the census.
pub const CENSUS_BOUND: u128 = 10_000_000;

pub fn ffq_orbit_census(n: usize, epsilon: Epsilon, q: u32) -> Result<Vec<CensusEntry>, OrbitError> {
    ffq_orbit_census_with_bound(n, epsilon, q, CENSUS_BOUND)
}

/// Partitions the delta-fixed square-zero matrices over `F_q` into
/// `B(ε)(F_q)`-orbits and groups the orbits by corner-rank profile.
pub fn ffq_orbit_census_with_bound(
    n: usize,
    epsilon: Epsilon,
    q: u32,
    bound: u128,
) -> Result<Vec<CensusEntry>, OrbitError> {
    if q == 2 {
        return Err(OrbitError::BadParameters("characteristic 2 is not supported".into()));
    }
    let form = gram_matrix(n, epsilon)?;
    let g_eps = lie_basis(LieLabel::GEps, n, Some(&form))?;
    let states = u128::from(q).pow(g_eps.dim() as u32);
    if states > bound {
        return Err(OrbitError::TooLarge { states, bound });
    }
    let basis: Vec<FFMatrix> = g_eps
        .basis
        .iter()
        .map(|b| ff_reduce(b, q))
        .collect::<Result<_, _>>()?;
    let mut stacked = FFMatrix::zeros(q, n * n, basis.len());
    for (k, b) in basis.iter().enumerate() {
        for (e, &v) in b.entries().iter().enumerate() {
            stacked.set(e, k, v);
        }
    }
    assert_eq!(stacked.rank(), basis.len(), "g(ε) basis must stay independent mod {q}");

    let gram = ff_reduce(form.gram(), q)?;
    let FfOrbits { fixed, orbits, .. } = ff_orbits(&basis, &gram, n, q, bound)?;

    let mut by_profile: BTreeMap<RankProfile, Vec<usize>> = BTreeMap::new();
    for &(rep, size) in &orbits {
        by_profile.entry(corner_ranks_ff(&fixed[rep])).or_default().push(size);
    }
    Ok(by_profile
        .into_iter()
        .map(|(profile, mut orbit_sizes)| {
            orbit_sizes.sort_unstable();
            CensusEntry {
                profile,
                orbit_count: orbit_sizes.len(),
                orbit_sizes,
            }
        })
        .collect())
}

/// Orbit decomposition of the delta-fixed square-zero matrices over `F_q`.
pub(crate) struct FfOrbits {
    pub fixed: Vec<FFMatrix>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub orbit_of: Vec<usize>,
    /// `(representative index, orbit size)` per orbit.
    pub orbits: Vec<(usize, usize)>,
}

fn ff_orbits(basis: &[FFMatrix], gram: &FFMatrix, n: usize, q: u32, bound: u128) -> Result<FfOrbits, OrbitError> {
    let fixed = ff_fixed_square_zero(basis, n, q);
    let group = ff_borel_eps_group(gram, n, q, bound)?;
    let index: HashMap<&[u32], usize> = fixed.iter().enumerate().map(|(i, m)| (m.entries(), i)).collect();
    let mut orbit_of = vec![usize::MAX; fixed.len()];
    let mut orbits: Vec<(usize, usize)> = Vec::new();
    for start in 0..fixed.len() {
        if orbit_of[start] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut size = 0;
        for (g, g_inv) in &group {
            let image = g.mul(&fixed[start]).mul(g_inv);
            let j = index[image.entries()];
            if orbit_of[j] == usize::MAX {
                orbit_of[j] = id;
                size += 1;
            }
        }
        orbits.push((start, size));
    }
    Ok(FfOrbits {
        fixed,
        orbit_of,
        orbits,
    })
}

/// All square-zero elements of the span of `basis` over `F_q`.
fn ff_fixed_square_zero(basis: &[FFMatrix], n: usize, q: u32) -> Vec<FFMatrix> {
    let mut out = Vec::new();
    let mut digits = vec![0u32; basis.len()];
    let mut current = FFMatrix::zeros(q, n, n);
    loop {
        if current.mul(&current).is_zero() {
            out.push(current.clone());
        }
        // Odometer over F_q^dim; each digit change (including wrap-around) adds one basis vector.
        let mut k = 0;
        loop {
            if k == digits.len() {
                return out;
            }
            current = current.add(&basis[k]);
            digits[k] += 1;
            if digits[k] < q {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

/// Upper-triangular `g` over `F_q` with `g^t G g = G`, paired with their inverses,
/// found column by column.
fn ff_borel_eps_group(gram: &FFMatrix, n: usize, q: u32, bound: u128) -> Result<Vec<(FFMatrix, FFMatrix)>, OrbitError> {
    let qq = u64::from(q);
    let pair = |u: &[u32], v: &[u32]| -> u32 {
        let mut acc = 0u64;
        for i in 0..n {
            for j in 0..n {
                let g = gram.get(i, j);
                if g != 0 {
                    acc = (acc + u64::from(u[i]) * u64::from(g) % qq * u64::from(v[j])) % qq;
                }
            }
        }
        acc as u32
    };
    let mut partial: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    for j in 0..n {
        let mut next = Vec::new();
        let free = u128::from(q).pow(j as u32) * u128::from(q - 1);
        if (partial.len() as u128) * free > bound {
            return Err(OrbitError::TooLarge {
                states: partial.len() as u128 * free,
                bound,
            });
        }
        for cols in &partial {
            let mut col = vec![0u32; n];
            let mut code = 0u128;
            while code < free {
                let mut c = code;
                col[j] = (c % u128::from(q - 1)) as u32 + 1;
                c /= u128::from(q - 1);
                for entry in col.iter_mut().take(j) {
                    *entry = (c % u128::from(q)) as u32;
                    c /= u128::from(q);
                }
                let ok = cols
                    .iter()
                    .enumerate()
                    .all(|(i, ci)| pair(ci, &col) == gram.get(i, j))
                    && pair(&col, &col) == gram.get(j, j);
                if ok {
                    let mut extended = cols.clone();
                    extended.push(col.clone());
                    next.push(extended);
                }
                code += 1;
            }
        }
        partial = next;
    }
    let gram_inv = ff_inverse(gram);
    Ok(partial
        .into_iter()
        .map(|cols| {
            let mut g = FFMatrix::zeros(q, n, n);
            for (j, col) in cols.iter().enumerate() {
                for (i, &v) in col.iter().enumerate() {
                    g.set(i, j, v);
                }
            }
            // g^{-1} = G^{-1} g^t G for an isometry.
            let inv = gram_inv.mul(&g.transpose()).mul(gram);
            (g, inv)
        })
        .collect())
}

/// Inverse of a signed permutation matrix over `F_q` (such as a canonical Gram matrix).
fn ff_inverse(m: &FFMatrix) -> FFMatrix {
    let n = m.rows();
    let q = m.modulus();
    let mut out = FFMatrix::zeros(q, n, n);
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            if v != 0 {
                out.set(j, i, crate::linalg::mod_inverse(v, q));
            }
        }
    }
    debug_assert_eq!(out.mul(m), FFMatrix::identity(q, n));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{delta, random_borel_eps_element, ClassicalType};
    use crate::linalg::rat;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(n: usize, i: usize, j: usize) -> QMatrix {
        QMatrix::unit(n, i, j)
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(build_mgamma(4, 2, Epsilon::Plus).unwrap(), &e(4, 3, 1) - &e(4, 4, 2));
        assert_eq!(build_ngamma(4, 2).unwrap(), &e(4, 2, 1) - &e(4, 4, 3));
        assert_eq!(build_mgamma(4, 2, Epsilon::Minus).unwrap(), &e(4, 3, 1) + &e(4, 4, 2));
        let f = gram_matrix(4, Epsilon::Minus).unwrap();
        let m = build_mgamma(4, 2, Epsilon::Minus).unwrap();
        assert_eq!(delta(&m, &f).unwrap(), m);
        assert!(matches!(build_mgamma(5, 2, Epsilon::Minus), Err(OrbitError::BadParameters(_))));
        assert!(matches!(build_ngamma(7, 2), Err(OrbitError::BadParameters(_))));
        assert!(matches!(build_ngamma(2, 1), Err(OrbitError::BadParameters(_))));
    }

    #[test]
    fn gammas_are_fixed_and_square_zero_in_all_types() {
        for l in 2..=5 {
            for n in [2 * l, 2 * l + 1] {
                for eps in [Epsilon::Plus, Epsilon::Minus] {
                    if eps == Epsilon::Minus && n % 2 == 1 {
                        continue;
                    }
                    let f = gram_matrix(n, eps).unwrap();
                    let m = build_mgamma(n, l, eps).unwrap();
                    let nn = build_ngamma(n, l).unwrap();
                    assert!(is_two_nilpotent(&m) && is_two_nilpotent(&nn));
                    assert!(is_delta_fixed(&m, &f), "M, n = {n}, ε = {eps}");
                    assert!(is_delta_fixed(&nn, &f), "N, n = {n}, ε = {eps}");
                }
            }
        }
    }

    #[test]
    fn type_a_dimension_examples() {
        assert_eq!(orbit_dim_a(&build_mgamma(4, 2, Epsilon::Plus).unwrap()).unwrap(), (7, 3));
        assert_eq!(orbit_dim_a(&build_ngamma(4, 2).unwrap()).unwrap(), (6, 4));
        assert_eq!(orbit_dim_a(&QMatrix::zeros(4, 4)).unwrap(), (0, 10));
        assert_eq!(orbit_dim_a(&QMatrix::identity(2)), Err(OrbitError::Not2Nilpotent));
    }

    #[test]
    fn symmetric_dimension_examples() {
        let d = gram_matrix(4, Epsilon::Plus).unwrap();
        assert_eq!(orbit_dim_eps(&build_mgamma(4, 2, Epsilon::Plus).unwrap(), &d).unwrap(), (2, 2));
        assert_eq!(orbit_dim_eps(&build_ngamma(4, 2).unwrap(), &d).unwrap(), (2, 2));
        let c = gram_matrix(4, Epsilon::Minus).unwrap();
        assert_eq!(orbit_dim_eps(&build_mgamma(4, 2, Epsilon::Minus).unwrap(), &c).unwrap().0, 5);
        assert_eq!(orbit_dim_eps(&e(4, 2, 1), &d), Err(OrbitError::NotDeltaFixed));
    }

    #[test]
    fn borel_eps_dimensions() {
        for n in 2..=9 {
            for eps in [Epsilon::Plus, Epsilon::Minus] {
                if eps == Epsilon::Minus && n % 2 == 1 {
                    continue;
                }
                let f = gram_matrix(n, eps).unwrap();
                assert_eq!(lie_basis(LieLabel::BEps, n, Some(&f)).unwrap().dim(), dim_b_eps(n, eps));
            }
        }
        assert_eq!(ClassicalType::of(5, Epsilon::Plus), ClassicalType::B);
        assert_eq!(dim_b_eps(5, Epsilon::Plus), 6);
        assert_eq!(dim_b_eps(4, Epsilon::Plus), 4);
        assert_eq!(dim_b_eps(4, Epsilon::Minus), 6);
    }

    #[test]
    fn centralizer_of_e21_in_b() {
        let b = lie_basis(LieLabel::B, 2, None).unwrap();
        assert_eq!(centralizer_dim(&b.basis, &e(2, 2, 1)), 1);
    }

    #[test]
    fn symmetric_enumeration_examples() {
        let o = enumerate_symmetric_orbits(2, Epsilon::Plus).unwrap();
        assert_eq!(o.records.len(), 1);
        assert_eq!(o.records[0].pattern, LinkPattern::empty(2));
        assert_eq!(o.omitted.len(), 2);
        assert!(o
            .omitted
            .iter()
            .all(|p| matches!(p.reason, OmissionReason::OddAntisymmetricCorner { .. })));

        let o = enumerate_symmetric_orbits(2, Epsilon::Minus).unwrap();
        assert_eq!(o.records.len(), 3);
        let e21 = o.records.iter().find(|r| r.pattern.to_string() == "1->2").unwrap();
        let fixed = &e21.symmetric.as_ref().unwrap().fixed_representative;
        assert_eq!(corner_ranks(fixed), corner_ranks(&e(2, 2, 1)));

        let o = enumerate_symmetric_orbits(4, Epsilon::Plus).unwrap();
        for text in ["1->3,2->4", "1->2,3->4"] {
            let r = o.records.iter().find(|r| r.pattern.to_string() == text).unwrap();
            assert_eq!(r.symmetric.as_ref().unwrap().dim_orbit_eps, 2, "{text}");
        }
    }

    #[test]
    fn symmetric_records_satisfy_invariants() {
        for (n, eps) in [(2, Epsilon::Plus), (2, Epsilon::Minus), (3, Epsilon::Plus), (4, Epsilon::Plus), (4, Epsilon::Minus), (5, Epsilon::Plus), (6, Epsilon::Minus)] {
            let f = gram_matrix(n, eps).unwrap();
            let o = enumerate_symmetric_orbits(n, eps).unwrap();
            for r in &o.records {
                let s = r.symmetric.as_ref().unwrap();
                assert_eq!(r.dim_orbit + r.dim_stab, dim_b(n));
                assert_eq!(s.dim_orbit_eps + s.dim_stab_eps, dim_b_eps(n, eps));
                assert!(is_delta_fixed(&s.fixed_representative, &f));
                assert!(is_two_nilpotent(&s.fixed_representative));
                assert_eq!(corner_ranks(&s.fixed_representative), r.profile);
                assert!(s.dim_orbit_eps <= r.dim_orbit);
            }
            // Every omission in these cases is certified by the parity argument.
            assert!(o
                .omitted
                .iter()
                .all(|p| matches!(p.reason, OmissionReason::OddAntisymmetricCorner { .. })));
            if eps == Epsilon::Minus {
                assert!(o.omitted.is_empty());
            }
        }
    }

    #[test]
    fn fallback_search_finds_symplectic_rank_one() {
        let f = gram_matrix(2, Epsilon::Minus).unwrap();
        let p = LinkPattern::parse(2, "1->2").unwrap();
        let a = fallback_search(&p, &pattern_profile(&p), &f).unwrap();
        assert_eq!(corner_ranks(&a), pattern_profile(&p));
        let f = gram_matrix(2, Epsilon::Plus).unwrap();
        assert_eq!(
            fallback_search(&p, &pattern_profile(&p), &f).unwrap_err().reason,
            OmissionReason::SearchExhausted
        );
    }

    #[test]
    fn census_examples() {
        let c = ffq_orbit_census(2, Epsilon::Plus, 3).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c[0].profile.table().iter().all(|&v| v == 0));
        assert_eq!(c[0].orbit_count, 1);

        let c = ffq_orbit_census(2, Epsilon::Minus, 3).unwrap();
        let profiles: Vec<RankProfile> = c.iter().map(|e| e.profile.clone()).collect();
        assert!(profiles.contains(&RankProfile::from_table(2, vec![0; 4])));
        assert!(profiles.contains(&pattern_profile(&LinkPattern::parse(2, "1->2").unwrap())));
        assert_eq!(profiles.len(), 3);
        assert!(matches!(
            ffq_orbit_census_with_bound(4, Epsilon::Minus, 3, 100),
            Err(OrbitError::TooLarge { .. })
        ));
    }

    #[test]
    fn census_orbits_have_constant_profile() {
        for (n, eps) in [(3, Epsilon::Plus), (4, Epsilon::Plus), (4, Epsilon::Minus)] {
            let form = gram_matrix(n, eps).unwrap();
            let basis: Vec<FFMatrix> = lie_basis(LieLabel::GEps, n, Some(&form))
                .unwrap()
                .basis
                .iter()
                .map(|b| ff_reduce(b, 3).unwrap())
                .collect();
            let gram = ff_reduce(form.gram(), 3).unwrap();
            let orbits = ff_orbits(&basis, &gram, n, 3, CENSUS_BOUND).unwrap();
            for (k, m) in orbits.fixed.iter().enumerate() {
                let rep = orbits.orbits[orbits.orbit_of[k]].0;
                assert_eq!(corner_ranks_ff(m), corner_ranks_ff(&orbits.fixed[rep]));
            }
            let total: usize = orbits.orbits.iter().map(|o| o.1).sum();
            assert_eq!(total, orbits.fixed.len());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn symmetric_dims_are_conjugation_invariant(seed in any::<u64>(), l in 2usize..4, odd in any::<bool>(), symplectic in any::<bool>()) {
            let eps = if symplectic { Epsilon::Minus } else { Epsilon::Plus };
            let n = if odd && !symplectic { 2 * l + 1 } else { 2 * l };
            let f = gram_matrix(n, eps).unwrap();
            let m = build_mgamma(n, l, eps).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_borel_eps_element(&mut rng, &f);
            let conj = &(&g * &m) * &g.inverse().unwrap();
            prop_assert_eq!(orbit_dim_eps(&conj, &f).unwrap(), orbit_dim_eps(&m, &f).unwrap());
            prop_assert_eq!(orbit_dim_a(&conj).unwrap(), orbit_dim_a(&m).unwrap());
            prop_assert_eq!(corner_ranks(&conj), corner_ranks(&m));
        }

        #[test]
        fn type_a_dims_sum_to_dim_b(n in 1usize..6, idx in any::<prop::sample::Index>()) {
            let records = enumerate_orbits(n);
            let r = idx.get(&records);
            prop_assert_eq!(r.dim_orbit + r.dim_stab, dim_b(n));
            let scaled = r.representative.scale(&rat(3));
            prop_assert_eq!(orbit_dim_a(&scaled).unwrap(), (r.dim_orbit, r.dim_stab));
        }
    }
}
