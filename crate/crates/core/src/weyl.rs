//! The affine symmetric group in window notation: reflections through affine
//! roots, Coxeter length (computed two ways), Bruhat order, and the checks
//! relating the elements `σ_M̂`, `σ_N̂` to the Borel orbits of `M_γ`, `N_γ`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::forms::Epsilon;
use crate::orbits::{build_mgamma, build_ngamma, orbit_dim_a, OrbitError};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum WeylError {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("reflections of {first} and {second} do not commute")]
    NotStronglyOrthogonal { first: AffineRoot, second: AffineRoot },
    #[error("length formula gives {formula} but descent reduction gives {word}")]
    LengthMismatch { formula: usize, word: usize },
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

/// A bijection `w` of the integers with `w(i + n) = w(i) + n`, stored as its
/// window `[w(1), ..., w(n)]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffinePerm {
    window: Vec<i64>,
}

impl AffinePerm {
    pub fn new(window: Vec<i64>) -> Result<Self, WeylError> {
        let n = window.len() as i64;
        if n == 0 {
            return Err(WeylError::InvalidWindow("empty window".into()));
        }
        let mut seen = vec![false; n as usize];
        for &v in &window {
            let r = v.rem_euclid(n) as usize;
            if seen[r] {
                return Err(WeylError::InvalidWindow(format!("two values congruent to {r} mod {n}")));
            }
            seen[r] = true;
        }
        let shift: i64 = window.iter().enumerate().map(|(i, &v)| v - (i as i64 + 1)).sum();
        if shift != 0 {
            return Err(WeylError::InvalidWindow(format!("sum of w(i) - i is {shift}, not 0")));
        }
        Ok(AffinePerm { window })
    }

    pub fn identity(n: usize) -> Self {
        AffinePerm {
            window: (1..=n as i64).collect(),
        }
    }

    /// `s_i` for `0 <= i < n`; `s_0` is the affine generator swapping `0` and `1`.
    pub fn simple(n: usize, i: usize) -> Self {
        assert!(i < n, "simple reflection index {i} out of range for n = {n}");
        AffinePerm::identity(n).times_simple(i)
    }

    pub fn n(&self) -> usize {
        self.window.len()
    }

    pub fn window(&self) -> &[i64] {
        &self.window
    }

    pub fn is_identity(&self) -> bool {
        self.window.iter().enumerate().all(|(i, &v)| v == i as i64 + 1)
    }

    /// `w(i)` for any integer `i`.
    pub fn apply(&self, i: i64) -> i64 {
        let n = self.n() as i64;
        let r = (i - 1).rem_euclid(n);
        let q = (i - 1).div_euclid(n);
        self.window[r as usize] + q * n
    }

    /// `(self * rhs)(i) = self(rhs(i))`.
    pub fn compose(&self, rhs: &AffinePerm) -> AffinePerm {
        assert_eq!(self.n(), rhs.n(), "composing affine permutations of different rank");
        AffinePerm {
            window: rhs.window.iter().map(|&v| self.apply(v)).collect(),
        }
    }

    pub fn inverse(&self) -> AffinePerm {
        let n = self.n() as i64;
        let mut window = vec![0; self.n()];
        for (i, &v) in self.window.iter().enumerate() {
            let r = (v - 1).rem_euclid(n);
            let q = (v - 1).div_euclid(n);
            window[r as usize] = i as i64 + 1 - q * n;
        }
        AffinePerm { window }
    }

    /// `self * s_i`: swaps the values at positions `i` and `i + 1`.
    pub fn times_simple(&self, i: usize) -> AffinePerm {
        let n = self.n();
        let mut window = self.window.clone();
        if i == 0 {
            let first = window[0];
            window[0] = window[n - 1] - n as i64;
            window[n - 1] = first + n as i64;
        } else {
            window.swap(i - 1, i);
        }
        AffinePerm { window }
    }

    /// Whether `s_i` is a right descent, i.e. `w(i) > w(i + 1)`.
    pub fn has_right_descent(&self, i: usize) -> bool {
        self.apply(i as i64) > self.apply(i as i64 + 1)
    }

    pub fn first_right_descent(&self) -> Option<usize> {
        (0..self.n()).find(|&i| self.has_right_descent(i))
    }
}

impl fmt::Display for AffinePerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.window.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl FromStr for AffinePerm {
    type Err = WeylError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| WeylError::InvalidWindow(format!("expected [w1,...,wn], got {s:?}")))?;
        let window = inner
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| WeylError::InvalidWindow(e.to_string()))?;
        AffinePerm::new(window)
    }
}

impl Serialize for AffinePerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The affine root `e_i - e_j + k δ`, with `1 <= i, j <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AffineRoot {
    pub i: usize,
    pub j: usize,
    pub k: i64,
}

impl AffineRoot {
    pub fn new(i: usize, j: usize, k: i64) -> Self {
        AffineRoot { i, j, k }
    }

    pub fn negated(&self) -> AffineRoot {
        AffineRoot { i: self.j, j: self.i, k: -self.k }
    }

    /// The pair of integers whose classes the reflection swaps.
    fn swapped(&self, n: usize) -> (i64, i64) {
        // Sign convention, fixed by calibration (see the tests): the root
        // e_i - e_j + kδ swaps i with j + kn.
        (self.i as i64, self.j as i64 + self.k * n as i64)
    }

    fn from_swapped(a: i64, b: i64, n: usize) -> AffineRoot {
        let n = n as i64;
        let shift = (a - 1).div_euclid(n) * n;
        let (a, b) = (a - shift, b - shift);
        let j = (b - 1).rem_euclid(n) + 1;
        AffineRoot {
            i: a as usize,
            j: j as usize,
            k: (b - j) / n,
        }
    }

    /// `w(α)`, acting on the integer pair swapped by the reflection.
    pub fn act(&self, w: &AffinePerm) -> AffineRoot {
        let (a, b) = self.swapped(w.n());
        AffineRoot::from_swapped(w.apply(a), w.apply(b), w.n())
    }

    /// Equality of roots up to an overall sign.
    pub fn same_up_to_sign(&self, other: &AffineRoot) -> bool {
        self == other || self.negated() == *other
    }
}

impl fmt::Display for AffineRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{} - e{} {:+}δ", self.i, self.j, self.k)
    }
}

/// The reflection through an affine root: the affine transposition swapping
/// the classes of its two integers.
pub fn reflection(r: &AffineRoot, n: usize) -> Result<AffinePerm, WeylError> {
    if r.i == 0 || r.j == 0 || r.i > n || r.j > n || r.i == r.j {
        return Err(WeylError::BadParameters(format!("{r} is not an affine root for n = {n}")));
    }
    let (a, b) = r.swapped(n);
    let mut window: Vec<i64> = (1..=n as i64).collect();
    window[r.i - 1] = b;
    window[r.j - 1] = a - r.k * n as i64;
    Ok(AffinePerm { window })
}

/// Coxeter length by the floor-sum formula `Σ_{i<j} |⌊(w(j) - w(i)) / n⌋|`.
pub fn length(w: &AffinePerm) -> usize {
    let n = w.n() as i64;
    let win = w.window();
    let mut total: i64 = 0;
    for i in 0..win.len() {
        for j in i + 1..win.len() {
            total += (win[j] - win[i]).div_euclid(n).abs();
        }
    }
    total as usize
}

/// A reduced word `[i_1, ..., i_k]` with `w = s_{i_1} ... s_{i_k}`, built by
/// repeatedly stripping the first right descent.
pub fn reduced_word(w: &AffinePerm) -> Vec<usize> {
    let mut word = Vec::new();
    let mut cur = w.clone();
    while let Some(i) = cur.first_right_descent() {
        word.push(i);
        cur = cur.times_simple(i);
    }
    word.reverse();
    word
}

/// Length by both methods; they must agree.
pub fn checked_length(w: &AffinePerm) -> Result<usize, WeylError> {
    let formula = length(w);
    let word = reduced_word(w).len();
    if formula != word {
        return Err(WeylError::LengthMismatch { formula, word });
    }
    Ok(formula)
}

/// Product of simple reflections `s_{i_1} ... s_{i_k}`.
pub fn from_word(n: usize, word: &[usize]) -> AffinePerm {
    word.iter().fold(AffinePerm::identity(n), |w, &i| w.times_simple(i))
}

/// Product of a random word of the given length in the simple reflections.
pub fn random_element<R: Rng>(n: usize, word_len: usize, rng: &mut R) -> AffinePerm {
    let word: Vec<usize> = (0..word_len).map(|_| rng.gen_range(0..n)).collect();
    from_word(n, &word)
}

/// Product of commuting reflections.
pub fn sigma_hat(roots: &[AffineRoot], n: usize) -> Result<AffinePerm, WeylError> {
    let refl: Vec<AffinePerm> = roots.iter().map(|r| reflection(r, n)).collect::<Result<_, _>>()?;
    for a in 0..refl.len() {
        for b in a + 1..refl.len() {
            if refl[a].compose(&refl[b]) != refl[b].compose(&refl[a]) {
                return Err(WeylError::NotStronglyOrthogonal {
                    first: roots[a],
                    second: roots[b],
                });
            }
        }
    }
    Ok(refl.iter().fold(AffinePerm::identity(n), |acc, r| acc.compose(r)))
}

/// `M̂ = (-α_{1l} - δ, -α_{l*1*} - δ)` for `n = 2l`.
pub fn m_hat(l: usize) -> Vec<AffineRoot> {
    let n = 2 * l;
    // -α_{1l} = e_{l+1} - e_1, -α_{l*1*} = e_n - e_l
    vec![AffineRoot::new(l + 1, 1, -1), AffineRoot::new(n, l, -1)]
}

/// `N̂ = (-α_{1(l-1)} - δ, -α_{(l-1)*1*} - δ)` for `n = 2l`.
pub fn n_hat(l: usize) -> Vec<AffineRoot> {
    let n = 2 * l;
    // -α_{1(l-1)} = e_l - e_1, -α_{(l-1)*1*} = e_n - e_{l+1}
    vec![AffineRoot::new(l, 1, -1), AffineRoot::new(n, l + 1, -1)]
}

/// Bruhat order `v <= w`, by the lifting property on a right descent of `w`.
pub fn bruhat_leq(v: &AffinePerm, w: &AffinePerm) -> bool {
    assert_eq!(v.n(), w.n(), "comparing affine permutations of different rank");
    let mut memo = HashMap::new();
    bruhat_rec(v, w, &mut memo)
}

fn bruhat_rec(v: &AffinePerm, w: &AffinePerm, memo: &mut HashMap<(AffinePerm, AffinePerm), bool>) -> bool {
    if let Some(&r) = memo.get(&(v.clone(), w.clone())) {
        return r;
    }
    let result = match w.first_right_descent() {
        None => v.is_identity(),
        Some(_) if length(v) > length(w) => false,
        Some(s) => {
            let ws = w.times_simple(s);
            if v.has_right_descent(s) {
                bruhat_rec(&v.times_simple(s), &ws, memo)
            } else {
                bruhat_rec(v, &ws, memo)
            }
        }
    };
    memo.insert((v.clone(), w.clone()), result);
    result
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GmpReport {
    pub l: usize,
    pub n: usize,
    /// `l >= 4`; smaller `l` are reported for information only.
    pub in_regime: bool,
    pub sigma_m: AffinePerm,
    pub sigma_n: AffinePerm,
    pub length_m: usize,
    pub length_n: usize,
    pub dim_orbit_m: usize,
    pub dim_orbit_n: usize,
    /// `2 dim B.M_γ - |M|` and likewise for `N`.
    pub gmp_m: usize,
    pub gmp_n: usize,
    pub closed_form_m: usize,
    pub closed_form_n: usize,
    pub eq_conjugation: bool,
    pub root_conjugation: bool,
    pub bruhat_n_le_m: bool,
    pub bruhat_m_le_n: bool,
    pub ok: bool,
}

/// Lengths of `σ_M̂`, `σ_N̂` against `2 dim B.X - 2` with the orbit
/// dimensions computed on the Borel side, plus `s_l σ_N̂ s_l = σ_M̂` and the
/// Bruhat comparison.
pub fn gmp_length_check(l: usize) -> Result<GmpReport, WeylError> {
    if l < 2 {
        return Err(WeylError::BadParameters(format!("need l >= 2, got {l}")));
    }
    let n = 2 * l;
    let (mh, nh) = (m_hat(l), n_hat(l));
    let sigma_m = sigma_hat(&mh, n)?;
    let sigma_n = sigma_hat(&nh, n)?;
    let length_m = checked_length(&sigma_m)?;
    let length_n = checked_length(&sigma_n)?;
    let (dim_orbit_m, _) = orbit_dim_a(&build_mgamma(n, l, Epsilon::Plus)?)?;
    let (dim_orbit_n, _) = orbit_dim_a(&build_ngamma(n, l)?)?;
    let gmp_m = 2 * dim_orbit_m - mh.len();
    let gmp_n = 2 * dim_orbit_n - nh.len();
    let s_l = AffinePerm::simple(n, l);
    let eq_conjugation = s_l.compose(&sigma_n).compose(&s_l) == sigma_m;
    let root_conjugation = nh
        .iter()
        .zip(&mh)
        .all(|(a, b)| a.act(&s_l).same_up_to_sign(b));
    let bruhat_n_le_m = bruhat_leq(&sigma_n, &sigma_m);
    let bruhat_m_le_n = bruhat_leq(&sigma_m, &sigma_n);
    let closed_form_m = 12 * (l - 1);
    let closed_form_n = 12 * (l - 1) - 2;
    let ok = length_m == gmp_m
        && length_n == gmp_n
        && length_m == closed_form_m
        && length_n == closed_form_n
        && eq_conjugation
        && root_conjugation
        && bruhat_n_le_m
        && !bruhat_m_le_n;
    Ok(GmpReport {
        l,
        n,
        in_regime: l >= 4,
        sigma_m,
        sigma_n,
        length_m,
        length_n,
        dim_orbit_m,
        dim_orbit_n,
        gmp_m,
        gmp_n,
        closed_form_m,
        closed_form_n,
        eq_conjugation,
        root_conjugation,
        bruhat_n_le_m,
        bruhat_m_le_n,
        ok,
    })
}

/// Simple root `α_i = e_i - e_{i+1}` of `A_{n-1}` as a coordinate vector.
fn simple_root(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i - 1] = 1;
    v[i] = -1;
    v
}

/// `β_1, ..., β_l` for `n = 2l`: `β_i = α_i + α_{n-i}` for `i < l` and
/// `β_l = α_{l-1} + 2α_l + α_{l+1}`.
pub fn beta_basis(l: usize) -> Vec<Vec<i64>> {
    let n = 2 * l;
    let add = |a: &[i64], b: &[i64], c: i64| -> Vec<i64> { a.iter().zip(b).map(|(x, y)| x + c * y).collect() };
    let mut out: Vec<Vec<i64>> = (1..l).map(|i| add(&simple_root(n, i), &simple_root(n, n - i), 1)).collect();
    let last = add(&add(&simple_root(n, l - 1), &simple_root(n, l + 1), 1), &simple_root(n, l), 2);
    out.push(last);
    out
}

/// The Cartan matrix `2(β_i, β_j) / (β_j, β_j)` of the β-basis.
pub fn beta_cartan(l: usize) -> Vec<Vec<i64>> {
    let b = beta_basis(l);
    let dot = |x: &[i64], y: &[i64]| -> i64 { x.iter().zip(y).map(|(a, c)| a * c).sum() };
    (0..l)
        .map(|i| (0..l).map(|j| 2 * dot(&b[i], &b[j]) / dot(&b[j], &b[j])).collect())
        .collect()
}

/// The `D_l` Cartan matrix: a path `1 - ... - (l-1)` with `l` attached to `l-2`.
pub fn cartan_d(l: usize) -> Vec<Vec<i64>> {
    let mut c = vec![vec![0; l]; l];
    for (i, row) in c.iter_mut().enumerate() {
        row[i] = 2;
    }
    let mut bond = |a: usize, b: usize| {
        c[a][b] = -1;
        c[b][a] = -1;
    };
    for i in 0..l.saturating_sub(2) {
        bond(i, i + 1);
    }
    if l >= 3 {
        bond(l - 3, l - 1);
    }
    c
}

pub fn dl_basis_check(l: usize) -> Result<bool, WeylError> {
    if l < 3 {
        return Err(WeylError::BadParameters(format!("the D_l check needs l >= 3, got {l}")));
    }
    Ok(beta_cartan(l) == cartan_d(l))
}
