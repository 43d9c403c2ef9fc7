//! Oriented link patterns and corner-rank profiles.
//!
//! A link pattern on `{1..n}` is a directed partial matching. Its canonical
//! matrix `sum E_{t,s}` over arcs `s -> t` is square-zero, and every
//! 2-nilpotent matrix is `B`-conjugate to exactly one such matrix. Corner ranks
//! `q_{i,j} = rank(A[i..n, 1..j])` are `B`-invariant and separate patterns.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::forms::dual_index;
use crate::linalg::{FFMatrix, QMatrix};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("arc {0}->{1} is a loop")]
    Loop(usize, usize),
    #[error("arc {0}->{1} leaves the vertex range 1..={2}")]
    OutOfRange(usize, usize, usize),
    #[error("vertex {0} is incident to more than one arc")]
    SharedVertex(usize),
    #[error("profile is not the profile of a link pattern: {0}")]
    NotAPatternProfile(String),
    #[error("cannot parse pattern {0:?}")]
    Parse(String),
}

/// Directed partial matching on `{1..n}`; arcs are kept sorted by source.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkPattern {
    n: usize,
    arcs: Vec<(usize, usize)>,
}

impl LinkPattern {
    pub fn new(n: usize, mut arcs: Vec<(usize, usize)>) -> Result<Self, PatternError> {
        let mut seen = vec![false; n + 1];
        for &(s, t) in &arcs {
            if s == t {
                return Err(PatternError::Loop(s, t));
            }
            if s == 0 || t == 0 || s > n || t > n {
                return Err(PatternError::OutOfRange(s, t, n));
            }
            for v in [s, t] {
                if seen[v] {
                    return Err(PatternError::SharedVertex(v));
                }
                seen[v] = true;
            }
        }
        arcs.sort_unstable();
        Ok(LinkPattern { n, arcs })
    }

    pub fn empty(n: usize) -> Self {
        LinkPattern { n, arcs: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    /// Renders the arc list, or `"empty"`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    /// Parses the text format for a given `n`.
    pub fn parse(n: usize, text: &str) -> Result<Self, PatternError> {
        let text = text.trim();
        if text == "empty" {
            return Ok(Self::empty(n));
        }
        let mut arcs = Vec::new();
        for part in text.split(',') {
            let (s, t) = part
                .trim()
                .split_once("->")
                .ok_or_else(|| PatternError::Parse(text.to_owned()))?;
            let s = s.trim().parse().map_err(|_| PatternError::Parse(text.to_owned()))?;
            let t = t.trim().parse().map_err(|_| PatternError::Parse(text.to_owned()))?;
            arcs.push((s, t));
        }
        Self::new(n, arcs)
    }

    pub fn is_delta_symmetric(&self) -> bool {
        delta_on_pattern(self) == *self
    }
}

impl fmt::Display for LinkPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.arcs.is_empty() {
            return f.write_str("empty");
        }
        let parts: Vec<String> = self.arcs.iter().map(|(s, t)| format!("{s}->{t}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses the text format, taking `n` as the largest vertex mentioned.
/// Prefer [`LinkPattern::parse`] when `n` is known.
impl FromStr for LinkPattern {
    type Err = PatternError;
    fn from_str(s: &str) -> Result<Self, PatternError> {
        let probe = LinkPattern::parse(usize::MAX / 2, s)?;
        let n = probe.arcs.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
        Ok(LinkPattern { n, arcs: probe.arcs })
    }
}

impl Serialize for LinkPattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LinkPattern {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All link patterns on `{1..n}`, sorted by arc count and then by arc list.
pub fn enumerate_patterns(n: usize) -> Vec<LinkPattern> {
    fn extend(n: usize, start: usize, used: &mut Vec<bool>, arcs: &mut Vec<(usize, usize)>, out: &mut Vec<LinkPattern>) {
        out.push(LinkPattern::new(n, arcs.clone()).expect("valid by construction"));
        // Each new arc uses its smaller endpoint as the lowest unmatched vertex >= start.
        for a in start..=n {
            if used[a] {
                continue;
            }
            for b in a + 1..=n {
                if used[b] {
                    continue;
                }
                used[a] = true;
                used[b] = true;
                for arc in [(a, b), (b, a)] {
                    arcs.push(arc);
                    extend(n, a + 1, used, arcs, out);
                    arcs.pop();
                }
                used[a] = false;
                used[b] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut used = vec![false; n + 1];
    extend(n, 1, &mut used, &mut Vec::new(), &mut out);
    out.sort_by(|p, q| p.arcs.len().cmp(&q.arcs.len()).then_with(|| p.arcs.cmp(&q.arcs)));
    out
}

/// `sum E_{t,s}` over the arcs `s -> t`.
pub fn pattern_to_matrix(p: &LinkPattern) -> QMatrix {
    let mut m = QMatrix::zeros(p.n, p.n);
    for &(s, t) in &p.arcs {
        m[(t - 1, s - 1)] = num_traits::One::one();
    }
    m
}

/// Arc set `{(t*, s*)}`: the action of `delta` on patterns.
pub fn delta_on_pattern(p: &LinkPattern) -> LinkPattern {
    let arcs = p
        .arcs
        .iter()
        .map(|&(s, t)| (dual_index(p.n, t), dual_index(p.n, s)))
        .collect();
    LinkPattern::new(p.n, arcs).expect("delta preserves matchings")
}

/// Table of corner ranks `q_{i,j}`, `1 <= i, j <= n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RankProfile {
    n: usize,
    q: Vec<u32>,
}

impl RankProfile {
    /// Builds a profile from a row-major `n x n` table indexed by `(i-1, j-1)`.
    pub fn from_table(n: usize, q: Vec<u32>) -> Self {
        assert_eq!(q.len(), n * n);
        RankProfile { n, q }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `q_{i,j}` with 1-based indices; zero outside `1..=n`.
    pub fn get(&self, i: usize, j: usize) -> u32 {
        if i == 0 || j == 0 || i > self.n || j > self.n {
            return 0;
        }
        self.q[(i - 1) * self.n + (j - 1)]
    }

    pub fn table(&self) -> &[u32] {
        &self.q
    }

    /// `true` iff `self.get(i, j) <= other.get(i, j)` everywhere.
    pub fn dominated_by(&self, other: &RankProfile) -> bool {
        self.n == other.n && self.q.iter().zip(&other.q).all(|(a, b)| a <= b)
    }

    /// First position `(i, j)` where `self` exceeds `other`.
    pub fn first_excess(&self, other: &RankProfile) -> Option<(usize, usize)> {
        (1..=self.n)
            .flat_map(|i| (1..=self.n).map(move |j| (i, j)))
            .find(|&(i, j)| self.get(i, j) > other.get(i, j))
    }

    /// Checks monotonicity and the size bound `q_{i,j} <= min(n+1-i, j)`.
    pub fn is_well_formed(&self) -> bool {
        let n = self.n;
        (1..=n).all(|i| {
            (1..=n).all(|j| {
                let v = self.get(i, j) as usize;
                v <= (n + 1 - i).min(j)
                    && (i == 1 || self.get(i - 1, j) >= self.get(i, j))
                    && (j == 1 || self.get(i, j - 1) <= self.get(i, j))
            })
        })
    }
}

/// Corner ranks of a square matrix: rank of rows `i..n` and columns `1..j`.
pub fn corner_ranks(a: &QMatrix) -> RankProfile {
    assert!(a.is_square(), "corner ranks need a square matrix");
    let n = a.rows();
    let mut q = vec![0u32; n * n];
    for i in 1..=n {
        for j in 1..=n {
            q[(i - 1) * n + (j - 1)] = a.submatrix(i - 1..n, 0..j).rank() as u32;
        }
    }
    RankProfile { n, q }
}

/// Corner ranks over a prime field.
pub fn corner_ranks_ff(a: &FFMatrix) -> RankProfile {
    let n = a.rows();
    let mut q = vec![0u32; n * n];
    for i in 1..=n {
        for j in 1..=n {
            q[(i - 1) * n + (j - 1)] = a.submatrix(i - 1..n, 0..j).rank() as u32;
        }
    }
    RankProfile { n, q }
}

/// Corner ranks of a pattern matrix, counted combinatorially.
pub fn pattern_profile(p: &LinkPattern) -> RankProfile {
    let n = p.n;
    let mut q = vec![0u32; n * n];
    for i in 1..=n {
        for j in 1..=n {
            q[(i - 1) * n + (j - 1)] = p.arcs.iter().filter(|&&(s, t)| s <= j && t >= i).count() as u32;
        }
    }
    RankProfile { n, q }
}

/// Recovers the pattern whose profile is `rp` from second mixed differences.
pub fn pattern_from_profile(rp: &RankProfile) -> Result<LinkPattern, PatternError> {
    let n = rp.n;
    let mut arcs = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            let d = i64::from(rp.get(i, j)) - i64::from(rp.get(i, j - 1)) - i64::from(rp.get(i + 1, j))
                + i64::from(rp.get(i + 1, j - 1));
            match d {
                0 => {}
                1 => arcs.push((j, i)),
                _ => {
                    return Err(PatternError::NotAPatternProfile(format!(
                        "mixed difference {d} at ({i}, {j})"
                    )))
                }
            }
        }
    }
    let p = LinkPattern::new(n, arcs).map_err(|e| PatternError::NotAPatternProfile(e.to_string()))?;
    if pattern_profile(&p) != *rp {
        return Err(PatternError::NotAPatternProfile("profile does not round-trip".into()));
    }
    Ok(p)
}

/// `sum_k C(n, 2k) (2k)! / k!`: the number of link patterns on `n` vertices.
pub fn pattern_count(n: usize) -> u64 {
    let mut total = 0u64;
    for k in 0..=n / 2 {
        let binom = (0..2 * k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1));
        let ordered: u64 = (k + 1..=2 * k).map(|v| v as u64).product::<u64>().max(1);
        total += binom * ordered;
    }
    total
}
