//! The Seesaw algebra: a linear quiver `1 -> ... -> l -> ω -> l* -> ... -> 1*`
//! with a loop `γ` at `ω`, relations `γ²` and `a_l* a_l`, and its
//! representations in fixed coordinates.
//!
//! Vertices are indexed `0..=2l` in the order `1, ..., l, ω, l*, ..., 1*`,
//! so the symmetry is `v -> 2l - v`. Arrows are indexed the same way:
//! `a_1, ..., a_l, γ, a_l*, ..., a_1*`, with `a_i` at index `i - 1`.
//!
//! Coordinates follow the embedding into `k^n`: `V_i` has basis
//! `e_1, ..., e_i`, `V_{i*}` has basis `e_{n+1-i}, ..., e_n` and `V_ω = k^n`.
//! In these coordinates `v_k^(i*)` is the `(i - k)`-th basis vector of
//! `V_{i*}` and `v_k^(ω*)` is `e_{n+1-k}`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::Serialize;
use thiserror::Error;

use crate::forms::Epsilon;
use crate::linalg::{LinearSystem, QMatrix, Rational};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SeesawError {
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("representations live over different algebras")]
    AlgebraMismatch,
    #[error("dimension vectors differ: {left:?} vs {right:?}")]
    DimensionVectorMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("representation is not fixed by the twisted dual for ε = {0}")]
    NotSymmetricRep(Epsilon),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeesawAlgebra {
    l: usize,
    n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub source: usize,
    pub target: usize,
}

pub fn build_algebra(l: usize, n: usize) -> Result<SeesawAlgebra, SeesawError> {
    if l == 0 || (n != 2 * l && n != 2 * l + 1) {
        return Err(SeesawError::BadParameters(format!(
            "need l >= 1 and n in {{2l, 2l+1}}, got l = {l}, n = {n}"
        )));
    }
    Ok(SeesawAlgebra { l, n })
}

impl SeesawAlgebra {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_vertices(&self) -> usize {
        2 * self.l + 1
    }

    pub fn num_arrows(&self) -> usize {
        2 * self.l + 1
    }

    pub fn omega(&self) -> usize {
        self.l
    }

    /// Index of the loop `γ`.
    pub fn gamma(&self) -> usize {
        self.l
    }

    /// Index of `a_l`.
    pub fn a_l(&self) -> usize {
        self.l - 1
    }

    /// Index of `a_l*`.
    pub fn a_l_star(&self) -> usize {
        self.l + 1
    }

    pub fn sigma_vertex(&self, v: usize) -> usize {
        2 * self.l - v
    }

    pub fn sigma_arrow(&self, a: usize) -> usize {
        2 * self.l - a
    }

    pub fn vertex_label(&self, v: usize) -> String {
        let l = self.l;
        match v.cmp(&l) {
            std::cmp::Ordering::Less => format!("{}", v + 1),
            std::cmp::Ordering::Equal => "omega".to_string(),
            std::cmp::Ordering::Greater => format!("{}*", 2 * l + 1 - v),
        }
    }

    pub fn arrow(&self, a: usize) -> Arrow {
        let l = self.l;
        let (name, source, target) = match a.cmp(&l) {
            std::cmp::Ordering::Less => (format!("a{}", a + 1), a, a + 1),
            std::cmp::Ordering::Equal => ("gamma".to_string(), l, l),
            std::cmp::Ordering::Greater => (format!("a{}*", 2 * l + 1 - a), a - 1, a),
        };
        Arrow { name, source, target }
    }

    pub fn arrows(&self) -> Vec<Arrow> {
        (0..self.num_arrows()).map(|a| self.arrow(a)).collect()
    }

    /// `(1, 2, ..., l, n, l, ..., 2, 1)`.
    pub fn dimension_vector(&self) -> Vec<usize> {
        (0..self.num_vertices())
            .map(|v| {
                if v == self.l {
                    self.n
                } else {
                    v.min(2 * self.l - v) + 1
                }
            })
            .collect()
    }

    /// Whether the path "first `a`, then `b`" lies in the ideal.
    fn is_relation(&self, a: usize, b: usize) -> bool {
        (a == self.gamma() && b == self.gamma()) || (a == self.a_l() && b == self.a_l_star())
    }
}

/// A representation: one matrix of shape `dims[target] x dims[source]` per arrow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuiverRep {
    algebra: SeesawAlgebra,
    dims: Vec<usize>,
    maps: Vec<QMatrix>,
}

impl QuiverRep {
    pub fn new(algebra: SeesawAlgebra, dims: Vec<usize>, maps: Vec<QMatrix>) -> Result<Self, SeesawError> {
        if dims.len() != algebra.num_vertices() || maps.len() != algebra.num_arrows() {
            return Err(SeesawError::BadParameters("wrong number of vertices or arrows".into()));
        }
        for (a, m) in maps.iter().enumerate() {
            let arrow = algebra.arrow(a);
            if m.rows() != dims[arrow.target] || m.cols() != dims[arrow.source] {
                return Err(SeesawError::BadParameters(format!(
                    "map of {} is {}x{}, expected {}x{}",
                    arrow.name,
                    m.rows(),
                    m.cols(),
                    dims[arrow.target],
                    dims[arrow.source]
                )));
            }
        }
        let rep = QuiverRep { algebra, dims, maps };
        if !rep.satisfies_relations() {
            return Err(SeesawError::BadParameters("relations γ² = 0 and a_l* a_l = 0 fail".into()));
        }
        Ok(rep)
    }

    pub fn zero(algebra: SeesawAlgebra, dims: Vec<usize>) -> Result<Self, SeesawError> {
        let maps = (0..algebra.num_arrows())
            .map(|a| {
                let arrow = algebra.arrow(a);
                QMatrix::zeros(dims.get(arrow.target).copied().unwrap_or(0), dims.get(arrow.source).copied().unwrap_or(0))
            })
            .collect();
        QuiverRep::new(algebra, dims, maps)
    }

    pub fn algebra(&self) -> SeesawAlgebra {
        self.algebra
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn map(&self, arrow: usize) -> &QMatrix {
        &self.maps[arrow]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn satisfies_relations(&self) -> bool {
        let g = &self.maps[self.algebra.gamma()];
        let rel = &self.maps[self.algebra.a_l_star()] * &self.maps[self.algebra.a_l()];
        (g * g).is_zero() && rel.is_zero()
    }

    pub fn direct_sum(&self, other: &QuiverRep) -> Result<QuiverRep, SeesawError> {
        if self.algebra != other.algebra {
            return Err(SeesawError::AlgebraMismatch);
        }
        let dims: Vec<usize> = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        let maps = self
            .maps
            .iter()
            .zip(&other.maps)
            .map(|(x, y)| {
                let mut m = QMatrix::zeros(x.rows() + y.rows(), x.cols() + y.cols());
                for i in 0..x.rows() {
                    for j in 0..x.cols() {
                        m[(i, j)] = x[(i, j)].clone();
                    }
                }
                for i in 0..y.rows() {
                    for j in 0..y.cols() {
                        m[(x.rows() + i, x.cols() + j)] = y[(i, j)].clone();
                    }
                }
                m
            })
            .collect();
        QuiverRep::new(self.algebra, dims, maps)
    }

    /// Name of the `p`-th basis vector at vertex `v` (0-based). Uses the
    /// `v_k^(s)` names when the dimension vector is the standard one.
    pub fn basis_label(&self, v: usize, p: usize) -> String {
        let alg = &self.algebra;
        let (l, n) = (alg.l, alg.n);
        if self.dims != alg.dimension_vector() {
            return format!("{}[{}]", alg.vertex_label(v), p + 1);
        }
        if v == l {
            if p < l {
                format!("v{}(omega)", p + 1)
            } else if p >= n - l {
                format!("v{}(omega*)", n - p)
            } else {
                "v".to_string()
            }
        } else if v < l {
            format!("v{}({})", p + 1, v + 1)
        } else {
            let i = 2 * l + 1 - v;
            format!("v{}({}*)", i - p, i)
        }
    }
}

impl Serialize for QuiverRep {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct ArrowJson<'a> {
            name: String,
            source: String,
            target: String,
            matrix: &'a QMatrix,
        }
        let alg = &self.algebra;
        let vertices: Vec<String> = (0..alg.num_vertices()).map(|v| alg.vertex_label(v)).collect();
        let arrows: Vec<ArrowJson> = (0..alg.num_arrows())
            .map(|a| {
                let arrow = alg.arrow(a);
                ArrowJson {
                    name: arrow.name,
                    source: alg.vertex_label(arrow.source),
                    target: alg.vertex_label(arrow.target),
                    matrix: &self.maps[a],
                }
            })
            .collect();
        let mut s = serializer.serialize_struct("QuiverRep", 5)?;
        s.serialize_field("l", &alg.l)?;
        s.serialize_field("n", &alg.n)?;
        s.serialize_field("vertices", &vertices)?;
        s.serialize_field("dims", &self.dims)?;
        s.serialize_field("arrows", &arrows)?;
        s.end()
    }
}

/// The flag part shared by `M`, `N` and `M⁰`, with the given loop.
fn flag_rep(algebra: SeesawAlgebra, gamma: QMatrix) -> Result<QuiverRep, SeesawError> {
    let (l, n) = (algebra.l, algebra.n);
    let dims = algebra.dimension_vector();
    let mut maps = Vec::with_capacity(algebra.num_arrows());
    for a in 0..algebra.num_arrows() {
        let arrow = algebra.arrow(a);
        let (rows, cols) = (dims[arrow.target], dims[arrow.source]);
        let mut m = QMatrix::zeros(rows, cols);
        if a < l {
            // embedding into the first coordinates
            for k in 0..cols {
                m[(k, k)] = Rational::one();
            }
        } else if a > l {
            // minus the projection onto the last coordinates
            for k in 0..rows {
                m[(k, cols - rows + k)] = -Rational::one();
            }
        } else {
            m = gamma.clone();
        }
        maps.push(m);
    }
    debug_assert_eq!(dims[l], n);
    QuiverRep::new(algebra, dims, maps)
}

/// Index in `V_ω` of `v_k^(ω)` and `v_k^(ω*)` (0-based).
fn omega_index(n: usize, k: usize, dual: bool) -> usize {
    if dual {
        n - k
    } else {
        k - 1
    }
}

fn check_gamma_params(l: usize) -> Result<(), SeesawError> {
    if l < 2 {
        return Err(SeesawError::BadParameters(format!("M and N need l >= 2, got {l}")));
    }
    Ok(())
}

/// `M`: `v_1^(ω) -> v_l^(ω*)`, `v_l^(ω) -> -ε v_1^(ω*)`.
pub fn build_m(l: usize, n: usize, epsilon: Epsilon) -> Result<QuiverRep, SeesawError> {
    let algebra = build_algebra(l, n)?;
    check_gamma_params(l)?;
    if epsilon == Epsilon::Minus && n % 2 == 1 {
        return Err(SeesawError::BadParameters(format!("ε = -1 needs an even n, got {n}")));
    }
    let mut g = QMatrix::zeros(n, n);
    g[(omega_index(n, l, true), omega_index(n, 1, false))] = Rational::one();
    g[(omega_index(n, 1, true), omega_index(n, l, false))] = -epsilon.as_rational();
    flag_rep(algebra, g)
}

/// `N`: `v_1^(ω) -> v_l^(ω)`, `v_l^(ω*) -> -v_1^(ω*)`.
pub fn build_n(l: usize, n: usize) -> Result<QuiverRep, SeesawError> {
    let algebra = build_algebra(l, n)?;
    check_gamma_params(l)?;
    let mut g = QMatrix::zeros(n, n);
    g[(omega_index(n, l, false), omega_index(n, 1, false))] = Rational::one();
    g[(omega_index(n, 1, true), omega_index(n, l, true))] = -Rational::one();
    flag_rep(algebra, g)
}

/// The flag representation with `γ = 0`.
pub fn build_m0(l: usize, n: usize) -> Result<QuiverRep, SeesawError> {
    let algebra = build_algebra(l, n)?;
    flag_rep(algebra, QMatrix::zeros(n, n))
}

/// The same flag representation with an arbitrary loop matrix on `V_ω`.
pub fn with_gamma(l: usize, n: usize, gamma: &QMatrix) -> Result<QuiverRep, SeesawError> {
    let algebra = build_algebra(l, n)?;
    if gamma.rows() != n || gamma.cols() != n {
        return Err(SeesawError::BadParameters(format!("γ must be {n}x{n}")));
    }
    flag_rep(algebra, gamma.clone())
}

/// Gram block `G_v` with `<x, y> = x^T G_v y` for `x ∈ V_v`, `y ∈ V_{σ(v)}`,
/// for the standard dimension vector.
pub fn graded_form_block(algebra: &SeesawAlgebra, v: usize, epsilon: Epsilon) -> Result<QMatrix, SeesawError> {
    let (l, n) = (algebra.l, algebra.n);
    if epsilon == Epsilon::Minus && n % 2 == 1 {
        return Err(SeesawError::BadParameters(format!("ε = -1 needs an even n, got {n}")));
    }
    let eps = epsilon.as_rational();
    if v == l {
        let mut g = QMatrix::zeros(n, n);
        for k in 1..=l {
            g[(omega_index(n, k, false), omega_index(n, k, true))] = Rational::one();
            g[(omega_index(n, k, true), omega_index(n, k, false))] = eps.clone();
        }
        if n % 2 == 1 {
            g[(l, l)] = Rational::one();
        }
        return Ok(g);
    }
    // <v_k^(i), v_k^(i*)> = 1; v_k^(i) is position k-1, v_k^(i*) is position i-k
    let i = v.min(2 * l - v) + 1;
    let value = if v < l { Rational::one() } else { eps };
    let mut g = QMatrix::zeros(i, i);
    for p in 0..i {
        g[(p, i - 1 - p)] = value.clone();
    }
    Ok(g)
}

/// The twisted dual: `(∇x)_{σ(α)} = -G_s^{-1} x_α^T G_t` for `α: s -> t`.
pub fn nabla(x: &QuiverRep, epsilon: Epsilon) -> Result<QuiverRep, SeesawError> {
    let alg = x.algebra;
    require_standard_dims(x)?;
    let blocks: Vec<QMatrix> = (0..alg.num_vertices())
        .map(|v| graded_form_block(&alg, v, epsilon))
        .collect::<Result<_, _>>()?;
    let mut maps = vec![QMatrix::zeros(0, 0); alg.num_arrows()];
    for a in 0..alg.num_arrows() {
        let arrow = alg.arrow(a);
        let gs_inv = blocks[arrow.source].inverse().expect("form blocks are invertible");
        let m = &(&gs_inv * &x.maps[a].transpose()) * &blocks[arrow.target];
        maps[alg.sigma_arrow(a)] = -&m;
    }
    QuiverRep::new(alg, x.dims.clone(), maps)
}

/// Whether `∇x = x`.
pub fn is_symmetric(x: &QuiverRep, epsilon: Epsilon) -> Result<bool, SeesawError> {
    Ok(nabla(x, epsilon)? == *x)
}

fn require_standard_dims(x: &QuiverRep) -> Result<(), SeesawError> {
    let expected = x.algebra.dimension_vector();
    if x.dims != expected {
        return Err(SeesawError::DimensionVectorMismatch {
            left: x.dims.clone(),
            right: expected,
        });
    }
    Ok(())
}

/// Unknowns for a graded map `x -> y`: one `dims_y[v] x dims_x[v]` block per vertex.
fn graded_unknowns(system: &mut LinearSystem, rows: &[usize], cols: &[usize]) -> Vec<Vec<usize>> {
    rows.iter()
        .zip(cols)
        .enumerate()
        .map(|(v, (&r, &c))| {
            (0..r * c)
                .map(|k| system.unknown(format!("f{v}[{},{}]", k / c, k % c)))
                .collect()
        })
        .collect()
}

/// Adds `f_t x_α - y_α f_s = 0` for every arrow.
fn add_intertwining(system: &mut LinearSystem, f: &[Vec<usize>], x: &QuiverRep, y: &QuiverRep) {
    let alg = x.algebra;
    for a in 0..alg.num_arrows() {
        let arrow = alg.arrow(a);
        let (s, t) = (arrow.source, arrow.target);
        let (xa, ya) = (&x.maps[a], &y.maps[a]);
        let (dxs, dxt, dys) = (x.dims[s], x.dims[t], y.dims[s]);
        for r in 0..y.dims[t] {
            for c in 0..dxs {
                let mut terms = Vec::new();
                for k in 0..dxt {
                    let coeff = &xa[(k, c)];
                    if !coeff.is_zero() {
                        terms.push((f[t][r * dxt + k], coeff.clone()));
                    }
                }
                for k in 0..dys {
                    let coeff = &ya[(r, k)];
                    if !coeff.is_zero() {
                        terms.push((f[s][k * dxs + c], -coeff.clone()));
                    }
                }
                system.equation(terms);
            }
        }
    }
}

/// `dim Hom(x, y)`, as the solution space of the intertwiner equations.
pub fn hom_dim(x: &QuiverRep, y: &QuiverRep) -> Result<usize, SeesawError> {
    if x.algebra != y.algebra {
        return Err(SeesawError::AlgebraMismatch);
    }
    let mut system = LinearSystem::new();
    let f = graded_unknowns(&mut system, &y.dims, &x.dims);
    add_intertwining(&mut system, &f, x, y);
    Ok(system.solution_space_dim())
}

/// Adds `f_v^T G_v + G_v f_{σ(v)} = 0` for every vertex.
fn add_isometry(system: &mut LinearSystem, f: &[Vec<usize>], alg: &SeesawAlgebra, epsilon: Epsilon) -> Result<(), SeesawError> {
    let dims = alg.dimension_vector();
    for v in 0..alg.num_vertices() {
        let g = graded_form_block(alg, v, epsilon)?;
        let sv = alg.sigma_vertex(v);
        let (dv, dsv) = (dims[v], dims[sv]);
        for r in 0..dv {
            for c in 0..dsv {
                let mut terms = Vec::new();
                // (f_v^T G)_{rc} = sum_k f_v[k][r] G[k][c]
                for k in 0..dv {
                    if !g[(k, c)].is_zero() {
                        terms.push((f[v][k * dv + r], g[(k, c)].clone()));
                    }
                }
                // (G f_{σv})_{rc} = sum_k G[r][k] f_{σv}[k][c]
                for k in 0..dsv {
                    if !g[(r, k)].is_zero() {
                        terms.push((f[sv][k * dsv + c], g[(r, k)].clone()));
                    }
                }
                system.equation(terms);
            }
        }
    }
    Ok(())
}

/// Dimension of the Lie algebra of graded isometries of `V`.
pub fn graded_isometry_dim(l: usize, n: usize, epsilon: Epsilon) -> Result<usize, SeesawError> {
    let alg = build_algebra(l, n)?;
    let dims = alg.dimension_vector();
    let mut system = LinearSystem::new();
    let f = graded_unknowns(&mut system, &dims, &dims);
    add_isometry(&mut system, &f, &alg, epsilon)?;
    Ok(system.solution_space_dim())
}

/// Dimension of the stabilizer of `x` in the graded isometry group, as the
/// dimension of its Lie algebra.
pub fn symmetric_stab_dim(x: &QuiverRep, epsilon: Epsilon) -> Result<usize, SeesawError> {
    if !is_symmetric(x, epsilon)? {
        return Err(SeesawError::NotSymmetricRep(epsilon));
    }
    let mut system = LinearSystem::new();
    let f = graded_unknowns(&mut system, &x.dims, &x.dims);
    add_isometry(&mut system, &f, &x.algebra, epsilon)?;
    add_intertwining(&mut system, &f, x, x);
    Ok(system.solution_space_dim())
}

/// A letter of a walk: an arrow traversed forwards or backwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub arrow: usize,
    pub inverse: bool,
}

impl Letter {
    fn inverted(self) -> Letter {
        Letter { arrow: self.arrow, inverse: !self.inverse }
    }
}

/// A string: a walk starting at `start` that never backtracks and avoids the
/// relations in either direction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StringModule {
    algebra_l: usize,
    algebra_n: usize,
    start: usize,
    letters: Vec<Letter>,
}

impl StringModule {
    fn algebra(&self) -> SeesawAlgebra {
        SeesawAlgebra { l: self.algebra_l, n: self.algebra_n }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// The vertices visited, `len() + 1` of them.
    pub fn vertices(&self) -> Vec<usize> {
        let alg = self.algebra();
        let mut out = vec![self.start];
        for letter in &self.letters {
            let arrow = alg.arrow(letter.arrow);
            out.push(if letter.inverse { arrow.source } else { arrow.target });
        }
        out
    }

    pub fn inverse(&self) -> StringModule {
        let end = *self.vertices().last().expect("nonempty");
        StringModule {
            start: end,
            letters: self.letters.iter().rev().map(|l| l.inverted()).collect(),
            ..self.clone()
        }
    }

    fn canonical(self) -> StringModule {
        let inv = self.inverse();
        if (&inv.letters, inv.start) < (&self.letters, self.start) {
            inv
        } else {
            self
        }
    }

    pub fn dimension_vector(&self) -> Vec<usize> {
        let mut dims = vec![0; self.algebra().num_vertices()];
        for v in self.vertices() {
            dims[v] += 1;
        }
        dims
    }

    /// The string module: one basis vector per visited vertex, each letter
    /// acting by `1` between neighbouring vectors.
    pub fn to_rep(&self) -> QuiverRep {
        let alg = self.algebra();
        let verts = self.vertices();
        let dims = self.dimension_vector();
        // position of each walk node inside its vertex space
        let mut seen = vec![0; alg.num_vertices()];
        let pos: Vec<usize> = verts
            .iter()
            .map(|&v| {
                seen[v] += 1;
                seen[v] - 1
            })
            .collect();
        let mut maps: Vec<QMatrix> = (0..alg.num_arrows())
            .map(|a| {
                let arrow = alg.arrow(a);
                QMatrix::zeros(dims[arrow.target], dims[arrow.source])
            })
            .collect();
        for (k, letter) in self.letters.iter().enumerate() {
            let (from, to) = if letter.inverse { (k + 1, k) } else { (k, k + 1) };
            maps[letter.arrow][(pos[to], pos[from])] = Rational::one();
        }
        QuiverRep::new(alg, dims, maps).expect("strings avoid the relations")
    }

    pub fn word(&self) -> String {
        let alg = self.algebra();
        if self.letters.is_empty() {
            return format!("e_{}", alg.vertex_label(self.start));
        }
        self.letters
            .iter()
            .map(|l| {
                let name = alg.arrow(l.arrow).name;
                if l.inverse {
                    format!("{name}^-1")
                } else {
                    name
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for StringModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.word())
    }
}

/// Letters that may follow a walk ending at `v` with last letter `last`.
fn next_letters(alg: &SeesawAlgebra, v: usize, last: Option<Letter>) -> Vec<Letter> {
    let mut out = Vec::new();
    for a in 0..alg.num_arrows() {
        let arrow = alg.arrow(a);
        for inverse in [false, true] {
            let from = if inverse { arrow.target } else { arrow.source };
            if from != v {
                continue;
            }
            let letter = Letter { arrow: a, inverse };
            if let Some(p) = last {
                if letter == p.inverted() {
                    continue;
                }
                if !p.inverse && !inverse && alg.is_relation(p.arrow, a) {
                    continue;
                }
                if p.inverse && inverse && alg.is_relation(a, p.arrow) {
                    continue;
                }
            }
            out.push(letter);
        }
    }
    out
}

/// Every string up to inversion, ordered by length and then by word.
pub fn enumerate_strings(algebra: &SeesawAlgebra) -> Vec<StringModule> {
    let mut found = BTreeSet::new();
    let mut queue: VecDeque<StringModule> = (0..algebra.num_vertices())
        .map(|v| StringModule {
            algebra_l: algebra.l,
            algebra_n: algebra.n,
            start: v,
            letters: Vec::new(),
        })
        .collect();
    // Walks cannot revisit γ in one direction, so their length is bounded
    // by a few passes along the arms; the cap only guards against bugs.
    let cap = 4 * algebra.num_vertices() + 4;
    while let Some(s) = queue.pop_front() {
        assert!(s.len() <= cap, "string enumeration did not terminate");
        let end = *s.vertices().last().expect("nonempty");
        for letter in next_letters(algebra, end, s.letters.last().copied()) {
            let mut next = s.clone();
            next.letters.push(letter);
            queue.push_back(next);
        }
        found.insert(s.canonical());
    }
    let mut out: Vec<StringModule> = found.into_iter().collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// First string `E` with `[x, E] > [y, E]`, with both dimensions.
pub fn hom_order_violation(
    x: &QuiverRep,
    y: &QuiverRep,
    strings: &[StringModule],
) -> Result<Option<(StringModule, usize, usize)>, SeesawError> {
    if x.algebra != y.algebra {
        return Err(SeesawError::AlgebraMismatch);
    }
    if x.dims != y.dims {
        return Err(SeesawError::DimensionVectorMismatch {
            left: x.dims.clone(),
            right: y.dims.clone(),
        });
    }
    let dims: Vec<(usize, usize)> = strings
        .par_iter()
        .map(|s| {
            let e = s.to_rep();
            Ok((hom_dim(x, &e)?, hom_dim(y, &e)?))
        })
        .collect::<Result<_, SeesawError>>()?;
    Ok(strings
        .iter()
        .zip(dims)
        .find(|(_, (a, b))| a > b)
        .map(|(s, (a, b))| (s.clone(), a, b)))
}

/// `x ≤_Hom y`: `[x, E] ≤ [y, E]` for every string module `E`.
pub fn hom_order_leq(x: &QuiverRep, y: &QuiverRep) -> Result<bool, SeesawError> {
    let strings = enumerate_strings(&x.algebra);
    Ok(hom_order_violation(x, y, &strings)?.is_none())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoefficientEdge {
    pub from: String,
    pub to: String,
    pub arrow: String,
    #[serde(serialize_with = "serialize_rational")]
    pub coefficient: Rational,
}

fn serialize_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Basis vectors as nodes, one edge per nonzero matrix coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoefficientQuiver {
    pub nodes: Vec<String>,
    pub edges: Vec<CoefficientEdge>,
}

pub fn coefficient_quiver(x: &QuiverRep) -> CoefficientQuiver {
    let alg = x.algebra;
    let mut nodes = Vec::new();
    for v in 0..alg.num_vertices() {
        for p in 0..x.dims[v] {
            nodes.push(x.basis_label(v, p));
        }
    }
    let mut edges = Vec::new();
    for a in 0..alg.num_arrows() {
        let arrow = alg.arrow(a);
        let m = &x.maps[a];
        for c in 0..m.cols() {
            for r in 0..m.rows() {
                if !m[(r, c)].is_zero() {
                    edges.push(CoefficientEdge {
                        from: x.basis_label(arrow.source, c),
                        to: x.basis_label(arrow.target, r),
                        arrow: arrow.name.clone(),
                        coefficient: m[(r, c)].clone(),
                    });
                }
            }
        }
    }
    CoefficientQuiver { nodes, edges }
}

impl CoefficientQuiver {
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph \"{name}\" {{\n  rankdir=LR;\n");
        for node in &self.nodes {
            out.push_str(&format!("  \"{node}\";\n"));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{} {}\"];\n",
                e.from, e.to, e.arrow, e.coefficient
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// The loop matrix on `V_ω`, i.e. the Borel-side matrix of `x`.
pub fn gamma_matrix(x: &QuiverRep) -> &QMatrix {
    &x.maps[x.algebra.gamma()]
}

/// `Σ_{i=1}^{l} i²`, the dimension of the graded pieces paired with their duals.
pub fn arm_square_sum(l: usize) -> usize {
    (1..=l).map(|i| i * i).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;
    use crate::forms::{dim_g_eps, gram_matrix};
    use crate::orbits::{build_mgamma, build_ngamma, dim_b, orbit_dim_a, orbit_dim_eps};
    use proptest::prelude::*;

    const E: [Epsilon; 2] = [Epsilon::Plus, Epsilon::Minus];

    #[test]
    fn algebra_shapes() {
        let a = build_algebra(2, 4).unwrap();
        assert_eq!(a.num_vertices(), 5);
        assert_eq!(a.num_arrows(), 5);
        assert_eq!(a.dimension_vector(), vec![1, 2, 4, 2, 1]);
        assert_eq!(build_algebra(2, 5).unwrap().dimension_vector(), vec![1, 2, 5, 2, 1]);
        let small = build_algebra(1, 2).unwrap();
        assert_eq!(small.num_vertices(), 3);
        assert_eq!(small.dimension_vector(), vec![1, 2, 1]);
        assert!(build_algebra(2, 6).is_err());
        assert!(build_algebra(0, 0).is_err());
        let names: Vec<String> = a.arrows().into_iter().map(|x| x.name).collect();
        assert_eq!(names, ["a1", "a2", "gamma", "a2*", "a1*"]);
        for k in 0..a.num_arrows() {
            let arrow = a.arrow(k);
            let dual = a.arrow(a.sigma_arrow(k));
            assert_eq!(dual.source, a.sigma_vertex(arrow.target));
            assert_eq!(dual.target, a.sigma_vertex(arrow.source));
        }
    }

    #[test]
    fn gamma_matches_borel_side() {
        let m = build_m(2, 4, Epsilon::Plus).unwrap();
        let expected = QMatrix::from_i64_rows(&[
            vec![0, 0, 0, 0],
            vec![0, 0, 0, 0],
            vec![1, 0, 0, 0],
            vec![0, -1, 0, 0],
        ]);
        assert_eq!(gamma_matrix(&m), &expected);
        for l in 2..=4 {
            for n in [2 * l, 2 * l + 1] {
                for eps in E {
                    if eps == Epsilon::Minus && n % 2 == 1 {
                        assert!(build_m(l, n, eps).is_err());
                        continue;
                    }
                    let m = build_m(l, n, eps).unwrap();
                    assert_eq!(gamma_matrix(&m), &build_mgamma(n, l, eps).unwrap());
                }
                assert_eq!(gamma_matrix(&build_n(l, n).unwrap()), &build_ngamma(n, l).unwrap());
            }
        }
    }

    #[test]
    fn relations_hold() {
        for l in 1..=4 {
            for n in [2 * l, 2 * l + 1] {
                assert!(build_m0(l, n).unwrap().satisfies_relations());
                assert!(gamma_matrix(&build_m0(l, n).unwrap()).is_zero());
                if l >= 2 {
                    assert!(build_n(l, n).unwrap().satisfies_relations());
                    assert!(build_m(l, n, Epsilon::Plus).unwrap().satisfies_relations());
                }
            }
        }
    }

    #[test]
    fn omega_block_is_canonical_form() {
        for n in 2..=7 {
            let l = n / 2;
            let alg = build_algebra(l, n).unwrap();
            for eps in E {
                if eps == Epsilon::Minus && n % 2 == 1 {
                    continue;
                }
                let block = graded_form_block(&alg, l, eps).unwrap();
                assert_eq!(&block, gram_matrix(n, eps).unwrap().gram());
            }
        }
    }

    #[test]
    fn m_n_m0_are_symmetric() {
        for l in 2..=4 {
            for n in [2 * l, 2 * l + 1] {
                for eps in E {
                    if eps == Epsilon::Minus && n % 2 == 1 {
                        continue;
                    }
                    assert!(is_symmetric(&build_m(l, n, eps).unwrap(), eps).unwrap());
                    assert!(is_symmetric(&build_n(l, n).unwrap(), eps).unwrap());
                    assert!(is_symmetric(&build_m0(l, n).unwrap(), eps).unwrap());
                    let x = build_m(l, n, eps).unwrap();
                    assert_eq!(nabla(&nabla(&x, eps).unwrap(), eps).unwrap(), x);
                }
            }
        }
        // M built for the wrong sign is not symmetric
        let m = build_m(2, 4, Epsilon::Plus).unwrap();
        assert!(!is_symmetric(&m, Epsilon::Minus).unwrap());
        assert_eq!(symmetric_stab_dim(&m, Epsilon::Minus), Err(SeesawError::NotSymmetricRep(Epsilon::Minus)));
    }

    #[test]
    fn endomorphism_dims_at_l2() {
        let m = build_m(2, 4, Epsilon::Plus).unwrap();
        let n = build_n(2, 4).unwrap();
        let m0 = build_m0(2, 4).unwrap();
        assert_eq!(hom_dim(&m, &m).unwrap(), 3);
        assert_eq!(hom_dim(&n, &n).unwrap(), 4);
        assert_eq!(hom_dim(&m0, &m0).unwrap(), dim_b(4));
        assert_eq!(hom_dim(&m0, &m0).unwrap(), 10);
    }

    #[test]
    fn endomorphisms_match_borel_stabilizers() {
        for l in 2..=3 {
            for n in [2 * l, 2 * l + 1] {
                let m = build_m(l, n, Epsilon::Plus).unwrap();
                let (_, stab) = orbit_dim_a(gamma_matrix(&m)).unwrap();
                assert_eq!(hom_dim(&m, &m).unwrap(), stab);
                let nn = build_n(l, n).unwrap();
                let (_, stab) = orbit_dim_a(gamma_matrix(&nn)).unwrap();
                assert_eq!(hom_dim(&nn, &nn).unwrap(), stab);
            }
        }
    }

    #[test]
    fn isometry_dims() {
        assert_eq!(graded_isometry_dim(2, 4, Epsilon::Plus).unwrap(), 11);
        for l in 1..=4 {
            for n in [2 * l, 2 * l + 1] {
                for eps in E {
                    if eps == Epsilon::Minus && n % 2 == 1 {
                        continue;
                    }
                    assert_eq!(
                        graded_isometry_dim(l, n, eps).unwrap(),
                        arm_square_sum(l) + dim_g_eps(n, eps)
                    );
                }
            }
        }
    }

    #[test]
    fn symmetric_stabilizers_match_borel_side() {
        assert_eq!(symmetric_stab_dim(&build_m(2, 4, Epsilon::Plus).unwrap(), Epsilon::Plus).unwrap(), 2);
        assert_eq!(symmetric_stab_dim(&build_m(2, 4, Epsilon::Minus).unwrap(), Epsilon::Minus).unwrap(), 1);
        for l in 2..=3 {
            for n in [2 * l, 2 * l + 1] {
                for eps in E {
                    if eps == Epsilon::Minus && n % 2 == 1 {
                        continue;
                    }
                    let form = gram_matrix(n, eps).unwrap();
                    for x in [build_m(l, n, eps).unwrap(), build_n(l, n).unwrap()] {
                        let (_, stab) = orbit_dim_eps(gamma_matrix(&x), &form).unwrap();
                        assert_eq!(symmetric_stab_dim(&x, eps).unwrap(), stab);
                    }
                }
            }
        }
    }

    #[test]
    fn strings_are_well_formed() {
        for (l, n) in [(1, 2), (1, 3), (2, 4), (2, 5), (3, 6)] {
            let alg = build_algebra(l, n).unwrap();
            let strings = enumerate_strings(&alg);
            let simples: Vec<_> = strings.iter().filter(|s| s.is_empty()).collect();
            assert_eq!(simples.len(), alg.num_vertices());
            let mut keys = BTreeSet::new();
            for s in &strings {
                assert!(s.to_rep().satisfies_relations());
                assert!(keys.insert(s.clone()));
                assert!(!keys.contains(&s.inverse()) || s.inverse() == *s);
                // indecomposable: the endomorphism ring of a string module is local,
                // so in particular the only idempotents are trivial; at least check End ≠ 0
                assert!(hom_dim(&s.to_rep(), &s.to_rep()).unwrap() >= 1);
            }
            assert_eq!(enumerate_strings(&alg), strings);
        }
    }

    #[test]
    fn strings_at_l1_by_hand() {
        // quiver 1 -> ω -> 1* with loop γ; relations γγ and a1* a1
        let alg = build_algebra(1, 2).unwrap();
        let words: Vec<String> = enumerate_strings(&alg).iter().map(|s| s.word()).collect();
        for w in ["e_1", "e_omega", "e_1*", "a1", "gamma", "a1*", "a1 gamma", "gamma a1*", "a1 gamma a1*"] {
            assert!(words.contains(&w.to_string()), "{w} missing from {words:?}");
        }
        assert!(!words.iter().any(|w| w == "a1 a1*"));
        assert!(!words.iter().any(|w| w.contains("gamma gamma")));
    }

    #[test]
    fn hom_order_at_l2() {
        let m = build_m(2, 4, Epsilon::Plus).unwrap();
        let n = build_n(2, 4).unwrap();
        assert!(hom_order_leq(&m, &m).unwrap());
        assert!(hom_order_leq(&m, &n).unwrap());
        assert!(!hom_order_leq(&n, &m).unwrap());
        let m0 = build_m0(2, 5).unwrap();
        assert!(matches!(hom_order_leq(&m, &m0), Err(SeesawError::AlgebraMismatch)));
    }

    #[test]
    fn coefficient_quivers() {
        let m = build_m(2, 4, Epsilon::Plus).unwrap();
        let q = coefficient_quiver(&m);
        assert_eq!(q.nodes.len(), 10);
        let flag: Vec<&CoefficientEdge> = q.edges.iter().filter(|e| e.arrow != "gamma").collect();
        assert_eq!(flag.len(), 6);
        assert_eq!(flag.iter().filter(|e| e.coefficient == rat(1)).count(), 3);
        assert_eq!(flag.iter().filter(|e| e.coefficient == rat(-1)).count(), 3);
        let has = |from: &str, to: &str, c: i64| {
            q.edges.iter().any(|e| e.from == from && e.to == to && e.coefficient == rat(c))
        };
        assert!(has("v1(1)", "v1(2)", 1));
        assert!(has("v2(2)", "v2(omega)", 1));
        assert!(has("v2(omega*)", "v2(2*)", -1));
        assert!(has("v1(2*)", "v1(1*)", -1));
        assert!(has("v1(omega)", "v2(omega*)", 1));
        assert!(has("v2(omega)", "v1(omega*)", -1));

        let qn = coefficient_quiver(&build_n(2, 4).unwrap());
        let gamma: Vec<(&str, &str)> = qn
            .edges
            .iter()
            .filter(|e| e.arrow == "gamma")
            .map(|e| (e.from.as_str(), e.to.as_str()))
            .collect();
        assert_eq!(gamma, [("v1(omega)", "v2(omega)"), ("v2(omega*)", "v1(omega*)")]);

        let zero = QuiverRep::zero(m.algebra(), m.dims().to_vec()).unwrap();
        assert!(coefficient_quiver(&zero).edges.is_empty());
        assert!(q.to_dot("M").starts_with("digraph \"M\" {"));
    }

    #[test]
    fn json_shape() {
        let m = build_m(2, 4, Epsilon::Minus).unwrap();
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["dims"], serde_json::json!([1, 2, 4, 2, 1]));
        assert_eq!(v["arrows"][2]["name"], "gamma");
        assert_eq!(v["arrows"][2]["matrix"][3][1], 1);
        assert_eq!(v["arrows"][0]["matrix"], serde_json::json!([[1], [0]]));
    }

    fn random_rep(alg: SeesawAlgebra, dims: Vec<usize>, entries: &[i64]) -> QuiverRep {
        // random flag maps, γ and the relation arrows set to zero
        let mut it = entries.iter().cycle();
        let maps = (0..alg.num_arrows())
            .map(|a| {
                let arrow = alg.arrow(a);
                let mut m = QMatrix::zeros(dims[arrow.target], dims[arrow.source]);
                if a != alg.gamma() && a != alg.a_l_star() {
                    for r in 0..m.rows() {
                        for c in 0..m.cols() {
                            m[(r, c)] = rat(*it.next().unwrap());
                        }
                    }
                }
                m
            })
            .collect();
        QuiverRep::new(alg, dims, maps).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn hom_dim_is_additive(d in prop::collection::vec(0usize..3, 9), e in prop::collection::vec(-1i64..=1, 24)) {
            let alg = build_algebra(1, 2).unwrap();
            let x = random_rep(alg, d[0..3].to_vec(), &e);
            let y = random_rep(alg, d[3..6].to_vec(), &e[5..]);
            let z = random_rep(alg, d[6..9].to_vec(), &e[11..]);
            let xy = x.direct_sum(&y).unwrap();
            prop_assert_eq!(hom_dim(&xy, &z).unwrap(), hom_dim(&x, &z).unwrap() + hom_dim(&y, &z).unwrap());
            prop_assert_eq!(hom_dim(&z, &xy).unwrap(), hom_dim(&z, &x).unwrap() + hom_dim(&z, &y).unwrap());
        }
    }
}
