//! Exact linear algebra over the rationals and over small prime fields.
//!
//! Everything in the main computation path goes through [`QMatrix`], whose
//! entries are arbitrary-precision rationals. Elimination always pivots on the
//! first nonzero entry in column order, so results (including nullspace bases)
//! are deterministic.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Shorthand for an integral [`Rational`].
pub fn rat(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Shorthand for the rational `num / den`.
pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("entry ({row}, {col}) has a denominator divisible by {modulus}")]
    DenominatorNotInvertible {
        row: usize,
        col: usize,
        modulus: u32,
    },
    #[error("{0} is not a prime modulus")]
    NotPrime(u32),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Dense matrix of exact rationals, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds a matrix from a row-major entry vector.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(QMatrix { rows, cols, entries })
    }

    /// Builds a matrix from integer rows. Panics on ragged input.
    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged integer rows");
            entries.extend(row.iter().map(|&v| rat(v)));
        }
        QMatrix { rows: r, cols: c, entries }
    }

    /// The matrix unit `E_{i,j}` of size `n`, with 1-based indices.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i - 1, j - 1)] = Rational::one();
        m
    }

    /// Diagonal matrix with the given entries.
    pub fn diagonal(diag: &[Rational]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = d.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols.min(i)).all(|j| self[(i, j)].is_zero()))
    }

    pub fn is_strictly_upper(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols.min(i + 1)).all(|j| self[(i, j)].is_zero()))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn scale(&self, c: &Rational) -> Self {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e * c).collect(),
        }
    }

    /// Submatrix on the half-open row and column ranges (0-based).
    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let mut s = Self::zeros(rows.len(), cols.len());
        for (si, i) in rows.clone().enumerate() {
            for (sj, j) in cols.clone().enumerate() {
                s[(si, sj)] = self[(i, j)].clone();
            }
        }
        s
    }

    /// `self * rhs - rhs * self`.
    pub fn commutator(&self, rhs: &QMatrix) -> QMatrix {
        &(self * rhs) - &(rhs * self)
    }

    pub fn pow(&self, k: u32) -> QMatrix {
        let mut acc = Self::identity(self.rows);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut prow = 0;
        for col in 0..a.cols {
            if prow == a.rows {
                break;
            }
            let Some(found) = (prow..a.rows).find(|&r| !a[(r, col)].is_zero()) else {
                continue;
            };
            a.swap_rows(found, prow);
            let inv = a[(prow, col)].recip();
            for j in col..a.cols {
                let v = &a[(prow, j)] * &inv;
                a[(prow, j)] = v;
            }
            for r in 0..a.rows {
                if r == prow || a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone();
                for j in col..a.cols {
                    let v = &a[(r, j)] - &factor * &a[(prow, j)];
                    a[(r, j)] = v;
                }
            }
            pivots.push(col);
            prow += 1;
        }
        (a, pivots)
    }

    /// Forward elimination only; cheaper than [`QMatrix::rref`] when only the rank is needed.
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut prow = 0;
        for col in 0..a.cols {
            if prow == a.rows {
                break;
            }
            let Some(found) = (prow..a.rows).find(|&r| !a[(r, col)].is_zero()) else {
                continue;
            };
            a.swap_rows(found, prow);
            for r in prow + 1..a.rows {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let factor = &a[(r, col)] / &a[(prow, col)];
                for j in col..a.cols {
                    let v = &a[(r, j)] - &factor * &a[(prow, j)];
                    a[(r, j)] = v;
                }
            }
            prow += 1;
        }
        prow
    }

    /// Basis of the right kernel `{v : self * v = 0}`, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![Rational::zero(); self.cols];
            v[free] = Rational::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -r[(row, free)].clone();
            }
            basis.push(v);
        }
        basis
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rational::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(r.submatrix(0..n, n..2 * n))
    }

    /// Integer entries, if every entry is integral and fits in `i64`.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.entries
            .iter()
            .map(|e| if e.is_integer() { e.to_integer().to_i64() } else { None })
            .collect()
    }

    /// Rescales by a positive rational so that the entries become coprime integers.
    /// The zero matrix is returned unchanged.
    pub fn primitive(&self) -> QMatrix {
        if self.is_zero() {
            return self.clone();
        }
        let mut lcm = BigInt::one();
        for e in &self.entries {
            lcm = lcm.lcm(e.denom());
        }
        let ints: Vec<BigInt> = self.entries.iter().map(|e| (e * &lcm).to_integer()).collect();
        let mut g = BigInt::zero();
        for v in &ints {
            g = g.gcd(v);
        }
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: ints.into_iter().map(|v| Rational::from_integer(v / &g)).collect(),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.entries[i * self.cols + j]
    }
}

impl Mul for &QMatrix {
    type Output = QMatrix;
    fn mul(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = QMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl Add for &QMatrix {
    type Output = QMatrix;
    fn add(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum shape mismatch");
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &QMatrix {
    type Output = QMatrix;
    fn sub(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference shape mismatch");
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &QMatrix {
    type Output = QMatrix;
    fn neg(self) -> QMatrix {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|a| -a).collect(),
        }
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Row arrays; integral entries become JSON numbers, others strings like `"1/2"`.
impl serde::Serialize for QMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        #[derive(serde::Serialize)]
        #[serde(untagged)]
        enum Cell {
            Int(i64),
            Text(String),
        }
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            let row: Vec<Cell> = self
                .row(i)
                .iter()
                .map(|v| match (v.is_integer(), v.to_integer().to_i64()) {
                    (true, Some(k)) => Cell::Int(k),
                    _ => Cell::Text(v.to_string()),
                })
                .collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

/// Homogeneous linear system over named unknowns.
///
/// Used for centralizers, intertwiners and stabilizers: declare the unknowns,
/// add one equation per scalar condition, and ask for the dimension of the
/// solution space.
#[derive(Debug, Clone, Default)]
pub struct LinearSystem {
    names: Vec<String>,
    equations: Vec<Vec<(usize, Rational)>>,
}

impl LinearSystem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a new unknown and returns its column index.
    pub fn unknown(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn num_unknowns(&self) -> usize {
        self.names.len()
    }

    pub fn num_equations(&self) -> usize {
        self.equations.len()
    }

    pub fn name(&self, var: usize) -> &str {
        &self.names[var]
    }

    /// Adds `sum coeff * var = 0`. Repeated variables are accumulated; an
    /// equation with no nonzero coefficient is dropped.
    pub fn equation(&mut self, terms: impl IntoIterator<Item = (usize, Rational)>) {
        let mut acc: Vec<(usize, Rational)> = Vec::new();
        for (var, c) in terms {
            assert!(var < self.names.len(), "unknown variable index {var}");
            match acc.iter_mut().find(|(v, _)| *v == var) {
                Some((_, existing)) => *existing += c,
                None => acc.push((var, c)),
            }
        }
        acc.retain(|(_, c)| !c.is_zero());
        if !acc.is_empty() {
            self.equations.push(acc);
        }
    }

    pub fn coefficient_matrix(&self) -> QMatrix {
        let mut m = QMatrix::zeros(self.equations.len(), self.names.len());
        for (row, eq) in self.equations.iter().enumerate() {
            for (var, c) in eq {
                m[(row, *var)] = c.clone();
            }
        }
        m
    }

    pub fn solution_space_dim(&self) -> usize {
        self.names.len() - self.coefficient_matrix().rank()
    }

    /// Basis of the solution space, as coefficient vectors over the unknowns.
    pub fn solution_basis(&self) -> Vec<Vec<Rational>> {
        self.coefficient_matrix().nullspace()
    }
}

/// Dimension of the solution space of a homogeneous system.
pub fn solution_space_dim(system: &LinearSystem) -> usize {
    system.solution_space_dim()
}

fn is_prime(q: u32) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| q % d != 0)
}

/// Dense matrix over the prime field `F_q`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FFMatrix {
    modulus: u32,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl FFMatrix {
    pub fn zeros(modulus: u32, rows: usize, cols: usize) -> Self {
        FFMatrix {
            modulus,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(modulus: u32, n: usize) -> Self {
        let mut m = Self::zeros(modulus, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1 % modulus;
        }
        m
    }

    /// Builds a matrix from residues, reducing every entry into `[0, q)`.
    pub fn from_entries(modulus: u32, rows: usize, cols: usize, entries: Vec<u32>) -> Self {
        assert_eq!(entries.len(), rows * cols);
        FFMatrix {
            modulus,
            rows,
            cols,
            entries: entries.into_iter().map(|e| e % modulus).collect(),
        }
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.entries[i * self.cols + j] = v % self.modulus;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols.min(i)).all(|j| self.get(i, j) == 0))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.modulus, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.entries[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul(&self, rhs: &FFMatrix) -> FFMatrix {
        assert_eq!(self.modulus, rhs.modulus);
        assert_eq!(self.cols, rhs.rows);
        let q = u64::from(self.modulus);
        let mut out = Self::zeros(self.modulus, self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc += u64::from(self.get(i, k)) * u64::from(rhs.get(k, j));
                }
                out.entries[i * rhs.cols + j] = (acc % q) as u32;
            }
        }
        out
    }

    pub fn add(&self, rhs: &FFMatrix) -> FFMatrix {
        assert_eq!((self.modulus, self.rows, self.cols), (rhs.modulus, rhs.rows, rhs.cols));
        let q = self.modulus;
        FFMatrix {
            modulus: q,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| (a + b) % q).collect(),
        }
    }

    pub fn scale(&self, c: u32) -> FFMatrix {
        let q = u64::from(self.modulus);
        FFMatrix {
            modulus: self.modulus,
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|&a| ((u64::from(a) * u64::from(c)) % q) as u32)
                .collect(),
        }
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let mut s = Self::zeros(self.modulus, rows.len(), cols.len());
        for (si, i) in rows.clone().enumerate() {
            for (sj, j) in cols.clone().enumerate() {
                s.entries[si * s.cols + sj] = self.get(i, j);
            }
        }
        s
    }

    pub fn rank(&self) -> usize {
        let q = self.modulus;
        let mut a = self.entries.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut prow = 0;
        for col in 0..cols {
            if prow == rows {
                break;
            }
            let Some(found) = (prow..rows).find(|&r| a[r * cols + col] != 0) else {
                continue;
            };
            for j in 0..cols {
                a.swap(found * cols + j, prow * cols + j);
            }
            let inv = mod_inverse(a[prow * cols + col], q);
            for r in prow + 1..rows {
                let v = a[r * cols + col];
                if v == 0 {
                    continue;
                }
                let factor = (u64::from(v) * u64::from(inv)) % u64::from(q);
                for j in col..cols {
                    let sub = (factor * u64::from(a[prow * cols + j])) % u64::from(q);
                    a[r * cols + j] = ((u64::from(a[r * cols + j]) + u64::from(q) - sub) % u64::from(q)) as u32;
                }
            }
            prow += 1;
        }
        prow
    }
}

/// Inverse of a nonzero residue modulo a prime.
pub fn mod_inverse(a: u32, q: u32) -> u32 {
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (i64::from(q), i64::from(a % q));
    while new_r != 0 {
        let quot = r / new_r;
        (t, new_t) = (new_t, t - quot * new_t);
        (r, new_r) = (new_r, r - quot * new_r);
    }
    assert_eq!(r, 1, "{a} is not invertible modulo {q}");
    t.rem_euclid(i64::from(q)) as u32
}

/// Reduces a rational to a residue modulo `q`, if its denominator is invertible.
pub fn reduce_rational(v: &Rational, q: u32) -> Option<u32> {
    let qb = BigInt::from(q);
    let den = v.denom().mod_floor(&qb).to_u32()?;
    if den == 0 {
        return None;
    }
    let num = v.numer().mod_floor(&qb).to_u32()?;
    Some(((u64::from(num) * u64::from(mod_inverse(den, q))) % u64::from(q)) as u32)
}

/// Entrywise reduction of a rational matrix modulo the prime `q`.
pub fn ff_reduce(m: &QMatrix, q: u32) -> Result<FFMatrix, LinalgError> {
    if !is_prime(q) {
        return Err(LinalgError::NotPrime(q));
    }
    let mut out = FFMatrix::zeros(q, m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = reduce_rational(&m[(i, j)], q).ok_or(LinalgError::DenominatorNotInvertible {
                row: i,
                col: j,
                modulus: q,
            })?;
            out.set(i, j, v);
        }
    }
    Ok(out)
}
