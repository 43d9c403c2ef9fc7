//! Closure order on Borel orbits, decided by sandwiching.
//!
//! Corner ranks and orbit dimensions give necessary conditions (certified
//! non-degenerations). Degeneration curves found by a seeded random search give
//! sufficient witnesses. Pairs in between stay `Undecided`.
//!
//! A curve step conjugates the current matrix `X` by a unipotent `U` and then
//! takes the lowest-weight component of `Y = U X U^{-1}` under a cocharacter
//! `d`, i.e. the limit of `t^{-m} diag(t^d) Y diag(t^-d)` as `t -> 0`, where
//! `m` is the smallest weight `d_i - d_j` on the support of `Y`. Orbits of
//! square-zero matrices are stable under scaling, so this limit stays in the
//! orbit closure of `X`. Limits are stored as primitive integer matrices.

use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::forms::{
    b_eps_root_elements, b_root_elements, dual_index, exp_nilpotent, gram_matrix, is_delta_fixed, star, EpsForm,
    Epsilon,
};
use crate::intmat::IntMatrix;
use num_traits::Zero;

use crate::linalg::{QMatrix, Rational};
use crate::orbits::{
    build_mgamma, build_ngamma, enumerate_symmetric_orbits, orbit_dim_a, orbit_dim_eps, OrbitError, OrbitRecord,
};
use crate::patterns::{corner_ranks, RankProfile};

/// Which Borel group acts: `B` in `GL_n` or `B(ε)` in the isometry group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GroupKind {
    A,
    Eps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchBudget {
    pub trials: u64,
    pub max_exponent: i64,
    pub max_steps: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            trials: 20_000,
            max_exponent: 3,
            max_steps: 3,
        }
    }
}

/// Most root exponentials multiplied into one conjugator.
const MAX_FACTORS: usize = 3;
/// Coefficients used for root exponentials.
const ROOT_COEFFS: [i64; 4] = [1, -1, 2, -2];
/// Intermediate matrices with larger entries are abandoned.
const ENTRY_LIMIT: i64 = 1 << 40;

#[derive(Debug, Clone)]
struct RootMove {
    exact: QMatrix,
    exact_inv: QMatrix,
    num: IntMatrix,
    inv_num: IntMatrix,
}

/// The acting group together with its precomputed unipotent moves.
#[derive(Debug, Clone)]
pub struct SearchGroup {
    kind: GroupKind,
    n: usize,
    form: Option<EpsForm>,
    moves: Vec<RootMove>,
}

impl SearchGroup {
    pub fn type_a(n: usize) -> Self {
        Self::build(GroupKind::A, n, None, b_root_elements(n))
    }

    pub fn symmetric(form: EpsForm) -> Self {
        let roots = b_eps_root_elements(&form);
        Self::build(GroupKind::Eps, form.n(), Some(form), roots)
    }

    fn build(kind: GroupKind, n: usize, form: Option<EpsForm>, roots: Vec<QMatrix>) -> Self {
        let mut moves = Vec::new();
        for x in &roots {
            for c in ROOT_COEFFS {
                let cx = x.scale(&crate::linalg::rat(c));
                let exact = exp_nilpotent(&cx);
                let exact_inv = exp_nilpotent(&-&cx);
                let num = IntMatrix::from_qmatrix(&exact.primitive()).expect("small root exponentials");
                let inv_num = IntMatrix::from_qmatrix(&exact_inv.primitive()).expect("small root exponentials");
                moves.push(RootMove {
                    exact,
                    exact_inv,
                    num,
                    inv_num,
                });
            }
        }
        SearchGroup { kind, n, form, moves }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn form(&self) -> Option<&EpsForm> {
        self.form.as_ref()
    }

    pub fn epsilon(&self) -> Option<Epsilon> {
        self.form.as_ref().map(EpsForm::epsilon)
    }

    fn sample_cocharacter(&self, rng: &mut impl Rng, e: i64) -> Vec<i64> {
        let n = self.n;
        match self.kind {
            GroupKind::A => (0..n).map(|_| rng.gen_range(-e..=e)).collect(),
            GroupKind::Eps => {
                let mut d = vec![0i64; n];
                for i in 0..n / 2 {
                    let v = rng.gen_range(-e..=e);
                    d[i] = v;
                    d[n - 1 - i] = -v;
                }
                d
            }
        }
    }
}

/// Why a degeneration is impossible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstruction {
    /// `q_{row,col}` of the target exceeds that of the source.
    ProfileExceeds { row: usize, col: usize, from: u32, to: u32 },
    /// Distinct orbits, target not of strictly smaller dimension.
    DimensionNotSmaller { from: usize, to: usize },
    /// One of the orbits has no symmetric part.
    NotSymmetric,
    /// The target lies outside the smallest `ad(b)`-stable subspace
    /// containing the source, which is closed and contains its orbit.
    OutsideSpan { span_dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InvariantVerdict {
    Possible,
    Impossible(Obstruction),
}

/// Necessary conditions for `to` to lie in the closure of `from`.
pub fn invariant_leq(from: &OrbitRecord, to: &OrbitRecord, kind: GroupKind) -> InvariantVerdict {
    if from.pattern == to.pattern {
        return InvariantVerdict::Possible;
    }
    if let Some((row, col)) = to.profile.first_excess(&from.profile) {
        return InvariantVerdict::Impossible(Obstruction::ProfileExceeds {
            row,
            col,
            from: from.profile.get(row, col),
            to: to.profile.get(row, col),
        });
    }
    let symmetric = kind == GroupKind::Eps;
    match (from.dim_in(symmetric), to.dim_in(symmetric)) {
        (Some(a), Some(b)) if b >= a => InvariantVerdict::Impossible(Obstruction::DimensionNotSmaller { from: a, to: b }),
        (Some(_), Some(_)) => InvariantVerdict::Possible,
        _ => InvariantVerdict::Impossible(Obstruction::NotSymmetric),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurveStep {
    pub conjugator: QMatrix,
    pub cocharacter: Vec<i64>,
    pub limit: QMatrix,
}

/// A sequence of conjugate-and-limit steps from `start` to `claimed_limit`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurveCertificate {
    pub group: GroupKind,
    pub epsilon: Option<Epsilon>,
    pub start: QMatrix,
    pub steps: Vec<CurveStep>,
    pub claimed_limit: QMatrix,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CertificateError {
    #[error("step {0}: conjugator is not unipotent upper-triangular")]
    NotUnipotent(usize),
    #[error("step {0}: conjugator is not an isometry")]
    NotIsometry(usize),
    #[error("step {0}: cocharacter has the wrong shape")]
    BadCocharacter(usize),
    #[error("step {0}: recorded limit differs from the recomputed one")]
    LimitMismatch(usize),
    #[error("claimed limit differs from the last step")]
    ClaimMismatch,
    #[error("endpoint lies in the wrong orbit")]
    WrongEndpoint,
    #[error("endpoint is not delta-fixed")]
    NotDeltaFixed,
    #[error("certificate starts at the wrong matrix")]
    StartMismatch,
    #[error("link {0} of a chain does not continue the previous one")]
    ChainBroken(usize),
    #[error("symmetric verification needs an ε-form")]
    MissingForm,
}

/// The lowest-weight part of `y` under the cocharacter `d`.
pub fn leading_component(y: &QMatrix, d: &[i64]) -> QMatrix {
    let n = y.rows();
    let weight = |i: usize, j: usize| d[i] - d[j];
    let min = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !num_traits::Zero::is_zero(&y[(i, j)]))
        .map(|(i, j)| weight(i, j))
        .min();
    let mut out = QMatrix::zeros(n, n);
    if let Some(m) = min {
        for i in 0..n {
            for j in 0..n {
                if weight(i, j) == m {
                    out[(i, j)] = y[(i, j)].clone();
                }
            }
        }
    }
    out
}

fn int_leading_component(y: &IntMatrix, d: &[i64]) -> IntMatrix {
    let n = y.n();
    let mut min = i64::MAX;
    for i in 0..n {
        for j in 0..n {
            if y.get(i, j) != 0 {
                min = min.min(d[i] - d[j]);
            }
        }
    }
    let mut out = IntMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if y.get(i, j) != 0 && d[i] - d[j] == min {
                out.set(i, j, y.get(i, j));
            }
        }
    }
    out
}

fn is_unipotent_upper(u: &QMatrix) -> bool {
    u.is_upper_triangular() && (0..u.rows()).all(|i| num_traits::One::is_one(&u[(i, i)]))
}

/// Re-derives every step of `cert` exactly and checks that the endpoint has
/// profile `target` (and is delta-fixed when verifying for `B(ε)`).
pub fn verify_certificate(
    cert: &CurveCertificate,
    target: &RankProfile,
    as_group: GroupKind,
    form: Option<&EpsForm>,
) -> Result<(), CertificateError> {
    let n = cert.start.rows();
    let form = match as_group {
        GroupKind::Eps => Some(form.ok_or(CertificateError::MissingForm)?),
        GroupKind::A => None,
    };
    let mut x = cert.start.clone();
    for (k, step) in cert.steps.iter().enumerate() {
        let u = &step.conjugator;
        if u.rows() != n || !is_unipotent_upper(u) {
            return Err(CertificateError::NotUnipotent(k));
        }
        let u_inv = u.inverse().ok_or(CertificateError::NotUnipotent(k))?;
        if step.cocharacter.len() != n {
            return Err(CertificateError::BadCocharacter(k));
        }
        if let Some(f) = form {
            if star(u, f).map_err(|_| CertificateError::NotIsometry(k))? != u_inv {
                return Err(CertificateError::NotIsometry(k));
            }
            let d = &step.cocharacter;
            if (1..=n).any(|i| d[i - 1] != -d[dual_index(n, i) - 1]) {
                return Err(CertificateError::BadCocharacter(k));
            }
        }
        let y = &(u * &x) * &u_inv;
        let limit = leading_component(&y, &step.cocharacter).primitive();
        if limit != step.limit {
            return Err(CertificateError::LimitMismatch(k));
        }
        x = limit;
    }
    if x != cert.claimed_limit {
        return Err(CertificateError::ClaimMismatch);
    }
    if corner_ranks(&x) != *target {
        return Err(CertificateError::WrongEndpoint);
    }
    if let Some(f) = form {
        if !is_delta_fixed(&x, f) {
            return Err(CertificateError::NotDeltaFixed);
        }
    }
    Ok(())
}

fn endpoint_ok(x: &QMatrix, target: &RankProfile, group: &SearchGroup) -> bool {
    corner_ranks(x) == *target && group.form().is_none_or(|f| is_delta_fixed(x, f))
}

/// Seeded search for a degeneration curve from `from` into the orbit with
/// profile `target`. `None` means the budget ran out, not that none exists.
pub fn curve_search(
    from: &QMatrix,
    target: &RankProfile,
    group: &SearchGroup,
    budget: &SearchBudget,
    seed: u64,
) -> Option<CurveCertificate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    search_with_rng(std::slice::from_ref(from), target, group, budget, &mut rng)
}

type Plan = Vec<(Vec<usize>, Vec<i64>)>;

/// Each trial starts from a randomly chosen element of `starts`, all of which
/// must lie in the source orbit.
fn search_with_rng(
    starts: &[QMatrix],
    target: &RankProfile,
    group: &SearchGroup,
    budget: &SearchBudget,
    rng: &mut ChaCha8Rng,
) -> Option<CurveCertificate> {
    let exact: Vec<QMatrix> = starts.iter().map(QMatrix::primitive).collect();
    if let Some(s) = exact.iter().find(|s| endpoint_ok(s, target, group)) {
        return build_certificate(s, &[], target, group);
    }
    let ints: Vec<IntMatrix> = exact.iter().map(IntMatrix::from_qmatrix).collect::<Option<_>>()?;
    if ints.iter().any(IntMatrix::is_zero) {
        return None;
    }
    for _ in 0..budget.trials {
        let which = if ints.len() > 1 { rng.gen_range(0..ints.len()) } else { 0 };
        let mut x = ints[which].clone();
        let mut plan: Plan = Vec::new();
        for _ in 0..budget.max_steps {
            let factors = if group.moves.is_empty() { 0 } else { rng.gen_range(0..=MAX_FACTORS) };
            let moves: Vec<usize> = (0..factors).map(|_| rng.gen_range(0..group.moves.len())).collect();
            let d = group.sample_cocharacter(rng, budget.max_exponent);
            let Some(next) = int_step(&x, &moves, &d, group) else {
                break;
            };
            plan.push((moves, d));
            let Some(profile) = next.corner_ranks() else {
                break;
            };
            if !target.dominated_by(&profile) {
                break;
            }
            if profile == *target {
                if let Some(cert) = build_certificate(&exact[which], &plan, target, group) {
                    return Some(cert);
                }
                break;
            }
            x = next;
        }
    }
    None
}

fn int_step(x: &IntMatrix, moves: &[usize], d: &[i64], group: &SearchGroup) -> Option<IntMatrix> {
    let mut y = x.clone();
    for &k in moves {
        y = group.moves[k].num.checked_mul(&y)?.checked_mul(&group.moves[k].inv_num)?;
        y.normalize_projective();
    }
    let mut limit = int_leading_component(&y, d);
    limit.normalize_projective();
    (limit.max_abs() < ENTRY_LIMIT).then_some(limit)
}

fn build_certificate(start: &QMatrix, plan: &[(Vec<usize>, Vec<i64>)], target: &RankProfile, group: &SearchGroup) -> Option<CurveCertificate> {
    let n = start.rows();
    let mut x = start.clone();
    let mut steps = Vec::with_capacity(plan.len());
    for (moves, d) in plan {
        // Moves are applied innermost first, so U = u_last ... u_first.
        let mut u = QMatrix::identity(n);
        let mut u_inv = QMatrix::identity(n);
        for &k in moves {
            u = &group.moves[k].exact * &u;
            u_inv = &u_inv * &group.moves[k].exact_inv;
        }
        let y = &(&u * &x) * &u_inv;
        let limit = leading_component(&y, d).primitive();
        steps.push(CurveStep {
            conjugator: u,
            cocharacter: d.clone(),
            limit: limit.clone(),
        });
        x = limit;
    }
    let cert = CurveCertificate {
        group: group.kind,
        epsilon: group.epsilon(),
        start: start.clone(),
        steps,
        claimed_limit: x,
    };
    verify_certificate(&cert, target, group.kind, group.form()).ok()?;
    Some(cert)
}

/// Evidence that one orbit lies in the closure of another.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "witness", content = "certificates", rename_all = "snake_case")]
pub enum Witness {
    Reflexive,
    /// The zero matrix lies in every orbit closure (orbits are stable under scaling).
    ConeVertex,
    Curve(CurveCertificate),
    /// Certificates through intermediate orbits, each starting at the
    /// representative of the orbit where the previous one ended.
    Chain(Vec<CurveCertificate>),
    /// Accepted on the completeness of corner ranks in type A.
    AssumedTypeA,
}

impl Witness {
    fn certificates(&self) -> Option<Vec<CurveCertificate>> {
        match self {
            Witness::Curve(c) => Some(vec![c.clone()]),
            Witness::Chain(cs) => Some(cs.clone()),
            _ => None,
        }
    }

    pub fn is_searched(&self) -> bool {
        matches!(self, Witness::Curve(_) | Witness::Chain(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Relation {
    CertifiedLeq { witness: Witness },
    CertifiedNleq { reason: Obstruction },
    Undecided,
}

impl Relation {
    pub fn is_leq(&self) -> bool {
        matches!(self, Relation::CertifiedLeq { .. })
    }

    pub fn is_nleq(&self) -> bool {
        matches!(self, Relation::CertifiedNleq { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClosureOptions {
    pub budget: SearchBudget,
    pub seed: u64,
    pub assume_type_a_complete: bool,
    pub certify: bool,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        ClosureOptions {
            budget: SearchBudget::default(),
            seed: 2024,
            assume_type_a_complete: true,
            certify: false,
        }
    }
}

/// Pairwise closure relation on a list of orbits; `relation[i][j]` says
/// whether orbit `j` lies in the closure of orbit `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosurePoset {
    pub kind: GroupKind,
    pub epsilon: Option<Epsilon>,
    pub orbits: Vec<OrbitRecord>,
    relation: Vec<Relation>,
    pub assumed_type_a_complete: bool,
}

impl ClosurePoset {
    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn get(&self, from: usize, to: usize) -> &Relation {
        &self.relation[from * self.orbits.len() + to]
    }

    pub fn is_leq(&self, from: usize, to: usize) -> bool {
        self.get(from, to).is_leq()
    }

    pub fn undecided_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs().filter(|&(i, j)| *self.get(i, j) == Relation::Undecided).collect()
    }

    pub fn index_of(&self, pattern: &str) -> Option<usize> {
        self.orbits.iter().position(|r| r.pattern.to_string() == pattern)
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.orbits.len();
        (0..m).flat_map(move |i| (0..m).map(move |j| (i, j)))
    }

    /// Checks every searched witness again from scratch.
    pub fn verify_witnesses(&self, form: Option<&EpsForm>) -> Result<(), (usize, usize, CertificateError)> {
        for (i, j) in self.pairs() {
            if let Relation::CertifiedLeq { witness } = self.get(i, j) {
                let from = self.orbits[i].matrix_for(self.kind == GroupKind::Eps);
                verify_witness(witness, from, &self.orbits[j].profile, self.kind, form).map_err(|e| (i, j, e))?;
            }
        }
        Ok(())
    }
}

/// Verifies a witness for "orbit with profile `target` lies in the closure of
/// the orbit of `from`".
pub fn verify_witness(
    witness: &Witness,
    from: &QMatrix,
    target: &RankProfile,
    kind: GroupKind,
    form: Option<&EpsForm>,
) -> Result<(), CertificateError> {
    match witness {
        Witness::Reflexive => (corner_ranks(from) == *target)
            .then_some(())
            .ok_or(CertificateError::WrongEndpoint),
        Witness::ConeVertex => target
            .table()
            .iter()
            .all(|&v| v == 0)
            .then_some(())
            .ok_or(CertificateError::WrongEndpoint),
        Witness::AssumedTypeA => Ok(()),
        Witness::Curve(c) => {
            if !same_orbit(&c.start, from, kind, form) {
                return Err(CertificateError::StartMismatch);
            }
            verify_certificate(c, target, kind, form)
        }
        Witness::Chain(links) => {
            if !links.first().is_some_and(|c| same_orbit(&c.start, from, kind, form)) {
                return Err(CertificateError::StartMismatch);
            }
            for (k, link) in links.iter().enumerate() {
                let link_target = match links.get(k + 1) {
                    Some(next) => corner_ranks(&next.start),
                    None => target.clone(),
                };
                verify_certificate(link, &link_target, kind, form).map_err(|e| match e {
                    CertificateError::WrongEndpoint => CertificateError::ChainBroken(k),
                    other => other,
                })?;
                if let (Some(next), Some(f)) = (links.get(k + 1), form.filter(|_| kind == GroupKind::Eps)) {
                    if !is_delta_fixed(&next.start, f) {
                        return Err(CertificateError::ChainBroken(k + 1));
                    }
                }
            }
            Ok(())
        }
    }
}

/// Orbit membership by profile, plus delta-fixedness of both matrices for `B(ε)`.
fn same_orbit(a: &QMatrix, b: &QMatrix, kind: GroupKind, form: Option<&EpsForm>) -> bool {
    corner_ranks(a) == corner_ranks(b)
        && match (kind, form) {
            (GroupKind::Eps, Some(f)) => is_delta_fixed(a, f) && is_delta_fixed(b, f),
            (GroupKind::Eps, None) => false,
            (GroupKind::A, _) => true,
        }
}

fn find_chain(relation: &[Relation], m: usize, i: usize, j: usize) -> Option<Vec<CurveCertificate>> {
    (0..m).filter(|&w| w != i && w != j).find_map(|w| {
        let first = match &relation[i * m + w] {
            Relation::CertifiedLeq { witness } => witness.certificates()?,
            _ => return None,
        };
        let second = match &relation[w * m + j] {
            Relation::CertifiedLeq { witness } => witness.certificates()?,
            _ => return None,
        };
        Some(first.into_iter().chain(second).collect())
    })
}

/// Spanning set of the Borel subalgebra of `gl_n` or of `g(ε)`.
fn borel_algebra(n: usize, form: Option<&EpsForm>) -> Vec<QMatrix> {
    let mut out = Vec::new();
    for i in 1..=n {
        for j in i..=n {
            let e = QMatrix::unit(n, i, j);
            let x = match form {
                Some(f) => &e + &crate::forms::delta(&e, f).expect("square"),
                None => e,
            };
            if !x.is_zero() {
                out.push(x);
            }
        }
    }
    out
}

/// Row-echelon basis of a subspace of `n x n` matrices, grown one vector at a time.
#[derive(Debug, Clone, Default)]
struct Echelon {
    rows: Vec<(usize, Vec<Rational>)>,
}

impl Echelon {
    fn reduce(&self, v: &[Rational]) -> Vec<Rational> {
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            if !v[*p].is_zero() {
                let c = v[*p].clone() / &row[*p];
                for (a, b) in v.iter_mut().zip(row) {
                    *a -= &c * b;
                }
            }
        }
        v
    }

    fn contains(&self, v: &[Rational]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Adds `v` and reports whether the span grew.
    fn insert(&mut self, v: &[Rational]) -> bool {
        let r = self.reduce(v);
        match r.iter().position(|x| !x.is_zero()) {
            Some(p) => {
                for (_, row) in &mut self.rows {
                    if !row[p].is_zero() {
                        let c = row[p].clone() / &r[p];
                        for (a, b) in row.iter_mut().zip(&r) {
                            *a -= &c * b;
                        }
                    }
                }
                self.rows.push((p, r));
                true
            }
            None => false,
        }
    }
}

/// The smallest `ad(b)`-stable subspace containing `x`.
fn borel_span(x: &QMatrix, algebra: &[QMatrix]) -> Echelon {
    let mut span = Echelon::default();
    let mut queue = vec![x.clone()];
    span.insert(x.entries());
    while let Some(v) = queue.pop() {
        for h in algebra {
            let w = h.commutator(&v);
            if span.insert(w.entries()) {
                queue.push(w);
            }
        }
    }
    span
}

/// Decides the closure relation for every ordered pair of `orbits`.
///
/// Non-degenerations come from [`invariant_leq`] and, for `B(ε)`, from the
/// `ad(b)`-span of the source representative. Possible pairs are handled in
/// order of increasing dimension gap, first by composing two earlier
/// certificates and otherwise by [`curve_search`] with a per-pair RNG stream,
/// so the result does not depend on thread scheduling.
pub fn closure_poset(orbits: Vec<OrbitRecord>, group: &SearchGroup, options: &ClosureOptions) -> ClosurePoset {
    let m = orbits.len();
    let kind = group.kind();
    let symmetric = kind == GroupKind::Eps;
    let mut relation = vec![Relation::Undecided; m * m];
    let mut possible: Vec<(usize, usize, usize)> = Vec::new();
    let spans: Vec<Option<Echelon>> = if symmetric {
        let algebra = borel_algebra(group.n(), group.form());
        orbits
            .par_iter()
            .map(|o| Some(borel_span(o.matrix_for(true), &algebra)))
            .collect()
    } else {
        vec![None; m]
    };
    for i in 0..m {
        for j in 0..m {
            if i == j {
                relation[i * m + j] = Relation::CertifiedLeq {
                    witness: Witness::Reflexive,
                };
                continue;
            }
            match invariant_leq(&orbits[i], &orbits[j], kind) {
                InvariantVerdict::Impossible(reason) => relation[i * m + j] = Relation::CertifiedNleq { reason },
                InvariantVerdict::Possible => {
                    if let Some(span) = &spans[i] {
                        if !span.contains(orbits[j].matrix_for(true).entries()) {
                            relation[i * m + j] = Relation::CertifiedNleq {
                                reason: Obstruction::OutsideSpan {
                                    span_dim: span.rows.len(),
                                },
                            };
                            continue;
                        }
                    }
                    let gap = orbits[i].dim_in(symmetric).unwrap_or(0) - orbits[j].dim_in(symmetric).unwrap_or(0);
                    possible.push((i, j, gap));
                }
            }
        }
    }
    let assume = kind == GroupKind::A && options.assume_type_a_complete;
    let search = !assume || options.certify;
    possible.sort_by_key(|&(i, j, gap)| (gap, i, j));

    let mut start = 0;
    while start < possible.len() {
        let gap = possible[start].2;
        let end = possible[start..].iter().position(|p| p.2 != gap).map_or(possible.len(), |k| start + k);
        let level = &possible[start..end];
        let decided: Vec<Option<Witness>> = level
            .par_iter()
            .map(|&(i, j, _)| {
                if orbits[j].profile.table().iter().all(|&v| v == 0) {
                    return Some(Witness::ConeVertex);
                }
                if !search {
                    return None;
                }
                if let Some(chain) = find_chain(&relation, m, i, j) {
                    return Some(Witness::Chain(chain));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
                rng.set_stream((i * m + j) as u64);
                search_with_rng(&orbits[i].starts_for(symmetric), &orbits[j].profile, group, &options.budget, &mut rng)
                    .map(Witness::Curve)
            })
            .collect();
        for (&(i, j, _), witness) in level.iter().zip(decided) {
            relation[i * m + j] = match (witness, assume) {
                (Some(witness), _) => Relation::CertifiedLeq { witness },
                (None, true) => Relation::CertifiedLeq {
                    witness: Witness::AssumedTypeA,
                },
                (None, false) => Relation::Undecided,
            };
        }
        start = end;
    }
    ClosurePoset {
        kind,
        epsilon: group.epsilon(),
        orbits,
        relation,
        assumed_type_a_complete: assume,
    }
}

/// Cover relations `(larger orbit, smaller orbit)` of the certified order.
pub fn hasse_edges(poset: &ClosurePoset) -> Vec<(usize, usize)> {
    let m = poset.len();
    let mut edges = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if i == j || !poset.is_leq(i, j) {
                continue;
            }
            let covered = (0..m).any(|w| w != i && w != j && poset.is_leq(i, w) && poset.is_leq(w, j));
            if !covered {
                edges.push((i, j));
            }
        }
    }
    edges
}

fn node_label(record: &OrbitRecord, symmetric: bool) -> String {
    let mut label = format!("{}\\ndim={}", record.pattern, record.dim_orbit);
    if symmetric {
        if let Some(s) = &record.symmetric {
            let _ = write!(label, "\\ndim_eps={}", s.dim_orbit_eps);
        }
    }
    label
}

fn dot_nodes(out: &mut String, orbits: &[OrbitRecord], symmetric: bool) {
    for (k, r) in orbits.iter().enumerate() {
        let _ = writeln!(out, "  n{k} [label=\"{}\"];", node_label(r, symmetric));
    }
}

/// Hasse diagram in DOT; `UNDECIDED` pairs are left out.
pub fn poset_to_dot(poset: &ClosurePoset) -> String {
    let mut out = String::from("digraph closure {\n  rankdir=TB;\n  node [shape=box];\n");
    dot_nodes(&mut out, &poset.orbits, poset.kind == GroupKind::Eps);
    for (a, b) in hasse_edges(poset) {
        let _ = writeln!(out, "  n{a} -> n{b};");
    }
    out.push_str("}\n");
    out
}

/// Comparison of the type-A closure order with the symmetric one on the
/// symmetric orbits.
#[derive(Debug, Clone)]
pub struct InducedReport {
    pub n: usize,
    pub epsilon: Epsilon,
    pub type_a: ClosurePoset,
    pub symmetric: ClosurePoset,
    pub violations: Vec<(usize, usize)>,
    pub undecided: Vec<(usize, usize)>,
    pub consistent: Vec<(usize, usize)>,
}

impl InducedReport {
    pub fn orbits(&self) -> &[OrbitRecord] {
        &self.symmetric.orbits
    }

    pub fn pattern_pair(&self, pair: (usize, usize)) -> (String, String) {
        let o = self.orbits();
        (o[pair.0].pattern.to_string(), o[pair.1].pattern.to_string())
    }
}

/// For every pair of symmetric orbits related in type A, checks whether the
/// symmetric closure relation agrees.
pub fn induced_check(n: usize, epsilon: Epsilon, options: &ClosureOptions) -> Result<InducedReport, OrbitError> {
    let form = gram_matrix(n, epsilon)?;
    let records = enumerate_symmetric_orbits(n, epsilon)?.records;
    let type_a = closure_poset(records.clone(), &SearchGroup::type_a(n), options);
    let symmetric = closure_poset(records, &SearchGroup::symmetric(form), options);
    let m = symmetric.len();
    let (mut violations, mut undecided, mut consistent) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..m {
        for j in 0..m {
            if i == j || !type_a.is_leq(i, j) {
                continue;
            }
            match symmetric.get(i, j) {
                Relation::CertifiedNleq { .. } => violations.push((i, j)),
                Relation::CertifiedLeq { .. } => consistent.push((i, j)),
                Relation::Undecided => undecided.push((i, j)),
            }
        }
    }
    Ok(InducedReport {
        n,
        epsilon,
        type_a,
        symmetric,
        violations,
        undecided,
        consistent,
    })
}

/// Symmetric Hasse diagram with violations drawn as red dashed edges.
pub fn induced_to_dot(report: &InducedReport) -> String {
    let mut out = String::from("digraph induced {\n  rankdir=TB;\n  node [shape=box];\n");
    dot_nodes(&mut out, report.orbits(), true);
    for (a, b) in hasse_edges(&report.symmetric) {
        let _ = writeln!(out, "  n{a} -> n{b};");
    }
    for &(a, b) in &report.violations {
        let _ = writeln!(out, "  n{a} -> n{b} [color=red, style=dashed, label=\"violation\"];");
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairDims {
    pub dim_orbit_m: usize,
    pub dim_stab_m: usize,
    pub dim_orbit_n: usize,
    pub dim_stab_n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    NotInduced,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub l: usize,
    pub n: usize,
    pub type_a: PairDims,
    pub type_a_certificate: Option<CurveCertificate>,
    pub type_d: PairDims,
    pub type_d_m_to_n: InvariantVerdict,
    pub type_d_n_to_m: InvariantVerdict,
    pub verdict: Verdict,
    pub type_b: PairDims,
    pub type_c: PairDims,
}

fn dims_a(m: &QMatrix, nn: &QMatrix) -> Result<PairDims, OrbitError> {
    let (om, sm) = orbit_dim_a(m)?;
    let (on, sn) = orbit_dim_a(nn)?;
    Ok(PairDims {
        dim_orbit_m: om,
        dim_stab_m: sm,
        dim_orbit_n: on,
        dim_stab_n: sn,
    })
}

fn dims_eps(n: usize, l: usize, epsilon: Epsilon) -> Result<PairDims, OrbitError> {
    let form = gram_matrix(n, epsilon)?;
    let (om, sm) = orbit_dim_eps(&build_mgamma(n, l, epsilon)?, &form)?;
    let (on, sn) = orbit_dim_eps(&build_ngamma(n, l)?, &form)?;
    Ok(PairDims {
        dim_orbit_m: om,
        dim_stab_m: sm,
        dim_orbit_n: on,
        dim_stab_n: sn,
    })
}

fn gamma_record(pattern_matrix: &QMatrix, dims: (usize, usize), sym: Option<(usize, usize)>, epsilon: Epsilon) -> OrbitRecord {
    let profile = corner_ranks(pattern_matrix);
    OrbitRecord {
        pattern: crate::patterns::pattern_from_profile(&profile).expect("square-zero matrices have pattern profiles"),
        representative: pattern_matrix.clone(),
        profile,
        dim_orbit: dims.0,
        dim_stab: dims.1,
        symmetric: sym.map(|(o, s)| crate::orbits::SymmetricData {
            epsilon,
            fixed_representative: pattern_matrix.clone(),
            alternatives: Vec::new(),
            dim_orbit_eps: o,
            dim_stab_eps: s,
        }),
    }
}

/// `M_gamma` degenerates to `N_gamma` in type A but their type-D orbits have
/// equal dimension, so the type-D closure order is not induced from type A.
pub fn counterexample_report(l: usize, options: &ClosureOptions) -> Result<CounterexampleReport, OrbitError> {
    let n = 2 * l;
    let m = build_mgamma(n, l, Epsilon::Plus)?;
    let nn = build_ngamma(n, l)?;
    let type_a = dims_a(&m, &nn)?;
    let certificate = curve_search(&m, &corner_ranks(&nn), &SearchGroup::type_a(n), &options.budget, options.seed);
    let type_d = dims_eps(n, l, Epsilon::Plus)?;
    let rec_m = gamma_record(&m, (type_a.dim_orbit_m, type_a.dim_stab_m), Some((type_d.dim_orbit_m, type_d.dim_stab_m)), Epsilon::Plus);
    let rec_n = gamma_record(&nn, (type_a.dim_orbit_n, type_a.dim_stab_n), Some((type_d.dim_orbit_n, type_d.dim_stab_n)), Epsilon::Plus);
    let m_to_n = invariant_leq(&rec_m, &rec_n, GroupKind::Eps);
    let n_to_m = invariant_leq(&rec_n, &rec_m, GroupKind::Eps);
    let type_a_leq = certificate.is_some()
        || (options.assume_type_a_complete && invariant_leq(&rec_m, &rec_n, GroupKind::A) == InvariantVerdict::Possible);
    let verdict = if type_a_leq && matches!(m_to_n, InvariantVerdict::Impossible(_)) {
        Verdict::NotInduced
    } else {
        Verdict::Inconclusive
    };
    let b_n = 2 * l + 1;
    let type_b = dims_eps(b_n, l, Epsilon::Plus)?;
    let type_c = dims_eps(n, l, Epsilon::Minus)?;
    Ok(CounterexampleReport {
        l,
        n,
        type_a,
        type_a_certificate: certificate,
        type_d,
        type_d_m_to_n: m_to_n,
        type_d_n_to_m: n_to_m,
        verdict,
        type_b,
        type_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::random_borel_element;
    use crate::orbits::enumerate_orbits;
    use proptest::prelude::*;

    fn record(records: &[OrbitRecord], text: &str) -> usize {
        records.iter().position(|r| r.pattern.to_string() == text).unwrap()
    }

    #[test]
    fn leading_component_example() {
        // Y = E31 - E42 + c E21 + c E43 under d = (0, 0, 1, 1) keeps the weight-0 part.
        let mut y = &QMatrix::unit(4, 3, 1) - &QMatrix::unit(4, 4, 2);
        y = &y + &(&QMatrix::unit(4, 2, 1) + &QMatrix::unit(4, 4, 3));
        let l = leading_component(&y, &[0, 0, 1, 1]);
        assert_eq!(l, &QMatrix::unit(4, 2, 1) + &QMatrix::unit(4, 4, 3));
        assert!(leading_component(&QMatrix::zeros(3, 3), &[1, 2, 3]).is_zero());
    }

    #[test]
    fn invariant_examples() {
        let recs = enumerate_orbits(2);
        let i = record(&recs, "1->2");
        assert_eq!(invariant_leq(&recs[i], &recs[i], GroupKind::A), InvariantVerdict::Possible);

        let sym = enumerate_symmetric_orbits(4, Epsilon::Plus).unwrap().records;
        let m = record(&sym, "1->3,2->4");
        let nn = record(&sym, "1->2,3->4");
        assert!(matches!(
            invariant_leq(&sym[m], &sym[nn], GroupKind::Eps),
            InvariantVerdict::Impossible(Obstruction::DimensionNotSmaller { from: 2, to: 2 })
        ));
        assert_eq!(invariant_leq(&sym[m], &sym[nn], GroupKind::A), InvariantVerdict::Possible);
        assert!(matches!(
            invariant_leq(&sym[nn], &sym[m], GroupKind::A),
            InvariantVerdict::Impossible(_)
        ));
    }

    #[test]
    fn curve_search_n2() {
        let target = corner_ranks(&QMatrix::unit(2, 1, 2));
        let cert = curve_search(&QMatrix::unit(2, 2, 1), &target, &SearchGroup::type_a(2), &SearchBudget::default(), 2024)
            .expect("E21 degenerates to E12");
        assert!(!cert.steps.is_empty());
        verify_certificate(&cert, &target, GroupKind::A, None).unwrap();
    }

    #[test]
    fn span_obstruction_is_never_contradicted_by_a_curve() {
        let budget = SearchBudget::default();
        for (n, eps) in [(4, Epsilon::Plus), (4, Epsilon::Minus), (5, Epsilon::Plus)] {
            let group = SearchGroup::symmetric(gram_matrix(n, eps).unwrap());
            let orbits = enumerate_symmetric_orbits(n, eps).unwrap().records;
            let poset = closure_poset(orbits, &group, &ClosureOptions::default());
            let mut seen = 0;
            for i in 0..poset.len() {
                for j in 0..poset.len() {
                    if let Relation::CertifiedNleq { reason: Obstruction::OutsideSpan { .. } } = poset.get(i, j) {
                        seen += 1;
                        let from = poset.orbits[i].matrix_for(true);
                        assert!(curve_search(from, &poset.orbits[j].profile, &group, &budget, 7).is_none());
                    }
                }
            }
            if (n, eps) == (4, Epsilon::Plus) {
                assert_eq!(seen, 2);
            }
        }
    }

    #[test]
    fn trivial_certificate_for_own_orbit() {
        let a = &QMatrix::unit(3, 3, 1) + &QMatrix::unit(3, 2, 1);
        let cert = curve_search(&a, &corner_ranks(&a), &SearchGroup::type_a(3), &SearchBudget::default(), 1).unwrap();
        assert!(cert.steps.is_empty());
    }

    #[test]
    fn mgamma_to_ngamma_type_a() {
        for l in [2, 3] {
            let m = build_mgamma(2 * l, l, Epsilon::Plus).unwrap();
            let nn = build_ngamma(2 * l, l).unwrap();
            let target = corner_ranks(&nn);
            let cert = curve_search(&m, &target, &SearchGroup::type_a(2 * l), &SearchBudget::default(), 2024)
                .unwrap_or_else(|| panic!("no certificate for l = {l}"));
            verify_certificate(&cert, &target, GroupKind::A, None).unwrap();
        }
    }

    #[test]
    fn tampered_certificates_are_rejected() {
        let l = 2;
        let m = build_mgamma(4, l, Epsilon::Plus).unwrap();
        let target = corner_ranks(&build_ngamma(4, l).unwrap());
        let cert = curve_search(&m, &target, &SearchGroup::type_a(4), &SearchBudget::default(), 2024).unwrap();
        let mut bad = cert.clone();
        bad.claimed_limit = &bad.claimed_limit + &QMatrix::unit(4, 1, 4);
        assert_eq!(verify_certificate(&bad, &target, GroupKind::A, None), Err(CertificateError::ClaimMismatch));
        let mut bad = cert.clone();
        bad.steps[0].conjugator = QMatrix::identity(4).scale(&crate::linalg::rat(2));
        assert_eq!(verify_certificate(&bad, &target, GroupKind::A, None), Err(CertificateError::NotUnipotent(0)));
        assert_eq!(
            verify_certificate(&cert, &corner_ranks(&m), GroupKind::A, None),
            Err(CertificateError::WrongEndpoint)
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn found_curves_verify_and_respect_invariants(n in 2usize..=4, a in 0usize..1000, b in 0usize..1000, seed in 0u64..1000, conj in 0u64..1000) {
            let orbits = enumerate_orbits(n);
            let (from, to) = (&orbits[a % orbits.len()], &orbits[b % orbits.len()]);
            let mut rng = ChaCha8Rng::seed_from_u64(conj);
            let g = random_borel_element(&mut rng, n);
            let start = &(&g * &from.representative) * &g.inverse().unwrap();
            let budget = SearchBudget { trials: 200, ..SearchBudget::default() };
            let found = curve_search(&start, &to.profile, &SearchGroup::type_a(n), &budget, seed);
            if let Some(cert) = found {
                prop_assert_eq!(corner_ranks(&cert.start), from.profile.clone());
                prop_assert!(verify_certificate(&cert, &to.profile, GroupKind::A, None).is_ok());
                prop_assert_eq!(invariant_leq(from, to, GroupKind::A), InvariantVerdict::Possible);
                prop_assert!(to.profile.dominated_by(&from.profile));
            }
        }
    }

    #[test]
    fn type_a_poset_n2_is_a_chain() {
        let poset = closure_poset(enumerate_orbits(2), &SearchGroup::type_a(2), &ClosureOptions::default());
        let (e, lo, hi) = (poset.index_of("empty").unwrap(), poset.index_of("2->1").unwrap(), poset.index_of("1->2").unwrap());
        let mut edges = hasse_edges(&poset);
        edges.sort_unstable();
        let mut expected = vec![(hi, lo), (lo, e)];
        expected.sort_unstable();
        assert_eq!(edges, expected);
        assert!(poset.undecided_pairs().is_empty());
    }

    #[test]
    fn certified_type_a_poset_agrees_with_assumption() {
        let options = ClosureOptions {
            certify: true,
            ..ClosureOptions::default()
        };
        for n in 2..=4 {
            let poset = closure_poset(enumerate_orbits(n), &SearchGroup::type_a(n), &options);
            poset.verify_witnesses(None).unwrap();
            for i in 0..poset.len() {
                for j in 0..poset.len() {
                    if let Relation::CertifiedLeq { witness } = poset.get(i, j) {
                        if witness.is_searched() {
                            let (a, b) = (&poset.orbits[i], &poset.orbits[j]);
                            assert!(b.profile.dominated_by(&a.profile));
                            assert!(b.dim_orbit < a.dim_orbit);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn symmetric_posets_and_induced_checks() {
        let options = ClosureOptions::default();
        let d = induced_check(4, Epsilon::Plus, &options).unwrap();
        let pair = (d.symmetric.index_of("1->3,2->4").unwrap(), d.symmetric.index_of("1->2,3->4").unwrap());
        assert!(d.violations.contains(&pair));
        assert!(!d.symmetric.is_leq(pair.0, pair.1) && !d.symmetric.is_leq(pair.1, pair.0));
        assert!(!hasse_edges(&d.symmetric).contains(&pair));
        // so_4 = sl_2 x sl_2: the two factors are separated by the span obstruction.
        assert!(d.undecided.is_empty());

        for (n, eps) in [(4, Epsilon::Minus), (5, Epsilon::Plus), (3, Epsilon::Plus), (2, Epsilon::Minus)] {
            let r = induced_check(n, eps, &options).unwrap();
            assert!(r.violations.is_empty(), "n = {n}");
            assert!(r.undecided.is_empty(), "n = {n}: {:?}", r.undecided.iter().map(|&p| r.pattern_pair(p)).collect::<Vec<_>>());
            let form = gram_matrix(n, eps).unwrap();
            r.symmetric.verify_witnesses(Some(&form)).unwrap();
            // Symmetric certificates are type-A certificates as well.
            for i in 0..r.symmetric.len() {
                for j in 0..r.symmetric.len() {
                    if let Relation::CertifiedLeq { witness } = r.symmetric.get(i, j) {
                        let from = r.symmetric.orbits[i].matrix_for(true);
                        verify_witness(witness, from, &r.symmetric.orbits[j].profile, GroupKind::A, None).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let options = ClosureOptions::default();
        let a = induced_check(4, Epsilon::Minus, &options).unwrap();
        let b = induced_check(4, Epsilon::Minus, &options).unwrap();
        assert_eq!(a.symmetric, b.symmetric);
    }

    #[test]
    fn counterexample_examples() {
        let options = ClosureOptions::default();
        let r = counterexample_report(2, &options).unwrap();
        assert_eq!((r.type_a.dim_orbit_m, r.type_a.dim_orbit_n), (7, 6));
        assert!(r.type_a_certificate.is_some());
        assert_eq!((r.type_d.dim_orbit_m, r.type_d.dim_orbit_n), (2, 2));
        assert_eq!(r.verdict, Verdict::NotInduced);
        let r = counterexample_report(3, &options).unwrap();
        assert_eq!((r.type_d.dim_orbit_m, r.type_d.dim_orbit_n), (5, 5));
    }

    #[test]
    fn hasse_of_antichain_is_empty() {
        let recs: Vec<OrbitRecord> = enumerate_orbits(4)
            .into_iter()
            .filter(|r| ["1->3,2->4", "1->4"].contains(&r.pattern.to_string().as_str()))
            .collect();
        let poset = closure_poset(recs, &SearchGroup::type_a(4), &ClosureOptions::default());
        assert_eq!(poset.len(), 2);
        assert!(hasse_edges(&poset).is_empty());
        let dot = poset_to_dot(&poset);
        assert!(dot.starts_with("digraph closure {"));
        assert!(!dot.contains("->  n"));
    }
}
