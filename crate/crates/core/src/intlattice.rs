//! Symmetric bilinear forms over the integers: classes, characteristic
//! vectors, divisibility, signature, and isometry decisions.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::matrix::{IntMatrix, MatrixError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("form matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("form matrix is not symmetric")]
    NotSymmetric,
    #[error("form matrix has determinant {0}, expected ±1")]
    NotUnimodular(BigInt),
    #[error("class has {found} coordinates but the form has rank {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// A symmetric integer matrix playing the role of an intersection form.
///
/// [`IntersectionForm::new`] additionally demands unimodularity. Augmented
/// hermitian forms are built with [`IntersectionForm::symmetric`], which only
/// checks symmetry; [`IntersectionForm::is_unimodular`] reports the rest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntersectionForm {
    matrix: IntMatrix,
}

impl IntersectionForm {
    pub fn new(matrix: IntMatrix) -> Result<Self, LatticeError> {
        let form = Self::symmetric(matrix)?;
        let det = form.matrix.determinant();
        if !det.abs().is_one() {
            return Err(LatticeError::NotUnimodular(det));
        }
        Ok(form)
    }

    pub fn symmetric(matrix: IntMatrix) -> Result<Self, LatticeError> {
        if !matrix.is_square() {
            return Err(LatticeError::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        if !matrix.is_symmetric() {
            return Err(LatticeError::NotSymmetric);
        }
        Ok(IntersectionForm { matrix })
    }

    /// The rank-0 form of the 4-sphere.
    pub fn empty() -> Self {
        IntersectionForm {
            matrix: IntMatrix::zeros(0, 0),
        }
    }

    /// `(1)`, the form of CP².
    pub fn cp2() -> Self {
        IntersectionForm {
            matrix: IntMatrix::identity(1),
        }
    }

    /// The hyperbolic form `[[0,1],[1,0]]` of S²×S².
    pub fn hyperbolic() -> Self {
        IntersectionForm {
            matrix: IntMatrix::square([[0, 1], [1, 0]]),
        }
    }

    /// Positive definite E8 (Cartan matrix: a chain of seven nodes with an
    /// eighth node attached to the fifth).
    pub fn e8() -> Self {
        let mut m = IntMatrix::zeros(8, 8);
        let mut edges: Vec<(usize, usize)> = (0..6).map(|i| (i, i + 1)).collect();
        edges.push((4, 7));
        for i in 0..8 {
            m[(i, i)] = BigInt::from(2);
        }
        for (a, b) in edges {
            m[(a, b)] = BigInt::from(-1);
            m[(b, a)] = BigInt::from(-1);
        }
        IntersectionForm { matrix: m }
    }

    pub fn diagonal<I: Into<BigInt>>(entries: impl IntoIterator<Item = I>) -> Self {
        IntersectionForm {
            matrix: IntMatrix::diagonal(entries),
        }
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> IntMatrix {
        self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.rows()
    }

    pub fn determinant(&self) -> BigInt {
        self.matrix.determinant()
    }

    pub fn is_unimodular(&self) -> bool {
        self.determinant().abs().is_one()
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.matrix[(i, i)].is_even())
    }

    pub fn negated(&self) -> Self {
        IntersectionForm {
            matrix: self.matrix.neg(),
        }
    }

    /// Orthogonal sum, the form of a connected sum.
    pub fn block_sum(&self, other: &IntersectionForm) -> Self {
        IntersectionForm {
            matrix: self.matrix.block_sum(&other.matrix),
        }
    }

    /// `Pᵀ · Q · P`.
    pub fn congruent_by(&self, p: &IntMatrix) -> Self {
        IntersectionForm {
            matrix: p.transpose().mul(&self.matrix).mul(p),
        }
    }

    pub fn pairing(&self, x: &HomologyClass, y: &HomologyClass) -> Result<BigInt, LatticeError> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.matrix.bilinear(&x.0, &y.0))
    }

    fn check_dim(&self, x: &HomologyClass) -> Result<(), LatticeError> {
        if x.len() != self.rank() {
            return Err(LatticeError::DimensionMismatch {
                expected: self.rank(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for IntersectionForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.matrix.fmt(f)
    }
}

/// A second homology class, as coordinates in the basis of the ambient form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HomologyClass(#[serde(with = "crate::bigint_serde::vec")] pub Vec<BigInt>);

impl HomologyClass {
    pub fn new<I: Into<BigInt>>(coords: impl IntoIterator<Item = I>) -> Self {
        HomologyClass(coords.into_iter().map(Into::into).collect())
    }

    pub fn zero(n: usize) -> Self {
        HomologyClass(vec![BigInt::zero(); n])
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut x = Self::zero(n);
        x.0[i] = BigInt::one();
        x
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn scaled(&self, k: &BigInt) -> Self {
        HomologyClass(self.0.iter().map(|c| c * k).collect())
    }

    pub fn negated(&self) -> Self {
        HomologyClass(self.0.iter().map(|c| -c).collect())
    }

    /// Exact quotient by `d`; panics if `d` does not divide every coordinate.
    pub fn divided_by(&self, d: &BigInt) -> Self {
        HomologyClass(
            self.0
                .iter()
                .map(|c| {
                    let (q, r) = c.div_rem(d);
                    assert!(r.is_zero(), "{d} does not divide {c}");
                    q
                })
                .collect(),
        )
    }
}

impl fmt::Display for HomologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Definiteness {
    Positive,
    Negative,
    Indefinite,
    ZeroRank,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormInvariants {
    pub rank: usize,
    pub signature: i64,
    pub parity: Parity,
    pub definiteness: Definiteness,
}

/// Largest integer dividing every coordinate; 0 for the zero class.
pub fn divisibility(x: &HomologyClass) -> BigInt {
    x.0.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c))
}

/// `xᵀ Q x`.
pub fn self_intersection(q: &IntersectionForm, x: &HomologyClass) -> Result<BigInt, LatticeError> {
    q.pairing(x, x)
}

/// Whether `x·a ≡ a·a (mod 2)` for every class `a`.
///
/// Both sides are linear in `a` modulo 2 (`(a+b)·(a+b) ≡ a·a + b·b`), so
/// checking the basis vectors suffices.
pub fn is_characteristic(q: &IntersectionForm, x: &HomologyClass) -> Result<bool, LatticeError> {
    q.check_dim(x)?;
    let qx = q.matrix().mul_vec(&x.0);
    Ok((0..q.rank()).all(|i| (&qx[i] - &q.matrix()[(i, i)]).is_even()))
}

/// Pivots of a congruence diagonalization over the rationals.
fn diagonal_pivots(q: &IntMatrix) -> Vec<BigRational> {
    let n = q.rows();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|r| {
            q.row(r)
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        if a[k][k].is_zero() {
            if let Some(p) = (k + 1..n).find(|&i| !a[i][i].is_zero()) {
                a.swap(k, p);
                for row in a.iter_mut() {
                    row.swap(k, p);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                // Hyperbolic pair: replacing e_k by e_k + e_j makes the pivot 2·a[k][j].
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[k][c] += v;
                }
                for r in 0..n {
                    let v = a[r][j].clone();
                    a[r][k] += v;
                }
            } else if let Some(i) = (k + 1..n).find(|&i| (k + 1..n).any(|j| !a[i][j].is_zero())) {
                // Row k is zero; move a row with off-diagonal mass into position k.
                a.swap(k, i);
                for row in a.iter_mut() {
                    row.swap(k, i);
                }
                let j = (k + 1..n)
                    .find(|&j| !a[k][j].is_zero())
                    .expect("nonzero entry");
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[k][c] += v;
                }
                for r in 0..n {
                    let v = a[r][j].clone();
                    a[r][k] += v;
                }
            }
        }
        let pivot = a[k][k].clone();
        if pivot.is_zero() {
            pivots.push(pivot);
            continue;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &pivot;
            for j in k..n {
                let delta = &f * &a[k][j];
                a[i][j] -= delta;
            }
        }
        for j in k + 1..n {
            a[k][j] = BigRational::zero();
        }
        for i in k + 1..n {
            a[i][k] = BigRational::zero();
        }
        pivots.push(pivot);
    }
    pivots
}

/// Positive minus negative pivots of an exact rational diagonalization.
pub fn signature(q: &IntersectionForm) -> i64 {
    let (pos, neg) = inertia(q);
    pos as i64 - neg as i64
}

fn inertia(q: &IntersectionForm) -> (usize, usize) {
    let pivots = diagonal_pivots(q.matrix());
    let pos = pivots.iter().filter(|p| p.is_positive()).count();
    let neg = pivots.iter().filter(|p| p.is_negative()).count();
    (pos, neg)
}

pub fn form_invariants(q: &IntersectionForm) -> FormInvariants {
    let rank = q.rank();
    let (pos, neg) = inertia(q);
    let definiteness = if rank == 0 {
        Definiteness::ZeroRank
    } else if pos == rank {
        Definiteness::Positive
    } else if neg == rank {
        Definiteness::Negative
    } else {
        Definiteness::Indefinite
    };
    FormInvariants {
        rank,
        signature: pos as i64 - neg as i64,
        parity: if q.is_even() {
            Parity::Even
        } else {
            Parity::Odd
        },
        definiteness,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonIsometryReason {
    RankDiffers,
    DeterminantDiffers,
    SignatureDiffers,
    ParityDiffers,
    /// The definite search enumerated every candidate without truncation.
    ExhaustiveSearch,
}

impl fmt::Display for NonIsometryReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NonIsometryReason::RankDiffers => "ranks differ",
            NonIsometryReason::DeterminantDiffers => "determinants differ",
            NonIsometryReason::SignatureDiffers => "signatures differ",
            NonIsometryReason::ParityDiffers => "parities differ",
            NonIsometryReason::ExhaustiveSearch => "exhaustive search found no isometry",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum IsometryVerdict {
    /// Isometric. The witness `P` satisfies `Pᵀ Q1 P = Q2`; it is absent
    /// when the decision came from the classification of indefinite forms.
    Yes {
        witness: Option<IntMatrix>,
    },
    No {
        reason: NonIsometryReason,
    },
    Undecided {
        left: FormInvariants,
        right: FormInvariants,
    },
}

impl IsometryVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, IsometryVerdict::Yes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self, IsometryVerdict::No { .. })
    }
}

/// Limits for the definite-form isometry search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DefiniteSearch {
    /// Largest absolute value allowed for an entry of a candidate congruence.
    pub coeff_bound: u32,
    /// Maximum number of search nodes (enumerated vectors plus backtracking steps).
    pub node_budget: usize,
    /// Largest rank for which the search is attempted.
    pub max_rank: usize,
}

impl Default for DefiniteSearch {
    fn default() -> Self {
        DefiniteSearch {
            coeff_bound: 4,
            node_budget: 1_000_000,
            max_rank: 8,
        }
    }
}

pub fn is_isometric(q1: &IntersectionForm, q2: &IntersectionForm) -> IsometryVerdict {
    is_isometric_with(q1, q2, &DefiniteSearch::default())
}

pub fn is_isometric_with(
    q1: &IntersectionForm,
    q2: &IntersectionForm,
    search: &DefiniteSearch,
) -> IsometryVerdict {
    let inv1 = form_invariants(q1);
    let inv2 = form_invariants(q2);
    let no = |reason| IsometryVerdict::No { reason };
    if inv1.rank != inv2.rank {
        return no(NonIsometryReason::RankDiffers);
    }
    if q1.determinant() != q2.determinant() {
        return no(NonIsometryReason::DeterminantDiffers);
    }
    if inv1.signature != inv2.signature {
        return no(NonIsometryReason::SignatureDiffers);
    }
    if inv1.parity != inv2.parity {
        return no(NonIsometryReason::ParityDiffers);
    }
    if q1 == q2 {
        return IsometryVerdict::Yes {
            witness: Some(IntMatrix::identity(q1.rank())),
        };
    }
    let undecided = || IsometryVerdict::Undecided {
        left: inv1.clone(),
        right: inv2.clone(),
    };
    match inv1.definiteness {
        Definiteness::ZeroRank => IsometryVerdict::Yes {
            witness: Some(IntMatrix::identity(0)),
        },
        // Indefinite unimodular forms are classified by rank, signature and parity.
        Definiteness::Indefinite if q1.is_unimodular() => IsometryVerdict::Yes { witness: None },
        Definiteness::Indefinite => undecided(),
        Definiteness::Positive | Definiteness::Negative => {
            if inv1.rank > search.max_rank {
                return undecided();
            }
            let (a, b) = if inv1.definiteness == Definiteness::Negative {
                (q1.negated(), q2.negated())
            } else {
                (q1.clone(), q2.clone())
            };
            match definite_isometry_search(&a, &b, search) {
                SearchResult::Found(p) => IsometryVerdict::Yes { witness: Some(p) },
                SearchResult::Exhausted => no(NonIsometryReason::ExhaustiveSearch),
                SearchResult::Truncated => undecided(),
            }
        }
    }
}

enum SearchResult {
    Found(IntMatrix),
    Exhausted,
    Truncated,
}

/// Rational quadratic completion `q(x) = Σ dᵢ (xᵢ + Σ_{j>i} μᵢⱼ xⱼ)²` of a
/// positive definite form.
struct Completion {
    diag: Vec<BigRational>,
    mu: Vec<Vec<BigRational>>,
}

impl Completion {
    fn new(q: &IntMatrix) -> Self {
        let n = q.rows();
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|r| {
                q.row(r)
                    .iter()
                    .map(|x| BigRational::from_integer(x.clone()))
                    .collect()
            })
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                a[j][i] = a[i][j].clone();
                a[i][j] = &a[i][j] / &a[i][i];
            }
            for k in i + 1..n {
                for l in k..n {
                    let delta = &a[k][i] * &a[i][l];
                    a[k][l] -= delta;
                }
            }
        }
        let diag = (0..n).map(|i| a[i][i].clone()).collect();
        let mu = a;
        Completion { diag, mu }
    }
}

struct ShortVectors<'a> {
    completion: &'a Completion,
    bound: BigRational,
    nodes: usize,
    node_budget: usize,
    out: Vec<(BigInt, Vec<BigInt>)>,
    budget_hit: bool,
}

impl ShortVectors<'_> {
    fn walk(&mut self, i: usize, x: &mut Vec<BigInt>, remaining: BigRational) {
        if self.budget_hit {
            return;
        }
        let center: BigRational = -(i + 1..x.len())
            .map(|j| &self.completion.mu[i][j] * BigRational::from_integer(x[j].clone()))
            .fold(BigRational::zero(), |acc, v| acc + v);
        let d = &self.completion.diag[i];
        let t = (&remaining / d).floor().to_integer();
        let slack = if t.is_negative() {
            BigInt::zero()
        } else {
            t.sqrt()
        } + BigInt::one();
        let lo = center.floor().to_integer() - &slack;
        let hi = center.ceil().to_integer() + &slack;
        let mut xi = lo;
        while xi <= hi {
            self.nodes += 1;
            if self.nodes > self.node_budget {
                self.budget_hit = true;
                return;
            }
            let diff = BigRational::from_integer(xi.clone()) - &center;
            let val = d * &diff * &diff;
            if val <= remaining {
                x[i] = xi.clone();
                let rest = &remaining - &val;
                if i == 0 {
                    let norm = (&self.bound - &rest).to_integer();
                    if !x.iter().all(Zero::is_zero) {
                        self.out.push((norm, x.clone()));
                    }
                } else {
                    self.walk(i - 1, x, rest);
                }
            }
            xi += 1;
        }
        x[i] = BigInt::zero();
    }
}

fn definite_isometry_search(
    q1: &IntersectionForm,
    q2: &IntersectionForm,
    search: &DefiniteSearch,
) -> SearchResult {
    let n = q1.rank();
    let target = q2.matrix();
    let max_norm = (0..n)
        .map(|i| target[(i, i)].clone())
        .max()
        .unwrap_or_else(BigInt::zero);
    let completion = Completion::new(q1.matrix());
    let mut sv = ShortVectors {
        completion: &completion,
        bound: BigRational::from_integer(max_norm.clone()),
        nodes: 0,
        node_budget: search.node_budget,
        out: Vec::new(),
        budget_hit: false,
    };
    let mut x = vec![BigInt::zero(); n];
    sv.walk(n - 1, &mut x, BigRational::from_integer(max_norm));
    if sv.budget_hit {
        return SearchResult::Truncated;
    }
    let bound = BigInt::from(search.coeff_bound);
    let mut truncated = false;
    let mut by_norm: BTreeMap<BigInt, Vec<Vec<BigInt>>> = BTreeMap::new();
    for (norm, v) in sv.out {
        if v.iter().any(|c| c.abs() > bound) {
            truncated = true;
            continue;
        }
        by_norm.entry(norm).or_default().push(v);
    }
    let mut nodes = sv.nodes;
    let mut columns: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    let found = backtrack_columns(
        q1,
        target,
        &by_norm,
        &mut columns,
        &mut nodes,
        search.node_budget,
    );
    match found {
        Backtrack::Found(p) => SearchResult::Found(p),
        Backtrack::Budget => SearchResult::Truncated,
        Backtrack::Exhausted if truncated => SearchResult::Truncated,
        Backtrack::Exhausted => SearchResult::Exhausted,
    }
}

enum Backtrack {
    Found(IntMatrix),
    Exhausted,
    Budget,
}

fn backtrack_columns(
    q1: &IntersectionForm,
    target: &IntMatrix,
    by_norm: &BTreeMap<BigInt, Vec<Vec<BigInt>>>,
    columns: &mut Vec<Vec<BigInt>>,
    nodes: &mut usize,
    budget: usize,
) -> Backtrack {
    let i = columns.len();
    let n = target.rows();
    if i == n {
        let p = IntMatrix::from_columns(columns).expect("columns have equal length");
        if p.determinant().abs().is_one() {
            return Backtrack::Found(p);
        }
        return Backtrack::Exhausted;
    }
    let Some(candidates) = by_norm.get(&target[(i, i)]) else {
        return Backtrack::Exhausted;
    };
    for v in candidates {
        *nodes += 1;
        if *nodes > budget {
            return Backtrack::Budget;
        }
        let q1v = q1.matrix().mul_vec(v);
        let compatible = columns.iter().enumerate().all(|(j, c)| {
            let ip: BigInt = c.iter().zip(&q1v).map(|(a, b)| a * b).sum();
            ip == target[(j, i)]
        });
        if !compatible {
            continue;
        }
        columns.push(v.clone());
        match backtrack_columns(q1, target, by_norm, columns, nodes, budget) {
            Backtrack::Exhausted => {}
            other => return other,
        }
        columns.pop();
    }
    Backtrack::Exhausted
}
