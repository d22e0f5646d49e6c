//! Hermitian forms over `Z[Z_d]` and `Z[Z]`: equivariant construction,
//! augmentation, nonsingularity, pointed classes and bounded congruence search.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::groupring::{GroupRingElem, GroupRingElement, LaurentElem, RingKind};
use crate::intlattice::{self, IntersectionForm, IsometryVerdict, NonIsometryReason};
use crate::matrix::IntMatrix;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HermitianError {
    #[error("matrix is not hermitian: entry ({row},{col}) is not the conjugate of ({col},{row})")]
    NotHermitian { row: usize, col: usize },
    #[error("expected {expected} entries, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("entry ({row},{col}) lives in {found}, expected {expected}")]
    RingMismatch {
        row: usize,
        col: usize,
        expected: RingKind,
        found: RingKind,
    },
    #[error("invalid deck action: {0}")]
    InvalidAction(String),
    #[error("basis vectors and their translates do not form a free basis: {0}")]
    NotFreeBasis(String),
}

/// A square matrix over a group ring.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingMatrix<R: GroupRingElement> {
    ring: R::Ring,
    size: usize,
    entries: Vec<R>,
}

impl<R: GroupRingElement> RingMatrix<R> {
    pub fn zeros(ring: R::Ring, size: usize) -> Self {
        RingMatrix {
            ring,
            size,
            entries: vec![R::zero(ring); size * size],
        }
    }

    pub fn identity(ring: R::Ring, size: usize) -> Self {
        let mut m = Self::zeros(ring, size);
        for i in 0..size {
            m[(i, i)] = R::one(ring);
        }
        m
    }

    pub fn diagonal(ring: R::Ring, entries: Vec<R>) -> Self {
        let mut m = Self::zeros(ring, entries.len());
        for (i, e) in entries.into_iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn from_rows(ring: R::Ring, rows: Vec<Vec<R>>) -> Result<Self, HermitianError> {
        let size = rows.len();
        let mut entries = Vec::with_capacity(size * size);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != size {
                return Err(HermitianError::SizeMismatch {
                    expected: size,
                    found: row.len(),
                });
            }
            for (c, e) in row.into_iter().enumerate() {
                if e.ring() != ring {
                    return Err(HermitianError::RingMismatch {
                        row: r,
                        col: c,
                        expected: R::kind(ring),
                        found: R::kind(e.ring()),
                    });
                }
                entries.push(e);
            }
        }
        Ok(RingMatrix {
            ring,
            size,
            entries,
        })
    }

    /// Integer matrix read as constants.
    pub fn from_integer(ring: R::Ring, m: &IntMatrix) -> Self {
        assert!(m.is_square());
        let n = m.rows();
        let mut out = Self::zeros(ring, n);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] = R::from_int(ring, m[(r, c)].clone());
            }
        }
        out
    }

    pub fn ring(&self) -> R::Ring {
        self.ring
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn row(&self, r: usize) -> &[R] {
        &self.entries[r * self.size..(r + 1) * self.size]
    }

    pub fn to_rows(&self) -> Vec<Vec<R>> {
        (0..self.size).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.size, other.size, "matrix product dimension mismatch");
        let n = self.size;
        let mut out = Self::zeros(self.ring, n);
        for i in 0..n {
            for k in 0..n {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.clone() * b.clone();
                    let sum = out[(i, j)].clone() + prod;
                    out[(i, j)] = sum;
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn left_mul_vec(&self, v: &[R]) -> Vec<R> {
        assert_eq!(v.len(), self.size);
        (0..self.size)
            .map(|c| {
                v.iter()
                    .enumerate()
                    .fold(R::zero(self.ring), |acc, (r, x)| {
                        acc + x.clone() * self[(r, c)].clone()
                    })
            })
            .collect()
    }

    pub fn conjugate_transpose(&self) -> Self {
        let n = self.size;
        let mut out = Self::zeros(self.ring, n);
        for r in 0..n {
            for c in 0..n {
                out[(c, r)] = self[(r, c)].conjugate();
            }
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        self.first_non_hermitian_entry().is_none()
    }

    fn first_non_hermitian_entry(&self) -> Option<(usize, usize)> {
        (0..self.size)
            .flat_map(|r| (0..=r).map(move |c| (r, c)))
            .find(|&(r, c)| self[(r, c)] != self[(c, r)].conjugate())
    }

    /// `P · self · P*`.
    pub fn congruent_by(&self, p: &Self) -> Self {
        p.mul(self).mul(&p.conjugate_transpose())
    }

    /// Entrywise augmentation `T ↦ 1`.
    pub fn augment(&self) -> IntMatrix {
        let n = self.size;
        let mut out = IntMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] = self[(r, c)].augment();
            }
        }
        out
    }

    /// Division-free determinant by Laplace expansion with memoization over
    /// column subsets (`O(n·2ⁿ)` ring products). `Z[Z_d]` has zero divisors,
    /// so fraction-free elimination is not available in general.
    pub fn determinant(&self) -> R {
        let n = self.size;
        if n == 0 {
            return R::one(self.ring);
        }
        assert!(
            n <= 20,
            "determinant of a {n}x{n} ring matrix is out of range"
        );
        // minors[mask] = det of rows (n - popcount(mask))..n against the columns in mask.
        let mut minors: Vec<R> = vec![R::zero(self.ring); 1 << n];
        minors[0] = R::one(self.ring);
        for mask in 1usize..(1 << n) {
            let k = mask.count_ones() as usize;
            let row = n - k;
            let mut acc = R::zero(self.ring);
            let mut sign_positive = true;
            for c in 0..n {
                if mask & (1 << c) == 0 {
                    continue;
                }
                let entry = &self[(row, c)];
                let sub = &minors[mask & !(1 << c)];
                if !entry.is_zero() && !sub.is_zero() {
                    let term = entry.clone() * sub.clone();
                    acc = if sign_positive {
                        acc + term
                    } else {
                        acc - term
                    };
                }
                sign_positive = !sign_positive;
            }
            minors[mask] = acc;
        }
        minors[(1 << n) - 1].clone()
    }

    pub fn is_invertible(&self) -> bool {
        self.determinant().is_unit()
    }
}

impl<R: GroupRingElement> std::ops::Index<(usize, usize)> for RingMatrix<R> {
    type Output = R;
    fn index(&self, (r, c): (usize, usize)) -> &R {
        &self.entries[r * self.size + c]
    }
}

impl<R: GroupRingElement> std::ops::IndexMut<(usize, usize)> for RingMatrix<R> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut R {
        &mut self.entries[r * self.size + c]
    }
}

impl<R: GroupRingElement> fmt::Display for RingMatrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.size {
            if r > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for c in 0..self.size {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(r, c)])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl<R: GroupRingElement> fmt::Debug for RingMatrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} over {}", R::kind(self.ring))
    }
}

/// A matrix `λ` over a group ring with `λ* = λ`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HermitianForm<R: GroupRingElement> {
    matrix: RingMatrix<R>,
}

impl<R: GroupRingElement> HermitianForm<R> {
    pub fn new(matrix: RingMatrix<R>) -> Result<Self, HermitianError> {
        if let Some((row, col)) = matrix.first_non_hermitian_entry() {
            return Err(HermitianError::NotHermitian { row, col });
        }
        Ok(HermitianForm { matrix })
    }

    pub fn from_rows(ring: R::Ring, rows: Vec<Vec<R>>) -> Result<Self, HermitianError> {
        Self::new(RingMatrix::from_rows(ring, rows)?)
    }

    pub fn matrix(&self) -> &RingMatrix<R> {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.size
    }

    pub fn ring(&self) -> R::Ring {
        self.matrix.ring
    }

    pub fn determinant(&self) -> R {
        self.matrix.determinant()
    }

    /// `λ(x, y) = x · λ · y*` for row vectors `x`, `y`.
    pub fn evaluate(&self, x: &[R], y: &[R]) -> R {
        let xl = self.matrix.left_mul_vec(x);
        xl.into_iter()
            .zip(y)
            .fold(R::zero(self.ring()), |acc, (a, b)| acc + a * b.conjugate())
    }

    pub fn block_sum(&self, other: &Self) -> Self {
        let n = self.size();
        let m = other.size();
        let mut out = RingMatrix::zeros(self.ring(), n + m);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] = self.matrix[(r, c)].clone();
            }
        }
        for r in 0..m {
            for c in 0..m {
                out[(n + r, n + c)] = other.matrix[(r, c)].clone();
            }
        }
        HermitianForm { matrix: out }
    }

    /// `P · λ · P*`; hermitian for any `P`.
    pub fn congruent_by(&self, p: &RingMatrix<R>) -> Self {
        HermitianForm {
            matrix: self.matrix.congruent_by(p),
        }
    }
}

impl<R: GroupRingElement> fmt::Display for HermitianForm<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.matrix.fmt(f)
    }
}

impl<R: GroupRingElement> fmt::Debug for HermitianForm<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.matrix.fmt(f)
    }
}

/// A hermitian form with a distinguished class `z`, written as a row vector.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PointedHermitianForm<R: GroupRingElement> {
    form: HermitianForm<R>,
    point: Vec<R>,
}

impl<R: GroupRingElement> PointedHermitianForm<R> {
    pub fn new(form: HermitianForm<R>, point: Vec<R>) -> Result<Self, HermitianError> {
        if point.len() != form.size() {
            return Err(HermitianError::SizeMismatch {
                expected: form.size(),
                found: point.len(),
            });
        }
        Ok(PointedHermitianForm { form, point })
    }

    pub fn form(&self) -> &HermitianForm<R> {
        &self.form
    }

    pub fn point(&self) -> &[R] {
        &self.point
    }

    /// gcd of the augmented class (0 for a class augmenting to zero).
    pub fn augmented_divisibility(&self) -> BigInt {
        self.point
            .iter()
            .fold(BigInt::zero(), |acc, x| acc.gcd(&x.augment()))
    }

    /// Primitive in the computable sense used here: the augmented class has gcd 1.
    pub fn is_primitive(&self) -> bool {
        self.augmented_divisibility().is_one()
    }

    /// `λ(z, z)`.
    pub fn self_pairing(&self) -> R {
        self.form.evaluate(&self.point, &self.point)
    }
}

/// A symmetric integer form with an integer deck action `T` of order `d`
/// preserving it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivariantIntegerForm {
    form: IntMatrix,
    action: IntMatrix,
    order: usize,
}

impl EquivariantIntegerForm {
    pub fn new(form: IntMatrix, action: IntMatrix, order: usize) -> Result<Self, HermitianError> {
        let bad = |msg: String| Err(HermitianError::InvalidAction(msg));
        if order == 0 {
            return bad("order must be positive".into());
        }
        if !form.is_symmetric() {
            return bad("form is not symmetric".into());
        }
        if action.rows() != form.rows() || action.cols() != form.cols() {
            return bad(format!(
                "action is {}x{} but the form is {}x{}",
                action.rows(),
                action.cols(),
                form.rows(),
                form.cols()
            ));
        }
        if action.transpose().mul(&form).mul(&action) != form {
            return bad("action does not preserve the form".into());
        }
        if action.pow(order as u64) != IntMatrix::identity(form.rows()) {
            return bad(format!("action does not satisfy T^{order} = 1"));
        }
        Ok(EquivariantIntegerForm {
            form,
            action,
            order,
        })
    }

    pub fn form(&self) -> &IntMatrix {
        &self.form
    }

    pub fn action(&self) -> &IntMatrix {
        &self.action
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

/// Equivariant intersection form on a free `Z[Z_d]`-basis: entry `(i, j)` is
/// `Σ_k Q(bᵢ, T^k bⱼ) T^{-k}`.
pub fn build_equivariant_form(
    e: &EquivariantIntegerForm,
    basis: &[Vec<BigInt>],
) -> Result<HermitianForm<GroupRingElem>, HermitianError> {
    let n = e.form.rows();
    let d = e.order;
    let m = basis.len();
    if let Some(v) = basis.iter().find(|v| v.len() != n) {
        return Err(HermitianError::SizeMismatch {
            expected: n,
            found: v.len(),
        });
    }
    if m * d != n {
        return Err(HermitianError::NotFreeBasis(format!(
            "{m} basis vectors times order {d} does not equal rank {n}"
        )));
    }
    // translates[j][k] = T^k bⱼ
    let translates: Vec<Vec<Vec<BigInt>>> = basis
        .iter()
        .map(|b| {
            let mut orbit = Vec::with_capacity(d);
            let mut v = b.clone();
            for _ in 0..d {
                orbit.push(v.clone());
                v = e.action.mul_vec(&v);
            }
            orbit
        })
        .collect();
    let all: Vec<Vec<BigInt>> = translates.iter().flatten().cloned().collect();
    if n > 0
        && IntMatrix::from_columns(&all)
            .expect("equal lengths")
            .determinant()
            .is_zero()
    {
        return Err(HermitianError::NotFreeBasis(
            "translates are linearly dependent".into(),
        ));
    }
    let mut out = RingMatrix::zeros(d, m);
    for i in 0..m {
        for j in 0..m {
            let mut coeffs = vec![BigInt::zero(); d];
            for (k, tbj) in translates[j].iter().enumerate() {
                coeffs[(d - k) % d] += e.form.bilinear(&basis[i], tbj);
            }
            out[(i, j)] = GroupRingElem::new(coeffs);
        }
    }
    let form = HermitianForm::new(out)?;
    Ok(form)
}

/// Set `T = 1` entrywise. The result is symmetric but need not be unimodular.
pub fn augment_form<R: GroupRingElement>(lambda: &HermitianForm<R>) -> IntersectionForm {
    IntersectionForm::symmetric(lambda.matrix.augment())
        .expect("augmentation of a hermitian form is symmetric")
}

/// Whether the determinant is a unit of the ring.
pub fn is_nonsingular<R: GroupRingElement>(lambda: &HermitianForm<R>) -> bool {
    lambda.matrix.is_invertible()
}

/// `Q` read as a constant hermitian form.
pub fn extend_integer_form<R: GroupRingElement>(
    q: &IntersectionForm,
    ring: R::Ring,
) -> HermitianForm<R> {
    HermitianForm {
        matrix: RingMatrix::from_integer(ring, q.matrix()),
    }
}

/// Entrywise augmentation of a congruence `F`, giving `F(1)`.
pub fn augmented_isometry<R: GroupRingElement>(p: &RingMatrix<R>) -> IntMatrix {
    p.augment()
}

/// Budget and generator bounds for [`congruence_search`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Maximum number of distinct states expanded.
    pub node_budget: usize,
    /// Transvection coefficients range over `±1..=±coeff_bound`.
    pub coeff_bound: u32,
    /// Laurent transvection exponents range over `-exponent_bound..=exponent_bound`.
    pub exponent_bound: u32,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            node_budget: 1_000_000,
            coeff_bound: 2,
            exponent_bound: 2,
        }
    }
}

impl SearchConfig {
    pub fn with_budget(node_budget: usize) -> Self {
        SearchConfig {
            node_budget,
            ..Self::default()
        }
    }
}

/// Why two (pointed) forms cannot be congruent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Refutation {
    SizeMismatch {
        left: usize,
        right: usize,
    },
    /// The augmented integer forms are not isometric.
    AugmentationNotIsometric {
        reason: NonIsometryReason,
    },
    /// `det λ1` is not `u·ū·det λ0` for any unit `u`. `modulus` is the
    /// quotient ring `Z[Z_e]` (0 for `Z[Z]`) where the determinants differ;
    /// every unit `u` there has `u·ū = 1`.
    DeterminantClass {
        modulus: usize,
        left: String,
        right: String,
    },
    /// `λ(z, z)` differs between the pointed forms.
    PointedSelfPairing {
        left: String,
        right: String,
    },
    /// The augmented classes have different divisibility.
    PointedDivisibility {
        left: String,
        right: String,
    },
}

impl fmt::Display for Refutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Refutation::SizeMismatch { left, right } => write!(f, "sizes differ ({left} vs {right})"),
            Refutation::AugmentationNotIsometric { reason } => {
                write!(f, "augmented forms are not isometric over Z: {reason}")
            }
            Refutation::DeterminantClass { modulus: 0, left, right } => {
                write!(f, "determinants {left} and {right} differ, and u·ū = 1 for every unit of Z[Z]")
            }
            Refutation::DeterminantClass { modulus, left, right } => write!(
                f,
                "determinants reduce to {left} and {right} in Z[Z_{modulus}], where u·ū = 1 for every unit"
            ),
            Refutation::PointedSelfPairing { left, right } => {
                write!(f, "λ(z, z) differs: {left} vs {right}")
            }
            Refutation::PointedDivisibility { left, right } => {
                write!(f, "augmented classes have divisibility {left} vs {right}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CongruenceOutcome<R: GroupRingElement> {
    /// `P · λ0 · P* = λ1` with `P` invertible (and `z1 · P = z0` when pointed).
    Found(RingMatrix<R>),
    NotFoundWithinBudget {
        nodes: usize,
    },
    Disproven(Refutation),
}

impl<R: GroupRingElement> CongruenceOutcome<R> {
    pub fn is_found(&self) -> bool {
        matches!(self, CongruenceOutcome::Found(_))
    }

    pub fn is_disproven(&self) -> bool {
        matches!(self, CongruenceOutcome::Disproven(_))
    }

    pub fn witness(&self) -> Option<&RingMatrix<R>> {
        match self {
            CongruenceOutcome::Found(p) => Some(p),
            _ => None,
        }
    }
}

/// Ring-specific determinant-class test, kept outside the generic trait
/// because the reductions it uses are particular to each ring.
pub trait DeterminantClass: GroupRingElement {
    /// `Some(refutation)` when no unit `u` can satisfy `right = u·ū·left`.
    fn refute_determinant_class(left: &Self, right: &Self) -> Option<Refutation>;
}

impl DeterminantClass for LaurentElem {
    fn refute_determinant_class(left: &Self, right: &Self) -> Option<Refutation> {
        // Units are ±t^k, and (±t^k)(±t^-k) = 1.
        (left != right).then(|| Refutation::DeterminantClass {
            modulus: 0,
            left: left.to_string(),
            right: right.to_string(),
        })
    }
}

/// Orders whose cyclic group rings have only the trivial units `±T^k`.
const TRIVIAL_UNIT_ORDERS: [usize; 5] = [1, 2, 3, 4, 6];

impl DeterminantClass for GroupRingElem {
    fn refute_determinant_class(left: &Self, right: &Self) -> Option<Refutation> {
        // The image of u·ū in Z[Z_e] is v·v̄ for a unit v of Z[Z_e]; for the
        // orders below that is always 1.
        let d = left.order();
        TRIVIAL_UNIT_ORDERS
            .iter()
            .rev()
            .filter(|&&e| d.is_multiple_of(e))
            .find_map(|&e| {
                let (l, r) = (left.reduce(e), right.reduce(e));
                (l != r).then(|| Refutation::DeterminantClass {
                    modulus: e,
                    left: l.to_string(),
                    right: r.to_string(),
                })
            })
    }
}

fn invariant_refutation<R: DeterminantClass>(
    l0: &HermitianForm<R>,
    l1: &HermitianForm<R>,
) -> Option<Refutation> {
    if l0.size() != l1.size() {
        return Some(Refutation::SizeMismatch {
            left: l0.size(),
            right: l1.size(),
        });
    }
    if let IsometryVerdict::No { reason } =
        intlattice::is_isometric(&augment_form(l0), &augment_form(l1))
    {
        return Some(Refutation::AugmentationNotIsometric { reason });
    }
    R::refute_determinant_class(&l0.determinant(), &l1.determinant())
}

/// Elementary generator `G`. The search maps a form to `G·λ·G*` and a row
/// vector to `v·G⁻¹`, both by row and column operations.
#[derive(Debug, Clone)]
enum Elementary<R: GroupRingElement> {
    /// Row `i` multiplied by the unit `u`.
    Scale {
        i: usize,
        u: R,
        u_inv: R,
    },
    Swap {
        i: usize,
        j: usize,
    },
    /// `I + a·e_ij`.
    Transvect {
        i: usize,
        j: usize,
        a: R,
    },
}

impl<R: GroupRingElement> Elementary<R> {
    fn congruence(&self, m: &RingMatrix<R>) -> RingMatrix<R> {
        let n = m.size;
        let mut out = m.clone();
        match self {
            Elementary::Scale { i, u, .. } => {
                let ub = u.conjugate();
                for c in 0..n {
                    out[(*i, c)] = u.clone() * out[(*i, c)].clone();
                }
                for r in 0..n {
                    out[(r, *i)] = out[(r, *i)].clone() * ub.clone();
                }
            }
            Elementary::Swap { i, j } => {
                out = self.left_apply(&out);
                for r in 0..n {
                    out.entries.swap(r * n + i, r * n + j);
                }
            }
            Elementary::Transvect { i, j, a } => {
                out = self.left_apply(&out);
                let ab = a.conjugate();
                for r in 0..n {
                    let add = out[(r, *j)].clone() * ab.clone();
                    out[(r, *i)] = out[(r, *i)].clone() + add;
                }
            }
        }
        out
    }

    /// `G · m`.
    fn left_apply(&self, m: &RingMatrix<R>) -> RingMatrix<R> {
        let n = m.size;
        let mut out = m.clone();
        match self {
            Elementary::Scale { i, u, .. } => {
                for c in 0..n {
                    out[(*i, c)] = u.clone() * out[(*i, c)].clone();
                }
            }
            Elementary::Swap { i, j } => {
                for c in 0..n {
                    out.entries.swap(i * n + c, j * n + c);
                }
            }
            Elementary::Transvect { i, j, a } => {
                for c in 0..n {
                    let add = a.clone() * out[(*j, c)].clone();
                    out[(*i, c)] = out[(*i, c)].clone() + add;
                }
            }
        }
        out
    }

    /// `v · G⁻¹`.
    fn act_inverse(&self, v: &[R]) -> Vec<R> {
        let mut out = v.to_vec();
        match self {
            Elementary::Scale { i, u_inv, .. } => out[*i] = out[*i].clone() * u_inv.clone(),
            Elementary::Swap { i, j } => out.swap(*i, *j),
            Elementary::Transvect { i, j, a } => {
                out[*j] = out[*j].clone() - out[*i].clone() * a.clone();
            }
        }
        out
    }
}

fn generators<R: GroupRingElement>(
    ring: R::Ring,
    n: usize,
    cfg: &SearchConfig,
) -> Vec<Elementary<R>> {
    let one = BigInt::one();
    let mut out = Vec::new();
    // Signed monomial scalings of a single coordinate.
    for i in 0..n {
        for exp in [1i64, -1] {
            out.push(Elementary::Scale {
                i,
                u: R::monomial(ring, one.clone(), exp),
                u_inv: R::monomial(ring, one.clone(), -exp),
            });
        }
        let neg = R::from_int(ring, -one.clone());
        out.push(Elementary::Scale {
            i,
            u: neg.clone(),
            u_inv: neg,
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push(Elementary::Swap { i, j });
        }
    }
    // Transvections E_ij(c·T^k).
    let exponents = R::search_exponents(ring, cfg.exponent_bound);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for &k in &exponents {
                for c in 1..=cfg.coeff_bound as i64 {
                    for c in [c, -c] {
                        out.push(Elementary::Transvect {
                            i,
                            j,
                            a: R::monomial(ring, BigInt::from(c), k),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Search for `P` with `P · λ0 · P* = λ1`.
///
/// Invariants are checked first (augmented isometry class, determinant class);
/// after that a breadth-first search over products of elementary generators
/// runs until `cfg.node_budget` states have been expanded. Witnesses are
/// verified by exact multiplication before being returned.
pub fn congruence_search<R: DeterminantClass>(
    l0: &HermitianForm<R>,
    l1: &HermitianForm<R>,
    cfg: &SearchConfig,
) -> CongruenceOutcome<R> {
    if let Some(r) = invariant_refutation(l0, l1) {
        return CongruenceOutcome::Disproven(r);
    }
    bfs(l0, l1, None, cfg)
}

/// As [`congruence_search`], additionally requiring `z1 · P = z0`, so that
/// `x ↦ x·P` is an isometry from `λ1` to `λ0` carrying `z1` to `z0`.
pub fn pointed_congruence_search<R: DeterminantClass>(
    p0: &PointedHermitianForm<R>,
    p1: &PointedHermitianForm<R>,
    cfg: &SearchConfig,
) -> CongruenceOutcome<R> {
    if let Some(r) = invariant_refutation(&p0.form, &p1.form) {
        return CongruenceOutcome::Disproven(r);
    }
    let (g0, g1) = (p0.augmented_divisibility(), p1.augmented_divisibility());
    if g0 != g1 {
        return CongruenceOutcome::Disproven(Refutation::PointedDivisibility {
            left: g0.to_string(),
            right: g1.to_string(),
        });
    }
    let (s0, s1) = (p0.self_pairing(), p1.self_pairing());
    if s0 != s1 {
        return CongruenceOutcome::Disproven(Refutation::PointedSelfPairing {
            left: s0.to_string(),
            right: s1.to_string(),
        });
    }
    bfs(&p0.form, &p1.form, Some((&p0.point, &p1.point)), cfg)
}

/// Verifies a congruence witness exactly.
pub fn verify_witness<R: GroupRingElement>(
    l0: &HermitianForm<R>,
    l1: &HermitianForm<R>,
    points: Option<(&[R], &[R])>,
    p: &RingMatrix<R>,
) -> bool {
    if p.size() != l0.size() || l0.size() != l1.size() || !p.is_invertible() {
        return false;
    }
    if l0.matrix.congruent_by(p) != l1.matrix {
        return false;
    }
    match points {
        Some((z0, z1)) => p.left_mul_vec(z1) == z0,
        None => true,
    }
}

// State: the form P·λ0·P* and, when pointed, the row vector z0·P⁻¹.
// Applying a generator G maps P to G·P, so the form becomes G·λ·G* and the
// vector becomes v·G⁻¹. Reaching (λ1, z1) means z1·P = z0. P itself is only
// rebuilt for the node that reaches the target.
fn bfs<R: GroupRingElement>(
    l0: &HermitianForm<R>,
    l1: &HermitianForm<R>,
    points: Option<(&Vec<R>, &Vec<R>)>,
    cfg: &SearchConfig,
) -> CongruenceOutcome<R> {
    type State<R> = (RingMatrix<R>, Option<Vec<R>>);
    let ring = l0.ring();
    let n = l0.size();
    let start: State<R> = (l0.matrix.clone(), points.map(|(z0, _)| z0.clone()));
    let target: State<R> = (l1.matrix.clone(), points.map(|(_, z1)| z1.clone()));
    let gens = generators::<R>(ring, n, cfg);
    let pts = points.map(|(a, b)| (a.as_slice(), b.as_slice()));

    // Per node: (parent, generator index); the root has no parent.
    let mut trail: Vec<Option<(usize, usize)>> = vec![None];
    let mut states: Vec<State<R>> = vec![start.clone()];
    let mut seen: HashSet<State<R>> = HashSet::new();
    seen.insert(start.clone());
    let witness = |trail: &[Option<(usize, usize)>], mut node: usize| {
        let mut path = Vec::new();
        while let Some((parent, g)) = trail[node] {
            path.push(g);
            node = parent;
        }
        let p = path
            .iter()
            .rev()
            .fold(RingMatrix::identity(ring, n), |p, &g| {
                gens[g].left_apply(&p)
            });
        assert!(
            verify_witness(l0, l1, pts, &p),
            "search produced an invalid witness"
        );
        p
    };
    if start == target {
        return CongruenceOutcome::Found(witness(&trail, 0));
    }
    let mut next_node = 0usize;
    while next_node < states.len() {
        if next_node >= cfg.node_budget {
            return CongruenceOutcome::NotFoundWithinBudget { nodes: next_node };
        }
        let node = next_node;
        next_node += 1;
        for (gi, g) in gens.iter().enumerate() {
            let state = &states[node];
            let next: State<R> = (
                g.congruence(&state.0),
                state.1.as_ref().map(|v| g.act_inverse(v)),
            );
            if seen.contains(&next) {
                continue;
            }
            seen.insert(next.clone());
            trail.push(Some((node, gi)));
            let reached = next == target;
            states.push(next);
            if reached {
                return CongruenceOutcome::Found(witness(&trail, trail.len() - 1));
            }
        }
    }
    CongruenceOutcome::NotFoundWithinBudget { nodes: next_node }
}

/// JSON representation: ring tag, size and entries (coefficient arrays for
/// `Z[Z_d]`, `[exponent, coefficient]` pair lists for `Z[Z]`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "ring", rename_all = "lowercase")]
pub enum FormJson {
    Cyclic {
        d: usize,
        size: usize,
        entries: Vec<Vec<GroupRingElem>>,
    },
    Laurent {
        size: usize,
        entries: Vec<Vec<LaurentElem>>,
    },
}

impl From<&RingMatrix<GroupRingElem>> for FormJson {
    fn from(m: &RingMatrix<GroupRingElem>) -> Self {
        FormJson::Cyclic {
            d: m.ring(),
            size: m.size(),
            entries: m.to_rows(),
        }
    }
}

impl From<&RingMatrix<LaurentElem>> for FormJson {
    fn from(m: &RingMatrix<LaurentElem>) -> Self {
        FormJson::Laurent {
            size: m.size(),
            entries: m.to_rows(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormJsonError {
    #[error("declared size {declared} does not match {actual} rows")]
    SizeMismatch { declared: usize, actual: usize },
    #[error("expected a {expected} form")]
    WrongRing { expected: &'static str },
    #[error(transparent)]
    Hermitian(#[from] HermitianError),
}

impl FormJson {
    pub fn into_cyclic(self) -> Result<RingMatrix<GroupRingElem>, FormJsonError> {
        match self {
            FormJson::Cyclic { d, size, entries } => {
                if entries.len() != size {
                    return Err(FormJsonError::SizeMismatch {
                        declared: size,
                        actual: entries.len(),
                    });
                }
                Ok(RingMatrix::from_rows(d, entries)?)
            }
            FormJson::Laurent { .. } => Err(FormJsonError::WrongRing { expected: "cyclic" }),
        }
    }

    pub fn into_laurent(self) -> Result<RingMatrix<LaurentElem>, FormJsonError> {
        match self {
            FormJson::Laurent { size, entries } => {
                if entries.len() != size {
                    return Err(FormJsonError::SizeMismatch {
                        declared: size,
                        actual: entries.len(),
                    });
                }
                Ok(RingMatrix::from_rows((), entries)?)
            }
            FormJson::Cyclic { .. } => Err(FormJsonError::WrongRing {
                expected: "laurent",
            }),
        }
    }
}
