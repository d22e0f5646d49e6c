//! Group rings `Z[Z_d]` and `Z[Z] = Z[t, t⁻¹]` with the involution `T ↦ T⁻¹`.
//!
//! `Z[Z_d]` elements are dense coefficient vectors of length `d`; Laurent
//! polynomials are sparse maps from exponent to nonzero coefficient.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::matrix::IntMatrix;

/// Which group ring a value lives in, for serialization and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "ring", rename_all = "lowercase")]
pub enum RingKind {
    Cyclic { d: usize },
    Laurent,
}

impl fmt::Display for RingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingKind::Cyclic { d } => write!(f, "Z[Z_{d}]"),
            RingKind::Laurent => write!(f, "Z[Z]"),
        }
    }
}

/// Common interface of the two group rings.
///
/// `Ring` is the runtime parameter needed to build constants (the group order
/// for `Z[Z_d]`, nothing for Laurent polynomials). Operations between elements
/// of different rings panic.
pub trait GroupRingElement:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Eq
    + Hash
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    type Ring: Copy + fmt::Debug + PartialEq + Eq + Hash + Send + Sync;

    fn ring(&self) -> Self::Ring;
    fn kind(ring: Self::Ring) -> RingKind;
    fn zero(ring: Self::Ring) -> Self;
    fn from_int(ring: Self::Ring, c: BigInt) -> Self;
    /// `c · T^exp`; negative exponents are allowed in both rings.
    fn monomial(ring: Self::Ring, c: BigInt, exp: i64) -> Self;
    fn is_zero(&self) -> bool;
    /// Apply `T ↦ T⁻¹`.
    fn conjugate(&self) -> Self;
    /// Set `T = 1`.
    fn augment(&self) -> BigInt;
    fn is_unit(&self) -> bool;
    fn inverse(&self) -> Option<Self>;
    /// Exponents used for monomial generators in congruence searches.
    fn search_exponents(ring: Self::Ring, bound: u32) -> Vec<i64>;

    fn one(ring: Self::Ring) -> Self {
        Self::from_int(ring, BigInt::one())
    }
}

/// An element of `Z[Z_d] = Z[T]/(T^d - 1)`; `coeffs[k]` is the coefficient of `T^k`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupRingElem {
    coeffs: Vec<BigInt>,
}

impl GroupRingElem {
    pub fn new<I: Into<BigInt>>(coeffs: impl IntoIterator<Item = I>) -> Self {
        let coeffs: Vec<BigInt> = coeffs.into_iter().map(Into::into).collect();
        assert!(!coeffs.is_empty(), "Z[Z_d] needs d >= 1");
        GroupRingElem { coeffs }
    }

    /// The generator `T` of `Z[Z_d]`.
    pub fn generator(d: usize) -> Self {
        Self::monomial(d, BigInt::one(), 1)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Multiplication-by-`self` as a `d×d` integer matrix acting on
    /// coefficient vectors: entry `(k, i)` is the coefficient of `T^{k-i}`.
    pub fn circulant(&self) -> IntMatrix {
        let d = self.order();
        let mut m = IntMatrix::zeros(d, d);
        for k in 0..d {
            for i in 0..d {
                m[(k, i)] = self.coeffs[(k + d - i) % d].clone();
            }
        }
        m
    }

    /// Image under `Z[Z_d] → Z[Z_e]`, `T ↦ T`, for `e` dividing `d`.
    pub fn reduce(&self, e: usize) -> GroupRingElem {
        assert!(
            e > 0 && self.order().is_multiple_of(e),
            "{e} does not divide {}",
            self.order()
        );
        let mut coeffs = vec![BigInt::zero(); e];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[k % e] += c;
        }
        GroupRingElem { coeffs }
    }

    fn check_same_ring(&self, other: &Self) {
        assert_eq!(
            self.order(),
            other.order(),
            "mixing Z[Z_d] elements with different d"
        );
    }
}

impl GroupRingElement for GroupRingElem {
    type Ring = usize;

    fn ring(&self) -> usize {
        self.order()
    }

    fn kind(d: usize) -> RingKind {
        RingKind::Cyclic { d }
    }

    fn zero(d: usize) -> Self {
        assert!(d > 0, "Z[Z_d] needs d >= 1");
        GroupRingElem {
            coeffs: vec![BigInt::zero(); d],
        }
    }

    fn from_int(d: usize, c: BigInt) -> Self {
        let mut z = Self::zero(d);
        z.coeffs[0] = c;
        z
    }

    fn monomial(d: usize, c: BigInt, exp: i64) -> Self {
        let mut z = Self::zero(d);
        z.coeffs[exp.rem_euclid(d as i64) as usize] = c;
        z
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn conjugate(&self) -> Self {
        let d = self.order();
        GroupRingElem {
            coeffs: (0..d).map(|k| self.coeffs[(d - k) % d].clone()).collect(),
        }
    }

    fn augment(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    /// Invertible iff the circulant matrix of multiplication has determinant ±1.
    fn is_unit(&self) -> bool {
        self.circulant().determinant().abs().is_one()
    }

    fn inverse(&self) -> Option<Self> {
        // The inverse is the first column of the inverse circulant.
        let inv = self.circulant().integer_inverse()?;
        Some(GroupRingElem {
            coeffs: inv.column(0),
        })
    }

    fn search_exponents(d: usize, _bound: u32) -> Vec<i64> {
        (0..d as i64).collect()
    }
}

impl Add for GroupRingElem {
    type Output = Self;
    fn add(self, other: Self) -> Self {
        &self + &other
    }
}

impl Add for &GroupRingElem {
    type Output = GroupRingElem;
    fn add(self, other: Self) -> GroupRingElem {
        self.check_same_ring(other);
        GroupRingElem {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for GroupRingElem {
    type Output = Self;
    fn sub(self, other: Self) -> Self {
        &self - &other
    }
}

impl Sub for &GroupRingElem {
    type Output = GroupRingElem;
    fn sub(self, other: Self) -> GroupRingElem {
        self.check_same_ring(other);
        GroupRingElem {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for GroupRingElem {
    type Output = Self;
    fn mul(self, other: Self) -> Self {
        &self * &other
    }
}

impl Mul for &GroupRingElem {
    type Output = GroupRingElem;
    fn mul(self, other: Self) -> GroupRingElem {
        self.check_same_ring(other);
        let d = self.order();
        let mut coeffs = vec![BigInt::zero(); d];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[(i + j) % d] += a * b;
            }
        }
        GroupRingElem { coeffs }
    }
}

impl Neg for GroupRingElem {
    type Output = Self;
    fn neg(self) -> Self {
        GroupRingElem {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl fmt::Display for GroupRingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_polynomial(
            f,
            self.coeffs.iter().enumerate().map(|(k, c)| (k as i64, c)),
            'T',
        )
    }
}

impl fmt::Debug for GroupRingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} in Z[Z_{}]", self.order())
    }
}

impl Serialize for GroupRingElem {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        crate::bigint_serde::vec::serialize(&self.coeffs, serializer)
    }
}

impl<'de> Deserialize<'de> for GroupRingElem {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let coeffs = crate::bigint_serde::vec::deserialize(deserializer)?;
        if coeffs.is_empty() {
            return Err(serde::de::Error::custom(
                "Z[Z_d] element needs at least one coefficient",
            ));
        }
        Ok(GroupRingElem { coeffs })
    }
}

/// A Laurent polynomial in `t` with integer coefficients.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentElem {
    terms: BTreeMap<i64, BigInt>,
}

impl LaurentElem {
    pub fn from_terms<I: Into<BigInt>>(terms: impl IntoIterator<Item = (i64, I)>) -> Self {
        let mut out = LaurentElem::default();
        for (e, c) in terms {
            out.add_term(e, c.into());
        }
        out
    }

    pub fn t() -> Self {
        Self::monomial((), BigInt::one(), 1)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, exp: i64) -> BigInt {
        self.terms.get(&exp).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn min_exponent(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    fn add_term(&mut self, exp: i64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }
}

impl GroupRingElement for LaurentElem {
    type Ring = ();

    fn ring(&self) {}

    fn kind(_: ()) -> RingKind {
        RingKind::Laurent
    }

    fn zero(_: ()) -> Self {
        LaurentElem::default()
    }

    fn from_int(_: (), c: BigInt) -> Self {
        Self::monomial((), c, 0)
    }

    fn monomial(_: (), c: BigInt, exp: i64) -> Self {
        let mut out = LaurentElem::default();
        out.add_term(exp, c);
        out
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn conjugate(&self) -> Self {
        LaurentElem {
            terms: self.terms.iter().map(|(e, c)| (-e, c.clone())).collect(),
        }
    }

    fn augment(&self) -> BigInt {
        self.terms.values().sum()
    }

    /// The units of `Z[t, t⁻¹]` are exactly `±t^k`.
    fn is_unit(&self) -> bool {
        self.terms.len() == 1 && self.terms.values().all(|c| c.abs().is_one())
    }

    fn inverse(&self) -> Option<Self> {
        if !self.is_unit() {
            return None;
        }
        let (e, c) = self.terms.iter().next()?;
        Some(Self::monomial((), c.clone(), -e))
    }

    fn search_exponents(_: (), bound: u32) -> Vec<i64> {
        let b = bound as i64;
        (-b..=b).collect()
    }
}

impl Add for LaurentElem {
    type Output = Self;
    fn add(mut self, other: Self) -> Self {
        for (e, c) in other.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl Add for &LaurentElem {
    type Output = LaurentElem;
    fn add(self, other: Self) -> LaurentElem {
        self.clone() + other.clone()
    }
}

impl Sub for LaurentElem {
    type Output = Self;
    fn sub(self, other: Self) -> Self {
        self + (-other)
    }
}

impl Sub for &LaurentElem {
    type Output = LaurentElem;
    fn sub(self, other: Self) -> LaurentElem {
        self.clone() - other.clone()
    }
}

impl Mul for LaurentElem {
    type Output = Self;
    fn mul(self, other: Self) -> Self {
        &self * &other
    }
}

impl Mul for &LaurentElem {
    type Output = LaurentElem;
    fn mul(self, other: Self) -> LaurentElem {
        let mut out = LaurentElem::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }
}

impl Neg for LaurentElem {
    type Output = Self;
    fn neg(self) -> Self {
        LaurentElem {
            terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect(),
        }
    }
}

impl fmt::Display for LaurentElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_polynomial(f, self.terms.iter().map(|(e, c)| (*e, c)), 't')
    }
}

impl fmt::Debug for LaurentElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Serialized as a list of `[exponent, coefficient]` pairs in increasing exponent order.
impl Serialize for LaurentElem {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(i64, crate::bigint_serde::Wrapped)> = self
            .terms
            .iter()
            .map(|(e, c)| (*e, crate::bigint_serde::Wrapped(c.clone())))
            .collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LaurentElem {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let pairs: Vec<(i64, crate::bigint_serde::Wrapped)> = Vec::deserialize(deserializer)?;
        Ok(LaurentElem::from_terms(
            pairs.into_iter().map(|(e, c)| (e, c.0)),
        ))
    }
}

/// Renders `3 + 2T - T^2` / `1 - t^-2`; zero renders as `0`.
fn write_polynomial<'a>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (i64, &'a BigInt)>,
    var: char,
) -> fmt::Result {
    let mut first = true;
    for (e, c) in terms {
        if c.is_zero() {
            continue;
        }
        let negative = c.is_negative();
        let abs = c.abs();
        if first {
            if negative {
                f.write_str("-")?;
            }
        } else {
            f.write_str(if negative { " - " } else { " + " })?;
        }
        first = false;
        match e {
            0 => write!(f, "{abs}")?,
            _ => {
                if !abs.is_one() {
                    write!(f, "{abs}")?;
                }
                if e == 1 {
                    write!(f, "{var}")?;
                } else {
                    write!(f, "{var}^{e}")?;
                }
            }
        }
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}
