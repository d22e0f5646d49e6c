//! Which classes of a closed simply-connected 4-manifold carry simple spheres,
//! and what is known about their uniqueness.
//!
//! For a class `x = d·y` with `y` primitive and `d ≠ 0`:
//!
//! * existence needs `b₂ ≥ max_{0≤j<d} |σ − 2j(d−j)·(y·y)|` and, when `x` is
//!   characteristic, `ks ≡ (σ − x·x)/8 (mod 2)`;
//! * isotopy uniqueness holds for `d = 1`, or when the bound above holds
//!   strictly and either `b₂ > 6` or `b₂ > |σ| + 2`.
//!
//! The zero class is always represented (by an unknotted sphere in a ball);
//! spheres there are classified by their equivariant form over `Z[Z]`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::groupring::LaurentElem;
use crate::hermitian::{self, HermitianForm};
use crate::intlattice::{
    self, HomologyClass, IntersectionForm, IsometryVerdict, LatticeError, Parity,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassifierError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("Kirby-Siebenmann invariant must be 0 or 1, got {0}")]
    InvalidKs(u8),
    #[error("even form with signature {sigma} forces ks = {expected}, got {found}")]
    InconsistentKs { sigma: i64, expected: u8, found: u8 },
    #[error("the zero class has no divisibility-d bound")]
    ZeroClass,
    #[error("class {0} is not characteristic")]
    NotCharacteristic(HomologyClass),
    #[error("internal: sigma - x.x = {0} is not divisible by 8 for a characteristic class")]
    DivisibilityViolation(BigInt),
    #[error("uniqueness rules do not apply to {0}")]
    NotApplicable(String),
}

/// A closed simply-connected 4-manifold, up to homeomorphism: its
/// intersection form and Kirby–Siebenmann invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourManifold {
    form: IntersectionForm,
    ks: u8,
    b2: usize,
    sigma: i64,
}

impl FourManifold {
    /// Rejects non-unimodular forms and, for even forms, a `ks` other than
    /// `σ/8 mod 2`.
    pub fn new(form: IntersectionForm, ks: u8) -> Result<Self, ClassifierError> {
        if ks > 1 {
            return Err(ClassifierError::InvalidKs(ks));
        }
        let form = IntersectionForm::new(form.into_matrix())?;
        let invariants = intlattice::form_invariants(&form);
        if invariants.parity == Parity::Even {
            let expected = (invariants.signature / 8).rem_euclid(2) as u8;
            if expected != ks {
                return Err(ClassifierError::InconsistentKs {
                    sigma: invariants.signature,
                    expected,
                    found: ks,
                });
            }
        }
        Ok(FourManifold {
            b2: invariants.rank,
            sigma: invariants.signature,
            form,
            ks,
        })
    }

    pub fn s4() -> Self {
        Self::new(IntersectionForm::empty(), 0).expect("valid")
    }

    pub fn cp2() -> Self {
        Self::new(IntersectionForm::cp2(), 0).expect("valid")
    }

    /// `#ⁿ(S²×S²)`.
    pub fn s2xs2_sum(n: usize) -> Self {
        let h = IntersectionForm::hyperbolic();
        let form = (0..n).fold(IntersectionForm::empty(), |acc, _| acc.block_sum(&h));
        Self::new(form, 0).expect("valid")
    }

    /// Connected sum: block sum of forms, ks added mod 2.
    pub fn connected_sum(&self, other: &FourManifold) -> Result<Self, ClassifierError> {
        Self::new(self.form.block_sum(&other.form), (self.ks + other.ks) % 2)
    }

    pub fn form(&self) -> &IntersectionForm {
        &self.form
    }

    pub fn ks(&self) -> u8 {
        self.ks
    }

    pub fn b2(&self) -> usize {
        self.b2
    }

    pub fn sigma(&self) -> i64 {
        self.sigma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Existence {
    Yes,
    No,
    /// The zero class, represented by the unknot in a ball.
    YesByDefinition,
}

impl Existence {
    pub fn is_representable(self) -> bool {
        !matches!(self, Existence::No)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Reason {
    PassesLW,
    FailsLW,
    PassesKS,
    FailsKS,
    Ordinary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Uniqueness {
    UniqueIsotopy,
    /// Unique up to equivalence without the isotopy upgrade. None of the
    /// current rules produce it for nonzero classes.
    UniqueEquivalence,
    /// Zero class: equivalence classes are isometry classes of nonsingular
    /// hermitian forms over `Z[Z]` augmenting to the intersection form.
    DeterminedByForm,
    Unknown,
    /// The class carries no simple sphere.
    NotApplicable,
}

/// Machine-readable tags naming the rule behind each verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Citation {
    #[serde(rename = "existence:lw-inequality")]
    LwInequality,
    #[serde(rename = "existence:ks-characteristic")]
    KsCharacteristic,
    #[serde(rename = "existence:nullhomologous-unknot")]
    NullhomologousUnknot,
    #[serde(rename = "uniqueness:divisibility-one")]
    DivisibilityOne,
    #[serde(rename = "uniqueness:b2-gt-6-strict-lw")]
    LargeB2Strict,
    #[serde(rename = "uniqueness:b2-gt-abs-sigma-plus-2-strict-lw")]
    IndefiniteMarginStrict,
    /// The `b₂ > |σ| + 2` rule is read with the strict inequality; the
    /// non-strict reading would change this verdict.
    #[serde(rename = "note:strict-reading-of-uniqueness-inequality")]
    StrictReadingNote,
    /// Representable with `b₂` equal to the bound: no uniqueness statement
    /// is available; deciding it needs the pointed isometry type.
    #[serde(rename = "note:lw-equality-case-open")]
    EqualityCaseOpen,
    #[serde(rename = "note:no-uniqueness-rule-applies")]
    NoRuleApplies,
    #[serde(rename = "uniqueness:form-determines-sphere")]
    FormDeterminesSphere,
    /// `b₂ ≥ σ + 6`: all candidate forms are isometric, so Z-spheres are
    /// unique up to equivalence.
    #[serde(rename = "uniqueness:automatic-isometry")]
    AutomaticIsometry,
}

impl fmt::Display for Citation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self {
            Citation::LwInequality => "existence:lw-inequality",
            Citation::KsCharacteristic => "existence:ks-characteristic",
            Citation::NullhomologousUnknot => "existence:nullhomologous-unknot",
            Citation::DivisibilityOne => "uniqueness:divisibility-one",
            Citation::LargeB2Strict => "uniqueness:b2-gt-6-strict-lw",
            Citation::IndefiniteMarginStrict => "uniqueness:b2-gt-abs-sigma-plus-2-strict-lw",
            Citation::StrictReadingNote => "note:strict-reading-of-uniqueness-inequality",
            Citation::EqualityCaseOpen => "note:lw-equality-case-open",
            Citation::NoRuleApplies => "note:no-uniqueness-rule-applies",
            Citation::FormDeterminesSphere => "uniqueness:form-determines-sphere",
            Citation::AutomaticIsometry => "uniqueness:automatic-isometry",
        };
        f.write_str(tag)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereClassReport {
    pub class: HomologyClass,
    #[serde(with = "crate::bigint_serde")]
    pub divisibility: BigInt,
    pub characteristic: bool,
    /// `None` for the zero class.
    #[serde(with = "option_bigint")]
    pub lw_bound: Option<BigInt>,
    pub b2: usize,
    pub sigma: i64,
    pub ks: u8,
    pub exists: Existence,
    pub reasons: Vec<Reason>,
    pub uniqueness: Uniqueness,
    /// Set for the zero class only: whether `b₂ ≥ σ + 6`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub automatic_isometry: Option<bool>,
    pub citations: Vec<Citation>,
}

mod option_bigint {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::bigint_serde::Wrapped;

    pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        v.clone().map(Wrapped).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        Ok(Option::<Wrapped>::deserialize(d)?.map(|w| w.0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExistenceVerdict {
    pub exists: Existence,
    pub reasons: Vec<Reason>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniquenessVerdict {
    pub status: Uniqueness,
    pub citations: Vec<Citation>,
}

/// `max_{0≤j<d} |σ − 2j(d−j)/d² · x·x|` for `d = divisibility(x) ≠ 0`.
///
/// With `x = d·y` the `j`-th term is `|σ − 2j(d−j)·(y·y)|`, an integer. The
/// term is convex in `c = j(d−j)`, so the maximum is attained at `j = 0` or at
/// `j = ⌊d/2⌋`, where `c = ⌊d²/4⌋`.
pub fn lw_bound(manifold: &FourManifold, x: &HomologyClass) -> Result<BigInt, ClassifierError> {
    let d = intlattice::divisibility(x);
    if d.is_zero() {
        return Err(ClassifierError::ZeroClass);
    }
    let xx = intlattice::self_intersection(&manifold.form, x)?;
    let yy: BigInt = xx / (&d * &d);
    let sigma = BigInt::from(manifold.sigma);
    let half: BigInt = &d / 2;
    let c_max = &half * (&d - &half);
    let at_zero = sigma.abs();
    let at_mid = (&sigma - BigInt::from(2) * c_max * yy).abs();
    Ok(at_zero.max(at_mid))
}

/// Whether `ks ≡ (σ − x·x)/8 (mod 2)` for a characteristic class `x`.
pub fn ks_condition(manifold: &FourManifold, x: &HomologyClass) -> Result<bool, ClassifierError> {
    if !intlattice::is_characteristic(&manifold.form, x)? {
        return Err(ClassifierError::NotCharacteristic(x.clone()));
    }
    let xx = intlattice::self_intersection(&manifold.form, x)?;
    let diff = BigInt::from(manifold.sigma) - xx;
    let (q, r) = diff.div_mod_floor(&BigInt::from(8));
    if !r.is_zero() {
        return Err(ClassifierError::DivisibilityViolation(diff));
    }
    Ok(q.mod_floor(&BigInt::from(2)) == BigInt::from(manifold.ks))
}

pub fn exists_simple_sphere(
    manifold: &FourManifold,
    x: &HomologyClass,
) -> Result<ExistenceVerdict, ClassifierError> {
    let characteristic = intlattice::is_characteristic(&manifold.form, x)?;
    if x.is_zero() {
        return Ok(ExistenceVerdict {
            exists: Existence::YesByDefinition,
            reasons: Vec::new(),
        });
    }
    let bound = lw_bound(manifold, x)?;
    let passes_lw = BigInt::from(manifold.b2) >= bound;
    let mut reasons = vec![if passes_lw {
        Reason::PassesLW
    } else {
        Reason::FailsLW
    }];
    let passes_second = if characteristic {
        let ok = ks_condition(manifold, x)?;
        reasons.push(if ok {
            Reason::PassesKS
        } else {
            Reason::FailsKS
        });
        ok
    } else {
        reasons.push(Reason::Ordinary);
        true
    };
    let exists = if passes_lw && passes_second {
        Existence::Yes
    } else {
        Existence::No
    };
    Ok(ExistenceVerdict { exists, reasons })
}

/// Uniqueness verdict for a representable nonzero class.
pub fn uniqueness_status(
    manifold: &FourManifold,
    x: &HomologyClass,
) -> Result<UniquenessVerdict, ClassifierError> {
    let d = intlattice::divisibility(x);
    if d.is_zero() {
        return Err(ClassifierError::NotApplicable(
            "the zero class; its spheres are determined by their equivariant form".into(),
        ));
    }
    if !exists_simple_sphere(manifold, x)?.exists.is_representable() {
        return Err(ClassifierError::NotApplicable(format!(
            "{x}, which has no simple sphere"
        )));
    }
    let unique = |citations: Vec<Citation>| UniquenessVerdict {
        status: Uniqueness::UniqueIsotopy,
        citations,
    };
    if d == BigInt::from(1) {
        return Ok(unique(vec![Citation::DivisibilityOne]));
    }
    let b2 = BigInt::from(manifold.b2);
    let bound = lw_bound(manifold, x)?;
    let strict = b2 > bound;
    if manifold.b2 > 6 && strict {
        return Ok(unique(vec![Citation::LargeB2Strict]));
    }
    let margin = (manifold.b2 as i64) > manifold.sigma.abs() + 2;
    if margin && strict {
        return Ok(unique(vec![
            Citation::IndefiniteMarginStrict,
            Citation::StrictReadingNote,
        ]));
    }
    let mut citations = Vec::new();
    if b2 == bound {
        citations.push(Citation::EqualityCaseOpen);
        if margin {
            citations.push(Citation::StrictReadingNote);
        }
    } else {
        citations.push(Citation::NoRuleApplies);
    }
    Ok(UniquenessVerdict {
        status: Uniqueness::Unknown,
        citations,
    })
}

pub fn classify(
    manifold: &FourManifold,
    x: &HomologyClass,
) -> Result<SphereClassReport, ClassifierError> {
    let divisibility = intlattice::divisibility(x);
    let characteristic = intlattice::is_characteristic(&manifold.form, x)?;
    let existence = exists_simple_sphere(manifold, x)?;
    let mut report = SphereClassReport {
        class: x.clone(),
        divisibility: divisibility.clone(),
        characteristic,
        lw_bound: None,
        b2: manifold.b2,
        sigma: manifold.sigma,
        ks: manifold.ks,
        exists: existence.exists,
        reasons: existence.reasons,
        uniqueness: Uniqueness::NotApplicable,
        automatic_isometry: None,
        citations: Vec::new(),
    };
    if divisibility.is_zero() {
        let automatic = (manifold.b2 as i64) >= manifold.sigma + 6;
        report.uniqueness = Uniqueness::DeterminedByForm;
        report.automatic_isometry = Some(automatic);
        report.citations = vec![
            Citation::NullhomologousUnknot,
            Citation::FormDeterminesSphere,
        ];
        if automatic {
            report.citations.push(Citation::AutomaticIsometry);
        }
        return Ok(report);
    }
    report.lw_bound = Some(lw_bound(manifold, x)?);
    report.citations.push(Citation::LwInequality);
    if characteristic {
        report.citations.push(Citation::KsCharacteristic);
    }
    if report.exists.is_representable() {
        let u = uniqueness_status(manifold, x)?;
        report.uniqueness = u.status;
        report.citations.extend(u.citations);
    }
    Ok(report)
}

/// Number of classes in the box `[-max_abs, max_abs]^rank`, if it fits in a `usize`.
pub fn box_size(rank: usize, max_abs: u64) -> Option<usize> {
    let side = (2 * max_abs).checked_add(1)?.to_usize()?;
    (0..rank).try_fold(1usize, |acc, _| acc.checked_mul(side))
}

fn class_at(index: usize, rank: usize, max_abs: u64) -> HomologyClass {
    let side = 2 * max_abs as usize + 1;
    let mut coords = vec![BigInt::zero(); rank];
    let mut rest = index;
    for slot in coords.iter_mut().rev() {
        *slot = BigInt::from(rest % side) - BigInt::from(max_abs);
        rest /= side;
    }
    HomologyClass(coords)
}

/// Classify every class with coordinates in `[-max_abs, max_abs]`, in
/// lexicographic order.
///
/// Panics if the box has more than `usize::MAX` classes.
pub fn enumerate_classes(manifold: &FourManifold, max_abs: u64) -> Vec<SphereClassReport> {
    let rank = manifold.b2;
    let total = box_size(rank, max_abs).expect("enumeration box too large");
    (0..total)
        .into_par_iter()
        .map(|i| {
            classify(manifold, &class_at(i, rank, max_abs)).expect("class has the manifold's rank")
        })
        .collect()
}

/// The representable classes among [`enumerate_classes`].
pub fn enumerate_representable(manifold: &FourManifold, max_abs: u64) -> Vec<SphereClassReport> {
    enumerate_classes(manifold, max_abs)
        .into_iter()
        .filter(|r| r.exists.is_representable())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Realizability {
    Realizable,
    NotRealizable { reason: String },
    Undecided { reason: String },
}

/// Whether a hermitian form over `Z[Z]` is the equivariant form of some
/// Z-sphere: it must be nonsingular and augment to a form isometric to `Q_X`.
pub fn realizable_forms_check(
    manifold: &FourManifold,
    lambda: &HermitianForm<LaurentElem>,
) -> Realizability {
    if lambda.size() != manifold.b2 {
        return Realizability::NotRealizable {
            reason: format!("form has size {} but b2 = {}", lambda.size(), manifold.b2),
        };
    }
    let augmented = hermitian::augment_form(lambda);
    let isometry = intlattice::is_isometric(&augmented, &manifold.form);
    if !hermitian::is_nonsingular(lambda) {
        let mut reason = format!("determinant {} is not a unit", lambda.determinant());
        if let IsometryVerdict::No { reason: r } = &isometry {
            reason.push_str(&format!(
                "; augmentation is not isometric to the intersection form ({r})"
            ));
        }
        return Realizability::NotRealizable { reason };
    }
    match isometry {
        IsometryVerdict::Yes { .. } => Realizability::Realizable,
        IsometryVerdict::No { reason } => Realizability::NotRealizable {
            reason: format!("augmentation is not isometric to the intersection form ({reason})"),
        },
        IsometryVerdict::Undecided { .. } => Realizability::Undecided {
            reason: "isometry of the augmentation with the intersection form is undecided".into(),
        },
    }
}
