mod common;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use spherecalc::intlattice::{
    divisibility, form_invariants, is_characteristic, is_isometric, self_intersection, signature,
    Definiteness, HomologyClass, IntersectionForm, IsometryVerdict, Parity,
};

use common::{leading_minors, random_unimodular, random_unimodular_form};

/// Signature from leading principal minors (Jacobi): the number of sign
/// changes in 1, D_1, ..., D_n counts negative eigenvalues. Only valid when
/// every minor is nonzero.
fn jacobi_signature(q: &IntersectionForm) -> Option<i64> {
    let minors = leading_minors(q.matrix());
    if minors.iter().any(Zero::is_zero) {
        return None;
    }
    let mut prev = BigInt::from(1);
    let mut neg = 0i64;
    for m in &minors {
        if m.is_negative() != prev.is_negative() {
            neg += 1;
        }
        prev = m.clone();
    }
    Some(minors.len() as i64 - 2 * neg)
}

fn brute_force_characteristic(q: &IntersectionForm, x: &HomologyClass) -> bool {
    let n = q.rank();
    (0u32..1 << n).all(|mask| {
        let a = HomologyClass::new((0..n).map(|i| ((mask >> i) & 1) as i64));
        let xa = q.pairing(x, &a).unwrap();
        let aa = q.pairing(&a, &a).unwrap();
        (xa - aa) % 2 == BigInt::zero()
    })
}

#[test]
fn e8_signature_by_sylvester() {
    // Positive definite iff every leading minor is positive.
    let e8 = IntersectionForm::e8();
    let minors = leading_minors(e8.matrix());
    assert!(minors.iter().all(|m| m.is_positive()));
    assert_eq!(minors.last().unwrap(), &BigInt::from(1));
    assert_eq!(jacobi_signature(&e8), Some(8));
    assert_eq!(signature(&e8), 8);
    let inv = form_invariants(&e8);
    assert_eq!(
        (inv.rank, inv.signature, inv.parity, inv.definiteness),
        (8, 8, Parity::Even, Definiteness::Positive)
    );
}

#[test]
fn signature_invariant_under_random_congruence() {
    let mut rng = StdRng::seed_from_u64(7);
    for trial in 0..300 {
        let n = 1 + trial % 6;
        let q = random_unimodular_form(&mut rng, n);
        let s = signature(&q);
        if let Some(j) = jacobi_signature(&q) {
            assert_eq!(s, j, "Jacobi oracle disagrees on {q}");
        }
        let p = random_unimodular(&mut rng, n, 12);
        assert_eq!(signature(&q.congruent_by(&p)), s);
    }
}

#[test]
fn characteristic_matches_brute_force() {
    let mut rng = StdRng::seed_from_u64(11);
    for trial in 0..200 {
        let n = 1 + trial % 6;
        let q = random_unimodular_form(&mut rng, n);
        for _ in 0..4 {
            let x = HomologyClass::new((0..n).map(|_| rand::Rng::gen_range(&mut rng, -3i64..=3)));
            assert_eq!(
                is_characteristic(&q, &x).unwrap(),
                brute_force_characteristic(&q, &x)
            );
        }
    }
}

#[test]
fn even_definite_forms_have_signature_divisible_by_8() {
    let mut rng = StdRng::seed_from_u64(3);
    for base in [IntersectionForm::e8(), IntersectionForm::e8().negated()] {
        for _ in 0..5 {
            let p = random_unimodular(&mut rng, 8, 10);
            let q = base.congruent_by(&p);
            assert!(q.is_even() && q.is_unimodular());
            assert_eq!(signature(&q).rem_euclid(8), 0);
        }
    }
}

#[test]
fn isometry_is_symmetric_and_witnesses_check() {
    let mut rng = StdRng::seed_from_u64(5);
    for trial in 0..60 {
        let n = 1 + trial % 5;
        let a = random_unimodular_form(&mut rng, n);
        let b = random_unimodular_form(&mut rng, n);
        let ab = is_isometric(&a, &b);
        let ba = is_isometric(&b, &a);
        assert_eq!(ab.is_yes(), ba.is_yes());
        assert_eq!(ab.is_no(), ba.is_no());
        assert!(is_isometric(&a, &a).is_yes());
        for (x, y, v) in [(&a, &b, &ab), (&b, &a, &ba)] {
            if let IsometryVerdict::Yes { witness: Some(p) } = v {
                assert_eq!(&x.congruent_by(p), y);
            }
        }
    }
}

#[test]
fn definite_isometry_on_random_bases() {
    let mut rng = StdRng::seed_from_u64(17);
    for n in 1..=5 {
        let id = IntersectionForm::diagonal(vec![1; n]);
        let p = random_unimodular(&mut rng, n, 2 * n);
        let q = id.congruent_by(&p);
        match is_isometric(&id, &q) {
            IsometryVerdict::Yes { witness: Some(w) } => assert_eq!(id.congruent_by(&w), q),
            v => panic!("rank {n}: {v:?}"),
        }
    }
}

proptest! {
    #[test]
    fn divisibility_scales(coords in prop::collection::vec(-50i64..50, 1..6), k in -20i64..20) {
        let x = HomologyClass::new(coords);
        prop_assume!(!x.is_zero());
        let kx = x.scaled(&BigInt::from(k));
        prop_assert_eq!(divisibility(&kx), BigInt::from(k.abs()) * divisibility(&x));
    }

    #[test]
    fn self_intersection_scales(seed in any::<u64>(), d in -6i64..6) {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = 1 + (seed % 5) as usize;
        let q = random_unimodular_form(&mut rng, n);
        let y = HomologyClass::new((0..n).map(|_| rand::Rng::gen_range(&mut rng, -9i64..=9)));
        let dy = y.scaled(&BigInt::from(d));
        prop_assert_eq!(
            self_intersection(&q, &dy).unwrap(),
            BigInt::from(d * d) * self_intersection(&q, &y).unwrap()
        );
    }
}
