//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use spherecalc::classifier::{
    classify, enumerate_classes, realizable_forms_check, Citation, FourManifold, Realizability,
    Uniqueness,
};
use spherecalc::groupring::{GroupRingElem, GroupRingElement, LaurentElem};
use spherecalc::hermitian::{
    augment_form, build_equivariant_form, congruence_search, extend_integer_form, verify_witness,
    CongruenceOutcome, DeterminantClass, EquivariantIntegerForm, HermitianForm, RingMatrix,
    SearchConfig,
};
use spherecalc::intlattice::{self, HomologyClass, IntersectionForm};
use spherecalc::matrix::IntMatrix;
use spherecalc_cli::catalog::CatalogFile;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("{what} took {elapsed:?}, limit {limit:?}")
    })
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

// Straight-line evaluation of the two existence conditions, in machine
// integers, scaled through by d².
fn oracle_exists(q: &[[i64; 4]; 4], b2: i64, sigma: i64, ks: i64, x: [i64; 4]) -> bool {
    if x == [0; 4] {
        return true;
    }
    let d = x.iter().fold(0, |g, &c| gcd(g, c));
    let mut xx = 0;
    for i in 0..4 {
        for j in 0..4 {
            xx += x[i] * q[i][j] * x[j];
        }
    }
    for j in 0..d {
        if d * d * b2 < (d * d * sigma - 2 * j * (d - j) * xx).abs() {
            return false;
        }
    }
    let characteristic = (0..4).all(|i| {
        let qx: i64 = (0..4).map(|j| q[i][j] * x[j]).sum();
        (qx - q[i][i]).rem_euclid(2) == 0
    });
    !characteristic || ((sigma - xx) / 8).rem_euclid(2) == ks
}

const H2: [[i64; 4]; 4] = [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]];

fn box4(max: i64) -> impl Iterator<Item = [i64; 4]> {
    let r = -max..=max;
    r.clone().flat_map(move |a| {
        let r = r.clone();
        r.clone().flat_map(move |b| {
            let r = r.clone();
            r.clone()
                .flat_map(move |c| r.clone().map(move |e| [a, b, c, e]))
        })
    })
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_spherecalc"))
        .args(["enumerate", "--manifold", "CP2", "--max-abs", "50"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(out.status.success(), || {
        String::from_utf8_lossy(&out.stderr).into_owned()
    })?;
    let cat =
        CatalogFile::from_json(&String::from_utf8_lossy(&out.stdout)).map_err(|e| e.to_string())?;
    let reps: Vec<BigInt> = cat
        .reports
        .iter()
        .filter(|r| r.exists.is_representable())
        .map(|r| r.class.0[0].clone())
        .collect();
    let expected: Vec<BigInt> = (-2..=2).map(BigInt::from).collect();
    ensure(reps == expected, || format!("representable {reps:?}"))?;
    ensure(cat.reports.len() == 101, || {
        format!("{} reports", cat.reports.len())
    })?;
    within(elapsed, Duration::from_secs(1), "enumeration")?;
    Ok(format!(
        "representable = {{-2,...,2}} of 101 classes in {elapsed:?}"
    ))
}

fn criterion_2() -> Check {
    let m = FourManifold::s2xs2_sum(2);
    let start = Instant::now();
    let reports = enumerate_classes(&m, 5);
    let elapsed = start.elapsed();
    ensure(reports.len() == 14641, || {
        format!("{} classes", reports.len())
    })?;
    let mut representable = 0;
    for (r, x) in reports.iter().zip(box4(5)) {
        let coords: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        ensure(r.class.0 == coords, || format!("order mismatch at {x:?}"))?;
        let got = r.exists.is_representable();
        let g = x.iter().fold(0, |g, &c| gcd(g, c));
        let closed = g == 0 || g == 1 || x[0] * x[1] + x[2] * x[3] == 0;
        let oracle = oracle_exists(&H2, 4, 0, 0, x);
        ensure(got == closed && got == oracle, || {
            format!("{x:?}: got {got}, predicate {closed}, oracle {oracle}")
        })?;
        representable += got as usize;
    }
    within(elapsed, Duration::from_secs(10), "enumeration")?;
    Ok(format!(
        "14641/14641 agree with predicate and oracle ({representable} representable) in {elapsed:?}"
    ))
}

fn criterion_3() -> Check {
    let form = IntersectionForm::hyperbolic().block_sum(&IntersectionForm::hyperbolic());
    let mut characteristic = 0;
    for x in box4(5) {
        let class = HomologyClass::new(x);
        let got = intlattice::is_characteristic(&form, &class).map_err(|e| e.to_string())?;
        // x·y ≡ y·y (mod 2) for every y in (Z/2)⁴.
        let brute = (0..16u32).all(|bits| {
            let y: Vec<i64> = (0..4).map(|i| ((bits >> i) & 1) as i64).collect();
            let xy: i64 = (0..4)
                .map(|i| (0..4).map(|j| x[i] * H2[i][j] * y[j]).sum::<i64>())
                .sum();
            let yy: i64 = (0..4)
                .map(|i| (0..4).map(|j| y[i] * H2[i][j] * y[j]).sum::<i64>())
                .sum();
            (xy - yy).rem_euclid(2) == 0
        });
        let even = x.iter().all(|c| c % 2 == 0);
        ensure(got == brute && got == even, || {
            format!("{x:?}: got {got}, brute {brute}, all-even {even}")
        })?;
        characteristic += got as usize;
    }
    Ok(format!(
        "14641/14641 exact, {characteristic} characteristic"
    ))
}

fn criterion_4() -> Check {
    let h = IntMatrix::square([[0, 1], [1, 0]]);
    let swap = IntMatrix::square([[0, 1], [1, 0]]);
    let e = EquivariantIntegerForm::new(h, swap, 2).map_err(|e| e.to_string())?;
    let basis = vec![vec![BigInt::from(1), BigInt::from(0)]];
    let lambda = build_equivariant_form(&e, &basis).map_err(|e| e.to_string())?;
    let t = HermitianForm::from_rows(2, vec![vec![GroupRingElem::generator(2)]]).unwrap();
    ensure(lambda == t, || format!("got {lambda}"))?;
    let aug = augment_form(&lambda);
    ensure(aug == IntersectionForm::cp2(), || {
        format!("augmentation {aug}")
    })?;
    Ok(format!(
        "lambda = {lambda}, augmentation = {}",
        aug.matrix()
    ))
}

fn criterion_5() -> Check {
    let one = HermitianForm::from_rows(2, vec![vec![GroupRingElem::one(2)]]).unwrap();
    let t = HermitianForm::from_rows(2, vec![vec![GroupRingElem::generator(2)]]).unwrap();
    let outcome = congruence_search(&one, &t, &SearchConfig::default());
    let CongruenceOutcome::Disproven(reason) = &outcome else {
        return Err(format!("outcome {outcome:?}"));
    };
    let mut checked = 0;
    for a in -3i64..=3 {
        for b in -3i64..=3 {
            let p = GroupRingElem::new([a, b]);
            let norm = p.clone() * p.conjugate();
            let tc = &norm.coeffs()[1];
            ensure(
                tc % 2 == BigInt::from(0) && norm != t.matrix()[(0, 0)],
                || format!("p = {p}: p·conj(p) = {norm}"),
            )?;
            checked += 1;
        }
    }
    Ok(format!(
        "Disproven ({reason}); parity holds for {checked} elements"
    ))
}

fn criterion_6() -> Check {
    let cp2 = FourManifold::cp2();
    let one = HermitianForm::from_rows((), vec![vec![LaurentElem::one(())]]).unwrap();
    let sym = HermitianForm::from_rows((), vec![vec![LaurentElem::from_terms([(1, 1), (-1, 1)])]])
        .unwrap();
    let a = realizable_forms_check(&cp2, &one);
    let b = realizable_forms_check(&cp2, &sym);
    ensure(a == Realizability::Realizable, || format!("(1): {a:?}"))?;
    ensure(matches!(b, Realizability::NotRealizable { .. }), || {
        format!("(t+t^-1): {b:?}")
    })?;
    Ok("(1) Realizable, (t + t^-1) NotRealizable".into())
}

fn random_cyclic(rng: &mut StdRng, d: usize) -> GroupRingElem {
    GroupRingElem::new((0..d).map(|_| rng.gen_range(-9i64..=9)))
}

fn random_laurent(rng: &mut StdRng) -> LaurentElem {
    let n = rng.gen_range(0..5);
    LaurentElem::from_terms((0..n).map(|_| (rng.gen_range(-4i64..=4), rng.gen_range(-9i64..=9))))
}

fn ring_laws<R: GroupRingElement>(a: &R, b: &R, c: &R, ring: R::Ring) -> Result<(), String> {
    let zero = R::zero(ring);
    let one = R::one(ring);
    let laws = [
        (a.clone() + b.clone() == b.clone() + a.clone(), "a+b = b+a"),
        (a.clone() * b.clone() == b.clone() * a.clone(), "ab = ba"),
        (
            (a.clone() + b.clone()) + c.clone() == a.clone() + (b.clone() + c.clone()),
            "(a+b)+c = a+(b+c)",
        ),
        (
            (a.clone() * b.clone()) * c.clone() == a.clone() * (b.clone() * c.clone()),
            "(ab)c = a(bc)",
        ),
        (
            a.clone() * (b.clone() + c.clone()) == a.clone() * b.clone() + a.clone() * c.clone(),
            "a(b+c) = ab+ac",
        ),
        (a.clone() + zero.clone() == *a, "a+0 = a"),
        (a.clone() * one.clone() == *a, "a·1 = a"),
        ((a.clone() - a.clone()).is_zero(), "a-a = 0"),
        (a.conjugate().conjugate() == *a, "conj conj a = a"),
        (
            (a.clone() * b.clone()).conjugate() == a.conjugate() * b.conjugate(),
            "conj(ab) = conj(a)conj(b)",
        ),
        (
            (a.clone() + b.clone()).conjugate() == a.conjugate() + b.conjugate(),
            "conj(a+b) = conj(a)+conj(b)",
        ),
        (a.conjugate().augment() == a.augment(), "aug conj a = aug a"),
        (
            (a.clone() * b.clone()).augment() == a.augment() * b.augment(),
            "aug(ab) = aug a · aug b",
        ),
        (
            (a.clone() + b.clone()).augment() == a.augment() + b.augment(),
            "aug(a+b) = aug a + aug b",
        ),
    ];
    for (ok, law) in laws {
        ensure(ok, || format!("{law} fails for a={a}, b={b}, c={c}"))?;
    }
    Ok(())
}

fn random_unimodular(rng: &mut StdRng, n: usize) -> IntMatrix {
    let mut p = IntMatrix::identity(n);
    for _ in 0..3 * n {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            let s = if rng.gen_bool(0.5) { 1 } else { -1 };
            for r in 0..n {
                let v = &p[(r, i)] + &p[(r, j)] * s;
                p[(r, i)] = v;
            }
        } else {
            for r in 0..n {
                p[(r, i)] = -p[(r, i)].clone();
            }
        }
    }
    p
}

fn random_form(rng: &mut StdRng, n: usize) -> IntersectionForm {
    let mut form = IntersectionForm::empty();
    while form.rank() < n {
        let block = if form.rank() + 2 <= n && rng.gen_bool(0.3) {
            let h = IntersectionForm::hyperbolic();
            if rng.gen_bool(0.5) {
                h
            } else {
                h.negated()
            }
        } else {
            IntersectionForm::diagonal([if rng.gen_bool(0.5) { 1 } else { -1 }])
        };
        form = form.block_sum(&block);
    }
    form
}

// The forms above are block sums of (±1) and ±H, so before congruence the
// signature is the sum of the diagonal signs.
fn block_signature(form: &IntersectionForm) -> i64 {
    (0..form.rank())
        .map(|i| form.matrix()[(i, i)].clone())
        .map(|d| {
            if d > BigInt::from(0) {
                1
            } else if d < BigInt::from(0) {
                -1
            } else {
                0
            }
        })
        .sum()
}

fn witness_check<R: DeterminantClass>(
    l0: &HermitianForm<R>,
    l1: &HermitianForm<R>,
    budget: usize,
) -> Result<bool, String> {
    match congruence_search(l0, l1, &SearchConfig::with_budget(budget)) {
        CongruenceOutcome::Found(p) => {
            let direct = p.mul(l0.matrix()).mul(&p.conjugate_transpose());
            ensure(&direct == l1.matrix() && p.determinant().is_unit(), || {
                format!("bad witness {p} for {l0} -> {l1}")
            })?;
            ensure(verify_witness(l0, l1, None, &p), || "verify_witness".into())?;
            Ok(true)
        }
        CongruenceOutcome::NotFoundWithinBudget { .. } => Ok(false),
        CongruenceOutcome::Disproven(r) => Err(format!("congruent pair refuted: {r}")),
    }
}

fn random_elementary<R: GroupRingElement>(
    rng: &mut StdRng,
    ring: R::Ring,
    n: usize,
    steps: usize,
) -> RingMatrix<R> {
    let mut p = RingMatrix::identity(ring, n);
    for _ in 0..steps {
        let mut g = RingMatrix::identity(ring, n);
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        let exp = rng.gen_range(-1i64..=1);
        if i != j {
            let c = if rng.gen_bool(0.5) { 1 } else { -1 };
            g[(i, j)] = R::monomial(ring, BigInt::from(c), exp);
        } else {
            g[(i, i)] = R::monomial(ring, BigInt::from(1), exp);
        }
        p = g.mul(&p);
    }
    p
}

fn criterion_7() -> Check {
    let mut rng = StdRng::seed_from_u64(0x5eed);

    // Ring axioms and involution laws.
    let mut elements = 0;
    for k in 0..10_000 / 3 + 1 {
        if k % 2 == 0 {
            let d = rng.gen_range(1..=8);
            let [a, b, c] = [0; 3].map(|_| random_cyclic(&mut rng, d));
            ring_laws(&a, &b, &c, d)?;
        } else {
            let [a, b, c] = [0; 3].map(|_| random_laurent(&mut rng));
            ring_laws(&a, &b, &c, ())?;
        }
        elements += 3;
    }

    // Signature under random unimodular congruences.
    for k in 0..1000 {
        let n = 1 + k % 6;
        let form = random_form(&mut rng, n);
        let expected = block_signature(&form);
        let p = random_unimodular(&mut rng, n);
        let det = p.determinant();
        ensure(det == BigInt::from(1) || det == BigInt::from(-1), || {
            "P not unimodular".into()
        })?;
        let moved = form.congruent_by(&p);
        let got = intlattice::signature(&moved);
        ensure(got == expected, || {
            format!("signature {got} != {expected} for {}", moved.matrix())
        })?;
    }

    // is_unit against a brute-force inverse search.
    let mut unit_checks = 0;
    let mut units = 0;
    for d in 1..=4usize {
        let total = 5usize.pow(d as u32);
        for idx in 0..total {
            let mut rest = idx;
            let coeffs: Vec<i64> = (0..d)
                .map(|_| {
                    let v = (rest % 5) as i64 - 2;
                    rest /= 5;
                    v
                })
                .collect();
            let a = GroupRingElem::new(coeffs.clone());
            let brute = brute_inverse(&coeffs, 12);
            ensure(a.is_unit() == brute.is_some(), || {
                format!("{a}: is_unit {} vs brute {:?}", a.is_unit(), brute)
            })?;
            if let Some(inv) = a.inverse() {
                ensure(
                    (a.clone() * inv).coeffs() == GroupRingElem::one(d).coeffs(),
                    || format!("bad inverse of {a}"),
                )?;
                units += 1;
            }
            unit_checks += 1;
        }
    }

    // Every witness the search returns verifies by direct multiplication.
    let mut found = 0;
    let mut searches = 0;
    for k in 0..60 {
        let n = 1 + k % 3;
        let q = random_form(&mut rng, n);
        if k % 2 == 0 {
            let l0 = extend_integer_form::<LaurentElem>(&q, ());
            let p = random_elementary::<LaurentElem>(&mut rng, (), n, 2);
            let l1 = l0.congruent_by(&p);
            found += witness_check(&l0, &l1, 5_000)? as usize;
        } else {
            let d = rng.gen_range(2..=5);
            let l0 = extend_integer_form::<GroupRingElem>(&q, d);
            let p = random_elementary::<GroupRingElem>(&mut rng, d, n, 2);
            let l1 = l0.congruent_by(&p);
            found += witness_check(&l0, &l1, 5_000)? as usize;
        }
        searches += 1;
    }
    ensure(found > 0, || "no witnesses found".into())?;

    Ok(format!(
        "{elements} ring elements, 1000 congruences, {unit_checks} unit checks ({units} units), \
         {found}/{searches} witnesses verified"
    ))
}

/// Searches coefficient vectors in [-bound, bound] for an inverse; the last
/// coefficient is pinned by the augmentation of the product.
fn brute_inverse(a: &[i64], bound: i64) -> Option<Vec<i64>> {
    let d = a.len();
    let aug: i64 = a.iter().sum();
    if aug != 1 && aug != -1 {
        return None;
    }
    let side = (2 * bound + 1) as usize;
    let free = d - 1;
    for idx in 0..side.pow(free as u32) {
        let mut rest = idx;
        let mut b: Vec<i64> = (0..free)
            .map(|_| {
                let v = (rest % side) as i64 - bound;
                rest /= side;
                v
            })
            .collect();
        // aug(a)·aug(b) = 1.
        b.push(aug - b.iter().sum::<i64>());
        let product: Vec<i64> = (0..d)
            .map(|k| (0..d).map(|i| a[i] * b[(k + d - i) % d]).sum())
            .collect();
        if product[0] == 1 && product[1..].iter().all(|&c| c == 0) {
            return Some(b);
        }
    }
    None
}

fn criterion_8() -> Check {
    let cp2 = FourManifold::cp2();
    let h2 = FourManifold::s2xs2_sum(2);
    let cls = |v: &[i64]| HomologyClass::new(v.iter().copied());
    let a = classify(&cp2, &cls(&[1])).map_err(|e| e.to_string())?;
    let b = classify(&h2, &cls(&[2, 0, 0, 0])).map_err(|e| e.to_string())?;
    let c = classify(&cp2, &cls(&[2])).map_err(|e| e.to_string())?;
    ensure(a.uniqueness == Uniqueness::UniqueIsotopy, || {
        format!("CP2/(1): {:?}", a.uniqueness)
    })?;
    ensure(b.uniqueness == Uniqueness::UniqueIsotopy, || {
        format!("H#H/(2,0,0,0): {:?}", b.uniqueness)
    })?;
    ensure(
        c.uniqueness == Uniqueness::Unknown && c.citations.contains(&Citation::EqualityCaseOpen),
        || format!("CP2/(2): {:?} {:?}", c.uniqueness, c.citations),
    )?;
    Ok(format!(
        "CP2/(1) UniqueIsotopy, H#H/(2,0,0,0) UniqueIsotopy, CP2/(2) Unknown [{}]",
        Citation::EqualityCaseOpen
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("CP2 catalog", criterion_1),
        ("#2(S2xS2) existence catalog", criterion_2),
        ("#2(S2xS2) characteristic detection", criterion_3),
        ("equivariant form of the conic", criterion_4),
        ("(1) vs (T) over Z[Z_2]", criterion_5),
        ("realizable forms on CP2", criterion_6),
        ("property suites", criterion_7),
        ("uniqueness rules", criterion_8),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
