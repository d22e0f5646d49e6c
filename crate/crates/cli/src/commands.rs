//! Command implementations. Each returns JSON (the stable contract) together
//! with a human-oriented table rendering.

use std::fmt::Write as _;

use serde_json::{json, Value};
use spherecalc::classifier::{
    box_size, classify, enumerate_classes, realizable_forms_check, ClassifierError,
    SphereClassReport,
};
use spherecalc::groupring::{GroupRingElem, LaurentElem};
use spherecalc::hermitian::{
    augment_form, build_equivariant_form, congruence_search, extend_integer_form, is_nonsingular,
    pointed_congruence_search, CongruenceOutcome, DeterminantClass, EquivariantIntegerForm,
    HermitianError, HermitianForm, PointedHermitianForm, SearchConfig,
};
use spherecalc::intlattice::{self, IntersectionForm, LatticeError};

use crate::catalog::{self, CatalogFile};
use crate::parse::{
    parse_class, parse_int_matrix, parse_manifold, parse_ring, parse_ring_matrix,
    parse_ring_vector, ManifoldSpec, ParseError, RingLiteral, RingSpec,
};

/// Largest box `enumerate` accepts.
pub const MAX_ENUMERATION: usize = 50_000_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Hermitian(#[from] HermitianError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone)]
pub struct Output {
    pub json: Value,
    pub table: String,
}

pub fn manifold_from_args(src: &str, ks: Option<u8>) -> Result<ManifoldSpec, CliError> {
    let spec = parse_manifold(src)?.with_ks(ks);
    spec.manifold()?;
    Ok(spec)
}

pub fn cmd_classify(manifold: &str, ks: Option<u8>, class: &str) -> Result<Output, CliError> {
    let spec = manifold_from_args(manifold, ks)?;
    let m = spec.manifold()?;
    let x = parse_class(class)?;
    let report = classify(&m, &x)?;
    Ok(Output {
        json: serde_json::to_value(&report).expect("report serializes"),
        table: report_table(&report),
    })
}

fn report_table(r: &SphereClassReport) -> String {
    let mut s = String::new();
    let lw = r
        .lw_bound
        .as_ref()
        .map_or_else(|| "-".to_string(), |b| b.to_string());
    let reasons: Vec<String> = r.reasons.iter().map(|x| format!("{x:?}")).collect();
    let cites: Vec<String> = r.citations.iter().map(|c| c.to_string()).collect();
    let _ = writeln!(s, "class           {}", r.class);
    let _ = writeln!(s, "divisibility    {}", r.divisibility);
    let _ = writeln!(s, "characteristic  {}", r.characteristic);
    let _ = writeln!(s, "b2 / sigma / ks {} / {} / {}", r.b2, r.sigma, r.ks);
    let _ = writeln!(s, "lw bound        {lw}");
    let _ = writeln!(s, "exists          {:?}", r.exists);
    let _ = writeln!(s, "reasons         {}", reasons.join(", "));
    let _ = writeln!(s, "uniqueness      {:?}", r.uniqueness);
    if let Some(a) = r.automatic_isometry {
        let _ = writeln!(s, "auto isometry   {a}");
    }
    let _ = writeln!(s, "citations       {}", cites.join(", "));
    s
}

pub fn cmd_enumerate(
    manifold: &str,
    ks: Option<u8>,
    max_abs: u64,
    representable_only: bool,
) -> Result<CatalogFile, CliError> {
    let spec = manifold_from_args(manifold, ks)?;
    let m = spec.manifold()?;
    match box_size(m.b2(), max_abs) {
        Some(n) if n <= MAX_ENUMERATION => {}
        _ => {
            return Err(CliError::Invalid(format!(
                "--max-abs {max_abs} gives more than {MAX_ENUMERATION} classes in rank {}",
                m.b2()
            )))
        }
    }
    let reports = enumerate_classes(&m, max_abs);
    Ok(CatalogFile::new(
        spec,
        max_abs,
        representable_only,
        reports,
        catalog::timestamp(),
    ))
}

pub fn catalog_table(cat: &CatalogFile) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{}  (ks = {}, max_abs = {})",
        cat.manifold.name, cat.manifold.ks, cat.max_abs
    );
    let _ = writeln!(
        s,
        "{:<24} {:>5} {:>5} {:>8} {:<16} uniqueness",
        "class", "div", "char", "lw", "exists"
    );
    for r in &cat.reports {
        let lw = r
            .lw_bound
            .as_ref()
            .map_or_else(|| "-".to_string(), |b| b.to_string());
        let _ = writeln!(
            s,
            "{:<24} {:>5} {:>5} {:>8} {:<16} {:?}",
            r.class.to_string(),
            r.divisibility,
            if r.characteristic { "yes" } else { "no" },
            lw,
            format!("{:?}", r.exists),
            r.uniqueness
        );
    }
    s.push_str(&summary_table(cat));
    s
}

pub fn summary_table(cat: &CatalogFile) -> String {
    let c = &cat.summary;
    format!(
        "examined {}, representable {}, not representable {}, unique isotopy {}, determined by form {}, unknown {}\n",
        c.classes_examined,
        c.representable,
        c.not_representable,
        c.unique_isotopy,
        c.determined_by_form,
        c.unknown
    )
}

pub fn cmd_invariants(manifold: &str, ks: Option<u8>) -> Result<Output, CliError> {
    let spec = manifold_from_args(manifold, ks)?;
    let inv = intlattice::form_invariants(&spec.form);
    let json = json!({
        "manifold": spec.name,
        "form": spec.form,
        "ks": spec.ks,
        "b2": inv.rank,
        "sigma": inv.signature,
        "parity": inv.parity,
        "definiteness": inv.definiteness,
    });
    let table = format!(
        "{}\nform  {}\nb2 {}  sigma {}  ks {}  {:?}  {:?}\n",
        spec.name,
        spec.form.matrix(),
        inv.rank,
        inv.signature,
        spec.ks,
        inv.parity,
        inv.definiteness
    );
    Ok(Output { json, table })
}

/// Runs `$body` with `R` bound to the element type of the parsed ring and
/// `ring` to its runtime parameter.
macro_rules! with_ring {
    ($spec:expr, |$ring:ident : $r:ident| $body:expr) => {
        match $spec {
            RingSpec::Cyclic(d) => {
                type $r = GroupRingElem;
                let $ring = d;
                $body
            }
            RingSpec::Laurent => {
                type $r = LaurentElem;
                let $ring = ();
                $body
            }
        }
    };
}

fn form_json<R: RingLiteral>(lambda: &HermitianForm<R>) -> Value {
    json!({
        "form": R::to_json(lambda.matrix()),
        "display": lambda.to_string(),
    })
}

fn hermitian<R: RingLiteral>(src: &str, ring: R::Ring) -> Result<HermitianForm<R>, CliError> {
    Ok(HermitianForm::new(parse_ring_matrix::<R>(src, ring)?)?)
}

pub fn cmd_form_augment(ring: &str, a: &str) -> Result<Output, CliError> {
    let spec = parse_ring(ring)?;
    with_ring!(spec, |ring: R| {
        let lambda = hermitian::<R>(a, ring)?;
        let q = augment_form(&lambda);
        Ok(Output {
            json: serde_json::to_value(q.matrix()).expect("matrix serializes"),
            table: format!("{}\n", q.matrix()),
        })
    })
}

pub fn cmd_form_nonsingular(ring: &str, a: &str) -> Result<Output, CliError> {
    let spec = parse_ring(ring)?;
    with_ring!(spec, |ring: R| {
        let lambda = hermitian::<R>(a, ring)?;
        let det = lambda.determinant();
        let ok = is_nonsingular(&lambda);
        Ok(Output {
            json: json!({ "nonsingular": ok, "determinant": det.to_string() }),
            table: format!("nonsingular {ok}\ndeterminant {det}\n"),
        })
    })
}

pub fn cmd_form_extend(ring: &str, form: &str) -> Result<Output, CliError> {
    let spec = parse_ring(ring)?;
    let q = IntersectionForm::symmetric(parse_int_matrix(form)?)?;
    with_ring!(spec, |ring: R| {
        let lambda = extend_integer_form::<R>(&q, ring);
        Ok(Output {
            json: form_json(&lambda),
            table: format!("{lambda}\n"),
        })
    })
}

pub fn cmd_form_build_equivariant(
    form: &str,
    action: &str,
    order: usize,
    basis: &str,
) -> Result<Output, CliError> {
    let q = parse_int_matrix(form)?;
    let t = parse_int_matrix(action)?;
    let basis = parse_int_matrix(basis)?.to_rows();
    let e = EquivariantIntegerForm::new(q, t, order)?;
    let lambda = build_equivariant_form(&e, &basis)?;
    let mut json = form_json(&lambda);
    json["augmentation"] = serde_json::to_value(augment_form(&lambda).matrix()).expect("matrix");
    Ok(Output {
        json,
        table: format!("{lambda}\n"),
    })
}

/// Congruence search between two forms; pointed when both `za` and `zb` are given.
pub fn cmd_form_congruent(
    ring: &str,
    a: &str,
    b: &str,
    points: Option<(&str, &str)>,
    budget: usize,
) -> Result<Output, CliError> {
    let spec = parse_ring(ring)?;
    let cfg = SearchConfig::with_budget(budget);
    with_ring!(spec, |ring: R| {
        let l0 = hermitian::<R>(a, ring)?;
        let l1 = hermitian::<R>(b, ring)?;
        let outcome = match points {
            None => congruence_search(&l0, &l1, &cfg),
            Some((za, zb)) => {
                let p0 = PointedHermitianForm::new(l0, parse_ring_vector::<R>(za, ring)?)?;
                let p1 = PointedHermitianForm::new(l1, parse_ring_vector::<R>(zb, ring)?)?;
                pointed_congruence_search(&p0, &p1, &cfg)
            }
        };
        Ok(outcome_output(&outcome, budget))
    })
}

fn outcome_output<R: RingLiteral + DeterminantClass>(
    outcome: &CongruenceOutcome<R>,
    budget: usize,
) -> Output {
    match outcome {
        CongruenceOutcome::Found(p) => Output {
            json: json!({
                "status": "found",
                "witness": R::to_json(p),
                "display": p.to_string(),
            }),
            table: format!("found\nwitness {p}\n"),
        },
        CongruenceOutcome::NotFoundWithinBudget { nodes } => Output {
            json: json!({
                "status": "undecided",
                "detail": "not-found-within-budget",
                "nodes": nodes,
                "budget": budget,
            }),
            table: format!("undecided: no witness after {nodes} nodes (budget {budget})\n"),
        },
        CongruenceOutcome::Disproven(r) => Output {
            json: json!({
                "status": "disproven",
                "refutation": r,
                "message": r.to_string(),
            }),
            table: format!("disproven: {r}\n"),
        },
    }
}

pub fn cmd_form_realizable(manifold: &str, ks: Option<u8>, a: &str) -> Result<Output, CliError> {
    let spec = manifold_from_args(manifold, ks)?;
    let m = spec.manifold()?;
    let lambda = hermitian::<LaurentElem>(a, ())?;
    let verdict = realizable_forms_check(&m, &lambda);
    let json = serde_json::to_value(&verdict).expect("verdict serializes");
    let table = format!("{verdict:?}\n");
    Ok(Output { json, table })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_examples() {
        let o = cmd_classify("CP2", Some(0), "[3]").unwrap();
        assert_eq!(o.json["exists"], "No");
        let o = cmd_classify("H#H", Some(0), "[2,2,0,0]").unwrap();
        assert_eq!(o.json["exists"], "No");
        assert_eq!(o.json["reasons"], json!(["PassesLW", "FailsKS"]));
        let o = cmd_classify("CP2", Some(0), "[0]").unwrap();
        assert_eq!(o.json["exists"], "YesByDefinition");
        assert_eq!(o.json["uniqueness"], "DeterminedByForm");
        assert!(matches!(
            cmd_classify("CP2", None, "[1, 2]"),
            Err(CliError::Classifier(ClassifierError::Lattice(_)))
        ));
        assert!(matches!(
            cmd_classify("H", Some(1), "[1, 0]"),
            Err(CliError::Classifier(_))
        ));
    }

    #[test]
    fn enumerate_examples() {
        let cat = cmd_enumerate("CP2", None, 4, false).unwrap();
        assert_eq!(cat.summary.representable, 5);
        let cat = cmd_enumerate("E8", None, 0, false).unwrap();
        assert_eq!(cat.reports.len(), 1);
        assert!(cat.reports[0].class.is_zero());
        assert!(cmd_enumerate("H#H#H#H", None, 1_000, false).is_err());
    }

    #[test]
    fn form_examples() {
        let o = cmd_form_congruent("Z2", "[[1]]", "[[T]]", None, 1000).unwrap();
        assert_eq!(o.json["status"], "disproven");
        let o = cmd_form_augment("laurent", "[[t+t^-1]]").unwrap();
        assert_eq!(o.json, json!([[2]]));
        let o = cmd_form_build_equivariant("[[0,1],[1,0]]", "[[0,1],[1,0]]", 2, "[[1,0]]").unwrap();
        assert_eq!(o.json["display"], "[[T]]");
        assert_eq!(o.json["augmentation"], json!([[1]]));
        let o = cmd_form_nonsingular("laurent", "[[t+t^-1]]").unwrap();
        assert_eq!(o.json["nonsingular"], false);
        let o = cmd_form_extend("Z3", "[[0,1],[1,0]]").unwrap();
        assert_eq!(o.json["form"]["d"], 3);
        assert!(cmd_form_augment("laurent", "[[1, t], [t, 1]]").is_err());
    }

    #[test]
    fn pointed_and_realizable() {
        let o = cmd_form_congruent(
            "laurent",
            "[[0,1],[1,0]]",
            "[[0,1],[1,0]]",
            Some(("[1,0]", "[0,1]")),
            1000,
        )
        .unwrap();
        assert_eq!(o.json["status"], "found");
        let o = cmd_form_realizable("CP2", None, "[[1]]").unwrap();
        assert_eq!(o.json["status"], "realizable");
        let o = cmd_form_realizable("CP2", None, "[[t+t^-1]]").unwrap();
        assert_eq!(o.json["status"], "not-realizable");
    }
}
