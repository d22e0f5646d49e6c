//! Enumeration catalogs written by `spherecalc enumerate`.

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use spherecalc::classifier::{Existence, SphereClassReport, Uniqueness};

use crate::parse::ManifoldSpec;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "spherecalc";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogSummary {
    pub classes_examined: usize,
    pub representable: usize,
    pub not_representable: usize,
    pub unique_isotopy: usize,
    pub determined_by_form: usize,
    pub unknown: usize,
}

impl CatalogSummary {
    pub fn tally(reports: &[SphereClassReport]) -> Self {
        let mut s = CatalogSummary {
            classes_examined: reports.len(),
            ..Default::default()
        };
        for r in reports {
            if r.exists == Existence::No {
                s.not_representable += 1;
                continue;
            }
            s.representable += 1;
            match r.uniqueness {
                Uniqueness::UniqueIsotopy => s.unique_isotopy += 1,
                Uniqueness::DeterminedByForm => s.determined_by_form += 1,
                Uniqueness::Unknown => s.unknown += 1,
                Uniqueness::UniqueEquivalence | Uniqueness::NotApplicable => {}
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogFile {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    /// RFC 3339, UTC.
    pub generated_at: String,
    pub manifold: ManifoldSpec,
    pub max_abs: u64,
    /// When set, `reports` omits classes without a simple sphere; the summary
    /// still counts every class in the box.
    pub representable_only: bool,
    pub summary: CatalogSummary,
    /// Sorted lexicographically by class.
    pub reports: Vec<SphereClassReport>,
}

impl CatalogFile {
    pub fn new(
        manifold: ManifoldSpec,
        max_abs: u64,
        representable_only: bool,
        mut reports: Vec<SphereClassReport>,
        generated_at: DateTime<Utc>,
    ) -> Self {
        let summary = CatalogSummary::tally(&reports);
        if representable_only {
            reports.retain(|r| r.exists.is_representable());
        }
        reports.sort_by(|a, b| a.class.0.cmp(&b.class.0));
        CatalogFile {
            schema_version: SCHEMA_VERSION,
            tool: TOOL_NAME.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            generated_at: generated_at.to_rfc3339_opts(SecondsFormat::Secs, true),
            manifold,
            max_abs,
            representable_only,
            summary,
            reports,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes") + "\n"
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// The catalog timestamp: `SOURCE_DATE_EPOCH` when set, for reproducible
/// output, otherwise the current time.
pub fn timestamp() -> DateTime<Utc> {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(Utc::now)
}
