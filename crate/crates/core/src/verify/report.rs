use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::field::{FieldSnapshot, ScalarField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TheoremTag {
    #[serde(rename = "T1.1")]
    T1_1,
    #[serde(rename = "C1.2")]
    C1_2,
    #[serde(rename = "T1.4")]
    T1_4,
    #[serde(rename = "T1.7")]
    T1_7,
    #[serde(rename = "C1.8")]
    C1_8,
    #[serde(rename = "T1.10")]
    T1_10,
    #[serde(rename = "T1.12")]
    T1_12,
    #[serde(rename = "P2.1")]
    P2_1,
    #[serde(rename = "T2.5")]
    T2_5,
}

impl TheoremTag {
    pub const ALL: [TheoremTag; 9] = [
        TheoremTag::T1_1,
        TheoremTag::C1_2,
        TheoremTag::T1_4,
        TheoremTag::T1_7,
        TheoremTag::C1_8,
        TheoremTag::T1_10,
        TheoremTag::T1_12,
        TheoremTag::P2_1,
        TheoremTag::T2_5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremTag::T1_1 => "T1.1",
            TheoremTag::C1_2 => "C1.2",
            TheoremTag::T1_4 => "T1.4",
            TheoremTag::T1_7 => "T1.7",
            TheoremTag::C1_8 => "C1.8",
            TheoremTag::T1_10 => "T1.10",
            TheoremTag::T1_12 => "T1.12",
            TheoremTag::P2_1 => "P2.1",
            TheoremTag::T2_5 => "T2.5",
        }
    }
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Violated,
    Inconclusive,
}

impl Verdict {
    /// Verdict for a margin that should be non-negative: consistent down to
    /// `-slack`, violated only below `-10 · slack`.
    pub fn from_margin(margin: f64, slack: f64) -> Verdict {
        if !margin.is_finite() {
            Verdict::Inconclusive
        } else if margin >= -slack {
            Verdict::Consistent
        } else if margin < -10.0 * slack {
            Verdict::Violated
        } else {
            Verdict::Inconclusive
        }
    }

    /// Combines verdicts: any violation wins, then any inconclusive.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Violated, _) | (_, Verdict::Violated) => Verdict::Violated,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Consistent,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A field kept with a report so that a contradiction can be replayed.
#[derive(Clone, Debug)]
pub struct Evidence {
    pub label: String,
    pub field: ScalarField,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceSnapshot {
    pub label: String,
    pub field: FieldSnapshot,
}

/// Outcome of one experiment.
///
/// `runtime` and `evidence` are not serialized: reports must be byte-identical
/// across reruns, so timings live in the run manifest and fields in their own
/// files.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    pub theorem: TheoremTag,
    pub inputs_digest: String,
    pub masses: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, f64>,
    pub margins: BTreeMap<String, f64>,
    pub verdict: Verdict,
    /// Discretization slack `ε_h` the verdict was judged against.
    pub slack: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip)]
    pub runtime: Duration,
    #[serde(skip)]
    pub evidence: Vec<Evidence>,
}

impl ExperimentReport {
    pub fn new(id: impl Into<String>, theorem: TheoremTag, inputs_digest: String, slack: f64) -> ExperimentReport {
        ExperimentReport {
            id: id.into(),
            theorem,
            inputs_digest,
            masses: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            margins: BTreeMap::new(),
            verdict: Verdict::Consistent,
            slack,
            notes: Vec::new(),
            runtime: Duration::ZERO,
            evidence: Vec::new(),
        }
    }

    pub fn mass(&mut self, label: impl Into<String>, value: f64) -> &mut Self {
        self.masses.insert(label.into(), value);
        self
    }

    pub fn threshold(&mut self, label: impl Into<String>, value: f64) -> &mut Self {
        self.thresholds.insert(label.into(), value);
        self
    }

    pub fn margin(&mut self, label: impl Into<String>, value: f64) -> &mut Self {
        self.margins.insert(label.into(), value);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    /// Folds `v` into the verdict.
    pub fn judge(&mut self, v: Verdict) -> &mut Self {
        self.verdict = self.verdict.and(v);
        self
    }

    pub fn keep(&mut self, label: impl Into<String>, field: &ScalarField) -> &mut Self {
        self.evidence.push(Evidence { label: label.into(), field: field.clone() });
        self
    }

    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }

    /// The smallest margin, used as the headline number of summaries.
    pub fn worst_margin(&self) -> Option<f64> {
        self.margins.values().copied().filter(|m| !m.is_nan()).reduce(f64::min)
    }

    pub fn evidence_snapshots(&self) -> Vec<EvidenceSnapshot> {
        self.evidence.iter().map(|e| EvidenceSnapshot { label: e.label.clone(), field: e.field.snapshot() }).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Hex SHA-256 of the JSON encoding of `inputs`.
pub fn digest_of<T: Serialize + ?Sized>(inputs: &T) -> String {
    let bytes = serde_json::to_vec(inputs).expect("inputs serialize");
    hex::encode(Sha256::digest(bytes))
}

/// `experiment,theorem,margin,verdict,runtime_s` rows, one per report.
pub fn summary_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("experiment,theorem,margin,verdict,runtime_s\n");
    for r in reports {
        let margin = r.worst_margin().map(|m| m.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{},{:.3}\n", r.id, r.theorem, margin, r.verdict, r.runtime.as_secs_f64()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_bands() {
        assert_eq!(Verdict::from_margin(0.5, 1e-3), Verdict::Consistent);
        assert_eq!(Verdict::from_margin(-5e-4, 1e-3), Verdict::Consistent);
        assert_eq!(Verdict::from_margin(-5e-3, 1e-3), Verdict::Inconclusive);
        assert_eq!(Verdict::from_margin(-2e-2, 1e-3), Verdict::Violated);
        assert_eq!(Verdict::from_margin(f64::NAN, 1e-3), Verdict::Inconclusive);
        assert_eq!(Verdict::Consistent.and(Verdict::Inconclusive), Verdict::Inconclusive);
        assert_eq!(Verdict::Inconclusive.and(Verdict::Violated), Verdict::Violated);
    }

    #[test]
    fn report_json_skips_runtime() {
        let mut r = ExperimentReport::new("x", TheoremTag::T1_4, digest_of(&1), 1e-4);
        r.runtime = Duration::from_secs(3);
        r.margin("a", 0.1).mass("m", 2.0);
        let json = r.to_json().unwrap();
        assert!(json.contains("\"theorem\": \"T1.4\""));
        assert!(json.contains("\"verdict\": \"consistent\""));
        assert!(!json.contains("runtime"));
        let back: ExperimentReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.margins, r.margins);
        assert_eq!(TheoremTag::ALL.len(), 9);
    }
}
