//! Per-instance duality records and their reduction into a report.

use serde::{Deserialize, Serialize};

use crate::picalc::{Decomposition, NormBracket, Provenance};

pub const REPORT_VERSION: u32 = 1;

/// Serialized evidence attached to a record and re-verified after a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// A decomposition certifying an upper bound on a `π_c` norm, with the
    /// coefficients `c[k][i][j]` of the map so it can be re-verified alone.
    Decomposition { label: String, decomposition: Decomposition, coefficients: Vec<Vec<Vec<f64>>> },
    /// A functional certifying a lower bound; `feasibility` is its computed
    /// sup over the relevant unit balls (≤ 1 when sound).
    Functional { label: String, values: Vec<f64>, feasibility: f64, provenance: Provenance },
    /// A maximizing point or pair component.
    Point { label: String, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityRecord {
    pub family: String,
    pub instance_id: String,
    pub lhs_lower: f64,
    pub lhs_upper: f64,
    pub rhs_lower: f64,
    pub rhs_upper: f64,
    /// `|mid(lhs) − mid(rhs)|`.
    pub gap: f64,
    pub provenance: Provenance,
    pub seed: u64,
    pub wall_ms: u64,
    pub report_version: u32,
    pub tolerance: f64,
    pub failed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
}

impl DualityRecord {
    /// A record comparing two brackets; it fails iff the brackets are
    /// disjoint beyond `tolerance` (relative to their magnitude).
    pub fn compare(family: &str, instance_id: impl Into<String>, lhs: &NormBracket, rhs: &NormBracket, tolerance: f64, seed: u64) -> Self {
        let gap = (lhs.midpoint() - rhs.midpoint()).abs();
        Self {
            family: family.to_string(),
            instance_id: instance_id.into(),
            lhs_lower: lhs.lower,
            lhs_upper: lhs.upper,
            rhs_lower: rhs.lower,
            rhs_upper: rhs.upper,
            gap,
            provenance: lhs.provenance.weaker(rhs.provenance),
            seed,
            wall_ms: 0,
            report_version: REPORT_VERSION,
            tolerance,
            failed: !lhs.overlaps(rhs, tolerance),
            witnesses: Vec::new(),
        }
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witnesses.push(w);
        self
    }

    /// Marks the record failed (a side condition such as an upper bound or a
    /// cross-check did not hold).
    pub fn fail(mut self) -> Self {
        self.failed = true;
        self
    }

    /// The gap relative to the magnitude of the larger side.
    pub fn relative_gap(&self) -> f64 {
        self.gap / (1.0 + self.lhs_upper.abs().max(self.rhs_upper.abs()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub records: Vec<DualityRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub report_version: u32,
    pub records: usize,
    pub max_gap: f64,
    pub failures: usize,
    pub failed_ids: Vec<String>,
}

impl DualityReport {
    pub fn new(records: Vec<DualityRecord>) -> Self {
        Self { records }
    }

    pub fn push(&mut self, r: DualityRecord) {
        self.records.push(r);
    }

    pub fn extend(&mut self, other: DualityReport) {
        self.records.extend(other.records);
    }

    pub fn max_gap(&self) -> f64 {
        self.records.iter().map(|r| r.gap).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.failed).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            report_version: REPORT_VERSION,
            records: self.records.len(),
            max_gap: self.max_gap(),
            failures: self.failures(),
            failed_ids: self.records.iter().filter(|r| r.failed).map(|r| format!("{}/{}", r.family, r.instance_id)).collect(),
        }
    }
}

impl Witness {
    /// Worst standalone defect: relative reconstruction residual of a
    /// decomposition, or the excess of a recorded feasibility over 1.
    pub fn defect(&self) -> f64 {
        match self {
            Witness::Decomposition { decomposition: d, coefficients: c, .. } => {
                let mut image = vec![0.0; d.target.len()];
                for (x, y) in &d.terms {
                    for (k, slab) in c.iter().enumerate() {
                        if k < image.len() {
                            image[k] += (0..x.len()).map(|i| x[i] * (0..y.len()).map(|j| slab[i][j] * y[j]).sum::<f64>()).sum::<f64>();
                        }
                    }
                }
                if c.len() != d.target.len() {
                    return f64::INFINITY;
                }
                let err: f64 = image.iter().zip(&d.target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                let scale: f64 = d.target.iter().map(|v| v * v).sum::<f64>().sqrt();
                err / scale.max(1.0)
            }
            Witness::Functional { feasibility, .. } => (feasibility - 1.0).max(0.0),
            Witness::Point { values, .. } => {
                if values.iter().all(|v| v.is_finite()) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}
