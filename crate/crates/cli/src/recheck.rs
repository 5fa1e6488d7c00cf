//! Standalone re-verification of a written report.

use produal::{DualityReport, NormBracket};

use crate::output::parse_jsonl;

/// Largest admissible witness defect.
pub const WITNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecheckOutcome {
    pub records: usize,
    pub problems: Vec<String>,
}

impl RecheckOutcome {
    pub fn ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Internal consistency of every record plus its witnesses.
pub fn recheck_report(report: &DualityReport) -> RecheckOutcome {
    let mut problems = Vec::new();
    for r in &report.records {
        let id = format!("{}/{}", r.family, r.instance_id);
        let slack = |v: f64| 1e-12 * (1.0 + v.abs());
        if r.lhs_lower > r.lhs_upper + slack(r.lhs_upper) || r.rhs_lower > r.rhs_upper + slack(r.rhs_upper) {
            problems.push(format!("{id}: bracket with lower > upper"));
        }
        let lhs = NormBracket::new(r.lhs_lower, r.lhs_upper, r.provenance);
        let rhs = NormBracket::new(r.rhs_lower, r.rhs_upper, r.provenance);
        let gap = (lhs.midpoint() - rhs.midpoint()).abs();
        if (gap - r.gap).abs() > slack(gap) {
            problems.push(format!("{id}: recorded gap {} but brackets give {gap}", r.gap));
        }
        if !lhs.overlaps(&rhs, r.tolerance) && !r.failed {
            problems.push(format!("{id}: disjoint brackets not marked failed"));
        }
        for w in &r.witnesses {
            let d = w.defect();
            if !(d <= WITNESS_TOL) {
                problems.push(format!("{id}: witness defect {d:e}"));
            }
        }
    }
    RecheckOutcome { records: report.records.len(), problems }
}

/// Parses a JSONL report and checks records and footer.
pub fn recheck_text(text: &str) -> Result<RecheckOutcome, String> {
    let (report, footer) = parse_jsonl(text)?;
    let mut out = recheck_report(&report);
    match footer {
        None => out.problems.push("missing summary footer".into()),
        Some(s) if s != report.summary() => out.problems.push("summary footer does not match the records".into()),
        Some(_) => {}
    }
    Ok(out)
}
