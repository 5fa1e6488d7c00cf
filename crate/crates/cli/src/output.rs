//! Report serialization: one JSON record per line, then a summary footer.

use std::fmt::Write as _;

use produal::report::ReportSummary;
use produal::{DualityRecord, DualityReport};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Footer {
    pub summary: ReportSummary,
}

pub fn to_jsonl(report: &DualityReport) -> String {
    let mut out = String::new();
    for r in &report.records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out.push_str(&serde_json::to_string(&Footer { summary: report.summary() }).expect("summary serializes"));
    out.push('\n');
    out
}

/// The records and the footer of a report, in file order.
pub fn parse_jsonl(text: &str) -> Result<(DualityReport, Option<ReportSummary>), String> {
    let mut report = DualityReport::default();
    let mut footer = None;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        if footer.is_some() {
            return Err(format!("line {}: record after the summary footer", i + 1));
        }
        if line.starts_with("{\"summary\"") {
            let f: Footer = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
            footer = Some(f.summary);
        } else {
            let r: DualityRecord = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
            report.push(r);
        }
    }
    Ok((report, footer))
}

/// A fixed-width table of the records with a totals line.
pub fn summary_table(report: &DualityReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<18} {:<14} {:>24} {:>24} {:>10} {:<22} {:<4}", "family", "instance", "lhs", "rhs", "gap", "provenance", "ok");
    for r in &report.records {
        let _ = writeln!(
            out,
            "{:<18} {:<14} {:>24} {:>24} {:>10.3e} {:<22} {:<4}",
            r.family,
            r.instance_id,
            format!("[{:.6}, {:.6}]", r.lhs_lower, r.lhs_upper),
            format!("[{:.6}, {:.6}]", r.rhs_lower, r.rhs_upper),
            r.gap,
            r.provenance.as_str(),
            if r.failed { "FAIL" } else { "ok" }
        );
    }
    let s = report.summary();
    let _ = writeln!(out, "\n{} records, {} failures, max gap {:.3e}", s.records, s.failures, s.max_gap);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use produal::{NormBracket, Provenance};

    #[test]
    fn round_trip() {
        let a = NormBracket::point(1.0, Provenance::Exact);
        let report = DualityReport::new(vec![DualityRecord::compare("trivial", "0000", &a, &a, 1e-7, 3)]);
        let text = to_jsonl(&report);
        assert_eq!(text.lines().count(), 2);
        let (back, footer) = parse_jsonl(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(footer.unwrap(), report.summary());
        assert!(summary_table(&report).contains("1 records, 0 failures"));
        assert!(parse_jsonl(&format!("{text}{}\n", serde_json::to_string(&report.records[0]).unwrap())).is_err());
    }
}
