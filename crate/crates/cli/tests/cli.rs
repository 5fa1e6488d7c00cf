use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use produal_cli::output::parse_jsonl;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_produal"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.toml"))
}

fn run(cfg: &Path, dir: &Path) -> (Output, String) {
    let out = dir.join("report.jsonl");
    let o = bin().arg("run").arg(cfg).arg("--out").arg(&out).arg("--summary").arg(dir.join("summary.txt")).output().unwrap();
    (o, std::fs::read_to_string(&out).unwrap_or_default())
}

#[test]
fn trivial_config_has_zero_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let (o, text) = run(&config("trivial"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (report, footer) = parse_jsonl(&text).unwrap();
    assert_eq!(footer.unwrap().failures, 0);
    for r in report.records.iter().filter(|r| !r.instance_id.starts_with("pi-")) {
        assert!(r.gap <= 1e-12, "{}: {}", r.instance_id, r.gap);
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("0 failures"));
}

#[test]
fn freelip_lp_gaps_and_recheck() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("six.toml");
    std::fs::write(&cfg, "family = \"freelip\"\nseed = 4\nsamples = 6\nfreelip.a = { random_points = 6 }\nfreelip.d = { random_points = 6 }\n").unwrap();
    let (o, text) = run(&cfg, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (report, _) = parse_jsonl(&text).unwrap();
    let lp: Vec<_> = report.records.iter().filter(|r| r.instance_id.starts_with("lp.")).collect();
    assert_eq!(lp.len(), 12);
    assert!(lp.iter().all(|r| r.gap <= 1e-8));
    let re = bin().arg("recheck").arg(dir.path().join("report.jsonl")).output().unwrap();
    assert_eq!(re.status.code(), Some(0));
}

#[test]
fn malformed_config_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "family = \"bfs_kothe\"\nbfs.p = \"3\"\nbfs.q = [\n").unwrap();
    let (o, _) = run(&cfg, dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") || err.contains("line 4"), "{err}");
    std::fs::write(&cfg, "family = \"hadamard_triple\"\n").unwrap();
    assert_eq!(run(&cfg, dir.path()).0.status.code(), Some(2));
}

#[test]
fn construction_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("neg.toml");
    std::fs::write(&cfg, "family = \"bfs_kothe\"\nbfs.p = \"2\"\nbfs.q = \"3/2\"\nbfs.measure = [1.0, 2.0]\n").unwrap();
    let (o, _) = run(&cfg, dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn tampered_report_fails_recheck() {
    let dir = tempfile::tempdir().unwrap();
    let (_, text) = run(&config("hadamard_triple"), dir.path());
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, text.replacen("\"gap\":", "\"gap\":1", 1)).unwrap();
    assert_eq!(bin().arg("recheck").arg(&bad).output().unwrap().status.code(), Some(1));
}

#[test]
fn lists_nine_families() {
    let o = bin().arg("list-families").output().unwrap();
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains(" → ")).count(), 9);
    assert!(text.contains("hadamard_triple → "));
    assert!(text.contains("vecmeas_linf → "));
}

#[test]
fn every_sample_config_passes() {
    for name in ["tensor_dual", "custom_pic", "bfs_pth_power", "vecmeas_predual"] {
        let dir = tempfile::tempdir().unwrap();
        let (o, text) = run(&config(name), dir.path());
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(text.lines().last().unwrap().starts_with("{\"summary\""));
    }
}
