//! The acceptance battery. Prints one line per criterion and exits nonzero if
//! any fails.

use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use produal::bfs::{self, lebesgue_oracle, RationalExponent};
use produal::dualgate::DualityOptions;
use produal::freelip::{self, FiniteMetricSpace};
use produal::hadamard::verify_triple_identity;
use produal::optlab::rng::{child_seed, gaussian_vector, stream};
use produal::picalc::{pi_c_bracket, pi_c_oracle, PiOptions};
use produal::vecmeas::{self, VectorMeasure};
use produal::{BilinearKind, BilinearMap, FiniteMeasure, NormedSpace, Provenance};
use produal_cli::families::{isometry_records, molecule_lp_records, power_identity};
use produal_cli::suite::theorem_suite;

type Outcome = Result<String, String>;

fn ell(n: usize, p: f64) -> Arc<NormedSpace> {
    Arc::new(NormedSpace::lp(n, p).unwrap())
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn isometry() -> Outcome {
    let start = Instant::now();
    let r = theorem_suite(2024).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut families: Vec<&str> = r.records.iter().map(|x| x.family.as_str()).collect();
    families.sort();
    families.dedup();
    let bad: Vec<String> = r
        .records
        .iter()
        .filter(|x| x.failed || x.gap > if x.provenance.is_certified() { 1e-7 } else { 1e-4 })
        .map(|x| format!("{}/{} gap {:e}", x.family, x.instance_id, x.gap))
        .collect();
    let exact = r.records.iter().filter(|x| x.provenance.is_certified()).count();
    check(
        bad.is_empty() && r.records.len() >= 100 && families.len() >= 5 && elapsed <= Duration::from_secs(300),
        format!("{} instances ({exact} certified) over {} families, max gap {:.2e}, {:.1}s {bad:?}", r.records.len(), families.len(), r.max_gap(), elapsed.as_secs_f64()),
    )
}

fn pth_power() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=8 {
        worst = power_identity(n, 125, n as u64, "pow").records.iter().map(|r| r.gap).fold(worst, f64::max);
    }
    check(worst <= 1e-12, format!("1000 vectors, max |difference| {worst:.2e}"))
}

fn kothe() -> Outcome {
    let cases = [("3", "4", vec![1.0, 0.5, 2.0]), ("2", "2", vec![1.0; 4]), ("4/3", "5", vec![0.3, 1.0, 2.0, 0.7, 1.1]), ("3/2", "7/2", vec![1.0, 2.0, 0.5, 0.25, 1.5, 3.0]), ("1", "inf", vec![1.0, 2.0, 3.0])];
    let mut worst = 0.0f64;
    for (i, (p, q, masses)) in cases.into_iter().enumerate() {
        let mu = FiniteMeasure::new(masses).unwrap();
        let (pe, qe) = (RationalExponent::parse(p).unwrap(), RationalExponent::parse(q).unwrap());
        let x = Arc::new(bfs::lebesgue(&mu, pe).unwrap());
        let y = Arc::new(bfs::lebesgue(&mu, qe).unwrap());
        let oracle = |j: &[f64]| lebesgue_oracle(pe, qe, &mu, j).unwrap();
        let opts = DualityOptions { seed: i as u64, product_ball_samples: 1, ..DualityOptions::default() };
        let r = bfs::verify_kothe_product_duality(x, y, 10, Some(&oracle), &opts, "kothe").map_err(|e| e.to_string())?;
        if !r.passed() {
            return Err(format!("({p}, {q}): {:?}", r.summary().failed_ids));
        }
        worst = worst.max(r.max_gap());
    }
    check(true, format!("5 exponent pairs × 10 functionals agree with the oracle to 1e-6, max side gap {worst:.2e}"))
}

fn hadamard() -> Outcome {
    let cases = [(2.0, 2.0, 1.0, 5), (1.5, 3.0, 1.0, 4), (4.0, 4.0, 2.0, 3), (1.0, f64::INFINITY, 3.0, 5), (3.0, 1.5, 1.25, 2)];
    let mut worst = 0.0f64;
    for (i, (a, b, c, n)) in cases.into_iter().enumerate() {
        let opts = DualityOptions { seed: 10 + i as u64, ..DualityOptions::default() };
        let r = verify_triple_identity(ell(n + 1, a), ell(n + 1, b), ell(n + 1, c), 50, &opts, "h").map_err(|e| e.to_string())?;
        if !r.passed() || r.max_gap() > 1e-6 {
            return Err(format!("({a}, {b}, {c}) N={n}: gap {:e}", r.max_gap()));
        }
        worst = worst.max(r.max_gap());
    }
    check(true, format!("5 exponent triples × 50 multipliers, max gap {worst:.2e}"))
}

fn molecules() -> Outcome {
    let (mut lp, mut iso, mut bi) = (0.0f64, 0.0f64, 0.0f64);
    for s in 0..100u64 {
        let a = FiniteMetricSpace::random(2 + (s as usize % 7), child_seed(77, s)).unwrap();
        let r = molecule_lp_records(&a, 4, s, "lp").map_err(|e| e.to_string())?;
        lp = lp.max(r.max_gap());
        iso = iso.max(isometry_records(&a, "iso").map_err(|e| e.to_string())?.max_gap());
    }
    for s in 0..6u64 {
        let a = FiniteMetricSpace::random(2 + s as usize % 5, child_seed(78, s)).unwrap();
        let d = FiniteMetricSpace::random(6 - s as usize % 5, child_seed(79, s)).unwrap();
        let r = freelip::verify_lipschitz_duality(&a, &d, 6, s, "bi").map_err(|e| e.to_string())?;
        if !r.passed() {
            return Err(format!("bi-form {:?}", r.summary().failed_ids));
        }
        bi = bi.max(r.max_gap());
    }
    check(lp <= 1e-8 && iso == 0.0 && bi <= 1e-6, format!("100 spaces: LP gap {lp:.2e}, isometry gap {iso:e}; bi-form gap {bi:.2e}"))
}

fn vector_measures() -> Outcome {
    let mut worst = 0.0f64;
    let mut runs = 0;
    for (case, (k, x, n)) in [(1, 1.0, 6), (2, f64::INFINITY, 3), (2, 2.0, 4), (3, 1.0, 3)].into_iter().enumerate() {
        let m = VectorMeasure::random(n, ell(k, x), child_seed(90, case as u64)).unwrap();
        for (pi, p) in [4.0 / 3.0, 2.0, 4.0].into_iter().enumerate() {
            let opts = DualityOptions { seed: (case * 3 + pi) as u64, ..DualityOptions::default() };
            for (name, r) in [
                ("linf", vecmeas::verify_linf_identification(&m, p, 3, &opts, "v")),
                ("predual", vecmeas::verify_predual(&m, p, 3, &opts, "v")),
                ("norm", vecmeas::verify_lp_duality_norm(&m, p, 3, &opts, "v")),
            ] {
                let r = r.map_err(|e| format!("{name} k={k}: {e}"))?;
                if !r.passed() || r.max_gap() > 1e-6 {
                    return Err(format!("{name} k={k} p={p}: gap {:e} {:?}", r.max_gap(), r.summary().failed_ids));
                }
                worst = worst.max(r.max_gap());
                runs += r.records.len();
            }
        }
    }
    check(true, format!("{runs} comparisons over k ∈ {{1,2,3}}, p ∈ {{4/3,2,4}}, max gap {worst:.2e}"))
}

fn soundness() -> Outcome {
    let maps = [
        BilinearMap::new(BilinearKind::Pointwise, ell(2, 2.0), ell(2, 2.0), ell(2, 1.0)).unwrap(),
        BilinearMap::new(BilinearKind::Pointwise, ell(3, 3.0), ell(3, 1.5), ell(3, 1.0)).unwrap(),
        BilinearMap::new(BilinearKind::TensorCoordinates, ell(2, 1.0), ell(2, f64::INFINITY), ell(4, 1.0)).unwrap(),
        BilinearMap::new(BilinearKind::TensorCoordinates, ell(2, 2.0), ell(2, 2.0), ell(4, 1.0)).unwrap(),
        BilinearMap::new(BilinearKind::ScalarPairing, ell(2, 2.0), ell(2, 2.0), ell(1, 1.0)).unwrap(),
        BilinearMap::new(BilinearKind::Custom { coeffs: vec![vec![vec![1.0, 0.5], vec![0.0, 1.0]], vec![vec![0.0, 1.0], vec![-1.0, 0.0]]] }, ell(2, 2.0), ell(2, 1.0), ell(2, 2.0)).unwrap(),
    ];
    let opts = PiOptions::default();
    let (mut oracle_checks, mut axiom_checks) = (0, 0);
    for (mi, c) in maps.iter().enumerate() {
        let g = c.codomain().dim();
        for s in 0..4u64 {
            let h1 = gaussian_vector(&mut stream(child_seed(300, mi as u64), s), g);
            let h2 = gaussian_vector(&mut stream(child_seed(301, mi as u64), s), g);
            let b1 = pi_c_bracket(c, &h1, &opts).map_err(|e| e.to_string())?;
            let resolution = if c.left().dim() == 3 { 0.05 } else { 0.01 };
            let o = pi_c_oracle(c, &h1, resolution).map_err(|e| e.to_string())?;
            let slack = 1e-9 * (1.0 + o.value);
            if b1.lower > o.value + slack || b1.upper < o.value - o.tolerance - slack {
                return Err(format!("map {mi}: bracket [{}, {}] misses oracle {} ± {}", b1.lower, b1.upper, o.value, o.tolerance));
            }
            oracle_checks += 1;
            let h12: Vec<f64> = h1.iter().zip(&h2).map(|(a, b)| a + b).collect();
            let (b2, b12) = (pi_c_bracket(c, &h2, &opts).unwrap(), pi_c_bracket(c, &h12, &opts).unwrap());
            let scaled = pi_c_bracket(c, &h1.iter().map(|v| -2.5 * v).collect::<Vec<_>>(), &opts).unwrap();
            let tol = if b1.provenance == Provenance::Heuristic { 1e-4 } else { 1e-7 };
            if b12.lower > b1.upper + b2.upper + tol || (scaled.midpoint() - 2.5 * b1.midpoint()).abs() > tol * (1.0 + scaled.midpoint()) || b1.lower < -tol {
                return Err(format!("map {mi}: seminorm axioms violated"));
            }
            axiom_checks += 1;
        }
    }
    // Two representations with one image under the pointwise product.
    let c = &maps[1];
    let (x, y) = (vec![1.0, -2.0, 0.5], vec![0.3, 1.0, 1.0]);
    let u = c.evaluate(&x, &y).unwrap();
    let kernel = c.evaluate(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
    let v: Vec<f64> = u.iter().zip(&kernel).map(|(a, b)| a + b).collect();
    let (bu, bv) = (pi_c_bracket(c, &u, &opts).unwrap(), pi_c_bracket(c, &v, &opts).unwrap());
    let kernel_ok = kernel.iter().all(|k| *k == 0.0) && (bu.lower - bv.lower).abs() <= 1e-12 && (bu.upper - bv.upper).abs() <= 1e-12 && bu.upper <= c.left().norm(&x).unwrap() * c.right().norm(&y).unwrap() + 1e-9;
    check(kernel_ok, format!("{oracle_checks} oracle comparisons, {axiom_checks} axiom checks, kernel consistency {}", if kernel_ok { "holds" } else { "fails" }))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let mut checked = 0;
    for name in ["trivial", "hadamard_triple", "freelip", "vecmeas_linf", "custom_pic"] {
        let cfg = format!("{root}/{name}.toml");
        let mut outputs = Vec::new();
        for threads in ["1", "3", "1"] {
            let out = dir.path().join(format!("{name}-{threads}-{}.jsonl", outputs.len()));
            let status = Command::new(env!("CARGO_BIN_EXE_produal"))
                .args(["run", &cfg, "--out"])
                .arg(&out)
                .args(["--summary", "/dev/null"])
                .env("PRODUAL_THREADS", threads)
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("{name}: exit {status}"));
            }
            outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            return Err(format!("{name}: reports differ"));
        }
        checked += 1;
    }
    check(true, format!("{checked} configs byte-identical across 1/3/1 threads"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("isometry of φ_T and S_T", isometry),
        ("p-th power identity", pth_power),
        ("Köthe product duality", kothe),
        ("Hadamard triple identity", hadamard),
        ("molecule LP duality", molecules),
        ("vector-measure identifications", vector_measures),
        ("π_c bracket soundness", soundness),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {} PASS {name} ({secs:.1}s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} FAIL {name} ({secs:.1}s): {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 8 passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
