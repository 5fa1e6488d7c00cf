//! One runner per family. Each turns a config into a report whose records are
//! ordered by instance id, independent of thread count.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use produal::bfs::{self, lebesgue, lebesgue_oracle, PiProductSpace, RationalExponent};
use produal::dualgate::{verify_duality, DualityOptions, OperatorClass};
use produal::freelip::{self, lipschitz_dual_norm, molecule_norm, FiniteMetricSpace, LipschitzBiForm, Molecule};
use produal::hadamard::{self, verify_triple_identity};
use produal::optlab::rng::{child_seed, gaussian_vector, stream, uniform_vector};
use produal::picalc::{pi_c_bracket, pi_c_oracle, PiOptions};
use produal::vecmeas::{self, VectorMeasure};
use produal::{par, BilinearKind, BilinearMap, DualityRecord, DualityReport, Error, Exponent, FiniteMeasure, NormBracket, NormedSpace, Provenance, Result, Witness};

use crate::config::{BilinearConfig, ExperimentConfig, Family, KindName, MetricConfig};

/// Tolerance for the molecule LP primal/dual comparison.
pub const LP_TOL: f64 = 1e-8;
/// Tolerance for the p-th power identity.
pub const POWER_TOL: f64 = 1e-12;

pub fn options(cfg: &ExperimentConfig) -> DualityOptions {
    DualityOptions {
        restarts: cfg.duality.restarts,
        seed: cfg.seed,
        product_ball_samples: cfg.duality.product_ball_samples,
        exact_tol: cfg.tolerances.exact,
        heuristic_tol: cfg.tolerances.heuristic,
        pi: PiOptions { seed: cfg.seed, ..cfg.picalc.clone() },
    }
}

/// Runs the configured family. With `timings`, each record carries the mean
/// wall time of the phase that produced it.
pub fn run(cfg: &ExperimentConfig, timings: bool) -> Result<DualityReport> {
    let opts = options(cfg);
    let mut phases = Phases { out: DualityReport::default(), timings };
    match cfg.family {
        Family::Trivial => trivial(cfg, &opts, &mut phases)?,
        Family::TensorDual => tensor_dual(cfg, &opts, &mut phases)?,
        Family::CustomPic => custom_pic(cfg, &opts, &mut phases)?,
        Family::BfsPthPower => bfs_pth_power(cfg, &opts, &mut phases)?,
        Family::BfsKothe => bfs_kothe(cfg, &opts, &mut phases)?,
        Family::HadamardTriple => hadamard_triple(cfg, &opts, &mut phases)?,
        Family::Freelip => freelip_family(cfg, &opts, &mut phases)?,
        Family::VecmeasLinf => vecmeas_linf(cfg, &opts, &mut phases)?,
        Family::VecmeasPredual => vecmeas_predual(cfg, &opts, &mut phases)?,
    }
    Ok(phases.out)
}

struct Phases {
    out: DualityReport,
    timings: bool,
}

impl Phases {
    /// Runs one phase and appends its records, ids prefixed by `tag`.
    fn phase(&mut self, tag: &str, f: impl FnOnce() -> Result<DualityReport>) -> Result<()> {
        let start = Instant::now();
        let mut r = f()?;
        let ms = start.elapsed().as_millis() as u64;
        let n = r.records.len().max(1) as u64;
        for rec in &mut r.records {
            if !tag.is_empty() {
                rec.instance_id = format!("{tag}-{}", rec.instance_id);
            }
            if self.timings {
                rec.wall_ms = ms / n;
            }
        }
        self.out.extend(r);
        Ok(())
    }
}

fn ell(dim: usize, p: Exponent) -> Result<Arc<NormedSpace>> {
    Ok(Arc::new(NormedSpace::weighted_lp(p, vec![1.0; dim])?))
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T> {
    s.as_ref().ok_or_else(|| Error::InvalidParameter { name: "config", reason: format!("missing [{name}] table") })
}

/// Random functionals on `ℝ^g` as a class of operators into `ℝ`.
pub fn random_functionals(g: usize, count: usize, seed: u64) -> Result<OperatorClass> {
    let lambdas: Vec<Vec<f64>> = (0..count).map(|k| gaussian_vector(&mut stream(seed, k as u64), g)).collect();
    OperatorClass::functionals(&lambdas, g)
}

/// `c(a, y) = a y` on `ℝ × F → F`.
pub fn scalar_factor_map(f: Arc<NormedSpace>) -> Result<BilinearMap> {
    let n = f.dim();
    let coeffs = (0..n).map(|k| vec![(0..n).map(|j| if j == k { 1.0 } else { 0.0 }).collect()]).collect();
    BilinearMap::new(BilinearKind::Custom { coeffs }, ell(1, Exponent::Finite(1.0))?, f.clone(), f)
}

fn decomposition_witnesses(c: &BilinearMap, b: &NormBracket, label: &str) -> Result<Vec<Witness>> {
    let mut out = Vec::new();
    if let Some(d) = &b.upper_certificate {
        out.push(Witness::Decomposition { label: format!("{label}.decomposition"), decomposition: d.clone(), coefficients: c.coefficients()? });
    }
    if let Some(l) = &b.lower_certificate {
        out.push(Witness::Functional { label: format!("{label}.functional"), values: l.functional.clone(), feasibility: l.feasibility, provenance: l.provenance });
    }
    Ok(out)
}

/// Compares `π_c(h)` against a known value for each target.
fn pi_records(c: &BilinearMap, targets: &[Vec<f64>], exact: impl Fn(&[f64]) -> Result<NormBracket> + Sync, opts: &DualityOptions, family: &str) -> Result<DualityReport> {
    let records = par::map_range(targets.len(), |k| -> Result<DualityRecord> {
        let seed = child_seed(opts.seed, 1000 + k as u64);
        let lhs = pi_c_bracket(c, &targets[k], &PiOptions { seed, ..opts.pi.clone() })?;
        let rhs = exact(&targets[k])?;
        let tol = if lhs.provenance.weaker(rhs.provenance).is_certified() { opts.exact_tol } else { opts.heuristic_tol };
        let mut rec = DualityRecord::compare(family, format!("{k:04}"), &lhs, &rhs, tol, seed);
        for w in decomposition_witnesses(c, &lhs, "lhs")? {
            rec = rec.with_witness(w);
        }
        Ok(rec)
    });
    Ok(DualityReport::new(records.into_iter().collect::<Result<Vec<_>>>()?))
}

fn trivial(cfg: &ExperimentConfig, opts: &DualityOptions, ph: &mut Phases) -> Result<()> {
    let t = section(&cfg.trivial, "trivial")?;
    let f = ell(t.dim, t.p)?;
    let c = scalar_factor_map(f.clone())?;
    let fam = cfg.family.name();
    ph.phase("", || verify_duality(fam, &c, &random_functionals(t.dim, cfg.samples, child_seed(cfg.seed, 1))?, opts))?;
    let targets: Vec<Vec<f64>> = (0..cfg.duality.theorem_samples).map(|k| gaussian_vector(&mut stream(child_seed(cfg.seed, 2), k as u64), t.dim)).collect();
    ph.phase("pi", || pi_records(&c, &targets, |h| Ok(NormBracket::point(f.norm(h)?, Provenance::Exact)), opts, fam))
}

fn build_map(cfg: &ExperimentConfig, b: &BilinearConfig) -> Result<BilinearMap> {
    let space = |name: &String| -> Result<Arc<NormedSpace>> { Ok(Arc::new(NormedSpace::from_spec(&cfg.spaces[name])?)) };
    let (e, f, g) = (space(&b.spaces[0])?, space(&b.spaces[1])?, space(&b.spaces[2])?);
    let kind = match b.kind {
        KindName::Pointwise => BilinearKind::Pointwise,
        KindName::Hadamard => BilinearKind::Hadamard,
        KindName::ScalarPairing => BilinearKind::ScalarPairing,
        KindName::TensorCoordinates => BilinearKind::TensorCoordinates,
        KindName::Custom => BilinearKind::Custom {
            coeffs: b.coeffs.clone().ok_or(Error::InvalidParameter { name: "coeffs", reason: "custom maps need bilinear.coeffs".into() })?,
        },
    };
    BilinearMap::new(kind, e, f, g)
}

fn tensor_dual(cfg: &ExperimentConfig, opts: &DualityOptions, ph: &mut Phases) -> Result<()> {
    let c = build_map(cfg, section(&cfg.bilinear, "bilinear")?)?;
    let class = random_functionals(c.codomain().dim(), cfg.samples, child_seed(cfg.seed, 1))?;
    ph.phase("", || verify_duality(cfg.family.name(), &c, &class, opts))
}

fn custom_pic(cfg: &ExperimentConfig, opts: &DualityOptions, ph: &mut Phases) -> Result<()> {
    let c = build_map(cfg, section(&cfg.bilinear, "bilinear")?)?;
    let custom = section(&cfg.custom, "custom")?;
    let tractable = c.left().dim() <= 3 && c.right().dim() <= 3;
    let rerun = |h: &[f64]| -> Result<NormBracket> {
        let mut b = pi_c_bracket(&c, h, &PiOptions { seed: child_seed(cfg.seed, 7), ..opts.pi.clone() })?;
        b.lower_certificate = None;
        b.upper_certificate = None;
        Ok(b)
    };
    let reference = |h: &[f64]| -> Result<NormBracket> {
        if !tractable {
            return rerun(h);
        }
        let o = pi_c_oracle(&c, h, custom.resolution)?;
        Ok(NormBracket::new((o.value - o.tolerance).max(0.0), o.value, Provenance::Exact))
    };
    ph.phase("", || pi_records(&c, &custom.targets, reference, opts, cfg.family.name()))
}

fn bfs_pth_power(cfg: &ExperimentConfig, opts: &DualityOptions, ph: &mut Phases) -> Result<()> {
    let b = section(&cfg.bfs, "bfs")?;
    let p = RationalExponent::parse(&b.p)?;
    let pf = match p.to_exponent() {
        Exponent::Finite(v) if v > 1.0 => v,
        _ => return Err(Error::InvalidParameter { name: "bfs.p", reason: "the split needs 1 < p < ∞".into() }),
    };
    let x = Arc::new(lebesgue(&b.measure, RationalExponent::parse("1")?)?);
    let space = PiProductSpace::new(Arc::new(x.pth_power(1.0 / pf)?), Arc::new(x.pth_power(1.0 - 1.0 / pf)?))?;
    let n = b.measure.len();
    let fam = cfg.family.name();
    ph.phase("", || {
        let records = par::map_range(cfg.samples, |k| -> Result<DualityRecord> {
            let seed = child_seed(cfg.seed, k as u64);
            let f = if k == 0 { vec![0.0; n] } else { uniform_vector(&mut stream(seed, 0), n, -2.0, 2.0) };
            let lhs = space.product_norm(&f, &PiOptions { seed, ..opts.pi.clone() })?;
            let rhs = NormBracket::point(x.norm(&f)?, Provenance::Exact);
            let (g, h, cost) = bfs::factorization_split(&x, pf, &f)?;
            let tol = if lhs.provenance.is_certified() { opts.exact_tol } else { opts.heuristic_tol };
            let mut rec = DualityRecord::compare(fam, format!("{k:04}"), &lhs, &rhs, tol, seed)
                .with_witness(Witness::Point { label: "split.g".into(), values: g })
                .with_witness(Witness::Point { label: "split.h".into(), values: h });
            if (cost - rhs.upper).abs() > 1e-9 * (1.0 + rhs.upper) {
                rec = rec.fail();
            }
            for w in decomposition_witnesses(space.map(), &lhs, "lhs")? {
                rec = rec.with_witness(w);
            }
            Ok(rec)
        });
        Ok(DualityReport::new(records.into_iter().collect::<Result<Vec<_>>>()?))
    })?;
    ph.phase("pow", || Ok(power_identity(n, cfg.samples, cfg.seed, fam)))
}

/// `‖·‖_{(ℓ¹_n)_[1/2]}` against `‖·‖_{ℓ²_n}` on random vectors.
pub fn power_identity(n: usize, samples: usize, seed: u64, family: &str) -> DualityReport {
    let half = NormedSpace::lp(n, 1.0).and_then(|s| s.pth_power(0.5)).expect("ℓ¹ is a lattice");
    let l2 = NormedSpace::lp(n, 2.0).expect("valid exponent");
    let records = par::map_range(samples, |k| {
        let s = child_seed(seed, 5000 + k as u64);
        let v = gaussian_vector(&mut stream(s, 0), n);
        let a = NormBracket::point(half.norm(&v).expect("matching dimension"), Provenance::Exact);
        let b = NormBracket::point(l2.norm(&v).expect("matching dimension"), Provenance::Exact);
        DualityRecord::compare(family, format!("{k:04}"), &a, &b, POWER_TOL, s).with_witness(Witness::Point { label: "v".into(), values: v })
    });
    DualityReport::new(records)
}

fn bfs_kothe(cfg: &ExperimentConfig, opts: &DualityOptions, ph: &mut Phases) -> Result<()> {
    let b = section(&cfg.bfs, "bfs")?;
    let p = RationalExponent::parse(&b.p)?;
    let q = RationalExponent::parse(b.q.as_deref().unwrap_or("1"))?;
    p.product(q)?;
    let (x, y) = (Arc::new(lebesgue(&b.measure, p)?), Arc::new(lebesgue(&b.measure, q)?));
    let measure = b.measure.clone();
    let oracle = move |j: &[f64]| lebesgue_oracle(p, q, &measure, j).unwrap_or(f64::NAN);
    let fam = cfg.family.name();
    ph.phase("", || bfs::verify_kothe_product_duality(x.clone(), y.clone(), cfg.samples, Some(&oracle), opts, fam))?;
    let js = sampled(cfg.duality.theorem_samples, b.measure.len(), child_seed(cfg.seed, 3), -2.0, 2.0);
    let (c, class) = bfs::duality_instance(x, y, &js)?;
    ph.phase("thm", || verify_duality(fam, &c, &class, opts))
}

fn sampled(count: usize, dim: usize, seed: u64, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..count).map(|k| uniform_vector(&mut stream(seed, k as u64), dim, lo, hi)).collect()
}

fn hadamard_triple(cfg: &ExperimentConfig, opts: &DualityOptions, ph: &mut Phases) -> Result<()> {
    let h = section(&cfg.hadamard, "hadamard")?;
    let n = h.n + 1;
    let (x, y, z) = (ell(n, h.norms[0])?, ell(n, h.norms[1])?, ell(n, h.norms[2])?);
    let fam = cfg.family.name();
    ph.phase("", || verify_triple_identity(x.clone(), y.clone(), z.clone(), cfg.samples, opts, fam))?;
    let lambdas = sampled(cfg.duality.theorem_samples, n, child_seed(cfg.seed, 3), -3.0, 3.0);
    let c = hadamard::hadamard_map(x, y)?;
    let members = lambdas.iter().map(|l| DMatrix::from_diagonal(&l.clone().into())).collect();
    let class = OperatorClass::new(members, z, n)?;
    ph.phase("thm", || verify_duality(fam, &c, &class, opts))
}

pub fn metric(m: &MetricConfig, seed: u64) -> Result<FiniteMetricSpace> {
    match m {
        MetricConfig::Random { random_points } => FiniteMetricSpace::random(*random_points, seed),
        MetricConfig::Spec(s) => FiniteMetricSpace::try_from(s.clone()),
    }
}

/// Primal and dual molecule LPs on random molecules of `a`.
pub fn molecule_lp_records(a: &FiniteMetricSpace, samples: usize, seed: u64, family: &str) -> Result<DualityReport> {
    let records = par::map_range(samples, |k| -> Result<DualityRecord> {
        let s = child_seed(seed, k as u64);
        let z = if k == 0 { Molecule::zero(a.len()) } else { Molecule::from_reduced(&uniform_vector(&mut stream(s, 0), a.len() - 1, -1.0, 1.0)) };
        let primal = molecule_norm(a, &z)?;
        let (dual, f) = lipschitz_dual_norm(a, &z)?;
        let flow: Vec<f64> = primal.flow.iter().flat_map(|&(i, j, v)| [i as f64, j as f64, v]).collect();
        Ok(DualityRecord::compare(family, format!("{k:04}"), &NormBracket::point(primal.value, Provenance::Exact), &NormBracket::point(dual, Provenance::Exact), LP_TOL, s)
            .with_witness(Witness::Point { label: "molecule".into(), values: z.weights })
            .with_witness(Witness::Point { label: "flow".into(), values: flow })
            .with_witness(Witness::Point { label: "lipschitz".into(), values: f }))
    });
    Ok(DualityReport::new(records.into_iter().collect::<Result<Vec<_>>>()?))
}

/// `L_A(m_{x,0}) = d(x, 0)` for every point.
pub fn isometry_records(a: &FiniteMetricSpace, family: &str) -> Result<DualityReport> {
    let records = (1..a.len())
        .map(|x| -> Result<DualityRecord> {
            let v = molecule_norm(a, &Molecule::elementary(a.len(), x, 0))?.value;
            Ok(DualityRecord::compare(family, format!("{x:04}"), &NormBracket::point(v, Provenance::Exact), &NormBracket::point(a.d(x, 0), Provenance::Exact), 0.0, 0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DualityReport::new(records))
}

fn freelip_family(cfg: &ExperimentConfig, opts: &DualityOptions, ph: &mut Phases) -> Result<()> {
    let fl = section(&cfg.freelip, "freelip")?;
    let a = metric(&fl.a, child_seed(cfg.seed, 11))?;
    let d = metric(&fl.d, child_seed(cfg.seed, 12))?;
    let fam = cfg.family.name();
    ph.phase("lp.a", || molecule_lp_records(&a, cfg.samples, child_seed(cfg.seed, 1), fam))?;
    ph.phase("lp.d", || molecule_lp_records(&d, cfg.samples, child_seed(cfg.seed, 2), fam))?;
    ph.phase("iso.a", || isometry_records(&a, fam))?;
    ph.phase("iso.d", || isometry_records(&d, fam))?;
    ph.phase("bi", || freelip::verify_lipschitz_duality(&a, &d, cfg.samples, child_seed(cfg.seed, 3), fam))?;
    let forms: Vec<LipschitzBiForm> = (0..cfg.duality.theorem_samples).map(|k| LipschitzBiForm::random(a.len(), d.len(), child_seed(cfg.seed, 100 + k as u64))).collect();
    let (c, class) = freelip::duality_instance(&a, &d, &forms)?;
    ph.phase("thm", || verify_duality(fam, &c, &class, opts))
}

pub fn vector_measure(cfg: &ExperimentConfig) -> Result<(VectorMeasure, f64)> {
    let v = section(&cfg.vecmeas, "vecmeas")?;
    let x = ell(v.k, v.value_norm)?;
    let m = match (&v.atoms, v.n) {
        (Some(atoms), _) => VectorMeasure::new(atoms.clone(), x)?,
        (None, Some(n)) => VectorMeasure::random(n, x, child_seed(cfg.seed, 21))?,
        (None, None) => return Err(Error::InvalidParameter { name: "vecmeas", reason: "needs atoms or n".into() }),
    };
    let p = match v.p {
        Exponent::Finite(p) if p > 1.0 => p,
        _ => return Err(Error::InvalidParameter { name: "vecmeas.p", reason: "needs 1 < p < ∞".into() }),
    };
    Ok((m, p))
}

fn vecmeas_linf(cfg: &ExperimentConfig, opts: &DualityOptions, ph: &mut Phases) -> Result<()> {
    let (m, p) = vector_measure(cfg)?;
    let fam = cfg.family.name();
    ph.phase("linf", || vecmeas::verify_linf_identification(&m, p, cfg.samples, opts, fam))?;
    ph.phase("norm", || vecmeas::verify_lp_duality_norm(&m, p, cfg.samples, opts, fam))?;
    let h0s = sampled(cfg.duality.theorem_samples, m.len(), child_seed(cfg.seed, 3), -2.0, 2.0);
    let (c, class) = vecmeas::duality_instance(&m, p, &h0s)?;
    ph.phase("thm", || verify_duality(fam, &c, &class, opts))
}

fn vecmeas_predual(cfg: &ExperimentConfig, opts: &DualityOptions, ph: &mut Phases) -> Result<()> {
    let (m, p) = vector_measure(cfg)?;
    ph.phase("", || vecmeas::verify_predual(&m, p, cfg.samples, opts, cfg.family.name()))
}

/// A lattice `L^p(μ)` for tests and suites.
pub fn lattice(masses: &[f64], p: &str) -> Result<Arc<NormedSpace>> {
    Ok(Arc::new(lebesgue(&FiniteMeasure::new(masses.to_vec())?, RationalExponent::parse(p)?)?))
}
