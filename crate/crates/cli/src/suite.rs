//! A fixed cross-family battery of `‖φ_T‖ = ‖S_T‖` comparisons.

use std::sync::Arc;

use nalgebra::DMatrix;
use produal::dualgate::{verify_duality, DualityOptions, OperatorClass};
use produal::freelip::{self, FiniteMetricSpace, LipschitzBiForm};
use produal::optlab::rng::{child_seed, stream, uniform_vector};
use produal::vecmeas::{self, VectorMeasure};
use produal::{bfs, hadamard, BilinearKind, BilinearMap, DualityReport, NormedSpace, Result};

use crate::families::{lattice, random_functionals, scalar_factor_map};

fn ell(n: usize, p: f64) -> Result<Arc<NormedSpace>> {
    Ok(Arc::new(NormedSpace::lp(n, p)?))
}

fn tagged(mut r: DualityReport, tag: &str) -> DualityReport {
    for rec in &mut r.records {
        rec.instance_id = format!("{tag}-{}", rec.instance_id);
    }
    r
}

fn vectors(count: usize, dim: usize, seed: u64, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..count).map(|k| uniform_vector(&mut stream(seed, k as u64), dim, lo, hi)).collect()
}

/// Runs the battery; every record compares the bi-sup bracket with the
/// nested operator-norm bracket.
pub fn theorem_suite(seed: u64) -> Result<DualityReport> {
    let opts = DualityOptions { seed, ..DualityOptions::default() };
    let mut out = DualityReport::default();
    let s = |k: u64| child_seed(seed, k);

    for (i, p) in [2.0, 3.0].into_iter().enumerate() {
        let c = scalar_factor_map(ell(3, p)?)?;
        out.extend(tagged(verify_duality("trivial", &c, &random_functionals(3, 10, s(10 + i as u64))?, &opts)?, &format!("l{p}")));
    }

    for (i, (pe, pf)) in [(1.0, f64::INFINITY), (2.0, 2.0)].into_iter().enumerate() {
        let c = BilinearMap::new(BilinearKind::TensorCoordinates, ell(2, pe)?, ell(2, pf)?, ell(4, 1.0)?)?;
        out.extend(tagged(verify_duality("tensor_dual", &c, &random_functionals(4, 10, s(20 + i as u64))?, &opts)?, &format!("t{i}")));
    }

    for (i, (p, q)) in [("3", "4"), ("2", "2")].into_iter().enumerate() {
        let masses = [1.0, 0.5, 2.0];
        let (c, class) = bfs::duality_instance(lattice(&masses, p)?, lattice(&masses, q)?, &vectors(10, 3, s(30 + i as u64), -2.0, 2.0))?;
        out.extend(tagged(verify_duality("bfs_kothe", &c, &class, &opts)?, &format!("b{i}")));
    }

    for (i, (a, b, z)) in [(2.0, 2.0, 1.0), (1.5, 3.0, 2.0)].into_iter().enumerate() {
        let c = hadamard::hadamard_map(ell(3, a)?, ell(3, b)?)?;
        let members = vectors(10, 3, s(40 + i as u64), -3.0, 3.0).into_iter().map(|l| DMatrix::from_diagonal(&l.into())).collect();
        let class = OperatorClass::new(members, ell(3, z)?, 3)?;
        out.extend(tagged(verify_duality("hadamard_triple", &c, &class, &opts)?, &format!("h{i}")));
    }

    let (a, d) = (FiniteMetricSpace::random(4, s(50))?, FiniteMetricSpace::random(3, s(51))?);
    let forms: Vec<LipschitzBiForm> = (0..20).map(|k| LipschitzBiForm::random(4, 3, s(52 + k))).collect();
    let (c, class) = freelip::duality_instance(&a, &d, &forms)?;
    out.extend(tagged(verify_duality("freelip", &c, &class, &opts)?, "f"));

    for (i, p) in [2.0, 4.0 / 3.0].into_iter().enumerate() {
        let m = VectorMeasure::random(3, ell(1, 1.0)?, s(60 + i as u64))?;
        let (c, class) = vecmeas::duality_instance(&m, p, &vectors(8, 3, s(62 + i as u64), -2.0, 2.0))?;
        out.extend(tagged(verify_duality("vecmeas_linf", &c, &class, &opts)?, &format!("v{i}")));
    }
    let m = VectorMeasure::random(3, ell(2, f64::INFINITY)?, s(70))?;
    let (c, class) = vecmeas::duality_instance(&m, 2.0, &vectors(2, 3, s(71), -2.0, 2.0))?;
    let light = DualityOptions { restarts: 8, product_ball_samples: 0, ..opts.clone() };
    out.extend(tagged(verify_duality("vecmeas_linf", &c, &class, &light)?, "v2"));

    Ok(out)
}
