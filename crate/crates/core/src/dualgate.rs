//! Generalized duals of a product space and multiplication operators.
//!
//! For an operator `T: G → X`, the functional side is
//! `‖φ_T‖ = sup {‖T c(x, y)‖ : x ∈ B_E, y ∈ B_F}`, computed jointly, and the
//! operator side is `‖S_T‖ = sup_x ‖y ↦ T c(x, y)‖_{F → X}`, computed as a
//! nested problem with an exact inner operator norm. The two use separate
//! code paths, so their agreement is a genuine check.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bilinear::{image_bisup, operator_norm, BilinearMap, OperatorNorm};
use crate::error::{check_dim, check_finite, Error, Result};
use crate::optlab::ascent::{normalize_in, seed_point, UnitBall};
use crate::optlab::rng::{child_seed, gaussian_vector, stream};
use crate::par;
use crate::picalc::{run_engine, NormBracket, PiOptions, Provenance};
use crate::report::{DualityRecord, DualityReport, Witness};
use crate::spaces::NormedSpace;

/// A finite class `V` of operators `G → X`.
#[derive(Debug, Clone)]
pub struct OperatorClass {
    pub members: Vec<DMatrix<f64>>,
    pub target: Arc<NormedSpace>,
}

impl OperatorClass {
    pub fn new(members: Vec<DMatrix<f64>>, target: Arc<NormedSpace>, domain_dim: usize) -> Result<Self> {
        for t in &members {
            check_dim(target.dim(), t.nrows())?;
            check_dim(domain_dim, t.ncols())?;
            check_finite(t.as_slice())?;
        }
        Ok(Self { members, target })
    }

    /// Scalar functionals `λ ∈ G*` as `1 × dim G` operators into `ℝ`.
    pub fn functionals(lambdas: &[Vec<f64>], domain_dim: usize) -> Result<Self> {
        let scalar = Arc::new(NormedSpace::lp(1, 1.0)?);
        let members = lambdas.iter().map(|l| DMatrix::from_row_slice(1, l.len(), l)).collect();
        Self::new(members, scalar, domain_dim)
    }
}

/// `φ_T: z ↦ T z` on the range of `ĉ`.
#[derive(Debug, Clone, Copy)]
pub struct PhiFunctional<'a> {
    pub c: &'a BilinearMap,
    pub t: &'a DMatrix<f64>,
    pub target: &'a NormedSpace,
}

/// `S_T: x ↦ (y ↦ T c(x, y))`.
#[derive(Debug, Clone, Copy)]
pub struct MultOperator<'a> {
    pub c: &'a BilinearMap,
    pub t: &'a DMatrix<f64>,
    pub target: &'a NormedSpace,
}

fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|k| m[(r, k)] * v[k]).sum()).collect()
}

fn mat_t_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.ncols()).map(|k| (0..m.nrows()).map(|r| m[(r, k)] * v[r]).sum()).collect()
}

impl PhiFunctional<'_> {
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        mat_vec(self.t, z)
    }

    pub fn on_pair(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        mat_vec(self.t, &self.c.eval_unchecked(x, y))
    }
}

impl MultOperator<'_> {
    /// The matrix of `S_T(x): F → X`.
    pub fn at(&self, x: &[f64]) -> DMatrix<f64> {
        self.t * self.c.left_linearization(x).expect("x lies in E")
    }

    pub fn on_pair(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        mat_vec(&self.at(x), y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiMethod {
    /// The defining bi-supremum.
    Bisup,
    /// Sampled supremum over certified `π_c`-unit vectors; a cross-check.
    ProductBall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DualityOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Multi-term samples for the product-ball cross-check.
    pub product_ball_samples: usize,
    pub exact_tol: f64,
    pub heuristic_tol: f64,
    pub pi: PiOptions,
}

impl Default for DualityOptions {
    fn default() -> Self {
        Self { restarts: 64, seed: 0, product_ball_samples: 4, exact_tol: 1e-7, heuristic_tol: 1e-4, pi: PiOptions::default() }
    }
}

/// The bracket and its maximizing pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Attained {
    pub bracket: NormBracket,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn phi_norm(phi: &PhiFunctional<'_>, method: PhiMethod, opts: &DualityOptions) -> Result<Attained> {
    check_dim(phi.c.codomain().dim(), phi.t.ncols())?;
    check_dim(phi.target.dim(), phi.t.nrows())?;
    match method {
        PhiMethod::Bisup => {
            let s = image_bisup(phi.c, Some(phi.t), phi.target, opts.restarts, opts.seed);
            Ok(Attained { bracket: NormBracket::point(s.value, s.provenance), x: s.x, y: s.y })
        }
        PhiMethod::ProductBall => product_ball(phi, opts),
    }
}

/// Largest `‖T z‖` over sampled `z` with `π_c(z) ≤ 1` certified: single
/// images `c(x, y)` of unit vectors (extreme pairs when the balls are
/// polytopes) and normalized multi-term sums.
fn product_ball(phi: &PhiFunctional<'_>, opts: &DualityOptions) -> Result<Attained> {
    let (e, f) = (phi.c.left(), phi.c.right());
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    match (e.extreme_points(), f.extreme_points()) {
        (Some(ex), Some(ey)) if ex.len() * ey.len() <= 1 << 16 => {
            for x in &ex {
                for y in &ey {
                    pairs.push((x.clone(), y.clone()));
                }
            }
        }
        _ => {
            for k in 0..opts.restarts.max(e.dim() + f.dim()) {
                pairs.push((seed_point(e.as_ref(), k, opts.seed), seed_point(f.as_ref(), k, opts.seed ^ 0x51)));
            }
        }
    }
    let singles = par::map_slice(&pairs, |(x, y)| phi.target.norm_unchecked(&phi.on_pair(x, y)));
    let (k, mut value) = par::argmax_by_value(singles).unwrap_or((0, 0.0));
    let (mut bx, mut by) = pairs.get(k).cloned().unwrap_or_default();
    let multi = par::map_range(opts.product_ball_samples, |s| -> Result<Option<(f64, Vec<f64>)>> {
        let mut rng = stream(child_seed(opts.seed, 0x9b), s as u64);
        let mut z = vec![0.0; phi.c.codomain().dim()];
        for _ in 0..3 {
            let x = normalize_in(e.as_ref(), gaussian_vector(&mut rng, e.dim()));
            let y = normalize_in(f.as_ref(), gaussian_vector(&mut rng, f.dim()));
            for (a, b) in z.iter_mut().zip(phi.c.eval_unchecked(&x, &y)) {
                *a += b;
            }
        }
        // A sample whose LP stalls is dropped; the singles already bound the sup.
        let eng = match run_engine(phi.c, &z, &PiOptions { rank_cap: Some(usize::MAX), ..opts.pi.clone() }) {
            Ok(e) => e,
            Err(crate::error::Error::Lp(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        if eng.upper == 0.0 {
            return Ok(None);
        }
        let zn: Vec<f64> = z.iter().map(|v| v / eng.upper).collect();
        Ok(Some((phi.target.norm_unchecked(&phi.apply(&zn)), zn)))
    });
    for m in multi {
        if let Some((v, _)) = m? {
            if v > value {
                value = v;
                bx.clear();
                by.clear();
            }
        }
    }
    Ok(Attained { bracket: NormBracket::point(value, Provenance::Heuristic), x: bx, y: by })
}

/// `‖S_T‖` as `sup_x ‖S_T(x)‖_{F→X}`: the inner norm by [`operator_norm`],
/// the outer sup by enumeration of `ext(B_E)` or by ascent in `x`.
pub fn mult_norm(s: &MultOperator<'_>, opts: &DualityOptions) -> Result<Attained> {
    check_dim(s.c.codomain().dim(), s.t.ncols())?;
    check_dim(s.target.dim(), s.t.nrows())?;
    let (e, f) = (s.c.left(), s.c.right());
    let inner = |x: &[f64]| -> OperatorNorm { operator_norm(&s.at(x), f, s.target, opts.restarts, opts.seed) };
    if s.t.iter().all(|v| *v == 0.0) {
        let x = seed_point(e.as_ref(), 0, opts.seed);
        let y = seed_point(f.as_ref(), 0, opts.seed);
        return Ok(Attained { bracket: NormBracket::zero(), x, y });
    }
    if let Some(ext) = e.extreme_points() {
        let norms = par::map_slice(&ext, |x| inner(x));
        let (k, value) = par::argmax_by_value(norms.iter().map(|n| n.value)).expect("nonempty vertex list");
        let provenance = norms.iter().map(|n| n.provenance).fold(Provenance::ExtremeEnumeration, Provenance::weaker);
        return Ok(Attained { bracket: NormBracket::point(value, provenance), x: ext[k].clone(), y: norms[k].argmax.clone() });
    }
    let runs = opts.restarts.max(e.dim());
    let results = par::map_range(runs, |k| outer_ascent(s, seed_point(e.as_ref(), k, opts.seed), &inner));
    let (k, value) = par::argmax_by_value(results.iter().map(|r| r.0)).expect("at least one restart");
    let (_, x, y) = results[k].clone();
    Ok(Attained { bracket: NormBracket::point(value, Provenance::Heuristic), x, y })
}

const OUTER_MAX_ITERS: usize = 2_000;

/// `x ← argmax_x ξ*(T c(x, y*))` where `y*` attains the inner norm at the
/// current `x` and `ξ*` norms `T c(x, y*)`; never decreases the inner norm.
fn outer_ascent<I>(s: &MultOperator<'_>, mut x: Vec<f64>, inner: &I) -> (f64, Vec<f64>, Vec<f64>)
where
    I: Fn(&[f64]) -> OperatorNorm,
{
    let e = s.c.left();
    let mut cur = inner(&x);
    for _ in 0..OUTER_MAX_ITERS {
        let image = s.on_pair(&x, &cur.argmax);
        let (xi, _) = s.target.norming_functional(&image);
        let cr = s.c.right_linearization(&cur.argmax).expect("y lies in F");
        let direction = mat_t_vec(&cr, &mat_t_vec(s.t, &xi));
        let nx = e.support(&direction).point;
        let next = inner(&nx);
        if next.value <= cur.value * (1.0 + 1e-15) + 1e-300 {
            if next.value > cur.value {
                (x, cur) = (nx, next);
            }
            break;
        }
        (x, cur) = (nx, next);
    }
    (cur.value, x, cur.argmax)
}

/// Checks `‖φ_T‖ = ‖S_T‖` for every `T` in the class, together with
/// `‖S_T‖ ≤ ‖T‖ ‖c‖` and the product-ball cross-check.
pub fn verify_duality(family: &str, c: &BilinearMap, class: &OperatorClass, opts: &DualityOptions) -> Result<DualityReport> {
    let bound = c.estimate_bound();
    let g = c.codomain();
    let records = par::map_range(class.members.len(), |k| -> Result<DualityRecord> {
        let t = &class.members[k];
        let seed = child_seed(opts.seed, k as u64);
        let local = DualityOptions { seed, ..opts.clone() };
        let phi = PhiFunctional { c, t, target: &class.target };
        let mult = MultOperator { c, t, target: &class.target };
        let lhs = phi_norm(&phi, PhiMethod::Bisup, &local)?;
        let rhs = mult_norm(&mult, &local)?;
        let exact = lhs.bracket.provenance.is_certified() && rhs.bracket.provenance.is_certified();
        let tol = if exact { opts.exact_tol } else { opts.heuristic_tol };
        let mut rec = DualityRecord::compare(family, format!("{k:04}"), &lhs.bracket, &rhs.bracket, tol, seed)
            .with_witness(Witness::Point { label: "phi.x".into(), values: lhs.x.clone() })
            .with_witness(Witness::Point { label: "phi.y".into(), values: lhs.y.clone() })
            .with_witness(Witness::Point { label: "mult.x".into(), values: rhs.x.clone() })
            .with_witness(Witness::Point { label: "mult.y".into(), values: rhs.y.clone() });
        let t_norm = operator_norm(t, g, &class.target, opts.restarts, seed);
        let ceiling = t_norm_upper(&t_norm, t, g, &class.target) * bound.upper;
        if rhs.bracket.lower > ceiling + 1e-9 * (1.0 + ceiling) {
            rec = rec.fail();
        }
        if opts.product_ball_samples > 0 {
            let pb = phi_norm(&phi, PhiMethod::ProductBall, &local)?;
            if pb.bracket.upper > lhs.bracket.upper + 1e-8 * (1.0 + lhs.bracket.upper) {
                rec = rec.fail();
            }
        }
        Ok(rec)
    });
    Ok(DualityReport::new(records.into_iter().collect::<Result<Vec<_>>>()?))
}

/// A valid ceiling for `‖T‖`: the computed norm when certified, else the
/// bound `Σ_k ‖T e_k‖ · β_k` through the coordinate bounds of `B_G`.
fn t_norm_upper(n: &OperatorNorm, t: &DMatrix<f64>, g: &NormedSpace, x: &NormedSpace) -> f64 {
    if n.provenance.is_certified() {
        return n.value;
    }
    let beta = g.coordinate_bounds();
    (0..t.ncols()).map(|k| beta[k] * x.norm_unchecked(&t.column(k).iter().copied().collect::<Vec<_>>())).sum()
}

/// Error unless every member acts on the codomain of `c`.
pub fn check_class(c: &BilinearMap, class: &OperatorClass) -> Result<()> {
    for t in &class.members {
        if t.ncols() != c.codomain().dim() {
            return Err(Error::DimensionMismatch { expected: c.codomain().dim(), got: t.ncols() });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilinear::BilinearKind;

    fn ell(n: usize, p: f64) -> Arc<NormedSpace> {
        Arc::new(NormedSpace::lp(n, p).unwrap())
    }

    fn scalar_factor(p: f64) -> BilinearMap {
        // c(r, y) = r·y: tensor coordinates with a one-dimensional left factor.
        BilinearMap::new(BilinearKind::TensorCoordinates, ell(1, 2.0), ell(2, p), ell(2, p)).unwrap()
    }

    #[test]
    fn scalar_factor_collapses_to_dual_norm() {
        let c = scalar_factor(2.0);
        let t = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        let x = NormedSpace::lp(1, 1.0).unwrap();
        let opts = DualityOptions::default();
        let phi = phi_norm(&PhiFunctional { c: &c, t: &t, target: &x }, PhiMethod::Bisup, &opts).unwrap();
        let mult = mult_norm(&MultOperator { c: &c, t: &t, target: &x }, &opts).unwrap();
        assert!((phi.bracket.upper - 5.0).abs() < 1e-12, "{phi:?}");
        assert!((mult.bracket.upper - 5.0).abs() < 1e-12);
        assert!(mult.bracket.provenance.is_certified());
    }

    #[test]
    fn pointwise_identity_instance() {
        let c = BilinearMap::new(BilinearKind::Pointwise, ell(2, 2.0), ell(2, 2.0), ell(2, 1.0)).unwrap();
        let t = DMatrix::identity(2, 2);
        let x = NormedSpace::lp(2, 1.0).unwrap();
        let opts = DualityOptions::default();
        let phi = phi_norm(&PhiFunctional { c: &c, t: &t, target: &x }, PhiMethod::Bisup, &opts).unwrap();
        let mult = mult_norm(&MultOperator { c: &c, t: &t, target: &x }, &opts).unwrap();
        assert!((phi.bracket.upper - 1.0).abs() < 1e-9, "{phi:?}");
        assert!((mult.bracket.upper - 1.0).abs() < 1e-9, "{mult:?}");
    }

    #[test]
    fn zero_operator() {
        let c = BilinearMap::new(BilinearKind::Pointwise, ell(2, 3.0), ell(2, 2.0), ell(2, 1.0)).unwrap();
        let t = DMatrix::zeros(1, 2);
        let x = NormedSpace::lp(1, 1.0).unwrap();
        let opts = DualityOptions::default();
        assert_eq!(phi_norm(&PhiFunctional { c: &c, t: &t, target: &x }, PhiMethod::Bisup, &opts).unwrap().bracket.upper, 0.0);
        assert_eq!(mult_norm(&MultOperator { c: &c, t: &t, target: &x }, &opts).unwrap().bracket.upper, 0.0);
    }

    #[test]
    fn diagonal_class_on_euclidean_pointwise() {
        let c = BilinearMap::new(BilinearKind::Pointwise, ell(2, 2.0), ell(2, 2.0), ell(2, 1.0)).unwrap();
        let members = (0..6).map(|k| DMatrix::from_diagonal(&vec![1.0 + k as f64 * 0.3, -0.5 + k as f64 * 0.1].into())).collect();
        let class = OperatorClass::new(members, ell(2, 1.0), 2).unwrap();
        let report = verify_duality("test", &c, &class, &DualityOptions::default()).unwrap();
        assert!(report.passed(), "{:?}", report.summary());
        assert!(report.max_gap() <= 1e-7, "{}", report.max_gap());
    }

    #[test]
    fn polyhedral_product_ball_reaches_phi() {
        let c = BilinearMap::new(BilinearKind::TensorCoordinates, ell(2, 1.0), ell(2, f64::INFINITY), ell(4, 2.0)).unwrap();
        let t = DMatrix::from_row_slice(1, 4, &[1.0, -2.0, 0.5, 3.0]);
        let x = NormedSpace::lp(1, 1.0).unwrap();
        let phi = PhiFunctional { c: &c, t: &t, target: &x };
        let opts = DualityOptions::default();
        let a = phi_norm(&phi, PhiMethod::Bisup, &opts).unwrap();
        let b = phi_norm(&phi, PhiMethod::ProductBall, &opts).unwrap();
        assert!(b.bracket.upper <= a.bracket.upper + 1e-6);
        assert!(b.bracket.upper >= a.bracket.upper - 1e-3);
    }
}
