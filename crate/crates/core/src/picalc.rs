//! The `π_c` norm of a bilinear map as a certified bracket.
//!
//! `π_c(h)` is the gauge of the absolutely convex hull of
//! `{c(x, y) : ‖x‖ = ‖y‖ = 1}`. The engine runs column generation on that
//! hull: a restricted master LP over finitely many atoms `c(x_k, y_k)` gives a
//! feasible decomposition (upper end) and a dual functional `λ`; pricing
//! computes `ρ(λ) = sup |λ(c(x, y))|`, which both certifies the lower end
//! `|λ(h)|/ρ(λ)` and supplies the next atom.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bilinear::{bilinear_form_norm, BilinearMap};
use crate::error::{check_dim, check_finite, Error, Result};
use crate::optlab::lp::{solve_lp, LpProblem, Relation, Sense};
use crate::optlab::rng::{gaussian_vector, stream};
use crate::optlab::ascent::normalize_in;
use crate::par;
use crate::spaces::{lp_norm, Exponent, NormedSpace};

/// How a bound was certified, from strongest to weakest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Closed form or LP optimality.
    Exact,
    /// Exhaustive enumeration of extreme points.
    ExtremeEnumeration,
    /// Best value found by a local method; not a certificate.
    Heuristic,
}

impl Provenance {
    pub fn weaker(self, other: Provenance) -> Provenance {
        self.max(other)
    }

    pub fn is_certified(self) -> bool {
        self != Provenance::Heuristic
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::ExtremeEnumeration => "extreme_enumeration",
            Provenance::Heuristic => "heuristic",
        }
    }
}

/// A finite decomposition `target = Σ c(x_i, y_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub terms: Vec<(Vec<f64>, Vec<f64>)>,
    pub target: Vec<f64>,
}

impl Decomposition {
    pub fn empty(target: Vec<f64>) -> Self {
        Self { terms: Vec::new(), target }
    }

    /// `Σ ‖x_i‖ ‖y_i‖`.
    pub fn cost(&self, c: &BilinearMap) -> f64 {
        self.terms.iter().map(|(x, y)| c.left().norm_unchecked(x) * c.right().norm_unchecked(y)).sum()
    }

    pub fn image(&self, c: &BilinearMap) -> Vec<f64> {
        let mut acc = vec![0.0; c.codomain().dim()];
        for (x, y) in &self.terms {
            for (a, v) in acc.iter_mut().zip(c.eval_unchecked(x, y)) {
                *a += v;
            }
        }
        acc
    }

    /// Euclidean distance between the image and the target, relative to
    /// `1 + ‖target‖`.
    pub fn residual(&self, c: &BilinearMap) -> f64 {
        let img = self.image(c);
        let diff: Vec<f64> = img.iter().zip(&self.target).map(|(a, b)| a - b).collect();
        lp_norm(&diff, Exponent::Finite(2.0)) / (1.0 + lp_norm(&self.target, Exponent::Finite(2.0)))
    }

    pub fn scaled(&self, alpha: f64) -> Decomposition {
        let s = alpha.abs().sqrt();
        let sign = if alpha < 0.0 { -1.0 } else { 1.0 };
        Decomposition {
            terms: self
                .terms
                .iter()
                .map(|(x, y)| (x.iter().map(|v| sign * s * v).collect(), y.iter().map(|v| s * v).collect()))
                .collect(),
            target: self.target.iter().map(|v| alpha * v).collect(),
        }
    }

    /// Concatenation: a decomposition of the sum of the two targets.
    pub fn join(&self, other: &Decomposition) -> Decomposition {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Decomposition { terms, target: self.target.iter().zip(&other.target).map(|(a, b)| a + b).collect() }
    }
}

/// A functional `λ` on `G` scaled so that `sup |λ(c(x, y))| ≤ 1` over the unit
/// balls, as far as `provenance` certifies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub functional: Vec<f64>,
    /// `sup |λ(c(x, y))|` after scaling; 1 up to rounding.
    pub feasibility: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_certificate: Option<DualCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_certificate: Option<Decomposition>,
}

impl NormBracket {
    /// A bracket `[lower, upper]`; a lower end above the upper end by rounding
    /// only is clamped.
    pub fn new(lower: f64, upper: f64, provenance: Provenance) -> Self {
        debug_assert!(lower <= upper + 1e-9 * (1.0 + upper.abs()), "{lower} > {upper}");
        Self { lower: lower.min(upper), upper, provenance, lower_certificate: None, upper_certificate: None }
    }

    pub fn point(value: f64, provenance: Provenance) -> Self {
        Self::new(value, value, provenance)
    }

    pub fn zero() -> Self {
        Self::point(0.0, Provenance::Exact)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn scale(&self, alpha: f64) -> NormBracket {
        let a = alpha.abs();
        NormBracket { lower: a * self.lower, upper: a * self.upper, provenance: self.provenance, lower_certificate: None, upper_certificate: None }
    }

    /// True when the two intervals meet after widening each by `tol`
    /// relative to its magnitude.
    pub fn overlaps(&self, other: &NormBracket, tol: f64) -> bool {
        let slack = tol * (1.0 + self.upper.abs().max(other.upper.abs()));
        self.lower <= other.upper + slack && other.lower <= self.upper + slack
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PiOptions {
    /// Maximum number of terms; `dim E · dim F` when unset.
    pub rank_cap: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    /// Stop once `upper − lower ≤ gap_tol · max(1, upper)`.
    pub gap_tol: f64,
    pub reconstruction_tol: f64,
    pub max_rounds: usize,
}

impl Default for PiOptions {
    fn default() -> Self {
        Self { rank_cap: None, restarts: 32, seed: 0, gap_tol: 1e-10, reconstruction_tol: 1e-9, max_rounds: 400 }
    }
}

const RANGE_TOL: f64 = 1e-8;

/// Least-squares residual of `target` against the span of the `c(e_i, e_j)`.
pub fn range_residual(c: &BilinearMap, target: &[f64]) -> Result<f64> {
    check_dim(c.codomain().dim(), target.len())?;
    check_finite(target)?;
    let cols: Vec<Vec<f64>> = basis_images(c).into_iter().map(|(_, _, v)| v).collect();
    let g = target.len();
    let h = DVector::from_column_slice(target);
    let hn = h.norm();
    if cols.is_empty() {
        return Ok(hn / (1.0 + hn));
    }
    let b = DMatrix::from_fn(g, cols.len(), |r, k| cols[k][r]);
    let z = b.clone().svd(true, true).solve(&h, 1e-13).map_err(|e| Error::Invariant(e.to_string()))?;
    Ok((&b * z - &h).norm() / (1.0 + hn))
}

pub fn check_range(c: &BilinearMap, target: &[f64]) -> Result<()> {
    let residual = range_residual(c, target)?;
    if residual > RANGE_TOL {
        return Err(Error::NotInRange { residual });
    }
    Ok(())
}

fn basis_images(c: &BilinearMap) -> Vec<(usize, usize, Vec<f64>)> {
    let (e, f) = (c.left().dim(), c.right().dim());
    let mut out = Vec::new();
    for i in 0..e {
        for j in 0..f {
            let v = c.basis_image(i, j);
            if v.iter().any(|a| *a != 0.0) {
                out.push((i, j, v));
            }
        }
    }
    out
}

fn unit_basis(space: &NormedSpace, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; space.dim()];
    e[i] = 1.0;
    normalize_in(space, e)
}

/// Initial atoms: normalized basis pairs (these span the range), the lattice
/// single split for pointwise maps, and seeded random pairs.
fn initial_atoms(c: &BilinearMap, target: &[f64], restarts: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let (e, f) = (c.left(), c.right());
    let mut atoms: Vec<(Vec<f64>, Vec<f64>)> = basis_images(c).into_iter().map(|(i, j, _)| (unit_basis(e, i), unit_basis(f, j))).collect();
    if c.is_pointwise() {
        let inv = |s: &NormedSpace| s.lebesgue_form().map_or(1.0, |l| l.exponent.reciprocal());
        let (a, b) = (inv(e), inv(f));
        let theta = if a + b > 0.0 { a / (a + b) } else { 0.5 };
        let x: Vec<f64> = target.iter().map(|h| h.signum() * h.abs().powf(theta)).collect();
        let y: Vec<f64> = target.iter().map(|h| h.abs().powf(1.0 - theta)).collect();
        if x.iter().any(|v| *v != 0.0) {
            atoms.push((normalize_in(e.as_ref(), x), normalize_in(f.as_ref(), y)));
        }
    }
    for k in 0..restarts {
        let mut rng = stream(seed, k as u64);
        let x = gaussian_vector(&mut rng, e.dim());
        let y = gaussian_vector(&mut rng, f.dim());
        atoms.push((normalize_in(e.as_ref(), x), normalize_in(f.as_ref(), y)));
    }
    atoms
}

struct Master {
    value: f64,
    weights: Vec<f64>,
    lambda: Vec<f64>,
}

/// `min Σ |t_k|` subject to `Σ t_k v_k = h`.
fn solve_master(images: &[Vec<f64>], h: &[f64]) -> Result<Master> {
    let k = images.len();
    let mut p = LpProblem::new(Sense::Minimize, vec![1.0; 2 * k]);
    for r in 0..h.len() {
        let mut row = Vec::with_capacity(2 * k);
        row.extend(images.iter().map(|v| v[r]));
        row.extend(images.iter().map(|v| -v[r]));
        p.push(row, Relation::Eq, h[r]);
    }
    let sol = solve_lp(&p)?;
    let weights = (0..k).map(|i| sol.primal[i] - sol.primal[k + i]).collect();
    Ok(Master { value: sol.value, weights, lambda: sol.dual })
}

/// Outcome of the column-generation engine.
#[derive(Debug, Clone)]
pub struct Engine {
    pub upper: f64,
    pub decomposition: Decomposition,
    pub lower: f64,
    pub certificate: DualCertificate,
    pub rounds: usize,
}

/// `sup |λ(c(x, y))|` over the unit balls.
pub fn form_sup(c: &BilinearMap, lambda: &[f64], restarts: usize, seed: u64) -> Result<crate::optlab::ascent::BisupResult> {
    let m = c.form_matrix(lambda)?;
    Ok(bilinear_form_norm(&m, c.left(), c.right(), restarts, seed))
}

pub fn run_engine(c: &BilinearMap, target: &[f64], opts: &PiOptions) -> Result<Engine> {
    check_range(c, target)?;
    let g = c.codomain().dim();
    if target.iter().all(|v| *v == 0.0) {
        return Ok(Engine {
            upper: 0.0,
            decomposition: Decomposition::empty(target.to_vec()),
            lower: 0.0,
            certificate: DualCertificate { functional: vec![0.0; g], feasibility: 0.0, provenance: Provenance::Exact },
            rounds: 0,
        });
    }
    let mut atoms = initial_atoms(c, target, opts.restarts, opts.seed);
    let mut images: Vec<Vec<f64>> = atoms.iter().map(|(x, y)| c.eval_unchecked(x, y)).collect();
    let mut best_lower = (0.0, DualCertificate { functional: vec![0.0; g], feasibility: 0.0, provenance: Provenance::Exact });
    let mut rounds = 0;
    let master = loop {
        rounds += 1;
        let master = solve_master(&images, target)?;
        let sup = form_sup(c, &master.lambda, opts.restarts, opts.seed ^ rounds as u64)?;
        let rho = sup.value;
        let lam_h: f64 = master.lambda.iter().zip(target).map(|(a, b)| a * b).sum();
        if rho > 0.0 {
            let lower = lam_h.abs() / rho;
            if lower > best_lower.0 || rounds == 1 {
                best_lower = (
                    lower,
                    DualCertificate {
                        functional: master.lambda.iter().map(|v| v / rho).collect(),
                        feasibility: 1.0,
                        provenance: sup.provenance,
                    },
                );
            }
        }
        let done = rho <= 1.0 + 1e-12 || master.value - best_lower.0 <= opts.gap_tol * master.value.max(1.0);
        if done || rounds >= opts.max_rounds {
            break master;
        }
        let x = normalize_in(c.left().as_ref(), sup.x.clone());
        let y = normalize_in(c.right().as_ref(), sup.y.clone());
        let img = c.eval_unchecked(&x, &y);
        if images.iter().any(|v| v.iter().zip(&img).all(|(a, b)| (a - b).abs() <= 1e-15 * (1.0 + a.abs()))) {
            break master;
        }
        atoms.push((x, y));
        images.push(img);
    };
    let terms: Vec<(Vec<f64>, Vec<f64>)> = atoms
        .iter()
        .zip(&master.weights)
        .filter(|(_, t)| t.abs() > 0.0)
        .map(|((x, y), &t)| {
            let s = t.abs().sqrt();
            let sign = if t < 0.0 { -1.0 } else { 1.0 };
            (x.iter().map(|v| sign * s * v).collect(), y.iter().map(|v| s * v).collect())
        })
        .collect();
    let decomposition = Decomposition { terms, target: target.to_vec() };
    let residual = decomposition.residual(c);
    if residual > opts.reconstruction_tol {
        return Err(Error::Infeasible { residual });
    }
    let cap = opts.rank_cap.unwrap_or(c.left().dim() * c.right().dim());
    if decomposition.terms.len() > cap {
        return Err(Error::InvalidParameter {
            name: "rank_cap",
            reason: format!("optimal decomposition needs {} terms, cap is {cap}", decomposition.terms.len()),
        });
    }
    let upper = decomposition.cost(c);
    let (lower, certificate) = best_lower;
    Ok(Engine { upper, decomposition, lower: lower.min(upper), certificate, rounds })
}

/// A feasible decomposition of `target` and its cost.
pub fn pi_c_upper(c: &BilinearMap, target: &[f64], rank_cap: usize, restarts: usize, seed: u64) -> Result<(f64, Decomposition)> {
    if rank_cap == 0 {
        return Err(Error::InvalidParameter { name: "rank_cap", reason: "must be at least 1".into() });
    }
    let opts = PiOptions { rank_cap: Some(rank_cap), restarts, seed, ..PiOptions::default() };
    let e = run_engine(c, target, &opts)?;
    Ok((e.upper, e.decomposition))
}

/// A lower bound `|λ(target)|` with the normalized functional `λ`.
pub fn pi_c_lower(c: &BilinearMap, target: &[f64], restarts: usize, seed: u64) -> Result<(f64, DualCertificate)> {
    let opts = PiOptions { restarts, seed, rank_cap: Some(usize::MAX), ..PiOptions::default() };
    let e = run_engine(c, target, &opts)?;
    Ok((e.lower, e.certificate))
}

/// Normalizes a given functional by `ρ(λ)` and returns the bound it
/// certifies for `target`.
pub fn certify_functional(c: &BilinearMap, lambda: &[f64], target: &[f64], restarts: usize, seed: u64) -> Result<(f64, DualCertificate)> {
    check_dim(target.len(), lambda.len())?;
    check_range(c, target)?;
    let sup = form_sup(c, lambda, restarts, seed)?;
    if sup.value == 0.0 {
        let g = lambda.len();
        return Ok((0.0, DualCertificate { functional: vec![0.0; g], feasibility: 0.0, provenance: Provenance::Exact }));
    }
    let lam_h: f64 = lambda.iter().zip(target).map(|(a, b)| a * b).sum();
    Ok((
        lam_h.abs() / sup.value,
        DualCertificate { functional: lambda.iter().map(|v| v / sup.value).collect(), feasibility: 1.0, provenance: sup.provenance },
    ))
}

pub fn pi_c_bracket(c: &BilinearMap, target: &[f64], opts: &PiOptions) -> Result<NormBracket> {
    let e = run_engine(c, target, opts)?;
    Ok(NormBracket {
        lower: e.lower,
        upper: e.upper,
        provenance: e.certificate.provenance,
        lower_certificate: Some(e.certificate),
        upper_certificate: Some(e.decomposition),
    })
}

/// Re-verifies both certificates of a bracket: the decomposition must
/// reconstruct the target and cost the upper end; the functional must be
/// feasible (by exact enumeration where the balls allow it) and attain the
/// lower end. Returns the worst relative defect.
pub fn recheck_bracket(c: &BilinearMap, b: &NormBracket, restarts: usize, seed: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    if let Some(d) = &b.upper_certificate {
        worst = worst.max(d.residual(c));
        worst = worst.max((d.cost(c) - b.upper).abs() / (1.0 + b.upper));
        if let Some(l) = &b.lower_certificate {
            let sup = form_sup(c, &l.functional, restarts, seed)?;
            worst = worst.max((sup.value - 1.0).max(0.0));
            let lam_h: f64 = l.functional.iter().zip(&d.target).map(|(a, b)| a * b).sum();
            worst = worst.max((lam_h.abs() - b.lower).abs() / (1.0 + b.lower));
        }
    }
    Ok(worst)
}

/// Brute-force reference value for `π_c`, with its own error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    /// The true `π_c` lies in `[value − tolerance, value]`.
    pub tolerance: f64,
    pub atoms: usize,
}

pub const ORACLE_MAX_PAIRS: usize = 100_000_000;

/// Representatives (up to sign) of a grid on the boundary of the cube
/// `[-1, 1]^d`, with spacing at most `resolution`, normalized in the space.
fn sphere_grid(space: &NormedSpace, resolution: f64) -> (Vec<Vec<f64>>, f64) {
    let d = space.dim();
    let mut m = (2.0 / resolution).ceil() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let step = 2.0 / m as f64;
    let per_face = (m + 1).pow(d as u32 - 1);
    let mut pts = Vec::with_capacity(d * per_face);
    for face in 0..d {
        for idx in 0..per_face {
            let mut u = vec![0.0; d];
            let mut rest = idx;
            for (k, slot) in u.iter_mut().enumerate() {
                if k == face {
                    *slot = 1.0;
                } else {
                    *slot = -1.0 + step * (rest % (m + 1)) as f64;
                    rest /= m + 1;
                }
            }
            pts.push(u);
        }
    }
    // Covering radius in the norm: ½·step·Σ‖e_i‖, against the smallest norm
    // on the cube boundary.
    let eta = 0.5 * step * (0..d).map(|i| space.norm_unchecked(&unit(d, i))).sum::<f64>();
    let min_norm = pts.iter().map(|u| space.norm_unchecked(u)).fold(f64::INFINITY, f64::min);
    let delta = (2.0 * eta / (min_norm - eta).max(f64::MIN_POSITIVE)).min(1.0);
    let pts = pts.into_iter().map(|u| normalize_in(space, u)).collect();
    (pts, delta)
}

fn unit(d: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[i] = 1.0;
    e
}

/// LP over all grid atoms `c(x, y)`, with `x`, `y` on grids of the unit
/// spheres, solved by column generation with exhaustive pricing.
pub fn pi_c_oracle(c: &BilinearMap, target: &[f64], resolution: f64) -> Result<OracleValue> {
    let (e, f) = (c.left(), c.right());
    if e.dim() > 3 || f.dim() > 3 {
        return Err(Error::Intractable(format!("oracle needs dim E, dim F ≤ 3, got {} and {}", e.dim(), f.dim())));
    }
    check_range(c, target)?;
    if target.iter().all(|v| *v == 0.0) {
        return Ok(OracleValue { value: 0.0, tolerance: 0.0, atoms: 0 });
    }
    let (gx, de) = sphere_grid(e, resolution);
    let (gy, df) = sphere_grid(f, resolution);
    if gx.len().saturating_mul(gy.len()) > ORACLE_MAX_PAIRS {
        return Err(Error::Intractable(format!("{}×{} grid pairs", gx.len(), gy.len())));
    }
    // Coefficients by direct evaluation on basis pairs.
    let coeffs: Vec<Vec<Vec<f64>>> = (0..e.dim()).map(|i| (0..f.dim()).map(|j| c.basis_image(i, j)).collect()).collect();
    let image = |x: &[f64], y: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; target.len()];
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                for (o, v) in out.iter_mut().zip(&coeffs[i][j]) {
                    *o += xi * yj * v;
                }
            }
        }
        out
    };
    // Basis pairs are grid points, so the restricted master starts feasible.
    let on_grid = |g: &[Vec<f64>], space: &NormedSpace, i: usize| {
        let u = normalize_in(space, unit(space.dim(), i));
        g.iter().position(|p| p.iter().zip(&u).all(|(a, b)| (a - b).abs() < 1e-12)).expect("basis vectors lie on the grid")
    };
    let mut cols: Vec<(usize, usize)> = Vec::new();
    for i in 0..e.dim() {
        for j in 0..f.dim() {
            if coeffs[i][j].iter().any(|v| *v != 0.0) {
                cols.push((on_grid(&gx, e, i), on_grid(&gy, f, j)));
            }
        }
    }
    loop {
        let images: Vec<Vec<f64>> = cols.iter().map(|&(a, b)| image(&gx[a], &gy[b])).collect();
        let master = solve_master(&images, target)?;
        let lam = &master.lambda;
        // w_a = the form matrix applied to grid point x_a.
        let ws: Vec<Vec<f64>> = par::map_slice(&gx, |x| {
            (0..f.dim()).map(|j| (0..e.dim()).map(|i| x[i] * coeffs[i][j].iter().zip(lam).map(|(v, l)| v * l).sum::<f64>()).sum()).collect()
        });
        let best = par::map_slice(&ws, |w: &Vec<f64>| {
            let vals = gy.iter().map(|y| w.iter().zip(y).map(|(a, b)| a * b).sum::<f64>().abs());
            par::argmax_by_value(vals).expect("nonempty grid")
        });
        let (a, (b, rho)) = best.iter().enumerate().fold((0, best[0]), |acc, (k, &v)| if v.1 > acc.1 .1 { (k, v) } else { acc });
        if rho <= 1.0 + 1e-12 || cols.contains(&(a, b)) {
            let value = master.value;
            let tolerance = value * (1.0 - (1.0 - de) * (1.0 - df));
            return Ok(OracleValue { value, tolerance, atoms: gx.len() * gy.len() });
        }
        cols.push((a, b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilinear::BilinearKind;
    use crate::spaces::FiniteMeasure;
    use std::sync::Arc;

    fn ell(n: usize, p: f64) -> Arc<NormedSpace> {
        Arc::new(NormedSpace::lp(n, p).unwrap())
    }

    fn pointwise_l2() -> BilinearMap {
        BilinearMap::new(BilinearKind::Pointwise, ell(2, 2.0), ell(2, 2.0), ell(2, 1.0)).unwrap()
    }

    #[test]
    fn provenance_order() {
        assert_eq!(Provenance::Exact.weaker(Provenance::Heuristic), Provenance::Heuristic);
        assert_eq!(Provenance::ExtremeEnumeration.weaker(Provenance::Exact), Provenance::ExtremeEnumeration);
    }

    #[test]
    fn pointwise_signed_target() {
        let c = pointwise_l2();
        let b = pi_c_bracket(&c, &[1.0, -1.0], &PiOptions::default()).unwrap();
        assert!((b.lower - 2.0).abs() < 1e-9 && (b.upper - 2.0).abs() < 1e-9, "{b:?}");
        let (upper, d) = pi_c_upper(&c, &[1.0, -1.0], 4, 8, 0).unwrap();
        assert!((upper - 2.0).abs() < 1e-9);
        assert!(d.residual(&c) < 1e-12);
        let (lower, cert) = certify_functional(&c, &[1.0, -1.0], &[1.0, -1.0], 8, 0).unwrap();
        assert!((lower - 2.0).abs() < 1e-12);
        assert_eq!(cert.provenance, Provenance::Exact);
    }

    #[test]
    fn scalar_pairing_on_l1() {
        let c = BilinearMap::new(BilinearKind::ScalarPairing, ell(2, 1.0), ell(2, 1.0), ell(1, 2.0)).unwrap();
        let b = pi_c_bracket(&c, &[5.0], &PiOptions::default()).unwrap();
        assert!((b.upper - 5.0).abs() < 1e-12 && (b.lower - 5.0).abs() < 1e-12);
        assert_eq!(b.provenance, Provenance::ExtremeEnumeration);
        let (lower, cert) = certify_functional(&c, &[1.0], &[5.0], 0, 0).unwrap();
        assert_eq!((lower, cert.functional), (5.0, vec![1.0]));
    }

    #[test]
    fn lattice_single_split() {
        let mu = FiniteMeasure::new(vec![1.0, 1.0]).unwrap();
        let l2 = Arc::new(NormedSpace::lattice(mu.clone(), Exponent::Finite(2.0)).unwrap());
        let l1 = Arc::new(NormedSpace::lattice(mu, Exponent::Finite(1.0)).unwrap());
        let c = BilinearMap::new(BilinearKind::Pointwise, l2.clone(), l2, l1).unwrap();
        let b = pi_c_bracket(&c, &[4.0, 9.0], &PiOptions::default()).unwrap();
        assert!((b.lower - 13.0).abs() < 1e-9 && (b.upper - 13.0).abs() < 1e-9, "{b:?}");
    }

    #[test]
    fn zero_target() {
        let c = pointwise_l2();
        let b = pi_c_bracket(&c, &[0.0, 0.0], &PiOptions::default()).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        let (cost, d) = pi_c_upper(&c, &[0.0, 0.0], 4, 0, 0).unwrap();
        assert_eq!(cost, 0.0);
        assert!(d.terms.is_empty());
        assert_eq!(pi_c_oracle(&c, &[0.0, 0.0], 0.01).unwrap().value, 0.0);
    }

    #[test]
    fn out_of_range_target() {
        // A pairing into ℝ² whose second coordinate is always zero.
        let coeffs = vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![0.0, 0.0], vec![0.0, 0.0]]];
        let c = BilinearMap::new(BilinearKind::Custom { coeffs }, ell(2, 2.0), ell(2, 2.0), ell(2, 2.0)).unwrap();
        assert!(matches!(pi_c_bracket(&c, &[1.0, 1.0], &PiOptions::default()), Err(Error::NotInRange { .. })));
    }

    #[test]
    fn oracle_matches_engine() {
        let c = pointwise_l2();
        let o = pi_c_oracle(&c, &[1.0, -1.0], 0.01).unwrap();
        assert!((o.value - 2.0).abs() < 1e-3, "{o:?}");
        let p = BilinearMap::new(BilinearKind::ScalarPairing, ell(2, 2.0), ell(2, 2.0), ell(1, 2.0)).unwrap();
        let o = pi_c_oracle(&p, &[1.0], 0.01).unwrap();
        assert!(o.value >= 1.0 - 1e-12 && o.value - o.tolerance <= 1.0);
        assert!(pi_c_oracle(&BilinearMap::new(BilinearKind::Pointwise, ell(4, 2.0), ell(4, 2.0), ell(4, 1.0)).unwrap(), &[1.0; 4], 0.1).is_err());
    }

    #[test]
    fn tensor_projective_norm_is_nuclear() {
        // ℓ² ⊗_π ℓ² is the trace-class norm: sum of singular values.
        let c = BilinearMap::new(BilinearKind::TensorCoordinates, ell(2, 2.0), ell(2, 2.0), ell(4, 2.0)).unwrap();
        let h = [1.0, 2.0, 3.0, 4.0];
        let b = pi_c_bracket(&c, &h, &PiOptions::default()).unwrap();
        let nuclear: f64 = DMatrix::from_row_slice(2, 2, &h).singular_values().iter().sum();
        assert!((b.lower - nuclear).abs() < 1e-8 && (b.upper - nuclear).abs() < 1e-8, "{b:?} vs {nuclear}");
    }

    #[test]
    fn recheck_passes_on_engine_output() {
        let c = pointwise_l2();
        let b = pi_c_bracket(&c, &[0.3, -1.7], &PiOptions::default()).unwrap();
        assert!(recheck_bracket(&c, &b, 8, 1).unwrap() < 1e-9);
    }
}
