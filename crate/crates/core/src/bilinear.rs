//! Bounded bilinear maps `c: E × F → G` between finite-dimensional spaces,
//! their linearizations, and norm estimates for `c` and for the scalar forms
//! `(x, y) ↦ λ(c(x, y))`.

use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::optlab::ascent::{alternating_bisup, BisupResult, UnitBall};
use crate::optlab::rng::{gaussian_vector, stream};
use crate::par;
use crate::picalc::{NormBracket, Provenance};
use crate::spaces::{lp_norm, DualBall, Exponent, LebesgueForm, NormedSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BilinearKind {
    /// `(x ∘ y)_i = x_i y_i` on a shared coordinate system.
    Pointwise,
    /// Coefficientwise product of truncated series; the same algebra as
    /// [`BilinearKind::Pointwise`], kept apart for reporting.
    Hadamard,
    /// `⟨x, y⟩ ∈ ℝ`.
    ScalarPairing,
    /// `x ⊗ y` flattened row-major into `ℝ^{dim E · dim F}`.
    TensorCoordinates,
    /// `c(x, y)_k = Σ_ij coeffs[k][i][j] x_i y_j`.
    Custom { coeffs: Vec<Vec<Vec<f64>>> },
}

#[derive(Debug, Clone)]
pub struct BilinearMap {
    left: Arc<NormedSpace>,
    right: Arc<NormedSpace>,
    codomain: Arc<NormedSpace>,
    kind: BilinearKind,
    bound: OnceLock<NormBracket>,
}

/// Default restart count for heuristic suprema.
pub const DEFAULT_RESTARTS: usize = 64;

impl BilinearMap {
    pub fn new(kind: BilinearKind, left: Arc<NormedSpace>, right: Arc<NormedSpace>, codomain: Arc<NormedSpace>) -> Result<Self> {
        let (e, f, g) = (left.dim(), right.dim(), codomain.dim());
        match &kind {
            BilinearKind::Pointwise | BilinearKind::Hadamard => {
                check_dim(e, f)?;
                check_dim(e, g)?;
            }
            BilinearKind::ScalarPairing => {
                check_dim(e, f)?;
                check_dim(1, g)?;
            }
            BilinearKind::TensorCoordinates => check_dim(e * f, g)?,
            BilinearKind::Custom { coeffs } => {
                check_dim(g, coeffs.len())?;
                for slab in coeffs {
                    check_dim(e, slab.len())?;
                    for row in slab {
                        check_dim(f, row.len())?;
                        check_finite(row)?;
                    }
                }
            }
        }
        Ok(Self { left, right, codomain, kind, bound: OnceLock::new() })
    }

    pub fn left(&self) -> &Arc<NormedSpace> {
        &self.left
    }

    pub fn right(&self) -> &Arc<NormedSpace> {
        &self.right
    }

    pub fn codomain(&self) -> &Arc<NormedSpace> {
        &self.codomain
    }

    pub fn kind(&self) -> &BilinearKind {
        &self.kind
    }

    pub fn is_pointwise(&self) -> bool {
        matches!(self.kind, BilinearKind::Pointwise | BilinearKind::Hadamard)
    }

    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.left.dim(), x.len())?;
        check_dim(self.right.dim(), y.len())?;
        check_finite(x)?;
        check_finite(y)?;
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        match &self.kind {
            BilinearKind::Pointwise | BilinearKind::Hadamard => x.iter().zip(y).map(|(a, b)| a * b).collect(),
            BilinearKind::ScalarPairing => vec![x.iter().zip(y).map(|(a, b)| a * b).sum()],
            BilinearKind::TensorCoordinates => x.iter().flat_map(|a| y.iter().map(move |b| a * b)).collect(),
            BilinearKind::Custom { coeffs } => coeffs
                .iter()
                .map(|slab| slab.iter().zip(x).map(|(row, xi)| xi * row.iter().zip(y).map(|(c, yj)| c * yj).sum::<f64>()).sum())
                .collect(),
        }
    }

    /// `c(e_i, e_j)`.
    pub fn basis_image(&self, i: usize, j: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.left.dim()];
        let mut y = vec![0.0; self.right.dim()];
        x[i] = 1.0;
        y[j] = 1.0;
        self.eval_unchecked(&x, &y)
    }

    /// Matrix of `y ↦ c(x, y)`, of shape `dim G × dim F`.
    pub fn left_linearization(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.left.dim(), x.len())?;
        check_finite(x)?;
        let (e, f, g) = (self.left.dim(), self.right.dim(), self.codomain.dim());
        Ok(match &self.kind {
            BilinearKind::Pointwise | BilinearKind::Hadamard => DMatrix::from_diagonal(&x.to_vec().into()),
            BilinearKind::ScalarPairing => DMatrix::from_row_slice(1, f, x),
            BilinearKind::TensorCoordinates => DMatrix::from_fn(g, f, |r, j| if r % f == j { x[r / f] } else { 0.0 }),
            BilinearKind::Custom { coeffs } => DMatrix::from_fn(g, f, |k, j| (0..e).map(|i| coeffs[k][i][j] * x[i]).sum()),
        })
    }

    /// Matrix of `x ↦ c(x, y)`, of shape `dim G × dim E`.
    pub fn right_linearization(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.right.dim(), y.len())?;
        check_finite(y)?;
        let (e, f, g) = (self.left.dim(), self.right.dim(), self.codomain.dim());
        Ok(match &self.kind {
            BilinearKind::Pointwise | BilinearKind::Hadamard => DMatrix::from_diagonal(&y.to_vec().into()),
            BilinearKind::ScalarPairing => DMatrix::from_row_slice(1, e, y),
            BilinearKind::TensorCoordinates => DMatrix::from_fn(g, e, |r, i| if r / f == i { y[r % f] } else { 0.0 }),
            BilinearKind::Custom { coeffs } => DMatrix::from_fn(g, e, |k, i| (0..f).map(|j| coeffs[k][i][j] * y[j]).sum()),
        })
    }

    /// The `dim E × dim F` matrix of the scalar form `(x, y) ↦ λ(c(x, y))`.
    pub fn form_matrix(&self, lambda: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.codomain.dim(), lambda.len())?;
        check_finite(lambda)?;
        let (e, f) = (self.left.dim(), self.right.dim());
        Ok(match &self.kind {
            BilinearKind::Pointwise | BilinearKind::Hadamard => DMatrix::from_diagonal(&lambda.to_vec().into()),
            BilinearKind::ScalarPairing => DMatrix::identity(e, f) * lambda[0],
            BilinearKind::TensorCoordinates => DMatrix::from_row_slice(e, f, lambda),
            BilinearKind::Custom { coeffs } => DMatrix::from_fn(e, f, |i, j| coeffs.iter().zip(lambda).map(|(s, l)| s[i][j] * l).sum()),
        })
    }

    /// The bracket for `‖c‖ = sup {‖c(x, y)‖_G : ‖x‖ ≤ 1, ‖y‖ ≤ 1}`,
    /// computed once and cached.
    pub fn estimate_bound(&self) -> NormBracket {
        self.bound.get_or_init(|| self.compute_bound(DEFAULT_RESTARTS, 0)).clone()
    }

    /// Installs a bound established outside the generic search, e.g. by an
    /// inequality specific to the instance. Has no effect once a bound is cached.
    pub fn with_known_bound(self, b: NormBracket) -> Self {
        let _ = self.bound.set(b);
        self
    }

    fn compute_bound(&self, restarts: usize, seed: u64) -> NormBracket {
        if let Some(v) = self.structured_bound() {
            return NormBracket::point(v, Provenance::Exact);
        }
        let sup = image_bisup(self, None, &self.codomain, restarts, seed);
        match sup.provenance {
            Provenance::Heuristic => {
                let upper = box_upper_bound(self, None, &self.codomain).max(sup.value);
                NormBracket::new(sup.value, upper, Provenance::Heuristic)
            }
            p => NormBracket::point(sup.value, p),
        }
    }

    /// Closed forms for pointwise products and pairings of Lebesgue forms.
    fn structured_bound(&self) -> Option<f64> {
        let (fe, ff, fg) = (self.left.lebesgue_form()?, self.right.lebesgue_form()?, self.codomain.lebesgue_form()?);
        match self.kind {
            BilinearKind::Pointwise | BilinearKind::Hadamard => {
                // sup_y ‖d_G x y‖_{p_G} = ‖(d_G/d_F) x‖_r with 1/r = (1/p_G − 1/p_F)_+.
                let inv_r = (fg.exponent.reciprocal() - ff.exponent.reciprocal()).max(0.0);
                let r = Exponent::from_reciprocal(inv_r).ok()?;
                let t: Vec<f64> = fg.scale.iter().zip(&ff.scale).map(|(g, f)| g / f).collect();
                let to = LebesgueForm { exponent: r, scale: vec![1.0; t.len()] };
                Some(LebesgueForm::diagonal_operator_norm(&t, fe, &to).0)
            }
            BilinearKind::ScalarPairing => {
                let ones = vec![1.0; fe.dim()];
                Some(fg.scale[0] * LebesgueForm::diagonal_operator_norm(&ones, fe, &ff.dual()).0)
            }
            _ => None,
        }
    }
}

/// Result of a supremum over `B_E × B_F`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSup {
    pub value: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub provenance: Provenance,
}

fn apply(t: Option<&DMatrix<f64>>, g: Vec<f64>) -> Vec<f64> {
    match t {
        None => g,
        Some(t) => (0..t.nrows()).map(|r| (0..t.ncols()).map(|k| t[(r, k)] * g[k]).sum()).collect(),
    }
}

fn apply_transpose(t: Option<&DMatrix<f64>>, xi: &[f64]) -> Vec<f64> {
    match t {
        None => xi.to_vec(),
        Some(t) => (0..t.ncols()).map(|k| (0..t.nrows()).map(|r| t[(r, k)] * xi[r]).sum()).collect(),
    }
}

/// `sup {‖T c(x, y)‖_X : x ∈ B_E, y ∈ B_F}` as a joint supremum: pure
/// enumeration of extreme pairs when both balls are polytopes, otherwise
/// block ascent over `(x, y, ξ)` with `ξ` a norming functional of the image.
pub fn image_bisup(c: &BilinearMap, t: Option<&DMatrix<f64>>, target: &NormedSpace, restarts: usize, seed: u64) -> ImageSup {
    let (e, f) = (c.left.dim(), c.right.dim());
    let value_at = |x: &[f64], y: &[f64]| target.norm_unchecked(&apply(t, c.eval_unchecked(x, y)));
    let all_zero = (0..e).all(|i| (0..f).all(|j| apply(t, c.basis_image(i, j)).iter().all(|v| *v == 0.0)));
    if all_zero {
        let mut x = vec![0.0; e];
        let mut y = vec![0.0; f];
        x[0] = 1.0 / c.left.norm_unchecked(&basis(e, 0));
        y[0] = 1.0 / c.right.norm_unchecked(&basis(f, 0));
        return ImageSup { value: 0.0, x, y, provenance: Provenance::Exact };
    }
    if let (Some(ex), Some(ey)) = (c.left.extreme_points(), c.right.extreme_points()) {
        let pairs: Vec<(usize, usize)> = (0..ex.len()).flat_map(|a| (0..ey.len()).map(move |b| (a, b))).collect();
        let vals = par::map_slice(&pairs, |&(a, b)| value_at(&ex[a], &ey[b]));
        let (k, value) = par::argmax_by_value(vals).expect("nonempty vertex lists");
        let (a, b) = pairs[k];
        return ImageSup { value, x: ex[a].clone(), y: ey[b].clone(), provenance: Provenance::ExtremeEnumeration };
    }
    let runs = restarts.max(e + f);
    let states = par::map_range(runs, |k| {
        let x0 = crate::optlab::ascent::seed_point(c.left.as_ref(), k, seed);
        // Best normalized basis vector (or seeded direction) for the first y.
        let mut y0 = crate::optlab::ascent::seed_point(c.right.as_ref(), k, seed ^ 0x9e37_79b9);
        let mut best = value_at(&x0, &y0);
        for j in 0..f {
            let cand = crate::optlab::ascent::normalize_in(c.right.as_ref(), basis(f, j));
            let v = value_at(&x0, &cand);
            if v > best {
                best = v;
                y0 = cand;
            }
        }
        block_ascent(c, t, target, x0, y0)
    });
    let (k, value) = par::argmax_by_value(states.iter().map(|s| s.value)).expect("at least one restart");
    let best = &states[k];
    ImageSup { value, x: best.x.clone(), y: best.y.clone(), provenance: Provenance::Heuristic }
}

fn basis(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

const BLOCK_MAX_ITERS: usize = 10_000;

/// `ξ ← norming(T c(x,y))`, then `x`, `y` by exact supports of the scalar form
/// `ξ(T c(·,·))`. Each step can only raise `‖T c(x, y)‖`.
fn block_ascent(c: &BilinearMap, t: Option<&DMatrix<f64>>, target: &NormedSpace, mut x: Vec<f64>, mut y: Vec<f64>) -> ImageSup {
    let value_at = |x: &[f64], y: &[f64]| target.norm_unchecked(&apply(t, c.eval_unchecked(x, y)));
    let mut value = value_at(&x, &y);
    for _ in 0..BLOCK_MAX_ITERS {
        let image = apply(t, c.eval_unchecked(&x, &y));
        let (xi, _) = target.norming_functional(&image);
        let m = c.form_matrix(&apply_transpose(t, &xi)).expect("dimensions agree");
        let my: Vec<f64> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * y[j]).sum()).collect();
        let nx = c.left.support(&my).point;
        let mtx: Vec<f64> = (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| m[(i, j)] * nx[i]).sum()).collect();
        let ny = c.right.support(&mtx).point;
        let nv = value_at(&nx, &ny);
        if nv <= value * (1.0 + 1e-15) + 1e-300 {
            if nv > value {
                (x, y, value) = (nx, ny, nv);
            }
            break;
        }
        (x, y, value) = (nx, ny, nv);
    }
    ImageSup { value, x, y, provenance: Provenance::Heuristic }
}

/// `Σ_ij β^E_i β^F_j ‖T c(e_i, e_j)‖_X`, with `β` the coordinate bounds of
/// the unit balls: a valid, coarse upper bound for the image supremum.
pub fn box_upper_bound(c: &BilinearMap, t: Option<&DMatrix<f64>>, target: &NormedSpace) -> f64 {
    let be = c.left.coordinate_bounds();
    let bf = c.right.coordinate_bounds();
    let mut total = 0.0;
    for (i, bi) in be.iter().enumerate() {
        for (j, bj) in bf.iter().enumerate() {
            total += bi * bj * target.norm_unchecked(&apply(t, c.basis_image(i, j)));
        }
    }
    total
}

/// `sup {|xᵀ M y| : x ∈ B_E, y ∈ B_F}` with closed forms for diagonal `M`
/// between Lebesgue forms and for weighted Euclidean pairs.
pub fn bilinear_form_norm(m: &DMatrix<f64>, left: &NormedSpace, right: &NormedSpace, restarts: usize, seed: u64) -> BisupResult {
    if let (Some(fe), Some(ff)) = (left.lebesgue_form(), right.lebesgue_form()) {
        let square = m.nrows() == m.ncols();
        let diagonal = square && (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == 0.0));
        if diagonal && left.extreme_points().is_none() && right.extreme_points().is_none() {
            let d: Vec<f64> = (0..m.nrows()).map(|i| m[(i, i)]).collect();
            let fstar = ff.dual();
            let (value, x) = LebesgueForm::diagonal_operator_norm(&d, fe, &fstar);
            let mtx: Vec<f64> = d.iter().zip(&x).map(|(a, b)| a * b).collect();
            let y = ff.support(&mtx).1;
            return BisupResult { value, x, y, provenance: Provenance::Exact };
        }
        if fe.exponent == Exponent::Finite(2.0) && ff.exponent == Exponent::Finite(2.0) {
            let scaled = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] / (fe.scale[i] * ff.scale[j]));
            let svd = scaled.svd(true, true);
            let (k, value) = par::argmax_by_value(svd.singular_values.iter().copied()).expect("nonempty matrix");
            let u = svd.u.as_ref().expect("requested");
            let vt = svd.v_t.as_ref().expect("requested");
            let x = (0..m.nrows()).map(|i| u[(i, k)] / fe.scale[i]).collect();
            let y = (0..m.ncols()).map(|j| vt[(k, j)] / ff.scale[j]).collect();
            return BisupResult { value, x, y, provenance: Provenance::Exact };
        }
    }
    alternating_bisup(m, left, right, restarts, seed)
}

/// Certified operator norm of a matrix `A: F → X`, with a norm-one maximizer
/// in `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorNorm {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub provenance: Provenance,
}

/// `sup {‖A y‖_X : ‖y‖_F ≤ 1}` by closed forms where known: extreme points of
/// `B_F`, extreme points of `B_{X*}` (row dual norms), diagonal maps between
/// Lebesgue forms, weighted spectral norms; alternating ascent otherwise.
pub fn operator_norm(a: &DMatrix<f64>, from: &NormedSpace, to: &NormedSpace, restarts: usize, seed: u64) -> OperatorNorm {
    let (rows, cols) = (a.nrows(), a.ncols());
    assert_eq!(cols, from.dim());
    assert_eq!(rows, to.dim());
    let col_image = |y: &[f64]| -> Vec<f64> { (0..rows).map(|r| (0..cols).map(|j| a[(r, j)] * y[j]).sum()).collect() };
    if a.iter().all(|v| *v == 0.0) {
        let y = crate::optlab::ascent::normalize_in(from, basis(cols, 0));
        return OperatorNorm { value: 0.0, argmax: y, provenance: Provenance::Exact };
    }
    if let (Some(ff), Some(ft)) = (from.lebesgue_form(), to.lebesgue_form()) {
        let diagonal = rows == cols && (0..rows).all(|i| (0..cols).all(|j| i == j || a[(i, j)] == 0.0));
        if diagonal {
            let d: Vec<f64> = (0..rows).map(|i| a[(i, i)]).collect();
            let (value, y) = LebesgueForm::diagonal_operator_norm(&d, ff, ft);
            return OperatorNorm { value, argmax: y, provenance: Provenance::Exact };
        }
    }
    if let Some(ext) = from.extreme_points() {
        let vals = par::map_slice(&ext, |y| to.norm_unchecked(&col_image(y)));
        let (k, value) = par::argmax_by_value(vals).expect("nonempty vertex list");
        return OperatorNorm { value, argmax: ext[k].clone(), provenance: Provenance::ExtremeEnumeration };
    }
    let dual = DualBall(to);
    if let Some(ext) = dual.extreme_points() {
        let inner = par::map_slice(&ext, |xi| {
            let row: Vec<f64> = (0..cols).map(|j| (0..rows).map(|r| a[(r, j)] * xi[r]).sum()).collect();
            from.support(&row)
        });
        let (k, value) = par::argmax_by_value(inner.iter().map(|s| s.value)).expect("nonempty vertex list");
        let provenance = inner.iter().map(|s| s.provenance).fold(Provenance::ExtremeEnumeration, Provenance::weaker);
        return OperatorNorm { value, argmax: inner[k].point.clone(), provenance };
    }
    if let (Some(ff), Some(ft)) = (from.lebesgue_form(), to.lebesgue_form()) {
        if ff.exponent == Exponent::Finite(2.0) && ft.exponent == Exponent::Finite(2.0) {
            let scaled = DMatrix::from_fn(rows, cols, |r, j| ft.scale[r] * a[(r, j)] / ff.scale[j]);
            let svd = scaled.svd(false, true);
            let (k, value) = par::argmax_by_value(svd.singular_values.iter().copied()).expect("nonempty matrix");
            let vt = svd.v_t.as_ref().expect("requested");
            let y = (0..cols).map(|j| vt[(k, j)] / ff.scale[j]).collect();
            return OperatorNorm { value, argmax: y, provenance: Provenance::Exact };
        }
    }
    let r = alternating_bisup(a, &dual, from, restarts, seed);
    OperatorNorm { value: r.value, argmax: r.y, provenance: r.provenance.weaker(Provenance::Heuristic) }
}

/// Seeded random vector in a space, scaled to a random norm in `(0, 2]`.
pub fn random_vector(space: &NormedSpace, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = stream(seed, index);
    let v = gaussian_vector(&mut rng, space.dim());
    let n = lp_norm(&v, Exponent::Infinite).max(f64::MIN_POSITIVE);
    v.into_iter().map(|x| x / n).collect()
}

impl BilinearKind {
    pub fn name(&self) -> &'static str {
        match self {
            BilinearKind::Pointwise => "pointwise",
            BilinearKind::Hadamard => "hadamard",
            BilinearKind::ScalarPairing => "scalar_pairing",
            BilinearKind::TensorCoordinates => "tensor_coordinates",
            BilinearKind::Custom { .. } => "custom",
        }
    }
}

impl BilinearMap {
    /// Dense trilinear coefficients `[k][i][j]`.
    pub fn coefficients(&self) -> Result<Vec<Vec<Vec<f64>>>> {
        let (e, f, g) = (self.left.dim(), self.right.dim(), self.codomain.dim());
        if e * f * g > 1 << 22 {
            return Err(Error::Intractable(format!("{e}×{f}×{g} coefficient array")));
        }
        let mut out = vec![vec![vec![0.0; f]; e]; g];
        for i in 0..e {
            for j in 0..f {
                for (k, v) in self.basis_image(i, j).into_iter().enumerate() {
                    out[k][i][j] = v;
                }
            }
        }
        Ok(out)
    }
}
