//! Alternating maximization of bilinear forms over products of unit balls and
//! ratio ascent for linear functionals over balls without a closed-form
//! support function.

use nalgebra::DMatrix;

use super::rng::{gaussian_vector, stream};
use super::dot;
use crate::par;
use crate::picalc::Provenance;

/// What an optimizer needs to know about a centrally symmetric unit ball.
pub trait UnitBall: Sync {
    fn dim(&self) -> usize;

    /// Gauge of the ball.
    fn ball_norm(&self, x: &[f64]) -> f64;

    /// `sup {⟨a, x⟩ : ‖x‖ ≤ 1}` together with a maximizer of norm one.
    fn support(&self, a: &[f64]) -> Support;

    /// One representative of each `±` pair of extreme points, when the ball is
    /// a polytope with an enumerable vertex list.
    fn extreme_points(&self) -> Option<Vec<Vec<f64>>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub value: f64,
    pub point: Vec<f64>,
    pub provenance: Provenance,
}

/// Snapshot of one alternating-ascent run.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisupResult {
    pub value: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub provenance: Provenance,
}

pub const ASCENT_MAX_ITERS: usize = 10_000;
pub const ASCENT_TOL: f64 = 1e-15;

fn mat_vec(m: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * y[j]).sum()).collect()
}

fn mat_t_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| m[(i, j)] * x[i]).sum()).collect()
}

pub(crate) fn normalize_in<B: UnitBall + ?Sized>(ball: &B, mut x: Vec<f64>) -> Vec<f64> {
    let n = ball.ball_norm(&x);
    if n > 0.0 {
        for v in x.iter_mut() {
            *v /= n;
        }
    }
    x
}

/// Starting points for restart `k`: the normalized basis vectors first, then
/// seeded Gaussian directions.
pub(crate) fn seed_point<B: UnitBall + ?Sized>(ball: &B, k: usize, seed: u64) -> Vec<f64> {
    let d = ball.dim();
    if k < d {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        normalize_in(ball, e)
    } else {
        let mut rng = stream(seed, k as u64);
        normalize_in(ball, gaussian_vector(&mut rng, d))
    }
}

/// Alternating ascent for `xᵀ M y` from a given start in the left ball.
///
/// Each half-step is an exact support-function maximization, so the recorded
/// values never decrease.
pub fn run_ascent<E, F>(m: &DMatrix<f64>, left: &E, right: &F, x0: Vec<f64>, seed: u64) -> (AscentState, Vec<f64>)
where
    E: UnitBall + ?Sized,
    F: UnitBall + ?Sized,
{
    let mut x = x0;
    let mut y = right.support(&mat_t_vec(m, &x)).point;
    let mut value = dot(&x, &mat_vec(m, &y));
    let mut trace = vec![value];
    let mut iterations = 0;
    while iterations < ASCENT_MAX_ITERS {
        iterations += 1;
        let nx = left.support(&mat_vec(m, &y)).point;
        let ny = right.support(&mat_t_vec(m, &nx)).point;
        let nv = dot(&nx, &mat_vec(m, &ny));
        if nv <= value + ASCENT_TOL * value.abs().max(1.0) {
            if nv >= value {
                x = nx;
                y = ny;
                value = nv;
                trace.push(value);
            }
            break;
        }
        x = nx;
        y = ny;
        value = nv;
        trace.push(value);
    }
    (AscentState { x, y, value, iterations, seed }, trace)
}

/// `sup {|xᵀ M y| : ‖x‖_E ≤ 1, ‖y‖_F ≤ 1}`.
///
/// Exact when either ball has an enumerable vertex list and the other has an
/// exact support function; otherwise the best of `restarts` alternating runs
/// (basis-vector starts first), tagged heuristic.
pub fn alternating_bisup<E, F>(m: &DMatrix<f64>, left: &E, right: &F, restarts: usize, seed: u64) -> BisupResult
where
    E: UnitBall + ?Sized,
    F: UnitBall + ?Sized,
{
    assert_eq!(m.nrows(), left.dim());
    assert_eq!(m.ncols(), right.dim());
    if m.iter().all(|v| *v == 0.0) {
        return BisupResult {
            value: 0.0,
            x: seed_point(left, 0, seed),
            y: seed_point(right, 0, seed),
            provenance: Provenance::Exact,
        };
    }
    if let Some(ext) = left.extreme_points() {
        let inner = par::map_slice(&ext, |x| right.support(&mat_t_vec(m, x)));
        let (k, value) = par::argmax_by_value(inner.iter().map(|s| s.value.abs())).expect("nonempty vertex list");
        let provenance = inner.iter().map(|s| s.provenance).fold(Provenance::ExtremeEnumeration, Provenance::weaker);
        return BisupResult { value, x: ext[k].clone(), y: inner[k].point.clone(), provenance };
    }
    if let Some(ext) = right.extreme_points() {
        let inner = par::map_slice(&ext, |y| left.support(&mat_vec(m, y)));
        let (k, value) = par::argmax_by_value(inner.iter().map(|s| s.value.abs())).expect("nonempty vertex list");
        let provenance = inner.iter().map(|s| s.provenance).fold(Provenance::ExtremeEnumeration, Provenance::weaker);
        return BisupResult { value, x: inner[k].point.clone(), y: ext[k].clone(), provenance };
    }
    let runs = restarts.max(left.dim());
    let states = par::map_range(runs, |k| run_ascent(m, left, right, seed_point(left, k, seed), seed).0);
    let (k, value) = par::argmax_by_value(states.iter().map(|s| s.value.abs())).expect("at least one restart");
    BisupResult { value, x: states[k].x.clone(), y: states[k].y.clone(), provenance: Provenance::Heuristic }
}

/// Maximizes `⟨a, x⟩ / N(x)` by projected gradient ascent with backtracking,
/// returning the best ratio found and its maximizer scaled to `N(x) = 1`.
///
/// The ratio is quasiconcave on `{⟨a,x⟩ > 0}`, so local progress is global
/// progress; kinks of a nonsmooth `N` can still stall it, which is why the
/// result is only ever a certified lower bound.
pub fn ratio_ascent<N>(a: &[f64], norm: N, start: &[f64]) -> (f64, Vec<f64>)
where
    N: Fn(&[f64]) -> f64,
{
    let d = a.len();
    let ratio = |x: &[f64]| {
        let n = norm(x);
        if n > 0.0 {
            dot(a, x) / n
        } else {
            f64::NEG_INFINITY
        }
    };
    let mut x = start.to_vec();
    if dot(a, &x) < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    let mut best = ratio(&x);
    let mut step = 1.0;
    for _ in 0..ASCENT_MAX_ITERS {
        let scale = norm(&x).max(f64::MIN_POSITIVE);
        // Central-difference gradient of the ratio.
        let h = 1e-7 * scale;
        let mut grad = vec![0.0; d];
        for i in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            grad[i] = (ratio(&xp) - ratio(&xm)) / (2.0 * h);
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm == 0.0 || !gnorm.is_finite() {
            break;
        }
        let mut improved = false;
        while step * scale > 1e-12 * scale {
            let cand: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi + step * scale * gi / gnorm).collect();
            let r = ratio(&cand);
            if r > best {
                let n = norm(&cand);
                x = cand.into_iter().map(|v| v / n).collect();
                best = r;
                improved = true;
                step = (step * 2.0).min(1.0);
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let n = norm(&x);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
    (best.max(0.0), x)
}
