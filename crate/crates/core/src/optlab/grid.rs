//! Exhaustive grid search, used only as an independent oracle in tests and
//! verification passes.

use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub value: f64,
    pub point: Vec<f64>,
    /// `resolution · modulus`: how far the grid optimum may sit from the true
    /// optimum for an objective with that modulus of continuity.
    pub error_bound: f64,
    pub points: usize,
}

pub const MAX_GRID_POINTS: usize = 100_000_000;

/// Evaluates `objective` on the tensor grid over `ranges` with spacing at most
/// `resolution` in every coordinate (both endpoints included).
pub fn grid_oracle<F>(objective: F, ranges: &[(f64, f64)], resolution: f64, goal: Goal, modulus: f64) -> Result<GridResult>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    if !(resolution > 0.0) {
        return Err(Error::InvalidParameter { name: "resolution", reason: format!("{resolution} is not positive") });
    }
    let counts: Vec<usize> = ranges.iter().map(|(lo, hi)| (((hi - lo) / resolution).ceil() as usize).max(1) + 1).collect();
    let total = counts.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c)).unwrap_or(usize::MAX);
    if total > MAX_GRID_POINTS {
        return Err(Error::Intractable(format!("{total} grid points exceed {MAX_GRID_POINTS}")));
    }
    let point_at = |mut idx: usize| -> Vec<f64> {
        let mut p = Vec::with_capacity(ranges.len());
        for (&(lo, hi), &c) in ranges.iter().zip(&counts) {
            let k = idx % c;
            idx /= c;
            p.push(if c == 1 { lo } else { lo + (hi - lo) * k as f64 / (c - 1) as f64 });
        }
        p
    };
    let sign = match goal {
        Goal::Maximize => 1.0,
        Goal::Minimize => -1.0,
    };
    // Chunked so the per-chunk argmax keeps memory flat.
    let chunk = 1 << 16;
    let nchunks = total.div_ceil(chunk);
    let partial = par::map_range(nchunks, |c| {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for idx in c * chunk..((c + 1) * chunk).min(total) {
            let v = sign * objective(&point_at(idx));
            if v > best.1 {
                best = (idx, v);
            }
        }
        best
    });
    let (_, &(idx, v)) = partial
        .iter()
        .enumerate()
        .fold(None, |acc: Option<(usize, &(usize, f64))>, (k, b)| match acc {
            Some((_, a)) if a.1 >= b.1 => acc,
            _ => Some((k, b)),
        })
        .expect("grid has points");
    Ok(GridResult { value: sign * v, point: point_at(idx), error_bound: resolution * modulus, points: total })
}
