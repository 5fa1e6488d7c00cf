//! Pointwise products of lattices over a finite measure, multiplication
//! operator spaces `X^Y`, and the Köthe duality `(X π Y)' = X^{Y'}`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::bilinear::{operator_norm, BilinearKind, BilinearMap, DEFAULT_RESTARTS};
use crate::dualgate::{phi_norm, DualityOptions, OperatorClass, PhiFunctional, PhiMethod};
use crate::error::{check_dim, check_finite, Error, Result};
use crate::optlab::rng::{child_seed, stream, uniform_vector};
use crate::par;
use crate::picalc::{pi_c_bracket, NormBracket, PiOptions, Provenance};
use crate::report::{DualityRecord, DualityReport, Witness};
use crate::spaces::{Exponent, FiniteMeasure, NormedSpace};

/// A Lebesgue exponent stored as the exact reciprocal `1/p ∈ [0, 1]`, so
/// that `∞` is `0` and conjugation is `1 − 1/p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalExponent(Ratio<i64>);

impl RationalExponent {
    pub fn infinite() -> Self {
        Self(Ratio::from_integer(0))
    }

    pub fn from_reciprocal(r: Ratio<i64>) -> Result<Self> {
        if r < Ratio::from_integer(0) || r > Ratio::from_integer(1) {
            return Err(Error::InvalidParameter { name: "p", reason: format!("reciprocal {r} is not in [0, 1]") });
        }
        Ok(Self(r))
    }

    /// Parses `"4/3"`, `"2"`, `"inf"`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "∞") {
            return Ok(Self::infinite());
        }
        let bad = || Error::InvalidParameter { name: "p", reason: format!("`{s}` is not a rational exponent") };
        let p: Ratio<i64> = match t.split_once('/') {
            Some((a, b)) => {
                let (a, b): (i64, i64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if b == 0 {
                    return Err(bad());
                }
                Ratio::new(a, b)
            }
            None => Ratio::from_integer(t.parse().map_err(|_| bad())?),
        };
        if p < Ratio::from_integer(1) {
            return Err(Error::InvalidParameter { name: "p", reason: format!("{p} < 1") });
        }
        Self::from_reciprocal(p.recip())
    }

    pub fn reciprocal(self) -> Ratio<i64> {
        self.0
    }

    pub fn conjugate(self) -> Self {
        Self(Ratio::from_integer(1) - self.0)
    }

    /// The exponent `r` with `1/r = 1/p + 1/q`, if it is at least 1.
    pub fn product(self, other: Self) -> Result<Self> {
        Self::from_reciprocal(self.0 + other.0)
    }

    pub fn to_exponent(self) -> Exponent {
        let r = *self.0.numer() as f64 / *self.0.denom() as f64;
        if r == 0.0 {
            Exponent::Infinite
        } else {
            Exponent::Finite(*self.0.denom() as f64 / *self.0.numer() as f64)
        }
    }
}

impl std::fmt::Display for RationalExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if *self.0.numer() == 0 {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0.recip())
        }
    }
}

/// `L^p(μ)` from an exact exponent.
pub fn lebesgue(measure: &FiniteMeasure, p: RationalExponent) -> Result<NormedSpace> {
    NormedSpace::lattice(measure.clone(), p.to_exponent())
}

/// `X(μ) π Y(μ)` over a shared measure, with finite decompositions.
#[derive(Debug, Clone)]
pub struct PiProductSpace {
    map: BilinearMap,
    measure: FiniteMeasure,
}

fn shared_measure(x: &NormedSpace, y: &NormedSpace) -> Result<FiniteMeasure> {
    if !x.is_lattice() || !y.is_lattice() {
        return Err(Error::UnsupportedStructure("π-products need lattice factors".into()));
    }
    let (mx, my) = (x.measure().expect("lattices carry a measure"), y.measure().expect("lattices carry a measure"));
    check_dim(mx.len(), my.len())?;
    if mx.iter().zip(&my).any(|(a, b)| (a - b).abs() > 1e-14 * a.abs().max(1.0)) {
        return Err(Error::InvalidParameter { name: "measure", reason: "factors live over different measures".into() });
    }
    FiniteMeasure::new(mx)
}

impl PiProductSpace {
    pub fn new(x: Arc<NormedSpace>, y: Arc<NormedSpace>) -> Result<Self> {
        let measure = shared_measure(&x, &y)?;
        let l1 = Arc::new(NormedSpace::lattice(measure.clone(), Exponent::Finite(1.0))?);
        let map = BilinearMap::new(BilinearKind::Pointwise, x, y, l1)?;
        Ok(Self { map, measure })
    }

    pub fn map(&self) -> &BilinearMap {
        &self.map
    }

    pub fn measure(&self) -> &FiniteMeasure {
        &self.measure
    }

    /// The `π_c` bracket of `h` for the pointwise product.
    pub fn product_norm(&self, h: &[f64], opts: &PiOptions) -> Result<NormBracket> {
        pi_c_bracket(&self.map, h, opts)
    }

    /// Köthe pairing `Σ j_i h_i μ_i` as a `1 × n` operator.
    pub fn pairing(&self, j: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_iterator(1, j.len(), j.iter().zip(self.measure.masses()).map(|(a, m)| a * m))
    }

    /// `‖j‖_{(XπY)'}` through the bi-supremum `sup Σ |j x y| μ`.
    pub fn kothe_dual_norm(&self, j: &[f64], opts: &DualityOptions) -> Result<NormBracket> {
        check_dim(self.measure.len(), j.len())?;
        check_finite(j)?;
        let t = self.pairing(&j.iter().map(|v| v.abs()).collect::<Vec<_>>());
        let scalar = NormedSpace::lp(1, 1.0)?;
        Ok(phi_norm(&PhiFunctional { c: &self.map, t: &t, target: &scalar }, PhiMethod::Bisup, opts)?.bracket)
    }
}

/// `sup {‖f ∘ g‖_Y : ‖f‖_X ≤ 1}`.
pub fn mult_space_norm(x: &NormedSpace, y: &NormedSpace, g: &[f64]) -> Result<NormBracket> {
    shared_measure(x, y)?;
    check_dim(x.dim(), g.len())?;
    check_finite(g)?;
    let d = DMatrix::from_diagonal(&g.to_vec().into());
    let n = operator_norm(&d, x, y, DEFAULT_RESTARTS, 0);
    Ok(NormBracket::point(n.value, n.provenance))
}

/// The canonical split `g = |f|^{1/p} sgn f`, `h = |f|^{1/p'}` and its cost
/// `‖g‖_{X_[1/p]} ‖h‖_{X_[1/p']}`.
pub fn factorization_split(x: &NormedSpace, p: f64, f: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter { name: "p", reason: format!("{p} is not in (1, ∞)") });
    }
    check_dim(x.dim(), f.len())?;
    check_finite(f)?;
    let q = p / (p - 1.0);
    let g: Vec<f64> = f.iter().map(|v| v.signum() * v.abs().powf(1.0 / p)).collect();
    let h: Vec<f64> = f.iter().map(|v| v.abs().powf(1.0 / q)).collect();
    let (xp, xq) = (x.pth_power(1.0 / p)?, x.pth_power(1.0 / q)?);
    let cost = xp.norm(&g)? * xq.norm(&h)?;
    let g = g.into_iter().map(|v| if v == 0.0 { 0.0 } else { v }).collect();
    Ok((g, h, cost))
}

/// Parameters for a Lebesgue instance of the Köthe duality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KotheInstance {
    pub p: String,
    pub q: String,
    pub measure: FiniteMeasure,
}

/// `‖j‖_{L^s(μ)}` with `1/s = 1 − 1/p − 1/q`, from exact exponent arithmetic.
pub fn lebesgue_oracle(p: RationalExponent, q: RationalExponent, measure: &FiniteMeasure, j: &[f64]) -> Result<f64> {
    let s = p.product(q)?.conjugate();
    lebesgue(measure, s)?.norm(j)
}

/// For sampled `j`, compares `‖j‖_{(XπY)'}` (bi-supremum route, with a
/// product-norm cross-check) against `‖j‖_{X^{Y'}}`. When `oracle` is given
/// both sides are also checked against it.
pub fn verify_kothe_product_duality(
    x: Arc<NormedSpace>,
    y: Arc<NormedSpace>,
    samples: usize,
    oracle: Option<&(dyn Fn(&[f64]) -> f64 + Sync)>,
    opts: &DualityOptions,
    family: &str,
) -> Result<DualityReport> {
    let space = PiProductSpace::new(x.clone(), y.clone())?;
    let y_dual = y.kothe_dual_space()?;
    let n = space.measure.len();
    let tol = 1e-6;
    let records = par::map_range(samples, |k| -> Result<DualityRecord> {
        let seed = child_seed(opts.seed, k as u64);
        let j = if k == 0 { vec![0.0; n] } else { uniform_vector(&mut stream(seed, 0), n, -2.0, 2.0) };
        let lhs = space.kothe_dual_norm(&j, &DualityOptions { seed, ..opts.clone() })?;
        let rhs = mult_space_norm(&x, &y_dual, &j)?;
        let mut rec = DualityRecord::compare(family, format!("{k:04}"), &lhs, &rhs, tol, seed)
            .with_witness(Witness::Point { label: "j".into(), values: j.clone() });
        if let Some(o) = oracle {
            let v = o(&j);
            let off = |b: &NormBracket| (b.midpoint() - v).abs() > tol * (1.0 + v);
            if off(&lhs) || off(&rhs) {
                rec = rec.fail();
            }
        }
        // Certified product-unit vectors never beat the supremum.
        if k > 0 && opts.product_ball_samples > 0 {
            let h = uniform_vector(&mut stream(seed, 1), n, -1.0, 1.0);
            let b = space.product_norm(&h, &PiOptions { seed, ..opts.pi.clone() })?;
            let pairing: f64 = j.iter().zip(&h).zip(space.measure.masses()).map(|((a, b), m)| (a * b).abs() * m).sum();
            if b.upper > 0.0 && pairing / b.upper > lhs.upper + 1e-8 * (1.0 + lhs.upper) {
                rec = rec.fail();
            }
        }
        Ok(rec)
    });
    Ok(DualityReport::new(records.into_iter().collect::<Result<Vec<_>>>()?))
}

/// `(c, V)` for the duality harness: the pointwise product `X × Y → L^1(μ)`
/// with the Köthe pairings against the given `j`.
pub fn duality_instance(x: Arc<NormedSpace>, y: Arc<NormedSpace>, js: &[Vec<f64>]) -> Result<(BilinearMap, OperatorClass)> {
    let space = PiProductSpace::new(x, y)?;
    let members = js.iter().map(|j| space.pairing(j)).collect();
    let class = OperatorClass::new(members, Arc::new(NormedSpace::lp(1, 1.0)?), space.measure.len())?;
    Ok((space.map, class))
}

/// Provenance of the exact route for Lebesgue factors.
pub fn is_closed_form(x: &NormedSpace, y: &NormedSpace) -> Provenance {
    if x.lebesgue_form().is_some() && y.lebesgue_form().is_some() {
        Provenance::Exact
    } else {
        Provenance::Heuristic
    }
}
