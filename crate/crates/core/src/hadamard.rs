//! Coefficient multipliers on truncated formal series: Hadamard products,
//! multiplier norms `(X, Y)` and the identity `(X ⊗̄ Y, Z) = (X, (Y, Z))`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bilinear::{image_bisup, operator_norm, BilinearKind, BilinearMap};
use crate::dualgate::{mult_norm, DualityOptions, MultOperator};
use crate::error::{check_dim, check_finite, Error, Result};
use crate::optlab::rng::{child_seed, stream, uniform_vector};
use crate::par;
use crate::picalc::{NormBracket, Provenance};
use crate::report::{DualityRecord, DualityReport, Witness};
use crate::spaces::{Exponent, LebesgueForm, NormedSpace};

/// Coefficients `f̂(0), …, f̂(N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TruncatedSeries {
    pub coeffs: Vec<f64>,
}

impl TruncatedSeries {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter { name: "coeffs", reason: "a series needs at least f̂(0)".into() });
        }
        check_finite(&coeffs)?;
        Ok(Self { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn one(degree: usize) -> Self {
        Self { coeffs: vec![1.0; degree + 1] }
    }

    pub fn monomial(degree: usize, j: usize) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[j] = 1.0;
        Self { coeffs }
    }
}

/// `f ∗ g = Σ f̂(j) ĝ(j) z^j`.
pub fn hadamard_product(f: &TruncatedSeries, g: &TruncatedSeries) -> Result<TruncatedSeries> {
    check_dim(f.coeffs.len(), g.coeffs.len())?;
    Ok(TruncatedSeries { coeffs: f.coeffs.iter().zip(&g.coeffs).map(|(a, b)| a * b).collect() })
}

/// `‖λ‖_{(X,Y)} = ‖diag λ‖_{X→Y}`.
pub fn multiplier_norm(lambda: &TruncatedSeries, x: &NormedSpace, y: &NormedSpace) -> Result<NormBracket> {
    check_dim(x.dim(), lambda.coeffs.len())?;
    check_dim(y.dim(), lambda.coeffs.len())?;
    let n = operator_norm(&diag(&lambda.coeffs), x, y, crate::bilinear::DEFAULT_RESTARTS, 0);
    Ok(NormBracket::point(n.value, n.provenance))
}

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&v.to_vec().into())
}

/// The multiplier space `(Y, Z)` of two Lebesgue forms, itself a Lebesgue
/// form: `‖μ‖ = ‖d_Z μ / d_Y‖_r` with `1/r = (1/q − 1/p)_+`.
pub fn multiplier_form(y: &LebesgueForm, z: &LebesgueForm) -> Result<LebesgueForm> {
    check_dim(y.dim(), z.dim())?;
    let r = z.exponent.reciprocal() - y.exponent.reciprocal();
    let exponent = if r <= 0.0 { Exponent::Infinite } else { Exponent::from_reciprocal(r)? };
    let scale = z.scale.iter().zip(&y.scale).map(|(a, b)| a / b).collect();
    LebesgueForm::new(exponent, scale)
}

/// The Hadamard map `X × Y → ℓ¹_{N+1}` whose `π_c` norm defines `X ⊗̄ Y`.
pub fn hadamard_map(x: Arc<NormedSpace>, y: Arc<NormedSpace>) -> Result<BilinearMap> {
    let g = Arc::new(NormedSpace::lp(x.dim(), 1.0)?);
    BilinearMap::new(BilinearKind::Hadamard, x, y, g)
}

/// `‖λ‖_{(X⊗̄Y, Z)} = sup ‖λ ∗ x ∗ y‖_Z` over the unit balls.
pub fn product_multiplier_norm(c: &BilinearMap, lambda: &[f64], z: &NormedSpace, opts: &DualityOptions) -> Attained {
    let s = image_bisup(c, Some(&diag(lambda)), z, opts.restarts, opts.seed);
    Attained { bracket: NormBracket::point(s.value, s.provenance), witness: s.x }
}

/// `‖λ‖_{(X,(Y,Z))}`: closed form for Lebesgue data, nested ascent otherwise.
pub fn nested_multiplier_norm(c: &BilinearMap, lambda: &[f64], z: &NormedSpace, opts: &DualityOptions) -> Result<Attained> {
    if let (Some(fx), Some(fy), Some(fz)) = (c.left().lebesgue_form(), c.right().lebesgue_form(), z.lebesgue_form()) {
        let m = multiplier_form(fy, fz)?;
        let (value, witness) = LebesgueForm::diagonal_operator_norm(lambda, fx, &m);
        return Ok(Attained { bracket: NormBracket::point(value, Provenance::Exact), witness });
    }
    let t = diag(lambda);
    let a = mult_norm(&MultOperator { c, t: &t, target: z }, opts)?;
    Ok(Attained { bracket: a.bracket, witness: a.x })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attained {
    pub bracket: NormBracket,
    pub witness: Vec<f64>,
}

/// Compares both sides of the triple identity for `samples` multipliers;
/// instance 0 is `λ = 0`, instances `1..=N+1` are monomials when room allows.
pub fn verify_triple_identity(
    x: Arc<NormedSpace>,
    y: Arc<NormedSpace>,
    z: Arc<NormedSpace>,
    samples: usize,
    opts: &DualityOptions,
    family: &str,
) -> Result<DualityReport> {
    check_dim(x.dim(), y.dim())?;
    check_dim(x.dim(), z.dim())?;
    let c = hadamard_map(x, y)?;
    let n = z.dim();
    let records = par::map_range(samples, |k| -> Result<DualityRecord> {
        let seed = child_seed(opts.seed, k as u64);
        let lambda = match k {
            0 => vec![0.0; n],
            k if k <= n && samples > 2 * n => TruncatedSeries::monomial(n - 1, k - 1).coeffs,
            _ => uniform_vector(&mut stream(seed, 0), n, -3.0, 3.0),
        };
        let local = DualityOptions { seed, ..opts.clone() };
        let lhs = product_multiplier_norm(&c, &lambda, &z, &local);
        let rhs = nested_multiplier_norm(&c, &lambda, &z, &local)?;
        let prov = lhs.bracket.provenance.weaker(rhs.bracket.provenance);
        let tol = if prov.is_certified() { 1e-6 } else { opts.heuristic_tol };
        Ok(DualityRecord::compare(family, format!("{k:04}"), &lhs.bracket, &rhs.bracket, tol, seed)
            .with_witness(Witness::Point { label: "lambda".into(), values: lambda })
            .with_witness(Witness::Point { label: "lhs.x".into(), values: lhs.witness })
            .with_witness(Witness::Point { label: "rhs.x".into(), values: rhs.witness }))
    });
    Ok(DualityReport::new(records.into_iter().collect::<Result<Vec<_>>>()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> TruncatedSeries {
        TruncatedSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn products() {
        assert_eq!(hadamard_product(&s(&[1.0, 2.0, 3.0]), &TruncatedSeries::one(2)).unwrap(), s(&[1.0, 2.0, 3.0]));
        assert_eq!(hadamard_product(&s(&[1.0, 2.0, 3.0]), &s(&[0.0; 3])).unwrap().coeffs, vec![0.0; 3]);
        assert_eq!(hadamard_product(&s(&[1.0, 2.0]), &s(&[3.0, 4.0])).unwrap().coeffs, vec![3.0, 8.0]);
        assert!(hadamard_product(&s(&[1.0]), &s(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn multiplier_examples() {
        let l2 = NormedSpace::lp(3, 2.0).unwrap();
        assert!((multiplier_norm(&s(&[1.0, 2.0, 3.0]), &l2, &l2).unwrap().upper - 3.0).abs() < 1e-12);
        let (a, b) = (NormedSpace::lp(2, 2.0).unwrap(), NormedSpace::lp(2, 1.0).unwrap());
        assert!((multiplier_norm(&s(&[3.0, 4.0]), &a, &b).unwrap().upper - 5.0).abs() < 1e-12);
        assert_eq!(multiplier_norm(&s(&[0.0, 0.0]), &a, &b).unwrap().upper, 0.0);
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            let x = NormedSpace::lp(3, p).unwrap();
            assert!((multiplier_norm(&TruncatedSeries::one(2), &x, &x).unwrap().upper - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn multiplier_form_is_nested_norm() {
        let y = LebesgueForm::new(Exponent::Finite(2.0), vec![1.0, 2.0]).unwrap();
        let z = LebesgueForm::new(Exponent::Finite(1.0), vec![1.0, 1.0]).unwrap();
        let m = multiplier_form(&y, &z).unwrap();
        let (ys, zs) = (NormedSpace::scaled_lp(y).unwrap(), NormedSpace::scaled_lp(z).unwrap());
        for mu in [[3.0, 4.0], [-1.0, 0.5], [0.0, 2.0]] {
            let direct = multiplier_norm(&s(&mu), &ys, &zs).unwrap().upper;
            assert!((m.norm(&mu) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn triple_identity_l2_l2_l1() {
        let l2 = Arc::new(NormedSpace::lp(2, 2.0).unwrap());
        let l1 = Arc::new(NormedSpace::lp(2, 1.0).unwrap());
        let r = verify_triple_identity(l2.clone(), l2, l1, 8, &DualityOptions::default(), "hadamard_triple").unwrap();
        assert!(r.passed() && r.max_gap() <= 1e-6, "{:?}", r.summary());
        for rec in &r.records[..1] {
            assert_eq!(rec.lhs_upper, 0.0);
        }
    }

    #[test]
    fn triple_identity_mixed_exponents() {
        for (p, q, t) in [(1.5, 3.0, 1.0), (4.0, 4.0, 2.0), (2.0, f64::INFINITY, 1.5), (1.0, 2.0, 3.0)] {
            let (x, y, z) = (NormedSpace::lp(4, p).unwrap(), NormedSpace::lp(4, q).unwrap(), NormedSpace::lp(4, t).unwrap());
            let r = verify_triple_identity(Arc::new(x), Arc::new(y), Arc::new(z), 6, &DualityOptions::default(), "h").unwrap();
            assert!(r.passed() && r.max_gap() <= 1e-6, "{p} {q} {t}: {:?}", r.records);
        }
    }

    #[test]
    fn submultiplicative() {
        let (x, y, z) = (NormedSpace::lp(3, 1.5).unwrap(), NormedSpace::lp(3, 3.0).unwrap(), NormedSpace::lp(3, 2.0).unwrap());
        let (l, m) = (s(&[1.0, -2.0, 0.5]), s(&[0.3, 1.0, 2.0]));
        let lm = hadamard_product(&l, &m).unwrap();
        let lhs = multiplier_norm(&lm, &x, &z).unwrap().upper;
        let rhs = multiplier_norm(&l, &y, &z).unwrap().upper * multiplier_norm(&m, &x, &y).unwrap().upper;
        assert!(lhs <= rhs + 1e-9);
    }
}
