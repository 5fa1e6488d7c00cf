//! Finitely atomic vector measures: semivariation, Rybakov functionals,
//! `L^p(m)`, integration, the `L^∞(m)` identification and the `RN(m)` predual.
//!
//! Every supremum over `B_{X*}` here is of a convex function of `x*` of the
//! form `Σ w_i |⟨m_i, x*⟩|`, which equals `max_s ‖Σ s_i w_i m_i‖_X` over
//! sign patterns; both that enumeration and the extreme points of `B_{X*}`
//! are exact.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::bilinear::{BilinearKind, BilinearMap};
use crate::dualgate::{DualityOptions, OperatorClass};
use crate::error::{check_dim, check_finite, Error, Result};
use crate::optlab::lp::{solve_lp, LpProblem, Relation, Sense, VarBound};
use crate::optlab::rng::{child_seed, gaussian_vector, stream, uniform_vector};
use crate::par;
use crate::picalc::{NormBracket, Provenance};
use crate::report::{DualityRecord, DualityReport, Witness};
use crate::spaces::{Exponent, FiniteMeasure, NormedSpace};

/// Atom counts up to this size are handled by exact sign enumeration.
pub const MAX_SIGN_ATOMS: usize = 20;
const CUT_ROUNDS: usize = 200;

#[derive(Debug, Clone)]
pub struct VectorMeasure {
    atoms: Vec<Vec<f64>>,
    value_space: Arc<NormedSpace>,
}

/// A supremum over `B_{X*}` and a maximizing functional.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSup {
    pub value: f64,
    pub functional: Vec<f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RybakovData {
    pub functional: Vec<f64>,
    /// `μ_i = |⟨m_i, z₀*⟩|`.
    pub masses: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl VectorMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, value_space: Arc<NormedSpace>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter { name: "atoms", reason: "empty measure".into() });
        }
        for (i, a) in atoms.iter().enumerate() {
            check_dim(value_space.dim(), a.len())?;
            check_finite(a)?;
            if value_space.norm(a)? == 0.0 {
                return Err(Error::Invariant(format!("atom {i} is null")));
            }
        }
        Ok(Self { atoms, value_space })
    }

    /// Gaussian atoms.
    pub fn random(n: usize, value_space: Arc<NormedSpace>, seed: u64) -> Result<Self> {
        let k = value_space.dim();
        let atoms = (0..n).map(|i| gaussian_vector(&mut stream(seed, i as u64), k)).collect();
        Self::new(atoms, value_space)
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn value_space(&self) -> &Arc<NormedSpace> {
        &self.value_space
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn k(&self) -> usize {
        self.value_space.dim()
    }

    /// `Σ f_i m_i`.
    pub fn integrate(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.len(), f.len())?;
        check_finite(f)?;
        Ok(self.integrate_unchecked(f))
    }

    fn integrate_unchecked(&self, f: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.k()];
        for (fi, m) in f.iter().zip(&self.atoms) {
            for (a, b) in v.iter_mut().zip(m) {
                *a += fi * b;
            }
        }
        v
    }

    /// `⟨m_i, x*⟩` for every atom.
    pub fn scalar_measure(&self, xs: &[f64]) -> Vec<f64> {
        self.atoms.iter().map(|m| dot(m, xs)).collect()
    }

    fn dual_extremes(&self) -> Option<Vec<Vec<f64>>> {
        self.value_space.dual_space()?.lebesgue_form()?.extreme_points()
    }

    fn normalize_dual(&self, xs: Vec<f64>) -> Vec<f64> {
        let d = self.value_space.dual_norm(&xs).map(|d| d.value).unwrap_or(0.0);
        if d > 1.0 {
            xs.into_iter().map(|v| v / d).collect()
        } else {
            xs
        }
    }

    /// `sup_{x* ∈ B_{X*}} Σ w_i |⟨m_i, x*⟩|` for `w ≥ 0`.
    pub fn weighted_sup(&self, w: &[f64]) -> DualSup {
        let k = self.k();
        let active: Vec<usize> = (0..self.len()).filter(|&i| w[i] > 0.0).collect();
        if active.is_empty() {
            return DualSup { value: 0.0, functional: vec![0.0; k], provenance: Provenance::Exact };
        }
        let objective = |xs: &[f64]| active.iter().map(|&i| w[i] * dot(&self.atoms[i], xs).abs()).sum::<f64>();
        let patterns = if active.len() <= MAX_SIGN_ATOMS { 1usize << (active.len() - 1) } else { usize::MAX };
        if let Some(ext) = self.dual_extremes().filter(|e| e.len() / 2 <= patterns) {
            let vals = par::map_slice(&ext, |xs| objective(xs));
            let (b, value) = par::argmax_by_value(vals).expect("dual balls have extreme points");
            return DualSup { value, functional: ext[b].clone(), provenance: Provenance::ExtremeEnumeration };
        }
        let combine = |signs: &dyn Fn(usize) -> f64| {
            let mut v = vec![0.0; k];
            for (t, &i) in active.iter().enumerate() {
                let c = signs(t) * w[i];
                for (a, b) in v.iter_mut().zip(&self.atoms[i]) {
                    *a += c * b;
                }
            }
            v
        };
        let x = &self.value_space;
        if patterns != usize::MAX {
            let vals = par::map_range(patterns, |bits| {
                let v = combine(&|t| if t > 0 && (bits >> (t - 1)) & 1 == 1 { -1.0 } else { 1.0 });
                x.norm_unchecked(&v)
            });
            let (bits, value) = par::argmax_by_value(vals).expect("at least one pattern");
            let v = combine(&|t| if t > 0 && (bits >> (t - 1)) & 1 == 1 { -1.0 } else { 1.0 });
            let functional = self.normalize_dual(x.norming_functional(&v).0);
            return DualSup { value, functional, provenance: Provenance::ExtremeEnumeration };
        }
        // Alternate signs and norming functionals from several starts.
        let mut best = (f64::NEG_INFINITY, vec![0.0; k]);
        for r in 0..8u64 {
            let mut s: Vec<f64> = if r == 0 {
                vec![1.0; active.len()]
            } else {
                uniform_vector(&mut stream(r, 7), active.len(), -1.0, 1.0).iter().map(|v| v.signum()).collect()
            };
            for _ in 0..100 {
                let v = combine(&|t| s[t]);
                let xs = self.normalize_dual(x.norming_functional(&v).0);
                let next: Vec<f64> = active.iter().map(|&i| if dot(&self.atoms[i], &xs) < 0.0 { -1.0 } else { 1.0 }).collect();
                let val = objective(&xs);
                if val > best.0 {
                    best = (val, xs.clone());
                }
                if next == s {
                    break;
                }
                s = next;
            }
        }
        DualSup { value: best.0, functional: best.1, provenance: Provenance::Heuristic }
    }

    /// `‖m‖(A) = sup_{x*} Σ_{i∈A} |⟨m_i, x*⟩|`.
    pub fn semivariation(&self, subset: &[usize]) -> Result<DualSup> {
        let mut w = vec![0.0; self.len()];
        for &i in subset {
            if i >= self.len() {
                return Err(Error::InvalidParameter { name: "subset", reason: format!("atom {i} out of range") });
            }
            w[i] = 1.0;
        }
        Ok(self.weighted_sup(&w))
    }

    /// A Rybakov functional maximizing `min_i μ_i` over extreme points of
    /// `B_{X*}`, normalized sign vectors (all `+` first) and `restarts`
    /// random directions.
    pub fn choose_rybakov(&self, restarts: usize, seed: u64) -> Result<RybakovData> {
        let k = self.k();
        let mut cands = self.dual_extremes().unwrap_or_default();
        for bits in 0..(1usize << k.min(12)) {
            cands.push((0..k).map(|j| if (bits >> j) & 1 == 1 { -1.0 } else { 1.0 }).collect());
        }
        for r in 0..restarts {
            cands.push(gaussian_vector(&mut stream(seed, r as u64), k));
        }
        let cands: Vec<Vec<f64>> = par::map_slice(&cands, |c| {
            let d = self.value_space.dual_norm(c).map(|d| d.value).unwrap_or(0.0);
            if d > 0.0 {
                c.iter().map(|v| v / d).collect()
            } else {
                c.clone()
            }
        });
        let scores = par::map_slice(&cands, |c| self.scalar_measure(c).iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min));
        let (b, score) = par::argmax_by_value(scores).expect("candidate set is nonempty");
        if !(score > 0.0) {
            let worst = self.scalar_measure(&cands[b]).iter().position(|v| *v == 0.0).unwrap_or(0);
            return Err(Error::Invariant(format!("every candidate annihilates an atom (atom {worst})")));
        }
        let masses = self.scalar_measure(&cands[b]).iter().map(|v| v.abs()).collect();
        Ok(RybakovData { functional: cands[b].clone(), masses })
    }

    /// `‖f‖_{L^p(m)}` with its maximizing functional.
    pub fn lp_m_norm(&self, p: Exponent, f: &[f64]) -> Result<DualSup> {
        check_dim(self.len(), f.len())?;
        check_finite(f)?;
        match p {
            Exponent::Infinite => {
                let value = f.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
                Ok(DualSup { value, functional: vec![0.0; self.k()], provenance: Provenance::Exact })
            }
            Exponent::Finite(p) => {
                let w: Vec<f64> = f.iter().map(|v| v.abs().powf(p)).collect();
                let s = self.weighted_sup(&w);
                Ok(DualSup { value: s.value.powf(1.0 / p), ..s })
            }
        }
    }

    /// `L^1(m)` as a lattice norm on functions over the atoms.
    pub fn l1_space(&self) -> Result<NormedSpace> {
        if let Some(mu) = self.scalar_masses()? {
            return NormedSpace::lattice(mu, Exponent::Finite(1.0));
        }
        let me = self.clone();
        let f = Arc::new(move |x: &[f64]| me.weighted_sup(&x.iter().map(|v| v.abs()).collect::<Vec<_>>()).value);
        NormedSpace::custom(self.len(), "L1(m)", f, true, None)
    }

    /// `L^p(m) = L^1(m)_{[1/p]}`.
    pub fn lp_space(&self, p: Exponent) -> Result<NormedSpace> {
        match p {
            Exponent::Infinite => NormedSpace::lp(self.len(), f64::INFINITY),
            Exponent::Finite(p) => match self.scalar_masses()? {
                Some(mu) => NormedSpace::lattice(mu, Exponent::Finite(p)),
                None => self.l1_space()?.pth_power(1.0 / p),
            },
        }
    }

    /// For `k = 1` the variation `|m|` with `|m|_i = ‖m_i‖_X`, over which
    /// `L^p(m)` is a Lebesgue space.
    fn scalar_masses(&self) -> Result<Option<FiniteMeasure>> {
        if self.k() != 1 {
            return Ok(None);
        }
        let mu = self.atoms.iter().map(|a| self.value_space.norm_unchecked(a)).collect();
        Ok(Some(FiniteMeasure::new(mu)?))
    }

    /// `h(i) = ⟨m_i, z*⟩ / μ_i`.
    pub fn rn_derivative(&self, ryb: &RybakovData, zs: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.k(), zs.len())?;
        check_dim(self.len(), ryb.masses.len())?;
        if let Some(i) = ryb.masses.iter().position(|m| !(*m > 0.0)) {
            return Err(Error::Invariant(format!("Rybakov mass of atom {i} vanishes")));
        }
        Ok(self.scalar_measure(zs).iter().zip(&ryb.masses).map(|(a, m)| a / m).collect())
    }

    /// `‖h_{z*}‖_{(L^1(m))'}` bracketed by cutting planes and capped by
    /// `‖z*‖_{X*}`, since `Σ |a_i h_i| μ_i = Σ |a_i| |⟨m_i, z*⟩| ≤ ‖a‖_{L^1(m)} ‖z*‖`.
    pub fn rn_norm(&self, ryb: &RybakovData, zs: &[f64]) -> Result<NormBracket> {
        let h = self.rn_derivative(ryb, zs)?;
        let b = self.kothe_l1_norm(ryb, &h)?;
        let cap = self.value_space.dual_norm(zs)?.value;
        Ok(NormBracket::new(b.lower.min(cap), b.upper.min(cap), b.provenance))
    }

    /// Spanning set of `RN(m)`: derivatives along the dual coordinate vectors.
    pub fn rn_basis(&self, ryb: &RybakovData) -> Result<Vec<Vec<f64>>> {
        (0..self.k())
            .map(|j| {
                let mut e = vec![0.0; self.k()];
                e[j] = 1.0;
                self.rn_derivative(ryb, &e)
            })
            .collect()
    }

    /// `‖h‖_{(L^1(m))'} = sup {Σ |a_i h_i| μ_i : ‖a‖_{L^1(m)} ≤ 1}` by cutting
    /// planes: each round adds the constraint from the norming functional of
    /// the current maximizer. The relaxation value bounds from above and the
    /// rescaled maximizer from below.
    pub fn kothe_l1_norm(&self, ryb: &RybakovData, h: &[f64]) -> Result<NormBracket> {
        check_dim(self.len(), h.len())?;
        check_finite(h)?;
        let n = self.len();
        let c: Vec<f64> = h.iter().zip(&ryb.masses).map(|(a, m)| a.abs() * m).collect();
        if c.iter().all(|v| *v == 0.0) {
            return Ok(NormBracket::zero());
        }
        let mut cuts: Vec<Vec<f64>> = self.dual_extremes().unwrap_or_default();
        for m in &self.atoms {
            cuts.push(self.normalize_dual(self.value_space.norming_functional(m).0));
        }
        let mut lower = 0.0_f64;
        let mut upper = f64::INFINITY;
        for _ in 0..CUT_ROUNDS {
            let mut lp = LpProblem::new(Sense::Maximize, c.clone()).with_bounds(vec![VarBound::NonNegative; n]);
            for xs in &cuts {
                lp.push(self.scalar_measure(xs).iter().map(|v| v.abs()).collect(), Relation::Le, 1.0);
            }
            let sol = solve_lp(&lp)?;
            upper = upper.min(sol.value);
            let s = self.weighted_sup(&sol.primal);
            if s.value > 0.0 {
                lower = lower.max(sol.value / s.value.max(1.0));
            }
            if s.value <= 1.0 + 1e-12 || upper - lower <= 1e-10 * (1.0 + upper) {
                break;
            }
            cuts.push(s.functional);
        }
        let prov = if upper - lower <= 1e-9 * (1.0 + upper) { Provenance::Exact } else { Provenance::Heuristic };
        Ok(NormBracket::new(lower, upper, prov))
    }
}

fn unit_exponent(p: f64) -> Result<(Exponent, Exponent)> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter { name: "p", reason: format!("{p} is not in (1, ∞)") });
    }
    let e = Exponent::new(p)?;
    Ok((e, e.conjugate()))
}

fn sample_fn(n: usize, seed: u64, k: usize) -> Vec<f64> {
    match k {
        0 => vec![0.0; n],
        k if k <= n => {
            let mut e = vec![0.0; n];
            e[k - 1] = 1.0;
            e
        }
        _ => uniform_vector(&mut stream(seed, 0), n, -2.0, 2.0),
    }
}

/// `g_i = |f_i|^{p−1} sgn f_i sgn ⟨m_i, x̂*⟩`, attaining `‖f‖_p` in the duality formula.
fn analytic_witness(m: &VectorMeasure, p: f64, f: &[f64], xs: &[f64]) -> Vec<f64> {
    let s = m.scalar_measure(xs);
    f.iter().zip(&s).map(|(fi, si)| fi.abs().powf(p - 1.0) * fi.signum() * if *si < 0.0 { -1.0 } else { 1.0 }).collect()
}

fn scale(v: &[f64], a: f64) -> Vec<f64> {
    v.iter().map(|x| x * a).collect()
}

/// Random unit vectors of `L^p(m)`.
fn sampled_units(m: &VectorMeasure, p: Exponent, seed: u64, count: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(count);
    for r in 0..count {
        let v = uniform_vector(&mut stream(seed, 50 + r as u64), m.len(), -1.0, 1.0);
        let nv = m.lp_m_norm(p, &v)?.value;
        if nv > 0.0 {
            out.push(scale(&v, 1.0 / nv));
        }
    }
    Ok(out)
}

const SAMPLED_CHECKS: usize = 8;

/// For sampled `f` compares `sup {‖∫ f g dm‖ : ‖g‖_{L^{p'}(m)} ≤ 1}` with
/// `‖f‖_{L^p(m)}`. The supremum is bracketed by the analytic witness below
/// and the Hölder bound above; random unit `g` must stay under the bound.
pub fn verify_lp_duality_norm(m: &VectorMeasure, p: f64, samples: usize, opts: &DualityOptions, family: &str) -> Result<DualityReport> {
    let (ep, eq) = unit_exponent(p)?;
    let n = m.len();
    let x = m.value_space();
    let records = par::map_range(samples, |k| -> Result<DualityRecord> {
        let seed = child_seed(opts.seed, k as u64);
        let f = sample_fn(n, seed, k);
        let rhs = m.lp_m_norm(ep, &f)?;
        let g = analytic_witness(m, p, &f, &rhs.functional);
        let gn = m.lp_m_norm(eq, &g)?.value;
        let g = if gn > 0.0 { scale(&g, 1.0 / gn) } else { g };
        let value = |g: &[f64]| x.norm_unchecked(&m.integrate_unchecked(&f.iter().zip(g).map(|(a, b)| a * b).collect::<Vec<_>>()));
        let attained = value(&g);
        let lhs = NormBracket::new(attained.min(rhs.value), rhs.value, rhs.provenance);
        let rhs_b = NormBracket::point(rhs.value, rhs.provenance);
        let mut rec = DualityRecord::compare(family, format!("{k:04}"), &lhs, &rhs_b, 1e-6, seed)
            .with_witness(Witness::Point { label: "f".into(), values: f.clone() })
            .with_witness(Witness::Point { label: "g".into(), values: g });
        let escaped = sampled_units(m, eq, seed, SAMPLED_CHECKS)?.iter().any(|g| value(g) > rhs.value + 1e-9 * (1.0 + rhs.value));
        if (attained - rhs.value).abs() > 1e-6 * (1.0 + rhs.value) || escaped {
            rec = rec.fail();
        }
        Ok(rec)
    });
    Ok(DualityReport::new(records.into_iter().collect::<Result<Vec<_>>>()?))
}

/// The pointwise product `L^p(m) × L^{p'}(m) → L^1(m)`, of norm 1: Hölder
/// bounds it and normalized indicators of one atom attain it.
pub fn integration_map(m: &VectorMeasure, p: f64) -> Result<BilinearMap> {
    let (ep, eq) = unit_exponent(p)?;
    let c = BilinearMap::new(BilinearKind::Pointwise, Arc::new(m.lp_space(ep)?), Arc::new(m.lp_space(eq)?), Arc::new(m.l1_space()?))?;
    Ok(c.with_known_bound(NormBracket::point(1.0, Provenance::Exact)))
}

/// `f ↦ ∫ f h₀ dm` as a `k × n` matrix.
pub fn integration_operator(m: &VectorMeasure, h0: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(m.k(), m.len(), |j, i| h0[i] * m.atoms()[i][j])
}

/// For sampled `h₀`, brackets `sup ‖∫ h₀ f g dm‖` over the `L^p(m) × L^{p'}(m)`
/// unit balls by the single-atom witness below and the Hölder bound `‖h₀‖_∞`
/// above; random unit pairs must stay under the bound.
pub fn verify_linf_identification(m: &VectorMeasure, p: f64, samples: usize, opts: &DualityOptions, family: &str) -> Result<DualityReport> {
    let (ep, eq) = unit_exponent(p)?;
    let n = m.len();
    let x = m.value_space();
    let records = par::map_range(samples, |k| -> Result<DualityRecord> {
        let seed = child_seed(opts.seed, k as u64);
        let h0 = if k == 1 { vec![1.0; n] } else { sample_fn(n, seed, if k == 0 { 0 } else { k + n }) };
        let bound = h0.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        let (istar, _) = par::argmax_by_value(h0.iter().map(|v| v.abs())).expect("nonempty");
        let mut chi = vec![0.0; n];
        chi[istar] = 1.0;
        let (fx, gy) = (m.lp_m_norm(ep, &chi)?.value, m.lp_m_norm(eq, &chi)?.value);
        let (f, g) = (scale(&chi, 1.0 / fx), scale(&chi, 1.0 / gy));
        let value = |f: &[f64], g: &[f64]| x.norm_unchecked(&m.integrate_unchecked(&(0..n).map(|i| h0[i] * f[i] * g[i]).collect::<Vec<_>>()));
        let attained = value(&f, &g);
        let lhs = NormBracket::new(attained.min(bound), bound, Provenance::Exact);
        let rhs = NormBracket::point(bound, Provenance::Exact);
        let mut rec = DualityRecord::compare(family, format!("{k:04}"), &lhs, &rhs, 1e-6, seed)
            .with_witness(Witness::Point { label: "h0".into(), values: h0.clone() })
            .with_witness(Witness::Point { label: "f".into(), values: f })
            .with_witness(Witness::Point { label: "g".into(), values: g });
        let (fs, gs) = (sampled_units(m, ep, seed, SAMPLED_CHECKS)?, sampled_units(m, eq, seed ^ 1, SAMPLED_CHECKS)?);
        let escaped = fs.iter().zip(&gs).any(|(f, g)| value(f, g) > bound + 1e-9 * (1.0 + bound));
        if (attained - bound).abs() > 1e-6 * (1.0 + bound) || escaped {
            rec = rec.fail();
        }
        Ok(rec)
    });
    Ok(DualityReport::new(records.into_iter().collect::<Result<Vec<_>>>()?))
}

/// For sampled `g`, compares `‖S_g‖` over `B_{L^p(m)} × B_{RN(m)}` with
/// `‖g‖_{L^{p'}(m)}`. The lower witness pairs the analytic `f` with the
/// derivative at the maximizing `z*`, feasible because `‖h_{z*}‖ ≤ ‖z*‖`; the
/// upper bound is the Hölder chain. Random pairs are checked against it.
pub fn verify_predual(m: &VectorMeasure, p: f64, samples: usize, opts: &DualityOptions, family: &str) -> Result<DualityReport> {
    let (ep, eq) = unit_exponent(p)?;
    let q = p / (p - 1.0);
    let ryb = m.choose_rybakov(opts.restarts, opts.seed)?;
    let n = m.len();
    let xs_norm = |z: &[f64]| m.value_space().dual_norm(z).map(|d| d.value);
    let records = par::map_range(samples, |k| -> Result<DualityRecord> {
        let seed = child_seed(opts.seed, k as u64);
        let g = sample_fn(n, seed, k);
        let rhs = m.lp_m_norm(eq, &g)?;
        let f = analytic_witness(m, q, &g, &rhs.functional);
        let fnorm = m.lp_m_norm(ep, &f)?.value;
        let f = if fnorm > 0.0 { scale(&f, 1.0 / fnorm) } else { f };
        let zn = xs_norm(&rhs.functional)?;
        let z = if zn > 1.0 { scale(&rhs.functional, 1.0 / zn) } else { rhs.functional.clone() };
        let h = m.rn_derivative(&ryb, &z)?;
        let pairing = |f: &[f64], h: &[f64]| (0..n).map(|i| g[i] * f[i] * h[i] * ryb.masses[i]).sum::<f64>().abs();
        let attained = pairing(&f, &h);
        let lhs = NormBracket::new(attained.min(rhs.value), rhs.value, rhs.provenance);
        let rhs_b = NormBracket::point(rhs.value, rhs.provenance);
        let mut rec = DualityRecord::compare(family, format!("{k:04}"), &lhs, &rhs_b, 1e-6, seed)
            .with_witness(Witness::Point { label: "g".into(), values: g.clone() })
            .with_witness(Witness::Point { label: "f".into(), values: f })
            .with_witness(Witness::Point { label: "h".into(), values: h });
        if (attained - rhs.value).abs() > 1e-6 * (1.0 + rhs.value) {
            rec = rec.fail();
        }
        for (r, fr) in sampled_units(m, ep, seed, SAMPLED_CHECKS)?.iter().enumerate() {
            let zr = gaussian_vector(&mut stream(seed, 20 + r as u64), m.k());
            let hr = m.rn_derivative(&ryb, &zr)?;
            let nh = xs_norm(&zr)?;
            if nh > 0.0 && pairing(fr, &hr) / nh > rhs.value + 1e-9 * (1.0 + rhs.value) {
                rec = rec.fail();
            }
        }
        Ok(rec)
    });
    Ok(DualityReport::new(records.into_iter().collect::<Result<Vec<_>>>()?))
}

/// `(c, V)` for the duality harness: the integration product with
/// integration operators against the given `h₀`, valued in `X`.
pub fn duality_instance(m: &VectorMeasure, p: f64, h0s: &[Vec<f64>]) -> Result<(BilinearMap, OperatorClass)> {
    let c = integration_map(m, p)?;
    let members = h0s.iter().map(|h| integration_operator(m, h)).collect();
    let class = OperatorClass::new(members, m.value_space().clone(), m.len())?;
    Ok((c, class))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar() -> VectorMeasure {
        VectorMeasure::new(vec![vec![1.0], vec![-2.0]], Arc::new(NormedSpace::lp(1, 1.0).unwrap())).unwrap()
    }

    fn linf_basis() -> VectorMeasure {
        VectorMeasure::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], Arc::new(NormedSpace::lp(2, f64::INFINITY).unwrap())).unwrap()
    }

    #[test]
    fn semivariation_examples() {
        assert!((scalar().semivariation(&[0, 1]).unwrap().value - 3.0).abs() < 1e-14);
        assert!((linf_basis().semivariation(&[0, 1]).unwrap().value - 1.0).abs() < 1e-14);
        assert_eq!(linf_basis().semivariation(&[]).unwrap().value, 0.0);
        let l2 = Arc::new(NormedSpace::lp(2, 2.0).unwrap());
        let m = VectorMeasure::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], l2).unwrap();
        assert!((m.semivariation(&[0, 1]).unwrap().value - 2f64.sqrt()).abs() < 1e-14);
        assert!(VectorMeasure::new(vec![vec![0.0, 0.0]], Arc::new(NormedSpace::lp(2, 2.0).unwrap())).is_err());
    }

    #[test]
    fn sign_enumeration_agrees_with_extremes() {
        for (p, s) in [(1.0, 1u64), (f64::INFINITY, 2)] {
            let x = Arc::new(NormedSpace::lp(3, p).unwrap());
            let m = VectorMeasure::random(5, x.clone(), s).unwrap();
            let w = [0.5, 1.0, 2.0, 0.0, 0.3];
            let ext = m.weighted_sup(&w).value;
            let mut best = 0.0_f64;
            for bits in 0..32usize {
                let v = m.integrate_unchecked(&(0..5).map(|i| if (bits >> i) & 1 == 1 { -w[i] } else { w[i] }).collect::<Vec<_>>());
                best = best.max(x.norm(&v).unwrap());
            }
            assert!((ext - best).abs() < 1e-12, "{ext} {best}");
        }
    }

    #[test]
    fn rybakov_examples() {
        let r = scalar().choose_rybakov(8, 0).unwrap();
        assert_eq!(r.functional, vec![1.0]);
        assert_eq!(r.masses, vec![1.0, 2.0]);
        let r = linf_basis().choose_rybakov(8, 0).unwrap();
        assert_eq!(r.functional, vec![0.5, 0.5]);
        assert_eq!(r.masses, vec![0.5, 0.5]);
    }

    #[test]
    fn lp_m_examples() {
        let m = linf_basis();
        assert!((m.lp_m_norm(Exponent::Finite(2.0), &[3.0, 4.0]).unwrap().value - 4.0).abs() < 1e-14);
        assert_eq!(m.lp_m_norm(Exponent::Finite(2.0), &[0.0, 0.0]).unwrap().value, 0.0);
        let x = Arc::new(NormedSpace::lp(3, 2.0).unwrap());
        let m = VectorMeasure::random(4, x.clone(), 5).unwrap();
        for i in 0..4 {
            let mut chi = vec![0.0; 4];
            chi[i] = 1.0;
            let v = m.lp_m_norm(Exponent::Finite(1.0), &chi).unwrap().value;
            assert!((v - x.norm(&m.atoms()[i]).unwrap()).abs() < 1e-12);
        }
        let sp = m.lp_space(Exponent::Finite(3.0)).unwrap();
        let f = [0.3, -1.0, 2.0, 0.5];
        assert!((sp.norm(&f).unwrap() - m.lp_m_norm(Exponent::Finite(3.0), &f).unwrap().value).abs() < 1e-12);
    }

    #[test]
    fn integration_and_rn() {
        let m = VectorMeasure::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], Arc::new(NormedSpace::lp(2, 2.0).unwrap())).unwrap();
        assert_eq!(m.integrate(&[2.0, 3.0]).unwrap(), vec![2.0, 3.0]);
        assert_eq!(m.integrate(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(m.integrate(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);
        let s = scalar();
        let r = s.choose_rybakov(4, 0).unwrap();
        assert_eq!(s.rn_derivative(&r, &[2.0]).unwrap(), vec![2.0, -2.0]);
        assert_eq!(s.rn_derivative(&r, &[1.0]).unwrap(), vec![1.0, -1.0]);
        assert_eq!(s.rn_derivative(&r, &[0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn rn_feasibility() {
        for (p, seed) in [(2.0, 1u64), (1.0, 2), (f64::INFINITY, 3)] {
            let x = Arc::new(NormedSpace::lp(3, p).unwrap());
            let m = VectorMeasure::random(5, x.clone(), seed).unwrap();
            let r = m.choose_rybakov(16, seed).unwrap();
            for t in 0..3 {
                let zs = gaussian_vector(&mut stream(seed, 100 + t), 3);
                let h = m.rn_derivative(&r, &zs).unwrap();
                let b = m.kothe_l1_norm(&r, &h).unwrap();
                assert!(b.lower <= b.upper + 1e-12);
                assert!(b.upper <= x.dual_norm(&zs).unwrap().value + 1e-9, "{b:?}");
            }
        }
    }

    #[test]
    fn duality_reports() {
        let opts = DualityOptions { restarts: 8, ..DualityOptions::default() };
        let x = Arc::new(NormedSpace::lp(2, 2.0).unwrap());
        let m = VectorMeasure::random(4, x, 9).unwrap();
        for p in [4.0 / 3.0, 2.0, 4.0] {
            let r = verify_lp_duality_norm(&m, p, 8, &opts, "vecmeas").unwrap();
            assert!(r.passed(), "{:?}", r.records);
            let r = verify_linf_identification(&m, p, 6, &opts, "vecmeas_linf").unwrap();
            assert!(r.passed(), "{:?}", r.records);
            let r = verify_predual(&m, p, 6, &opts, "vecmeas_predual").unwrap();
            assert!(r.passed(), "{:?}", r.records);
        }
    }
}
