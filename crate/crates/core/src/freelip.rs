//! Pointed finite metric spaces, the molecule norm `L_A` and its Lipschitz
//! dual, Lipschitz bi-forms and the identification `B(Æ_A × Æ_D) = (Æ_A)^{Æ_D*}`.
//!
//! Molecules are stored over all points; the reduced coordinates used by the
//! generic engines drop the base point `0`, where every molecule is determined
//! by its other weights.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bilinear::{bilinear_form_norm, BilinearKind, BilinearMap};
use crate::dualgate::OperatorClass;
use crate::error::{check_dim, check_finite, Error, Result};
use crate::optlab::lp::{solve_lp, LpProblem, Relation, Sense, VarBound};
use crate::optlab::rng::{child_seed, stream, uniform_vector};
use crate::optlab::transport::solve_transportation;
use crate::par;
use crate::picalc::{NormBracket, Provenance};
use crate::report::{DualityRecord, DualityReport, Witness};
use crate::spaces::NormedSpace;

/// Above this many points the molecule norm is solved as a transportation problem.
pub const DENSE_LP_MAX_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MetricSpec", into = "MetricSpec")]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
}

/// Config form: an explicit matrix or a weighted edge list closed under
/// shortest paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum MetricSpec {
    Matrix { dist: Vec<Vec<f64>>, #[serde(default)] labels: Vec<String> },
    Edges { points: usize, edges: Vec<(usize, usize, f64)>, #[serde(default)] labels: Vec<String> },
}

impl TryFrom<MetricSpec> for FiniteMetricSpace {
    type Error = Error;

    fn try_from(s: MetricSpec) -> Result<Self> {
        let (m, labels) = match s {
            MetricSpec::Matrix { dist, labels } => (FiniteMetricSpace::new(dist)?, labels),
            MetricSpec::Edges { points, edges, labels } => (FiniteMetricSpace::from_edges(points, &edges)?, labels),
        };
        if labels.is_empty() {
            Ok(m)
        } else {
            m.with_labels(labels)
        }
    }
}

impl From<FiniteMetricSpace> for MetricSpec {
    fn from(m: FiniteMetricSpace) -> Self {
        MetricSpec::Matrix { dist: m.dist, labels: m.labels }
    }
}

impl FiniteMetricSpace {
    /// Validates symmetry, zero diagonal, positivity and the triangle inequality.
    pub fn new(dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = dist.len();
        if n < 1 {
            return Err(Error::InvalidParameter { name: "dist", reason: "no points".into() });
        }
        for row in &dist {
            check_dim(n, row.len())?;
            check_finite(row)?;
        }
        let scale = dist.iter().flatten().fold(0.0_f64, |a, b| a.max(*b));
        for i in 0..n {
            if dist[i][i] != 0.0 {
                return Err(Error::Invariant(format!("d({i},{i}) = {} ≠ 0", dist[i][i])));
            }
            for j in 0..n {
                if i != j && !(dist[i][j] > 0.0) {
                    return Err(Error::Invariant(format!("d({i},{j}) = {} is not positive", dist[i][j])));
                }
                if (dist[i][j] - dist[j][i]).abs() > 1e-14 * scale {
                    return Err(Error::Invariant(format!("d({i},{j}) ≠ d({j},{i})")));
                }
                for k in 0..n {
                    if dist[i][k] > dist[i][j] + dist[j][k] + 1e-12 * scale {
                        return Err(Error::Invariant(format!("triangle inequality fails at ({i},{j},{k})")));
                    }
                }
            }
        }
        let labels = (0..n).map(|i| if i == 0 { "0".to_string() } else { format!("x{i}") }).collect();
        Ok(Self { labels, dist })
    }

    /// Shortest-path closure of an undirected weighted graph on `n` points.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for &(a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidParameter { name: "edges", reason: format!("edge ({a},{b}) leaves 0..{n}") });
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter { name: "edges", reason: format!("weight {w} is not positive") });
            }
            if a != b {
                d[a][b] = d[a][b].min(w);
                d[b][a] = d[a][b];
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        if d.iter().flatten().any(|v| v.is_infinite()) {
            return Err(Error::InvalidParameter { name: "edges", reason: "graph is disconnected".into() });
        }
        Self::new(d)
    }

    /// Shortest-path closure of uniform random weights in `[1, 3]` on the complete graph.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        let w = uniform_vector(&mut stream(seed, 0), n * n, 1.0, 3.0);
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| (i, j, w[i * n + j])).collect();
        Self::from_edges(n, &edges)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        check_dim(self.len(), labels.len())?;
        self.labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    }

    /// `±m_{x¹,x²}/d(x¹,x²)` in reduced coordinates, `+` first for each pair.
    pub fn normalized_molecules(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * (n - 1));
        for (i, j) in self.pairs() {
            let mut v = vec![0.0; n - 1];
            let w = 1.0 / self.d(i, j);
            if i > 0 {
                v[i - 1] = w;
            }
            v[j - 1] = -w;
            out.push(v.clone());
            out.push(v.into_iter().map(|a| -a).collect());
        }
        out
    }

    /// `Æ_A` on reduced coordinates; its ball is the hull of the normalized molecules.
    pub fn molecule_space(&self) -> Result<NormedSpace> {
        if self.len() < 2 {
            return Err(Error::UnsupportedStructure("a one-point space has no molecules".into()));
        }
        NormedSpace::polytope(self.normalized_molecules())
    }
}

/// A zero-sum weight vector over the points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Molecule {
    pub weights: Vec<f64>,
}

impl Molecule {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_finite(&weights)?;
        let s: f64 = weights.iter().sum();
        let scale = weights.iter().fold(1.0_f64, |a, b| a.max(b.abs()));
        if s.abs() > 1e-14 * scale * weights.len().max(1) as f64 {
            return Err(Error::Invariant(format!("molecule weights sum to {s:e}")));
        }
        Ok(Self { weights })
    }

    /// `m_{a,b} = χ_a − χ_b`.
    pub fn elementary(n: usize, a: usize, b: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[a] += 1.0;
        weights[b] -= 1.0;
        Self { weights }
    }

    pub fn zero(n: usize) -> Self {
        Self { weights: vec![0.0; n] }
    }

    pub fn reduced(&self) -> Vec<f64> {
        self.weights[1..].to_vec()
    }

    pub fn from_reduced(r: &[f64]) -> Self {
        let mut weights = Vec::with_capacity(r.len() + 1);
        weights.push(-r.iter().sum::<f64>());
        weights.extend_from_slice(r);
        Self { weights }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeNorm {
    pub value: f64,
    /// Signed edge coefficients `λ_{(i,j)}` of the optimal representation.
    pub flow: Vec<(usize, usize, f64)>,
    /// Duality gap reported by the solver.
    pub gap: f64,
}

/// `L_A(z) = inf Σ|λ_e| d(e)` over signed flows on the complete graph.
pub fn molecule_norm(a: &FiniteMetricSpace, z: &Molecule) -> Result<MoleculeNorm> {
    check_dim(a.len(), z.weights.len())?;
    Molecule::new(z.weights.clone())?;
    if z.weights.iter().all(|v| *v == 0.0) {
        return Ok(MoleculeNorm { value: 0.0, flow: Vec::new(), gap: 0.0 });
    }
    if a.len() > DENSE_LP_MAX_POINTS {
        let supply: Vec<f64> = z.weights.iter().map(|v| v.max(0.0)).collect();
        let demand: Vec<f64> = z.weights.iter().map(|v| (-v).max(0.0)).collect();
        let t = solve_transportation(&supply, &demand, |i, j| a.d(i, j))?;
        let flow = t.flow.into_iter().filter(|f| f.0 != f.1 && f.2 != 0.0).collect();
        return Ok(MoleculeNorm { value: t.value, flow, gap: t.gap });
    }
    let pairs = a.pairs();
    let cost: Vec<f64> = pairs.iter().flat_map(|&(i, j)| [a.d(i, j), a.d(i, j)]).collect();
    let mut lp = LpProblem::new(Sense::Minimize, cost).with_bounds(vec![VarBound::NonNegative; 2 * pairs.len()]);
    for w in 1..a.len() {
        let row = pairs
            .iter()
            .flat_map(|&(i, j)| {
                let s = if w == i { 1.0 } else if w == j { -1.0 } else { 0.0 };
                [s, -s]
            })
            .collect();
        lp.push(row, Relation::Eq, z.weights[w]);
    }
    let sol = solve_lp(&lp)?;
    let flow = pairs
        .iter()
        .enumerate()
        .map(|(e, &(i, j))| (i, j, sol.primal[2 * e] - sol.primal[2 * e + 1]))
        .filter(|f| f.2.abs() > 0.0)
        .collect();
    Ok(MoleculeNorm { value: sol.value, flow, gap: sol.gap })
}

/// `sup Σ z(w) f(w)` over `Lip(f) ≤ 1`, `f(0) = 0`, with the maximizing `f`.
pub fn lipschitz_dual_norm(a: &FiniteMetricSpace, z: &Molecule) -> Result<(f64, Vec<f64>)> {
    check_dim(a.len(), z.weights.len())?;
    Molecule::new(z.weights.clone())?;
    let n = a.len();
    if n == 1 {
        return Ok((0.0, vec![0.0]));
    }
    let mut lp = LpProblem::new(Sense::Maximize, z.reduced()).with_bounds(vec![VarBound::Free; n - 1]);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut row = vec![0.0; n - 1];
            if i > 0 {
                row[i - 1] += 1.0;
            }
            if j > 0 {
                row[j - 1] -= 1.0;
            }
            lp.push(row, Relation::Le, a.d(i, j));
        }
    }
    let sol = solve_lp(&lp)?;
    let mut f = vec![0.0];
    f.extend(sol.primal);
    Ok((sol.value, f))
}

/// `Lip(g) = max |g(x) − g(y)| / d(x, y)` for `g` with `g(0) = 0`.
pub fn lipschitz_constant(a: &FiniteMetricSpace, g: &[f64]) -> f64 {
    a.pairs().iter().map(|&(i, j)| (g[i] - g[j]).abs() / a.d(i, j)).fold(0.0, f64::max)
}

/// `Lip(g)` as the LP `sup Σ_e t_e (g_i − g_j)` over `Σ |t_e| d_e ≤ 1`, the
/// dual norm of `g` against the molecule ball.
pub fn lipschitz_constant_lp(a: &FiniteMetricSpace, g: &[f64]) -> Result<f64> {
    check_dim(a.len(), g.len())?;
    let pairs = a.pairs();
    if pairs.is_empty() {
        return Ok(0.0);
    }
    let obj = pairs.iter().flat_map(|&(i, j)| [g[i] - g[j], g[j] - g[i]]).collect();
    let mut lp = LpProblem::new(Sense::Maximize, obj).with_bounds(vec![VarBound::NonNegative; 2 * pairs.len()]);
    lp.push(pairs.iter().flat_map(|&(i, j)| [a.d(i, j), a.d(i, j)]).collect(), Relation::Le, 1.0);
    Ok(solve_lp(&lp)?.value)
}

/// `T(x, y)` over `A × D` with vanishing base row and column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct LipschitzBiForm {
    values: DMatrix<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for LipschitzBiForm {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        for r in &rows {
            check_dim(m, r.len())?;
            check_finite(r)?;
        }
        Self::new(DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j]))
    }
}

impl From<LipschitzBiForm> for Vec<Vec<f64>> {
    fn from(t: LipschitzBiForm) -> Self {
        t.values.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

impl LipschitzBiForm {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::InvalidParameter { name: "values", reason: "empty bi-form".into() });
        }
        if values.row(0).iter().chain(values.column(0).iter()).any(|v| *v != 0.0) {
            return Err(Error::Invariant("T(x,0) and T(0,y) must vanish".into()));
        }
        Ok(Self { values })
    }

    /// A sampled matrix with its base row and column zeroed.
    pub fn random(na: usize, nd: usize, seed: u64) -> Self {
        let v = uniform_vector(&mut stream(seed, 0), na * nd, -1.0, 1.0);
        let values = DMatrix::from_fn(na, nd, |i, j| if i == 0 || j == 0 { 0.0 } else { v[i * nd + j] });
        Self { values }
    }

    /// `T(x, y) = f(x) g(y)`.
    pub fn rank_one(f: &[f64], g: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_fn(f.len(), g.len(), |i, j| f[i] * g[j]))
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// The block acting on reduced coordinates.
    pub fn reduced(&self) -> DMatrix<f64> {
        self.values.view((1, 1), (self.values.nrows() - 1, self.values.ncols() - 1)).into_owned()
    }

    /// Row-major flattening of [`Self::reduced`], matching tensor coordinates.
    pub fn flattened(&self) -> Vec<f64> {
        let r = self.reduced();
        (0..r.nrows()).flat_map(|i| (0..r.ncols()).map(move |j| (i, j))).map(|(i, j)| r[(i, j)]).collect()
    }
}

/// `T_B(u, v) = Σ u(x) v(y) T(x, y)`.
pub fn bilinearize(t: &LipschitzBiForm, u: &Molecule, v: &Molecule) -> Result<f64> {
    check_dim(t.values.nrows(), u.weights.len())?;
    check_dim(t.values.ncols(), v.weights.len())?;
    Molecule::new(u.weights.clone())?;
    Molecule::new(v.weights.clone())?;
    let mut s = 0.0;
    for (i, ui) in u.weights.iter().enumerate() {
        for (j, vj) in v.weights.iter().enumerate() {
            s += ui * vj * t.values[(i, j)];
        }
    }
    Ok(s)
}

fn rectangle(t: &DMatrix<f64>, (x1, x2): (usize, usize), (y1, y2): (usize, usize)) -> f64 {
    t[(x1, y1)] - t[(x1, y2)] - t[(x2, y1)] + t[(x2, y2)]
}

/// The maximal rectangle quotient with its maximizing pairs.
pub fn rectangle_constant(t: &LipschitzBiForm, a: &FiniteMetricSpace, d: &FiniteMetricSpace) -> (f64, (usize, usize), (usize, usize)) {
    let (pa, pd) = (a.pairs(), d.pairs());
    let mut best = (0.0, (0, 0), (0, 0));
    for &ea in &pa {
        for &ed in &pd {
            let q = rectangle(&t.values, ea, ed).abs() / (a.d(ea.0, ea.1) * d.d(ed.0, ed.1));
            if q > best.0 {
                best = (q, ea, ed);
            }
        }
    }
    best
}

/// `‖T‖` over the molecule balls: the rectangle enumeration is exact, the
/// alternating bi-supremum is reported alongside as an independent lower value.
pub fn biform_norm(t: &LipschitzBiForm, a: &FiniteMetricSpace, d: &FiniteMetricSpace, seed: u64) -> Result<(NormBracket, f64)> {
    check_dim(a.len(), t.values.nrows())?;
    check_dim(d.len(), t.values.ncols())?;
    let (value, _, _) = rectangle_constant(t, a, d);
    let alt = bilinear_form_norm(&t.reduced(), &a.molecule_space()?, &d.molecule_space()?, 16, seed).value;
    Ok((NormBracket::point(value, Provenance::ExtremeEnumeration), alt))
}

/// `‖T‖_{Æ_A → Æ_D*}`: sup over normalized elementary molecules `u` of the
/// Lipschitz constant of `y ↦ T_B(u, m_{y,0})`, each by [`lipschitz_constant_lp`].
pub fn linearization_norm(t: &LipschitzBiForm, a: &FiniteMetricSpace, d: &FiniteMetricSpace) -> Result<(f64, Vec<f64>)> {
    let n = a.len();
    let us = a.normalized_molecules();
    let vals = par::map_slice(&us, |u| -> Result<f64> {
        let u = Molecule::from_reduced(u);
        let g: Vec<f64> = (0..d.len()).map(|y| (0..n).map(|x| u.weights[x] * t.values[(x, y)]).sum()).collect();
        lipschitz_constant_lp(d, &g)
    });
    let vals = vals.into_iter().collect::<Result<Vec<f64>>>()?;
    let (k, v) = par::argmax_by_value(vals.iter().copied()).unwrap_or((0, 0.0));
    Ok((v, us.get(k).cloned().unwrap_or_default()))
}

/// For sampled bi-forms, compares [`biform_norm`] with [`linearization_norm`].
/// Instance 0 is `T = 0`, instance 1 a rank-one form.
pub fn verify_lipschitz_duality(a: &FiniteMetricSpace, d: &FiniteMetricSpace, samples: usize, seed: u64, family: &str) -> Result<DualityReport> {
    let tol = 1e-6;
    let records = par::map_range(samples, |k| -> Result<DualityRecord> {
        let s = child_seed(seed, k as u64);
        let t = match k {
            0 => LipschitzBiForm::new(DMatrix::zeros(a.len(), d.len()))?,
            1 => {
                let mut f = uniform_vector(&mut stream(s, 1), a.len(), -1.0, 1.0);
                let mut g = uniform_vector(&mut stream(s, 2), d.len(), -1.0, 1.0);
                f[0] = 0.0;
                g[0] = 0.0;
                LipschitzBiForm::rank_one(&f, &g)?
            }
            _ => LipschitzBiForm::random(a.len(), d.len(), s),
        };
        let (lhs, alt) = biform_norm(&t, a, d, s)?;
        let (v, u) = linearization_norm(&t, a, d)?;
        let rhs = NormBracket::point(v, Provenance::Exact);
        let mut rec = DualityRecord::compare(family, format!("{k:04}"), &lhs, &rhs, tol, s)
            .with_witness(Witness::Point { label: "biform".into(), values: t.flattened() })
            .with_witness(Witness::Point { label: "rhs.u".into(), values: u });
        if alt > lhs.upper + 1e-9 * (1.0 + lhs.upper) {
            rec = rec.fail();
        }
        Ok(rec)
    });
    Ok(DualityReport::new(records.into_iter().collect::<Result<Vec<_>>>()?))
}

/// `(c, V)` for the duality harness: tensor coordinates on `Æ_A × Æ_D` with
/// the given bi-forms as functionals.
pub fn duality_instance(a: &FiniteMetricSpace, d: &FiniteMetricSpace, forms: &[LipschitzBiForm]) -> Result<(BilinearMap, OperatorClass)> {
    let (ea, ed) = (Arc::new(a.molecule_space()?), Arc::new(d.molecule_space()?));
    let g = Arc::new(NormedSpace::lp(ea.dim() * ed.dim(), 1.0)?);
    let c = BilinearMap::new(BilinearKind::TensorCoordinates, ea, ed, g)?;
    let lambdas: Vec<Vec<f64>> = forms.iter().map(LipschitzBiForm::flattened).collect();
    let class = OperatorClass::functionals(&lambdas, c.codomain().dim())?;
    Ok((c, class))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> FiniteMetricSpace {
        FiniteMetricSpace::new(vec![vec![0.0, 3.0], vec![3.0, 0.0]]).unwrap()
    }

    fn three_point() -> FiniteMetricSpace {
        FiniteMetricSpace::new(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(FiniteMetricSpace::new(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(FiniteMetricSpace::new(vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]]).is_err());
        assert!(FiniteMetricSpace::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).is_err());
        let m = FiniteMetricSpace::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 5.0)]).unwrap();
        assert_eq!(m.d(0, 2), 2.0);
        assert!(FiniteMetricSpace::from_edges(3, &[(0, 1, 1.0)]).is_err());
        assert!(Molecule::new(vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn molecule_examples() {
        let a = two_point();
        let m = Molecule::elementary(2, 1, 0);
        assert!((molecule_norm(&a, &m).unwrap().value - 3.0).abs() < 1e-12);
        let (v, f) = lipschitz_dual_norm(&a, &m).unwrap();
        assert!((v - 3.0).abs() < 1e-12 && (f[1] - 3.0).abs() < 1e-12);
        assert_eq!(molecule_norm(&a, &Molecule::zero(2)).unwrap().value, 0.0);
        assert_eq!(lipschitz_dual_norm(&a, &Molecule::zero(2)).unwrap().0, 0.0);
        let b = three_point();
        let m = Molecule::elementary(3, 2, 0);
        assert!((molecule_norm(&b, &m).unwrap().value - 2.0).abs() < 1e-12);
        let (v, f) = lipschitz_dual_norm(&b, &m).unwrap();
        assert!((v - 2.0).abs() < 1e-12 && (f[2] - 2.0).abs() < 1e-12);
        assert!(molecule_norm(&b, &Molecule { weights: vec![1.0, 0.0, 0.0] }).is_err());
    }

    #[test]
    fn strong_duality_and_isometry() {
        for s in 0..10 {
            let a = FiniteMetricSpace::random(6, s).unwrap();
            let z = Molecule::from_reduced(&uniform_vector(&mut stream(s, 9), 5, -1.0, 1.0));
            let p = molecule_norm(&a, &z).unwrap().value;
            let (d, _) = lipschitz_dual_norm(&a, &z).unwrap();
            assert!((p - d).abs() <= 1e-8, "{p} {d}");
            let poly = a.molecule_space().unwrap().norm(&z.reduced()).unwrap();
            assert!((p - poly).abs() <= 1e-8);
            for x in 1..6 {
                assert_eq!(molecule_norm(&a, &Molecule::elementary(6, x, 0)).unwrap().value, a.d(x, 0));
            }
        }
    }

    #[test]
    fn transportation_route_matches_dense() {
        let a = FiniteMetricSpace::random(5, 3).unwrap();
        let z = Molecule::new(vec![0.5, -1.0, 0.25, 0.75, -0.5]).unwrap();
        let dense = molecule_norm(&a, &z).unwrap().value;
        let supply: Vec<f64> = z.weights.iter().map(|v| v.max(0.0)).collect();
        let demand: Vec<f64> = z.weights.iter().map(|v| (-v).max(0.0)).collect();
        let t = solve_transportation(&supply, &demand, |i, j| a.d(i, j)).unwrap();
        assert!((dense - t.value).abs() < 1e-10);
    }

    #[test]
    fn bilinearization() {
        let t = LipschitzBiForm::rank_one(&[0.0, 2.0, -1.0], &[0.0, 3.0]).unwrap();
        let (u, v) = (Molecule::elementary(3, 1, 0), Molecule::elementary(2, 1, 0));
        assert_eq!(bilinearize(&t, &u, &v).unwrap(), 6.0);
        assert_eq!(bilinearize(&t, &Molecule::zero(3), &v).unwrap(), 0.0);
        let u = Molecule::new(vec![0.5, -1.0, 0.5]).unwrap();
        let fu: f64 = 0.5 * 0.0 - 2.0 + 0.5 * -1.0;
        assert!((bilinearize(&t, &u, &v).unwrap() - fu * 3.0).abs() < 1e-14);
        let u = Molecule::elementary(3, 2, 1);
        let v = Molecule::elementary(2, 0, 1);
        assert_eq!(bilinearize(&t, &u, &v).unwrap(), rectangle(t.values(), (2, 1), (0, 1)));
    }

    #[test]
    fn biform_examples() {
        let (a, d) = (
            FiniteMetricSpace::new(vec![vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap(),
            FiniteMetricSpace::new(vec![vec![0.0, 3.0], vec![3.0, 0.0]]).unwrap(),
        );
        let t = LipschitzBiForm::new(DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 6.0])).unwrap();
        let (b, alt) = biform_norm(&t, &a, &d, 0).unwrap();
        assert!((b.upper - 1.0).abs() < 1e-12 && (alt - 1.0).abs() < 1e-9);
        let z = LipschitzBiForm::new(DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(biform_norm(&z, &a, &d, 0).unwrap().0.upper, 0.0);
        let (a, d) = (FiniteMetricSpace::random(4, 1).unwrap(), FiniteMetricSpace::random(3, 2).unwrap());
        let (f, g) = ([0.0, 0.3, -1.0, 0.7], [0.0, 2.0, -0.5]);
        let t = LipschitzBiForm::rank_one(&f, &g).unwrap();
        let expect = lipschitz_constant(&a, &f) * lipschitz_constant(&d, &g);
        let (b, alt) = biform_norm(&t, &a, &d, 0).unwrap();
        assert!((b.upper - expect).abs() < 1e-12 && alt <= b.upper + 1e-9);
    }

    #[test]
    fn lipschitz_duality_report() {
        let (a, d) = (FiniteMetricSpace::random(5, 11).unwrap(), FiniteMetricSpace::random(4, 12).unwrap());
        let r = verify_lipschitz_duality(&a, &d, 12, 7, "freelip").unwrap();
        assert!(r.passed() && r.max_gap() <= 1e-6, "{:?}", r.summary());
        assert_eq!(r.records[0].lhs_upper, 0.0);
    }
}
