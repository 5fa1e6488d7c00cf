//! Finite-dimensional normed spaces: weighted `ℓ^p`, lattices over finite
//! atomic measures, `s`-th powers, Köthe duals, polyhedral gauges, and custom
//! norms, with exact dual norms wherever the geometry allows.
//!
//! Every weighted `L^p`-type norm is normalized internally to a
//! [`LebesgueForm`] `x ↦ ‖d ∘ x‖_p`, which is closed under duals, powers, and
//! Köthe duals. That is where all the closed forms live.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::optlab::ascent::{ratio_ascent, Support, UnitBall};
use crate::optlab::lp::{solve_lp, LpProblem, Relation, Sense, VarBound};
use crate::optlab::rng::{gaussian_vector, stream};
use crate::picalc::Provenance;

/// A norm exponent in `[1, ∞]`. Infinity is its own variant, so conjugation
/// swaps `1` and `∞` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinite)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidParameter { name: "p", reason: format!("{p} is not in [1, ∞]") })
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinite => 0.0,
        }
    }

    /// The exponent with the given reciprocal; `r = 0` is `∞`.
    pub fn from_reciprocal(r: f64) -> Result<Self> {
        if r == 0.0 {
            Ok(Exponent::Infinite)
        } else if (1.0..=1.0 + 1e-12).contains(&r) {
            Ok(Exponent::Finite(1.0))
        } else if r > 0.0 && r < 1.0 {
            Ok(Exponent::Finite(1.0 / r))
        } else {
            Err(Error::InvalidParameter { name: "p", reason: format!("reciprocal {r} is not in [0, 1]") })
        }
    }

    pub fn conjugate(self) -> Self {
        match self {
            Exponent::Infinite => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinite,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn is_one(self) -> bool {
        self == Exponent::Finite(1.0)
    }

    pub fn is_infinite(self) -> bool {
        self == Exponent::Infinite
    }

    /// Parses `"2"`, `"4/3"`, `"1.5"`, `"inf"`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "∞" | "Inf") {
            return Ok(Exponent::Infinite);
        }
        let v = if let Some((a, b)) = t.split_once('/') {
            let num: f64 = a.trim().parse().map_err(|_| bad_exponent(s))?;
            let den: f64 = b.trim().parse().map_err(|_| bad_exponent(s))?;
            num / den
        } else {
            t.parse().map_err(|_| bad_exponent(s))?
        };
        Exponent::new(v)
    }
}

fn bad_exponent(s: &str) -> Error {
    Error::InvalidParameter { name: "p", reason: format!("cannot parse exponent `{s}`") }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::new(p),
            Raw::Text(t) => Exponent::parse(&t),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Masses of the atoms of a finite, saturated measure space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FiniteMeasure {
    atom_masses: Vec<f64>,
}

impl FiniteMeasure {
    pub fn new(atom_masses: Vec<f64>) -> Result<Self> {
        if atom_masses.is_empty() {
            return Err(Error::InvalidParameter { name: "measure", reason: "no atoms".into() });
        }
        if let Some(i) = atom_masses.iter().position(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::InvalidParameter {
                name: "measure",
                reason: format!("atom {i} has mass {} (must be finite and > 0)", atom_masses[i]),
            });
        }
        Ok(Self { atom_masses })
    }

    pub fn counting(n: usize) -> Self {
        Self { atom_masses: vec![1.0; n] }
    }

    pub fn masses(&self) -> &[f64] {
        &self.atom_masses
    }

    pub fn len(&self) -> usize {
        self.atom_masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atom_masses.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.atom_masses.iter().sum()
    }
}

impl TryFrom<Vec<f64>> for FiniteMeasure {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        FiniteMeasure::new(v)
    }
}

impl From<FiniteMeasure> for Vec<f64> {
    fn from(m: FiniteMeasure) -> Self {
        m.atom_masses
    }
}

/// `x ↦ ‖scale ∘ x‖_p` with `scale > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LebesgueForm {
    pub exponent: Exponent,
    pub scale: Vec<f64>,
}

/// Unweighted `‖u‖_p`, scaled by the max entry to avoid overflow.
pub fn lp_norm(u: &[f64], p: Exponent) -> f64 {
    let m = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    match p {
        Exponent::Infinite => m,
        Exponent::Finite(p) if p == 1.0 => u.iter().map(|v| v.abs()).sum(),
        Exponent::Finite(p) if p == 2.0 => m * u.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt(),
        Exponent::Finite(p) => m * u.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

fn signum0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// A norm-one maximizer of `⟨u, z⟩` over the unweighted `ℓ^p` ball.
fn lp_support_point(u: &[f64], p: Exponent) -> Vec<f64> {
    let n = u.len();
    match p {
        Exponent::Infinite => u.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect(),
        Exponent::Finite(p) if p == 1.0 => {
            let mut k = 0;
            for i in 1..n {
                if u[i].abs() > u[k].abs() {
                    k = i;
                }
            }
            let mut z = vec![0.0; n];
            z[k] = if u[k] < 0.0 { -1.0 } else { 1.0 };
            z
        }
        Exponent::Finite(p) => {
            let q = p / (p - 1.0);
            let dn = lp_norm(u, Exponent::Finite(q));
            if dn == 0.0 {
                let mut z = vec![0.0; n];
                z[0] = 1.0;
                return z;
            }
            u.iter().map(|&v| signum0(v) * (v.abs() / dn).powf(q - 1.0)).collect()
        }
    }
}

impl LebesgueForm {
    pub fn new(exponent: Exponent, scale: Vec<f64>) -> Result<Self> {
        if let Some(i) = scale.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidParameter { name: "weights", reason: format!("entry {i} is {} (must be > 0)", scale[i]) });
        }
        Ok(Self { exponent, scale })
    }

    pub fn dim(&self) -> usize {
        self.scale.len()
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        let u: Vec<f64> = x.iter().zip(&self.scale).map(|(a, d)| a * d).collect();
        lp_norm(&u, self.exponent)
    }

    pub fn dual(&self) -> LebesgueForm {
        LebesgueForm { exponent: self.exponent.conjugate(), scale: self.scale.iter().map(|d| 1.0 / d).collect() }
    }

    /// `sup {⟨λ, x⟩ : ‖x‖ ≤ 1}` and a norm-one maximizer.
    pub fn support(&self, lambda: &[f64]) -> (f64, Vec<f64>) {
        let u: Vec<f64> = lambda.iter().zip(&self.scale).map(|(l, d)| l / d).collect();
        let value = lp_norm(&u, self.exponent.conjugate());
        let z = lp_support_point(&u, self.exponent);
        (value, z.iter().zip(&self.scale).map(|(z, d)| z / d).collect())
    }

    /// The form of `x ↦ ‖|x|^{1/s}‖^s`.
    pub fn pth_power(&self, s: f64) -> LebesgueForm {
        let exponent = match self.exponent {
            Exponent::Infinite => Exponent::Infinite,
            Exponent::Finite(p) => Exponent::Finite(p / s),
        };
        LebesgueForm { exponent, scale: self.scale.iter().map(|d| d.powf(s)).collect() }
    }

    /// The form of the Köthe dual with respect to the measure `nu`.
    pub fn kothe(&self, nu: &[f64]) -> LebesgueForm {
        LebesgueForm {
            exponent: self.exponent.conjugate(),
            scale: nu.iter().zip(&self.scale).map(|(m, d)| m / d).collect(),
        }
    }

    pub fn extreme_points(&self) -> Option<Vec<Vec<f64>>> {
        let n = self.dim();
        if n == 1 {
            return Some(vec![vec![1.0 / self.scale[0]]]);
        }
        match self.exponent {
            Exponent::Finite(p) if p == 1.0 => Some(
                (0..n)
                    .map(|i| {
                        let mut e = vec![0.0; n];
                        e[i] = 1.0 / self.scale[i];
                        e
                    })
                    .collect(),
            ),
            Exponent::Infinite if n <= 16 => Some(
                (0..1usize << n.saturating_sub(1))
                    .map(|mask| (0..n).map(|i| if i > 0 && mask >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 } / self.scale[i]).collect())
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Operator norm of `x ↦ t ∘ x` from `from` to `to`, with a norm-one
    /// maximizer in `from`.
    pub fn diagonal_operator_norm(t: &[f64], from: &LebesgueForm, to: &LebesgueForm) -> (f64, Vec<f64>) {
        let n = t.len();
        let e: Vec<f64> = (0..n).map(|i| to.scale[i] * t[i].abs() / from.scale[i]).collect();
        let (p, q) = (from.exponent, to.exponent);
        let inv_r = q.reciprocal() - p.reciprocal();
        let u: Vec<f64> = if inv_r <= 1e-15 {
            let mut k = 0;
            for i in 1..n {
                if e[i] > e[k] {
                    k = i;
                }
            }
            let mut u = vec![0.0; n];
            u[k] = 1.0;
            u
        } else {
            let r = Exponent::Finite(1.0 / inv_r);
            let er = lp_norm(&e, r);
            if er == 0.0 {
                let mut u = vec![0.0; n];
                u[0] = 1.0;
                u
            } else {
                // u_i = (e_i/‖e‖_r)^{r/p}; for p = ∞ every coordinate saturates.
                let rp = (1.0 / inv_r) * p.reciprocal();
                e.iter().map(|&v| if rp == 0.0 { 1.0 } else { (v / er).powf(rp) }).collect()
            }
        };
        let x: Vec<f64> = u.iter().zip(&from.scale).map(|(u, d)| u / d).collect();
        let y: Vec<f64> = x.iter().zip(t).map(|(a, b)| a * b).collect();
        let value = if inv_r <= 1e-15 { e.iter().fold(0.0f64, |m, v| m.max(*v)) } else { lp_norm(&e, Exponent::Finite(1.0 / inv_r)) };
        debug_assert!((to.norm(&y) - value).abs() <= 1e-8 * (1.0 + value));
        (value, x)
    }
}

/// Structural flags used to pick exact algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceMeta {
    pub is_lattice: bool,
    /// The unit ball is a polytope with an enumerable vertex list.
    pub has_polyhedral_ball: bool,
    pub has_closed_form_dual: bool,
}

/// Serializable description of a space, as read from experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    /// `(Σ w_i |x_i|^p)^{1/p}`, or `max w_i |x_i|` for `p = ∞`.
    Lp {
        dim: usize,
        p: Exponent,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    /// `L^p(μ)` over a finite atomic measure.
    Lattice { measure: FiniteMeasure, p: Exponent },
    /// `‖scale ∘ x‖_p`.
    ScaledLp { p: Exponent, scale: Vec<f64> },
    PthPower { base: Box<SpaceSpec>, s: f64 },
    KotheDual { base: Box<SpaceSpec> },
    /// `max_k Σ_i rows[k][i] |x_i|`, a lattice norm over `measure`.
    MaxWeightedL1 { rows: Vec<Vec<f64>>, measure: FiniteMeasure },
    /// Gauge of the absolute convex hull of `vertices`.
    Polytope { vertices: Vec<Vec<f64>> },
}

pub type NormFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct CustomNorm {
    pub name: String,
    pub f: NormFn,
    pub extremes: Option<Vec<Vec<f64>>>,
    pub lattice: bool,
}

impl fmt::Debug for CustomNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomNorm").field("name", &self.name).field("lattice", &self.lattice).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum NormKind {
    WeightedLp { p: Exponent, weights: Vec<f64> },
    Lattice { measure: FiniteMeasure, p: Exponent },
    ScaledLp(LebesgueForm),
    PthPower { base: Arc<NormedSpace>, s: f64 },
    KotheDual { base: Arc<NormedSpace> },
    MaxWeightedL1 { rows: Vec<Vec<f64>>, measure: FiniteMeasure },
    Polytope { vertices: Vec<Vec<f64>> },
    Custom(CustomNorm),
}

#[derive(Debug, Clone)]
pub struct NormedSpace {
    dim: usize,
    kind: NormKind,
    meta: SpaceMeta,
    form: Option<LebesgueForm>,
}

/// A dual-norm value and how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualNorm {
    pub value: f64,
    pub provenance: Provenance,
}

const VALIDATION_SAMPLES: usize = 256;
const VALIDATION_SEED: u64 = 0x5eed_0f_5ace;

impl NormedSpace {
    fn build(dim: usize, kind: NormKind) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter { name: "dim", reason: "dimension must be positive".into() });
        }
        let form = match &kind {
            NormKind::WeightedLp { p, weights } => Some(LebesgueForm::new(
                *p,
                match p {
                    Exponent::Finite(p) => weights.iter().map(|w| w.powf(1.0 / p)).collect(),
                    Exponent::Infinite => weights.clone(),
                },
            )?),
            NormKind::Lattice { measure, p } => Some(LebesgueForm::new(
                *p,
                match p {
                    Exponent::Finite(p) => measure.masses().iter().map(|m| m.powf(1.0 / p)).collect(),
                    Exponent::Infinite => vec![1.0; measure.len()],
                },
            )?),
            NormKind::ScaledLp(f) => Some(LebesgueForm::new(f.exponent, f.scale.clone())?),
            NormKind::PthPower { base, s } => base.form.as_ref().map(|f| f.pth_power(*s)),
            NormKind::KotheDual { base } => match (&base.form, base.measure()) {
                (Some(f), Some(nu)) => Some(f.kothe(&nu)),
                _ => None,
            },
            _ => None,
        };
        if let Some(f) = &form {
            check_dim(dim, f.dim())?;
        }
        let is_lattice = match &kind {
            NormKind::WeightedLp { .. } | NormKind::Lattice { .. } | NormKind::ScaledLp(_) => true,
            NormKind::PthPower { .. } | NormKind::KotheDual { .. } | NormKind::MaxWeightedL1 { .. } => true,
            NormKind::Polytope { .. } => false,
            NormKind::Custom(c) => c.lattice,
        };
        let has_polyhedral_ball = match &kind {
            NormKind::Polytope { .. } => true,
            NormKind::Custom(c) => c.extremes.is_some(),
            _ => form.as_ref().is_some_and(|f| f.extreme_points().is_some()),
        };
        let has_closed_form_dual = form.is_some();
        let space = Self { dim, kind, meta: SpaceMeta { is_lattice, has_polyhedral_ball, has_closed_form_dual }, form };
        if matches!(space.kind, NormKind::Custom(_) | NormKind::Polytope { .. }) {
            space.validate()?;
        }
        Ok(space)
    }

    /// Unweighted `ℓ^p_n`.
    pub fn lp(dim: usize, p: f64) -> Result<Self> {
        Self::weighted_lp(Exponent::new(p)?, vec![1.0; dim])
    }

    pub fn weighted_lp(p: Exponent, weights: Vec<f64>) -> Result<Self> {
        let dim = weights.len();
        Self::build(dim, NormKind::WeightedLp { p, weights })
    }

    pub fn lattice(measure: FiniteMeasure, p: Exponent) -> Result<Self> {
        let dim = measure.len();
        Self::build(dim, NormKind::Lattice { measure, p })
    }

    pub fn scaled_lp(form: LebesgueForm) -> Result<Self> {
        Self::build(form.dim(), NormKind::ScaledLp(form))
    }

    pub fn max_weighted_l1(rows: Vec<Vec<f64>>, measure: FiniteMeasure) -> Result<Self> {
        let dim = measure.len();
        if rows.is_empty() || rows.iter().any(|r| r.len() != dim || r.iter().any(|v| !(v.is_finite() && *v >= 0.0))) {
            return Err(Error::InvalidParameter { name: "rows", reason: "rows must be nonnegative and match the measure".into() });
        }
        for i in 0..dim {
            if rows.iter().all(|r| r[i] == 0.0) {
                return Err(Error::NormValidation(format!("coordinate {i} has zero weight in every row")));
            }
        }
        Self::build(dim, NormKind::MaxWeightedL1 { rows, measure })
    }

    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vertices.first().map_or(0, |v| v.len());
        if vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidParameter { name: "vertices", reason: "ragged vertex list".into() });
        }
        Self::build(dim, NormKind::Polytope { vertices })
    }

    /// Registers an arbitrary norm. It is sampled for definiteness,
    /// homogeneity, the triangle inequality and (if `lattice`) the ideal
    /// property, and rejected if any check fails.
    pub fn custom(dim: usize, name: impl Into<String>, f: NormFn, lattice: bool, extremes: Option<Vec<Vec<f64>>>) -> Result<Self> {
        Self::build(dim, NormKind::Custom(CustomNorm { name: name.into(), f, extremes, lattice }))
    }

    pub fn from_spec(spec: &SpaceSpec) -> Result<Self> {
        match spec {
            SpaceSpec::Lp { dim, p, weights } => {
                let w = weights.clone().unwrap_or_else(|| vec![1.0; *dim]);
                check_dim(*dim, w.len())?;
                Self::weighted_lp(*p, w)
            }
            SpaceSpec::Lattice { measure, p } => Self::lattice(measure.clone(), *p),
            SpaceSpec::ScaledLp { p, scale } => Self::scaled_lp(LebesgueForm::new(*p, scale.clone())?),
            SpaceSpec::PthPower { base, s } => Self::from_spec(base)?.pth_power(*s),
            SpaceSpec::KotheDual { base } => Self::from_spec(base)?.kothe_dual_space(),
            SpaceSpec::MaxWeightedL1 { rows, measure } => Self::max_weighted_l1(rows.clone(), measure.clone()),
            SpaceSpec::Polytope { vertices } => Self::polytope(vertices.clone()),
        }
    }

    /// The serializable description, absent when a custom norm is involved.
    pub fn spec(&self) -> Option<SpaceSpec> {
        Some(match &self.kind {
            NormKind::WeightedLp { p, weights } => SpaceSpec::Lp {
                dim: self.dim,
                p: *p,
                weights: if weights.iter().all(|w| *w == 1.0) { None } else { Some(weights.clone()) },
            },
            NormKind::Lattice { measure, p } => SpaceSpec::Lattice { measure: measure.clone(), p: *p },
            NormKind::ScaledLp(f) => SpaceSpec::ScaledLp { p: f.exponent, scale: f.scale.clone() },
            NormKind::PthPower { base, s } => SpaceSpec::PthPower { base: Box::new(base.spec()?), s: *s },
            NormKind::KotheDual { base } => SpaceSpec::KotheDual { base: Box::new(base.spec()?) },
            NormKind::MaxWeightedL1 { rows, measure } => SpaceSpec::MaxWeightedL1 { rows: rows.clone(), measure: measure.clone() },
            NormKind::Polytope { vertices } => SpaceSpec::Polytope { vertices: vertices.clone() },
            NormKind::Custom(_) => return None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn meta(&self) -> SpaceMeta {
        self.meta
    }

    pub fn is_lattice(&self) -> bool {
        self.meta.is_lattice
    }

    /// The Lebesgue form of this norm, when it has one.
    pub fn lebesgue_form(&self) -> Option<&LebesgueForm> {
        self.form.as_ref()
    }

    /// The measure a lattice space lives over (counting measure for plain
    /// weighted sequence spaces).
    pub fn measure(&self) -> Option<Vec<f64>> {
        match &self.kind {
            NormKind::WeightedLp { .. } | NormKind::ScaledLp(_) => Some(vec![1.0; self.dim]),
            NormKind::Lattice { measure, .. } | NormKind::MaxWeightedL1 { measure, .. } => Some(measure.masses().to_vec()),
            NormKind::PthPower { base, .. } | NormKind::KotheDual { base } => base.measure(),
            NormKind::Custom(c) if c.lattice => Some(vec![1.0; self.dim]),
            _ => None,
        }
    }

    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        check_finite(x)?;
        Ok(self.norm_unchecked(x))
    }

    pub(crate) fn norm_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            NormKind::WeightedLp { .. } | NormKind::Lattice { .. } | NormKind::ScaledLp(_) => {
                self.form.as_ref().expect("lebesgue kinds carry a form").norm(x)
            }
            NormKind::PthPower { base, s } => {
                let lifted: Vec<f64> = x.iter().map(|v| v.abs().powf(1.0 / s)).collect();
                base.norm_unchecked(&lifted).powf(*s)
            }
            NormKind::KotheDual { base } => base.kothe_value(x).value,
            NormKind::MaxWeightedL1 { rows, .. } => {
                rows.iter().map(|r| r.iter().zip(x).map(|(c, v)| c * v.abs()).sum::<f64>()).fold(0.0, f64::max)
            }
            NormKind::Polytope { vertices } => polytope_gauge(vertices, x),
            NormKind::Custom(c) => (c.f)(x),
        }
    }

    /// `sup {⟨λ, x⟩ : ‖x‖ ≤ 1}`.
    pub fn dual_norm(&self, functional: &[f64]) -> Result<DualNorm> {
        check_dim(self.dim, functional.len())?;
        check_finite(functional)?;
        let s = self.support_inner(functional);
        Ok(DualNorm { value: s.value, provenance: s.provenance })
    }

    fn support_inner(&self, lambda: &[f64]) -> Support {
        if let Some(f) = &self.form {
            let (value, point) = f.support(lambda);
            return Support { value, point, provenance: Provenance::Exact };
        }
        if let Some(ext) = self.vertex_list() {
            let mut best = (0usize, f64::NEG_INFINITY, 1.0);
            for (k, v) in ext.iter().enumerate() {
                let ip: f64 = v.iter().zip(lambda).map(|(a, b)| a * b).sum();
                if ip.abs() > best.1 {
                    best = (k, ip.abs(), if ip < 0.0 { -1.0 } else { 1.0 });
                }
            }
            let point = ext[best.0].iter().map(|v| v * best.2).collect();
            return Support { value: best.1, point, provenance: Provenance::ExtremeEnumeration };
        }
        if let NormKind::MaxWeightedL1 { rows, .. } = &self.kind {
            return max_weighted_l1_support(rows, lambda);
        }
        self.heuristic_support(lambda)
    }

    fn vertex_list(&self) -> Option<&[Vec<f64>]> {
        match &self.kind {
            NormKind::Polytope { vertices } => Some(vertices),
            NormKind::Custom(c) => c.extremes.as_deref(),
            _ => None,
        }
    }

    fn heuristic_support(&self, lambda: &[f64]) -> Support {
        let d = self.dim;
        let mut starts: Vec<Vec<f64>> = vec![lambda.to_vec(), lambda.iter().map(|v| signum0(*v)).collect()];
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = if lambda[i] < 0.0 { -1.0 } else { 1.0 };
            starts.push(e);
        }
        let mut rng = stream(VALIDATION_SEED, 1);
        for _ in 0..4 {
            starts.push(gaussian_vector(&mut rng, d));
        }
        let mut best = (f64::NEG_INFINITY, vec![0.0; d]);
        for s in starts.iter().filter(|s| s.iter().any(|v| *v != 0.0)) {
            let (v, x) = ratio_ascent(lambda, |x| self.norm_unchecked(x), s);
            if v > best.0 {
                best = (v, x);
            }
        }
        Support { value: best.0.max(0.0), point: best.1, provenance: Provenance::Heuristic }
    }

    /// A norm-one functional `ξ` with `ξ(v) = ‖v‖`, i.e. a maximizer for the
    /// dual-ball support of `v`.
    pub fn norming_functional(&self, v: &[f64]) -> (Vec<f64>, Provenance) {
        if let Some(f) = &self.form {
            return (f.dual().support(v).1, Provenance::Exact);
        }
        if self.dim == 1 {
            return (vec![signum0(v[0]) / self.norm_unchecked(&[1.0])], Provenance::Exact);
        }
        norming_by_lp(self, v)
    }

    /// Norm of `g` in the Köthe dual, `sup {Σ |f_i g_i| μ_i : ‖f‖ ≤ 1}`.
    pub fn kothe_dual_norm(&self, g: &[f64]) -> Result<DualNorm> {
        if !self.is_lattice() {
            return Err(Error::UnsupportedStructure("Köthe dual of a non-lattice space".into()));
        }
        check_dim(self.dim, g.len())?;
        check_finite(g)?;
        let value = self.kothe_value(g);
        if let (Some(f), Some(mu)) = (&self.form, self.measure()) {
            // The closed form and the explicit maximizer must agree.
            let weighted: Vec<f64> = g.iter().zip(&mu).map(|(a, m)| a.abs() * m).collect();
            let (_, maximizer) = f.support(&weighted);
            let attained: f64 = maximizer.iter().zip(&weighted).map(|(a, b)| a * b).sum();
            let closed = f.kothe(&mu).norm(g);
            if (attained - closed).abs() > 1e-8 * (1.0 + closed) || (f.norm(&maximizer) - 1.0).abs() > 1e-8 {
                return Err(Error::Invariant(format!("Köthe dual closed form {closed} vs attained {attained}")));
            }
        }
        Ok(value)
    }

    fn kothe_value(&self, g: &[f64]) -> DualNorm {
        let mu = self.measure().unwrap_or_else(|| vec![1.0; self.dim]);
        let weighted: Vec<f64> = g.iter().zip(&mu).map(|(a, m)| a.abs() * m).collect();
        let s = self.support_inner(&weighted);
        DualNorm { value: s.value, provenance: s.provenance }
    }

    /// The `s`-th power `X_[s]`, normed by `‖|x|^{1/s}‖^s`, for `s ∈ (0, 1]`.
    pub fn pth_power(&self, s: f64) -> Result<NormedSpace> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::InvalidParameter { name: "s", reason: format!("{s} is not in (0, 1]") });
        }
        if !self.is_lattice() {
            return Err(Error::UnsupportedStructure("powers are defined for lattice spaces only".into()));
        }
        Self::build(self.dim, NormKind::PthPower { base: Arc::new(self.clone()), s })
    }

    /// The Köthe dual `X'` as a space in its own right.
    pub fn kothe_dual_space(&self) -> Result<NormedSpace> {
        if !self.is_lattice() {
            return Err(Error::UnsupportedStructure("Köthe dual of a non-lattice space".into()));
        }
        Self::build(self.dim, NormKind::KotheDual { base: Arc::new(self.clone()) })
    }

    /// The dual space, when it has a closed form.
    pub fn dual_space(&self) -> Option<NormedSpace> {
        self.form.as_ref().map(|f| NormedSpace::scaled_lp(f.dual()).expect("dual of a valid form is valid"))
    }

    /// Box half-widths `sup_{‖x‖≤1} |x_i|`, i.e. the dual norms of the basis
    /// vectors.
    pub fn coordinate_bounds(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                let mut e = vec![0.0; self.dim];
                e[i] = 1.0;
                self.support_inner(&e).value
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim;
        let mut rng = stream(VALIDATION_SEED, 0);
        if let Some(ext) = self.vertex_list() {
            for (k, v) in ext.iter().enumerate() {
                check_dim(d, v.len())?;
                let n = self.norm_unchecked(v);
                if matches!(self.kind, NormKind::Custom(_)) && (n - 1.0).abs() > 1e-12 {
                    return Err(Error::NormValidation(format!("extreme point {k} has norm {n}, expected 1")));
                }
            }
        }
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            let n = self.norm_unchecked(&e);
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::NormValidation(format!("basis vector {i} has norm {n}")));
            }
        }
        if self.norm_unchecked(&vec![0.0; d]) != 0.0 {
            return Err(Error::NormValidation("norm of zero is not zero".into()));
        }
        for _ in 0..VALIDATION_SAMPLES {
            let x = gaussian_vector(&mut rng, d);
            let y = gaussian_vector(&mut rng, d);
            let alpha = 3.0 * crate::optlab::rng::standard_normal(&mut rng);
            let (nx, ny) = (self.norm_unchecked(&x), self.norm_unchecked(&y));
            if !(nx > 0.0) {
                return Err(Error::NormValidation(format!("definiteness fails at {x:?}")));
            }
            let ax: Vec<f64> = x.iter().map(|v| alpha * v).collect();
            if (self.norm_unchecked(&ax) - alpha.abs() * nx).abs() > 1e-9 * (1.0 + alpha.abs() * nx) {
                return Err(Error::NormValidation("homogeneity fails".into()));
            }
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            if self.norm_unchecked(&s) > nx + ny + 1e-9 * (1.0 + nx + ny) {
                return Err(Error::NormValidation("triangle inequality fails".into()));
            }
            if self.is_lattice() {
                let smaller: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a.abs().min(b.abs()) * signum0(*a)).collect();
                if self.norm_unchecked(&smaller) > nx + 1e-9 * (1.0 + nx) {
                    return Err(Error::NormValidation("lattice ideal property fails".into()));
                }
            }
        }
        Ok(())
    }
}

impl UnitBall for NormedSpace {
    fn dim(&self) -> usize {
        self.dim
    }

    fn ball_norm(&self, x: &[f64]) -> f64 {
        self.norm_unchecked(x)
    }

    fn support(&self, a: &[f64]) -> Support {
        self.support_inner(a)
    }

    fn extreme_points(&self) -> Option<Vec<Vec<f64>>> {
        if let Some(f) = &self.form {
            return f.extreme_points();
        }
        self.vertex_list().map(|v| v.to_vec())
    }
}

/// The unit ball of the dual norm of a space, for optimizers that need
/// `B_{X*}` as a [`UnitBall`].
pub struct DualBall<'a>(pub &'a NormedSpace);

impl UnitBall for DualBall<'_> {
    fn dim(&self) -> usize {
        self.0.dim
    }

    fn ball_norm(&self, xi: &[f64]) -> f64 {
        self.0.support_inner(xi).value
    }

    fn support(&self, a: &[f64]) -> Support {
        let value = self.0.norm_unchecked(a);
        let (point, provenance) = self.0.norming_functional(a);
        Support { value, point, provenance }
    }

    fn extreme_points(&self) -> Option<Vec<Vec<f64>>> {
        self.0.form.as_ref().and_then(|f| f.dual().extreme_points())
    }
}

/// `min Σ|t_k| s.t. Σ t_k v_k = x`.
fn polytope_gauge(vertices: &[Vec<f64>], x: &[f64]) -> f64 {
    if x.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    let k = vertices.len();
    let mut p = LpProblem::new(Sense::Minimize, vec![1.0; 2 * k]);
    for i in 0..x.len() {
        let mut row = Vec::with_capacity(2 * k);
        row.extend(vertices.iter().map(|v| v[i]));
        row.extend(vertices.iter().map(|v| -v[i]));
        p.push(row, Relation::Eq, x[i]);
    }
    solve_lp(&p).map(|s| s.value).unwrap_or(f64::INFINITY)
}

fn max_weighted_l1_support(rows: &[Vec<f64>], lambda: &[f64]) -> Support {
    // max Σ |λ_i| t_i s.t. Σ_i c_ki t_i ≤ 1, t ≥ 0; then x_i = sgn(λ_i) t_i.
    let d = lambda.len();
    if lambda.iter().all(|v| *v == 0.0) {
        let mut e = vec![0.0; d];
        let scale = rows.iter().map(|r| r[0]).fold(0.0, f64::max);
        e[0] = 1.0 / scale;
        return Support { value: 0.0, point: e, provenance: Provenance::Exact };
    }
    let mut p = LpProblem::new(Sense::Maximize, lambda.iter().map(|v| v.abs()).collect());
    for r in rows {
        p.push(r.clone(), Relation::Le, 1.0);
    }
    let sol = solve_lp(&p).expect("bounded: every coordinate is weighted by some row");
    let point = sol.primal.iter().zip(lambda).map(|(t, l)| if *l < 0.0 { -t } else { *t }).collect();
    Support { value: sol.value, point, provenance: Provenance::Exact }
}

/// Norming functional by maximizing `⟨ξ, v⟩` over the dual ball, described by
/// `|⟨ξ, x⟩| ≤ ‖x‖` on the vertex list (polytopes) or by sampled cutting
/// planes (anything else, heuristic).
fn norming_by_lp(space: &NormedSpace, v: &[f64]) -> (Vec<f64>, Provenance) {
    let d = space.dim;
    let nv = space.norm_unchecked(v);
    if nv == 0.0 {
        return (vec![0.0; d], Provenance::Exact);
    }
    let (cuts, provenance): (Vec<Vec<f64>>, Provenance) = match space.vertex_list() {
        Some(ext) => (ext.to_vec(), Provenance::ExtremeEnumeration),
        None => {
            let mut rng = stream(VALIDATION_SEED, 2);
            let mut cuts: Vec<Vec<f64>> = (0..d)
                .map(|i| {
                    let mut e = vec![0.0; d];
                    e[i] = 1.0;
                    e
                })
                .collect();
            cuts.extend((0..64 * d).map(|_| gaussian_vector(&mut rng, d)));
            cuts.push(v.to_vec());
            let cuts = cuts
                .into_iter()
                .map(|c| {
                    let n = space.norm_unchecked(&c);
                    c.into_iter().map(|x| x / n).collect()
                })
                .collect();
            (cuts, Provenance::Heuristic)
        }
    };
    let mut p = LpProblem::new(Sense::Maximize, v.to_vec()).with_bounds(vec![VarBound::Free; d]);
    for c in &cuts {
        p.push(c.clone(), Relation::Le, 1.0);
        p.push(c.clone(), Relation::Ge, -1.0);
    }
    match solve_lp(&p) {
        Ok(sol) => (sol.primal, provenance),
        Err(_) => (vec![0.0; d], Provenance::Heuristic),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optlab::grid::{grid_oracle, Goal};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn euclidean_norm() {
        let s = NormedSpace::lp(2, 2.0).unwrap();
        assert_eq!(s.norm(&[3.0, 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn half_power_of_l1_is_l2() {
        let s = NormedSpace::lp(2, 1.0).unwrap().pth_power(0.5).unwrap();
        assert!(close(s.norm(&[3.0, 4.0]).unwrap(), 5.0, 1e-15));
    }

    #[test]
    fn weighted_l1() {
        let s = NormedSpace::weighted_lp(Exponent::Finite(1.0), vec![2.0, 1.0]).unwrap();
        assert_eq!(s.norm(&[1.0, 1.0]).unwrap(), 3.0);
    }

    #[test]
    fn norm_errors() {
        let s = NormedSpace::lp(2, 2.0).unwrap();
        assert_eq!(s.norm(&[1.0]), Err(Error::DimensionMismatch { expected: 2, got: 1 }));
        assert_eq!(s.norm(&[1.0, f64::NAN]), Err(Error::NonFinite { index: 1 }));
    }

    #[test]
    fn dual_norm_examples() {
        let l1 = NormedSpace::lp(3, 1.0).unwrap();
        assert_eq!(l1.dual_norm(&[1.0, -2.0, 1.0]).unwrap().value, 2.0);
        let l2 = NormedSpace::lp(2, 2.0).unwrap();
        assert_eq!(l2.dual_norm(&[3.0, 4.0]).unwrap().value, 5.0);
        assert!(l1.dual_norm(&[1.0]).is_err());
    }

    #[test]
    fn dual_of_half_power_against_grid() {
        // Independent oracle: maximize ⟨λ, x⟩ over the unit sphere of the
        // power space, parametrized by angle, at resolution 1e-4.
        let s = NormedSpace::lp(2, 1.0).unwrap().pth_power(0.5).unwrap();
        let oracle = grid_oracle(
            |t| {
                let x = [t[0].cos(), t[0].sin()];
                let n = s.norm_unchecked(&x);
                (3.0 * x[0] + 4.0 * x[1]) / n
            },
            &[(0.0, std::f64::consts::TAU)],
            1e-4,
            Goal::Maximize,
            5.0,
        )
        .unwrap();
        assert!((oracle.value - 5.0).abs() < 1e-3);
        let d = s.dual_norm(&[3.0, 4.0]).unwrap();
        assert!(close(d.value, 5.0, 1e-12));
        assert_eq!(d.provenance, Provenance::Exact);
    }

    #[test]
    fn kothe_examples() {
        let l2 = NormedSpace::lattice(FiniteMeasure::new(vec![1.0, 1.0]).unwrap(), Exponent::Finite(2.0)).unwrap();
        assert!(close(l2.kothe_dual_norm(&[3.0, 4.0]).unwrap().value, 5.0, 1e-14));

        let mu = FiniteMeasure::new(vec![0.3, 2.0, 1.5]).unwrap();
        let l1 = NormedSpace::lattice(mu, Exponent::Finite(1.0)).unwrap();
        assert!(close(l1.kothe_dual_norm(&[1.0, -7.0, 2.0]).unwrap().value, 7.0, 1e-14));

        let linf = NormedSpace::lattice(FiniteMeasure::new(vec![1.0, 2.0]).unwrap(), Exponent::Infinite).unwrap();
        assert!(close(linf.kothe_dual_norm(&[1.0, 1.0]).unwrap().value, 3.0, 1e-14));

        let hex = NormedSpace::polytope(vec![vec![1.0, 0.0], vec![0.5, 0.8], vec![-0.5, 0.8]]).unwrap();
        assert!(matches!(hex.kothe_dual_norm(&[1.0, 1.0]), Err(Error::UnsupportedStructure(_))));
    }

    #[test]
    fn kothe_of_l2_by_brute_force() {
        // sup Σ|f_i g_i| μ_i over ‖f‖_{L²(μ)} ≤ 1 on an angular grid.
        let l2 = NormedSpace::lattice(FiniteMeasure::new(vec![1.0, 1.0]).unwrap(), Exponent::Finite(2.0)).unwrap();
        let oracle = grid_oracle(
            |t| 3.0 * t[0].cos().abs() + 4.0 * t[0].sin().abs(),
            &[(0.0, std::f64::consts::TAU)],
            1e-4,
            Goal::Maximize,
            5.0,
        )
        .unwrap();
        assert!((oracle.value - l2.kothe_dual_norm(&[3.0, 4.0]).unwrap().value).abs() < 1e-3);
    }

    #[test]
    fn pth_power_examples() {
        let l1 = NormedSpace::lp(3, 1.0).unwrap();
        let id = l1.pth_power(1.0).unwrap();
        let x = [0.3, -2.0, 1.25];
        assert!(close(id.norm(&x).unwrap(), l1.norm(&x).unwrap(), 1e-15));

        let mu = FiniteMeasure::new(vec![0.5, 1.0, 2.0]).unwrap();
        let l2 = NormedSpace::lattice(mu.clone(), Exponent::Finite(2.0)).unwrap();
        let l4 = NormedSpace::lattice(mu, Exponent::Finite(4.0)).unwrap();
        let half = l2.pth_power(0.5).unwrap();
        assert!(close(half.norm(&x).unwrap(), l4.norm(&x).unwrap(), 1e-13));

        assert!(l1.pth_power(0.0).is_err());
        assert!(l1.pth_power(1.5).is_err());
        let hex = NormedSpace::polytope(vec![vec![1.0, 0.0], vec![0.5, 0.8], vec![-0.5, 0.8]]).unwrap();
        assert!(matches!(hex.pth_power(0.5), Err(Error::UnsupportedStructure(_))));
    }

    #[test]
    fn infinity_is_symbolic() {
        assert_eq!(Exponent::Finite(1.0).conjugate(), Exponent::Infinite);
        assert_eq!(Exponent::Infinite.conjugate(), Exponent::Finite(1.0));
        assert_eq!(Exponent::parse("inf").unwrap(), Exponent::Infinite);
        assert!((Exponent::parse("4/3").unwrap().conjugate().reciprocal() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn polytope_support_is_enumerated() {
        let hex = NormedSpace::polytope(vec![vec![1.0, 0.0], vec![0.5, 0.8], vec![-0.5, 0.8]]).unwrap();
        let d = hex.dual_norm(&[0.0, 1.0]).unwrap();
        assert!(close(d.value, 0.8, 1e-14));
        assert_eq!(d.provenance, Provenance::ExtremeEnumeration);
        assert!(close(hex.norm(&[1.0, 0.0]).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn custom_norms_are_validated() {
        let good: NormFn = Arc::new(|x: &[f64]| x.iter().map(|v| v.abs()).sum::<f64>() + x[0].abs());
        assert!(NormedSpace::custom(2, "skewed-l1", good, true, None).is_ok());
        let not_homogeneous: NormFn = Arc::new(|x: &[f64]| x.iter().map(|v| v * v).sum::<f64>());
        assert!(matches!(NormedSpace::custom(2, "sq", not_homogeneous, false, None), Err(Error::NormValidation(_))));
        let degenerate: NormFn = Arc::new(|x: &[f64]| x[0].abs());
        assert!(matches!(NormedSpace::custom(2, "semi", degenerate, false, None), Err(Error::NormValidation(_))));
    }

    #[test]
    fn custom_dual_is_heuristic_but_close() {
        let f: NormFn = Arc::new(|x: &[f64]| (x[0] * x[0] + 4.0 * x[1] * x[1]).sqrt());
        let s = NormedSpace::custom(2, "ellipse", f, false, None).unwrap();
        let d = s.dual_norm(&[1.0, 1.0]).unwrap();
        assert_eq!(d.provenance, Provenance::Heuristic);
        assert!((d.value - (1.0f64 + 0.25).sqrt()).abs() < 1e-6, "{}", d.value);
    }

    #[test]
    fn max_weighted_l1_dual_by_lp() {
        let mu = FiniteMeasure::new(vec![1.0, 1.0]).unwrap();
        let s = NormedSpace::max_weighted_l1(vec![vec![1.0, 0.0], vec![0.0, 1.0]], mu).unwrap();
        // The norm is ℓ^∞; its dual is ℓ^1.
        assert!(close(s.norm(&[2.0, -3.0]).unwrap(), 3.0, 1e-15));
        assert!(close(s.dual_norm(&[2.0, -3.0]).unwrap().value, 5.0, 1e-12));
    }

    #[test]
    fn diagonal_operator_closed_forms() {
        let l2 = LebesgueForm::new(Exponent::Finite(2.0), vec![1.0, 1.0]).unwrap();
        let l1 = LebesgueForm::new(Exponent::Finite(1.0), vec![1.0, 1.0]).unwrap();
        let (v, _) = LebesgueForm::diagonal_operator_norm(&[3.0, 4.0], &l2, &l1);
        assert!(close(v, 5.0, 1e-15));
        let (v, _) = LebesgueForm::diagonal_operator_norm(&[3.0, -4.0], &l2, &l2);
        assert!(close(v, 4.0, 1e-15));
    }

    #[test]
    fn spec_round_trip() {
        let spec = SpaceSpec::PthPower {
            base: Box::new(SpaceSpec::Lattice { measure: FiniteMeasure::new(vec![1.0, 2.0]).unwrap(), p: Exponent::Finite(1.0) }),
            s: 0.5,
        };
        let s = NormedSpace::from_spec(&spec).unwrap();
        assert_eq!(s.spec().unwrap(), spec);
    }
}
