//! Experiment configs: TOML with family-scoped tables (equivalently dotted
//! keys such as `bfs.p = "3"`). Unknown keys are rejected everywhere.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use produal::freelip::MetricSpec;
use produal::picalc::PiOptions;
use produal::{Exponent, FiniteMeasure, SpaceSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Trivial,
    TensorDual,
    BfsPthPower,
    BfsKothe,
    HadamardTriple,
    Freelip,
    VecmeasLinf,
    VecmeasPredual,
    CustomPic,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::Trivial,
        Family::TensorDual,
        Family::BfsPthPower,
        Family::BfsKothe,
        Family::HadamardTriple,
        Family::Freelip,
        Family::VecmeasLinf,
        Family::VecmeasPredual,
        Family::CustomPic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Trivial => "trivial",
            Family::TensorDual => "tensor_dual",
            Family::BfsPthPower => "bfs_pth_power",
            Family::BfsKothe => "bfs_kothe",
            Family::HadamardTriple => "hadamard_triple",
            Family::Freelip => "freelip",
            Family::VecmeasLinf => "vecmeas_linf",
            Family::VecmeasPredual => "vecmeas_predual",
            Family::CustomPic => "custom_pic",
        }
    }

    /// What the family checks, for listings.
    pub fn topic(self) -> &'static str {
        match self {
            Family::Trivial => "scalar factor: (R ⊗ F)^V = F*",
            Family::TensorDual => "tensor coordinates: bilinear forms vs operators E → F*",
            Family::BfsPthPower => "p-th powers: X_[1/p] π X_[1/p'] = X",
            Family::BfsKothe => "Köthe duality: (X π Y)' = X^{Y'}",
            Family::HadamardTriple => "coefficient multipliers: (X ⊗ Y, Z) = (X, (Y, Z))",
            Family::Freelip => "molecules: L_A LP duality and B(Æ_A × Æ_D) = (Æ_A)^{Æ_D*}",
            Family::VecmeasLinf => "vector measures: L^p(m) duality and the L^∞(m) identification",
            Family::VecmeasPredual => "vector measures: L^{p'}(m) through RN(m)",
            Family::CustomPic => "π_c brackets against the grid oracle",
        }
    }

    /// The table and keys the family reads, matching the validator.
    pub fn schema(self) -> &'static str {
        match self {
            Family::Trivial => "[trivial] dim: int, p: exponent",
            Family::TensorDual => "[spaces.<name>] space; [bilinear] kind = \"tensor_coordinates\", spaces = [E, F, G]",
            Family::BfsPthPower => "[bfs] p: rational, measure: [mass]",
            Family::BfsKothe => "[bfs] p: rational, q: rational, measure: [mass]",
            Family::HadamardTriple => "[hadamard] N: int, norms = [X, Y, Z] (exponents)",
            Family::Freelip => "[freelip] a, d: {dist} | {points, edges} | {random_points}",
            Family::VecmeasLinf | Family::VecmeasPredual => {
                "[vecmeas] k: int, value_norm: exponent, p: exponent, atoms: [[..]] | n: int"
            }
            Family::CustomPic => "[spaces.<name>] space; [bilinear] kind, spaces, coeffs?; [custom] targets: [[..]], resolution?",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub duality: DualityConfig,
    #[serde(default)]
    pub picalc: PiOptions,
    #[serde(default)]
    pub spaces: BTreeMap<String, SpaceSpec>,
    pub bilinear: Option<BilinearConfig>,
    pub trivial: Option<TrivialConfig>,
    pub bfs: Option<BfsConfig>,
    pub hadamard: Option<HadamardConfig>,
    pub freelip: Option<FreelipConfig>,
    pub vecmeas: Option<VecmeasConfig>,
    pub custom: Option<CustomConfig>,
}

fn default_samples() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub exact: f64,
    pub heuristic: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { exact: 1e-7, heuristic: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DualityConfig {
    pub restarts: usize,
    pub product_ball_samples: usize,
    /// Operators per family run through the bi-sup vs nested-norm comparison.
    pub theorem_samples: usize,
}

impl Default for DualityConfig {
    fn default() -> Self {
        Self { restarts: 64, product_ball_samples: 4, theorem_samples: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    Pointwise,
    Hadamard,
    ScalarPairing,
    TensorCoordinates,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BilinearConfig {
    pub kind: KindName,
    /// Names of `E`, `F`, `G` in the `[spaces]` registry.
    pub spaces: [String; 3],
    /// `coeffs[k][i][j]`, required for `custom`.
    #[serde(default)]
    pub coeffs: Option<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrivialConfig {
    pub dim: usize,
    pub p: Exponent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BfsConfig {
    pub p: String,
    #[serde(default)]
    pub q: Option<String>,
    pub measure: FiniteMeasure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HadamardConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub norms: [Exponent; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricConfig {
    Random { random_points: usize },
    Spec(MetricSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreelipConfig {
    pub a: MetricConfig,
    pub d: MetricConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VecmeasConfig {
    pub k: usize,
    pub value_norm: Exponent,
    pub p: Exponent,
    #[serde(default)]
    pub atoms: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomConfig {
    pub targets: Vec<Vec<f64>>,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
}

fn default_resolution() -> f64 {
    0.01
}

/// A config error with its 1-based position when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub message: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = match e.span() {
                Some(s) => {
                    let (l, c) = position(text, s.start);
                    (Some(l), Some(c))
                }
                None => (None, None),
            };
            ConfigError { message: e.message().to_string(), line, column }
        })?;
        cfg.check_sections()?;
        Ok(cfg)
    }

    /// Every family's required table must be present.
    fn check_sections(&self) -> Result<(), ConfigError> {
        let missing = |t: &str| ConfigError { message: format!("family `{}` requires a [{t}] table", self.family), line: None, column: None };
        let ok = match self.family {
            Family::Trivial => self.trivial.is_some().then_some(()).ok_or_else(|| missing("trivial")),
            Family::TensorDual => self.bilinear.is_some().then_some(()).ok_or_else(|| missing("bilinear")),
            Family::CustomPic => {
                self.bilinear.as_ref().ok_or_else(|| missing("bilinear"))?;
                self.custom.is_some().then_some(()).ok_or_else(|| missing("custom"))
            }
            Family::BfsPthPower => self.bfs.is_some().then_some(()).ok_or_else(|| missing("bfs")),
            Family::BfsKothe => match &self.bfs {
                Some(b) if b.q.is_some() => Ok(()),
                Some(_) => Err(ConfigError { message: "family `bfs_kothe` requires bfs.q".into(), line: None, column: None }),
                None => Err(missing("bfs")),
            },
            Family::HadamardTriple => self.hadamard.is_some().then_some(()).ok_or_else(|| missing("hadamard")),
            Family::Freelip => self.freelip.is_some().then_some(()).ok_or_else(|| missing("freelip")),
            Family::VecmeasLinf | Family::VecmeasPredual => match &self.vecmeas {
                Some(v) if v.atoms.is_some() || v.n.is_some() => Ok(()),
                Some(_) => Err(ConfigError { message: "vecmeas needs `atoms` or `n`".into(), line: None, column: None }),
                None => Err(missing("vecmeas")),
            },
        };
        if let Some(b) = &self.bilinear {
            for name in &b.spaces {
                if !self.spaces.contains_key(name) {
                    return Err(ConfigError { message: format!("bilinear.spaces names unknown space `{name}`"), line: None, column: None });
                }
            }
        }
        ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_dotted_keys() {
        let cfg = ExperimentConfig::parse("family = \"bfs_kothe\"\nseed = 3\nbfs.p = \"3\"\nbfs.q = \"4\"\nbfs.measure = [1.0, 2.0]\n").unwrap();
        assert_eq!(cfg.family, Family::BfsKothe);
        assert_eq!(cfg.bfs.unwrap().q.as_deref(), Some("4"));
    }

    #[test]
    fn rejects_unknown_keys_with_position() {
        let e = ExperimentConfig::parse("family = \"trivial\"\n[trivial]\ndim = 2\np = 2\nbogus = 1\n").unwrap_err();
        assert_eq!(e.line, Some(5));
        assert!(e.message.contains("bogus"), "{e}");
        let e = ExperimentConfig::parse("family = \"trivial\"\nseed = = 2\n").unwrap_err();
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn requires_family_table() {
        assert!(ExperimentConfig::parse("family = \"freelip\"\n").is_err());
        assert!(ExperimentConfig::parse("family = \"nope\"\n").is_err());
    }
}
