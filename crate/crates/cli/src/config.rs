//! Run configuration. Unknown fields are rejected everywhere.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use thermoform_core::sequences::{Family, SequenceSpec, TailSpec};

/// A single run, or a batch of labelled runs written to numbered
/// subdirectories.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
#[allow(clippy::large_enum_variant)]
pub enum ConfigFile {
    Batch(BatchConfig),
    Single(RunConfig),
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct BatchConfig {
    pub description: Option<String>,
    pub batch: Vec<RunConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    pub model: ModelConfig,
    pub task: TaskConfig,
    #[serde(default)]
    pub tolerances: Option<ToleranceConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    FiniteShift(FiniteShiftConfig),
    Renewal(RenewalConfig),
    Geometric(GeometricConfig),
    Interval(IntervalConfig),
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FiniteShiftConfig {
    pub alphabet: usize,
    /// 0/1 transition matrix, `alphabet x alphabet`.
    pub transitions: Vec<Vec<u8>>,
    pub potential: PotentialConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub depth: usize,
    pub values: Vec<PotentialEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PotentialEntry {
    pub word: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RenewalConfig {
    pub family: FamilyConfig,
    /// Logarithmic tail exponent; omit for `a_n = 0` beyond the head.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub head: Vec<f64>,
    #[serde(default)]
    pub normalization_target: Option<f64>,
    /// Added to `a_0` after normalization.
    #[serde(default)]
    pub a0_shift: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum FamilyConfig {
    Hofbauer,
    Grid,
}

impl RenewalConfig {
    pub fn sequence_spec(&self) -> SequenceSpec {
        SequenceSpec {
            family: match self.family {
                FamilyConfig::Hofbauer => Family::Hofbauer,
                FamilyConfig::Grid => Family::Grid,
            },
            tail: match self.gamma {
                Some(gamma) => TailSpec::Log { gamma },
                None => TailSpec::Zero,
            },
            head: self.head.clone(),
            delta: self.delta,
            normalization_target: self.normalization_target,
        }
    }
}

/// `s_n = -c n` with one loop (`one`) or `2^{n-1}` loops (`binary`) per level.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GeometricConfig {
    pub c: f64,
    pub multiplicity: MultiplicityConfig,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum MultiplicityConfig {
    One,
    Binary,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct IntervalConfig {
    pub kind: IntervalKind,
    /// Manneville–Pomeau exponent.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Levels of the induced Manneville–Pomeau model.
    #[serde(default)]
    pub levels: Option<usize>,
    /// Grid sequence of the doubling model.
    #[serde(default)]
    pub sequence: Option<RenewalConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    Chebyshev,
    MannevillePomeau,
    DoublingGrid,
}

/// Tasks to run; any subset may be present.
#[derive(Debug, Clone, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    #[serde(default)]
    pub pressure_curve: Option<CurveTask>,
    #[serde(default)]
    pub classify: Option<PointTask>,
    #[serde(default)]
    pub transitions: Option<TransitionsTask>,
    #[serde(default)]
    pub atoms: Option<AtomsTask>,
    #[serde(default)]
    pub zn: Option<ZnTask>,
    #[serde(default)]
    pub witness: Option<PointTask>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CurveTask {
    pub t_min: f64,
    pub t_max: f64,
    pub steps: usize,
    /// Period cap for periodic-orbit estimates.
    #[serde(default)]
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PointTask {
    pub t: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TransitionsTask {
    pub bracket: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct AtomsTask {
    pub t: f64,
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_levels() -> usize {
    10
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ZnTask {
    pub t: f64,
    pub n_max: usize,
    /// Bases `[lo, hi)`; omit for the whole space (or the return set of an
    /// induced model).
    #[serde(default)]
    pub bases: Vec<[f64; 2]>,
    /// Pressure used for `λ_n = e^{-n p} Z_n` in the series diagnostic.
    #[serde(default)]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default)]
    pub root_tol: Option<f64>,
    #[serde(default)]
    pub sum_tol: Option<f64>,
}

pub fn schema_json() -> String {
    let schema = schemars::schema_for!(ConfigFile);
    serde_json::to_string_pretty(&schema).expect("schema serializes") + "\n"
}
