//! Report schemas. Every report round-trips through JSON unchanged.

use frameforge_core::expframe_line::{ConvergedSum, FrameReport, PwSampleCheck};
use frameforge_core::frame_select::SubmatrixSelection;
use frameforge_core::io::{GroupSpectrumFile, LiftFile, RationalPair, SpectrumFile};
use frameforge_core::lca_finite::{Element, GroupFrameReport, LiftCheck};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tool {
    pub name: String,
    pub version: String,
}

impl Tool {
    pub fn current() -> Self {
        Tool {
            name: "frameforge".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Input<T> {
    pub path: String,
    pub content: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEcho {
    pub epsilon: f64,
    pub seed: u64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEcho {
    pub m: usize,
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingEcho {
    pub m: usize,
    pub indices: Vec<usize>,
    pub d: RationalPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwDemo {
    pub l: u64,
    /// Real cell values of the test function's spectrum.
    pub coefficients: Vec<f64>,
    pub norm_sqr: f64,
    /// `Σ_{j∈J} Σ_{|l|≤L} |⟨f, e_{j+ml}⟩|²`.
    pub truncated_sum: f64,
    pub converged: ConvergedSum,
    /// Point samples at the same `j + ml`, `|l| ≤ L`.
    pub samples: PwSampleCheck,
    /// `converged / (A_exact ‖f‖²)` and `converged / (B_exact ‖f‖²)`.
    pub converged_lower_ratio: f64,
    pub converged_upper_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthReport {
    pub tool: Tool,
    pub command: String,
    pub input: Input<SpectrumFile>,
    pub run: RunEcho,
    pub slack: f64,
    pub grid: GridEcho,
    pub sampling: SamplingEcho,
    /// `#J·d/m`.
    pub density_exact: RationalPair,
    pub frame: FrameReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demo: Option<PwDemo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "cardJ")]
    pub card_j: usize,
    pub density: f64,
    #[serde(rename = "A_exact")]
    pub a_exact: f64,
    #[serde(rename = "B_exact")]
    pub b_exact: f64,
    #[serde(rename = "A_norm")]
    pub a_norm: f64,
    #[serde(rename = "B_norm")]
    pub b_norm: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEcho {
    pub orders: Vec<u64>,
    pub lattice_divisors: Vec<u64>,
    /// Divisors of `H_m = L^⊥`.
    pub sampling_divisors: Vec<u64>,
    pub reference_divisors: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityIdentity {
    /// `D_H(T)`.
    pub density: Ratio<u64>,
    /// `(q/k)·μ(Ω)`.
    pub predicted: Ratio<u64>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForce {
    pub a: f64,
    pub b: f64,
    pub max_abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub tool: Tool,
    pub command: String,
    pub input: Input<GroupSpectrumFile>,
    pub run: RunEcho,
    pub group: GroupEcho,
    /// Coset representatives `h_j` of `T`.
    pub reps: Vec<Element>,
    pub frame: GroupFrameReport,
    pub density_identity: DensityIdentity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brute_force: Option<BruteForce>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizationEcho {
    pub eps_quant: f64,
    pub unit: f64,
    pub multiplicities: Vec<u64>,
    pub achieved_a: f64,
    pub theoretical_scale: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsifyReport {
    pub tool: Tool,
    pub command: String,
    pub input: String,
    pub d: f64,
    pub rows: usize,
    pub dim: usize,
    pub steps: usize,
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
    pub bounds: (f64, f64),
    /// `((1 − 1/√d)², (1 + 1/√d)²)`.
    pub targets: (f64, f64),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantization: Option<QuantizationEcho>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEcho {
    pub indices: Vec<usize>,
    pub best_lower: f64,
    pub subsets_checked: u64,
    /// Selected `σ_min²` over the best achievable one.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectReport {
    pub tool: Tool,
    pub command: String,
    pub input: String,
    pub run: RunEcho,
    pub selection: SubmatrixSelection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleEcho>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftReport {
    pub tool: Tool,
    pub command: String,
    pub input: Input<LiftFile>,
    pub result: LiftCheck,
    /// Bounds agree to `1e-10` relative to `max(1, B)`.
    pub bounds_equal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub r: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    /// Exact density when the input is periodic.
    pub exact: Option<f64>,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_ms: f64,
}
