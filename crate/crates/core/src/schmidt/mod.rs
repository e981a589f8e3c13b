//! Schmidt-number certification.
//!
//! Lower bounds come from the reduction family `Λ_t(ρ) = Tr(ρ) I − t ρ`,
//! which is k-positive exactly when `t ≤ 1/k`; a negative eigenvalue of
//! `(Λ_{1/k} ⊗ Id)(ω)` proves `SN(ω) > k`. Upper bounds come from explicit
//! pure-state ensembles of `ω`. Both are sound; neither is complete.

mod certificate;
mod edge;
mod lambda;
mod overlap;
mod subtract;
mod upper;
mod witness;

use serde::{Deserialize, Serialize};

use crate::par::ExecMode;
use crate::states::Tolerances;

pub use certificate::{certify, CertifyOptions, MemberSummary, SchmidtCertificate};
pub use edge::{edge_decompose, greedy_subtraction, EdgeDecomposition};
pub use lambda::{apply_lambda, lambda_map, sn_lower_bound, LambdaEvidence, LowerBound};
pub use overlap::{grid_oracle, min_overlap_sr, min_overlap_sr_with, OverlapOptions, OverlapResult};
pub use subtract::{best_subtraction, max_subtraction, Subtraction};
pub use upper::{sn_upper_bound, UpperBound, UpperMethod, UpperOptions};
pub use witness::{build_witness, witness_from_lambda, Recipe, WitnessOperator};

/// Coarse search budget presets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Effort {
    Quick,
    #[default]
    Default,
    Thorough,
}

impl Effort {
    /// Number of randomized trials the preset allows.
    pub fn trials(self) -> usize {
        match self {
            Effort::Quick => 50,
            Effort::Default => 500,
            Effort::Thorough => 5000,
        }
    }
}

/// Budget and reproducibility knobs shared by the stochastic searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub trials: usize,
    pub seed: u64,
    pub exec: ExecMode,
    pub tol: Tolerances,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self::from_effort(Effort::Default, 0)
    }
}

impl SearchOptions {
    pub fn from_effort(effort: Effort, seed: u64) -> Self {
        Self { trials: effort.trials(), seed, exec: ExecMode::default(), tol: Tolerances::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_exec(mut self, exec: ExecMode) -> Self {
        self.exec = exec;
        self
    }
}
