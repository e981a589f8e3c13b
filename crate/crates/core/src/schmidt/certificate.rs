use serde::Serialize;

use crate::states::{DensityMatrix, Ensemble};
use crate::Result;

use super::lambda::{sn_lower_bound, LambdaEvidence};
use super::upper::{sn_upper_bound, UpperMethod, UpperOptions};
use super::SearchOptions;

#[derive(Debug, Clone, Default)]
pub struct CertifyOptions {
    pub search: SearchOptions,
    pub hints: Vec<Ensemble>,
}

impl CertifyOptions {
    pub fn new(search: SearchOptions) -> Self {
        Self { search, hints: Vec::new() }
    }

    pub fn with_hint(mut self, hint: Ensemble) -> Self {
        self.hints.push(hint);
        self
    }
}

/// Sandwich `lower ≤ SN(ω) ≤ upper` with the evidence for both sides.
#[derive(Debug, Clone, Serialize)]
pub struct SchmidtCertificate {
    pub lower: usize,
    pub upper: usize,
    /// Violated Λ-map eigenvalue proving `SN > lower − 1`; absent when `lower == 1`.
    pub lower_evidence: Option<LambdaEvidence>,
    #[serde(skip)]
    pub upper_evidence: Ensemble,
    /// Weight and Schmidt rank of every member of `upper_evidence`.
    pub upper_members: Vec<MemberSummary>,
    pub upper_method: UpperMethod,
    pub upper_index: usize,
    pub reconstruction_error: f64,
    /// Set when the heuristic upper bound failed to reach the lower bound.
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemberSummary {
    pub weight: f64,
    pub schmidt_rank: usize,
}

impl SchmidtCertificate {
    pub fn is_tight(&self) -> bool {
        self.lower == self.upper
    }
}

pub fn certify(omega: &DensityMatrix, opts: &CertifyOptions) -> Result<SchmidtCertificate> {
    let lower = sn_lower_bound(omega, &opts.search.tol)?;
    let upper_opts = UpperOptions { search: opts.search, hints: opts.hints.clone(), floor: lower.k };
    let upper = sn_upper_bound(omega, &upper_opts)?;
    let diagnostic = (upper.k < lower.k).then(|| {
        format!("upper bound {} below lower bound {}: inconsistent tolerances or numerical failure", upper.k, lower.k)
    });
    if let Some(d) = &diagnostic {
        log::warn!("{d}");
    }
    let upper_members = upper
        .ensemble
        .members
        .iter()
        .map(|m| Ok(MemberSummary { weight: m.weight, schmidt_rank: m.state.schmidt_rank(opts.search.tol.rank)? }))
        .collect::<Result<_>>()?;
    Ok(SchmidtCertificate {
        lower: lower.k,
        upper_members,
        upper: upper.k,
        lower_evidence: lower.evidence,
        upper_evidence: upper.ensemble,
        upper_method: upper.method,
        upper_index: upper.index,
        reconstruction_error: upper.reconstruction_error,
        diagnostic,
    })
}
