//! Quantum channels in Kraus form and their Choi states.
//!
//! The Choi state of `Φ` relative to a reference `|ψ⟩` on `d_in ⊗ d_in` is
//! `(Φ ⊗ Id)(|ψ⟩⟨ψ|)`, stored with dimensions `(d_out, d_in)`. A channel is
//! k-partially entanglement breaking exactly when its Choi state (for any
//! reference with full-rank marginals) has Schmidt number at most `k`.

use std::sync::OnceLock;

use rand::Rng;
use serde::Serialize;

use crate::linalg::{self, BipartiteDims, CMat, CVec, Side, C64};
use crate::random;
use crate::schmidt::{certify, CertifyOptions, SchmidtCertificate, SearchOptions};
use crate::states::{DensityMatrix, Ensemble, EnsembleMember, PureState, RankTolerance, Tolerances};
use crate::{Error, Result};

/// Largest tolerated `‖Σ V†V − I‖_F`.
pub const TRACE_PRESERVATION_TOL: f64 = 1e-6;
/// Largest tolerated mismatch between a Choi marginal and the reference.
pub const MARGINAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMat>,
    choi: OnceLock<DensityMatrix>,
}

impl QuantumChannel {
    /// Validate shapes and trace preservation; nothing is renormalized.
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::Validation("a channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::Shape("Kraus operators must be non-empty".into()));
        }
        for (i, k) in kraus.iter().enumerate() {
            if k.shape() != (dim_out, dim_in) {
                return Err(Error::Shape(format!(
                    "Kraus operator {i} is {}x{}, expected {dim_out}x{dim_in}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            if !linalg::is_finite(k) {
                return Err(Error::Validation(format!("Kraus operator {i} has non-finite entries")));
            }
        }
        let mut s = CMat::zeros(dim_in, dim_in);
        for k in &kraus {
            s += k.adjoint() * k;
        }
        let deviation = (s - linalg::identity(dim_in)).norm();
        if !(deviation <= TRACE_PRESERVATION_TOL) {
            return Err(Error::Validation(format!("Kraus operators are not trace preserving: ‖ΣV†V − I‖ = {deviation:.3e}")));
        }
        Ok(Self { dim_in, dim_out, kraus, choi: OnceLock::new() })
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(vec![linalg::identity(d)])
    }

    /// Completely depolarizing channel `ρ ↦ Tr(ρ) I/d`, with the matrix-unit
    /// Kraus operators `|i⟩⟨j| / √d`.
    pub fn depolarizing(d: usize) -> Result<Self> {
        let s = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        let kraus = (0..d * d)
            .map(|n| {
                let mut k = CMat::zeros(d, d);
                k[(n / d, n % d)] = s;
                k
            })
            .collect();
        Self::new(kraus)
    }

    /// Same channel as [`depolarizing`](Self::depolarizing) written with the
    /// `d²` Weyl unitaries `X^a Z^b / d`.
    pub fn weyl_depolarizing(d: usize) -> Result<Self> {
        let omega = 2.0 * std::f64::consts::PI / d as f64;
        let mut kraus = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let mut k = CMat::zeros(d, d);
                for j in 0..d {
                    k[((j + a) % d, j)] = C64::from_polar(1.0 / d as f64, omega * (b * j) as f64);
                }
                kraus.push(k);
            }
        }
        Self::new(kraus)
    }

    /// Random channel with `count` Kraus operators, each of rank ≤ `rank`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, d_in: usize, d_out: usize, count: usize, rank: usize) -> Result<Self> {
        Self::new(random::kraus_list(rng, d_in, d_out, count, rank))
    }

    /// `ρ ↦ Σ_i p_i U_i ρ U_i†` with Haar unitaries.
    pub fn random_unitary_mixing<R: Rng + ?Sized>(rng: &mut R, d: usize, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > 1e-10 {
            return Err(Error::Validation("mixing weights must be a probability vector".into()));
        }
        Self::new(weights.iter().map(|&w| random::unitary(rng, d) * C64::new(w.sqrt(), 0.0)).collect())
    }

    /// Measure-and-prepare channel `ρ ↦ Σ_i Tr(M_i ρ) σ_i`. Each term
    /// contributes rank-one Kraus operators `√(s_a μ_b) |s_a⟩⟨m_b|`.
    pub fn measure_prepare(povm: &[CMat], states: &[DensityMatrix]) -> Result<Self> {
        if povm.len() != states.len() || povm.is_empty() {
            return Err(Error::Validation("POVM and prepared states must be non-empty and of equal length".into()));
        }
        let tol = Tolerances::default();
        let mut kraus = Vec::new();
        for (m, sigma) in povm.iter().zip(states) {
            let em = linalg::eigh(&linalg::hermitian_part(m)?)?;
            let es = sigma.eigen()?;
            for b in 0..em.values.len() {
                let mu = em.values[b];
                if mu <= tol.support * em.max().abs() {
                    continue;
                }
                for a in 0..es.values.len() {
                    let s = es.values[a];
                    if s <= tol.support * es.max() {
                        continue;
                    }
                    let k = es.vector(a) * em.vector(b).adjoint() * C64::new((s * mu).sqrt(), 0.0);
                    kraus.push(k);
                }
            }
        }
        Self::new(kraus)
    }

    /// Random measure-and-prepare channel with `outcomes` POVM elements.
    pub fn random_measure_prepare<R: Rng + ?Sized>(rng: &mut R, d_in: usize, d_out: usize, outcomes: usize) -> Result<Self> {
        let raw: Vec<CMat> = (0..outcomes.max(1)).map(|_| random::density(rng, d_in, d_in)).collect();
        let mut s = CMat::zeros(d_in, d_in);
        for m in &raw {
            s += m;
        }
        let inv_sqrt = linalg::eigh(&s)?.map(|x| 1.0 / x.sqrt());
        let povm: Vec<CMat> = raw.iter().map(|m| &inv_sqrt * m * &inv_sqrt).collect();
        let states = (0..povm.len())
            .map(|_| DensityMatrix::new(random::density(rng, d_out, d_out), BipartiteDims::new(d_out, 1)?))
            .collect::<Result<Vec<_>>>()?;
        Self::measure_prepare(&povm, &states)
    }

    /// Rebuild a channel from its Choi state relative to `reference`.
    pub fn from_choi(choi: &DensityMatrix, reference: &PureState) -> Result<Self> {
        Self::new(choi_to_kraus(choi, reference)?)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// `Σ_i V_i ρ V_i†`.
    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::Shape(format!(
                "channel input must be {0}x{0}, got {1}x{2}",
                self.dim_in,
                rho.nrows(),
                rho.ncols()
            )));
        }
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        Ok(out)
    }

    /// Choi state for the maximally entangled reference (cached).
    pub fn choi(&self) -> Result<&DensityMatrix> {
        if let Some(c) = self.choi.get() {
            return Ok(c);
        }
        let c = kraus_to_choi(self, &PureState::maximally_entangled(self.dim_in)?)?;
        Ok(self.choi.get_or_init(|| c))
    }

    /// `{(V_i ⊗ I)|ψ⟩}`: the ensemble of the Choi state induced by the Kraus
    /// list, whose members have Schmidt rank `rank V_i`.
    pub fn kraus_ensemble(&self, reference: &PureState) -> Result<Ensemble> {
        check_reference(reference, self.dim_in)?;
        let psi = reference.coefficient_matrix();
        let dims = BipartiteDims::new(self.dim_out, self.dim_in)?;
        let mut members = Vec::new();
        for k in &self.kraus {
            let v = linalg::vectorize(&(k * &psi));
            let weight = v.norm_squared();
            if weight < 1e-15 {
                continue;
            }
            members.push(EnsembleMember { weight, state: PureState::normalized(v, dims)? });
        }
        Ok(Ensemble { members })
    }
}

fn check_reference(reference: &PureState, d: usize) -> Result<()> {
    let dims = reference.dims();
    if dims.a != d || dims.b != d {
        return Err(Error::Shape(format!("reference state must live on {d}x{d}, got {}x{}", dims.a, dims.b)));
    }
    let rank = reference.schmidt_rank(RankTolerance::default())?;
    if rank != d {
        return Err(Error::ReferenceState { rank, required: d });
    }
    Ok(())
}

/// `(Φ ⊗ Id)(|ψ⟩⟨ψ|)` on `(d_out, d_in)`.
pub fn kraus_to_choi(channel: &QuantumChannel, reference: &PureState) -> Result<DensityMatrix> {
    check_reference(reference, channel.dim_in)?;
    let psi = reference.coefficient_matrix();
    let dims = BipartiteDims::new(channel.dim_out, channel.dim_in)?;
    let n = dims.total();
    let mut m = CMat::zeros(n, n);
    for k in &channel.kraus {
        m += linalg::outer(&linalg::vectorize(&(k * &psi)));
    }
    DensityMatrix::new(m, dims)
}

/// Kraus operators `V_j = √μ_j unvec(c_j) Ψ⁻¹` from the eigenpairs
/// `(μ_j, c_j)` of a Choi state, in descending eigenvalue order.
pub fn choi_to_kraus(choi: &DensityMatrix, reference: &PureState) -> Result<Vec<CMat>> {
    let dims = choi.dims();
    check_reference(reference, dims.b)?;
    let psi = reference.coefficient_matrix();
    let marginal = choi.reduced(Side::A)?;
    let expected = reference.density().reduced(Side::A)?;
    let mismatch = (&marginal - &expected).norm();
    if mismatch > MARGINAL_TOL {
        return Err(Error::Validation(format!("Choi marginal differs from the reference marginal by {mismatch:.3e}")));
    }
    let psi_inv = psi
        .clone()
        .try_inverse()
        .ok_or(Error::ReferenceState { rank: dims.b.saturating_sub(1), required: dims.b })?;
    let tol = Tolerances::default();
    let e = choi.eigen()?;
    let r = e.support_rank(tol.support);
    Ok((0..r)
        .map(|j| {
            let c: CVec = e.vector(j) * C64::new(e.values[j].sqrt(), 0.0);
            linalg::coefficient_matrix(&c, dims) * &psi_inv
        })
        .collect())
}

/// Certified bounds on the PEB level of a channel.
#[derive(Debug, Clone, Serialize)]
pub struct PEBCertificate {
    /// The channel is k-PEB for this k.
    pub k_peb_upper: Option<usize>,
    /// The channel is not (k − 1)-PEB for this k.
    pub k_peb_lower: Option<usize>,
    pub evidence: SchmidtCertificate,
    #[serde(skip)]
    pub reference_state: PureState,
}

impl PEBCertificate {
    pub fn is_entanglement_breaking(&self) -> bool {
        self.k_peb_upper == Some(1)
    }
}

/// Certify the Choi state built from the maximally entangled reference.
pub fn certify_peb(channel: &QuantumChannel, search: &SearchOptions) -> Result<PEBCertificate> {
    certify_peb_with_reference(channel, &PureState::maximally_entangled(channel.dim_in)?, search)
}

pub fn certify_peb_with_reference(channel: &QuantumChannel, reference: &PureState, search: &SearchOptions) -> Result<PEBCertificate> {
    let choi = kraus_to_choi(channel, reference)?;
    let opts = CertifyOptions::new(*search).with_hint(channel.kraus_ensemble(reference)?);
    let evidence = certify(&choi, &opts)?;
    Ok(PEBCertificate {
        k_peb_upper: Some(evidence.upper),
        k_peb_lower: Some(evidence.lower),
        evidence,
        reference_state: reference.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KrausRankProfile {
    /// Ranks of the stored Kraus operators.
    pub given: Vec<usize>,
    /// Ranks of the canonical (Choi eigenvector) Kraus operators.
    pub canonical: Vec<usize>,
    pub canonical_min: usize,
}

pub fn kraus_rank_profile(channel: &QuantumChannel, tol: RankTolerance) -> Result<KrausRankProfile> {
    let given = channel.kraus.iter().map(|k| tol.matrix_rank(k)).collect::<Result<Vec<_>>>()?;
    let reference = PureState::maximally_entangled(channel.dim_in)?;
    let canonical = choi_to_kraus(channel.choi()?, &reference)?
        .iter()
        .map(|k| tol.matrix_rank(k))
        .collect::<Result<Vec<_>>>()?;
    let canonical_min = canonical.iter().copied().min().unwrap_or(0);
    Ok(KrausRankProfile { given, canonical, canonical_min })
}

/// Precompose with the inclusion of the first `n` input basis vectors.
pub fn restrict_channel(channel: &QuantumChannel, n: usize) -> Result<QuantumChannel> {
    if n == 0 || n > channel.dim_in {
        return Err(Error::Validation(format!("restriction dimension {n} outside 1..={}", channel.dim_in)));
    }
    let kraus = channel.kraus.iter().map(|k| k.columns(0, n).into_owned()).collect();
    QuantumChannel::new(kraus)
}
