//! Bipartite pure and mixed states.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, BipartiteDims, CMat, CVec, Eigh, Side, C64};
use crate::{Error, Result};

const NORM_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-10;

/// Relative cutoff on Schmidt coefficients (or square roots of reduced
/// eigenvalues) below which a coefficient counts as zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankTolerance {
    pub rel_cutoff: f64,
}

impl Default for RankTolerance {
    fn default() -> Self {
        Self { rel_cutoff: 1e-8 }
    }
}

impl RankTolerance {
    pub fn new(rel_cutoff: f64) -> Result<Self> {
        if !(rel_cutoff > 0.0 && rel_cutoff < 1.0) {
            return Err(Error::Validation(format!("rank cutoff must lie in (0, 1), got {rel_cutoff}")));
        }
        Ok(Self { rel_cutoff })
    }

    /// Count of amplitudes `≥ rel_cutoff × max`.
    pub fn count(&self, coefficients: &[f64]) -> usize {
        let max = coefficients.iter().copied().fold(0.0, f64::max);
        if max <= 0.0 {
            return 0;
        }
        coefficients.iter().filter(|&&c| c >= self.rel_cutoff * max).count()
    }

    /// Rank of a PSD spectrum measured on the amplitude scale, so that a
    /// reduced state has the same rank as the Schmidt coefficients it came
    /// from. Eigenvalues at the roundoff floor of the eigensolver (whose
    /// square roots would sit near `1e-8`) do not count.
    pub fn psd_rank(&self, eigenvalues: &[f64]) -> usize {
        let max = eigenvalues.iter().copied().fold(0.0, f64::max);
        if max <= 0.0 {
            return 0;
        }
        let cut = (self.rel_cutoff * self.rel_cutoff).max(EIGEN_FLOOR) * max;
        eigenvalues.iter().filter(|&&x| x >= cut).count()
    }

    /// Rank of a general matrix from its singular values.
    pub fn matrix_rank(&self, m: &CMat) -> Result<usize> {
        Ok(self.count(&linalg::svd(m)?.singular))
    }
}

/// Relative eigenvalue level treated as zero by [`RankTolerance::psd_rank`].
pub const EIGEN_FLOOR: f64 = 1e-13;

/// Numerical thresholds shared by the certification routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank: RankTolerance,
    /// Density eigenvalues at or below `support × λ_max` are treated as zero
    /// when taking supports, kernels and pseudo-inverses.
    pub support: f64,
    /// Most negative eigenvalue still accepted as positive semidefinite.
    pub psd: f64,
    /// A reduction-map eigenvalue must be below `-margin` to certify.
    pub margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rank: RankTolerance::default(), support: 1e-10, psd: 1e-9, margin: 1e-9 }
    }
}

/// Schmidt coefficients (descending) with left and right Schmidt vectors
/// as matrix columns: `ψ = Σ_i λ_i |left_i⟩ ⊗ |right_i⟩`.
#[derive(Debug, Clone)]
pub struct SchmidtData {
    pub coefficients: Vec<f64>,
    pub left: CMat,
    pub right: CMat,
}

impl SchmidtData {
    pub fn reconstruct(&self, dims: BipartiteDims) -> CVec {
        let mut m = CMat::zeros(dims.a, dims.b);
        for (i, &l) in self.coefficients.iter().enumerate() {
            m += (self.left.column(i) * self.right.column(i).transpose()) * C64::new(l, 0.0);
        }
        linalg::vectorize(&m)
    }
}

/// Unit vector on a bipartite space.
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: CVec,
    dims: BipartiteDims,
    schmidt: OnceLock<SchmidtData>,
}

impl PureState {
    pub fn new(amplitudes: CVec, dims: BipartiteDims) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return Err(Error::Shape(format!(
                "state on {}x{} needs {} amplitudes, got {}",
                dims.a,
                dims.b,
                dims.total(),
                amplitudes.len()
            )));
        }
        if !amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Validation("amplitudes must be finite".into()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self { amplitudes, dims, schmidt: OnceLock::new() })
    }

    /// Normalize `v` first; fails only for the zero vector.
    pub fn normalized(v: CVec, dims: BipartiteDims) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Validation("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new(v / C64::new(norm, 0.0), dims)
    }

    pub fn product(a: &CVec, b: &CVec) -> Result<Self> {
        let dims = BipartiteDims::new(a.len(), b.len())?;
        Self::normalized(a.kronecker(b), dims)
    }

    /// `Σ_{i<d} |ii⟩ / √d` on `d ⊗ d`.
    pub fn maximally_entangled(d: usize) -> Result<Self> {
        let dims = BipartiteDims::square(d)?;
        Self::new(crate::random::equal_coefficient_vector(dims, d), dims)
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn coefficient_matrix(&self) -> CMat {
        linalg::coefficient_matrix(&self.amplitudes, self.dims)
    }

    /// Cached Schmidt decomposition.
    pub fn schmidt(&self) -> Result<&SchmidtData> {
        if let Some(s) = self.schmidt.get() {
            return Ok(s);
        }
        let d = linalg::svd(&self.coefficient_matrix())?;
        let data = SchmidtData { coefficients: d.singular, left: d.u, right: d.v_adj.transpose() };
        Ok(self.schmidt.get_or_init(|| data))
    }

    pub fn schmidt_rank(&self, tol: RankTolerance) -> Result<usize> {
        Ok(tol.count(&self.schmidt()?.coefficients))
    }

    pub fn projector(&self) -> CMat {
        linalg::outer(&self.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::trusted(self.projector(), self.dims)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }
}

/// Compute (and cache) the Schmidt decomposition of `psi`.
pub fn schmidt_decompose(psi: &PureState) -> Result<SchmidtData> {
    psi.schmidt().cloned()
}

pub fn schmidt_rank(psi: &PureState, tol: RankTolerance) -> Result<usize> {
    psi.schmidt_rank(tol)
}

/// Trace-one positive semidefinite matrix on a bipartite space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMat,
    dims: BipartiteDims,
    psd_slack: f64,
    eig: OnceLock<Eigh>,
}

impl DensityMatrix {
    pub fn new(matrix: CMat, dims: BipartiteDims) -> Result<Self> {
        Self::with_psd_tolerance(matrix, dims, Tolerances::default().psd)
    }

    pub fn with_psd_tolerance(matrix: CMat, dims: BipartiteDims, psd_tol: f64) -> Result<Self> {
        let n = dims.total();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Shape(format!(
                "density matrix on {}x{} must be {n}x{n}, got {}x{}",
                dims.a,
                dims.b,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let deviation = (&matrix - matrix.adjoint()).norm() / matrix.norm().max(1.0);
        let h = linalg::hermitian_part(&matrix)?;
        if deviation > HERMITIAN_TOL {
            log::debug!("symmetrized density matrix with deviation {deviation:.3e}");
        }
        let tr = linalg::trace(&h);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Validation(format!("trace is {tr}, expected 1")));
        }
        let eig = linalg::eigh(&h)?;
        let min = eig.min();
        if min < -psd_tol {
            return Err(Error::Validation(format!("matrix is not positive semidefinite: eigenvalue {min:.3e}")));
        }
        let cell = OnceLock::new();
        let _ = cell.set(eig);
        Ok(Self { matrix: h, dims, psd_slack: min.min(0.0), eig: cell })
    }

    /// Divide by the trace, then validate.
    pub fn from_unnormalized(matrix: CMat, dims: BipartiteDims) -> Result<Self> {
        let tr = linalg::trace(&matrix).re;
        if !(tr > 0.0) {
            return Err(Error::Validation(format!("cannot normalize a matrix with trace {tr}")));
        }
        Self::new(matrix / C64::new(tr, 0.0), dims)
    }

    // Internal constructor for matrices that are states by construction.
    pub(crate) fn trusted(matrix: CMat, dims: BipartiteDims) -> Self {
        Self { matrix, dims, psd_slack: 0.0, eig: OnceLock::new() }
    }

    pub fn maximally_mixed(dims: BipartiteDims) -> Self {
        let n = dims.total();
        Self::trusted(linalg::identity(n) / C64::new(n as f64, 0.0), dims)
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    /// Most negative eigenvalue seen at validation (0 if none).
    pub fn psd_slack(&self) -> f64 {
        self.psd_slack
    }

    pub fn eigen(&self) -> Result<&Eigh> {
        if let Some(e) = self.eig.get() {
            return Ok(e);
        }
        let e = linalg::eigh(&self.matrix)?;
        Ok(self.eig.get_or_init(|| e))
    }

    pub fn reduced(&self, traced_out: Side) -> Result<CMat> {
        linalg::partial_trace(&self.matrix, self.dims, traced_out)
    }

    pub fn rank(&self, support: f64) -> Result<usize> {
        Ok(self.eigen()?.support_rank(support))
    }

    /// Eigen-ensemble `{(λ_j, e_j)}` over the support.
    pub fn eigen_ensemble(&self, support: f64) -> Result<Ensemble> {
        let e = self.eigen()?;
        let r = e.support_rank(support);
        let members = (0..r)
            .map(|j| {
                Ok(EnsembleMember { weight: e.values[j], state: PureState::normalized(e.vector(j), self.dims)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Ensemble { members })
    }

    pub fn trace_distance(&self, other: &CMat) -> Result<f64> {
        linalg::trace_distance(&self.matrix, other)
    }

    /// Conjugate by a local unitary `U_A ⊗ U_B`.
    pub fn conjugate_local(&self, ua: &CMat, ub: &CMat) -> Result<Self> {
        let u = linalg::kron(ua, ub)?;
        Ok(Self::trusted(&u * &self.matrix * u.adjoint(), self.dims))
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub weight: f64,
    pub state: PureState,
}

/// Finite ensemble of weighted pure states.
#[derive(Debug, Clone, Default)]
pub struct Ensemble {
    pub members: Vec<EnsembleMember>,
}

impl Ensemble {
    pub fn singleton(state: PureState) -> Self {
        Self { members: vec![EnsembleMember { weight: 1.0, state }] }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|m| m.weight).sum()
    }

    pub fn dims(&self) -> Option<BipartiteDims> {
        self.members.first().map(|m| m.state.dims())
    }

    /// `Σ_i p_i |ψ_i⟩⟨ψ_i|`.
    pub fn reconstruct(&self) -> Option<CMat> {
        let n = self.dims()?.total();
        let mut m = CMat::zeros(n, n);
        for member in &self.members {
            m += member.state.projector() * C64::new(member.weight, 0.0);
        }
        Some(m)
    }

    pub fn max_schmidt_rank(&self, tol: RankTolerance) -> Result<usize> {
        let mut best = 0;
        for m in &self.members {
            best = best.max(m.state.schmidt_rank(tol)?);
        }
        Ok(best)
    }

    /// Trace distance between the reconstructed operator and `rho`.
    pub fn reconstruction_error(&self, rho: &DensityMatrix) -> Result<f64> {
        match self.reconstruct() {
            Some(m) if self.dims() == Some(rho.dims()) => rho.trace_distance(&m),
            _ => Ok(f64::INFINITY),
        }
    }
}

/// Purification `Σ_i √p_i |i⟩ ⊗ |e_i⟩` of `rho_b = Σ_i p_i |e_i⟩⟨e_i|`,
/// so that tracing out the first factor returns `rho_b`.
pub fn purify(rho_b: &CMat) -> Result<PureState> {
    let d = rho_b.nrows();
    let single = BipartiteDims::new(1, d)?;
    let rho = DensityMatrix::new(rho_b.clone(), single)?;
    let e = rho.eigen()?;
    let dims = BipartiteDims::square(d)?;
    let mut v = CVec::zeros(d * d);
    for i in 0..d {
        let w = e.values[i].max(0.0).sqrt();
        for j in 0..d {
            v[dims.index(i, j)] = e.vectors[(j, i)] * w;
        }
    }
    PureState::normalized(v, dims)
}

/// Output of [`truncate_state_with_basis`]: the compressed state and the
/// isometries (columns = retained basis) on each side.
#[derive(Debug, Clone)]
pub struct Truncation {
    pub state: DensityMatrix,
    pub basis_a: CMat,
    pub basis_b: CMat,
    /// `Tr(P ⊗ Q ω)` before renormalization.
    pub retained_weight: f64,
}

impl Truncation {
    /// The truncated state embedded back into the original space.
    pub fn embedded(&self) -> Result<CMat> {
        let e = linalg::kron(&self.basis_a, &self.basis_b)?;
        Ok(&e * self.state.matrix() * e.adjoint())
    }
}

/// Compress onto the leading `n_a` (resp. `n_b`) eigenvectors of the reduced
/// states and renormalize.
pub fn truncate_state(omega: &DensityMatrix, n_a: usize, n_b: usize) -> Result<DensityMatrix> {
    Ok(truncate_state_with_basis(omega, n_a, n_b)?.state)
}

pub fn truncate_state_with_basis(omega: &DensityMatrix, n_a: usize, n_b: usize) -> Result<Truncation> {
    let dims = omega.dims();
    if n_a == 0 || n_b == 0 || n_a > dims.a || n_b > dims.b {
        return Err(Error::Validation(format!(
            "truncation {n_a}x{n_b} must be positive and fit inside {}x{}",
            dims.a, dims.b
        )));
    }
    let ea = linalg::eigh(&omega.reduced(Side::B)?)?;
    let eb = linalg::eigh(&omega.reduced(Side::A)?)?;
    let basis_a = ea.vectors.columns(0, n_a).into_owned();
    let basis_b = eb.vectors.columns(0, n_b).into_owned();
    let iso = linalg::kron(&basis_a, &basis_b)?;
    let compressed = iso.adjoint() * omega.matrix() * &iso;
    let weight = linalg::trace(&compressed).re;
    if weight <= 1e-12 {
        return Err(Error::TruncationDegenerate { weight });
    }
    let state = DensityMatrix::new(compressed / C64::new(weight, 0.0), BipartiteDims::new(n_a, n_b)?)?;
    Ok(Truncation { state, basis_a, basis_b, retained_weight: weight })
}

/// Normalized `(A ⊗ B)|ψ⟩`. `A` and `B` may be rectangular; the output
/// dimensions are their row counts.
pub fn local_filter(psi: &PureState, a: &CMat, b: &CMat) -> Result<PureState> {
    let dims = psi.dims();
    if a.ncols() != dims.a || b.ncols() != dims.b {
        return Err(Error::Shape(format!(
            "filters with {} and {} columns cannot act on {}x{}",
            a.ncols(),
            b.ncols(),
            dims.a,
            dims.b
        )));
    }
    let out = a * psi.coefficient_matrix() * b.transpose();
    let v = linalg::vectorize(&out);
    let norm = v.norm();
    if norm <= 1e-12 {
        return Err(Error::FilterDegenerate { norm });
    }
    PureState::normalized(v, BipartiteDims::new(a.nrows(), b.nrows())?)
}
