//! Schmidt-number certification for bipartite states and classification of
//! quantum channels as k-partially entanglement breaking (k-PEB).
//!
//! Everything works at finite truncation: states live on `dimA ⊗ dimB`
//! with the A-major index convention `i = i_A * dimB + i_B`.
//!
//! * [`linalg`]: dense complex matrices, Kronecker products, partial traces,
//!   Hermitian eigendecomposition and SVD.
//! * [`states`]: pure and mixed bipartite states, Schmidt data, purification,
//!   truncation and local filtering.
//! * [`schmidt`]: lower bounds through the reduction map family
//!   `Λ_t(ρ) = Tr(ρ) I − t ρ`, upper bounds through explicit ensembles,
//!   Schmidt witnesses and edge decompositions.
//! * [`channels`]: Kraus/Choi channels and k-PEB certificates.
//! * [`constructions`]: rotation-group states, Schmidt-number-k states built
//!   on a Fourier truncation, isotropic states.
//! * [`io`]: JSON and binary file formats for states, channels and witnesses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod constructions;
pub mod error;
pub mod io;
pub mod linalg;
pub mod par;
pub mod random;
pub mod schmidt;
pub mod seed;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{BipartiteDims, CMat, CVec, Side, C64};
pub use states::{DensityMatrix, Ensemble, PureState, RankTolerance};
