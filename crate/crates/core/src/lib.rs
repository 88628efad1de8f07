//! Observational (coarse-grained) entropy of quantum and classical states.
//!
//! The quantum side works with dense density matrices and projective or
//! Kraus-operator coarse-grainings; the classical side with cell masses on a
//! discretized phase space. All entropies are in nats.

pub mod classical;
pub mod coarse;
pub mod entropy;
pub mod error;
pub mod io;
pub mod linalg;
pub mod optim;
pub mod povm;
pub mod quarrelation;
pub mod random;
pub mod series;
pub mod state;
pub mod thermo;
pub mod tolerances;

pub use coarse::{
    is_coarser, joint, probabilities, spectral_coarse_graining, tensor_local, CoarseGraining, LocalCoarseGraining,
    MultiCoarseGraining, Projector,
};
pub use entropy::{
    bound_margin, local_decomposition, local_entropy, multi_cg_entropy, observational_entropy, vn_entropy,
    BoundMargin, BoundTarget, EntropyReport, LocalDecomposition,
};
pub use error::{Error, Result};
pub use state::{reduce, DensityMatrix, Observable};
pub use tolerances::Tolerances;
