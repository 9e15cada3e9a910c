//! Recovery of third-order tensors that are simultaneously undersampled and
//! grossly corrupted, built on the t-SVD algebraic framework.
//!
//! The crate provides, bottom to top:
//!
//! - [`tensor`] — dense third-order tensors, the mode-3 DFT, and the
//!   t-product algebra (products, transposes, norms, bases);
//! - [`tsvd`] — the tensor singular value decomposition, tubal ranks, the
//!   tubal nuclear norm (TNN) and its proximal operator;
//! - [`sampling`] — observation masks, entrywise and tangent-space
//!   projections, incoherence diagnostics, scalar shrinkage;
//! - [`solver`] — an ADMM solver for robust tensor completion, with tensor
//!   completion and tensor robust PCA as special cases;
//! - [`experiments`] — seeded synthetic instances, recovery tables,
//!   phase-transition grids, and Monte-Carlo operator-norm checks;
//! - [`io`] — binary tensor files, mask files, PPM/PGM images, CSV tables,
//!   and run manifests;
//! - [`cli`] — the `tubal` command-line interface.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod sampling;
pub mod solver;
pub mod tensor;
pub mod tsvd;

pub use error::{Error, Result};
pub use sampling::{
    incoherence, project_omega, project_tangent, sample_mask, soft_threshold, IncoherenceReport,
    ObservationMask, SamplingModel, TangentSpace,
};
pub use solver::{
    default_lambda, solve_rtc, solve_tc, solve_trpca, AdmmConfig, AdmmState, Problem,
    RecoveryResult,
};
pub use tensor::{
    basis, conj_transpose, dft_mode3, identity_tensor, idft_mode3, inner_product, is_f_diagonal,
    is_orthogonal, spectral_norm, t_product, BasisSpec, NormKind, SpectralTensor3, Tensor3,
};
pub use tsvd::{
    prox_tnn, prox_tnn_with, tnn, truncate_tubal, tsvd, tsvd_skinny, tubal_ranks, RankReport,
    TSvdFactors, RANK_THRESHOLD,
};
