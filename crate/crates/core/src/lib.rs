//! Gaussian covariance-matrix toolkit for the θ-parametrized two-mode
//! squeezed state (TMSS) family.
//!
//! States are zero-mean Gaussian states described by their covariance
//! matrix in the ordering `(x₁, p₁, x₂, p₂, …)` with vacuum quadrature
//! variance `1/4`. The crate is split into:
//!
//! * [`phase_space`]: covariance matrices, symplectic transforms, partial
//!   trace, purity and symplectic spectra.
//! * [`tmss`]: the TMSS family, its closed-form impurity (linear entropy of
//!   the reduced state) and transition-width analysis.
//! * [`wigner`]: a brute-force Wigner-grid quadrature used as an
//!   independent check of the covariance pathway.
//! * [`mub`]: rotated-quadrature basis kernels and regularized oscillatory
//!   overlap integrals.

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod mub;
pub mod phase_space;
pub mod summation;
pub mod tmss;
pub mod wigner;

pub use error::{Error, Result};
pub use phase_space::{
    apply_transform, epr_basis_change, mode_rotation, purity, reduce, symplectic_eigenvalues,
    vb_rotation, CovarianceMatrix, EprBasisChange, SymplecticTransform, VACUUM_VARIANCE,
};
pub use tmss::{
    impurity_closed_form, impurity_from_covariance, theta_tmss_covariance, tmss_covariance,
    transition_width, ImpurityValue, TmssParams,
};
