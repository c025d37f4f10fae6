//! Path transforms on the affine weight space of type A_n^(1).
//!
//! The crate is organised bottom-up:
//! - [`roots`]: Cartan data, weights, affine roots, correction vectors
//! - [`path`]: piecewise-linear paths and exact running-infimum transforms
//! - [`crystal`]: Littelmann root operators and truncated module catalogs
//! - [`sampling`]: random walks, Brownian motion, endpoint laws
//! - [`harmonic`]: the space-time harmonic function for the alcove cone
//! - [`stats`]: Kolmogorov-Smirnov and small regression helpers

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crystal;
pub mod error;
pub mod harmonic;
pub mod path;
pub mod roots;
pub mod sampling;
pub mod stats;

pub use crystal::{enumerate_module, CrystalVertex, ModuleCatalog};
pub use error::{Error, Result};
pub use harmonic::{harmonic_psi, harmonicity_residual, psi_frenkel, HarmonicPsi};
pub use path::{
    concatenate, corrected_cascade, dominant_projection, is_dominant, is_integral, levy_a2, pitman,
    pitman_cascade, string_coordinates, string_functions, CorrectionOrientation,
    PiecewiseLinearPath, ScalarPwl, StringSequence,
};
pub use roots::{AffineRoot, DirectionSequence, RootKind, RootSystem, WeightVector};
pub use sampling::{DriftSpec, Ensemble, RngStream};
