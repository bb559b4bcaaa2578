//! Precision trade-offs for three-parameter qubit estimation.
//!
//! The crate evaluates quantum and classical Fisher information for the
//! Bloch-vector model of a qubit and of two copies of it, computes
//! Cramér-Rao-type lower bounds (including the Nagaoka-Hayashi bound through a
//! small interior-point SDP solver), constructs the measurements that attain
//! them, scans trade-off surfaces, and runs seeded Monte Carlo tomography
//! experiments.

#![allow(clippy::needless_range_loop)]

pub mod bounds;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod model;
pub mod normalization;
pub mod output;
pub mod povm;
pub mod reproduce;
pub mod sdp;
pub mod tol;
pub mod tradeoff;

pub use bounds::{BoundMethod, BoundRecord, BoundValue};
pub use error::{Error, Result};
pub use estimation::{Estimator, ExperimentReport, ShotPlan};
pub use linalg::{eig_hermitian, is_psd, kron, ComplexMatrix, Eigen, HermitianOperator, C64};
pub use model::{
    density_from_bloch, equal_component_eigensystem, model_point, qfi, sld_operators, BlochVector,
    ModelPoint,
};
pub use normalization::Normalization;
pub use povm::{FisherMatrix, Povm, WeightSpec};
pub use tradeoff::{MsePoint, SupportingPlane, SurfaceScan};
