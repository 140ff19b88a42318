//! Principal observable analysis (POA) for finite metric-measure spaces.
//!
//! A principal observable is a centered 1-Lipschitz function of maximal
//! variance, subject to orthogonality against the observables found before
//! it. This crate computes them with a convex-concave procedure over the
//! Lipschitz polytope and builds the usual tooling on top:
//!
//! - [`mmspace`]: finite metric spaces, weighted graphs and probability measures.
//! - [`observables`]: mean, covariance, variance and Lipschitz certification.
//! - [`simplex`]: the LP engine behind the solver and the transport distance.
//! - [`poa`]: the principal observable solver plus a brute-force vertex oracle.
//! - [`embedding`]: L∞ embeddings, distortion histograms and a classical MDS baseline.
//! - [`extension`]: McShane-Whitney extensions to out-of-sample points.
//! - [`signals`]: the μ-orthonormal observable basis, analysis and synthesis.
//! - [`stability`]: Wasserstein-1, stability audits and correspondence distortions.
//! - [`io`] and [`datasets`]: file formats and seeded synthetic spaces.

// Index loops read better in the matrix code; `!(x > 0.0)` is used on purpose to reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod datasets;
pub mod embedding;
pub mod error;
pub mod extension;
pub mod io;
pub mod mmspace;
pub mod observables;
pub mod poa;
pub mod signals;
pub mod simplex;
pub mod stability;

pub use error::{Error, Result};
pub use mmspace::{FiniteMetricSpace, ProbabilityMeasure, WeightedGraph};
pub use observables::Observable;
pub use poa::{ConstraintMode, PoaSolver, PrincipalObservableSet, SolverConfig};
