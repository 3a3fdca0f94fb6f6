//! Elastic Net estimation for partially linear models `y = x'β + f(t) + ε`.
//!
//! The nonparametric part is removed by Nadaraya-Watson smoothing in `t`
//! ([`smoothing::partial_out`]); the resulting linear model on the partial
//! residuals is fitted with a penalized least-squares solver
//! ([`solver::fit`]) whose objective is
//!
//! ```text
//! L(λ₁, λ₂, β) = ‖ỹ − X̃β‖² + λ₂‖β‖² + λ₁‖β‖₁
//! ```
//!
//! Note the residual sum of squares is *not* divided by `2n`, so penalty
//! values are not directly comparable to glmnet-style conventions; see
//! [`solver::convention`] for conversions.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod selection;
pub mod simulation;
pub mod smoothing;
pub mod solver;

pub use data::{CoefficientVector, Dataset, StandardizationInfo};
pub use error::{Error, Result};
pub use smoothing::{Kernel, PartialResiduals, SmootherConfig};
pub use solver::{FitResult, Method, PenaltySpec, SolverOptions};
