//! Semi-structured algebraic multigrid.
//!
//! A semi-structured matrix `A = S + U` couples cells inside structured
//! parts through per-part stencils (`S`) and couples parts to each other
//! through a sparse matrix (`U`). The preconditioner built here coarsens
//! each part independently in one direction per level, interpolates with
//! two-point operator-collapsed weights, and forms coarse operators by the
//! Galerkin product.

pub mod coarsen;
pub mod error;
pub mod experiment;
pub mod galerkin;
pub mod grid;
pub mod hierarchy;
pub mod krylov;
pub mod linalg;
pub mod problems;
pub mod smooth;
pub mod transfer;
pub mod uamg;

pub use error::{Result, SsamgError};
