//! Exact solvers for block-structured integer programs.

pub mod cone;
pub mod error;
pub mod graver;
pub mod hermite;
pub mod instance;
pub mod lattice;
pub mod mip;
pub mod model;
pub mod nfold;
pub mod numerics;
pub mod oracles;
pub mod polyhedral;
pub mod reductions;
pub mod twostage;

pub use error::{Error, Result};
pub use numerics::{IntMat, IntVec, Index, RatVec, VectorSet};
