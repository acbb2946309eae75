//! Optimal equilibrating stress fields for supported bodies, the
//! generalized stress concentration factor, the load capacity ratio and the
//! limit-analysis factor, all computed as linear programs over a
//! constant-strain finite element discretization.

pub mod capacity;
pub mod error;
pub mod kinematics;
pub mod lp;
pub mod matnorm;
pub mod mesh;
pub mod stress;

pub use error::{Error, Result};
