//! Center-point global optimization for unit commitment with carbon emission
//! trading.
//!
//! The crate builds the mixed-integer quadratically constrained model, tightens
//! a perspective-cut outer approximation of the emission constraint with
//! [`la::run_la`], and searches integer solutions through integer ellipsoid
//! centers in [`cp::run_cp`]. Subproblems go through a [`backend::Backend`];
//! the shipped [`backend::ProcessBackend`] drives an external solver through
//! MPS files.

pub mod model;
pub mod formulation;
pub mod backend;
pub mod la;
pub mod cp;
pub mod oracle;
pub mod harness;
