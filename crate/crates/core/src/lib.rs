//! Capacity bounds for finite-dimensional quantum channels and one-way
//! distillation bounds for bipartite states.

pub mod bippt;
pub mod bounds;
pub mod channel;
pub mod cli;
pub mod distill;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod optim;
pub mod sdp;
pub mod serde_matrix;
pub mod state;

pub use error::{Error, Result};

// Selects the system OpenBLAS for the SDP backend's LAPACK calls.
use openblas_src as _;
