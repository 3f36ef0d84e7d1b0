pub mod changepoint;
pub mod cli;
pub mod cluster;
pub mod datasets;
pub mod error;
pub mod hamiltonian;
pub mod kme;
pub mod linalg;
pub mod pauli;
pub mod perturb;
pub mod qcm;

pub use error::{Error, Result};
