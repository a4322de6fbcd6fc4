//! Asymptotic and finite-length decoding analysis of LDPC ensembles on the
//! binary erasure channel.

pub mod counting;
pub mod density_evolution;
pub mod ensemble;
pub mod error;
pub mod exit_maxwell;
pub mod finite_sim;
pub mod poly;
pub mod quad;
pub mod roots;

pub use ensemble::DDPair;
pub use error::{Error, Result};
pub use poly::Poly;
