//! Quantum sets, quantum functions and nonlocal games with quantum questions,
//! evaluated as dense complex matrices.

pub mod dsl;
pub mod error;
pub mod gamemaps;
pub mod graphs;
pub mod harness;
pub mod io;
pub mod qset;
pub mod rng;
pub mod strategies;
pub mod tensor;

pub use error::{QsyncError, Result};
pub use qset::QuantumSet;
pub use tensor::{Morphism, Wire, C64};
