//! Numerical laboratory for q-deformed bosonic coproducts, the Bogoliubov
//! vacua they generate, and the thermal and entanglement structure of those
//! vacua, all on truncated Fock spaces.

pub mod error;
pub mod fock;

pub use error::{Error, Result};
pub mod bogoliubov;
pub mod entangle;
pub mod hopf;
pub mod thermo;
pub mod vacuum;
