//! Truncated multi-mode bosonic Fock spaces: basis indexing, states, sparse
//! ladder operators, matrix-free exponentials and reduced density matrices.

mod density;
mod expm;
mod expr;
mod operator;
mod space;
mod state;

pub use density::{
    partial_trace, partial_trace_with_tol, von_neumann_entropy, DensityMatrix, DENSITY_TOL, MAX_DENSE_DIMENSION,
};
pub use expm::{exp_apply, exp_apply_scaled, exp_apply_with_budget, headroom, TruncationReport};
pub(crate) use expm::{exp_apply_entries, DEFAULT_MAX_TERMS};
pub use expr::OpExpr;
pub use operator::{commutator, expectation, Operator, SymmetryFlags};
pub use space::{FockSpace, ModeId, Sector, Species, DEFAULT_MAX_DIMENSION};
pub use state::{inner, StateVector};

/// Default number of top rungs excluded from operator-identity checks.
pub const DEFAULT_SAFE_MARGIN: usize = 2;
