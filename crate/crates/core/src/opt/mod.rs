//! Small dense solvers shared by the capacity and LPD analyses.

mod lp;
mod nnls;
mod simplex_qp;

pub use lp::{maximize, Constraint, LpSolution, Relation};
pub use nnls::{nnls, NnlsSolution};
pub use simplex_qp::{minimize_on_simplex, QpSolution, SimplexQp};
