//! Library behind the `covert` command: channel loading, reports and CSV
//! tables.

pub mod error;
pub mod format;
pub mod grid;
pub mod report;
pub mod source;
pub mod tables;

pub use error::{CliError, Result};
pub use format::Units;
pub use report::{analyze, AnalysisReport};
pub use tables::{
    awgn, geodesic, simulate, sweep, Cell, SimTarget, SimulateOptions, SweepFamily, Table,
};
