//! Parameter sweeps, figure datasets and table emission for the `dce` binary.

pub mod error;
pub mod figure;
pub mod sweep;
pub mod table;

pub use error::{CliError, Result};
pub use figure::{reproduce_figure, Dataset, FigureId, FigureOptions};
pub use sweep::{run_sweep, SweepSpec, SweepVariable};
pub use table::{emit, render, Cell, Format, Table};
