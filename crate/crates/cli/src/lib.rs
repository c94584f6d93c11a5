//! Batch runner for the coherent-error tables, the state-preparation sweep
//! and the single-pulse trajectory figures.

pub mod config;
pub mod figures;
pub mod sweep;
pub mod tables;

pub use config::Config;
pub use figures::{run_figure, FigureId};
pub use sweep::run_sweep;
pub use tables::{run_table, TableId};
