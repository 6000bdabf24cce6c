// SPDX-License-Identifier: Apache-2.0

//! File formats: JSON instances and placements, GSRC benchmarks, SVG
//! drawings and benchmark CSV reports.

pub mod bench;
pub mod gsrc;
pub mod json;
pub mod svg;

use thiserror::Error;

pub use bench::{aggregate, parse_report, write_report, BenchRow, RunRecord};
pub use gsrc::{parse_gsrc, GsrcOptions, GsrcStats};
pub use json::{
    parse_instance, parse_placement, placement_file, write_instance, write_placement, InstanceFile, PlacementFile,
    SolverInfo, INSTANCE_FORMAT, PLACEMENT_FORMAT, VERSION,
};
pub use svg::render_svg;

/// Malformed or inconsistent input data.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("field `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("line {line}: {message}")]
    Gsrc { line: usize, message: String },
    #[error("csv: {0}")]
    Csv(String),
}
