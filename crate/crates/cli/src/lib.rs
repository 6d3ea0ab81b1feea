//! Batch front end: CSV ingestion, report serialisation, SVG plots and the
//! `carima` subcommands.

pub mod commands;
pub mod dataset;
pub mod dummies;
pub mod emit;
pub mod error;
pub mod plot;
pub mod report;

pub use dataset::{ingest_csv, read_csv, CsvSchema, Dataset};
pub use emit::{emit_report, Format, Manifest};
pub use error::IoError;
pub use plot::render_effect_plot;
pub use report::{MachineReport, ReportBody, SCHEMA_VERSION};
