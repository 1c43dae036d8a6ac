//! Batch pipeline around `vadscope-core`: configuration, the report bundle,
//! and SVG plots.

pub mod config;
pub mod error;
pub mod pipeline;
pub mod plot;

pub use config::{IndicatorSpec, InterpMode, Overrides, RunConfig};
pub use error::CliError;
pub use pipeline::{run, run_pipeline, BundleFile, ReportBundle, Skipped, Target};
pub use plot::{emit_plot, render_svg, Annotation, AnnotationStyle};
