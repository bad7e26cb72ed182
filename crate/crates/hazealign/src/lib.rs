//! Dataset-level color alignment toolkit built on `hazealign-core`.
//!
//! This crate carries everything that touches the filesystem: PNG I/O,
//! paired dataset manifests and split policies, parallel dataset
//! statistics, the gamma-alignment pipeline, metric evaluation over
//! prediction directories, and the report/CSV/plan file formats. The
//! `hazealign` binary exposes it all as subcommands; see the crate
//! README for the workflow.

pub mod align;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod io;
pub mod manifest;
pub mod plan;
pub mod report;

pub use align::{align_dataset, AlignmentReport, SubsetAlignment};
pub use dataset::Subset;
pub use error::PipelineError;
pub use eval::{MetricReport, PairMetrics};
pub use io::{load_image, save_image};
pub use manifest::{DatasetManifest, PairRecord, Split, SplitPolicy};
