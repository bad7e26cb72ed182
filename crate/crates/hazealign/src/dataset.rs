//! Streaming, parallel per-channel statistics over whole datasets.
//!
//! Each worker decodes one image at a time and folds it into a local
//! histogram; locals are merged with the commutative integer merge, so
//! the result is bit-identical for any thread count, including one.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use hazealign_core::stats::{RgbHistogram, RgbStats};

use crate::error::PipelineError;
use crate::io::load_image;
use crate::manifest::DatasetManifest;

/// Which images of a paired dataset to aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subset {
    Gt,
    Hazy,
    Both,
}

impl Subset {
    pub fn as_str(self) -> &'static str {
        match self {
            Subset::Gt => "gt",
            Subset::Hazy => "hazy",
            Subset::Both => "both",
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gt" => Ok(Subset::Gt),
            "hazy" => Ok(Subset::Hazy),
            "both" => Ok(Subset::Both),
            other => Err(format!(
                "unknown subset {other:?} (expected gt, hazy, or both)"
            )),
        }
    }
}

/// The image paths a subset selector picks out of a manifest.
pub fn subset_paths(manifest: &DatasetManifest, subset: Subset) -> Vec<PathBuf> {
    let mut paths = Vec::new();
    for r in manifest.records() {
        match subset {
            Subset::Gt => paths.push(PathBuf::from(&r.gt_path)),
            Subset::Hazy => paths.push(PathBuf::from(&r.hazy_path)),
            Subset::Both => {
                paths.push(PathBuf::from(&r.hazy_path));
                paths.push(PathBuf::from(&r.gt_path));
            }
        }
    }
    paths
}

/// Pooled histograms over the images at `paths`, decoded in parallel.
pub fn dataset_histograms(paths: &[PathBuf]) -> Result<RgbHistogram, PipelineError> {
    if paths.is_empty() {
        return Err(PipelineError::EmptySelection(
            "no images to aggregate".into(),
        ));
    }
    paths
        .par_iter()
        .map(|path| {
            let img = load_image(path)?;
            Ok(RgbHistogram::from_image(&img))
        })
        .try_reduce(RgbHistogram::new, |a, b| Ok(a.merge(&b)))
}

/// Pooled statistics over the images at `paths`.
pub fn dataset_stats(paths: &[PathBuf]) -> Result<RgbStats, PipelineError> {
    Ok(dataset_histograms(paths)?.stats()?)
}
