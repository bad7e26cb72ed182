//! Per-pair metric evaluation of a prediction directory against a
//! manifest's ground truth.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use hazealign_core::metrics::{ms_ssim, psnr, ssim, SsimParams};

use crate::error::PipelineError;
use crate::io::load_image;
use crate::manifest::{DatasetManifest, Split};

/// Metrics for one prediction/ground-truth pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMetrics {
    pub id: String,
    pub psnr: f64,
    pub ssim: f64,
    pub ms_ssim: f64,
    /// MS-SSIM scales actually used (fewer than 5 for small images).
    pub ms_ssim_scales: usize,
}

/// Per-pair metrics plus their arithmetic means.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub pairs: Vec<PairMetrics>,
    pub mean_psnr: f64,
    pub mean_ssim: f64,
    pub mean_ms_ssim: f64,
}

impl MetricReport {
    fn from_pairs(pairs: Vec<PairMetrics>) -> Self {
        let n = pairs.len() as f64;
        // Summed in record order: deterministic regardless of how the
        // per-pair work was scheduled.
        let mean_psnr = pairs.iter().map(|p| p.psnr).sum::<f64>() / n;
        let mean_ssim = pairs.iter().map(|p| p.ssim).sum::<f64>() / n;
        let mean_ms_ssim = pairs.iter().map(|p| p.ms_ssim).sum::<f64>() / n;
        Self {
            pairs,
            mean_psnr,
            mean_ssim,
            mean_ms_ssim,
        }
    }
}

/// Evaluates `pred_dir/<id>.png` against each selected record's ground
/// truth. `split` filters the manifest; `None` evaluates every record.
pub fn evaluate(
    pred_dir: &Path,
    manifest: &DatasetManifest,
    split: Option<Split>,
    params: &SsimParams,
) -> Result<MetricReport, PipelineError> {
    let records: Vec<_> = manifest
        .records()
        .iter()
        .filter(|r| split.is_none_or(|s| r.split == s))
        .collect();
    if records.is_empty() {
        let filter = split.map_or("all".to_string(), |s| s.to_string());
        return Err(PipelineError::EmptySelection(format!(
            "manifest {} has no records in split {filter}",
            manifest.name()
        )));
    }

    let pairs: Vec<PairMetrics> = records
        .par_iter()
        .map(|record| {
            let pred_path: PathBuf = pred_dir.join(format!("{}.png", record.id));
            if !pred_path.exists() {
                return Err(PipelineError::MissingPrediction {
                    id: record.id.clone(),
                    path: pred_path,
                });
            }
            let pred = load_image(&pred_path)?;
            let gt = load_image(Path::new(&record.gt_path))?;
            let wrap = |source| PipelineError::PairMetric {
                id: record.id.clone(),
                source,
            };
            let psnr = psnr(&pred, &gt).map_err(wrap)?;
            let ssim = ssim(&pred, &gt, params).map_err(wrap)?;
            let ms = ms_ssim(&pred, &gt, params).map_err(wrap)?;
            Ok(PairMetrics {
                id: record.id.clone(),
                psnr,
                ssim,
                ms_ssim: ms.value,
                ms_ssim_scales: ms.scales_used,
            })
        })
        .collect::<Result<_, _>>()?;

    Ok(MetricReport::from_pairs(pairs))
}
