//! Dataset-to-dataset color alignment.
//!
//! For each subset (ground truth and hazy, independently) the pipeline
//! pools the source histograms, solves one gamma per channel so the
//! transformed continuous mean matches the target subset's pooled mean,
//! then writes gamma-corrected copies of every source image under
//! `out_dir/{hazy,gt}/` with their original file names. Residuals are
//! reported twice: continuous (solver output, bounded by the tolerance)
//! and quantized (re-measured from the written 8-bit files).
//!
//! All six gammas are solved before anything is written, and a failure
//! during the write phase removes the directories this run created, so
//! an aborted run leaves no partial output behind.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use hazealign_core::gamma::{gamma_apply, mean_after_gamma, solve_gamma, GammaTriple};
use hazealign_core::image::Channel;
use hazealign_core::stats::{RgbHistogram, RgbStats};

use crate::dataset::{dataset_histograms, dataset_stats, subset_paths, Subset};
use crate::error::PipelineError;
use crate::io::{load_image, save_image};
use crate::manifest::{DatasetManifest, PairRecord};

/// Alignment outcome for one subset (gt or hazy).
#[derive(Debug, Clone)]
pub struct SubsetAlignment {
    pub gammas: GammaTriple,
    pub source_before: RgbStats,
    pub source_after: RgbStats,
    pub target: RgbStats,
    /// |continuous transformed mean − target mean| per channel (R, G, B);
    /// bounded by the solver tolerance.
    pub residual_continuous: [f64; 3],
    /// |written-file mean − target mean| per channel (R, G, B), measured
    /// by re-reading the 8-bit outputs.
    pub residual_quantized: [f64; 3],
}

/// Full alignment outcome: both subsets plus the tolerance used.
#[derive(Debug, Clone)]
pub struct AlignmentReport {
    pub tolerance: f64,
    pub gt: SubsetAlignment,
    pub hazy: SubsetAlignment,
}

impl AlignmentReport {
    pub fn subset(&self, subset: Subset) -> &SubsetAlignment {
        match subset {
            Subset::Gt => &self.gt,
            Subset::Hazy => &self.hazy,
            Subset::Both => panic!("alignment is reported per subset"),
        }
    }
}

fn solve_subset(
    label: &'static str,
    source: &RgbHistogram,
    target: &RgbStats,
    tol: f64,
) -> Result<(GammaTriple, [f64; 3]), PipelineError> {
    let mut gammas = [0.0f64; 3];
    let mut residuals = [0.0f64; 3];
    for (i, channel) in Channel::ALL.into_iter().enumerate() {
        let hist = source.channel(channel);
        let target_mean = target.channel(channel).mean;
        let gamma = solve_gamma(hist, target_mean, tol).map_err(|source| {
            PipelineError::UnachievableChannel {
                subset: label,
                channel,
                source,
            }
        })?;
        gammas[i] = gamma;
        residuals[i] = (mean_after_gamma(hist, gamma).unwrap() - target_mean).abs();
    }
    let triple = GammaTriple::new(gammas[0], gammas[1], gammas[2])?;
    Ok((triple, residuals))
}

fn mean_residuals(after: &RgbStats, target: &RgbStats) -> [f64; 3] {
    let a = after.means();
    let t = target.means();
    [
        (a[0] - t[0]).abs(),
        (a[1] - t[1]).abs(),
        (a[2] - t[2]).abs(),
    ]
}

/// Prepares `out_dir` (which must not exist or be empty) and remembers
/// what was created so a failed run can clean up after itself.
pub(crate) struct OutputDirs {
    root: PathBuf,
    created_root: bool,
    pub(crate) hazy: PathBuf,
    pub(crate) gt: PathBuf,
}

impl OutputDirs {
    pub(crate) fn prepare(out_dir: &Path) -> Result<Self, PipelineError> {
        let created_root = !out_dir.exists();
        if created_root {
            std::fs::create_dir_all(out_dir).map_err(|source| PipelineError::WriteFile {
                path: out_dir.to_path_buf(),
                source,
            })?;
        } else {
            let mut entries =
                std::fs::read_dir(out_dir).map_err(|source| PipelineError::ReadFile {
                    path: out_dir.to_path_buf(),
                    source,
                })?;
            if entries.next().is_some() {
                return Err(PipelineError::OutputDirNotEmpty(out_dir.to_path_buf()));
            }
        }
        let hazy = out_dir.join("hazy");
        let gt = out_dir.join("gt");
        for dir in [&hazy, &gt] {
            std::fs::create_dir_all(dir).map_err(|source| PipelineError::WriteFile {
                path: dir.clone(),
                source,
            })?;
        }
        Ok(Self {
            root: out_dir.to_path_buf(),
            created_root,
            hazy,
            gt,
        })
    }

    pub(crate) fn clean_up(&self) {
        if self.created_root {
            let _ = std::fs::remove_dir_all(&self.root);
        } else {
            let _ = std::fs::remove_dir_all(&self.hazy);
            let _ = std::fs::remove_dir_all(&self.gt);
        }
    }
}

fn file_name_of(path_str: &str) -> String {
    Path::new(path_str)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path_str.to_string())
}

/// Transforms every source image with the per-subset gammas, writing
/// into the prepared directories and returning the transformed manifest
/// records.
fn write_transformed(
    source: &DatasetManifest,
    dirs: &OutputDirs,
    hazy_gammas: &GammaTriple,
    gt_gammas: &GammaTriple,
) -> Result<Vec<PairRecord>, PipelineError> {
    source
        .records()
        .par_iter()
        .map(|record| {
            let out_hazy = dirs.hazy.join(file_name_of(&record.hazy_path));
            let out_gt = dirs.gt.join(file_name_of(&record.gt_path));
            let hazy = load_image(Path::new(&record.hazy_path))?;
            save_image(&gamma_apply(&hazy, hazy_gammas), &out_hazy)?;
            let gt = load_image(Path::new(&record.gt_path))?;
            save_image(&gamma_apply(&gt, gt_gammas), &out_gt)?;
            Ok(PairRecord {
                id: record.id.clone(),
                hazy_path: out_hazy.to_string_lossy().into_owned(),
                gt_path: out_gt.to_string_lossy().into_owned(),
                split: record.split,
            })
        })
        .collect()
}

/// Aligns `source` onto `target`, writing the transformed dataset under
/// `out_dir` and returning the report plus the new manifest.
pub fn align_dataset(
    source: &DatasetManifest,
    target: &DatasetManifest,
    out_dir: &Path,
    tol: f64,
) -> Result<(AlignmentReport, DatasetManifest), PipelineError> {
    // Solve everything before touching the filesystem.
    let source_gt_hist = dataset_histograms(&subset_paths(source, Subset::Gt))?;
    let source_hazy_hist = dataset_histograms(&subset_paths(source, Subset::Hazy))?;
    let target_gt = dataset_stats(&subset_paths(target, Subset::Gt))?;
    let target_hazy = dataset_stats(&subset_paths(target, Subset::Hazy))?;

    let (gt_gammas, gt_residual) = solve_subset("gt", &source_gt_hist, &target_gt, tol)?;
    let (hazy_gammas, hazy_residual) = solve_subset("hazy", &source_hazy_hist, &target_hazy, tol)?;

    let dirs = OutputDirs::prepare(out_dir)?;
    let result = (|| {
        let records = write_transformed(source, &dirs, &hazy_gammas, &gt_gammas)?;
        let aligned = DatasetManifest::new(format!("{}-aligned", source.name()), records)?;

        // Quantized residuals come from the files actually written.
        let after_gt = dataset_stats(&subset_paths(&aligned, Subset::Gt))?;
        let after_hazy = dataset_stats(&subset_paths(&aligned, Subset::Hazy))?;

        let report = AlignmentReport {
            tolerance: tol,
            gt: SubsetAlignment {
                gammas: gt_gammas,
                residual_quantized: mean_residuals(&after_gt, &target_gt),
                source_before: source_gt_hist.stats()?,
                source_after: after_gt,
                target: target_gt.clone(),
                residual_continuous: gt_residual,
            },
            hazy: SubsetAlignment {
                gammas: hazy_gammas,
                residual_quantized: mean_residuals(&after_hazy, &target_hazy),
                source_before: source_hazy_hist.stats()?,
                source_after: after_hazy,
                target: target_hazy.clone(),
                residual_continuous: hazy_residual,
            },
        };
        Ok((report, aligned))
    })();

    if result.is_err() {
        dirs.clean_up();
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::Split;
    use hazealign_core::ImageBuffer;

    fn constant_dataset(
        dir: &Path,
        name: &str,
        pairs: usize,
        hazy_value: u8,
        gt_value: u8,
    ) -> DatasetManifest {
        let hazy_dir = dir.join(name).join("hazy");
        let gt_dir = dir.join(name).join("gt");
        std::fs::create_dir_all(&hazy_dir).unwrap();
        std::fs::create_dir_all(&gt_dir).unwrap();
        let records = (1..=pairs)
            .map(|i| {
                let hazy_path = hazy_dir.join(format!("{i:02}.png"));
                let gt_path = gt_dir.join(format!("{i:02}.png"));
                save_image(
                    &ImageBuffer::filled(4, 4, [hazy_value; 3]).unwrap(),
                    &hazy_path,
                )
                .unwrap();
                save_image(&ImageBuffer::filled(4, 4, [gt_value; 3]).unwrap(), &gt_path).unwrap();
                PairRecord {
                    id: format!("{i:02}"),
                    hazy_path: hazy_path.to_string_lossy().into_owned(),
                    gt_path: gt_path.to_string_lossy().into_owned(),
                    split: Split::Unassigned,
                }
            })
            .collect();
        DatasetManifest::new(name, records).unwrap()
    }

    #[test]
    fn self_alignment_is_the_identity() {
        let tmp = tempfile::tempdir().unwrap();
        let ds = constant_dataset(tmp.path(), "src", 3, 40, 170);
        let out = tmp.path().join("out");
        let (report, aligned) = align_dataset(&ds, &ds, &out, 1e-6).unwrap();
        for g in [report.gt.gammas, report.hazy.gammas] {
            assert_eq!(g.as_array(), [1.0, 1.0, 1.0]);
        }
        for (orig, new) in ds.records().iter().zip(aligned.records()) {
            let a = load_image(Path::new(&orig.gt_path)).unwrap();
            let b = load_image(Path::new(&new.gt_path)).unwrap();
            assert_eq!(a, b);
            let a = load_image(Path::new(&orig.hazy_path)).unwrap();
            let b = load_image(Path::new(&new.hazy_path)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn constant_64_to_128_recovers_the_closed_form() {
        let tmp = tempfile::tempdir().unwrap();
        let source = constant_dataset(tmp.path(), "src", 2, 64, 64);
        let target = constant_dataset(tmp.path(), "tgt", 2, 128, 128);
        let out = tmp.path().join("out");
        let (report, _) = align_dataset(&source, &target, &out, 1e-9).unwrap();
        let closed = (64.0f64 / 255.0).ln() / (128.0f64 / 255.0).ln();
        for gamma in report
            .gt
            .gammas
            .as_array()
            .into_iter()
            .chain(report.hazy.gammas.as_array())
        {
            assert!((gamma - closed).abs() <= 1e-4, "gamma {gamma} vs {closed}");
        }
        // Constant 64 through the solved gamma lands exactly on 128
        // after rounding.
        assert_eq!(report.gt.source_after.means(), [128.0, 128.0, 128.0]);
    }

    #[test]
    fn unachievable_target_aborts_without_output() {
        let tmp = tempfile::tempdir().unwrap();
        // All-black source cannot reach a bright target: 0 is fixed.
        let source = constant_dataset(tmp.path(), "src", 2, 0, 0);
        let target = constant_dataset(tmp.path(), "tgt", 2, 100, 100);
        let out = tmp.path().join("out");
        let err = align_dataset(&source, &target, &out, 1e-6).unwrap_err();
        assert!(matches!(err, PipelineError::UnachievableChannel { .. }));
        assert!(!out.exists(), "failed run must not leave output behind");
    }

    #[test]
    fn non_empty_output_dir_is_refused() {
        let tmp = tempfile::tempdir().unwrap();
        let ds = constant_dataset(tmp.path(), "src", 1, 10, 10);
        let out = tmp.path().join("out");
        std::fs::create_dir_all(&out).unwrap();
        std::fs::write(out.join("occupied.txt"), "x").unwrap();
        let err = align_dataset(&ds, &ds, &out, 1e-6).unwrap_err();
        assert!(matches!(err, PipelineError::OutputDirNotEmpty(_)));
        // The pre-existing content is untouched.
        assert!(out.join("occupied.txt").exists());
    }

    #[test]
    fn unreadable_source_cleans_up_partial_output() {
        let tmp = tempfile::tempdir().unwrap();
        let ds = constant_dataset(tmp.path(), "src", 3, 64, 64);
        // One corrupt source image fails the run; nothing may remain.
        std::fs::write(Path::new(&ds.records()[1].gt_path), b"not a png").unwrap();
        let out = tmp.path().join("out");
        let err = align_dataset(&ds, &ds, &out, 1e-6).unwrap_err();
        assert!(matches!(err, PipelineError::Io(_)));
        assert!(!out.exists());
    }
}
