//! Augmentation plan text format, for exact replay of a sampled plan.
//!
//! ```text
//! hazealign-augplan/1
//! seed\t42
//! crop_size\t256
//! op\tcrop\t17\t9\t256
//! op\trotate90
//! op\thflip
//! ```

use std::path::Path;

use hazealign_core::augment::{AugmentOp, AugmentPlan};

use crate::error::PipelineError;

/// Format tag on the first line of a plan file.
pub const PLAN_FORMAT: &str = "hazealign-augplan/1";

/// Renders a plan to its text form.
pub fn plan_to_string(plan: &AugmentPlan) -> String {
    let mut out = String::new();
    out.push_str(PLAN_FORMAT);
    out.push('\n');
    out.push_str(&format!("seed\t{}\n", plan.seed));
    out.push_str(&format!("crop_size\t{}\n", plan.crop_size));
    for op in &plan.ops {
        match *op {
            AugmentOp::Crop { x, y, size } => {
                out.push_str(&format!("op\tcrop\t{x}\t{y}\t{size}\n"));
            }
            AugmentOp::Rotate90 => out.push_str("op\trotate90\n"),
            AugmentOp::Rotate180 => out.push_str("op\trotate180\n"),
            AugmentOp::Rotate270 => out.push_str("op\trotate270\n"),
            AugmentOp::HFlip => out.push_str("op\thflip\n"),
            AugmentOp::VFlip => out.push_str("op\tvflip\n"),
            AugmentOp::Identity => out.push_str("op\tidentity\n"),
        }
    }
    out
}

/// Parses a plan file written by [`plan_to_string`].
pub fn read_plan(path: &Path) -> Result<AugmentPlan, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|source| PipelineError::ReadFile {
        path: path.to_path_buf(),
        source,
    })?;
    let err = |line: usize, message: String| PipelineError::PlanParse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first == PLAN_FORMAT => {}
        _ => return Err(err(1, format!("expected header {PLAN_FORMAT:?}"))),
    }

    let mut seed: Option<u64> = None;
    let mut crop_size: Option<u32> = None;
    let mut ops = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let line_no = idx + 1;
        match fields.as_slice() {
            ["seed", v] => {
                seed = Some(
                    v.parse()
                        .map_err(|e| err(line_no, format!("bad seed {v:?}: {e}")))?,
                );
            }
            ["crop_size", v] => {
                crop_size = Some(
                    v.parse()
                        .map_err(|e| err(line_no, format!("bad crop_size {v:?}: {e}")))?,
                );
            }
            ["op", "crop", x, y, size] => {
                let parse = |v: &str| -> Result<u32, PipelineError> {
                    v.parse()
                        .map_err(|e| err(line_no, format!("bad crop field {v:?}: {e}")))
                };
                ops.push(AugmentOp::Crop {
                    x: parse(x)?,
                    y: parse(y)?,
                    size: parse(size)?,
                });
            }
            ["op", "rotate90"] => ops.push(AugmentOp::Rotate90),
            ["op", "rotate180"] => ops.push(AugmentOp::Rotate180),
            ["op", "rotate270"] => ops.push(AugmentOp::Rotate270),
            ["op", "hflip"] => ops.push(AugmentOp::HFlip),
            ["op", "vflip"] => ops.push(AugmentOp::VFlip),
            ["op", "identity"] => ops.push(AugmentOp::Identity),
            _ => return Err(err(line_no, format!("unrecognized line {line:?}"))),
        }
    }

    let seed = seed.ok_or_else(|| err(0, "missing seed line".into()))?;
    let crop_size = crop_size.ok_or_else(|| err(0, "missing crop_size line".into()))?;
    Ok(AugmentPlan {
        seed,
        crop_size,
        ops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_round_trips() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("plan.txt");
        let plan = AugmentPlan::sample(42, 300, 300, 256).unwrap();
        std::fs::write(&path, plan_to_string(&plan)).unwrap();
        let back = read_plan(&path).unwrap();
        assert_eq!(back, plan);
    }

    #[test]
    fn malformed_plan_names_the_line() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("plan.txt");
        std::fs::write(&path, format!("{PLAN_FORMAT}\nseed\t1\ncrop_size\t8\nop\twat\n")).unwrap();
        match read_plan(&path).unwrap_err() {
            PipelineError::PlanParse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }
}
