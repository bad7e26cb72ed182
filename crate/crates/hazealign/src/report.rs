//! Text report and CSV rendering.
//!
//! Report files are flat `key = value` lines. Every report begins with
//! the tool version, a UTC timestamp, and the fully resolved
//! configuration of the run (`config.*` keys), so an output file is
//! traceable to the exact invocation that produced it. Two runs with the
//! same flags produce byte-identical reports except for the
//! `timestamp` line.
//!
//! CSV outputs have fixed schemas and carry no header comments:
//! histogram CSVs are `bin,R,G,B` with 256 normalized-frequency rows,
//! metric CSVs are `id,psnr,ssim,ms_ssim` with one row per pair.

use std::fmt::Write as _;
use std::path::Path;

use chrono::{SecondsFormat, Utc};

use hazealign_core::stats::{RgbHistogram, RgbStats};

use crate::align::AlignmentReport;
use crate::error::PipelineError;
use crate::eval::MetricReport;

/// CSV header of histogram exports.
pub const HIST_CSV_HEADER: &str = "bin,R,G,B";
/// CSV header of metric exports.
pub const METRIC_CSV_HEADER: &str = "id,psnr,ssim,ms_ssim";

/// Provenance header shared by all report files: tool version,
/// timestamp, and the resolved configuration in insertion order.
#[derive(Debug, Clone)]
pub struct RunContext {
    timestamp: String,
    config: Vec<(String, String)>,
}

impl RunContext {
    pub fn new(subcommand: &str) -> Self {
        let mut ctx = Self {
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            config: Vec::new(),
        };
        ctx.push("subcommand", subcommand);
        ctx
    }

    /// Adds one resolved configuration entry.
    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.config.push((key.to_string(), value.to_string()));
    }

    pub fn with(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.push(key, value);
        self
    }

    /// The header lines, ending with a blank separator line.
    pub fn header(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tool = hazealign {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "timestamp = {}", self.timestamp);
        for (k, v) in &self.config {
            let _ = writeln!(out, "config.{k} = {v}");
        }
        out.push('\n');
        out
    }
}

fn push_stats_block(out: &mut String, label: &str, stats: &RgbStats) {
    for (tag, ch) in [("r", &stats.r), ("g", &stats.g), ("b", &stats.b)] {
        let _ = writeln!(out, "{label}.{tag}.mean = {}", ch.mean);
        let _ = writeln!(out, "{label}.{tag}.variance = {}", ch.variance);
        let _ = writeln!(out, "{label}.{tag}.pixel_count = {}", ch.pixel_count);
    }
}

/// Stats report: one block of mean/variance/count per section, followed
/// by the raw bin counts (`hist.<section>.<bin> = r g b`).
pub fn stats_report(ctx: &RunContext, sections: &[(&str, &RgbStats)]) -> String {
    let mut out = ctx.header();
    for (label, stats) in sections {
        push_stats_block(&mut out, label, stats);
    }
    for (label, stats) in sections {
        for bin in 0..256 {
            let _ = writeln!(
                out,
                "hist.{label}.{bin} = {} {} {}",
                stats.r.histogram.bins()[bin],
                stats.g.histogram.bins()[bin],
                stats.b.histogram.bins()[bin],
            );
        }
    }
    out
}

/// Alignment report: tolerance, per-subset gammas, the three stats
/// blocks (target, source before, source after), and both residuals.
pub fn alignment_report(ctx: &RunContext, report: &AlignmentReport) -> String {
    let mut out = ctx.header();
    let _ = writeln!(out, "tolerance = {}", report.tolerance);
    for (label, side) in [("gt", &report.gt), ("hazy", &report.hazy)] {
        let _ = writeln!(out, "{label}.gamma.r = {}", side.gammas.r());
        let _ = writeln!(out, "{label}.gamma.g = {}", side.gammas.g());
        let _ = writeln!(out, "{label}.gamma.b = {}", side.gammas.b());
        push_stats_block(&mut out, &format!("{label}.target"), &side.target);
        push_stats_block(&mut out, &format!("{label}.source_before"), &side.source_before);
        push_stats_block(&mut out, &format!("{label}.source_after"), &side.source_after);
        for (i, tag) in ["r", "g", "b"].into_iter().enumerate() {
            let _ = writeln!(
                out,
                "{label}.residual_continuous.{tag} = {}",
                side.residual_continuous[i]
            );
        }
        for (i, tag) in ["r", "g", "b"].into_iter().enumerate() {
            let _ = writeln!(
                out,
                "{label}.residual_quantized.{tag} = {}",
                side.residual_quantized[i]
            );
        }
    }
    out
}

/// Metric report text form: aggregates first, then per-pair values in
/// manifest order.
pub fn metric_report_text(ctx: &RunContext, report: &MetricReport) -> String {
    let mut out = ctx.header();
    let _ = writeln!(out, "pairs = {}", report.pairs.len());
    let _ = writeln!(out, "mean.psnr = {}", report.mean_psnr);
    let _ = writeln!(out, "mean.ssim = {}", report.mean_ssim);
    let _ = writeln!(out, "mean.ms_ssim = {}", report.mean_ms_ssim);
    for p in &report.pairs {
        let _ = writeln!(out, "pair.{}.psnr = {}", p.id, p.psnr);
        let _ = writeln!(out, "pair.{}.ssim = {}", p.id, p.ssim);
        let _ = writeln!(out, "pair.{}.ms_ssim = {}", p.id, p.ms_ssim);
        let _ = writeln!(out, "pair.{}.ms_ssim_scales = {}", p.id, p.ms_ssim_scales);
    }
    out
}

/// Metric report CSV form: `id,psnr,ssim,ms_ssim`, one row per pair.
pub fn metric_report_csv(report: &MetricReport) -> String {
    let mut out = String::from(METRIC_CSV_HEADER);
    out.push('\n');
    for p in &report.pairs {
        let _ = writeln!(out, "{},{},{},{}", p.id, p.psnr, p.ssim, p.ms_ssim);
    }
    out
}

/// Histogram CSV: 256 rows of per-channel normalized frequencies.
pub fn histogram_csv(hist: &RgbHistogram) -> String {
    let total = hist.total() as f64;
    let mut out = String::from(HIST_CSV_HEADER);
    out.push('\n');
    for bin in 0..256 {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            bin,
            hist.r.bins()[bin] as f64 / total,
            hist.g.bins()[bin] as f64 / total,
            hist.b.bins()[bin] as f64 / total,
        );
    }
    out
}

/// Writes a rendered report, creating parent directories as needed.
pub fn write_text_file(path: &Path, content: &str) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| PipelineError::WriteFile {
                path: parent.to_path_buf(),
                source,
            })?;
        }
    }
    std::fs::write(path, content).map_err(|source| PipelineError::WriteFile {
        path: path.to_path_buf(),
        source,
    })
}

/// Drops the `timestamp = …` line, for comparing reports across runs.
pub fn strip_timestamp(report: &str) -> String {
    report
        .lines()
        .filter(|l| !l.starts_with("timestamp = "))
        .collect::<Vec<_>>()
        .join("\n")
}
