//! Command-line interface: stats, align, transform, eval, hist,
//! augment-sample, and split subcommands.
//!
//! Flag parsing is clap's; every value with domain semantics (subset
//! selectors, split names, gamma triples, policies) is validated by the
//! runners so failures come out as one `error: …` line on stderr with a
//! nonzero exit status.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use hazealign_core::augment::{sample_pair_augment, AugmentPlan};
use hazealign_core::gamma::{gamma_apply, GammaTriple};
use hazealign_core::metrics::SsimParams;

use crate::align::align_dataset;
use crate::dataset::{dataset_histograms, dataset_stats, subset_paths, Subset};
use crate::error::PipelineError;
use crate::eval::evaluate;
use crate::io::{load_image, save_image};
use crate::manifest::{
    apply_split, read_manifest, scan_directory, write_manifest, DatasetManifest, Split,
    SplitPolicy,
};
use crate::plan::{plan_to_string, read_plan};
use crate::report::{
    alignment_report, histogram_csv, metric_report_csv, metric_report_text, stats_report,
    write_text_file, RunContext,
};

#[derive(Debug, Parser)]
#[command(
    name = "hazealign",
    version,
    about = "Align per-channel color distributions between paired hazy/clean image datasets"
)]
pub struct Cli {
    /// Worker threads for dataset operations (default: all cores).
    /// Results are identical for any thread count.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-channel mean/variance and histograms of a dataset subset.
    Stats(StatsArgs),
    /// Solve per-channel gammas and write a color-aligned copy of a
    /// source dataset.
    Align(AlignArgs),
    /// Apply a fixed gamma triple to a dataset.
    Transform(TransformArgs),
    /// PSNR/SSIM/MS-SSIM of predictions against ground truth.
    Eval(EvalArgs),
    /// Export normalized per-channel histograms as CSV.
    Hist(HistArgs),
    /// Sample (or replay) one augmentation and write the augmented pair.
    AugmentSample(AugmentSampleArgs),
    /// Assign train/test split tags to a manifest.
    Split(SplitArgs),
}

/// Dataset source: an existing manifest file, or a hazy/gt directory
/// pair scanned on the fly.
#[derive(Debug, Args)]
pub struct DatasetInput {
    /// Manifest file (hazealign-manifest/1).
    #[arg(long, conflicts_with_all = ["hazy_dir", "gt_dir"])]
    pub manifest: Option<PathBuf>,
    /// Directory of hazy PNGs, paired with --gt-dir by filename stem.
    #[arg(long, requires = "gt_dir")]
    pub hazy_dir: Option<PathBuf>,
    /// Directory of ground-truth PNGs.
    #[arg(long, requires = "hazy_dir")]
    pub gt_dir: Option<PathBuf>,
    /// Dataset name recorded when scanning directories.
    #[arg(long, default_value = "dataset")]
    pub name: String,
}

impl DatasetInput {
    fn resolve(&self) -> Result<DatasetManifest, PipelineError> {
        match (&self.manifest, &self.hazy_dir, &self.gt_dir) {
            (Some(path), None, None) => Ok(read_manifest(path)?),
            (None, Some(hazy), Some(gt)) => Ok(scan_directory(hazy, gt, self.name.clone())?),
            _ => Err(PipelineError::usage(
                "provide either --manifest or both --hazy-dir and --gt-dir",
            )),
        }
    }

    fn describe(&self, ctx: &mut RunContext) {
        if let Some(m) = &self.manifest {
            ctx.push("manifest", m.display());
        }
        if let Some(d) = &self.hazy_dir {
            ctx.push("hazy_dir", d.display());
            ctx.push("name", &self.name);
        }
        if let Some(d) = &self.gt_dir {
            ctx.push("gt_dir", d.display());
        }
    }
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: DatasetInput,
    /// Images to aggregate: gt, hazy, or both (both reports the two
    /// subsets separately).
    #[arg(long, default_value = "gt")]
    pub subset: String,
    /// Report file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// Manifest of the dataset to transform.
    #[arg(long)]
    pub source: PathBuf,
    /// Manifest of the dataset whose channel means are the targets.
    #[arg(long)]
    pub target: PathBuf,
    /// Output directory (must not exist or be empty); receives
    /// hazy/, gt/, manifest.tsv, and alignment_report.txt.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Solver tolerance on the continuous mean residual, in intensity
    /// levels.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Manifest of the dataset to transform.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Gamma triple as R,G,B (e.g. 2.0,1.0,1.0).
    #[arg(long)]
    pub gamma: String,
    /// Images to transform; the other subset is copied unchanged.
    #[arg(long, default_value = "both")]
    pub subset: String,
    /// Output directory (must not exist or be empty).
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of predictions named <pair id>.png.
    #[arg(long)]
    pub pred_dir: PathBuf,
    /// Manifest providing ground-truth paths.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Record filter: all, train, test, val, or unassigned.
    #[arg(long, default_value = "all")]
    pub split: String,
    /// Text report file to write.
    #[arg(long)]
    pub out_text: PathBuf,
    /// CSV file to write (id,psnr,ssim,ms_ssim).
    #[arg(long)]
    pub out_csv: PathBuf,
}

#[derive(Debug, Args)]
pub struct HistArgs {
    #[command(flatten)]
    pub input: DatasetInput,
    /// Images to pool: gt, hazy, or both (both pools the union).
    #[arg(long, default_value = "gt")]
    pub subset: String,
    /// CSV file to write (bin,R,G,B normalized frequencies).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AugmentSampleArgs {
    /// Hazy image of the pair.
    #[arg(long)]
    pub hazy: PathBuf,
    /// Ground-truth image of the pair.
    #[arg(long)]
    pub gt: PathBuf,
    /// Seed for sampling a fresh plan (required unless --plan is given).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Crop size in pixels.
    #[arg(long, default_value_t = 256)]
    pub crop_size: u32,
    /// Replay a previously written plan file instead of sampling.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Output directory; receives hazy/, gt/, and plan.txt.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub input: DatasetInput,
    /// Policy: nh23-comparison, nh23-ablation, nh21, official-split,
    /// or custom.
    #[arg(long)]
    pub policy: String,
    /// Split list file for official-split (id<TAB>split per line).
    #[arg(long)]
    pub list_file: Option<PathBuf>,
    /// Train head count for the custom policy.
    #[arg(long)]
    pub train: Option<usize>,
    /// Test head count for the custom policy.
    #[arg(long)]
    pub test: Option<usize>,
    /// Manifest file to write.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_subset(s: &str) -> Result<Subset, PipelineError> {
    Subset::from_str(s).map_err(PipelineError::usage)
}

fn parse_gamma_triple(s: &str) -> Result<GammaTriple, PipelineError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(PipelineError::usage(format!(
            "--gamma expects three comma-separated values, got {s:?}"
        )));
    }
    let mut values = [0.0f64; 3];
    for (v, part) in values.iter_mut().zip(&parts) {
        *v = part
            .trim()
            .parse()
            .map_err(|e| PipelineError::usage(format!("bad gamma component {part:?}: {e}")))?;
    }
    Ok(GammaTriple::new(values[0], values[1], values[2])?)
}

fn new_context(command: &str, threads: Option<usize>) -> RunContext {
    let mut ctx = RunContext::new(command);
    match threads {
        Some(n) => ctx.push("threads", n),
        None => ctx.push("threads", "auto"),
    }
    ctx
}

/// Runs one parsed invocation.
pub fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Stats(args) => run_stats(args, cli.threads),
        Command::Align(args) => run_align(args, cli.threads),
        Command::Transform(args) => run_transform(args, cli.threads),
        Command::Eval(args) => run_eval(args, cli.threads),
        Command::Hist(args) => run_hist(args, cli.threads),
        Command::AugmentSample(args) => run_augment_sample(args, cli.threads),
        Command::Split(args) => run_split(args, cli.threads),
    }
}

fn run_stats(args: StatsArgs, threads: Option<usize>) -> Result<(), PipelineError> {
    let mut ctx = new_context("stats", threads);
    args.input.describe(&mut ctx);
    ctx.push("subset", &args.subset);
    ctx.push("out", args.out.display());

    let subset = parse_subset(&args.subset)?;
    let manifest = args.input.resolve()?;

    let mut owned = Vec::new();
    match subset {
        Subset::Both => {
            owned.push(("gt", dataset_stats(&subset_paths(&manifest, Subset::Gt))?));
            owned.push((
                "hazy",
                dataset_stats(&subset_paths(&manifest, Subset::Hazy))?,
            ));
        }
        one => owned.push((one.as_str(), dataset_stats(&subset_paths(&manifest, one))?)),
    }
    let sections: Vec<(&str, &hazealign_core::RgbStats)> =
        owned.iter().map(|(l, s)| (*l, s)).collect();
    write_text_file(&args.out, &stats_report(&ctx, &sections))
}

fn run_align(args: AlignArgs, threads: Option<usize>) -> Result<(), PipelineError> {
    let mut ctx = new_context("align", threads);
    ctx.push("source", args.source.display());
    ctx.push("target", args.target.display());
    ctx.push("out_dir", args.out_dir.display());
    ctx.push("tol", args.tol);

    let source = read_manifest(&args.source)?;
    let target = read_manifest(&args.target)?;
    let (report, aligned) = align_dataset(&source, &target, &args.out_dir, args.tol)?;

    let finish = (|| -> Result<(), PipelineError> {
        write_manifest(&aligned, &args.out_dir.join("manifest.tsv"))?;
        write_text_file(
            &args.out_dir.join("alignment_report.txt"),
            &alignment_report(&ctx, &report),
        )?;
        Ok(())
    })();
    if finish.is_err() {
        // The directory was empty before this run, so it holds nothing
        // but our partial output.
        let _ = std::fs::remove_dir_all(&args.out_dir);
        return finish;
    }

    let g = report.gt.gammas;
    println!("gt gammas: {} {} {}", g.r(), g.g(), g.b());
    let g = report.hazy.gammas;
    println!("hazy gammas: {} {} {}", g.r(), g.g(), g.b());
    Ok(())
}

fn run_transform(args: TransformArgs, threads: Option<usize>) -> Result<(), PipelineError> {
    let mut ctx = new_context("transform", threads);
    ctx.push("manifest", args.manifest.display());
    ctx.push("gamma", &args.gamma);
    ctx.push("subset", &args.subset);
    ctx.push("out_dir", args.out_dir.display());

    let subset = parse_subset(&args.subset)?;
    let gammas = parse_gamma_triple(&args.gamma)?;
    let manifest = read_manifest(&args.manifest)?;

    let dirs = crate::align::OutputDirs::prepare(&args.out_dir)?;
    let result = (|| -> Result<(), PipelineError> {
        use rayon::prelude::*;
        let records: Vec<crate::manifest::PairRecord> = manifest
            .records()
            .par_iter()
            .map(|record| {
                let out_hazy = dirs.hazy.join(file_name_of(&record.hazy_path));
                let out_gt = dirs.gt.join(file_name_of(&record.gt_path));
                let transform_hazy = matches!(subset, Subset::Hazy | Subset::Both);
                let transform_gt = matches!(subset, Subset::Gt | Subset::Both);
                copy_or_transform(&record.hazy_path, &out_hazy, transform_hazy, &gammas)?;
                copy_or_transform(&record.gt_path, &out_gt, transform_gt, &gammas)?;
                Ok(crate::manifest::PairRecord {
                    id: record.id.clone(),
                    hazy_path: out_hazy.to_string_lossy().into_owned(),
                    gt_path: out_gt.to_string_lossy().into_owned(),
                    split: record.split,
                })
            })
            .collect::<Result<_, PipelineError>>()?;
        let transformed =
            DatasetManifest::new(format!("{}-transformed", manifest.name()), records)?;
        write_manifest(&transformed, &args.out_dir.join("manifest.tsv"))?;

        let mut report = ctx.header();
        report.push_str(&format!("gamma.r = {}\n", gammas.r()));
        report.push_str(&format!("gamma.g = {}\n", gammas.g()));
        report.push_str(&format!("gamma.b = {}\n", gammas.b()));
        report.push_str(&format!("pairs = {}\n", transformed.len()));
        write_text_file(&args.out_dir.join("transform_report.txt"), &report)
    })();
    if result.is_err() {
        dirs.clean_up();
    }
    result
}

fn copy_or_transform(
    src: &str,
    dst: &Path,
    transform: bool,
    gammas: &GammaTriple,
) -> Result<(), PipelineError> {
    if transform {
        let img = load_image(Path::new(src))?;
        save_image(&gamma_apply(&img, gammas), dst)
    } else {
        let img = load_image(Path::new(src))?;
        save_image(&img, dst)
    }
    .map_err(PipelineError::from)
}

fn file_name_of(path_str: &str) -> String {
    Path::new(path_str)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path_str.to_string())
}

fn run_eval(args: EvalArgs, threads: Option<usize>) -> Result<(), PipelineError> {
    let mut ctx = new_context("eval", threads);
    ctx.push("pred_dir", args.pred_dir.display());
    ctx.push("manifest", args.manifest.display());
    ctx.push("split", &args.split);
    ctx.push("out_text", args.out_text.display());
    ctx.push("out_csv", args.out_csv.display());
    let params = SsimParams::default();
    ctx.push("ssim.window_size", params.window_size());
    ctx.push("ssim.sigma", params.sigma());
    ctx.push("ssim.border", "valid");

    let split = match args.split.as_str() {
        "all" => None,
        other => Some(Split::from_str(other).map_err(PipelineError::usage)?),
    };
    let manifest = read_manifest(&args.manifest)?;
    let report = evaluate(&args.pred_dir, &manifest, split, &params)?;

    write_text_file(&args.out_text, &metric_report_text(&ctx, &report))?;
    write_text_file(&args.out_csv, &metric_report_csv(&report))?;
    println!(
        "pairs: {}  mean psnr: {}  mean ssim: {}  mean ms-ssim: {}",
        report.pairs.len(),
        report.mean_psnr,
        report.mean_ssim,
        report.mean_ms_ssim
    );
    Ok(())
}

fn run_hist(args: HistArgs, threads: Option<usize>) -> Result<(), PipelineError> {
    let mut ctx = new_context("hist", threads);
    args.input.describe(&mut ctx);
    ctx.push("subset", &args.subset);
    ctx.push("out", args.out.display());

    let subset = parse_subset(&args.subset)?;
    let manifest = args.input.resolve()?;
    let hist = dataset_histograms(&subset_paths(&manifest, subset))?;
    write_text_file(&args.out, &histogram_csv(&hist))?;
    // The CSV schema is fixed, so the configuration echo goes to stdout.
    print!("{}", ctx.header());
    Ok(())
}

fn run_augment_sample(args: AugmentSampleArgs, threads: Option<usize>) -> Result<(), PipelineError> {
    let mut ctx = new_context("augment-sample", threads);
    ctx.push("hazy", args.hazy.display());
    ctx.push("gt", args.gt.display());
    ctx.push("crop_size", args.crop_size);
    ctx.push("out_dir", args.out_dir.display());

    let hazy = load_image(&args.hazy)?;
    let gt = load_image(&args.gt)?;

    let plan = match &args.plan {
        Some(path) => {
            ctx.push("plan", path.display());
            read_plan(path)?
        }
        None => {
            let seed = args.seed.ok_or_else(|| {
                PipelineError::usage("either --seed or --plan is required")
            })?;
            ctx.push("seed", seed);
            AugmentPlan::sample(seed, hazy.width(), hazy.height(), args.crop_size)?
        }
    };

    let (out_hazy, out_gt) = sample_pair_augment(&hazy, &gt, &plan)?;
    save_image(&out_hazy, &args.out_dir.join("hazy").join(file_name_of(
        &args.hazy.to_string_lossy(),
    )))?;
    save_image(&out_gt, &args.out_dir.join("gt").join(file_name_of(
        &args.gt.to_string_lossy(),
    )))?;
    write_text_file(&args.out_dir.join("plan.txt"), &plan_to_string(&plan))?;
    print!("{}", ctx.header());
    Ok(())
}

fn run_split(args: SplitArgs, threads: Option<usize>) -> Result<(), PipelineError> {
    let mut ctx = new_context("split", threads);
    args.input.describe(&mut ctx);
    ctx.push("policy", &args.policy);
    if let Some(list) = &args.list_file {
        ctx.push("list_file", list.display());
    }
    if let Some(train) = args.train {
        ctx.push("train", train);
    }
    if let Some(test) = args.test {
        ctx.push("test", test);
    }
    ctx.push("out", args.out.display());

    let policy = match args.policy.as_str() {
        "nh23-comparison" => SplitPolicy::Nh23Comparison,
        "nh23-ablation" => SplitPolicy::Nh23Ablation,
        "nh21" => SplitPolicy::Nh21,
        "official-split" => {
            let list = args.list_file.clone().ok_or_else(|| {
                PipelineError::usage("official-split requires --list-file")
            })?;
            SplitPolicy::OfficialSplit(list)
        }
        "custom" => {
            let (train, test) = match (args.train, args.test) {
                (Some(train), Some(test)) => (train, test),
                _ => {
                    return Err(PipelineError::usage(
                        "custom policy requires --train and --test",
                    ))
                }
            };
            SplitPolicy::Custom { train, test }
        }
        other => {
            return Err(crate::manifest::ManifestError::UnknownPolicy(other.to_string()).into())
        }
    };

    let manifest = args.input.resolve()?;
    let (tagged, warnings) = apply_split(&manifest, &policy)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    write_manifest(&tagged, &args.out)?;
    print!("{}", ctx.header());
    println!(
        "records: {} train: {} test: {} val: {} unassigned: {}",
        tagged.len(),
        tagged.with_split(Split::Train).count(),
        tagged.with_split(Split::Test).count(),
        tagged.with_split(Split::Val).count(),
        tagged.with_split(Split::Unassigned).count(),
    );
    Ok(())
}
