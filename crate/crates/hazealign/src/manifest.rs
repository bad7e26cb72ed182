//! Paired-dataset manifests: ingestion, split policies, persistence.
//!
//! A manifest pairs hazy and ground-truth files by filename stem and
//! carries one split tag per pair. On disk it is a tab-separated text
//! file: a header line `hazealign-manifest/1<TAB><dataset name>`
//! followed by one `id<TAB>hazy_path<TAB>gt_path<TAB>split` line per
//! record. Record order is preserved bit-exactly across round trips;
//! freshly scanned directories are ordered by natural (numeric-aware)
//! stem comparison, so `1, 2, 10` rather than `1, 10, 2`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Format tag written as the first header field.
pub const MANIFEST_FORMAT: &str = "hazealign-manifest/1";

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("cannot read directory {path}: {source}")]
    ReadDir {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("no PNG files found under {path}")]
    EmptyDirectory { path: PathBuf },
    #[error("unpaired stems: {0}")]
    UnmatchedStems(String),
    #[error("manifest has no records")]
    EmptyManifest,
    #[error("duplicate record id {0:?}")]
    DuplicateId(String),
    #[error("field {0:?} contains a tab or newline")]
    InvalidField(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("unknown split policy {0:?} (expected nh23-comparison, nh23-ablation, nh21, official-split, or custom)")]
    UnknownPolicy(String),
    #[error("head counts {train}+{test} exceed the {available} available records")]
    HeadCountExceeds {
        train: usize,
        test: usize,
        available: usize,
    },
    #[error("split list {path}:{line}: id {id:?} is not in the manifest")]
    UnknownListId {
        path: PathBuf,
        line: usize,
        id: String,
    },
    #[error("cannot read dimensions of {path}: {message}")]
    UnreadableDimensions { path: PathBuf, message: String },
    #[error(
        "pair {id:?}: hazy is {hazy_width}x{hazy_height} but gt is {gt_width}x{gt_height}"
    )]
    PairDimensionMismatch {
        id: String,
        hazy_width: u32,
        hazy_height: u32,
        gt_width: u32,
        gt_height: u32,
    },
}

/// Split tag of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
    Val,
    Unassigned,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::Val => "val",
            Split::Unassigned => "unassigned",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            "val" => Ok(Split::Val),
            "unassigned" => Ok(Split::Unassigned),
            other => Err(format!(
                "unknown split {other:?} (expected train, test, val, or unassigned)"
            )),
        }
    }
}

/// One hazy/ground-truth pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairRecord {
    pub id: String,
    pub hazy_path: String,
    pub gt_path: String,
    pub split: Split,
}

/// An ordered, non-empty collection of pair records with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    name: String,
    records: Vec<PairRecord>,
}

impl DatasetManifest {
    pub fn new(name: impl Into<String>, records: Vec<PairRecord>) -> Result<Self, ManifestError> {
        let name = name.into();
        if records.is_empty() {
            return Err(ManifestError::EmptyManifest);
        }
        check_field(&name)?;
        let mut seen = std::collections::HashSet::new();
        for r in &records {
            for field in [&r.id, &r.hazy_path, &r.gt_path] {
                check_field(field)?;
            }
            if !seen.insert(r.id.as_str()) {
                return Err(ManifestError::DuplicateId(r.id.clone()));
            }
        }
        Ok(Self { name, records })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn records(&self) -> &[PairRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records carrying the given split tag.
    pub fn with_split(&self, split: Split) -> impl Iterator<Item = &PairRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }
}

fn check_field(field: &str) -> Result<(), ManifestError> {
    if field.contains('\t') || field.contains('\n') || field.contains('\r') {
        return Err(ManifestError::InvalidField(field.to_string()));
    }
    Ok(())
}

/// A natural-order sort key: digit runs compare numerically, text runs
/// lexicographically, with the raw string as the final tiebreak.
#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Segment {
    Number(u128),
    Text(String),
}

fn natural_key(s: &str) -> (Vec<Segment>, String) {
    let mut segments = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_ascii_digit() {
            let mut value: u128 = 0;
            while let Some(&d) = chars.peek() {
                if let Some(v) = d.to_digit(10) {
                    value = value.saturating_mul(10).saturating_add(v as u128);
                    chars.next();
                } else {
                    break;
                }
            }
            segments.push(Segment::Number(value));
        } else {
            let mut text = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_digit() {
                    break;
                }
                text.push(d);
                chars.next();
            }
            segments.push(Segment::Text(text));
        }
    }
    (segments, s.to_string())
}

fn compare_natural(a: &str, b: &str) -> Ordering {
    natural_key(a).cmp(&natural_key(b))
}

fn png_stems(dir: &Path) -> Result<BTreeMap<String, PathBuf>, ManifestError> {
    let entries = fs::read_dir(dir).map_err(|source| ManifestError::ReadDir {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut stems = BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(|source| ManifestError::ReadDir {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let is_png = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("png"))
            .unwrap_or(false);
        if !is_png {
            continue;
        }
        if let Some(stem) = path.file_stem() {
            stems.insert(stem.to_string_lossy().into_owned(), path);
        }
    }
    if stems.is_empty() {
        return Err(ManifestError::EmptyDirectory {
            path: dir.to_path_buf(),
        });
    }
    Ok(stems)
}

fn png_dimensions(path: &Path) -> Result<(u32, u32), ManifestError> {
    image::ImageReader::open(path)
        .map_err(|e| e.to_string())
        .and_then(|r| r.into_dimensions().map_err(|e| e.to_string()))
        .map_err(|message| ManifestError::UnreadableDimensions {
            path: path.to_path_buf(),
            message,
        })
}

/// Pairs the PNG files of two directories by filename stem.
///
/// Every stem must appear in both directories and each pair must have
/// equal dimensions (checked from the PNG headers); records come out in
/// natural stem order with split `unassigned`.
pub fn scan_directory(
    hazy_dir: &Path,
    gt_dir: &Path,
    name: impl Into<String>,
) -> Result<DatasetManifest, ManifestError> {
    let hazy = png_stems(hazy_dir)?;
    let gt = png_stems(gt_dir)?;

    let mut unmatched = Vec::new();
    for stem in hazy.keys() {
        if !gt.contains_key(stem) {
            unmatched.push(format!("{stem:?} has no ground-truth file"));
        }
    }
    for stem in gt.keys() {
        if !hazy.contains_key(stem) {
            unmatched.push(format!("{stem:?} has no hazy file"));
        }
    }
    if !unmatched.is_empty() {
        unmatched.sort();
        return Err(ManifestError::UnmatchedStems(unmatched.join("; ")));
    }

    let mut stems: Vec<&String> = hazy.keys().collect();
    stems.sort_by(|a, b| compare_natural(a, b));

    let mut records = Vec::with_capacity(stems.len());
    for stem in stems {
        let (hw, hh) = png_dimensions(&hazy[stem])?;
        let (gw, gh) = png_dimensions(&gt[stem])?;
        if (hw, hh) != (gw, gh) {
            return Err(ManifestError::PairDimensionMismatch {
                id: stem.clone(),
                hazy_width: hw,
                hazy_height: hh,
                gt_width: gw,
                gt_height: gh,
            });
        }
        records.push(PairRecord {
            id: stem.clone(),
            hazy_path: hazy[stem].to_string_lossy().into_owned(),
            gt_path: gt[stem].to_string_lossy().into_owned(),
            split: Split::Unassigned,
        });
    }
    DatasetManifest::new(name, records)
}

/// A split assignment policy over record order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitPolicy {
    /// First 35 train, remainder test (expects 40 records).
    Nh23Comparison,
    /// Everything train (expects 40 records).
    Nh23Ablation,
    /// First 20 train, next 5 test; surplus stays unassigned
    /// (expects 25 records).
    Nh21,
    /// Explicit `id<TAB>split` list file; unlisted records stay
    /// unassigned.
    OfficialSplit(PathBuf),
    /// First `train` records train, next `test` records test.
    Custom { train: usize, test: usize },
}

impl SplitPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            SplitPolicy::Nh23Comparison => "nh23-comparison",
            SplitPolicy::Nh23Ablation => "nh23-ablation",
            SplitPolicy::Nh21 => "nh21",
            SplitPolicy::OfficialSplit(_) => "official-split",
            SplitPolicy::Custom { .. } => "custom",
        }
    }
}

fn head_split(records: &mut [PairRecord], train: usize, test: usize) {
    for (i, r) in records.iter_mut().enumerate() {
        r.split = if i < train {
            Split::Train
        } else if i < train + test {
            Split::Test
        } else {
            Split::Unassigned
        };
    }
}

/// Applies a split policy, returning the re-tagged manifest and any
/// warnings about deviations from the policy's expected record count.
pub fn apply_split(
    manifest: &DatasetManifest,
    policy: &SplitPolicy,
) -> Result<(DatasetManifest, Vec<String>), ManifestError> {
    let mut records = manifest.records().to_vec();
    let n = records.len();
    let mut warnings = Vec::new();

    match policy {
        SplitPolicy::Nh23Comparison => {
            if n == 40 {
                head_split(&mut records, 35, 5);
            } else {
                let train = ((n as f64) * 35.0 / 40.0).round() as usize;
                warnings.push(format!(
                    "nh23-comparison expects 40 records, got {n}; splitting proportionally {train}/{}",
                    n - train
                ));
                head_split(&mut records, train, n - train);
            }
        }
        SplitPolicy::Nh23Ablation => {
            if n != 40 {
                warnings.push(format!("nh23-ablation expects 40 records, got {n}"));
            }
            head_split(&mut records, n, 0);
        }
        SplitPolicy::Nh21 => {
            if n >= 25 {
                if n > 25 {
                    warnings.push(format!(
                        "nh21 expects 25 records, got {n}; {} surplus records left unassigned",
                        n - 25
                    ));
                }
                head_split(&mut records, 20, 5);
            } else {
                let train = ((n as f64) * 20.0 / 25.0).round() as usize;
                warnings.push(format!(
                    "nh21 expects 25 records, got {n}; splitting proportionally {train}/{}",
                    n - train
                ));
                head_split(&mut records, train, n - train);
            }
        }
        SplitPolicy::Custom { train, test } => {
            if train + test > n {
                return Err(ManifestError::HeadCountExceeds {
                    train: *train,
                    test: *test,
                    available: n,
                });
            }
            head_split(&mut records, *train, *test);
        }
        SplitPolicy::OfficialSplit(list_path) => {
            let text = fs::read_to_string(list_path).map_err(|source| ManifestError::Read {
                path: list_path.clone(),
                source,
            })?;
            let mut assignment: BTreeMap<String, Split> = BTreeMap::new();
            for (idx, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let mut parts = line.split('\t');
                let (id, split_str) = match (parts.next(), parts.next(), parts.next()) {
                    (Some(id), Some(split), None) => (id, split),
                    _ => {
                        return Err(ManifestError::Parse {
                            path: list_path.clone(),
                            line: idx + 1,
                            message: "expected two tab-separated fields: id, split".into(),
                        })
                    }
                };
                let split = Split::from_str(split_str).map_err(|message| ManifestError::Parse {
                    path: list_path.clone(),
                    line: idx + 1,
                    message,
                })?;
                if !records.iter().any(|r| r.id == id) {
                    return Err(ManifestError::UnknownListId {
                        path: list_path.clone(),
                        line: idx + 1,
                        id: id.to_string(),
                    });
                }
                assignment.insert(id.to_string(), split);
            }
            for r in &mut records {
                r.split = assignment.get(&r.id).copied().unwrap_or(Split::Unassigned);
            }
        }
    }

    let tagged = DatasetManifest::new(manifest.name(), records)?;
    Ok((tagged, warnings))
}

/// Serializes a manifest to its tab-separated text form.
pub fn write_manifest(manifest: &DatasetManifest, path: &Path) -> Result<(), ManifestError> {
    let mut out = String::new();
    out.push_str(MANIFEST_FORMAT);
    out.push('\t');
    out.push_str(manifest.name());
    out.push('\n');
    for r in manifest.records() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            r.id, r.hazy_path, r.gt_path, r.split
        ));
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|source| ManifestError::Write {
                path: path.to_path_buf(),
                source,
            })?;
        }
    }
    fs::write(path, out).map_err(|source| ManifestError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a manifest file, preserving record order bit-exactly.
pub fn read_manifest(path: &Path) -> Result<DatasetManifest, ManifestError> {
    let text = fs::read_to_string(path).map_err(|source| ManifestError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| ManifestError::Parse {
        path: path.to_path_buf(),
        line: 1,
        message: "empty file".into(),
    })?;
    let name = match header.split_once('\t') {
        Some((tag, name)) if tag == MANIFEST_FORMAT => name.to_string(),
        _ => {
            return Err(ManifestError::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("expected header starting with {MANIFEST_FORMAT:?}"),
            })
        }
    };

    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(ManifestError::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!(
                    "expected 4 tab-separated fields (id, hazy_path, gt_path, split), got {}",
                    fields.len()
                ),
            });
        }
        let split = Split::from_str(fields[3]).map_err(|message| ManifestError::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        })?;
        records.push(PairRecord {
            id: fields[0].to_string(),
            hazy_path: fields[1].to_string(),
            gt_path: fields[2].to_string(),
            split,
        });
    }
    DatasetManifest::new(name, records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, split: Split) -> PairRecord {
        PairRecord {
            id: id.to_string(),
            hazy_path: format!("hazy/{id}.png"),
            gt_path: format!("gt/{id}.png"),
            split,
        }
    }

    fn manifest_of(n: usize) -> DatasetManifest {
        let records = (1..=n)
            .map(|i| record(&format!("{i:02}"), Split::Unassigned))
            .collect();
        DatasetManifest::new("synthetic", records).unwrap()
    }

    fn touch_png(dir: &Path, stem: &str) {
        touch_png_sized(dir, stem, 2, 2);
    }

    fn touch_png_sized(dir: &Path, stem: &str, w: u32, h: u32) {
        crate::io::save_image(
            &hazealign_core::ImageBuffer::filled(w, h, [1, 2, 3]).unwrap(),
            &dir.join(format!("{stem}.png")),
        )
        .unwrap();
    }

    #[test]
    fn scan_pairs_by_stem_in_numeric_order() {
        let tmp = tempfile::tempdir().unwrap();
        let hazy = tmp.path().join("hazy");
        let gt = tmp.path().join("gt");
        std::fs::create_dir_all(&hazy).unwrap();
        std::fs::create_dir_all(&gt).unwrap();
        for stem in ["2", "10", "1"] {
            touch_png(&hazy, stem);
            touch_png(&gt, stem);
        }
        let m = scan_directory(&hazy, &gt, "ds").unwrap();
        let ids: Vec<&str> = m.records().iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, vec!["1", "2", "10"]);
        assert!(m.records().iter().all(|r| r.split == Split::Unassigned));
    }

    #[test]
    fn scan_rejects_unmatched_stems() {
        let tmp = tempfile::tempdir().unwrap();
        let hazy = tmp.path().join("hazy");
        let gt = tmp.path().join("gt");
        std::fs::create_dir_all(&hazy).unwrap();
        std::fs::create_dir_all(&gt).unwrap();
        for stem in ["01", "02", "03", "04", "05"] {
            touch_png(&hazy, stem);
        }
        for stem in ["01", "02", "03", "04"] {
            touch_png(&gt, stem);
        }
        let err = scan_directory(&hazy, &gt, "ds").unwrap_err();
        match err {
            ManifestError::UnmatchedStems(msg) => assert!(msg.contains("05"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scan_rejects_mismatched_pair_dimensions() {
        let tmp = tempfile::tempdir().unwrap();
        let hazy = tmp.path().join("hazy");
        let gt = tmp.path().join("gt");
        std::fs::create_dir_all(&hazy).unwrap();
        std::fs::create_dir_all(&gt).unwrap();
        touch_png_sized(&hazy, "01", 4, 4);
        touch_png_sized(&gt, "01", 4, 5);
        let err = scan_directory(&hazy, &gt, "ds").unwrap_err();
        assert!(matches!(
            err,
            ManifestError::PairDimensionMismatch { gt_height: 5, .. }
        ));
    }

    #[test]
    fn scan_rejects_empty_directories() {
        let tmp = tempfile::tempdir().unwrap();
        let hazy = tmp.path().join("hazy");
        let gt = tmp.path().join("gt");
        std::fs::create_dir_all(&hazy).unwrap();
        std::fs::create_dir_all(&gt).unwrap();
        assert!(matches!(
            scan_directory(&hazy, &gt, "ds").unwrap_err(),
            ManifestError::EmptyDirectory { .. }
        ));
    }

    #[test]
    fn natural_order_handles_mixed_stems() {
        let mut stems = vec!["img10", "img2", "img1", "extra"];
        stems.sort_by(|a, b| compare_natural(a, b));
        assert_eq!(stems, vec!["extra", "img1", "img2", "img10"]);
    }

    #[test]
    fn nh23_comparison_splits_35_5() {
        let (m, warnings) = apply_split(&manifest_of(40), &SplitPolicy::Nh23Comparison).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(m.with_split(Split::Train).count(), 35);
        assert_eq!(m.with_split(Split::Test).count(), 5);
        // First 35 are train, in order.
        assert!(m.records()[..35].iter().all(|r| r.split == Split::Train));
        assert!(m.records()[35..].iter().all(|r| r.split == Split::Test));
    }

    #[test]
    fn nh23_ablation_uses_everything_for_training() {
        let (m, warnings) = apply_split(&manifest_of(40), &SplitPolicy::Nh23Ablation).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(m.with_split(Split::Train).count(), 40);
        assert_eq!(m.with_split(Split::Test).count(), 0);
    }

    #[test]
    fn nh21_splits_20_5() {
        let (m, warnings) = apply_split(&manifest_of(25), &SplitPolicy::Nh21).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(m.with_split(Split::Train).count(), 20);
        assert_eq!(m.with_split(Split::Test).count(), 5);
    }

    #[test]
    fn nh21_flags_surplus_records() {
        let (m, warnings) = apply_split(&manifest_of(30), &SplitPolicy::Nh21).unwrap();
        assert_eq!(warnings.len(), 1);
        assert_eq!(m.with_split(Split::Train).count(), 20);
        assert_eq!(m.with_split(Split::Test).count(), 5);
        assert_eq!(m.with_split(Split::Unassigned).count(), 5);
    }

    #[test]
    fn unexpected_count_splits_proportionally_with_warning() {
        let (m, warnings) = apply_split(&manifest_of(20), &SplitPolicy::Nh23Comparison).unwrap();
        assert_eq!(warnings.len(), 1);
        // round(20·35/40) = 18 train, 2 test.
        assert_eq!(m.with_split(Split::Train).count(), 18);
        assert_eq!(m.with_split(Split::Test).count(), 2);
    }

    #[test]
    fn custom_head_counts_are_bounded() {
        let err = apply_split(
            &manifest_of(10),
            &SplitPolicy::Custom { train: 8, test: 3 },
        )
        .unwrap_err();
        assert!(matches!(err, ManifestError::HeadCountExceeds { .. }));
        let (m, _) = apply_split(&manifest_of(10), &SplitPolicy::Custom { train: 0, test: 0 })
            .unwrap();
        assert_eq!(m.with_split(Split::Unassigned).count(), 10);
    }

    #[test]
    fn reapplying_a_policy_is_idempotent() {
        let (once, _) = apply_split(&manifest_of(40), &SplitPolicy::Nh23Comparison).unwrap();
        let (twice, _) = apply_split(&once, &SplitPolicy::Nh23Comparison).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn official_split_list_is_passed_through() {
        let tmp = tempfile::tempdir().unwrap();
        let list = tmp.path().join("split.tsv");
        std::fs::write(&list, "01\tval\n03\ttest\n").unwrap();
        let (m, _) = apply_split(&manifest_of(3), &SplitPolicy::OfficialSplit(list)).unwrap();
        assert_eq!(m.records()[0].split, Split::Val);
        assert_eq!(m.records()[1].split, Split::Unassigned);
        assert_eq!(m.records()[2].split, Split::Test);
    }

    #[test]
    fn official_split_rejects_unknown_ids() {
        let tmp = tempfile::tempdir().unwrap();
        let list = tmp.path().join("split.tsv");
        std::fs::write(&list, "99\ttrain\n").unwrap();
        assert!(matches!(
            apply_split(&manifest_of(3), &SplitPolicy::OfficialSplit(list)).unwrap_err(),
            ManifestError::UnknownListId { line: 1, .. }
        ));
    }

    #[test]
    fn round_trip_preserves_everything() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("m.tsv");
        let original = DatasetManifest::new(
            "mixed",
            vec![
                record("10", Split::Test),
                record("2", Split::Train),
                record("zz", Split::Val),
            ],
        )
        .unwrap();
        write_manifest(&original, &path).unwrap();
        let back = read_manifest(&path).unwrap();
        assert_eq!(back, original);
    }

    #[test]
    fn parse_error_names_the_line() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("bad.tsv");
        std::fs::write(
            &path,
            format!("{MANIFEST_FORMAT}\tds\n01\th.png\tg.png\ttrain\n02\th.png\tg.png\n"),
        )
        .unwrap();
        let err = read_manifest(&path).unwrap_err();
        match err {
            ManifestError::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("4 tab-separated fields"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_manifest_is_refused() {
        assert!(matches!(
            DatasetManifest::new("x", vec![]).unwrap_err(),
            ManifestError::EmptyManifest
        ));
    }

    #[test]
    fn duplicate_ids_are_refused() {
        let err = DatasetManifest::new(
            "x",
            vec![record("01", Split::Train), record("01", Split::Test)],
        )
        .unwrap_err();
        assert!(matches!(err, ManifestError::DuplicateId(id) if id == "01"));
    }
}
