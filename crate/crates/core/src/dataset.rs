//! Records, manifests, binary tasks and fold plans.
//!
//! On disk a dataset is a manifest CSV (`record_id,class_id,path`, paths
//! relative to the manifest) plus one CSV per record with header
//! `ch1,ch2` and one decimal sample pair per row. Samples are written
//! with Rust's shortest round-trip float formatting, so a
//! write/load cycle reproduces every `f64` bit-exactly.
//!
//! Experiments are binary one-vs-rest tasks. [`stratified_kfold`] builds
//! the fold plan; it shuffles by per-record keys
//! `SplitMix64(seed ^ fnv1a64(record_id))` rather than by a positional
//! Fisher-Yates pass, so the plan for a two-class dataset is the same no
//! matter which class is called positive.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::rng::{fnv1a64, SplitMix64};

/// Sample rate of the reference capture hardware. Manifests do not carry
/// a rate column; loaded records get this value.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 10_000.0;

/// One two-channel capture. Channels are synchronized and of identical
/// power-of-two length; every sample is finite; the rate is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecord {
    pub record_id: String,
    pub class_id: u32,
    pub sample_rate_hz: f64,
    pub channel1: Vec<f64>,
    pub channel2: Vec<f64>,
}

impl SignalRecord {
    /// Checks the type invariants; every loader and generator calls this.
    pub fn validate(&self) -> Result<()> {
        if self.record_id.is_empty() || !valid_record_id(&self.record_id) {
            return Err(Error::Data(format!(
                "record id {:?} is not a simple token (allowed: A-Z a-z 0-9 _ - .)",
                self.record_id
            )));
        }
        let n = self.channel1.len();
        if self.channel2.len() != n {
            return Err(Error::Data(format!(
                "record {}: channel lengths differ ({} vs {})",
                self.record_id,
                n,
                self.channel2.len()
            )));
        }
        if n == 0 || n & (n - 1) != 0 {
            return Err(Error::Data(format!(
                "record {}: sample count {} is not a power of two",
                self.record_id, n
            )));
        }
        if !(self.sample_rate_hz > 0.0) {
            return Err(Error::Data(format!(
                "record {}: sample rate must be positive",
                self.record_id
            )));
        }
        for (ch, name) in [(&self.channel1, "ch1"), (&self.channel2, "ch2")] {
            if let Some(row) = ch.iter().position(|x| !x.is_finite()) {
                return Err(Error::Data(format!(
                    "record {}: non-finite sample in {} at row {}",
                    self.record_id,
                    name,
                    row + 1
                )));
            }
        }
        Ok(())
    }
}

fn valid_record_id(id: &str) -> bool {
    id.bytes()
        .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || b == b'.')
}

/// A validated set of records plus the class-id naming map.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<SignalRecord>,
    /// class_id -> display name; derived as `class_<id>` since manifests
    /// carry numeric ids only. Every record's class_id has an entry.
    pub class_names: BTreeMap<u32, String>,
}

impl Dataset {
    /// Builds a dataset from records, validating each and deriving the
    /// class-name map. Record ids must be unique.
    pub fn new(records: Vec<SignalRecord>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut class_names = BTreeMap::new();
        for rec in &records {
            rec.validate()?;
            if !seen.insert(rec.record_id.clone()) {
                return Err(Error::Data(format!(
                    "duplicate record id {:?}",
                    rec.record_id
                )));
            }
            class_names
                .entry(rec.class_id)
                .or_insert_with(|| format!("class_{}", rec.class_id));
        }
        Ok(Dataset {
            records,
            class_names,
        })
    }

    pub fn record(&self, id: &str) -> Option<&SignalRecord> {
        self.records.iter().find(|r| r.record_id == id)
    }

    /// Class ids present, ascending.
    pub fn class_ids(&self) -> Vec<u32> {
        self.class_names.keys().copied().collect()
    }
}

// ---------------------------------------------------------------------------
// manifest I/O
// ---------------------------------------------------------------------------

const MANIFEST_HEADER: &str = "record_id,class_id,path";
const RECORD_HEADER: &str = "ch1,ch2";

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(text.lines().map(|l| l.trim_end_matches('\r').to_string()).collect())
}

/// Loads a manifest and every record it references. Order follows the
/// manifest. Errors carry file and line context.
pub fn load_manifest(path: &Path) -> Result<Dataset> {
    let display = path.display().to_string();
    let lines = read_lines(path)?;
    let mut it = lines.iter().enumerate();
    match it.next() {
        Some((_, header)) if header.trim() == MANIFEST_HEADER => {}
        Some((_, header)) => {
            return Err(Error::parse(
                &display,
                1,
                format!("expected header {MANIFEST_HEADER:?}, found {header:?}"),
            ))
        }
        None => return Err(Error::parse(&display, 1, "empty manifest")),
    }
    let base = path.parent().unwrap_or(Path::new(""));
    let mut records = Vec::new();
    for (idx, line) in it {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::parse(
                &display,
                idx + 1,
                format!("expected 3 comma-separated fields, found {}", parts.len()),
            ));
        }
        let record_id = parts[0].trim().to_string();
        let class_id: u32 = parts[1].trim().parse().map_err(|_| {
            Error::parse(&display, idx + 1, format!("bad class id {:?}", parts[1]))
        })?;
        let rec_path = base.join(parts[2].trim());
        let (channel1, channel2) = load_record_file(&rec_path)?;
        records.push(SignalRecord {
            record_id,
            class_id,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            channel1,
            channel2,
        });
    }
    if records.is_empty() {
        return Err(Error::Data(format!("{display}: no records")));
    }
    Dataset::new(records)
}

/// Reads one `ch1,ch2` record file.
pub fn load_record_file(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let display = path.display().to_string();
    let lines = read_lines(path)?;
    let mut it = lines.iter().enumerate();
    match it.next() {
        Some((_, header)) if header.trim() == RECORD_HEADER => {}
        Some((_, header)) => {
            return Err(Error::parse(
                &display,
                1,
                format!("expected header {RECORD_HEADER:?}, found {header:?}"),
            ))
        }
        None => return Err(Error::parse(&display, 1, "empty record file")),
    }
    let mut ch1 = Vec::new();
    let mut ch2 = Vec::new();
    for (idx, line) in it {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (a, b) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::parse(
                    &display,
                    idx + 1,
                    "expected exactly 2 comma-separated samples",
                ))
            }
        };
        let parse = |s: &str| -> Result<f64> {
            let v: f64 = s.trim().parse().map_err(|_| {
                Error::parse(&display, idx + 1, format!("bad sample value {s:?}"))
            })?;
            if !v.is_finite() {
                return Err(Error::parse(
                    &display,
                    idx + 1,
                    format!("non-finite sample value {s:?}"),
                ));
            }
            Ok(v)
        };
        ch1.push(parse(a)?);
        ch2.push(parse(b)?);
    }
    Ok((ch1, ch2))
}

/// Writes `manifest.csv` plus `records/<id>.csv` under `dir` and returns
/// the manifest path. Composing with [`load_manifest`] is the identity on
/// dataset contents, and re-exporting a loaded dataset reproduces the
/// manifest byte for byte.
pub fn write_manifest(dataset: &Dataset, dir: &Path) -> Result<PathBuf> {
    let records_dir = dir.join("records");
    std::fs::create_dir_all(&records_dir)
        .map_err(|e| Error::io(records_dir.display().to_string(), e))?;
    let mut manifest = String::from(MANIFEST_HEADER);
    manifest.push('\n');
    for rec in &dataset.records {
        rec.validate()?;
        let rel = format!("records/{}.csv", rec.record_id);
        let mut body = String::from(RECORD_HEADER);
        body.push('\n');
        for (a, b) in rec.channel1.iter().zip(&rec.channel2) {
            // shortest round-trip decimal text: parses back bit-exact
            let _ = writeln!(body, "{a},{b}");
        }
        let rec_path = dir.join(&rel);
        std::fs::write(&rec_path, body)
            .map_err(|e| Error::io(rec_path.display().to_string(), e))?;
        let _ = writeln!(manifest, "{},{},{}", rec.record_id, rec.class_id, rel);
    }
    let manifest_path = dir.join("manifest.csv");
    std::fs::write(&manifest_path, manifest)
        .map_err(|e| Error::io(manifest_path.display().to_string(), e))?;
    Ok(manifest_path)
}

// ---------------------------------------------------------------------------
// binary tasks and fold plans
// ---------------------------------------------------------------------------

/// One-vs-rest task: the records of `positive_class` against everything
/// else. Both lists preserve dataset order.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryTask {
    pub positive_class: u32,
    pub positives: Vec<String>,
    pub negatives: Vec<String>,
}

impl BinaryTask {
    pub fn label_of(&self, id: &str) -> Option<bool> {
        if self.positives.iter().any(|p| p == id) {
            Some(true)
        } else if self.negatives.iter().any(|n| n == id) {
            Some(false)
        } else {
            None
        }
    }
}

/// Builds the one-vs-rest task for `positive_class`.
pub fn make_binary_task(dataset: &Dataset, positive_class: u32) -> Result<BinaryTask> {
    if !dataset.class_names.contains_key(&positive_class) {
        return Err(Error::Config(format!(
            "positive class {positive_class} not present in dataset (classes: {:?})",
            dataset.class_ids()
        )));
    }
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for rec in &dataset.records {
        if rec.class_id == positive_class {
            positives.push(rec.record_id.clone());
        } else {
            negatives.push(rec.record_id.clone());
        }
    }
    Ok(BinaryTask {
        positive_class,
        positives,
        negatives,
    })
}

/// Fold assignment for one task. Plans compare (and serialize) equal iff
/// every record lands in the same fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// record_id -> fold in [0, k)
    pub assignments: BTreeMap<String, usize>,
}

impl FoldPlan {
    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignments.get(id).copied()
    }
}

/// Stratified k-fold plan.
///
/// Each label group is ordered by its shuffle key
/// `SplitMix64(seed ^ fnv1a64(record_id))` (record id breaks key ties),
/// then records are dealt round-robin over folds in one continuous pass:
/// first the group containing the lexicographically smallest record id,
/// then the other. Both label groups are contiguous runs of the deal, so
/// per-label fold counts differ by at most one, and so do total fold
/// sizes. The keys depend only on (seed, record id), so swapping which
/// class is positive yields the identical plan.
pub fn stratified_kfold(task: &BinaryTask, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("k must be at least 2, got {k}")));
    }
    let smaller = task.positives.len().min(task.negatives.len());
    if k > smaller {
        return Err(Error::Config(format!(
            "k = {k} exceeds the smaller label count {smaller} \
             ({} positives, {} negatives)",
            task.positives.len(),
            task.negatives.len()
        )));
    }

    let keyed = |ids: &[String]| -> Vec<(u64, String)> {
        let mut v: Vec<(u64, String)> = ids
            .iter()
            .map(|id| {
                let key = SplitMix64::new(seed ^ fnv1a64(id.as_bytes())).next_u64();
                (key, id.clone())
            })
            .collect();
        v.sort();
        v
    };
    let pos = keyed(&task.positives);
    let neg = keyed(&task.negatives);

    let pos_first = match (task.positives.iter().min(), task.negatives.iter().min()) {
        (Some(p), Some(n)) => p < n,
        _ => true,
    };
    let groups: [&Vec<(u64, String)>; 2] = if pos_first { [&pos, &neg] } else { [&neg, &pos] };

    let mut assignments = BTreeMap::new();
    let mut t = 0usize;
    for group in groups {
        for (_, id) in group {
            assignments.insert(id.clone(), t % k);
            t += 1;
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        assignments,
    })
}

// ---------------------------------------------------------------------------
