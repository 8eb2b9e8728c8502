//! Implementations behind the CLI subcommands. They live in the library
//! so integration tests can drive them directly as well as through the
//! binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ecndt::baselines::{train_classifier, ClassifierConfig, ClassifierKind, TrainedClassifier};
use ecndt::dataset::{
    load_manifest, make_binary_task, write_manifest, Dataset, SignalRecord,
    DEFAULT_SAMPLE_RATE_HZ,
};
use ecndt::dimred::{lda_fit, lda_project, pca_fit, pca_project, PcaTarget};
use ecndt::eval::{
    compute_metrics, cross_validate_table, mean_metrics, report_csv, ConfusionMatrix, Metrics,
    METRIC_COLUMNS,
};
use ecndt::features::{
    extract_table, read_feature_csv, write_feature_csv, FeatureMethod, FeatureTable,
    PipelineSpec, Reduction,
};
use ecndt::shape::SHAPE_FEATURE_NAMES;
use ecndt::synth;
use ecndt::{Error, Result};

use crate::config::{self, ExperimentConfig};
use crate::svg;

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    Ok(())
}

/// Reads a headered comma-separated file; no quoting (none of our files
/// need it). Every row must match the header's width.
fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let header: Vec<String> = match lines.next() {
        Some((_, h)) if !h.trim().is_empty() => h.split(',').map(str::to_string).collect(),
        _ => return Err(Error::parse(path, 1, "empty file")),
    };
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(str::to_string).collect();
        if fields.len() != header.len() {
            return Err(Error::parse(
                path,
                idx + 1,
                format!("expected {} fields, found {}", header.len(), fields.len()),
            ));
        }
        rows.push(fields);
    }
    Ok((header, rows))
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

/// Generates one of the synthetic benchmark datasets and writes it as a
/// canonical dataset directory. Returns the manifest path.
pub fn cmd_synth(set: u32, per_class: usize, seed: u64, out: &Path) -> Result<PathBuf> {
    let dataset = match set {
        1 => synth::set1(per_class, seed)?,
        2 => synth::set2(per_class, seed)?,
        other => {
            return Err(Error::Config(format!(
                "unknown synthetic set {other} (expected 1 or 2)"
            )))
        }
    };
    write_manifest(&dataset, out)
}

// ---------------------------------------------------------------------------
// import
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ImportFormat {
    /// An existing manifest (or a dataset directory containing one).
    Manifest,
    /// A directory of `<class>_<id>.txt` files with two numeric columns
    /// (channel 1 and channel 2), separated by commas and/or whitespace.
    Raw,
}

fn detect_format(input: &Path) -> Result<ImportFormat> {
    if input.is_file() {
        return Ok(ImportFormat::Manifest);
    }
    if input.is_dir() {
        if input.join("manifest.csv").is_file() {
            return Ok(ImportFormat::Manifest);
        }
        return Ok(ImportFormat::Raw);
    }
    Err(Error::io(
        input,
        std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
    ))
}

fn load_raw_record(path: &Path) -> Result<SignalRecord> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Data(format!("{}: file name is not valid UTF-8", path.display())))?;
    let class_str = stem.split('_').next().unwrap_or("");
    let class_id: u32 = class_str.parse().map_err(|_| {
        Error::Data(format!(
            "{}: raw record files must be named `<class>_<id>.txt` with a numeric class",
            path.display()
        ))
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut channel1 = Vec::new();
    let mut channel2 = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                path,
                idx + 1,
                format!("expected 2 columns, found {}", fields.len()),
            ));
        }
        let parse = |s: &str| -> Result<f64> {
            let v: f64 = s
                .parse()
                .map_err(|_| Error::parse(path, idx + 1, format!("bad sample value {s:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    format!("non-finite sample value {s:?}"),
                ));
            }
            Ok(v)
        };
        channel1.push(parse(fields[0])?);
        channel2.push(parse(fields[1])?);
    }
    Ok(SignalRecord {
        record_id: stem.to_string(),
        class_id,
        sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
        channel1,
        channel2,
    })
}

fn load_raw_dir(dir: &Path) -> Result<Dataset> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().map_or(false, |x| x == "txt"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Data(format!(
            "{}: no .txt record files to import",
            dir.display()
        )));
    }
    let mut records = Vec::with_capacity(paths.len());
    for path in &paths {
        records.push(load_raw_record(path)?);
    }
    let first = (&records[0].record_id, records[0].channel1.len());
    for rec in &records[1..] {
        if rec.channel1.len() != first.1 {
            return Err(Error::Data(format!(
                "inconsistent sample counts: record {} has {} samples but record {} has {}",
                first.0,
                first.1,
                rec.record_id,
                rec.channel1.len()
            )));
        }
    }
    Dataset::new(records)
}

/// Converts raw input into a canonical dataset directory under `out`.
/// Returns the new manifest path. Re-importing an exported dataset
/// reproduces the manifest byte for byte.
pub fn cmd_import(input: &Path, format: Option<&str>, out: &Path) -> Result<PathBuf> {
    let format = match format {
        Some("manifest") => ImportFormat::Manifest,
        Some("raw") => ImportFormat::Raw,
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown import format {other:?} (expected `manifest` or `raw`)"
            )))
        }
        None => detect_format(input)?,
    };
    let dataset = match format {
        ImportFormat::Manifest => {
            let manifest = if input.is_dir() {
                input.join("manifest.csv")
            } else {
                input.to_path_buf()
            };
            load_manifest(&manifest)?
        }
        ImportFormat::Raw => load_raw_dir(input)?,
    };
    write_manifest(&dataset, out)
}

// ---------------------------------------------------------------------------
// features / train / evaluate
// ---------------------------------------------------------------------------

/// Extracts a feature table and writes it as CSV. Returns (records,
/// dimension).
pub fn cmd_features(manifest: &Path, pipeline: &PipelineSpec, out: &Path) -> Result<(usize, usize)> {
    pipeline.validate()?;
    let dataset = load_manifest(manifest)?;
    let table = extract_table(&dataset, pipeline)?;
    ensure_parent(out)?;
    write_feature_csv(&table, out)?;
    Ok((table.len(), table.dimension()))
}

fn resolve_positive(class_ids: &[u32], requested: Option<u32>) -> Result<u32> {
    match requested {
        Some(c) => {
            if class_ids.contains(&c) {
                Ok(c)
            } else {
                Err(Error::Data(format!(
                    "positive class {c} does not occur in the feature table"
                )))
            }
        }
        None => class_ids
            .iter()
            .copied()
            .min()
            .ok_or_else(|| Error::Data("empty feature table".into())),
    }
}

/// Outcome of a standalone training call.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub positive: u32,
    pub records: usize,
    pub accuracy: f64,
    /// Learned rule in display form, for rule-based classifiers.
    pub formula: Option<String>,
}

/// Trains one classifier on every row of a feature table and writes the
/// model in its text serialization.
pub fn cmd_train(
    features: &Path,
    config: &ClassifierConfig,
    positive_class: Option<u32>,
    out: &Path,
) -> Result<TrainOutcome> {
    let table = read_feature_csv(features)?;
    let positive = resolve_positive(&table.class_ids, positive_class)?;
    let labels: Vec<bool> = table.class_ids.iter().map(|&c| c == positive).collect();
    let model = train_classifier(&table.vectors, &labels, config)?;
    let mut correct = 0usize;
    for (vector, &label) in table.vectors.iter().zip(&labels) {
        if model.predict(vector)? == label {
            correct += 1;
        }
    }
    ensure_parent(out)?;
    write_text(out, &model.to_text())?;
    Ok(TrainOutcome {
        positive,
        records: table.len(),
        accuracy: correct as f64 / table.len() as f64,
        formula: model.formula().map(|f| f.to_string()),
    })
}

/// Evaluates a serialized model against a labeled feature table.
pub fn cmd_evaluate(
    features: &Path,
    model_path: &Path,
    positive_class: Option<u32>,
    out: Option<&Path>,
) -> Result<Metrics> {
    let table = read_feature_csv(features)?;
    let text = std::fs::read_to_string(model_path).map_err(|e| Error::io(model_path, e))?;
    let model = TrainedClassifier::from_text(&text)?;
    let positive = resolve_positive(&table.class_ids, positive_class)?;
    let mut matrix = ConfusionMatrix::default();
    for (vector, &class) in table.vectors.iter().zip(&table.class_ids) {
        matrix.add(class == positive, model.predict(vector)?);
    }
    let metrics = compute_metrics(&matrix);
    if let Some(path) = out {
        ensure_parent(path)?;
        write_text(path, &report_csv(&[("eval".to_string(), metrics)]))?;
    }
    Ok(metrics)
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

/// What a finished run reports back to the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub output: PathBuf,
    pub report_path: PathBuf,
    /// Which report row is the headline: "mean" (binary) or "macro"
    /// (one-vs-rest).
    pub headline_name: &'static str,
    pub headline: Metrics,
}

fn shape_index(name: &str) -> usize {
    SHAPE_FEATURE_NAMES
        .iter()
        .position(|n| *n == name)
        .expect("known shape feature name")
}

/// `record_id,class_id,L,W,alpha` rows straight from the shape features.
fn lwa_csv(table: &FeatureTable) -> String {
    let (li, wi, ai) = (
        shape_index("length"),
        shape_index("width"),
        shape_index("alpha_degrees"),
    );
    let mut out = String::from("record_id,class_id,L,W,alpha\n");
    for ((id, class), vector) in table
        .record_ids
        .iter()
        .zip(&table.class_ids)
        .zip(&table.vectors)
    {
        let _ = writeln!(
            out,
            "{id},{class},{},{},{}",
            vector.values[li], vector.values[wi], vector.values[ai]
        );
    }
    out
}

/// First three principal-component coordinates of every record, fitted on
/// the full table (a visualization aid, not part of cross-validation).
fn pca3_csv(table: &FeatureTable) -> Result<String> {
    let rows: Vec<Vec<f64>> = table.vectors.iter().map(|v| v.values.clone()).collect();
    let model = pca_fit(&rows, PcaTarget::Energy(1.0))?;
    let mut out = String::from("record_id,class_id,pc1,pc2,pc3\n");
    for ((id, class), row) in table.record_ids.iter().zip(&table.class_ids).zip(&rows) {
        let coords = pca_project(&model, row)?;
        let mut cols = [0.0; 3];
        for (slot, value) in cols.iter_mut().zip(&coords) {
            *slot = *value;
        }
        let _ = writeln!(out, "{id},{class},{},{},{}", cols[0], cols[1], cols[2]);
    }
    Ok(out)
}

/// First discriminant coordinate of every record after the configured
/// PCA step, fitted on the full table (visualization aid).
fn lda1_csv(table: &FeatureTable, labels: &[u32], pipeline: &PipelineSpec) -> Result<String> {
    let rows: Vec<Vec<f64>> = table.vectors.iter().map(|v| v.values.clone()).collect();
    let pca = pca_fit(&rows, pipeline.pca_target)?;
    let projected: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| pca_project(&pca, r))
        .collect::<Result<_>>()?;
    let lda = lda_fit(&projected, labels, pipeline.lda_components)?;
    let mut out = String::from("record_id,class_id,value\n");
    for ((id, class), row) in table.record_ids.iter().zip(&table.class_ids).zip(&projected) {
        let value = lda_project(&lda, row)?[0];
        let _ = writeln!(out, "{id},{class},{value}");
    }
    Ok(out)
}

fn save_models(
    dir: &Path,
    stem: &str,
    models: &[TrainedClassifier],
    formulas: &mut String,
) -> Result<()> {
    for (i, model) in models.iter().enumerate() {
        let name = format!("{stem}_{i}");
        write_text(&dir.join(format!("{name}.txt")), &model.to_text())?;
        if let Some(formula) = model.formula() {
            let _ = writeln!(formulas, "{name}: {formula}");
        }
    }
    Ok(())
}

/// Runs the full chain: load dataset, extract features, cross-validate
/// per the config, and write every artifact into the output directory:
///
/// - `features.csv` — extracted feature table
/// - `lwa.csv` / `pca3.csv` / `lda1.csv` — plot intermediates where the
///   pipeline produces them
/// - `report.csv` — per-fold + mean + pooled rows (binary mode) or
///   per-class + macro rows (one-vs-rest mode)
/// - `folds.csv` — per-class fold detail (one-vs-rest mode only)
/// - `models/` — the classifier trained for every fold
/// - `formulas.txt` — learned rules (rule-learner runs only)
/// - `run_log.txt` — the resolved configuration; replaying it reproduces
///   `report.csv` byte for byte
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.pipeline.validate()?;
    let dataset = load_manifest(&cfg.manifest)?;
    std::fs::create_dir_all(&cfg.output).map_err(|e| Error::io(&cfg.output, e))?;
    let models_dir = cfg.output.join("models");
    std::fs::create_dir_all(&models_dir).map_err(|e| Error::io(&models_dir, e))?;

    let table = extract_table(&dataset, &cfg.pipeline)?;
    write_feature_csv(&table, &cfg.output.join("features.csv"))?;

    if cfg.pipeline.method == FeatureMethod::Cbir {
        write_text(&cfg.output.join("lwa.csv"), &lwa_csv(&table))?;
    }
    if cfg.pipeline.reduction != Reduction::None {
        write_text(&cfg.output.join("pca3.csv"), &pca3_csv(&table)?)?;
    }
    if cfg.pipeline.reduction == Reduction::PcaLda {
        let labels: Vec<u32> = match cfg.positive_class {
            Some(positive) => table
                .class_ids
                .iter()
                .map(|&c| u32::from(c == positive))
                .collect(),
            None => table.class_ids.clone(),
        };
        write_text(
            &cfg.output.join("lda1.csv"),
            &lda1_csv(&table, &labels, &cfg.pipeline)?,
        )?;
    }

    let mut rows: Vec<(String, Metrics)> = Vec::new();
    let mut fold_rows: Vec<(String, Metrics)> = Vec::new();
    let mut formulas = String::new();
    let (headline_name, headline) = match cfg.positive_class {
        Some(positive) => {
            let task = make_binary_task(&dataset, positive)?;
            let cv = cross_validate_table(
                &table,
                &task,
                &cfg.pipeline,
                &cfg.classifier,
                cfg.folds,
                cfg.seed,
            )?;
            for fold in &cv.folds {
                rows.push((format!("fold_{}", fold.fold), fold.metrics));
            }
            rows.push(("mean".to_string(), cv.mean));
            rows.push(("pooled".to_string(), cv.pooled_metrics));
            save_models(&models_dir, "fold", &cv.models, &mut formulas)?;
            ("mean", cv.mean)
        }
        None => {
            let class_ids = dataset.class_ids();
            if class_ids.len() < 2 {
                return Err(Error::Data(
                    "one-vs-rest needs at least two classes".into(),
                ));
            }
            let mut means = Vec::new();
            for &class_id in &class_ids {
                let task = make_binary_task(&dataset, class_id)?;
                let cv = cross_validate_table(
                    &table,
                    &task,
                    &cfg.pipeline,
                    &cfg.classifier,
                    cfg.folds,
                    cfg.seed,
                )?;
                rows.push((format!("class_{class_id}"), cv.mean));
                for fold in &cv.folds {
                    fold_rows.push((format!("class_{class_id}_fold_{}", fold.fold), fold.metrics));
                }
                save_models(
                    &models_dir,
                    &format!("class_{class_id}_fold"),
                    &cv.models,
                    &mut formulas,
                )?;
                means.push(cv.mean);
            }
            let macro_mean = mean_metrics(&means);
            rows.push(("macro".to_string(), macro_mean));
            ("macro", macro_mean)
        }
    };

    let report_path = cfg.output.join("report.csv");
    write_text(&report_path, &report_csv(&rows))?;
    if !fold_rows.is_empty() {
        write_text(&cfg.output.join("folds.csv"), &report_csv(&fold_rows))?;
    }
    if cfg.classifier.kind == ClassifierKind::Ubrain {
        write_text(&cfg.output.join("formulas.txt"), &formulas)?;
    }

    // Log the manifest as an absolute path so the log replays from any
    // working directory.
    let mut logged = cfg.clone();
    logged.manifest =
        std::fs::canonicalize(&cfg.manifest).map_err(|e| Error::io(&cfg.manifest, e))?;
    write_text(&cfg.output.join("run_log.txt"), &config::render(&logged))?;

    Ok(RunSummary {
        output: cfg.output.clone(),
        report_path,
        headline_name,
        headline,
    })
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

/// Which plot-data artifact to derive from a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    ScatterLwa,
    Lda1d,
    Pca3d,
    MetricBars,
}

impl PlotKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "scatter-lwa" => Ok(PlotKind::ScatterLwa),
            "lda-1d" => Ok(PlotKind::Lda1d),
            "pca-3d" => Ok(PlotKind::Pca3d),
            "metric-bars" => Ok(PlotKind::MetricBars),
            other => Err(Error::Config(format!(
                "unknown plot kind {other:?} (expected scatter-lwa, lda-1d, pca-3d or metric-bars)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::ScatterLwa => "scatter-lwa",
            PlotKind::Lda1d => "lda-1d",
            PlotKind::Pca3d => "pca-3d",
            PlotKind::MetricBars => "metric-bars",
        }
    }
}

fn require_intermediate(run: &Path, file: &str, produced_by: &str) -> Result<PathBuf> {
    let path = run.join(file);
    if !path.is_file() {
        return Err(Error::Data(format!(
            "{}: missing intermediate {file} (produced by {produced_by})",
            run.display()
        )));
    }
    Ok(path)
}

/// Dense class index (for colors) of each row's class id.
fn class_indices(class_column: &[String]) -> Vec<usize> {
    let mut seen: Vec<&String> = Vec::new();
    let mut ordered: Vec<&String> = class_column.iter().collect();
    ordered.sort();
    ordered.dedup();
    for c in ordered {
        seen.push(c);
    }
    class_column
        .iter()
        .map(|c| seen.iter().position(|s| *s == c).unwrap_or(0))
        .collect()
}

fn parse_plot_value(path: &Path, row: usize, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::parse(path, row + 2, format!("bad numeric value {s:?}")))
}

fn run_label(dir: &Path) -> String {
    if let Ok(kv) = config::parse_kv_file(&dir.join("run_log.txt")) {
        if let (Some(pipeline), Some(classifier)) = (kv.get("pipeline"), kv.get("classifier")) {
            return format!("{pipeline}_{classifier}");
        }
    }
    dir.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

/// The headline metric row of one run's report: "macro" if present, else
/// "mean".
fn headline_row(report: &Path) -> Result<[f64; 7]> {
    let (header, rows) = read_csv(report)?;
    let expected: Vec<String> = std::iter::once("name".to_string())
        .chain(METRIC_COLUMNS.iter().map(|s| s.to_string()))
        .collect();
    if header != expected {
        return Err(Error::parse(
            report,
            1,
            format!("unexpected report header {:?}", header.join(",")),
        ));
    }
    for wanted in ["macro", "mean"] {
        if let Some(row) = rows.iter().find(|r| r[0] == wanted) {
            let mut values = [0.0; 7];
            for (slot, field) in values.iter_mut().zip(&row[1..]) {
                *slot = field.parse::<f64>().map_err(|_| {
                    Error::Data(format!(
                        "{}: non-numeric metric value {field:?} in row {wanted}",
                        report.display()
                    ))
                })?;
            }
            return Ok(values);
        }
    }
    Err(Error::Data(format!(
        "{}: report has neither a macro nor a mean row",
        report.display()
    )))
}

/// Finds the runs under `root`: either `root` itself or its immediate
/// subdirectories containing a `report.csv`.
fn collect_runs(root: &Path) -> Result<Vec<(String, [f64; 7])>> {
    let mut dirs: Vec<PathBuf> = Vec::new();
    if root.join("report.csv").is_file() {
        dirs.push(root.to_path_buf());
    } else if root.is_dir() {
        for entry in std::fs::read_dir(root).map_err(|e| Error::io(root, e))? {
            let path = entry.map_err(|e| Error::io(root, e))?.path();
            if path.is_dir() && path.join("report.csv").is_file() {
                dirs.push(path);
            }
        }
        dirs.sort();
    }
    if dirs.is_empty() {
        return Err(Error::Data(format!(
            "{}: no report.csv found here or in immediate subdirectories",
            root.display()
        )));
    }
    let mut labeled: Vec<(String, String, [f64; 7])> = Vec::new();
    for dir in &dirs {
        let label = run_label(dir);
        let values = headline_row(&dir.join("report.csv"))?;
        let dirname = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        labeled.push((label, dirname, values));
    }
    // Disambiguate duplicate labels (same pipeline+classifier twice) by
    // their directory names.
    let mut out: Vec<(String, [f64; 7])> = labeled
        .iter()
        .map(|(label, dirname, values)| {
            let duplicates = labeled.iter().filter(|(l, _, _)| l == label).count();
            if duplicates > 1 {
                (format!("{label}.{dirname}"), *values)
            } else {
                (label.clone(), *values)
            }
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Derives plot-ready CSV files (and optionally minimal SVG renderings)
/// from a finished run directory. Returns the files written.
pub fn emit_plots(
    run: &Path,
    kind: PlotKind,
    out: Option<&Path>,
    render_svg: bool,
) -> Result<Vec<PathBuf>> {
    let out_dir = out.unwrap_or(run).to_path_buf();
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let mut written = Vec::new();

    match kind {
        PlotKind::ScatterLwa => {
            let source = require_intermediate(run, "lwa.csv", "cbir runs")?;
            let (_, rows) = read_csv(&source)?;
            let mut csv = String::from("class_id,L,W,alpha\n");
            for row in &rows {
                let _ = writeln!(csv, "{},{},{},{}", row[1], row[2], row[3], row[4]);
            }
            let path = out_dir.join("plot_scatter_lwa.csv");
            write_text(&path, &csv)?;
            written.push(path);
            if render_svg {
                let classes: Vec<String> = rows.iter().map(|r| r[1].clone()).collect();
                let indices = class_indices(&classes);
                let mut points = Vec::with_capacity(rows.len());
                for (i, row) in rows.iter().enumerate() {
                    points.push((
                        parse_plot_value(&source, i, &row[2])?,
                        parse_plot_value(&source, i, &row[3])?,
                        indices[i],
                    ));
                }
                let path = out_dir.join("plot_scatter_lwa.svg");
                write_text(
                    &path,
                    &svg::scatter(&points, "locus length vs width by class", "L", "W"),
                )?;
                written.push(path);
            }
        }
        PlotKind::Pca3d => {
            let source = require_intermediate(run, "pca3.csv", "runs with a reduction stage")?;
            let (_, rows) = read_csv(&source)?;
            let mut csv = String::from("class_id,pc1,pc2,pc3\n");
            for row in &rows {
                let _ = writeln!(csv, "{},{},{},{}", row[1], row[2], row[3], row[4]);
            }
            let path = out_dir.join("plot_pca3.csv");
            write_text(&path, &csv)?;
            written.push(path);
            if render_svg {
                let classes: Vec<String> = rows.iter().map(|r| r[1].clone()).collect();
                let indices = class_indices(&classes);
                let mut points = Vec::with_capacity(rows.len());
                for (i, row) in rows.iter().enumerate() {
                    points.push((
                        parse_plot_value(&source, i, &row[2])?,
                        parse_plot_value(&source, i, &row[3])?,
                        indices[i],
                    ));
                }
                let path = out_dir.join("plot_pca3.svg");
                write_text(
                    &path,
                    &svg::scatter(&points, "first two principal components", "pc1", "pc2"),
                )?;
                written.push(path);
            }
        }
        PlotKind::Lda1d => {
            let source = require_intermediate(run, "lda1.csv", "pca+lda runs")?;
            let (_, rows) = read_csv(&source)?;
            let mut csv = String::from("class_id,value\n");
            for row in &rows {
                let _ = writeln!(csv, "{},{}", row[1], row[2]);
            }
            let path = out_dir.join("plot_lda1.csv");
            write_text(&path, &csv)?;
            written.push(path);
            if render_svg {
                let classes: Vec<String> = rows.iter().map(|r| r[1].clone()).collect();
                let indices = class_indices(&classes);
                let mut points = Vec::with_capacity(rows.len());
                for (i, row) in rows.iter().enumerate() {
                    points.push((
                        parse_plot_value(&source, i, &row[2])?,
                        indices[i] as f64,
                        indices[i],
                    ));
                }
                let path = out_dir.join("plot_lda1.svg");
                write_text(
                    &path,
                    &svg::scatter(&points, "discriminant coordinate per record", "value", "class"),
                )?;
                written.push(path);
            }
        }
        PlotKind::MetricBars => {
            let runs = collect_runs(run)?;
            for (column, name) in METRIC_COLUMNS.iter().enumerate() {
                let mut csv = format!("name,{name}\n");
                let mut rows = Vec::with_capacity(runs.len());
                for (label, values) in &runs {
                    let _ = writeln!(csv, "{label},{}", values[column]);
                    rows.push((label.clone(), values[column]));
                }
                let path = out_dir.join(format!("bars_{name}.csv"));
                write_text(&path, &csv)?;
                written.push(path);
                if render_svg {
                    let path = out_dir.join(format!("bars_{name}.svg"));
                    write_text(&path, &svg::bars(&rows, &format!("{name} by run"), name))?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}

/// One-line human summary of a metrics row.
pub fn metrics_line(m: &Metrics) -> String {
    format!(
        "acc={:.4} sens={:.4} spec={:.4} prec={:.4} mcc={:.4} auc={:.4} f={:.4}{}",
        m.accuracy,
        m.sensitivity,
        m.specificity,
        m.precision,
        m.mcc,
        m.auc,
        m.f_measure,
        if m.degenerate {
            " (contains zero-denominator folds)"
        } else {
            ""
        }
    )
}
