//! Evaluation: confusion-matrix metrics, stratified k-fold
//! cross-validation and the one-vs-rest multi-class suite.
//!
//! Seven metrics are reported per confusion matrix: accuracy,
//! sensitivity, specificity, precision, the Matthews correlation
//! coefficient, the two-point AUC and the F-measure. Whenever a metric's
//! denominator is zero the metric is reported as 0 and the report's
//! `degenerate` flag is set; the AUC is always `(sensitivity +
//! specificity) / 2` of the possibly-zeroed values, so the identity
//! holds in every report this module emits.
//!
//! Cross-validation refits the reduction and all classifier-side
//! preprocessing on each training split; the per-record feature
//! extraction is stateless and therefore shared across folds.

use rayon::prelude::*;
use std::collections::BTreeMap;

use crate::baselines::{train_classifier, ClassifierConfig, TrainedClassifier};
use crate::dataset::{make_binary_task, stratified_kfold, BinaryTask, Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::features::{extract_table, fit_reduction, FeatureTable, PipelineSpec};

/// Binary confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub true_positives: usize,
    pub false_negatives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
}

impl ConfusionMatrix {
    pub fn add(&mut self, actual: bool, predicted: bool) {
        match (actual, predicted) {
            (true, true) => self.true_positives += 1,
            (true, false) => self.false_negatives += 1,
            (false, true) => self.false_positives += 1,
            (false, false) => self.true_negatives += 1,
        }
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        self.true_positives += other.true_positives;
        self.false_negatives += other.false_negatives;
        self.false_positives += other.false_positives;
        self.true_negatives += other.true_negatives;
    }

    pub fn total(&self) -> usize {
        self.true_positives + self.false_negatives + self.false_positives + self.true_negatives
    }
}

/// The seven report metrics. `degenerate` records that at least one
/// metric had a zero denominator and was reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub mcc: f64,
    pub auc: f64,
    pub f_measure: f64,
    pub degenerate: bool,
}

/// Report column names, in report order.
pub const METRIC_COLUMNS: [&str; 7] = ["acc", "sens", "spec", "prec", "mcc", "auc", "f"];

impl Metrics {
    /// Metric values in [`METRIC_COLUMNS`] order.
    pub fn values(&self) -> [f64; 7] {
        [
            self.accuracy,
            self.sensitivity,
            self.specificity,
            self.precision,
            self.mcc,
            self.auc,
            self.f_measure,
        ]
    }

    /// Comma-separated values, full-precision floats.
    pub fn csv_row(&self) -> String {
        self.values()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Computes the metric set of one confusion matrix.
pub fn compute_metrics(m: &ConfusionMatrix) -> Metrics {
    let tp = m.true_positives as f64;
    let fn_ = m.false_negatives as f64;
    let fp = m.false_positives as f64;
    let tn = m.true_negatives as f64;
    let mut degenerate = false;
    let mut ratio = |num: f64, den: f64| {
        if den > 0.0 {
            num / den
        } else {
            degenerate = true;
            0.0
        }
    };
    let accuracy = ratio(tp + tn, tp + tn + fp + fn_);
    let sensitivity = ratio(tp, tp + fn_);
    let specificity = ratio(tn, tn + fp);
    let precision = ratio(tp, tp + fp);
    let f_measure = ratio(2.0 * precision * sensitivity, precision + sensitivity);
    let mcc_den2 = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    let mcc = ratio(tp * tn - fp * fn_, mcc_den2.sqrt());
    // two-point AUC: always the average of the reported values
    let auc = (sensitivity + specificity) / 2.0;
    Metrics {
        accuracy,
        sensitivity,
        specificity,
        precision,
        mcc,
        auc,
        f_measure,
        degenerate,
    }
}

/// Arithmetic mean of each metric; degenerate if any input was.
pub fn mean_metrics(items: &[Metrics]) -> Metrics {
    if items.is_empty() {
        return Metrics {
            degenerate: true,
            ..Metrics::default()
        };
    }
    let n = items.len() as f64;
    let mut sums = [0.0f64; 7];
    for item in items {
        for (s, v) in sums.iter_mut().zip(item.values()) {
            *s += v;
        }
    }
    Metrics {
        accuracy: sums[0] / n,
        sensitivity: sums[1] / n,
        specificity: sums[2] / n,
        precision: sums[3] / n,
        mcc: sums[4] / n,
        auc: sums[5] / n,
        f_measure: sums[6] / n,
        degenerate: items.iter().any(|m| m.degenerate),
    }
}

/// One fold's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldReport {
    pub fold: usize,
    pub matrix: ConfusionMatrix,
    pub metrics: Metrics,
}

/// A full cross-validation run.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub plan: FoldPlan,
    pub folds: Vec<FoldReport>,
    /// The classifier trained for each fold, in fold order.
    pub models: Vec<TrainedClassifier>,
    /// Arithmetic mean of the per-fold metrics.
    pub mean: Metrics,
    /// Sum of the per-fold confusion matrices.
    pub pooled: ConfusionMatrix,
    pub pooled_metrics: Metrics,
}

/// Runs stratified k-fold cross-validation for a binary task over a
/// precomputed feature table.
pub fn cross_validate_table(
    table: &FeatureTable,
    task: &BinaryTask,
    pipeline: &PipelineSpec,
    config: &ClassifierConfig,
    k: usize,
    seed: u64,
) -> Result<CrossValidation> {
    let plan = stratified_kfold(task, k, seed)?;
    let index: BTreeMap<&str, usize> = table
        .record_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    // task records in table order
    let mut members: Vec<(usize, bool, usize)> = Vec::new(); // (row, label, fold)
    for (row, id) in table.record_ids.iter().enumerate() {
        if let Some(label) = task.label_of(id) {
            let fold = plan.fold_of(id).ok_or_else(|| {
                Error::Data(format!("record {id} missing from the fold plan"))
            })?;
            members.push((row, label, fold));
        }
    }
    for id in task.positives.iter().chain(&task.negatives) {
        if !index.contains_key(id.as_str()) {
            return Err(Error::Data(format!(
                "task record {id} is missing from the feature table"
            )));
        }
    }

    let mut folds = Vec::with_capacity(k);
    let mut models = Vec::with_capacity(k);
    for fold in 0..k {
        let mut train_vectors = Vec::new();
        let mut train_labels = Vec::new();
        let mut test = Vec::new();
        for &(row, label, f) in &members {
            if f == fold {
                test.push((row, label));
            } else {
                train_vectors.push(table.vectors[row].clone());
                train_labels.push(label);
            }
        }
        let reduction = fit_reduction(&train_vectors, &train_labels, pipeline)?;
        let reduced_train: Vec<_> = train_vectors
            .iter()
            .map(|v| reduction.apply(v))
            .collect::<Result<_>>()?;
        let model = train_classifier(&reduced_train, &train_labels, config)?;
        let mut matrix = ConfusionMatrix::default();
        for (row, label) in test {
            let reduced = reduction.apply(&table.vectors[row])?;
            let predicted = model.predict(&reduced)?;
            matrix.add(label, predicted);
        }
        folds.push(FoldReport {
            fold,
            metrics: compute_metrics(&matrix),
            matrix,
        });
        models.push(model);
    }

    let mean = mean_metrics(&folds.iter().map(|f| f.metrics).collect::<Vec<_>>());
    let mut pooled = ConfusionMatrix::default();
    for f in &folds {
        pooled.merge(&f.matrix);
    }
    Ok(CrossValidation {
        plan,
        folds,
        models,
        mean,
        pooled_metrics: compute_metrics(&pooled),
        pooled,
    })
}

/// Extracts features and cross-validates in one call.
pub fn cross_validate(
    dataset: &Dataset,
    task: &BinaryTask,
    pipeline: &PipelineSpec,
    config: &ClassifierConfig,
    k: usize,
    seed: u64,
) -> Result<CrossValidation> {
    let table = extract_table(dataset, pipeline)?;
    cross_validate_table(&table, task, pipeline, config, k, seed)
}

/// One class's cross-validation within the one-vs-rest suite.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub class_id: u32,
    pub cv: CrossValidation,
}

/// The one-vs-rest suite over every class of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct OneVsRestReport {
    pub classes: Vec<ClassReport>,
    /// Mean over the per-class mean metrics.
    pub macro_mean: Metrics,
}

/// Cross-validates one binary task per class (that class against all
/// others), sharing a single feature extraction pass.
pub fn one_vs_rest_suite(
    dataset: &Dataset,
    pipeline: &PipelineSpec,
    config: &ClassifierConfig,
    k: usize,
    seed: u64,
) -> Result<OneVsRestReport> {
    let class_ids = dataset.class_ids();
    if class_ids.len() < 2 {
        return Err(Error::Data(
            "one-vs-rest needs at least two classes".into(),
        ));
    }
    let table = extract_table(dataset, pipeline)?;
    let classes: Vec<ClassReport> = class_ids
        .par_iter()
        .map(|&class_id| {
            let task = make_binary_task(dataset, class_id)?;
            let cv = cross_validate_table(&table, &task, pipeline, config, k, seed)?;
            Ok(ClassReport { class_id, cv })
        })
        .collect::<Result<_>>()?;
    let macro_mean = mean_metrics(&classes.iter().map(|c| c.cv.mean).collect::<Vec<_>>());
    Ok(OneVsRestReport {
        classes,
        macro_mean,
    })
}

/// Renders labeled metric rows as CSV with the standard header.
pub fn report_csv(rows: &[(String, Metrics)]) -> String {
    let mut out = String::from("name,");
    out.push_str(&METRIC_COLUMNS.join(","));
    out.push('\n');
    for (name, metrics) in rows {
        out.push_str(name);
        out.push(',');
        out.push_str(&metrics.csv_row());
        out.push('\n');
    }
    out
}
