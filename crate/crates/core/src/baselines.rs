//! Binary classifiers: the DNF rule learner plus three reference
//! methods (naive Bayes, a single-hidden-layer MLP, a gain-ratio
//! decision tree), all behind one train/predict interface.
//!
//! Real-valued features are standardized (zero mean, unit deviation,
//! fitted on the training split) for naive Bayes and the MLP; the rule
//! learner sees binary features directly and real features through a
//! per-feature thermometer code (8 quantile thresholds fitted on the
//! training split). Everything is deterministic given the configured
//! seed, and every trained model serializes to a line-oriented text
//! format that reloads to bit-identical predictions.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::rng::SplitMix64;
use crate::ubrain::{self, Formula, Trit, UbrainConfig, UbrainModel};

/// Which classifier to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    Ubrain,
    NaiveBayes,
    Mlp,
    DecisionTree,
}

impl ClassifierKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Ubrain => "ubrain",
            ClassifierKind::NaiveBayes => "nb",
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::DecisionTree => "tree",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ubrain" => Ok(ClassifierKind::Ubrain),
            "nb" | "naive_bayes" => Ok(ClassifierKind::NaiveBayes),
            "mlp" => Ok(ClassifierKind::Mlp),
            "tree" | "decision_tree" => Ok(ClassifierKind::DecisionTree),
            other => Err(Error::Config(format!(
                "unknown classifier {other:?}; expected ubrain, nb, mlp or tree"
            ))),
        }
    }
}

/// MLP hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 10,
            learning_rate: 0.3,
            momentum: 0.2,
            epochs: 500,
            seed: 1,
        }
    }
}

/// Decision-tree hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    /// Minimum number of training rows in each child of a split.
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { min_leaf: 2 }
    }
}

/// Full training configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    /// None = standardize real features for nb/mlp, never for the others.
    pub standardize: Option<bool>,
    /// Thermometer thresholds per feature when the rule learner gets
    /// real-valued input.
    pub thermometer_bits: usize,
    pub mlp: MlpParams,
    pub tree: TreeParams,
    pub ubrain: UbrainConfig,
}

impl ClassifierConfig {
    pub fn new(kind: ClassifierKind) -> Self {
        ClassifierConfig {
            kind,
            standardize: None,
            thermometer_bits: 8,
            mlp: MlpParams::default(),
            tree: TreeParams::default(),
            ubrain: UbrainConfig::default(),
        }
    }
}

// ---------------------------------------------------------------------------
// feature preprocessing
// ---------------------------------------------------------------------------

/// Per-feature affine map to zero mean / unit deviation, fitted on the
/// training split. Constant features pass through unscaled.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Data("cannot standardize an empty split".into()));
        }
        let d = rows[0].len();
        let m = rows.len() as f64;
        let mut means = vec![0.0; d];
        for row in rows {
            for (acc, &v) in means.iter_mut().zip(row) {
                *acc += v;
            }
        }
        for v in &mut means {
            *v /= m;
        }
        let mut sds = vec![0.0; d];
        for row in rows {
            for ((acc, &v), &mu) in sds.iter_mut().zip(row).zip(&means) {
                *acc += (v - mu) * (v - mu);
            }
        }
        for v in &mut sds {
            *v = (*v / m).sqrt();
            if *v < 1e-12 {
                *v = 1.0;
            }
        }
        Ok(Standardizer { means, sds })
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .zip(&self.sds)
            .map(|((&v, &mu), &sd)| (v - mu) / sd)
            .collect()
    }
}

/// Thermometer code: per feature, `bits` quantile thresholds at
/// q = k/(bits+1); bit k is 1 when x >= threshold_k. Turns real
/// features into monotone bit patterns for the rule learner.
#[derive(Debug, Clone, PartialEq)]
pub struct Thermometer {
    /// thresholds[f] holds the per-feature cut points, ascending.
    pub thresholds: Vec<Vec<f64>>,
}

impl Thermometer {
    pub fn fit(rows: &[Vec<f64>], bits: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Data("cannot fit thermometer on empty split".into()));
        }
        if bits == 0 {
            return Err(Error::Config("thermometer needs at least 1 bit".into()));
        }
        let d = rows[0].len();
        let n = rows.len();
        let mut thresholds = Vec::with_capacity(d);
        for f in 0..d {
            let mut col: Vec<f64> = rows.iter().map(|r| r[f]).collect();
            col.sort_by(f64::total_cmp);
            let cuts: Vec<f64> = (1..=bits)
                .map(|k| {
                    let q = k as f64 / (bits + 1) as f64;
                    let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
                    col[idx]
                })
                .collect();
            thresholds.push(cuts);
        }
        Ok(Thermometer { thresholds })
    }

    pub fn encode(&self, row: &[f64]) -> Vec<bool> {
        let mut out = Vec::with_capacity(row.len() * self.thresholds[0].len());
        for (&v, cuts) in row.iter().zip(&self.thresholds) {
            for &c in cuts {
                out.push(v >= c);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// naive Bayes
// ---------------------------------------------------------------------------

const GAUSS_VAR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
enum NbLikelihood {
    /// Per-class per-feature mean and (floored) population variance.
    Gaussian {
        pos_mean: Vec<f64>,
        pos_var: Vec<f64>,
        neg_mean: Vec<f64>,
        neg_var: Vec<f64>,
    },
    /// Per-class per-feature Bernoulli p with Laplace smoothing.
    Bernoulli { pos_p: Vec<f64>, neg_p: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
struct NaiveBayesModel {
    prior_pos: f64,
    prior_neg: f64,
    likelihood: NbLikelihood,
}

fn class_moments(rows: &[&Vec<f64>], d: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for row in rows {
        for (acc, &v) in mean.iter_mut().zip(row.iter()) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= n;
    }
    let mut var = vec![0.0; d];
    for row in rows {
        for ((acc, &v), &mu) in var.iter_mut().zip(row.iter()).zip(&mean) {
            *acc += (v - mu) * (v - mu);
        }
    }
    for v in &mut var {
        *v = (*v / n).max(GAUSS_VAR_FLOOR);
    }
    (mean, var)
}

impl NaiveBayesModel {
    fn train(rows: &[Vec<f64>], labels: &[bool], binary: bool) -> Result<Self> {
        let d = rows[0].len();
        let pos: Vec<&Vec<f64>> = rows
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l)
            .map(|(r, _)| r)
            .collect();
        let neg: Vec<&Vec<f64>> = rows
            .iter()
            .zip(labels)
            .filter(|(_, &l)| !l)
            .map(|(r, _)| r)
            .collect();
        let m = rows.len() as f64;
        let prior_pos = pos.len() as f64 / m;
        let prior_neg = neg.len() as f64 / m;
        let likelihood = if binary {
            let p_of = |class: &[&Vec<f64>]| -> Vec<f64> {
                (0..d)
                    .map(|f| {
                        let ones = class.iter().filter(|r| r[f] >= 0.5).count();
                        (ones as f64 + 1.0) / (class.len() as f64 + 2.0)
                    })
                    .collect()
            };
            NbLikelihood::Bernoulli {
                pos_p: p_of(&pos),
                neg_p: p_of(&neg),
            }
        } else {
            let (pos_mean, pos_var) = class_moments(&pos, d);
            let (neg_mean, neg_var) = class_moments(&neg, d);
            NbLikelihood::Gaussian {
                pos_mean,
                pos_var,
                neg_mean,
                neg_var,
            }
        };
        Ok(NaiveBayesModel {
            prior_pos,
            prior_neg,
            likelihood,
        })
    }

    fn log_posteriors(&self, row: &[f64]) -> (f64, f64) {
        let mut lp = self.prior_pos.ln();
        let mut ln = self.prior_neg.ln();
        match &self.likelihood {
            NbLikelihood::Gaussian {
                pos_mean,
                pos_var,
                neg_mean,
                neg_var,
            } => {
                for (f, &x) in row.iter().enumerate() {
                    let g = |mu: f64, var: f64| {
                        -0.5 * (2.0 * std::f64::consts::PI * var).ln()
                            - (x - mu) * (x - mu) / (2.0 * var)
                    };
                    lp += g(pos_mean[f], pos_var[f]);
                    ln += g(neg_mean[f], neg_var[f]);
                }
            }
            NbLikelihood::Bernoulli { pos_p, neg_p } => {
                for (f, &x) in row.iter().enumerate() {
                    let bit = x >= 0.5;
                    let b = |p: f64| if bit { p.ln() } else { (1.0 - p).ln() };
                    lp += b(pos_p[f]);
                    ln += b(neg_p[f]);
                }
            }
        }
        (lp, ln)
    }

    fn predict(&self, row: &[f64]) -> bool {
        let (lp, ln) = self.log_posteriors(row);
        if lp > ln {
            true
        } else if lp < ln {
            false
        } else {
            // exact tie: higher prior wins, positive on a full tie
            self.prior_pos >= self.prior_neg
        }
    }
}

// ---------------------------------------------------------------------------
// multilayer perceptron
// ---------------------------------------------------------------------------

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One hidden layer, logistic activations everywhere, trained by
/// full-batch gradient descent with momentum on the mean squared error.
#[derive(Debug, Clone, PartialEq)]
struct MlpModel {
    hidden: usize,
    /// hidden x (d + 1), bias last, row-major.
    w1: Vec<f64>,
    /// hidden + 1, bias last.
    w2: Vec<f64>,
}

impl MlpModel {
    fn train(rows: &[Vec<f64>], labels: &[bool], params: &MlpParams) -> Result<Self> {
        if params.hidden == 0 {
            return Err(Error::Config("mlp needs at least one hidden unit".into()));
        }
        if !(params.learning_rate > 0.0) {
            return Err(Error::Config("mlp learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&params.momentum) {
            return Err(Error::Config("mlp momentum must be in [0, 1)".into()));
        }
        let d = rows[0].len();
        let h = params.hidden;
        let m = rows.len();
        let mut rng = SplitMix64::new(params.seed);
        let mut w1: Vec<f64> = (0..h * (d + 1)).map(|_| rng.uniform(-0.5, 0.5)).collect();
        let mut w2: Vec<f64> = (0..h + 1).map(|_| rng.uniform(-0.5, 0.5)).collect();
        let mut v1 = vec![0.0; w1.len()];
        let mut v2 = vec![0.0; w2.len()];
        let mut hid = vec![0.0; h];

        for _ in 0..params.epochs {
            let mut g1 = vec![0.0; w1.len()];
            let mut g2 = vec![0.0; w2.len()];
            for (row, &label) in rows.iter().zip(labels) {
                // forward
                for j in 0..h {
                    let base = j * (d + 1);
                    let mut acc = w1[base + d];
                    for (k, &x) in row.iter().enumerate() {
                        acc += w1[base + k] * x;
                    }
                    hid[j] = sigmoid(acc);
                }
                let mut out = w2[h];
                for j in 0..h {
                    out += w2[j] * hid[j];
                }
                let y = sigmoid(out);
                let t = if label { 1.0 } else { 0.0 };
                // backward: E = (1/M) sum 1/2 (y - t)^2
                let delta_out = (y - t) * y * (1.0 - y) / m as f64;
                for j in 0..h {
                    g2[j] += delta_out * hid[j];
                }
                g2[h] += delta_out;
                for j in 0..h {
                    let delta_h = delta_out * w2[j] * hid[j] * (1.0 - hid[j]);
                    let base = j * (d + 1);
                    for (k, &x) in row.iter().enumerate() {
                        g1[base + k] += delta_h * x;
                    }
                    g1[base + d] += delta_h;
                }
            }
            for i in 0..w1.len() {
                v1[i] = params.momentum * v1[i] - params.learning_rate * g1[i];
                w1[i] += v1[i];
            }
            for i in 0..w2.len() {
                v2[i] = params.momentum * v2[i] - params.learning_rate * g2[i];
                w2[i] += v2[i];
            }
        }
        Ok(MlpModel { hidden: h, w1, w2 })
    }

    fn output(&self, row: &[f64]) -> f64 {
        let h = self.hidden;
        let d = self.w1.len() / h - 1;
        let mut out = self.w2[h];
        for j in 0..h {
            let base = j * (d + 1);
            let mut acc = self.w1[base + d];
            for (k, &x) in row.iter().enumerate() {
                acc += self.w1[base + k] * x;
            }
            out += self.w2[j] * sigmoid(acc);
        }
        sigmoid(out)
    }

    fn predict(&self, row: &[f64]) -> bool {
        self.output(row) >= 0.5
    }
}

// ---------------------------------------------------------------------------
// decision tree
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum TreeNode {
    Leaf {
        label: bool,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct TreeModel {
    root: TreeNode,
}

fn entropy(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.log2();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).log2();
    }
    h
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain_ratio: f64,
}

/// Candidate thresholds for one feature: midpoints between adjacent
/// distinct values where the class composition changes.
fn candidate_thresholds(values: &[(f64, bool)]) -> Vec<f64> {
    // values sorted by value; group by distinct value
    let mut groups: Vec<(f64, usize, usize)> = Vec::new(); // (value, pos, total)
    for &(v, l) in values {
        match groups.last_mut() {
            Some((gv, pos, total)) if *gv == v => {
                *total += 1;
                if l {
                    *pos += 1;
                }
            }
            _ => groups.push((v, usize::from(l), 1)),
        }
    }
    let mut out = Vec::new();
    for w in groups.windows(2) {
        let (v1, p1, t1) = w[0];
        let (v2, p2, t2) = w[1];
        let pure_same =
            (p1 == 0 && p2 == 0) || (p1 == t1 && p2 == t2);
        if !pure_same {
            out.push((v1 + v2) / 2.0);
        }
    }
    out
}

fn best_split(rows: &[&Vec<f64>], labels: &[bool], min_leaf: usize) -> Option<SplitChoice> {
    let n = rows.len();
    let d = rows[0].len();
    let total_pos = labels.iter().filter(|&&l| l).count();
    let h_parent = entropy(total_pos, n);
    let mut best: Option<SplitChoice> = None;
    for f in 0..d {
        let mut col: Vec<(f64, bool)> = rows
            .iter()
            .zip(labels)
            .map(|(r, &l)| (r[f], l))
            .collect();
        col.sort_by(|a, b| a.0.total_cmp(&b.0));
        for thr in candidate_thresholds(&col) {
            let mut left_pos = 0;
            let mut left_n = 0;
            for &(v, l) in &col {
                if v < thr {
                    left_n += 1;
                    if l {
                        left_pos += 1;
                    }
                }
            }
            let right_n = n - left_n;
            if left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let right_pos = total_pos - left_pos;
            let wl = left_n as f64 / n as f64;
            let wr = right_n as f64 / n as f64;
            let gain =
                h_parent - wl * entropy(left_pos, left_n) - wr * entropy(right_pos, right_n);
            if gain <= 1e-12 {
                continue;
            }
            let split_info = -wl * wl.log2() - wr * wr.log2();
            if split_info <= 0.0 {
                continue;
            }
            let gr = gain / split_info;
            if best.as_ref().map_or(true, |b| gr > b.gain_ratio) {
                best = Some(SplitChoice {
                    feature: f,
                    threshold: thr,
                    gain_ratio: gr,
                });
            }
        }
    }
    best
}

/// When no candidate split has positive gain but the node is impure
/// (all proposed splits tie), split anyway on the first feature that
/// takes two values — this keeps the tree consistent with its training
/// data at min_leaf = 1.
fn fallback_split(rows: &[&Vec<f64>], min_leaf: usize) -> Option<(usize, f64)> {
    let n = rows.len();
    let d = rows[0].len();
    for f in 0..d {
        let mut vals: Vec<f64> = rows.iter().map(|r| r[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let thr = (w[0] + w[1]) / 2.0;
            let left_n = rows.iter().filter(|r| r[f] < thr).count();
            if left_n >= min_leaf && n - left_n >= min_leaf {
                return Some((f, thr));
            }
        }
    }
    None
}

fn grow(rows: Vec<&Vec<f64>>, labels: Vec<bool>, min_leaf: usize) -> TreeNode {
    let n = rows.len();
    let pos = labels.iter().filter(|&&l| l).count();
    if pos == 0 || pos == n {
        return TreeNode::Leaf { label: pos == n };
    }
    let choice = best_split(&rows, &labels, min_leaf)
        .map(|c| (c.feature, c.threshold))
        .or_else(|| fallback_split(&rows, min_leaf));
    let Some((feature, threshold)) = choice else {
        // cannot split under the min_leaf constraint: majority leaf,
        // positive on a tie
        return TreeNode::Leaf {
            label: 2 * pos >= n,
        };
    };
    let mut left_rows = Vec::new();
    let mut left_labels = Vec::new();
    let mut right_rows = Vec::new();
    let mut right_labels = Vec::new();
    for (row, label) in rows.into_iter().zip(labels) {
        if row[feature] < threshold {
            left_rows.push(row);
            left_labels.push(label);
        } else {
            right_rows.push(row);
            right_labels.push(label);
        }
    }
    TreeNode::Split {
        feature,
        threshold,
        left: Box::new(grow(left_rows, left_labels, min_leaf)),
        right: Box::new(grow(right_rows, right_labels, min_leaf)),
    }
}

impl TreeModel {
    fn train(rows: &[Vec<f64>], labels: &[bool], params: &TreeParams) -> Result<Self> {
        if params.min_leaf == 0 {
            return Err(Error::Config("tree min_leaf must be at least 1".into()));
        }
        let refs: Vec<&Vec<f64>> = rows.iter().collect();
        Ok(TreeModel {
            root: grow(refs, labels.to_vec(), params.min_leaf),
        })
    }

    fn predict(&self, row: &[f64]) -> bool {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { label } => return *label,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] < *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// unified interface
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum ModelImpl {
    Ubrain(UbrainModel),
    NaiveBayes(NaiveBayesModel),
    Mlp(MlpModel),
    Tree(TreeModel),
}

/// A trained classifier together with the preprocessing fitted on its
/// training split.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    kind: ClassifierKind,
    binary_input: bool,
    standardizer: Option<Standardizer>,
    thermometer: Option<Thermometer>,
    model: ModelImpl,
}

fn validate_features(features: &[FeatureVector], labels: &[bool]) -> Result<usize> {
    if features.is_empty() {
        return Err(Error::Data("no training instances".into()));
    }
    if features.len() != labels.len() {
        return Err(Error::Data(format!(
            "{} feature vectors but {} labels",
            features.len(),
            labels.len()
        )));
    }
    let d = features[0].values.len();
    if d == 0 {
        return Err(Error::Data("feature vectors are empty".into()));
    }
    for (i, f) in features.iter().enumerate() {
        if f.values.len() != d {
            return Err(Error::Data(format!(
                "feature vector {i} has {} values, expected {d}",
                f.values.len()
            )));
        }
        if f.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("feature vector {i} is not finite")));
        }
        if f.binary != features[0].binary {
            return Err(Error::Data(
                "mixed binary and real feature vectors".into(),
            ));
        }
    }
    if !labels.iter().any(|&l| l) || labels.iter().all(|&l| l) {
        return Err(Error::Data(
            "training split contains only one class".into(),
        ));
    }
    Ok(d)
}

/// Trains the configured classifier on one split.
pub fn train_classifier(
    features: &[FeatureVector],
    labels: &[bool],
    config: &ClassifierConfig,
) -> Result<TrainedClassifier> {
    validate_features(features, labels)?;
    let binary = features[0].binary;
    let raw: Vec<Vec<f64>> = features.iter().map(|f| f.values.clone()).collect();

    let standardize = !binary
        && config
            .standardize
            .unwrap_or(matches!(
                config.kind,
                ClassifierKind::NaiveBayes | ClassifierKind::Mlp
            ));
    let standardizer = if standardize {
        Some(Standardizer::fit(&raw)?)
    } else {
        None
    };
    let rows: Vec<Vec<f64>> = match &standardizer {
        Some(s) => raw.iter().map(|r| s.apply(r)).collect(),
        None => raw.clone(),
    };

    let mut thermometer = None;
    let model = match config.kind {
        ClassifierKind::Ubrain => {
            let instances: Vec<Vec<Trit>> = if binary {
                raw.iter()
                    .map(|r| r.iter().map(|&v| Trit::from_bit(v >= 0.5)).collect())
                    .collect()
            } else {
                let therm = Thermometer::fit(&raw, config.thermometer_bits)?;
                let encoded = raw
                    .iter()
                    .map(|r| ubrain::bits_to_trits(&therm.encode(r)))
                    .collect();
                thermometer = Some(therm);
                encoded
            };
            let positives: Vec<Vec<Trit>> = instances
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l)
                .map(|(i, _)| i.clone())
                .collect();
            let negatives: Vec<Vec<Trit>> = instances
                .iter()
                .zip(labels)
                .filter(|(_, &l)| !l)
                .map(|(i, _)| i.clone())
                .collect();
            ModelImpl::Ubrain(ubrain::train(&positives, &negatives, &config.ubrain)?)
        }
        ClassifierKind::NaiveBayes => {
            ModelImpl::NaiveBayes(NaiveBayesModel::train(&rows, labels, binary)?)
        }
        ClassifierKind::Mlp => ModelImpl::Mlp(MlpModel::train(&rows, labels, &config.mlp)?),
        ClassifierKind::DecisionTree => {
            ModelImpl::Tree(TreeModel::train(&rows, labels, &config.tree)?)
        }
    };

    Ok(TrainedClassifier {
        kind: config.kind,
        binary_input: binary,
        standardizer,
        thermometer,
        model,
    })
}

impl TrainedClassifier {
    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    /// The learned DNF formula, when the model is the rule learner.
    pub fn formula(&self) -> Option<&Formula> {
        match &self.model {
            ModelImpl::Ubrain(m) => Some(&m.formula),
            _ => None,
        }
    }

    pub fn predict(&self, features: &FeatureVector) -> Result<bool> {
        let row = match &self.standardizer {
            Some(s) => s.apply(&features.values),
            None => features.values.clone(),
        };
        Ok(match &self.model {
            ModelImpl::Ubrain(m) => {
                let trits: Vec<Trit> = match &self.thermometer {
                    Some(t) => ubrain::bits_to_trits(&t.encode(&features.values)),
                    None => features
                        .values
                        .iter()
                        .map(|&v| Trit::from_f64(if v >= 0.75 { 1.0 } else if v >= 0.25 { 0.5 } else { 0.0 }))
                        .collect::<Result<_>>()?,
                };
                m.classify(&trits)
            }
            ModelImpl::NaiveBayes(m) => m.predict(&row),
            ModelImpl::Mlp(m) => m.predict(&row),
            ModelImpl::Tree(m) => m.predict(&row),
        })
    }

    // -- text serialization ---------------------------------------------------

    /// Serializes the model (and its fitted preprocessing) to a
    /// line-oriented text format that reloads bit-identically.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "classifier={}", self.kind.name());
        let _ = writeln!(out, "binary_input={}", self.binary_input);
        match &self.standardizer {
            Some(s) => {
                let _ = writeln!(out, "standardize=true");
                let _ = writeln!(out, "means={}", join_floats(&s.means));
                let _ = writeln!(out, "sds={}", join_floats(&s.sds));
            }
            None => {
                let _ = writeln!(out, "standardize=false");
            }
        }
        match &self.thermometer {
            Some(t) => {
                let _ = writeln!(out, "thermometer_features={}", t.thresholds.len());
                let _ = writeln!(out, "thermometer_bits={}", t.thresholds[0].len());
                let flat: Vec<f64> = t.thresholds.iter().flatten().copied().collect();
                let _ = writeln!(out, "thermometer_thresholds={}", join_floats(&flat));
            }
            None => {
                let _ = writeln!(out, "thermometer_features=0");
            }
        }
        match &self.model {
            ModelImpl::Ubrain(m) => {
                let _ = writeln!(out, "positive_at_half={}", m.config.positive_at_half);
                let _ = writeln!(out, "n_attributes={}", m.formula.n_attributes);
                let _ = writeln!(out, "terms={}", m.formula.terms.len());
                for t in &m.formula.terms {
                    let _ = writeln!(out, "term={t}");
                }
            }
            ModelImpl::NaiveBayes(m) => {
                let _ = writeln!(out, "prior_pos={}", m.prior_pos);
                let _ = writeln!(out, "prior_neg={}", m.prior_neg);
                match &m.likelihood {
                    NbLikelihood::Gaussian {
                        pos_mean,
                        pos_var,
                        neg_mean,
                        neg_var,
                    } => {
                        let _ = writeln!(out, "likelihood=gaussian");
                        let _ = writeln!(out, "pos_mean={}", join_floats(pos_mean));
                        let _ = writeln!(out, "pos_var={}", join_floats(pos_var));
                        let _ = writeln!(out, "neg_mean={}", join_floats(neg_mean));
                        let _ = writeln!(out, "neg_var={}", join_floats(neg_var));
                    }
                    NbLikelihood::Bernoulli { pos_p, neg_p } => {
                        let _ = writeln!(out, "likelihood=bernoulli");
                        let _ = writeln!(out, "pos_p={}", join_floats(pos_p));
                        let _ = writeln!(out, "neg_p={}", join_floats(neg_p));
                    }
                }
            }
            ModelImpl::Mlp(m) => {
                let _ = writeln!(out, "hidden={}", m.hidden);
                let _ = writeln!(out, "w1={}", join_floats(&m.w1));
                let _ = writeln!(out, "w2={}", join_floats(&m.w2));
            }
            ModelImpl::Tree(m) => {
                let mut nodes = Vec::new();
                encode_tree(&m.root, &mut nodes);
                let _ = writeln!(out, "tree_nodes={}", nodes.len());
                for n in nodes {
                    let _ = writeln!(out, "node={n}");
                }
            }
        }
        out
    }

    /// Parses the output of [`TrainedClassifier::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().peekable();
        let kind = ClassifierKind::parse(&expect_kv(&mut lines, "classifier")?)?;
        let binary_input: bool = parse_field(&expect_kv(&mut lines, "binary_input")?)?;
        let standardize: bool = parse_field(&expect_kv(&mut lines, "standardize")?)?;
        let standardizer = if standardize {
            let means = parse_floats(&expect_kv(&mut lines, "means")?)?;
            let sds = parse_floats(&expect_kv(&mut lines, "sds")?)?;
            if means.len() != sds.len() {
                return Err(Error::Data("standardizer means/sds mismatch".into()));
            }
            Some(Standardizer { means, sds })
        } else {
            None
        };
        let tf: usize = parse_field(&expect_kv(&mut lines, "thermometer_features")?)?;
        let thermometer = if tf > 0 {
            let bits: usize = parse_field(&expect_kv(&mut lines, "thermometer_bits")?)?;
            let flat = parse_floats(&expect_kv(&mut lines, "thermometer_thresholds")?)?;
            if bits == 0 || flat.len() != tf * bits {
                return Err(Error::Data("thermometer threshold count mismatch".into()));
            }
            Some(Thermometer {
                thresholds: flat.chunks(bits).map(|c| c.to_vec()).collect(),
            })
        } else {
            None
        };
        let model = match kind {
            ClassifierKind::Ubrain => {
                let positive_at_half: bool =
                    parse_field(&expect_kv(&mut lines, "positive_at_half")?)?;
                let n_attributes: usize = parse_field(&expect_kv(&mut lines, "n_attributes")?)?;
                let n_terms: usize = parse_field(&expect_kv(&mut lines, "terms")?)?;
                let mut terms = Vec::with_capacity(n_terms);
                for _ in 0..n_terms {
                    let body = expect_kv(&mut lines, "term")?;
                    terms.push(parse_term(&body)?);
                }
                ModelImpl::Ubrain(UbrainModel {
                    formula: Formula {
                        terms,
                        n_attributes,
                    },
                    config: UbrainConfig { positive_at_half },
                })
            }
            ClassifierKind::NaiveBayes => {
                let prior_pos: f64 = parse_field(&expect_kv(&mut lines, "prior_pos")?)?;
                let prior_neg: f64 = parse_field(&expect_kv(&mut lines, "prior_neg")?)?;
                let lk = expect_kv(&mut lines, "likelihood")?;
                let likelihood = match lk.as_str() {
                    "gaussian" => NbLikelihood::Gaussian {
                        pos_mean: parse_floats(&expect_kv(&mut lines, "pos_mean")?)?,
                        pos_var: parse_floats(&expect_kv(&mut lines, "pos_var")?)?,
                        neg_mean: parse_floats(&expect_kv(&mut lines, "neg_mean")?)?,
                        neg_var: parse_floats(&expect_kv(&mut lines, "neg_var")?)?,
                    },
                    "bernoulli" => NbLikelihood::Bernoulli {
                        pos_p: parse_floats(&expect_kv(&mut lines, "pos_p")?)?,
                        neg_p: parse_floats(&expect_kv(&mut lines, "neg_p")?)?,
                    },
                    other => {
                        return Err(Error::Data(format!("unknown likelihood {other:?}")))
                    }
                };
                ModelImpl::NaiveBayes(NaiveBayesModel {
                    prior_pos,
                    prior_neg,
                    likelihood,
                })
            }
            ClassifierKind::Mlp => {
                let hidden: usize = parse_field(&expect_kv(&mut lines, "hidden")?)?;
                let w1 = parse_floats(&expect_kv(&mut lines, "w1")?)?;
                let w2 = parse_floats(&expect_kv(&mut lines, "w2")?)?;
                if hidden == 0 || w1.len() % hidden != 0 || w2.len() != hidden + 1 {
                    return Err(Error::Data("mlp weight shape mismatch".into()));
                }
                ModelImpl::Mlp(MlpModel { hidden, w1, w2 })
            }
            ClassifierKind::DecisionTree => {
                let count: usize = parse_field(&expect_kv(&mut lines, "tree_nodes")?)?;
                let mut nodes = Vec::with_capacity(count);
                for _ in 0..count {
                    nodes.push(expect_kv(&mut lines, "node")?);
                }
                let mut it = nodes.iter();
                let root = decode_tree(&mut it)?;
                if it.next().is_some() {
                    return Err(Error::Data("trailing tree nodes".into()));
                }
                ModelImpl::Tree(TreeModel { root })
            }
        };
        Ok(TrainedClassifier {
            kind,
            binary_input,
            standardizer,
            thermometer,
            model,
        })
    }
}

fn join_floats(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| Error::Data(format!("bad float {t:?}: {e}")))
        })
        .collect()
}

fn parse_field<T: std::str::FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim()
        .parse::<T>()
        .map_err(|e| Error::Data(format!("bad model field {s:?}: {e}")))
}

fn expect_kv<'a, I: Iterator<Item = &'a str>>(
    lines: &mut std::iter::Peekable<I>,
    key: &str,
) -> Result<String> {
    let line = lines
        .next()
        .ok_or_else(|| Error::Data(format!("model file ends before {key}=")))?;
    let (k, v) = line
        .split_once('=')
        .ok_or_else(|| Error::Data(format!("expected {key}=..., got {line:?}")))?;
    if k != key {
        return Err(Error::Data(format!("expected {key}=..., got {line:?}")));
    }
    Ok(v.to_string())
}

fn parse_term(body: &str) -> Result<crate::ubrain::Term> {
    let mut literals = Vec::new();
    for tok in body.split_whitespace() {
        let (negated, rest) = match tok.strip_prefix('~') {
            Some(r) => (true, r),
            None => (false, tok),
        };
        let idx = rest
            .strip_prefix('x')
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::Data(format!("bad literal {tok:?}")))?;
        literals.push(crate::ubrain::Literal {
            index: idx,
            negated,
        });
    }
    Ok(crate::ubrain::Term { literals })
}

fn encode_tree(node: &TreeNode, out: &mut Vec<String>) {
    match node {
        TreeNode::Leaf { label } => out.push(format!("leaf {label}")),
        TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            out.push(format!("split {feature} {threshold}"));
            encode_tree(left, out);
            encode_tree(right, out);
        }
    }
}

fn decode_tree<'a, I: Iterator<Item = &'a String>>(it: &mut I) -> Result<TreeNode> {
    let line = it
        .next()
        .ok_or_else(|| Error::Data("tree ends unexpectedly".into()))?;
    let mut tok = line.split_whitespace();
    match tok.next() {
        Some("leaf") => {
            let label: bool = parse_field(tok.next().unwrap_or(""))?;
            Ok(TreeNode::Leaf { label })
        }
        Some("split") => {
            let feature: usize = parse_field(tok.next().unwrap_or(""))?;
            let threshold: f64 = parse_field(tok.next().unwrap_or(""))?;
            let left = Box::new(decode_tree(it)?);
            let right = Box::new(decode_tree(it)?);
            Ok(TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            })
        }
        other => Err(Error::Data(format!("bad tree node {other:?}"))),
    }
}
