//! Line-oriented `key = value` experiment configuration.
//!
//! The same format serves both directions: hand-written config files (plus
//! `--set key=value` overrides) are parsed into an [`ExperimentConfig`],
//! and a finished run renders its fully resolved configuration back out as
//! `run_log.txt`. Because the log is itself a valid config file, any run
//! can be replayed verbatim from its log.
//!
//! Format rules:
//! - one `key = value` pair per line (spaces around `=` optional)
//! - blank lines and lines starting with `#` are ignored
//! - later occurrences of a key override earlier ones
//! - unknown keys are rejected

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ecndt::baselines::{ClassifierConfig, ClassifierKind};
use ecndt::dimred::PcaTarget;
use ecndt::features::{FeatureMethod, PipelineSpec, Reduction};
use ecndt::shape::DEFAULT_DENOISE_QUANTILE;
use ecndt::spectral::ChannelMode;
use ecndt::{Error, Result};

/// A fully resolved experiment description: dataset, feature pipeline,
/// classifier, cross-validation protocol and output location.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub manifest: PathBuf,
    pub pipeline: PipelineSpec,
    pub classifier: ClassifierConfig,
    /// Cross-validation fold count.
    pub folds: usize,
    /// Seed for the fold assignment (and nothing else; classifier seeds
    /// are configured separately).
    pub seed: u64,
    /// `Some(id)`: one binary experiment, that class against the rest.
    /// `None`: the full one-vs-rest suite over every class.
    pub positive_class: Option<u32>,
    pub output: PathBuf,
}

/// Raw key/value pairs from a config file, before typing.
pub type KeyValues = BTreeMap<String, String>;

/// Parses config text. `origin` names the source in error messages.
pub fn parse_kv_text(text: &str, origin: &str) -> Result<KeyValues> {
    let mut kv = KeyValues::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "{origin}:{}: expected `key = value`, found {line:?}",
                idx + 1
            ))
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!(
                "{origin}:{}: empty key",
                idx + 1
            )));
        }
        kv.insert(key.to_string(), value.trim().to_string());
    }
    Ok(kv)
}

/// Reads and parses a config file.
pub fn parse_kv_file(path: &Path) -> Result<KeyValues> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_kv_text(&text, &path.display().to_string())
}

/// Applies `--set key=value` overrides on top of file-sourced pairs.
pub fn apply_overrides(kv: &mut KeyValues, sets: &[String]) -> Result<()> {
    for set in sets {
        let (key, value) = set.split_once('=').ok_or_else(|| {
            Error::Config(format!("override {set:?} is not of the form key=value"))
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("override {set:?} has an empty key")));
        }
        kv.insert(key.to_string(), value.trim().to_string());
    }
    Ok(())
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Config(format!(
            "{key}: expected true or false, got {other:?}"
        ))),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Config(format!("{key}: expected a finite number, got {value:?}")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("{key}: expected a non-negative integer, got {value:?}")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value
        .parse::<u64>()
        .map_err(|_| Error::Config(format!("{key}: expected a non-negative integer, got {value:?}")))
}

fn parse_u32(key: &str, value: &str) -> Result<u32> {
    value
        .parse::<u32>()
        .map_err(|_| Error::Config(format!("{key}: expected a non-negative integer, got {value:?}")))
}

/// Types the raw pairs into an [`ExperimentConfig`], filling defaults and
/// rejecting unknown keys and invalid combinations.
pub fn resolve(kv: &KeyValues) -> Result<ExperimentConfig> {
    let mut kv = kv.clone();
    let mut take = |key: &str| kv.remove(key);

    let manifest = take("manifest")
        .ok_or_else(|| Error::Config("missing required key `manifest`".into()))?;
    let pipeline_name = take("pipeline")
        .ok_or_else(|| Error::Config("missing required key `pipeline`".into()))?;
    let classifier_name = take("classifier")
        .ok_or_else(|| Error::Config("missing required key `classifier`".into()))?;
    let output = take("output")
        .ok_or_else(|| Error::Config("missing required key `output`".into()))?;

    let method = FeatureMethod::parse(&pipeline_name)?;
    let mut pipeline = PipelineSpec::new(method);
    if let Some(v) = take("channel") {
        pipeline.channel = ChannelMode::parse(&v)?;
    }
    if let Some(v) = take("denoise_quantile") {
        pipeline.denoise_quantile = parse_f64("denoise_quantile", &v)?;
    }
    if let Some(v) = take("reduction") {
        pipeline.reduction = Reduction::parse(&v)?;
    }
    let pca_energy = take("pca_energy");
    let pca_components = take("pca_components");
    pipeline.pca_target = match (pca_energy, pca_components) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "pca_energy and pca_components are mutually exclusive".into(),
            ))
        }
        (Some(e), None) => PcaTarget::Energy(parse_f64("pca_energy", &e)?),
        (None, Some(c)) => PcaTarget::Components(parse_usize("pca_components", &c)?),
        (None, None) => PcaTarget::default(),
    };
    if let Some(v) = take("lda_components") {
        pipeline.lda_components = match v.as_str() {
            "auto" => None,
            other => Some(parse_usize("lda_components", other)?),
        };
    }
    pipeline.validate()?;

    let mut classifier = ClassifierConfig::new(ClassifierKind::parse(&classifier_name)?);
    if let Some(v) = take("standardize") {
        classifier.standardize = match v.as_str() {
            "auto" => None,
            other => Some(parse_bool("standardize", other)?),
        };
    }
    if let Some(v) = take("thermometer_bits") {
        classifier.thermometer_bits = parse_usize("thermometer_bits", &v)?;
        if classifier.thermometer_bits == 0 {
            return Err(Error::Config("thermometer_bits must be at least 1".into()));
        }
    }
    if let Some(v) = take("ubrain_positive_at_half") {
        classifier.ubrain.positive_at_half = parse_bool("ubrain_positive_at_half", &v)?;
    }
    if let Some(v) = take("mlp_hidden") {
        classifier.mlp.hidden = parse_usize("mlp_hidden", &v)?;
    }
    if let Some(v) = take("mlp_learning_rate") {
        classifier.mlp.learning_rate = parse_f64("mlp_learning_rate", &v)?;
    }
    if let Some(v) = take("mlp_momentum") {
        classifier.mlp.momentum = parse_f64("mlp_momentum", &v)?;
    }
    if let Some(v) = take("mlp_epochs") {
        classifier.mlp.epochs = parse_usize("mlp_epochs", &v)?;
    }
    if let Some(v) = take("mlp_seed") {
        classifier.mlp.seed = parse_u64("mlp_seed", &v)?;
    }
    if let Some(v) = take("tree_min_leaf") {
        classifier.tree.min_leaf = parse_usize("tree_min_leaf", &v)?;
    }

    let folds = match take("folds") {
        Some(v) => parse_usize("folds", &v)?,
        None => 10,
    };
    if folds < 2 {
        return Err(Error::Config(format!("folds must be at least 2, got {folds}")));
    }
    let seed = match take("seed") {
        Some(v) => parse_u64("seed", &v)?,
        None => 1,
    };
    let positive_class = match take("positive_class") {
        None => None,
        Some(v) if v == "all" => None,
        Some(v) => Some(parse_u32("positive_class", &v)?),
    };

    if let Some(stray) = kv.keys().next() {
        return Err(Error::Config(format!(
            "unknown configuration key `{stray}`"
        )));
    }

    Ok(ExperimentConfig {
        manifest: PathBuf::from(manifest),
        pipeline,
        classifier,
        folds,
        seed,
        positive_class,
        output: PathBuf::from(output),
    })
}

/// Convenience: file + overrides -> resolved config.
pub fn load(config: Option<&Path>, sets: &[String]) -> Result<ExperimentConfig> {
    let mut kv = match config {
        Some(path) => parse_kv_file(path)?,
        None => KeyValues::new(),
    };
    apply_overrides(&mut kv, sets)?;
    resolve(&kv)
}

/// Renders a config with every key explicit, in a fixed order. The output
/// parses back to an identical config, and rendering is idempotent.
pub fn render(cfg: &ExperimentConfig) -> String {
    let mut out = String::from("# resolved experiment configuration\n");
    let mut line = |key: &str, value: String| {
        let _ = writeln!(out, "{key} = {value}");
    };
    line("manifest", cfg.manifest.display().to_string());
    line("pipeline", cfg.pipeline.method.name().to_string());
    line("channel", cfg.pipeline.channel.name().to_string());
    line("denoise_quantile", cfg.pipeline.denoise_quantile.to_string());
    line("reduction", cfg.pipeline.reduction.name().to_string());
    match cfg.pipeline.pca_target {
        PcaTarget::Energy(e) => line("pca_energy", e.to_string()),
        PcaTarget::Components(k) => line("pca_components", k.to_string()),
    }
    line(
        "lda_components",
        cfg.pipeline
            .lda_components
            .map_or_else(|| "auto".to_string(), |k| k.to_string()),
    );
    line("classifier", cfg.classifier.kind.name().to_string());
    line(
        "standardize",
        cfg.classifier
            .standardize
            .map_or_else(|| "auto".to_string(), |b| b.to_string()),
    );
    line(
        "thermometer_bits",
        cfg.classifier.thermometer_bits.to_string(),
    );
    line(
        "ubrain_positive_at_half",
        cfg.classifier.ubrain.positive_at_half.to_string(),
    );
    line("mlp_hidden", cfg.classifier.mlp.hidden.to_string());
    line(
        "mlp_learning_rate",
        cfg.classifier.mlp.learning_rate.to_string(),
    );
    line("mlp_momentum", cfg.classifier.mlp.momentum.to_string());
    line("mlp_epochs", cfg.classifier.mlp.epochs.to_string());
    line("mlp_seed", cfg.classifier.mlp.seed.to_string());
    line("tree_min_leaf", cfg.classifier.tree.min_leaf.to_string());
    line("folds", cfg.folds.to_string());
    line("seed", cfg.seed.to_string());
    line(
        "positive_class",
        cfg.positive_class
            .map_or_else(|| "all".to_string(), |c| c.to_string()),
    );
    line("output", cfg.output.display().to_string());
    out
}

/// Default pipeline spec used by defaults in the config grammar; exposed
/// for tests.
pub fn default_denoise_quantile() -> f64 {
    DEFAULT_DENOISE_QUANTILE
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_kv() -> KeyValues {
        parse_kv_text(
            "manifest = data/manifest.csv\npipeline = fft\nclassifier = ubrain\noutput = out",
            "test",
        )
        .unwrap()
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = resolve(&base_kv()).unwrap();
        assert_eq!(cfg.manifest, PathBuf::from("data/manifest.csv"));
        assert_eq!(cfg.pipeline.method, FeatureMethod::Fft);
        assert_eq!(cfg.pipeline.reduction, Reduction::None);
        assert_eq!(cfg.pipeline.channel, ChannelMode::Ch1);
        assert_eq!(cfg.pipeline.pca_target, PcaTarget::Energy(0.90));
        assert_eq!(cfg.classifier.kind, ClassifierKind::Ubrain);
        assert_eq!(cfg.classifier.standardize, None);
        assert_eq!(cfg.folds, 10);
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.positive_class, None);
    }

    #[test]
    fn comments_blanks_and_spacing_are_tolerated() {
        let kv = parse_kv_text(
            "# a comment\n\n  pipeline=dwt  \n manifest = m.csv\nclassifier= nb\noutput =o\n",
            "test",
        )
        .unwrap();
        let cfg = resolve(&kv).unwrap();
        assert_eq!(cfg.pipeline.method, FeatureMethod::Dwt);
        assert_eq!(cfg.classifier.kind, ClassifierKind::NaiveBayes);
    }

    #[test]
    fn later_keys_and_overrides_win() {
        let mut kv = parse_kv_text(
            "manifest=a\nmanifest=b\npipeline=fft\nclassifier=ubrain\noutput=o",
            "test",
        )
        .unwrap();
        assert_eq!(kv.get("manifest").unwrap(), "b");
        apply_overrides(&mut kv, &["manifest=c".to_string(), "seed=9".to_string()]).unwrap();
        let cfg = resolve(&kv).unwrap();
        assert_eq!(cfg.manifest, PathBuf::from("c"));
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn unknown_key_is_a_config_error() {
        let mut kv = base_kv();
        kv.insert("bogus".into(), "1".into());
        let err = resolve(&kv).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn missing_required_key_is_reported_by_name() {
        let mut kv = base_kv();
        kv.remove("pipeline");
        let err = resolve(&kv).unwrap_err();
        assert!(err.to_string().contains("pipeline"), "{err}");
    }

    #[test]
    fn malformed_line_reports_origin_and_line() {
        let err = parse_kv_text("pipeline = fft\nnonsense", "cfg.txt").unwrap_err();
        assert!(err.to_string().contains("cfg.txt:2"), "{err}");
    }

    #[test]
    fn pca_energy_and_components_conflict() {
        let mut kv = base_kv();
        kv.insert("pipeline".into(), "dwt".into());
        kv.insert("reduction".into(), "pca".into());
        kv.insert("pca_energy".into(), "0.9".into());
        kv.insert("pca_components".into(), "3".into());
        let err = resolve(&kv).unwrap_err();
        assert!(err.to_string().contains("mutually exclusive"), "{err}");
    }

    #[test]
    fn invalid_pipeline_reduction_pair_is_rejected_at_resolve() {
        let mut kv = base_kv();
        // fft features are binary codes; the reduction stages need reals
        kv.insert("reduction".into(), "pca".into());
        let err = resolve(&kv).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn positive_class_all_means_one_vs_rest() {
        let mut kv = base_kv();
        kv.insert("positive_class".into(), "all".into());
        assert_eq!(resolve(&kv).unwrap().positive_class, None);
        kv.insert("positive_class".into(), "3".into());
        assert_eq!(resolve(&kv).unwrap().positive_class, Some(3));
    }

    #[test]
    fn render_round_trips_exactly() {
        let mut kv = base_kv();
        kv.insert("pipeline".into(), "cwt-mavsap".into());
        kv.insert("reduction".into(), "pca+lda".into());
        kv.insert("pca_energy".into(), "0.85".into());
        kv.insert("lda_components".into(), "1".into());
        kv.insert("classifier".into(), "mlp".into());
        kv.insert("standardize".into(), "true".into());
        kv.insert("mlp_epochs".into(), "250".into());
        kv.insert("folds".into(), "4".into());
        kv.insert("seed".into(), "7".into());
        kv.insert("positive_class".into(), "2".into());
        let cfg = resolve(&kv).unwrap();
        let rendered = render(&cfg);
        let reparsed = resolve(&parse_kv_text(&rendered, "render").unwrap()).unwrap();
        assert_eq!(reparsed, cfg);
        assert_eq!(render(&reparsed), rendered);
    }

    #[test]
    fn folds_below_two_rejected() {
        let mut kv = base_kv();
        kv.insert("folds".into(), "1".into());
        assert!(resolve(&kv).is_err());
    }
}
