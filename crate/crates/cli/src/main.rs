//! `ecndt` — eddy-current inspection signal classification toolkit.
//!
//! Thin argument-parsing shell over [`ecndt_cli::commands`]. Exit codes:
//! 0 success, 1 configuration error, 2 data/IO error, 3 consistency
//! error (contradictory training data).

use std::path::PathBuf;

use clap::{ArgAction, Parser, Subcommand};

use ecndt::baselines::{ClassifierConfig, ClassifierKind};
use ecndt::features::{FeatureMethod, PipelineSpec};
use ecndt::spectral::ChannelMode;
use ecndt::Error;

use ecndt_cli::commands::{self, PlotKind};
use ecndt_cli::config;

#[derive(Parser)]
#[command(
    name = "ecndt",
    version,
    about = "Eddy-current inspection signal classification toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark dataset as a canonical dataset directory
    Synth {
        /// Benchmark family: 1 = two-class narrowband signals, 2 = twelve-class impedance loci
        #[arg(long)]
        set: u32,
        /// Records per class
        #[arg(long, default_value_t = 20)]
        per_class: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output dataset directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a raw dump or existing manifest into a canonical dataset directory
    Import {
        /// A manifest file, a dataset directory, or a directory of `<class>_<id>.txt` files
        #[arg(long)]
        input: PathBuf,
        /// Input layout: `manifest` or `raw` (default: autodetect)
        #[arg(long)]
        format: Option<String>,
        /// Output dataset directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract a feature table from a dataset
    Features {
        #[arg(long)]
        manifest: PathBuf,
        /// fft | cwt-mavsap | cwt-full | dwt | pwt | cbir
        #[arg(long)]
        pipeline: String,
        /// ch1 | ch2 | complex (complex: fft only)
        #[arg(long, default_value = "ch1")]
        channel: String,
        /// Amplitude quantile for locus denoising (cbir only); 1 disables
        #[arg(long, default_value_t = ecndt::shape::DEFAULT_DENOISE_QUANTILE)]
        denoise_quantile: f64,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one classifier on every row of a feature table
    Train {
        /// Feature CSV written by `features` (or by a run)
        #[arg(long)]
        features: PathBuf,
        /// ubrain | nb | mlp | tree
        #[arg(long)]
        classifier: String,
        /// Class treated as positive (default: smallest class id present)
        #[arg(long)]
        positive_class: Option<u32>,
        /// auto | true | false (auto: standardize real features for nb/mlp)
        #[arg(long, default_value = "auto")]
        standardize: String,
        /// Thermometer bits per feature when the rule learner gets real input
        #[arg(long, default_value_t = 8)]
        thermometer_bits: usize,
        /// Whether a rule truth of exactly 1/2 counts as positive
        #[arg(long, default_value_t = true, action = ArgAction::Set)]
        ubrain_positive_at_half: bool,
        #[arg(long, default_value_t = 10)]
        mlp_hidden: usize,
        #[arg(long, default_value_t = 0.3)]
        mlp_learning_rate: f64,
        #[arg(long, default_value_t = 0.2)]
        mlp_momentum: f64,
        #[arg(long, default_value_t = 500)]
        mlp_epochs: usize,
        #[arg(long, default_value_t = 1)]
        mlp_seed: u64,
        #[arg(long, default_value_t = 2)]
        tree_min_leaf: usize,
        /// Output model path (text serialization)
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a serialized model against a labeled feature table
    Evaluate {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Class treated as positive (default: smallest class id present)
        #[arg(long)]
        positive_class: Option<u32>,
        /// Optional metrics CSV to write
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full experiment: features, reduction, cross-validated training, reports
    Run {
        /// `key = value` config file (see README for the key list)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Set or override single keys, e.g. --set seed=7
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Shorthand for --set output=DIR
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Derive plot-ready CSV (and optional SVG) from a finished run
    Plot {
        /// Run directory (for metric-bars: a run directory or a directory of runs)
        #[arg(long)]
        run: PathBuf,
        /// scatter-lwa | lda-1d | pca-3d | metric-bars
        #[arg(long)]
        kind: String,
        /// Output directory (default: the run directory)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render minimal SVG files
        #[arg(long)]
        svg: bool,
    },
}

fn dispatch(cli: Cli) -> ecndt::Result<()> {
    match cli.command {
        Command::Synth {
            set,
            per_class,
            seed,
            out,
        } => {
            let manifest = commands::cmd_synth(set, per_class, seed, &out)?;
            println!("wrote {}", manifest.display());
        }
        Command::Import { input, format, out } => {
            let manifest = commands::cmd_import(&input, format.as_deref(), &out)?;
            println!("wrote {}", manifest.display());
        }
        Command::Features {
            manifest,
            pipeline,
            channel,
            denoise_quantile,
            out,
        } => {
            let mut spec = PipelineSpec::new(FeatureMethod::parse(&pipeline)?);
            spec.channel = ChannelMode::parse(&channel)?;
            spec.denoise_quantile = denoise_quantile;
            let (records, dimension) = commands::cmd_features(&manifest, &spec, &out)?;
            println!(
                "wrote {} ({records} records x {dimension} features)",
                out.display()
            );
        }
        Command::Train {
            features,
            classifier,
            positive_class,
            standardize,
            thermometer_bits,
            ubrain_positive_at_half,
            mlp_hidden,
            mlp_learning_rate,
            mlp_momentum,
            mlp_epochs,
            mlp_seed,
            tree_min_leaf,
            out,
        } => {
            let mut cfg = ClassifierConfig::new(ClassifierKind::parse(&classifier)?);
            cfg.standardize = match standardize.as_str() {
                "auto" => None,
                "true" => Some(true),
                "false" => Some(false),
                other => {
                    return Err(Error::Config(format!(
                        "standardize: expected auto, true or false, got {other:?}"
                    )))
                }
            };
            cfg.thermometer_bits = thermometer_bits;
            cfg.ubrain.positive_at_half = ubrain_positive_at_half;
            cfg.mlp.hidden = mlp_hidden;
            cfg.mlp.learning_rate = mlp_learning_rate;
            cfg.mlp.momentum = mlp_momentum;
            cfg.mlp.epochs = mlp_epochs;
            cfg.mlp.seed = mlp_seed;
            cfg.tree.min_leaf = tree_min_leaf;
            let outcome = commands::cmd_train(&features, &cfg, positive_class, &out)?;
            println!(
                "wrote {} (training accuracy {:.4} on {} records, positive class {})",
                out.display(),
                outcome.accuracy,
                outcome.records,
                outcome.positive
            );
            if let Some(formula) = outcome.formula {
                println!("formula: {formula}");
            }
        }
        Command::Evaluate {
            features,
            model,
            positive_class,
            out,
        } => {
            let metrics =
                commands::cmd_evaluate(&features, &model, positive_class, out.as_deref())?;
            println!("{}", commands::metrics_line(&metrics));
            if let Some(path) = out {
                println!("wrote {}", path.display());
            }
        }
        Command::Run {
            config,
            mut set,
            output,
        } => {
            if let Some(dir) = output {
                set.push(format!("output={}", dir.display()));
            }
            let cfg = config::load(config.as_deref(), &set)?;
            let summary = commands::run_experiment(&cfg)?;
            println!("wrote {}", summary.report_path.display());
            println!(
                "{}: {}",
                summary.headline_name,
                commands::metrics_line(&summary.headline)
            );
        }
        Command::Plot {
            run,
            kind,
            out,
            svg,
        } => {
            let kind = PlotKind::parse(&kind)?;
            let files = commands::emit_plots(&run, kind, out.as_deref(), svg)?;
            for file in files {
                println!("wrote {}", file.display());
            }
        }
    }
    Ok(())
}

fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) => 1,
        Error::Io { .. } | Error::Parse { .. } | Error::Data(_) => 2,
        Error::Inconsistent(_) => 3,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
