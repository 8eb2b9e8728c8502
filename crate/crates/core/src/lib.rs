//! Eddy-current non-destructive-testing signal classification.
//!
//! The crate takes two-channel eddy-current probe recordings (4096 samples
//! per channel in the reference setup) and turns them into defect
//! classifications through a small number of independent stages:
//!
//! * [`dataset`] — record/manifest ingestion, binary task construction and
//!   stratified k-fold planning,
//! * [`spectral`] — DFT magnitudes and the 100-bit banded FFT coding,
//! * [`wavelet`] — continuous, discrete and packet wavelet transforms plus
//!   the derived coefficient statistics,
//! * [`shape`] — impedance-plane locus signature `(L, W, alpha)` and
//!   scale/rotation-invariant descriptors,
//! * [`dimred`] — PCA (with the Gram trick for wide data) and Fisher LDA,
//! * [`ubrain`] — the U-BRAIN incremental DNF rule learner on ternary bits,
//! * [`baselines`] — naive Bayes, single-hidden-layer MLP and a gain-ratio
//!   decision tree for comparison,
//! * [`eval`] — confusion metrics, stratified cross-validation and the
//!   one-vs-rest suite,
//! * [`synth`] — deterministic synthetic datasets shaped like the two
//!   reference defect sets.
//!
//! Everything is deterministic: every randomized step takes an explicit
//! 64-bit seed and uses the SplitMix64 generator from [`rng`], so any run
//! can be reproduced bit-for-bit from its logged configuration.
//!
//! ```
//! use ecndt::dataset::{make_binary_task, stratified_kfold};
//! use ecndt::features::{FeatureMethod, PipelineSpec};
//! use ecndt::baselines::{ClassifierConfig, ClassifierKind};
//! use ecndt::eval::cross_validate;
//!
//! let dataset = ecndt::synth::set1(20, 7).unwrap();
//! let task = make_binary_task(&dataset, 1).unwrap();
//! let pipeline = PipelineSpec::new(FeatureMethod::Fft);
//! let config = ClassifierConfig::new(ClassifierKind::Ubrain);
//! let cv = cross_validate(&dataset, &task, &pipeline, &config, 10, 42).unwrap();
//! assert!(cv.mean.accuracy > 0.9);
//! ```

pub mod baselines;
pub mod dataset;
pub mod dimred;
pub mod error;
pub mod eval;
pub mod features;
pub mod linalg;
pub mod rng;
pub mod shape;
pub mod spectral;
pub mod synth;
pub mod ubrain;
pub mod wavelet;

pub use error::{Error, Result};
