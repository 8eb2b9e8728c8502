//! Feature pipelines: one stateless extraction step per record plus an
//! optional fold-fitted reduction (PCA, or PCA followed by LDA).
//!
//! Extraction is a pure function of the record and the [`PipelineSpec`],
//! so feature tables can be computed once and reused across folds; only
//! the reduction (and any classifier-side preprocessing) is refitted on
//! each training split.

use rayon::prelude::*;
use std::io::Write as _;
use std::path::Path;

use crate::dataset::Dataset;
use crate::dataset::SignalRecord;
use crate::dimred::{lda_fit, lda_project, pca_fit, pca_project, LdaModel, PcaModel, PcaTarget};
use crate::error::{Error, Result};
use crate::shape;
use crate::spectral::{self, ChannelMode};
use crate::wavelet::{self, WaveletMethod, WaveletSpec};

/// Which per-record feature extraction to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMethod {
    /// 100-bit banded spectrum code.
    Fft,
    /// Impedance-plane shape descriptors (8 reals).
    Cbir,
    /// Scale-averaged power per translation + MAV per scale.
    CwtMavSap,
    /// The flattened continuous-transform matrix.
    CwtFull,
    /// (mav, variance) over the 13 pyramid sequences.
    Dwt,
    /// (mav, variance, entropy) over the 16 packet nodes.
    Pwt,
}

impl FeatureMethod {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fft" => Ok(FeatureMethod::Fft),
            "cbir" => Ok(FeatureMethod::Cbir),
            "cwt-mavsap" => Ok(FeatureMethod::CwtMavSap),
            "cwt-full" => Ok(FeatureMethod::CwtFull),
            "dwt" => Ok(FeatureMethod::Dwt),
            "pwt" => Ok(FeatureMethod::Pwt),
            other => Err(Error::Config(format!(
                "unknown feature method {other:?}; expected fft, cbir, \
                 cwt-mavsap, cwt-full, dwt or pwt"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureMethod::Fft => "fft",
            FeatureMethod::Cbir => "cbir",
            FeatureMethod::CwtMavSap => "cwt-mavsap",
            FeatureMethod::CwtFull => "cwt-full",
            FeatureMethod::Dwt => "dwt",
            FeatureMethod::Pwt => "pwt",
        }
    }
}

/// Fold-fitted dimensionality reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    None,
    Pca,
    PcaLda,
}

impl Reduction {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Reduction::None),
            "pca" => Ok(Reduction::Pca),
            "pca+lda" => Ok(Reduction::PcaLda),
            other => Err(Error::Config(format!(
                "unknown reduction {other:?}; expected none, pca or pca+lda"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Reduction::None => "none",
            Reduction::Pca => "pca",
            Reduction::PcaLda => "pca+lda",
        }
    }
}

/// A full feature pipeline: extraction method, channel, reduction and
/// their parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineSpec {
    pub method: FeatureMethod,
    pub reduction: Reduction,
    pub channel: ChannelMode,
    /// Amplitude quantile for the shape pipeline's denoising; 1 disables.
    pub denoise_quantile: f64,
    pub pca_target: PcaTarget,
    /// Number of discriminant directions; None = classes - 1.
    pub lda_components: Option<usize>,
}

impl PipelineSpec {
    pub fn new(method: FeatureMethod) -> Self {
        PipelineSpec {
            method,
            reduction: Reduction::None,
            channel: ChannelMode::Ch1,
            denoise_quantile: shape::DEFAULT_DENOISE_QUANTILE,
            pca_target: PcaTarget::default(),
            lda_components: None,
        }
    }

    pub fn with_reduction(mut self, reduction: Reduction) -> Self {
        self.reduction = reduction;
        self
    }

    pub fn with_channel(mut self, channel: ChannelMode) -> Self {
        self.channel = channel;
        self
    }

    /// Checks the (method, reduction, channel) combination is one the
    /// pipeline supports.
    pub fn validate(&self) -> Result<()> {
        use FeatureMethod::*;
        use Reduction::*;
        let ok = match self.reduction {
            None => true,
            Pca => matches!(self.method, CwtMavSap | Dwt | Pwt),
            PcaLda => matches!(self.method, CwtMavSap | CwtFull),
        };
        if !ok {
            return Err(Error::Config(format!(
                "reduction {} is not supported for the {} features; \
                 supported: fft/none, cbir/none, cwt-mavsap/{{none,pca,pca+lda}}, \
                 cwt-full/{{none,pca+lda}}, dwt/{{none,pca}}, pwt/{{none,pca}}",
                self.reduction.name(),
                self.method.name()
            )));
        }
        if self.channel == ChannelMode::Complex
            && matches!(self.method, CwtMavSap | CwtFull | Dwt | Pwt)
        {
            return Err(Error::Config(
                "wavelet pipelines operate on one real channel (ch1 or ch2)".into(),
            ));
        }
        if !(0.0 < self.denoise_quantile && self.denoise_quantile <= 1.0) {
            return Err(Error::Config(format!(
                "denoise quantile must be in (0, 1], got {}",
                self.denoise_quantile
            )));
        }
        Ok(())
    }
}

/// One record's features before reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    /// All values are 0/1 and downstream code may treat them as bits.
    pub binary: bool,
}

/// Runs the extraction stage of the pipeline on one record.
pub fn extract_features(record: &SignalRecord, spec: &PipelineSpec) -> Result<FeatureVector> {
    spec.validate()?;
    match spec.method {
        FeatureMethod::Fft => {
            let code = spectral::encode_fft_features(record, spec.channel)?;
            Ok(FeatureVector {
                values: code.as_reals(),
                binary: true,
            })
        }
        FeatureMethod::Cbir => Ok(FeatureVector {
            values: shape::shape_features(record, spec.denoise_quantile)?,
            binary: false,
        }),
        FeatureMethod::CwtMavSap | FeatureMethod::CwtFull | FeatureMethod::Dwt
        | FeatureMethod::Pwt => {
            let method = match spec.method {
                FeatureMethod::CwtMavSap => WaveletMethod::CwtMavSap,
                FeatureMethod::CwtFull => WaveletMethod::CwtFull,
                FeatureMethod::Dwt => WaveletMethod::Dwt,
                FeatureMethod::Pwt => WaveletMethod::Pwt,
                _ => unreachable!(),
            };
            Ok(FeatureVector {
                values: wavelet::wavelet_features(
                    record,
                    method,
                    spec.channel,
                    &WaveletSpec::db5(),
                )?,
                binary: false,
            })
        }
    }
}

/// Features for every record of a dataset, in record order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub record_ids: Vec<String>,
    pub class_ids: Vec<u32>,
    pub vectors: Vec<FeatureVector>,
}

impl FeatureTable {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.vectors.first().map_or(0, |v| v.values.len())
    }
}

/// Extracts the whole dataset (parallel over records, order preserved).
pub fn extract_table(dataset: &Dataset, spec: &PipelineSpec) -> Result<FeatureTable> {
    spec.validate()?;
    let vectors: Vec<FeatureVector> = dataset
        .records
        .par_iter()
        .map(|r| extract_features(r, spec))
        .collect::<Result<_>>()?;
    Ok(FeatureTable {
        record_ids: dataset.records.iter().map(|r| r.record_id.clone()).collect(),
        class_ids: dataset.records.iter().map(|r| r.class_id).collect(),
        vectors,
    })
}

// ---------------------------------------------------------------------------
// fold-fitted reduction
// ---------------------------------------------------------------------------

/// PCA / LDA models fitted on one training split.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedReduction {
    pub pca: Option<PcaModel>,
    pub lda: Option<LdaModel>,
}

impl FittedReduction {
    pub fn identity() -> Self {
        FittedReduction {
            pca: None,
            lda: None,
        }
    }

    pub fn apply(&self, vector: &FeatureVector) -> Result<FeatureVector> {
        let mut values = vector.values.clone();
        let mut binary = vector.binary;
        if let Some(pca) = &self.pca {
            values = pca_project(pca, &values)?;
            binary = false;
        }
        if let Some(lda) = &self.lda {
            values = lda_project(lda, &values)?;
            binary = false;
        }
        Ok(FeatureVector { values, binary })
    }

    pub fn output_dimension(&self, input: usize) -> usize {
        if let Some(lda) = &self.lda {
            lda.projection.len()
        } else if let Some(pca) = &self.pca {
            pca.components.len()
        } else {
            input
        }
    }
}

/// Fits the reduction stage on a training split. `labels` drive the
/// discriminant step; they are ignored for plain PCA.
pub fn fit_reduction(
    vectors: &[FeatureVector],
    labels: &[bool],
    spec: &PipelineSpec,
) -> Result<FittedReduction> {
    spec.validate()?;
    if spec.reduction == Reduction::None {
        return Ok(FittedReduction::identity());
    }
    if vectors.is_empty() {
        return Err(Error::Data("cannot fit a reduction on no data".into()));
    }
    let rows: Vec<Vec<f64>> = vectors.iter().map(|v| v.values.clone()).collect();
    let pca = pca_fit(&rows, spec.pca_target)?;
    let lda = if spec.reduction == Reduction::PcaLda {
        if labels.len() != vectors.len() {
            return Err(Error::Data(format!(
                "{} labels for {} vectors",
                labels.len(),
                vectors.len()
            )));
        }
        let projected: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| pca_project(&pca, r))
            .collect::<Result<_>>()?;
        let lda_labels: Vec<u32> = labels.iter().map(|&l| u32::from(l)).collect();
        Some(lda_fit(&projected, &lda_labels, spec.lda_components)?)
    } else {
        None
    };
    Ok(FittedReduction {
        pca: Some(pca),
        lda,
    })
}

// ---------------------------------------------------------------------------
// feature CSV
// ---------------------------------------------------------------------------

/// Writes a feature table as CSV. Binary tables use `bit1..bitN`
/// columns, real tables `f1..fN`; the reader keys on the prefix.
pub fn write_feature_csv(table: &FeatureTable, path: &Path) -> Result<()> {
    if table.is_empty() {
        return Err(Error::Data("refusing to write an empty feature table".into()));
    }
    let d = table.dimension();
    let binary = table.vectors[0].binary;
    let prefix = if binary { "bit" } else { "f" };
    let mut out = String::from("record_id,class_id");
    for i in 1..=d {
        out.push(',');
        out.push_str(prefix);
        out.push_str(&i.to_string());
    }
    out.push('\n');
    for ((id, class), vector) in table
        .record_ids
        .iter()
        .zip(&table.class_ids)
        .zip(&table.vectors)
    {
        out.push_str(id);
        out.push(',');
        out.push_str(&class.to_string());
        for v in &vector.values {
            out.push(',');
            if binary {
                out.push(if *v >= 0.5 { '1' } else { '0' });
            } else {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a feature table written by [`write_feature_csv`].
pub fn read_feature_csv(path: &Path) -> Result<FeatureTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty feature file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "record_id" || cols[1] != "class_id" {
        return Err(Error::parse(
            path,
            1,
            "header must start with record_id,class_id and at least one feature column",
        ));
    }
    let binary = cols[2].starts_with("bit");
    let prefix = if binary { "bit" } else { "f" };
    for (i, c) in cols[2..].iter().enumerate() {
        if *c != format!("{prefix}{}", i + 1) {
            return Err(Error::parse(
                path,
                1,
                format!("feature column {} should be {prefix}{}", c, i + 1),
            ));
        }
    }
    let d = cols.len() - 2;
    let mut table = FeatureTable {
        record_ids: Vec::new(),
        class_ids: Vec::new(),
        vectors: Vec::new(),
    };
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 2 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {} fields, got {}", d + 2, fields.len()),
            ));
        }
        let class_id: u32 = fields[1]
            .parse()
            .map_err(|e| Error::parse(path, lineno, format!("bad class id: {e}")))?;
        let values: Vec<f64> = fields[2..]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::parse(path, lineno, format!("bad value {f:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(path, lineno, "non-finite feature value"));
        }
        if binary && values.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::parse(path, lineno, "bit column with non-bit value"));
        }
        table.record_ids.push(fields[0].to_string());
        table.class_ids.push(class_id);
        table.vectors.push(FeatureVector { values, binary });
    }
    if table.is_empty() {
        return Err(Error::parse(path, 1, "feature file has no data rows"));
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn test_record(n: usize, seed: u64) -> SignalRecord {
        let mut rng = SplitMix64::new(seed);
        SignalRecord {
            record_id: format!("r{seed}"),
            class_id: 1,
            sample_rate_hz: 10_000.0,
            channel1: (0..n).map(|_| rng.normal()).collect(),
            channel2: (0..n).map(|_| rng.normal()).collect(),
        }
    }

    // -- parsing ----------------------------------------------------------------

    #[test]
    fn method_and_reduction_parse_round_trip() {
        for m in [
            FeatureMethod::Fft,
            FeatureMethod::Cbir,
            FeatureMethod::CwtMavSap,
            FeatureMethod::CwtFull,
            FeatureMethod::Dwt,
            FeatureMethod::Pwt,
        ] {
            assert_eq!(FeatureMethod::parse(m.name()).unwrap(), m);
        }
        for r in [Reduction::None, Reduction::Pca, Reduction::PcaLda] {
            assert_eq!(Reduction::parse(r.name()).unwrap(), r);
        }
        assert!(FeatureMethod::parse("dft").is_err());
        assert!(Reduction::parse("lda").is_err());
    }

    // -- combination rules ---------------------------------------------------------

    #[test]
    fn reduction_combinations_follow_the_table() {
        use FeatureMethod::*;
        use Reduction::*;
        let allowed = [
            (Fft, None),
            (Cbir, None),
            (CwtMavSap, None),
            (CwtMavSap, Pca),
            (CwtMavSap, PcaLda),
            (CwtFull, None),
            (CwtFull, PcaLda),
            (Dwt, None),
            (Dwt, Pca),
            (Pwt, None),
            (Pwt, Pca),
        ];
        for (m, r) in allowed {
            assert!(
                PipelineSpec::new(m).with_reduction(r).validate().is_ok(),
                "{}/{}",
                m.name(),
                r.name()
            );
        }
        let forbidden = [
            (Fft, Pca),
            (Fft, PcaLda),
            (Cbir, Pca),
            (Cbir, PcaLda),
            (CwtFull, Pca),
            (Dwt, PcaLda),
            (Pwt, PcaLda),
        ];
        for (m, r) in forbidden {
            assert!(
                PipelineSpec::new(m).with_reduction(r).validate().is_err(),
                "{}/{}",
                m.name(),
                r.name()
            );
        }
    }

    #[test]
    fn complex_channel_only_for_fft() {
        let ok = PipelineSpec::new(FeatureMethod::Fft).with_channel(ChannelMode::Complex);
        assert!(ok.validate().is_ok());
        let bad = PipelineSpec::new(FeatureMethod::Dwt).with_channel(ChannelMode::Complex);
        assert!(bad.validate().is_err());
    }

    // -- extraction -----------------------------------------------------------------

    #[test]
    fn fft_features_are_binary_bits() {
        let rec = test_record(512, 1);
        let f = extract_features(&rec, &PipelineSpec::new(FeatureMethod::Fft)).unwrap();
        assert!(f.binary);
        assert_eq!(f.values.len(), 100);
        assert!(f.values.iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn shape_features_are_eight_reals() {
        let rec = test_record(512, 2);
        let f = extract_features(&rec, &PipelineSpec::new(FeatureMethod::Cbir)).unwrap();
        assert!(!f.binary);
        assert_eq!(f.values.len(), 8);
    }

    #[test]
    fn wavelet_feature_dimensions() {
        let rec = test_record(512, 3);
        let f = extract_features(&rec, &PipelineSpec::new(FeatureMethod::CwtMavSap)).unwrap();
        assert_eq!(f.values.len(), 512 + 100);
        let f = extract_features(&rec, &PipelineSpec::new(FeatureMethod::Pwt)).unwrap();
        assert_eq!(f.values.len(), 48);
    }

    #[test]
    fn table_extraction_preserves_record_order() {
        let records: Vec<SignalRecord> = (0..6)
            .map(|i| {
                let mut r = test_record(128, 100 + i);
                r.record_id = format!("rec_{i}");
                r.class_id = (i % 2) as u32 + 1;
                r
            })
            .collect();
        let dataset = Dataset::new(records).unwrap();
        let table = extract_table(&dataset, &PipelineSpec::new(FeatureMethod::Fft)).unwrap();
        assert_eq!(table.len(), 6);
        assert_eq!(table.record_ids[3], "rec_3");
        assert_eq!(table.dimension(), 100);
        // identical to the serial path
        for (i, rec) in dataset.records.iter().enumerate() {
            let single =
                extract_features(rec, &PipelineSpec::new(FeatureMethod::Fft)).unwrap();
            assert_eq!(table.vectors[i], single);
        }
    }

    // -- reduction ---------------------------------------------------------------------

    fn toy_vectors() -> (Vec<FeatureVector>, Vec<bool>) {
        // two elongated clusters in 4-d, informative in the first two dims
        let mut rng = SplitMix64::new(9);
        let mut vectors = Vec::new();
        let mut labels = Vec::new();
        for i in 0..24 {
            let positive = i % 2 == 0;
            let c = if positive { 2.0 } else { -2.0 };
            vectors.push(FeatureVector {
                values: vec![
                    c + rng.normal() * 0.2,
                    0.5 * c + rng.normal() * 0.2,
                    rng.normal() * 0.05,
                    rng.normal() * 0.05,
                ],
                binary: false,
            });
            labels.push(positive);
        }
        (vectors, labels)
    }

    #[test]
    fn identity_reduction_is_a_no_op() {
        let (vectors, labels) = toy_vectors();
        let spec = PipelineSpec::new(FeatureMethod::Cbir);
        let red = fit_reduction(&vectors, &labels, &spec).unwrap();
        assert_eq!(red, FittedReduction::identity());
        assert_eq!(red.apply(&vectors[0]).unwrap(), vectors[0]);
    }

    #[test]
    fn pca_reduction_shrinks_dimension() {
        let (vectors, labels) = toy_vectors();
        let spec = PipelineSpec::new(FeatureMethod::Dwt).with_reduction(Reduction::Pca);
        let red = fit_reduction(&vectors, &labels, &spec).unwrap();
        let out = red.apply(&vectors[0]).unwrap();
        assert!(out.values.len() < 4, "kept {} dims", out.values.len());
        assert!(!out.binary);
        assert_eq!(red.output_dimension(4), out.values.len());
    }

    #[test]
    fn pca_lda_reduction_yields_one_discriminant() {
        let (vectors, labels) = toy_vectors();
        let spec = PipelineSpec::new(FeatureMethod::CwtMavSap).with_reduction(Reduction::PcaLda);
        let red = fit_reduction(&vectors, &labels, &spec).unwrap();
        assert!(red.lda.is_some());
        let out = red.apply(&vectors[0]).unwrap();
        assert_eq!(out.values.len(), 1);
        // the single discriminant separates the classes linearly
        let projected: Vec<(f64, bool)> = vectors
            .iter()
            .zip(&labels)
            .map(|(v, &l)| (red.apply(v).unwrap().values[0], l))
            .collect();
        let pos_min = projected
            .iter()
            .filter(|(_, l)| *l)
            .map(|(v, _)| *v)
            .fold(f64::MAX, f64::min);
        let pos_max = projected
            .iter()
            .filter(|(_, l)| *l)
            .map(|(v, _)| *v)
            .fold(f64::MIN, f64::max);
        let neg_min = projected
            .iter()
            .filter(|(_, l)| !*l)
            .map(|(v, _)| *v)
            .fold(f64::MAX, f64::min);
        let neg_max = projected
            .iter()
            .filter(|(_, l)| !*l)
            .map(|(v, _)| *v)
            .fold(f64::MIN, f64::max);
        assert!(
            pos_min > neg_max || neg_min > pos_max,
            "classes overlap on the discriminant"
        );
    }

    // -- csv --------------------------------------------------------------------------

    #[test]
    fn feature_csv_round_trips_real_and_binary() {
        let dir = tempfile::tempdir().unwrap();
        let real_table = FeatureTable {
            record_ids: vec!["a".into(), "b".into()],
            class_ids: vec![1, 2],
            vectors: vec![
                FeatureVector {
                    values: vec![0.1, 1.0 / 3.0, -7.125e17],
                    binary: false,
                },
                FeatureVector {
                    values: vec![f64::MIN_POSITIVE, 0.3, 2.0f64.powi(53)],
                    binary: false,
                },
            ],
        };
        let path = dir.path().join("real.csv");
        write_feature_csv(&real_table, &path).unwrap();
        assert_eq!(read_feature_csv(&path).unwrap(), real_table);

        let bit_table = FeatureTable {
            record_ids: vec!["a".into()],
            class_ids: vec![1],
            vectors: vec![FeatureVector {
                values: vec![1.0, 0.0, 1.0],
                binary: true,
            }],
        };
        let path = dir.path().join("bits.csv");
        write_feature_csv(&bit_table, &path).unwrap();
        let back = read_feature_csv(&path).unwrap();
        assert_eq!(back, bit_table);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("record_id,class_id,bit1,bit2,bit3\n"));
    }

    #[test]
    fn feature_csv_rejects_malformed_input() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "record_id,class_id,f1\nr1,1\n").unwrap();
        let err = read_feature_csv(&path).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
        std::fs::write(&path, "wrong,header\n").unwrap();
        assert!(read_feature_csv(&path).is_err());
        std::fs::write(&path, "record_id,class_id,bit1\nr1,1,0.5\n").unwrap();
        assert!(read_feature_csv(&path).is_err());
    }
}
