//! Deterministic synthetic datasets shaped like the two reference
//! defect collections, for demos, tests and the acceptance suite.
//!
//! * [`set1`] — a two-class *signal* set: each record is 4096 samples of
//!   white noise plus two narrow spectral bumps whose band positions
//!   depend on the class. The banded spectrum code sees the bump bands
//!   at a stably low quantizer level and the noise bands near the
//!   middle, so the classes differ in a handful of reliable bits.
//! * [`set2`] — a twelve-class *locus* set: each record traces an
//!   ellipse in the impedance plane with class-specific length, width
//!   and orientation (four size pairs times three angles), with a few
//!   percent of per-record size jitter and additive point noise.
//!
//! Both sets use the crate's seeded generator exclusively, so a (count,
//! seed) pair always reproduces the identical dataset.

use crate::dataset::{Dataset, SignalRecord, DEFAULT_SAMPLE_RATE_HZ};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Samples per channel in both synthetic sets.
pub const RECORD_LEN: usize = 4096;

/// Spectral bands (of the 25-band coding) carrying the class-1 bumps.
pub const SET1_CLASS1_BANDS: [usize; 2] = [3, 9];
/// Spectral bands carrying the class-2 bumps.
pub const SET1_CLASS2_BANDS: [usize; 2] = [15, 21];
/// Bump half-width in DFT bins (full width 2 * 22 + 1 = 45 of the 81
/// bins of a band, placing the band median inside the bump).
const BUMP_HALF_WIDTH: usize = 22;
/// Per-cosine amplitude of a bump bin.
const BUMP_AMPLITUDE: f64 = 1.0;
/// Additive white-noise deviation.
const NOISE_SIGMA: f64 = 0.5;
/// Bins per coding band at 4096 samples (2049 bins over 25 bands).
const BINS_PER_BAND: usize = 81;

fn bump_channel(rng: &mut SplitMix64, bands: &[usize]) -> Vec<f64> {
    let n = RECORD_LEN;
    // random phase per bump bin
    let mut components: Vec<(f64, f64)> = Vec::new(); // (bin, phase)
    for &band in bands {
        let center = band * BINS_PER_BAND + BINS_PER_BAND / 2;
        for bin in center - BUMP_HALF_WIDTH..=center + BUMP_HALF_WIDTH {
            components.push((bin as f64, rng.uniform(0.0, 2.0 * std::f64::consts::PI)));
        }
    }
    let base = 2.0 * std::f64::consts::PI / n as f64;
    (0..n)
        .map(|t| {
            let mut acc = NOISE_SIGMA * rng.normal();
            for &(bin, phase) in &components {
                acc += BUMP_AMPLITUDE * (base * bin * t as f64 + phase).cos();
            }
            acc
        })
        .collect()
}

/// Two-class narrowband-bump signal set, `per_class` records per class,
/// classes 1 and 2.
pub fn set1(per_class: usize, seed: u64) -> Result<Dataset> {
    if per_class == 0 {
        return Err(Error::Config("per_class must be at least 1".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let mut records = Vec::with_capacity(2 * per_class);
    for class in 1..=2u32 {
        let bands: &[usize] = if class == 1 {
            &SET1_CLASS1_BANDS
        } else {
            &SET1_CLASS2_BANDS
        };
        for i in 0..per_class {
            records.push(SignalRecord {
                record_id: format!("s1_c{class}_{i:03}"),
                class_id: class,
                sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
                channel1: bump_channel(&mut rng, bands),
                channel2: bump_channel(&mut rng, bands),
            });
        }
    }
    Dataset::new(records)
}

/// The (major radius, minor radius, angle degrees) of each class of
/// [`set2`], classes 1..=12 in order.
pub fn set2_geometries() -> Vec<(f64, f64, f64)> {
    let sizes = [(6.0, 1.5), (6.0, 3.0), (10.0, 2.0), (10.0, 5.0)];
    let angles = [-45.0, 0.0, 45.0];
    let mut out = Vec::with_capacity(12);
    for &(a, b) in &sizes {
        for &deg in &angles {
            out.push((a, b, deg));
        }
    }
    out
}

/// Twelve-class elliptic-locus set, `per_class` records per class,
/// classes 1..=12.
pub fn set2(per_class: usize, seed: u64) -> Result<Dataset> {
    if per_class == 0 {
        return Err(Error::Config("per_class must be at least 1".into()));
    }
    let n = RECORD_LEN;
    let mut rng = SplitMix64::new(seed);
    let mut records = Vec::with_capacity(12 * per_class);
    for (ci, (a, b, deg)) in set2_geometries().into_iter().enumerate() {
        let class = ci as u32 + 1;
        for i in 0..per_class {
            // independent few-percent size jitter, slight angle jitter
            let aj = a * (1.0 + 0.04 * rng.normal());
            let bj = b * (1.0 + 0.04 * rng.normal());
            let dj = deg + 2.0 * rng.normal();
            let (sin_r, cos_r) = dj.to_radians().sin_cos();
            let noise = 0.005 * a;
            let mut ch1 = Vec::with_capacity(n);
            let mut ch2 = Vec::with_capacity(n);
            for t in 0..n {
                let ang = 2.0 * std::f64::consts::PI * t as f64 / n as f64;
                let x = aj * ang.cos();
                let y = bj * ang.sin();
                ch1.push(cos_r * x - sin_r * y + noise * rng.normal());
                ch2.push(sin_r * x + cos_r * y + noise * rng.normal());
            }
            records.push(SignalRecord {
                record_id: format!("s2_c{class:02}_{i:03}"),
                class_id: class,
                sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
                channel1: ch1,
                channel2: ch2,
            });
        }
    }
    Dataset::new(records)
}
