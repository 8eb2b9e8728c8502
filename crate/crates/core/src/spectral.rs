//! DFT magnitudes and the banded 100-bit FFT coding.
//!
//! The coding reduces a record to 25 band levels of 4 bits each: the
//! magnitude spectrum over bins `0..=N/2` is cut into 25 contiguous
//! bands (the last absorbs the remainder; for N = 4096 that is 24 bands
//! of 81 bins plus one of 105), and each band's average magnitude is
//! quantized to 16 levels inside a dynamic range centred on the band
//! median. Centring on the median makes the code invariant to scaling
//! the input by any positive constant.

use num_complex::Complex64;

use crate::dataset::SignalRecord;
use crate::error::{Error, Result};

/// Number of spectral bands in the coding.
pub const NUM_BANDS: usize = 25;
/// Quantization levels per band (4 bits).
pub const LEVELS: u32 = 16;
/// Total coded bits: 25 bands x 4 bits.
pub const CODE_BITS: usize = NUM_BANDS * 4;

/// Which channel(s) feed a spectral or feature computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelMode {
    #[default]
    Ch1,
    Ch2,
    /// ch1 + i*ch2 as one complex signal.
    Complex,
}

impl ChannelMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ch1" => Ok(ChannelMode::Ch1),
            "ch2" => Ok(ChannelMode::Ch2),
            "complex" => Ok(ChannelMode::Complex),
            other => Err(Error::Config(format!(
                "unknown channel mode {other:?} (expected ch1, ch2 or complex)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChannelMode::Ch1 => "ch1",
            ChannelMode::Ch2 => "ch2",
            ChannelMode::Complex => "complex",
        }
    }
}

/// Magnitude spectrum; `magnitudes.len()` is the transform length N.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub magnitudes: Vec<f64>,
}

impl Spectrum {
    pub fn bins(&self) -> usize {
        self.magnitudes.len()
    }

    /// Bins `0..=N/2`, the range the band coding uses for every channel
    /// mode (for real inputs the rest is redundant; for complex inputs
    /// the same range keeps codes comparable).
    pub fn half(&self) -> &[f64] {
        &self.magnitudes[..self.magnitudes.len() / 2 + 1]
    }
}

fn check_input(x: &[Complex64]) -> Result<()> {
    let n = x.len();
    if n < 2 || n & (n - 1) != 0 {
        return Err(Error::Data(format!(
            "transform length must be a power of two >= 2, got {n}"
        )));
    }
    if x.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Data("non-finite sample in transform input".into()));
    }
    Ok(())
}

/// Forward transform, X[k] = sum_n x[n] exp(-2 pi i k n / N), computed by
/// an iterative radix-2 decimation-in-time FFT.
pub fn dft_complex(x: &[Complex64]) -> Result<Vec<Complex64>> {
    check_input(x)?;
    let n = x.len();
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    // bit-reversal permutation
    let bits = n.trailing_zeros();
    for (i, &v) in x.iter().enumerate() {
        let j = (i.reverse_bits() >> (usize::BITS - bits)) as usize;
        a[j] = v;
    }
    let mut m = 2;
    while m <= n {
        let half = m / 2;
        let step = -2.0 * std::f64::consts::PI / m as f64;
        for start in (0..n).step_by(m) {
            for j in 0..half {
                // per-index twiddle from polar form keeps error at the
                // trig level instead of accumulating via recurrence
                let w = Complex64::from_polar(1.0, step * j as f64);
                let t = w * a[start + j + half];
                let u = a[start + j];
                a[start + j] = u + t;
                a[start + j + half] = u - t;
            }
        }
        m *= 2;
    }
    Ok(a)
}

/// Inverse of [`dft_complex`] including the 1/N factor.
pub fn idft_complex(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let conj: Vec<Complex64> = x.iter().map(|c| c.conj()).collect();
    let y = dft_complex(&conj)?;
    let n = y.len() as f64;
    Ok(y.into_iter().map(|c| c.conj() / n).collect())
}

/// Magnitude spectrum of a (possibly complex) signal.
pub fn dft(samples: &[Complex64]) -> Result<Spectrum> {
    let x = dft_complex(samples)?;
    Ok(Spectrum {
        magnitudes: x.into_iter().map(|c| c.norm()).collect(),
    })
}

/// Extracts the signal a channel mode selects from a record.
pub fn channel_samples(record: &SignalRecord, mode: ChannelMode) -> Vec<Complex64> {
    match mode {
        ChannelMode::Ch1 => record
            .channel1
            .iter()
            .map(|&r| Complex64::new(r, 0.0))
            .collect(),
        ChannelMode::Ch2 => record
            .channel2
            .iter()
            .map(|&r| Complex64::new(r, 0.0))
            .collect(),
        ChannelMode::Complex => record
            .channel1
            .iter()
            .zip(&record.channel2)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// band statistics and quantization
// ---------------------------------------------------------------------------

/// Per-band magnitude summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandStat {
    pub min: f64,
    pub max: f64,
    pub avg: f64,
    pub median: f64,
}

/// Contiguous equal-width bin ranges; the last range absorbs the
/// remainder (2049 bins, 25 bands -> 24 x 81 + 105).
pub fn band_ranges(n_bins: usize, bands: usize) -> Result<Vec<std::ops::Range<usize>>> {
    if bands == 0 || n_bins < bands {
        return Err(Error::Config(format!(
            "cannot split {n_bins} bins into {bands} bands"
        )));
    }
    let width = n_bins / bands;
    let mut out = Vec::with_capacity(bands);
    for b in 0..bands {
        let start = b * width;
        let end = if b + 1 == bands { n_bins } else { start + width };
        out.push(start..end);
    }
    Ok(out)
}

/// Statistics of each band over bins `0..=N/2` of a spectrum.
pub fn band_stats(spectrum: &Spectrum, bands: usize) -> Result<Vec<BandStat>> {
    let half = spectrum.half();
    let ranges = band_ranges(half.len(), bands)?;
    Ok(ranges
        .into_iter()
        .map(|r| {
            let slice = &half[r];
            let mut sorted = slice.to_vec();
            sorted.sort_by(|a, b| a.total_cmp(b));
            let n = sorted.len();
            let median = if n % 2 == 1 {
                sorted[n / 2]
            } else {
                0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
            };
            BandStat {
                min: sorted[0],
                max: sorted[n - 1],
                avg: slice.iter().sum::<f64>() / n as f64,
                median,
            }
        })
        .collect())
}

/// Quantizes one band to a 4-bit level.
///
/// The dynamic range is centred on the median m with half-width
/// d = max(m - min, max - m); the average is mapped linearly over
/// [m - d, m + d] to 16 levels and floored, clamping to 0..=15.
/// A flat band (d = 0) codes to the midpoint level 8.
pub fn quantize_band(stat: &BandStat) -> u8 {
    let m = stat.median;
    let d = (m - stat.min).max(stat.max - m);
    if d == 0.0 {
        return 8;
    }
    let lo = m - d;
    let hi = m + d;
    let level = ((stat.avg - lo) / (hi - lo) * LEVELS as f64).floor();
    level.clamp(0.0, 15.0) as u8
}

/// The 100-bit FFT coding of a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitFeatureVector {
    /// 4-bit level per band, band order.
    pub levels: Vec<u8>,
    /// Flat bits, band-major, each level big-endian (MSB first).
    pub bits: Vec<bool>,
}

impl BitFeatureVector {
    /// Bits as 0.0/1.0 reals for numeric classifiers.
    pub fn as_reals(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    /// Recovers the band levels from the flat bits.
    pub fn decode_levels(bits: &[bool]) -> Vec<u8> {
        bits.chunks(4)
            .map(|nib| nib.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8))
            .collect()
    }
}

/// Codes a record into [`CODE_BITS`] bits over [`NUM_BANDS`] bands.
pub fn encode_fft_features(record: &SignalRecord, mode: ChannelMode) -> Result<BitFeatureVector> {
    record.validate()?;
    let spectrum = dft(&channel_samples(record, mode))?;
    let stats = band_stats(&spectrum, NUM_BANDS)?;
    let levels: Vec<u8> = stats.iter().map(quantize_band).collect();
    let mut bits = Vec::with_capacity(levels.len() * 4);
    for &level in &levels {
        for shift in (0..4).rev() {
            bits.push((level >> shift) & 1 == 1);
        }
    }
    Ok(BitFeatureVector { levels, bits })
}

// ---------------------------------------------------------------------------
