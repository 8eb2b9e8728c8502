//! Wavelet transforms and wavelet-domain features.
//!
//! Everything runs on the Daubechies-5 filter pair (10 taps). Three
//! transforms are exposed:
//!
//! * [`cwt`] — continuous transform against a mother wavelet tabulated
//!   by the cascade algorithm at resolution 2^-10, integer scales
//!   1..=100 in the reference configuration, zero-padded outside the
//!   signal;
//! * [`dwt`] — the decimated pyramid with periodic extension, 12 levels
//!   on 4096-sample records (details of length 2048 down to 1 plus a
//!   length-1 approximation);
//! * [`pwt`] — the full packet tree, 4 levels giving 16 nodes of 256
//!   coefficients, reported in frequency order (Gray-code reordering of
//!   the tree order, since each high-pass split mirrors its sub-band).
//!
//! Periodic extension keeps the decimated transforms orthogonal, so they
//! conserve energy exactly — the test suites lean on that.

use rayon::prelude::*;

use crate::dataset::SignalRecord;
use crate::error::{Error, Result};
use crate::spectral::ChannelMode;

/// Scales 1..=CWT_SCALES feed the continuous-transform pipelines.
pub const CWT_SCALES: usize = 100;
/// Pyramid depth for the decimated transform on reference records.
pub const DWT_LEVELS: usize = 12;
/// Packet-tree depth.
pub const PWT_LEVELS: usize = 4;

/// Analysis filter pair plus the cascade resolution for tabulating the
/// mother wavelet.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSpec {
    pub family: String,
    /// Low-pass analysis taps h; sums to sqrt(2).
    pub dec_lo: Vec<f64>,
    /// High-pass analysis taps g[m] = (-1)^m h[L-1-m].
    pub dec_hi: Vec<f64>,
    /// The mother wavelet is tabulated at spacing 2^-cascade_resolution.
    pub cascade_resolution: u32,
}

/// Daubechies-5 low-pass taps (17 significant digits, computed by
/// spectral factorization of the order-5 binomial half-band polynomial).
const DB5_LO: [f64; 10] = [
    0.16010239797419291,
    0.60382926979718967,
    0.72430852843777293,
    0.13842814590132073,
    -0.24229488706638203,
    -0.032244869584638375,
    0.077571493840045714,
    -0.0062414902127982743,
    -0.012580751999081999,
    0.0033357252854737713,
];

impl WaveletSpec {
    /// The default db5 pair at cascade resolution 2^-10.
    pub fn db5() -> Self {
        let dec_lo = DB5_LO.to_vec();
        let l = dec_lo.len();
        let dec_hi: Vec<f64> = (0..l)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * dec_lo[l - 1 - m]
            })
            .collect();
        WaveletSpec {
            family: "db5".into(),
            dec_lo,
            dec_hi,
            cascade_resolution: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.dec_lo.len();
        if l < 2 || l % 2 != 0 || self.dec_hi.len() != l {
            return Err(Error::Config(format!(
                "filter pair must have equal even lengths, got {l} / {}",
                self.dec_hi.len()
            )));
        }
        let sum: f64 = self.dec_lo.iter().sum();
        if (sum - std::f64::consts::SQRT_2).abs() > 1e-10 {
            return Err(Error::Config(format!(
                "low-pass taps sum to {sum}, expected sqrt(2)"
            )));
        }
        if self.cascade_resolution == 0 || self.cascade_resolution > 16 {
            return Err(Error::Config(
                "cascade resolution must be in 1..=16".into(),
            ));
        }
        Ok(())
    }

    /// Tabulates the mother wavelet on the dyadic grid k * 2^-J over its
    /// support [0, L-1].
    ///
    /// Cascade construction: psi = 2^(J/2) *
    /// (h * up_2(h) * up_4(h) * ... * up_2^(J-2)(h) * up_2^(J-1)(g))
    /// where `*` is convolution and up_m inserts m-1 zeros between taps.
    /// The single high-pass factor sits at the coarsest position, which
    /// is the two-scale relation psi(t) = sqrt(2) sum_k g[k] phi(2t - k)
    /// unrolled J-1 more times for phi.
    pub fn psi_table(&self) -> Vec<f64> {
        let j = self.cascade_resolution;
        let mut seq = vec![1.0];
        for step in 0..j {
            let (taps, up) = if step + 1 == j {
                (&self.dec_hi, 1usize << (j - 1))
            } else {
                (&self.dec_lo, 1usize << step)
            };
            seq = conv_upsampled(&seq, taps, up);
        }
        let scale = 2f64.powi(j as i32 / 2) * if j % 2 == 1 { std::f64::consts::SQRT_2 } else { 1.0 };
        for v in &mut seq {
            *v *= scale;
        }
        seq
    }

    /// Length of the wavelet support in signal-time units.
    pub fn support(&self) -> usize {
        self.dec_lo.len() - 1
    }
}

/// Convolution with `taps` upsampled by factor `up`.
fn conv_upsampled(seq: &[f64], taps: &[f64], up: usize) -> Vec<f64> {
    let out_len = seq.len() + (taps.len() - 1) * up;
    let mut out = vec![0.0; out_len];
    for (i, &s) in seq.iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        for (t, &c) in taps.iter().enumerate() {
            out[i + t * up] += s * c;
        }
    }
    out
}

fn check_signal(samples: &[f64]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Data("empty signal".into()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite sample in signal".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// continuous transform
// ---------------------------------------------------------------------------

/// Coefficients of the continuous transform, scale-major: row `a - 1`
/// holds translations 0..n-1 at integer scale `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct CwtMatrix {
    pub max_scale: usize,
    pub coefficients: Vec<Vec<f64>>,
}

/// C[a][b] = (1/sqrt(a)) * sum_t f[t] psi((t - b)/a), psi looked up in
/// the cascade table (nearest grid point), signal zero-padded.
pub fn cwt(samples: &[f64], max_scale: usize, spec: &WaveletSpec) -> Result<CwtMatrix> {
    check_signal(samples)?;
    spec.validate()?;
    if max_scale == 0 {
        return Err(Error::Config("max_scale must be at least 1".into()));
    }
    let table = spec.psi_table();
    let res = 1u64 << spec.cascade_resolution;
    let support = spec.support();
    let n = samples.len();

    let coefficients: Vec<Vec<f64>> = (1..=max_scale)
        .into_par_iter()
        .map(|a| {
            let inv_sqrt_a = 1.0 / (a as f64).sqrt();
            let step = res as f64 / a as f64; // table indices per unit t
            let reach = support * a; // last t - b with psi != 0
            (0..n)
                .map(|b| {
                    let t_hi = (b + reach).min(n - 1);
                    let mut acc = 0.0;
                    for t in b..=t_hi {
                        let idx = ((t - b) as f64 * step).round() as usize;
                        if let Some(&p) = table.get(idx) {
                            acc += samples[t] * p;
                        }
                    }
                    acc * inv_sqrt_a
                })
                .collect()
        })
        .collect();

    Ok(CwtMatrix {
        max_scale,
        coefficients,
    })
}

/// Scale-averaged power per translation: SAP(b) = (1/M) sum_a C[a][b]^2.
pub fn sap(matrix: &CwtMatrix) -> Vec<f64> {
    let m = matrix.coefficients.len();
    if m == 0 {
        return Vec::new();
    }
    let n = matrix.coefficients[0].len();
    let mut out = vec![0.0; n];
    for row in &matrix.coefficients {
        for (acc, &c) in out.iter_mut().zip(row) {
            *acc += c * c;
        }
    }
    for v in &mut out {
        *v /= m as f64;
    }
    out
}

// ---------------------------------------------------------------------------
// decimated transforms
// ---------------------------------------------------------------------------

/// Named coefficient sequences of a decimated transform.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffBank {
    pub sequences: Vec<(String, Vec<f64>)>,
}

impl CoeffBank {
    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.sequences
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s.as_slice())
    }

    pub fn total_energy(&self) -> f64 {
        self.sequences
            .iter()
            .map(|(_, s)| s.iter().map(|v| v * v).sum::<f64>())
            .sum()
    }
}

/// One periodized analysis split:
/// a[k] = sum_m h[m] x[(2k + m) mod N], d[k] likewise with g.
fn analysis_step(x: &[f64], spec: &WaveletSpec) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let half = n / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for k in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for (m, (&h, &g)) in spec.dec_lo.iter().zip(&spec.dec_hi).enumerate() {
            let xv = x[(2 * k + m) % n];
            a += h * xv;
            d += g * xv;
        }
        approx[k] = a;
        detail[k] = d;
    }
    (approx, detail)
}

/// 12-level (by default `levels`) decimated pyramid with periodic
/// extension. Sequences are stored deepest-first:
/// `approx_L, detail_L, detail_(L-1), ..., detail_1`.
pub fn dwt(samples: &[f64], levels: usize, spec: &WaveletSpec) -> Result<CoeffBank> {
    check_signal(samples)?;
    spec.validate()?;
    let n = samples.len();
    if levels == 0 {
        return Err(Error::Config("levels must be at least 1".into()));
    }
    if levels >= usize::BITS as usize || n % (1usize << levels) != 0 {
        return Err(Error::Data(format!(
            "signal length {n} is not divisible by 2^{levels}"
        )));
    }
    let mut details: Vec<Vec<f64>> = Vec::with_capacity(levels);
    let mut current = samples.to_vec();
    for _ in 0..levels {
        let (a, d) = analysis_step(&current, spec);
        details.push(d);
        current = a;
    }
    let mut sequences = Vec::with_capacity(levels + 1);
    sequences.push((format!("approx_{levels}"), current));
    for (i, d) in details.into_iter().enumerate().rev() {
        sequences.push((format!("detail_{}", i + 1), d));
    }
    Ok(CoeffBank { sequences })
}

/// Full packet tree of depth `levels`; terminal nodes renamed to
/// frequency order: the node at frequency rank r is the tree node whose
/// low/high path bits equal the Gray code r ^ (r >> 1) (MSB = first
/// split), because every high-pass split mirrors its sub-band.
pub fn pwt(samples: &[f64], levels: usize, spec: &WaveletSpec) -> Result<CoeffBank> {
    check_signal(samples)?;
    spec.validate()?;
    let n = samples.len();
    if levels == 0 {
        return Err(Error::Config("levels must be at least 1".into()));
    }
    if levels >= usize::BITS as usize || n % (1usize << levels) != 0 {
        return Err(Error::Data(format!(
            "signal length {n} is not divisible by 2^{levels}"
        )));
    }
    // natural (tree) order: index bits, MSB first, 0 = low-pass child
    let mut nodes = vec![samples.to_vec()];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(nodes.len() * 2);
        for node in &nodes {
            let (a, d) = analysis_step(node, spec);
            next.push(a);
            next.push(d);
        }
        nodes = next;
    }
    let count = nodes.len();
    let sequences = (0..count)
        .map(|rank| {
            let natural = rank ^ (rank >> 1);
            (format!("node_{rank}"), std::mem::take(&mut nodes[natural]))
        })
        .collect();
    Ok(CoeffBank { sequences })
}

// ---------------------------------------------------------------------------
// coefficient statistics
// ---------------------------------------------------------------------------

/// Summary statistics of one coefficient sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffStats {
    /// Mean absolute value.
    pub mav: f64,
    /// Population variance of the raw coefficients.
    pub variance: f64,
    pub max_abs: f64,
    pub min_abs: f64,
    /// sum of squared coefficients.
    pub energy: f64,
    /// -sum x^2 ln x^2 with 0 ln 0 = 0 (natural log, unnormalized).
    pub entropy: f64,
}

pub fn coeff_stats(xs: &[f64]) -> Result<CoeffStats> {
    check_signal(xs)?;
    let n = xs.len() as f64;
    let mav = xs.iter().map(|v| v.abs()).sum::<f64>() / n;
    let mean = xs.iter().sum::<f64>() / n;
    let variance = xs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let max_abs = xs.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    let min_abs = xs.iter().map(|v| v.abs()).fold(f64::MAX, f64::min);
    let energy = xs.iter().map(|v| v * v).sum::<f64>();
    let entropy = -xs
        .iter()
        .map(|v| {
            let e = v * v;
            if e == 0.0 {
                0.0
            } else {
                e * e.ln()
            }
        })
        .sum::<f64>();
    Ok(CoeffStats {
        mav,
        variance,
        max_abs,
        min_abs,
        energy,
        entropy,
    })
}

// ---------------------------------------------------------------------------
// feature pipelines
// ---------------------------------------------------------------------------

/// The four wavelet feature pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveletMethod {
    /// SAP per translation then MAV per scale: n + 100 features.
    CwtMavSap,
    /// The flattened coefficient matrix, scale-major: 100 n features.
    CwtFull,
    /// (mav, variance) of approx_12 then detail_12..detail_1: 26 features.
    Dwt,
    /// (mav, variance, entropy) of node_0..node_15: 48 features.
    Pwt,
}

/// Extracts one wavelet feature vector from a record channel.
pub fn wavelet_features(
    record: &SignalRecord,
    method: WaveletMethod,
    channel: ChannelMode,
    spec: &WaveletSpec,
) -> Result<Vec<f64>> {
    record.validate()?;
    let samples: &[f64] = match channel {
        ChannelMode::Ch1 => &record.channel1,
        ChannelMode::Ch2 => &record.channel2,
        ChannelMode::Complex => {
            return Err(Error::Config(
                "wavelet pipelines operate on one real channel (ch1 or ch2)".into(),
            ))
        }
    };
    match method {
        WaveletMethod::CwtMavSap => {
            let matrix = cwt(samples, CWT_SCALES, spec)?;
            let mut out = sap(&matrix);
            for row in &matrix.coefficients {
                out.push(coeff_stats(row)?.mav);
            }
            Ok(out)
        }
        WaveletMethod::CwtFull => {
            let matrix = cwt(samples, CWT_SCALES, spec)?;
            Ok(matrix.coefficients.into_iter().flatten().collect())
        }
        WaveletMethod::Dwt => {
            let bank = dwt(samples, DWT_LEVELS, spec)?;
            let mut out = Vec::with_capacity(2 * bank.sequences.len());
            for (_, seq) in &bank.sequences {
                let stats = coeff_stats(seq)?;
                out.push(stats.mav);
                out.push(stats.variance);
            }
            Ok(out)
        }
        WaveletMethod::Pwt => {
            let bank = pwt(samples, PWT_LEVELS, spec)?;
            let mut out = Vec::with_capacity(3 * bank.sequences.len());
            for (_, seq) in &bank.sequences {
                let stats = coeff_stats(seq)?;
                out.push(stats.mav);
                out.push(stats.variance);
                out.push(stats.entropy);
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
