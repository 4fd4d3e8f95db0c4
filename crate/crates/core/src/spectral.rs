//! Welch power spectral density estimation and band-power integration.
//!
//! The estimator averages modified periodograms over Hann-windowed,
//! 50%-overlapping segments (128 samples by default) and reports a one-sided
//! density in µV²/Hz, normalized so that the integral over frequency equals
//! the mean windowed-segment variance (Parseval). Band powers integrate the
//! density with the trapezoidal rule over the bins whose centers fall inside
//! the closed band interval.

use std::collections::BTreeMap;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::mean;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("signal of {len} samples is shorter than one {window_len}-sample window")]
    TooShort { len: usize, window_len: usize },
    #[error("overlap fraction {0} outside [0, 1)")]
    BadOverlap(f64),
    #[error("window length {0} is too small")]
    BadWindow(usize),
    #[error("sample rate {0} is not positive")]
    BadSampleRate(f64),
    #[error("band {lo_hz}–{hi_hz} Hz outside [0, {nyquist_hz}] Hz")]
    BandOutOfRange {
        lo_hz: f64,
        hi_hz: f64,
        nyquist_hz: f64,
    },
    #[error("relative gamma denominator {0} is not positive")]
    DivisionByZero(f64),
    #[error("band power for {0:?} missing")]
    MissingBand(Band),
}

/// The seven named frequency bands.
///
/// `Beta`/`Gamma` overlap (25–30 Hz) and `Slow` spans theta through alpha;
/// the overlaps are intentional and kept as-is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Delta,
    Theta,
    Slow,
    Alpha,
    LowBeta,
    Beta,
    Gamma,
}

impl Band {
    /// Canonical reporting order: delta, theta, slow, alpha, low beta, beta,
    /// gamma.
    pub const ALL: [Band; 7] = [
        Band::Delta,
        Band::Theta,
        Band::Slow,
        Band::Alpha,
        Band::LowBeta,
        Band::Beta,
        Band::Gamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Band::Delta => "delta",
            Band::Theta => "theta",
            Band::Slow => "slow",
            Band::Alpha => "alpha",
            Band::LowBeta => "low_beta",
            Band::Beta => "beta",
            Band::Gamma => "gamma",
        }
    }

    /// Band edges in Hz.
    pub fn range(self) -> (f64, f64) {
        match self {
            Band::Delta => (1.0, 3.0),
            Band::Theta => (4.0, 7.0),
            Band::Slow => (4.0, 13.0),
            Band::Alpha => (8.0, 12.0),
            Band::LowBeta => (13.0, 17.0),
            Band::Beta => (13.0, 30.0),
            Band::Gamma => (25.0, 43.0),
        }
    }

    /// Center frequency used by the synthetic generator; chosen on an exact
    /// 1 Hz bin where possible to keep analytic band powers clean.
    pub fn center_hz(self) -> f64 {
        match self {
            Band::Delta => 2.0,
            Band::Theta => 5.5,
            Band::Slow => 8.5,
            Band::Alpha => 10.0,
            Band::LowBeta => 15.0,
            Band::Beta => 21.5,
            Band::Gamma => 34.0,
        }
    }

    pub fn definition(self) -> BandDefinition {
        let (lo_hz, hi_hz) = self.range();
        BandDefinition {
            band: self,
            lo_hz,
            hi_hz,
        }
    }
}

/// A band with explicit edges; normally obtained via [`Band::definition`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandDefinition {
    pub band: Band,
    pub lo_hz: f64,
    pub hi_hz: f64,
}

/// Which way the relative-gamma ratio is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RgDirection {
    /// gamma / slow (default).
    #[default]
    GammaOverSlow,
    /// slow / gamma, for sensitivity analysis.
    SlowOverGamma,
}

/// One-sided Welch PSD estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdEstimate {
    pub freqs_hz: Vec<f64>,
    /// Power density in µV²/Hz, same length as `freqs_hz`.
    pub power: Vec<f64>,
    pub sample_rate_hz: f64,
    pub window_len: usize,
    pub overlap_frac: f64,
    pub segment_count: usize,
}

impl PsdEstimate {
    pub fn freq_step_hz(&self) -> f64 {
        self.sample_rate_hz / self.window_len as f64
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.sample_rate_hz / 2.0
    }
}

/// Periodic Hann window of length `n`.
fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / n as f64).cos()))
        .collect()
}

/// Welch PSD of `samples`.
///
/// Segments shorter than a full window at the tail are discarded; each
/// segment has its own mean removed before windowing.
pub fn welch_psd(
    samples: &[f64],
    sample_rate_hz: f64,
    window_len: usize,
    overlap_frac: f64,
) -> Result<PsdEstimate, SpectralError> {
    if window_len < 2 {
        return Err(SpectralError::BadWindow(window_len));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(SpectralError::BadSampleRate(sample_rate_hz));
    }
    if !(0.0..1.0).contains(&overlap_frac) {
        return Err(SpectralError::BadOverlap(overlap_frac));
    }
    if samples.len() < window_len {
        return Err(SpectralError::TooShort {
            len: samples.len(),
            window_len,
        });
    }

    let n = window_len;
    let noverlap = (n as f64 * overlap_frac).floor() as usize;
    let hop = n - noverlap; // ≥ 1 because overlap < 1
    let window = hann(n);
    let window_energy: f64 = window.iter().map(|w| w * w).sum();

    let n_bins = n / 2 + 1;
    let mut acc = vec![0.0f64; n_bins];
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    let mut segment_count = 0usize;
    let mut start = 0usize;
    while start + n <= samples.len() {
        let segment = &samples[start..start + n];
        let seg_mean = mean(segment);
        for (slot, (&x, &w)) in buf.iter_mut().zip(segment.iter().zip(&window)) {
            *slot = Complex::new((x - seg_mean) * w, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (a, c) in acc.iter_mut().zip(buf.iter().take(n_bins)) {
            *a += c.norm_sqr();
        }
        segment_count += 1;
        start += hop;
    }

    // One-sided density: 1/(fs·Σw²) overall, doubled at bins that fold a
    // mirror image (everything except DC and, for even n, Nyquist).
    let norm = 1.0 / (sample_rate_hz * window_energy * segment_count as f64);
    let power: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let one_sided = if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
                1.0
            } else {
                2.0
            };
            a * norm * one_sided
        })
        .collect();
    let freqs_hz = (0..n_bins)
        .map(|k| k as f64 * sample_rate_hz / n as f64)
        .collect();

    Ok(PsdEstimate {
        freqs_hz,
        power,
        sample_rate_hz,
        window_len: n,
        overlap_frac,
        segment_count,
    })
}

/// Integrates the PSD over `[lo_hz, hi_hz]` with the trapezoidal rule on the
/// frequency grid, including bin centers that fall in the closed interval.
pub fn band_power(psd: &PsdEstimate, band: &BandDefinition) -> Result<f64, SpectralError> {
    let nyquist = psd.nyquist_hz();
    let well_formed = band.lo_hz.is_finite() && band.hi_hz.is_finite() && band.lo_hz < band.hi_hz;
    if !well_formed || band.lo_hz < 0.0 || band.hi_hz > nyquist + 1e-9 {
        return Err(SpectralError::BandOutOfRange {
            lo_hz: band.lo_hz,
            hi_hz: band.hi_hz,
            nyquist_hz: nyquist,
        });
    }
    let df = psd.freq_step_hz();
    // Robust closed-interval bin selection on the uniform grid.
    let k_lo = ((band.lo_hz / df) - 1e-9).ceil().max(0.0) as usize;
    let k_hi = (((band.hi_hz / df) + 1e-9).floor() as usize).min(psd.power.len() - 1);
    if k_hi <= k_lo {
        // Zero or one bin inside the band: the trapezoid over it has zero
        // width.
        return Ok(0.0);
    }
    let mut total = 0.0;
    for k in k_lo..k_hi {
        total += 0.5 * (psd.power[k] + psd.power[k + 1]) * df;
    }
    Ok(total)
}

/// Band power for every named band at once.
pub fn all_band_powers(psd: &PsdEstimate) -> Result<BTreeMap<Band, f64>, SpectralError> {
    let mut map = BTreeMap::new();
    for band in Band::ALL {
        map.insert(band, band_power(psd, &band.definition())?);
    }
    Ok(map)
}

/// Relative gamma: the ratio between the gamma and slow band powers.
pub fn relative_gamma(
    band_powers: &BTreeMap<Band, f64>,
    direction: RgDirection,
) -> Result<f64, SpectralError> {
    let gamma = *band_powers
        .get(&Band::Gamma)
        .ok_or(SpectralError::MissingBand(Band::Gamma))?;
    let slow = *band_powers
        .get(&Band::Slow)
        .ok_or(SpectralError::MissingBand(Band::Slow))?;
    let (num, den) = match direction {
        RgDirection::GammaOverSlow => (gamma, slow),
        RgDirection::SlowOverGamma => (slow, gamma),
    };
    if !den.is_finite() || den <= f64::EPSILON {
        return Err(SpectralError::DivisionByZero(den));
    }
    Ok(num / den)
}
