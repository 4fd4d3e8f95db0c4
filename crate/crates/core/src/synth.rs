//! Deterministic synthetic-EEG cohort generator.
//!
//! Each channel is a sum of per-band sinusoids at the band-center
//! frequencies (so a component of amplitude A contributes an analytic band
//! power of A²/2) plus white Gaussian noise. Stress subjects get their
//! right-hemisphere (AF4, T8) alpha amplitude multiplied by
//! `asymmetry_effect`, which makes the alpha asymmetry features carry the
//! group signal. PSS items and expert labels are generated consistently:
//! stress totals land above the cohort's μ + σ/2 threshold, control totals
//! below μ − σ/2, neutral totals inside the band.
//!
//! The whole cohort is a pure function of the seed. Per-subject randomness
//! comes from a dedicated stream seeded with
//! `splitmix64(seed ^ (subject_index + 1))`, so subjects could be generated
//! independently (and in parallel) without changing a single sample.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{ChannelSeries, ExpertLabel, Recording, SubjectEntry, SubjectManifest};
use crate::labeling::{pss_thresholds, PssScore, SdConvention};
use crate::spectral::Band;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid cohort spec: {0}")]
    InvalidSpec(String),
}

/// Synthetic cohort description; fully determines the output together with
/// the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortSpec {
    pub n_stress: usize,
    pub n_control: usize,
    pub n_neutral: usize,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    /// Base per-band sinusoid amplitudes in µV. Bands absent from the map
    /// contribute nothing.
    pub band_amplitudes_uv: BTreeMap<Band, f64>,
    /// Optional per-channel gain multipliers (default 1.0).
    pub channel_gains: BTreeMap<String, f64>,
    /// Multiplier on the alpha amplitude of AF4 and T8 for stress subjects;
    /// 1.0 disables the effect.
    pub asymmetry_effect: f64,
    /// Standard deviation of the additive white noise in µV.
    pub noise_sd_uv: f64,
    /// Constant offset added to every channel, removed again by the
    /// preprocessing stage.
    pub dc_offset_uv: f64,
    pub seed: u64,
}

impl Default for CohortSpec {
    fn default() -> Self {
        // Only bands wide enough that a center component's spectral leakage
        // stays on interior PSD bins: at 1 Hz resolution the delta and theta
        // bands put leakage on their own edge bins, which the trapezoidal
        // band integral half-weights, so components there would not be
        // recoverable at the 2% level.
        let mut band_amplitudes_uv = BTreeMap::new();
        band_amplitudes_uv.insert(Band::Alpha, 4.0);
        band_amplitudes_uv.insert(Band::Beta, 2.0);
        band_amplitudes_uv.insert(Band::Gamma, 1.0);
        CohortSpec {
            n_stress: 10,
            n_control: 10,
            n_neutral: 13,
            sample_rate_hz: 128.0,
            duration_s: 180.0,
            band_amplitudes_uv,
            channel_gains: BTreeMap::new(),
            asymmetry_effect: 2.0,
            noise_sd_uv: 1.0,
            dc_offset_uv: 25.0,
            seed: 0,
        }
    }
}

impl CohortSpec {
    pub fn subject_count(&self) -> usize {
        self.n_stress + self.n_control + self.n_neutral
    }

    fn validate(&self) -> Result<(), SynthError> {
        if self.subject_count() == 0 {
            return Err(SynthError::InvalidSpec("empty cohort".into()));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(SynthError::InvalidSpec(format!(
                "sample rate {} not positive",
                self.sample_rate_hz
            )));
        }
        let samples = (self.duration_s * self.sample_rate_hz).round();
        if !samples.is_finite() || samples < crate::ingest::MIN_RECORDING_SAMPLES as f64 {
            return Err(SynthError::InvalidSpec(format!(
                "duration {} s gives {samples} samples, below the {}-sample minimum",
                self.duration_s,
                crate::ingest::MIN_RECORDING_SAMPLES
            )));
        }
        if self
            .band_amplitudes_uv
            .values()
            .any(|&a| !a.is_finite() || a < 0.0)
        {
            return Err(SynthError::InvalidSpec("negative band amplitude".into()));
        }
        if self
            .channel_gains
            .values()
            .any(|&g| !g.is_finite() || g < 0.0)
        {
            return Err(SynthError::InvalidSpec("negative channel gain".into()));
        }
        if !self.asymmetry_effect.is_finite() || self.asymmetry_effect < 0.0 {
            return Err(SynthError::InvalidSpec(format!(
                "asymmetry effect {} negative",
                self.asymmetry_effect
            )));
        }
        if !self.noise_sd_uv.is_finite() || self.noise_sd_uv < 0.0 {
            return Err(SynthError::InvalidSpec(format!(
                "noise sd {} negative",
                self.noise_sd_uv
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Group {
    Stress,
    Control,
    Neutral,
}

impl Group {
    fn expert_label(self) -> ExpertLabel {
        match self {
            Group::Stress => ExpertLabel::Stress,
            Group::Control => ExpertLabel::Control,
            Group::Neutral => ExpertLabel::Unlabeled,
        }
    }

    /// PSS total range the group draws from; separated enough that the
    /// μ ± σ/2 partition almost always holds on the first attempt.
    fn pss_range(self) -> (u8, u8) {
        match self {
            Group::Control => (8, 14),
            Group::Neutral => (18, 22),
            Group::Stress => (27, 33),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn subject_rng(seed: u64, subject_index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ (subject_index as u64 + 1)))
}

/// Standard normal draw via Box–Muller.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Generates the recordings and the matching manifest.
pub fn generate_cohort(spec: &CohortSpec) -> Result<(Vec<Recording>, SubjectManifest), SynthError> {
    spec.validate()?;
    let groups: Vec<Group> = std::iter::repeat_n(Group::Stress, spec.n_stress)
        .chain(std::iter::repeat_n(Group::Control, spec.n_control))
        .chain(std::iter::repeat_n(Group::Neutral, spec.n_neutral))
        .collect();
    let n = groups.len();
    let id_width = n.to_string().len().max(2);
    let ids: Vec<String> = (1..=n).map(|i| format!("S{i:0id_width$}")).collect();

    let totals = draw_pss_totals(spec, &groups)?;

    let mut recordings = Vec::with_capacity(n);
    let mut entries = Vec::with_capacity(n);
    for (idx, (group, id)) in groups.iter().zip(&ids).enumerate() {
        let mut rng = subject_rng(spec.seed, idx);
        recordings.push(generate_recording(spec, *group, id, &mut rng)?);
        let items = items_from_total(totals[idx], &mut rng);
        entries.push(SubjectEntry {
            subject_id: id.clone(),
            pss_items: Some(items),
            expert_label: group.expert_label(),
            recording_path: format!("{id}.csv"),
        });
    }
    let manifest = SubjectManifest::new(entries)
        .map_err(|e| SynthError::InvalidSpec(format!("manifest: {e}")))?;
    Ok((recordings, manifest))
}

fn generate_recording(
    spec: &CohortSpec,
    group: Group,
    subject_id: &str,
    rng: &mut ChaCha8Rng,
) -> Result<Recording, SynthError> {
    let n_samples = (spec.duration_s * spec.sample_rate_hz).round() as usize;
    let montage = crate::ingest::DEFAULT_MONTAGE;
    let mut channels = Vec::with_capacity(montage.len());
    for ch_name in montage {
        let gain = spec.channel_gains.get(ch_name).copied().unwrap_or(1.0);
        // One (amplitude, frequency, phase) component per configured band.
        let components: Vec<(f64, f64, f64)> = spec
            .band_amplitudes_uv
            .iter()
            .map(|(&band, &base_amp)| {
                let mut amp = base_amp * gain;
                if group == Group::Stress
                    && band == Band::Alpha
                    && (ch_name == "AF4" || ch_name == "T8")
                {
                    amp *= spec.asymmetry_effect;
                }
                let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                (amp, band.center_hz(), phase)
            })
            .collect();
        let samples: Vec<f64> = (0..n_samples)
            .map(|i| {
                let t = i as f64 / spec.sample_rate_hz;
                let mut v = spec.dc_offset_uv;
                for &(amp, freq, phase) in &components {
                    v += amp * (std::f64::consts::TAU * freq * t + phase).sin();
                }
                if spec.noise_sd_uv > 0.0 {
                    v += spec.noise_sd_uv * gaussian(rng);
                }
                v
            })
            .collect();
        channels.push(ChannelSeries {
            name: ch_name.to_string(),
            samples,
        });
    }
    Recording::new(subject_id, spec.sample_rate_hz, channels)
        .map_err(|e| SynthError::InvalidSpec(format!("generated recording invalid: {e}")))
}

/// Draws group-consistent PSS totals, rejecting cohorts whose own μ ± σ/2
/// thresholds would misclassify any subject.
fn draw_pss_totals(spec: &CohortSpec, groups: &[Group]) -> Result<Vec<u8>, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(spec.seed ^ 0x5353_7073)); // "SSps"
    const MAX_ATTEMPTS: usize = 64;
    for _ in 0..MAX_ATTEMPTS {
        let totals: Vec<u8> = groups
            .iter()
            .map(|g| {
                let (lo, hi) = g.pss_range();
                rng.random_range(lo..=hi)
            })
            .collect();
        if partition_holds(groups, &totals) {
            return Ok(totals);
        }
    }
    Err(SynthError::InvalidSpec(
        "could not draw PSS totals consistent with the μ ± σ/2 partition; \
         the group structure is too degenerate"
            .into(),
    ))
}

fn partition_holds(groups: &[Group], totals: &[u8]) -> bool {
    let scores: Vec<PssScore> = totals
        .iter()
        .enumerate()
        .map(|(i, &total)| PssScore {
            subject_id: i.to_string(),
            total,
        })
        .collect();
    let thresholds = match pss_thresholds(&scores, SdConvention::Sample) {
        Ok(t) => t,
        Err(_) => return false,
    };
    groups.iter().zip(totals).all(|(g, &total)| {
        let dev = total as f64 - thresholds.mean;
        match g {
            Group::Stress => dev > thresholds.half_band,
            Group::Control => dev < -thresholds.half_band,
            Group::Neutral => (-thresholds.half_band..=thresholds.half_band).contains(&dev),
        }
    })
}

/// Spreads a total over ten items, each capped at 4.
fn items_from_total(total: u8, rng: &mut ChaCha8Rng) -> [u8; 10] {
    debug_assert!(total <= 40);
    let mut items = [0u8; 10];
    let mut remaining = total;
    while remaining > 0 {
        let idx = rng.random_range(0..10);
        if items[idx] < 4 {
            items[idx] += 1;
            remaining -= 1;
        }
    }
    items
}
