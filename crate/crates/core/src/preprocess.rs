//! Continuous-offset removal.
//!
//! Headset electronics add a permanent DC offset on top of the EEG signal.
//! The offset is estimated as the arithmetic mean of each channel over the
//! whole baseline recording and subtracted sample-wise. No further filtering
//! is applied: the headset's 1–43 Hz response already excludes line noise.

use serde::{Deserialize, Serialize};

use crate::ingest::{ChannelSeries, Recording};

/// A recording with per-channel offsets removed.
///
/// `offsets[i]` is the mean subtracted from `recording.channels[i]`; adding
/// it back reconstructs the original channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanRecording {
    pub recording: Recording,
    pub offsets: Vec<f64>,
}

impl CleanRecording {
    pub fn subject_id(&self) -> &str {
        &self.recording.subject_id
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.recording.sample_rate_hz
    }

    pub fn channel(&self, name: &str) -> Option<&ChannelSeries> {
        self.recording.channel(name)
    }
}

/// Subtracts each channel's mean from every sample of that channel.
pub fn remove_baseline_offset(rec: &Recording) -> CleanRecording {
    let mut channels = Vec::with_capacity(rec.channels.len());
    let mut offsets = Vec::with_capacity(rec.channels.len());
    for ch in &rec.channels {
        let offset = mean(&ch.samples);
        channels.push(ChannelSeries {
            name: ch.name.clone(),
            samples: ch.samples.iter().map(|s| s - offset).collect(),
        });
        offsets.push(offset);
    }
    CleanRecording {
        recording: Recording {
            subject_id: rec.subject_id.clone(),
            sample_rate_hz: rec.sample_rate_hz,
            duration_s: rec.duration_s,
            channels,
        },
        offsets,
    }
}

/// Compensated (Neumaier) mean; keeps the residual mean of long recordings
/// well below the 1e-9·SD invariant.
pub(crate) fn mean(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &x in samples {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    (sum + comp) / samples.len() as f64
}
