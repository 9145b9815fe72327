//! Signal containers and the preprocessing chain that turns raw audio and
//! multichannel recordings into the normalized representation consumed by
//! the decoder: analytic envelope, zero-phase band-pass, polyphase
//! resampling and min-max normalization.

mod filter;
mod hilbert;
pub mod io;
mod resample;

pub use filter::{bandpass_zero_phase, Biquad, ButterworthBandpass};
pub use hilbert::analytic_envelope;
pub use resample::{rational_ratio, resample, resampled_len};

use crate::error::{Error, Result};

/// Working rate of the decoder, in Hz.
pub const WORKING_RATE: f64 = 128.0;

/// Pass band applied to both stimulus envelopes and recordings.
pub const DEFAULT_BAND: BandSpec = BandSpec {
    low_hz: 0.3,
    high_hz: 30.0,
};

/// A single-channel uniformly sampled signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    samples: Vec<f64>,
    rate: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidRate(rate));
        }
        if samples.is_empty() {
            return Err(Error::InvalidInput("signal must have at least one sample".into()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample at index {i}")));
        }
        Ok(Self { samples, rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.rate
    }
}

/// Pass band of a band-pass filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub low_hz: f64,
    pub high_hz: f64,
}

impl BandSpec {
    pub fn new(low_hz: f64, high_hz: f64) -> Self {
        Self { low_hz, high_hz }
    }

    /// Checks `0 < low < high < rate / 2`.
    pub fn validate(&self, rate: f64) -> Result<()> {
        let ok = self.low_hz.is_finite()
            && self.high_hz.is_finite()
            && self.low_hz > 0.0
            && self.low_hz < self.high_hz
            && self.high_hz < rate / 2.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidBand {
                low_hz: self.low_hz,
                high_hz: self.high_hz,
                rate,
            })
        }
    }
}

/// Channels × time samples at a common rate. Stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiChannelRecording {
    data: Vec<f64>,
    channels: usize,
    len: usize,
    rate: f64,
    labels: Option<Vec<String>>,
}

impl MultiChannelRecording {
    /// Builds a recording from one row per channel.
    pub fn from_channels(rows: Vec<Vec<f64>>, rate: f64) -> Result<Self> {
        let channels = rows.len();
        if channels == 0 {
            return Err(Error::InvalidInput("recording needs at least one channel".into()));
        }
        let len = rows[0].len();
        let mut data = Vec::with_capacity(channels * len);
        for (c, row) in rows.into_iter().enumerate() {
            if row.len() != len {
                return Err(Error::DimensionMismatch(format!(
                    "channel {c} has {} samples, channel 0 has {len}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Self::from_flat(data, channels, rate)
    }

    /// Builds a recording from channel-major samples.
    pub fn from_flat(data: Vec<f64>, channels: usize, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidRate(rate));
        }
        if channels == 0 || data.is_empty() || !data.len().is_multiple_of(channels) {
            return Err(Error::DimensionMismatch(format!(
                "{} samples cannot be split into {channels} equal channels",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value in channel {} at sample {}",
                i / (data.len() / channels),
                i % (data.len() / channels)
            )));
        }
        let len = data.len() / channels;
        Ok(Self {
            data,
            channels,
            len,
            rate,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.channels {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} channels",
                labels.len(),
                self.channels
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Number of time samples per channel.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.data[c * self.len..(c + 1) * self.len]
    }

    pub fn channel_iter(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.len)
    }

    /// Channel-major sample buffer.
    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Copies channel `c` into a standalone signal.
    pub fn channel_signal(&self, c: usize) -> SampledSignal {
        SampledSignal {
            samples: self.channel(c).to_vec(),
            rate: self.rate,
        }
    }
}

/// A stimulus envelope. When `normalized` is set every sample lies in
/// `[0, 1]` and the maximum is 1 unless the envelope is all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub signal: SampledSignal,
    pub normalized: bool,
    /// Set when min-max normalization met a constant input.
    pub degenerate: bool,
}

impl Envelope {
    /// Wraps an arbitrary signal; `normalized` is inferred from its range.
    pub fn from_signal(signal: SampledSignal) -> Self {
        let s = signal.samples();
        let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let in_range = s.iter().all(|&v| (0.0..=1.0).contains(&v));
        let normalized = in_range && (max == 1.0 || max == 0.0);
        Self {
            signal,
            normalized,
            degenerate: false,
        }
    }

    pub fn samples(&self) -> &[f64] {
        self.signal.samples()
    }

    pub fn rate(&self) -> f64 {
        self.signal.rate()
    }

    pub fn len(&self) -> usize {
        self.signal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signal.is_empty()
    }
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|&v| v == x[0])
}

/// Min-max scaling of a slice into `[0, 1]`. Returns `true` when the input
/// was constant, in which case the output is all zero.
pub(crate) fn min_max_in_place(x: &mut [f64]) -> bool {
    let (min, max) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if !(max > min) {
        x.iter_mut().for_each(|v| *v = 0.0);
        return true;
    }
    let span = max - min;
    for v in x.iter_mut() {
        // Clamp guards the rounding of (max - min) / span at the top end.
        *v = ((*v - min) / span).clamp(0.0, 1.0);
    }
    false
}

/// `y = (x - min) / (max - min)`; a constant input yields an all-zero
/// envelope with the degenerate flag set.
pub fn normalize_unit_interval(x: &SampledSignal) -> Envelope {
    let mut samples = x.samples.clone();
    let degenerate = min_max_in_place(&mut samples);
    Envelope {
        signal: SampledSignal { samples, rate: x.rate },
        normalized: true,
        degenerate,
    }
}

/// Envelope extraction, band-pass, resampling to 128 Hz and normalization,
/// in that order.
pub fn preprocess_stimulus(audio: &SampledSignal) -> Result<Envelope> {
    preprocess_stimulus_with(audio, DEFAULT_BAND, WORKING_RATE)
}

pub fn preprocess_stimulus_with(audio: &SampledSignal, band: BandSpec, target_rate: f64) -> Result<Envelope> {
    if audio.rate() <= 2.0 * band.high_hz {
        return Err(Error::InvalidBand {
            low_hz: band.low_hz,
            high_hz: band.high_hz,
            rate: audio.rate(),
        });
    }
    let env = analytic_envelope(audio)?;
    if is_constant(env.samples()) {
        let n = resampled_len(env.len(), env.rate(), target_rate);
        return Ok(Envelope {
            signal: SampledSignal::new(vec![0.0; n], target_rate)?,
            normalized: true,
            degenerate: true,
        });
    }
    let filtered = bandpass_zero_phase(&env, band)?;
    let resampled = resample(&filtered, target_rate)?;
    Ok(normalize_unit_interval(&resampled))
}

/// Output of [`preprocess_recording`].
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessedRecording {
    pub recording: MultiChannelRecording,
    /// Channels that were constant after resampling and were zeroed.
    pub degenerate_channels: Vec<usize>,
}

/// Per-channel band-pass, resampling to 128 Hz and per-channel min-max
/// normalization.
pub fn preprocess_recording(rec: &MultiChannelRecording) -> Result<PreprocessedRecording> {
    preprocess_recording_with(rec, DEFAULT_BAND, WORKING_RATE)
}

pub fn preprocess_recording_with(
    rec: &MultiChannelRecording,
    band: BandSpec,
    target_rate: f64,
) -> Result<PreprocessedRecording> {
    band.validate(rec.rate())?;
    let filter = ButterworthBandpass::design(band, rec.rate())?;
    let mut rows = Vec::with_capacity(rec.channels());
    let mut degenerate_channels = Vec::new();
    for c in 0..rec.channels() {
        if is_constant(rec.channel(c)) {
            degenerate_channels.push(c);
            rows.push(vec![0.0; resampled_len(rec.len(), rec.rate(), target_rate)]);
            continue;
        }
        let filtered = SampledSignal {
            samples: filter.filtfilt(rec.channel(c)),
            rate: rec.rate(),
        };
        let mut samples = resample(&filtered, target_rate)?.into_samples();
        if min_max_in_place(&mut samples) {
            degenerate_channels.push(c);
        }
        rows.push(samples);
    }
    let mut recording = MultiChannelRecording::from_channels(rows, target_rate)?;
    recording.labels = rec.labels.clone();
    Ok(PreprocessedRecording {
        recording,
        degenerate_channels,
    })
}
