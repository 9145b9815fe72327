//! Seeded forward-model simulator.
//!
//! Envelopes are band-limited noise. Each channel of a synthetic recording
//! is the attended envelope convolved with that channel's temporal response
//! kernel, plus a scaled copy of every unattended envelope convolved with a
//! circularly shifted version of the same kernel, plus Gaussian noise at a
//! prescribed signal-to-noise ratio. Every random draw comes from a ChaCha
//! stream keyed by `(seed, purpose, index)`, so any trial can be regenerated
//! on its own.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::attention::{
    detect_attention, detection_accuracy, AccuracySummary, AttentionResult, CocktailTrial, TrialMetadata,
};
use crate::decoding::{
    default_lambda_grid, fit_final_decoder_with, select_lambda, CrossValidationReport, Decoder, FinalFit, LagSpec,
    TrainingCorpus,
};
use crate::error::{Error, Result};
use crate::signal::{
    bandpass_zero_phase, normalize_unit_interval, BandSpec, Envelope, MultiChannelRecording, SampledSignal,
};

/// Modulation band of synthetic envelopes.
pub const ENVELOPE_BAND: BandSpec = BandSpec {
    low_hz: 0.3,
    high_hz: 8.0,
};

/// Decay constant of the response kernels, in seconds.
const KERNEL_DECAY_S: f64 = 0.1;
/// Moving-average width used to smooth kernel draws.
const KERNEL_SMOOTHING: usize = 5;

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Stream {
    Envelope = 1,
    Kernel = 2,
    TrainEnvelope = 3,
    TrainNoise = 4,
    TestEnvelope = 5,
    TestNoise = 6,
}

fn substream(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(stream as u64).to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn gaussian(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn envelope_from_rng(rng: &mut impl Rng, samples: usize, rate: f64) -> Result<Envelope> {
    let noise = SampledSignal::new(gaussian(rng, samples), rate)?;
    let band = BandSpec::new(ENVELOPE_BAND.low_hz, ENVELOPE_BAND.high_hz.min(0.45 * rate));
    let shaped = bandpass_zero_phase(&noise, band)?;
    Ok(normalize_unit_interval(&shaped))
}

/// A band-limited, non-negative noise envelope normalized to `[0, 1]`.
pub fn gen_envelope(duration_s: f64, rate: f64, seed: u64) -> Result<Envelope> {
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::InvalidInput(format!(
            "duration must be positive, got {duration_s}"
        )));
    }
    let samples = (duration_s * rate).round() as usize;
    envelope_from_rng(&mut substream(seed, Stream::Envelope, 0), samples, rate)
}

/// Per-channel forward response kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardTRF {
    /// `channels x kernel_len`, row-major.
    kernels: Vec<f64>,
    channels: usize,
    kernel_len: usize,
    pub rate: f64,
    pub seed: u64,
}

impl ForwardTRF {
    pub fn new(kernels: Vec<Vec<f64>>, rate: f64, seed: u64) -> Result<Self> {
        let channels = kernels.len();
        let kernel_len = kernels.first().map_or(0, Vec::len);
        if channels == 0 || kernel_len == 0 || kernels.iter().any(|k| k.len() != kernel_len) {
            return Err(Error::DimensionMismatch(
                "kernels must be non-empty and of equal length".into(),
            ));
        }
        if kernels.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("kernel values must be finite".into()));
        }
        Ok(Self {
            kernels: kernels.concat(),
            channels,
            kernel_len,
            rate,
            seed,
        })
    }

    /// Smoothed, exponentially decaying random kernels spanning
    /// `0..=span_ms`, each scaled to unit energy.
    pub fn random(channels: usize, rate: f64, span_ms: f64, seed: u64) -> Result<Self> {
        let kernel_len = (span_ms * rate / 1000.0).round() as usize + 1;
        let mut rng = substream(seed, Stream::Kernel, 0);
        let decay = KERNEL_DECAY_S * rate;
        let kernels = (0..channels)
            .map(|_| {
                let raw = gaussian(&mut rng, kernel_len + KERNEL_SMOOTHING - 1);
                let mut k: Vec<f64> = raw
                    .windows(KERNEL_SMOOTHING)
                    .enumerate()
                    .map(|(tau, w)| w.iter().sum::<f64>() / KERNEL_SMOOTHING as f64 * (-(tau as f64) / decay).exp())
                    .collect();
                let norm = k.iter().map(|v| v * v).sum::<f64>().sqrt();
                k.iter_mut().for_each(|v| *v /= norm);
                k
            })
            .collect();
        Self::new(kernels, rate, seed)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn kernel_len(&self) -> usize {
        self.kernel_len
    }

    pub fn kernel(&self, channel: usize) -> &[f64] {
        &self.kernels[channel * self.kernel_len..(channel + 1) * self.kernel_len]
    }

    /// Kernel of `channel` rotated right by `shift` taps.
    fn shifted_kernel(&self, channel: usize, shift: usize) -> Vec<f64> {
        let mut k = self.kernel(channel).to_vec();
        k.rotate_right(shift % self.kernel_len);
        k
    }
}

/// Causal convolution truncated to the input length.
fn convolve(x: &[f64], kernel: &[f64], out: &mut [f64], gain: f64) {
    for (tau, &h) in kernel.iter().enumerate() {
        let w = gain * h;
        for (o, &v) in out[tau..].iter_mut().zip(x) {
            *o += w * v;
        }
    }
}

/// How envelopes are mixed into a recording.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixParams {
    /// Per-channel signal-to-noise power ratio in dB. `+inf` adds no noise,
    /// `-inf` yields unit-variance noise only.
    pub snr_db: f64,
    /// Gain applied to every unattended stream, in `[0, 1]`.
    pub leakage: f64,
    /// Seed of the noise stream.
    pub seed: u64,
}

/// Circular kernel shift applied to unattended stream `j` of `count`.
fn unattended_shift(kernel_len: usize, j: usize, count: usize) -> usize {
    (j + 1) * kernel_len / (count + 1)
}

/// Mixes attended and unattended envelopes through the forward kernels.
pub fn synthesize_recording(
    attended: &Envelope,
    unattended: &[Envelope],
    trf: &ForwardTRF,
    mix: &MixParams,
) -> Result<MultiChannelRecording> {
    let n = attended.len();
    for (j, u) in unattended.iter().enumerate() {
        if u.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "unattended stream {j} has {} samples, attended {n}",
                u.len()
            )));
        }
    }
    if mix.snr_db.is_nan() || !(0.0..=1.0).contains(&mix.leakage) {
        return Err(Error::InvalidConfig(format!(
            "snr_db must not be NaN and leakage must lie in [0, 1] (got {}, {})",
            mix.snr_db, mix.leakage
        )));
    }
    let mut rng = ChaCha8Rng::from_seed({
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&mix.seed.to_le_bytes());
        key[8..16].copy_from_slice(b"mixnoise");
        key
    });
    let mut rows = Vec::with_capacity(trf.channels());
    for c in 0..trf.channels() {
        let mut clean = vec![0.0; n];
        if mix.snr_db != f64::NEG_INFINITY {
            convolve(attended.samples(), trf.kernel(c), &mut clean, 1.0);
            if mix.leakage > 0.0 {
                for (j, u) in unattended.iter().enumerate() {
                    let k = trf.shifted_kernel(c, unattended_shift(trf.kernel_len(), j, unattended.len()));
                    convolve(u.samples(), &k, &mut clean, mix.leakage);
                }
            }
        }
        if mix.snr_db == f64::INFINITY {
            rows.push(clean);
            continue;
        }
        let noise = gaussian(&mut rng, n);
        let target_var = if mix.snr_db == f64::NEG_INFINITY {
            1.0
        } else {
            variance(&clean) / 10f64.powf(mix.snr_db / 10.0)
        };
        let scale = (target_var / variance(&noise)).sqrt();
        for (v, z) in clean.iter_mut().zip(noise) {
            *v += scale * z;
        }
        rows.push(clean);
    }
    MultiChannelRecording::from_channels(rows, attended.rate())
}

pub(crate) fn variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

fn default_channels() -> usize {
    64
}
fn default_duration() -> f64 {
    40.0
}
fn default_rate() -> f64 {
    crate::signal::WORKING_RATE
}
fn default_snr() -> f64 {
    20.0
}
fn default_leakage() -> f64 {
    0.2
}
fn default_training() -> usize {
    20
}
fn default_test() -> usize {
    18
}
fn default_tau_max() -> f64 {
    250.0
}

/// Parameters of a simulated decoding experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default = "default_channels")]
    pub channels: usize,
    #[serde(default = "default_duration")]
    pub duration_s: f64,
    #[serde(default = "default_rate")]
    pub rate: f64,
    /// Per-channel SNR in dB; `"-inf"` requests noise-only recordings.
    #[serde(default = "default_snr", with = "snr_serde")]
    pub snr_db: f64,
    #[serde(default = "default_leakage")]
    pub leakage: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_training")]
    pub n_training_trials: usize,
    #[serde(default = "default_test")]
    pub n_test_trials: usize,
    #[serde(default)]
    pub tau_min_ms: f64,
    #[serde(default = "default_tau_max")]
    pub tau_max_ms: f64,
    /// Span of the forward kernels; defaults to `tau_max_ms`.
    #[serde(default)]
    pub kernel_ms: Option<f64>,
    #[serde(default = "default_lambda_grid")]
    pub grid: Vec<f64>,
    #[serde(default)]
    pub final_fit: FinalFit,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            channels: default_channels(),
            duration_s: default_duration(),
            rate: default_rate(),
            snr_db: default_snr(),
            leakage: default_leakage(),
            seed: 0,
            n_training_trials: default_training(),
            n_test_trials: default_test(),
            tau_min_ms: 0.0,
            tau_max_ms: default_tau_max(),
            kernel_ms: None,
            grid: default_lambda_grid(),
            final_fit: FinalFit::Joint,
        }
    }
}

impl SimulationConfig {
    pub fn lags(&self) -> Result<LagSpec> {
        LagSpec::new(self.tau_min_ms, self.tau_max_ms, self.rate)
    }

    pub fn samples_per_trial(&self) -> usize {
        (self.duration_s * self.rate).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.channels == 0 {
            return bad("channels must be >= 1".into());
        }
        if !(self.rate.is_finite() && self.rate > 2.0 * ENVELOPE_BAND.low_hz) {
            return bad(format!("invalid rate {}", self.rate));
        }
        if !(self.snr_db.is_finite() || self.snr_db == f64::NEG_INFINITY) {
            return bad(format!("snr_db must be finite or -inf, got {}", self.snr_db));
        }
        if !(0.0..=1.0).contains(&self.leakage) {
            return bad(format!("leakage must lie in [0, 1], got {}", self.leakage));
        }
        if self.n_training_trials < 2 {
            return bad("at least two training trials are required".into());
        }
        if self.n_test_trials == 0 {
            return bad("at least one test trial is required".into());
        }
        let lags = self.lags()?;
        if !(self.duration_s.is_finite() && self.samples_per_trial() >= lags.len()) {
            return bad(format!(
                "duration {} s is shorter than the {}-sample lag window",
                self.duration_s,
                lags.len()
            ));
        }
        if let Some(k) = self.kernel_ms {
            if !(k.is_finite() && k >= 0.0) {
                return bad(format!("invalid kernel span {k} ms"));
            }
        }
        if self.grid.is_empty()
            || self.grid.windows(2).any(|w| w[0] >= w[1])
            || self.grid.iter().any(|l| !(*l >= 0.0 && l.is_finite()))
        {
            return bad("lambda grid must be non-empty, finite, >= 0 and strictly increasing".into());
        }
        Ok(())
    }
}

/// SNR as a JSON number, or the string `"-inf"` for noise only.
mod snr_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Text(t) => Err(de::Error::custom(format!("invalid snr_db '{t}'"))),
        }
    }
}

const LAYOUTS: [&str; 3] = ["T-90", "T0", "T90"];
const GENDERS: [&str; 2] = ["female", "male"];
const LEVELS: [&str; 3] = ["75/65", "65/55", "55/45"];

/// Condition labels of test trial `i`, cycling through the 3 layouts x
/// 2 target genders x 3 levels factorial design.
pub fn test_metadata(i: usize) -> TrialMetadata {
    TrialMetadata {
        layout: LAYOUTS[i % 3].into(),
        target_gender: GENDERS[(i / 3) % 2].into(),
        level: LEVELS[(i / 6) % 3].into(),
    }
}

/// Deterministic generator of the training and test data of one experiment.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimulationConfig,
    trf: ForwardTRF,
}

impl Simulator {
    pub fn new(cfg: SimulationConfig) -> Result<Self> {
        cfg.validate()?;
        let span = cfg.kernel_ms.unwrap_or(cfg.tau_max_ms);
        let trf = ForwardTRF::random(cfg.channels, cfg.rate, span, cfg.seed)?;
        Ok(Self { cfg, trf })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.cfg
    }

    pub fn trf(&self) -> &ForwardTRF {
        &self.trf
    }

    fn mix(&self, stream: Stream, index: u64) -> MixParams {
        let seed = substream(self.cfg.seed, stream, index).random::<u64>();
        MixParams {
            snr_db: self.cfg.snr_db,
            leakage: self.cfg.leakage,
            seed,
        }
    }

    fn envelope(&self, stream: Stream, index: u64) -> Result<Envelope> {
        envelope_from_rng(
            &mut substream(self.cfg.seed, stream, index),
            self.cfg.samples_per_trial(),
            self.cfg.rate,
        )
    }

    /// Single-talker training trial `k`.
    pub fn training_trial(&self, k: usize) -> Result<(MultiChannelRecording, Envelope)> {
        let env = self.envelope(Stream::TrainEnvelope, k as u64)?;
        let rec = synthesize_recording(&env, &[], &self.trf, &self.mix(Stream::TrainNoise, k as u64))?;
        Ok((rec, env))
    }

    pub fn training_corpus(&self) -> Result<TrainingCorpus> {
        TrainingCorpus::new(
            (0..self.cfg.n_training_trials)
                .map(|k| self.training_trial(k))
                .collect::<Result<_>>()?,
        )
    }

    /// Three-talker test trial `i`; the attended stream is candidate 0.
    pub fn test_trial(&self, i: usize) -> Result<CocktailTrial> {
        let base = 3 * i as u64;
        let target = self.envelope(Stream::TestEnvelope, base)?;
        let m1 = self.envelope(Stream::TestEnvelope, base + 1)?;
        let m2 = self.envelope(Stream::TestEnvelope, base + 2)?;
        let rec = synthesize_recording(
            &target,
            &[m1.clone(), m2.clone()],
            &self.trf,
            &self.mix(Stream::TestNoise, i as u64),
        )?;
        CocktailTrial::new(rec, [target, m1, m2], test_metadata(i))
    }
}

/// Everything produced by [`run_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub summary: AccuracySummary,
    pub cv_report: CrossValidationReport,
    pub decoder: Decoder,
    pub results: Vec<AttentionResult>,
}

/// Trains a decoder on simulated single-talker trials (lambda chosen by
/// leave-one-out cross-validation), then classifies simulated three-talker
/// trials.
pub fn run_experiment(cfg: &SimulationConfig) -> Result<ExperimentOutcome> {
    let sim = Simulator::new(cfg.clone())?;
    let lags = cfg.lags()?;
    let corpus = sim.training_corpus()?;
    let cv_report = select_lambda(&corpus, lags, &cfg.grid)?;
    let decoder = fit_final_decoder_with(&corpus, lags, cv_report.selected_lambda, cfg.final_fit)?;
    drop(corpus);
    let results = (0..cfg.n_test_trials)
        .map(|i| detect_attention(&decoder, &sim.test_trial(i)?))
        .collect::<Result<Vec<_>>>()?;
    let summary = detection_accuracy(&results)?;
    Ok(ExperimentOutcome {
        summary,
        cv_report,
        decoder,
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoding::pearson;
    use rustfft::num_complex::Complex64;
    use rustfft::FftPlanner;

    fn small_trf(channels: usize) -> ForwardTRF {
        ForwardTRF::random(channels, 128.0, 250.0, 11).unwrap()
    }

    #[test]
    fn envelope_is_deterministic_and_sized() {
        let a = gen_envelope(40.0, 128.0, 5).unwrap();
        assert_eq!(a, gen_envelope(40.0, 128.0, 5).unwrap());
        assert_ne!(a, gen_envelope(40.0, 128.0, 6).unwrap());
        assert_eq!(a.len(), 5120);
        assert!(a.normalized);
        assert!(a.samples().iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(gen_envelope(0.0, 128.0, 1).is_err());
    }

    #[test]
    fn envelope_spectrum_is_band_limited() {
        let env = gen_envelope(40.0, 128.0, 3).unwrap();
        let mean = env.samples().iter().sum::<f64>() / env.len() as f64;
        let mut buf: Vec<Complex64> = env.samples().iter().map(|v| Complex64::new(v - mean, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        let n = buf.len();
        let power: Vec<f64> = buf[..=n / 2].iter().map(|c| c.norm_sqr()).collect();
        let total: f64 = power.iter().sum();
        let above: f64 = power
            .iter()
            .enumerate()
            .filter(|(k, _)| *k as f64 * 128.0 / n as f64 > 30.0)
            .map(|(_, p)| p)
            .sum();
        assert!(above / total <= 0.01, "{}", above / total);
    }

    #[test]
    fn noiseless_unleaked_channels_are_filtered_copies() {
        let trf = small_trf(3);
        let env = gen_envelope(5.0, 128.0, 1).unwrap();
        let rec = synthesize_recording(
            &env,
            &[gen_envelope(5.0, 128.0, 2).unwrap()],
            &trf,
            &MixParams {
                snr_db: f64::INFINITY,
                leakage: 0.0,
                seed: 0,
            },
        )
        .unwrap();
        for c in 0..3 {
            let mut expected = vec![0.0; env.len()];
            for t in 0..env.len() {
                for (tau, h) in trf.kernel(c).iter().enumerate() {
                    if t >= tau {
                        expected[t] += h * env.samples()[t - tau];
                    }
                }
            }
            for (a, b) in rec.channel(c).iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn snr_is_honoured() {
        let trf = small_trf(4);
        let env = gen_envelope(30.0, 128.0, 8).unwrap();
        let clean = synthesize_recording(
            &env,
            &[],
            &trf,
            &MixParams {
                snr_db: f64::INFINITY,
                leakage: 0.0,
                seed: 1,
            },
        )
        .unwrap();
        for snr in [-10.0, 0.0, 20.0] {
            let noisy = synthesize_recording(
                &env,
                &[],
                &trf,
                &MixParams {
                    snr_db: snr,
                    leakage: 0.0,
                    seed: 1,
                },
            )
            .unwrap();
            for c in 0..4 {
                let noise: Vec<f64> = noisy
                    .channel(c)
                    .iter()
                    .zip(clean.channel(c))
                    .map(|(a, b)| a - b)
                    .collect();
                let measured = 10.0 * (variance(clean.channel(c)) / variance(&noise)).log10();
                assert!((measured - snr).abs() <= 0.5, "{measured} vs {snr}");
            }
        }
    }

    #[test]
    fn noise_only_channels_do_not_track_envelope() {
        let trf = small_trf(2);
        let env = gen_envelope(50.0, 128.0, 4).unwrap();
        let rec = synthesize_recording(
            &env,
            &[],
            &trf,
            &MixParams {
                snr_db: f64::NEG_INFINITY,
                leakage: 0.0,
                seed: 9,
            },
        )
        .unwrap();
        for c in 0..2 {
            let r = pearson(rec.channel(c), env.samples()).unwrap();
            assert!(r.abs() <= 0.1, "{r}");
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let trf = small_trf(1);
        let a = gen_envelope(5.0, 128.0, 1).unwrap();
        let b = gen_envelope(4.0, 128.0, 1).unwrap();
        let mix = MixParams {
            snr_db: 0.0,
            leakage: 0.5,
            seed: 0,
        };
        assert!(synthesize_recording(&a, &[b], &trf, &mix).is_err());
    }

    #[test]
    fn config_validation_and_json_defaults() {
        let cfg: SimulationConfig = serde_json::from_str(r#"{"seed": 7, "channels": 8}"#).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.n_training_trials, 20);
        assert_eq!(cfg.grid.len(), 15);
        assert!(cfg.validate().is_ok());
        assert!(serde_json::from_str::<SimulationConfig>(r#"{"sed": 7}"#).is_err());
        let noise: SimulationConfig = serde_json::from_str(r#"{"snr_db": "-inf"}"#).unwrap();
        assert_eq!(noise.snr_db, f64::NEG_INFINITY);
        assert!(noise.validate().is_ok());
        assert!(serde_json::to_string(&noise).unwrap().contains(r#""snr_db":"-inf""#));
        assert!(serde_json::from_str::<SimulationConfig>(r#"{"snr_db": "loud"}"#).is_err());
        let bad = SimulationConfig {
            leakage: 1.5,
            ..SimulationConfig::default()
        };
        assert!(bad.validate().is_err());
        let short = SimulationConfig {
            duration_s: 0.1,
            ..SimulationConfig::default()
        };
        assert!(short.validate().is_err());
    }

    #[test]
    fn trials_regenerate_identically() {
        let cfg = SimulationConfig {
            channels: 2,
            duration_s: 5.0,
            seed: 3,
            ..SimulationConfig::default()
        };
        let a = Simulator::new(cfg.clone()).unwrap();
        let b = Simulator::new(cfg).unwrap();
        assert_eq!(a.test_trial(4).unwrap(), b.test_trial(4).unwrap());
        assert_eq!(a.training_trial(1).unwrap(), b.training_trial(1).unwrap());
        assert_ne!(a.training_trial(0).unwrap(), a.training_trial(1).unwrap());
    }

    #[test]
    fn metadata_covers_factorial_design() {
        let combos: std::collections::BTreeSet<_> = (0..18)
            .map(|i| {
                let m = test_metadata(i);
                (m.layout, m.target_gender, m.level)
            })
            .collect();
        assert_eq!(combos.len(), 18);
    }
}
