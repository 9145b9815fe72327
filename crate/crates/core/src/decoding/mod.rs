//! Linear backward decoders mapping lagged multichannel responses to the
//! stimulus envelope.
//!
//! A decoder `d(tau, n)` reconstructs
//! `s_hat(t) = sum_n sum_tau r(t + tau, n) d(tau, n)`. Weights are fitted by
//! ridge regression on the lagged design matrix, and the ridge parameter is
//! chosen by leave-one-out cross-validation over trials, where each held-out
//! trial is decoded with the average of the single-trial decoders of all
//! other trials.

mod crossval;
mod lagged;
mod ridge;

pub use crossval::{
    evaluate_lambda, fit_final_decoder, fit_final_decoder_with, loo_decoder, preliminary_decoders, select_lambda,
    CrossValidationReport, FinalFit, LambdaEvaluation, TrainingCorpus,
};
pub use lagged::{build_lagged_matrix, LagSpec, LaggedDesignMatrix};
pub use ridge::{fit_decoder, FitDiagnostics, NormalEquations};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{Envelope, MultiChannelRecording, SampledSignal};

/// The fifteen decades `1e-3, 1e-2, ..., 1e11`.
pub fn default_lambda_grid() -> Vec<f64> {
    (-3..=11)
        .map(|e| format!("1e{e}").parse().expect("valid literal"))
        .collect()
}

/// Backward decoder weights over (lag, channel).
#[derive(Debug, Clone, PartialEq)]
pub struct Decoder {
    /// `L x N`, row-major: `weights[j * N + n] = d(tau_min + j, n)`.
    weights: Vec<f64>,
    channels: usize,
    lambda: f64,
    lags: LagSpec,
}

impl Decoder {
    pub fn new(weights: Vec<f64>, channels: usize, lags: LagSpec, lambda: f64) -> Result<Self> {
        lags.validate()?;
        if channels == 0 || weights.len() != lags.len() * channels {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} lags x {channels} channels",
                weights.len(),
                lags.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidInput("decoder weights must be finite".into()));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidInput(format!("invalid lambda {lambda}")));
        }
        Ok(Self {
            weights,
            channels,
            lambda,
            lags,
        })
    }

    pub fn zeros(channels: usize, lags: LagSpec) -> Result<Self> {
        Self::new(vec![0.0; channels * lags.len()], channels, lags, 0.0)
    }

    /// Builds a decoder from a vector ordered like the design matrix
    /// columns (`c * L + j`).
    pub fn from_column_vector(v: &[f64], lags: LagSpec, channels: usize, lambda: f64) -> Result<Self> {
        let l = lags.len();
        if v.len() != l * channels {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {l} lags x {channels} channels",
                v.len()
            )));
        }
        let mut weights = vec![0.0; v.len()];
        for c in 0..channels {
            for j in 0..l {
                weights[j * channels + c] = v[c * l + j];
            }
        }
        Self::new(weights, channels, lags, lambda)
    }

    /// Weights in design-matrix column order (`c * L + j`).
    pub fn to_column_vector(&self) -> Vec<f64> {
        let l = self.lags.len();
        let mut v = vec![0.0; self.weights.len()];
        for c in 0..self.channels {
            for j in 0..l {
                v[c * l + j] = self.weights[j * self.channels + c];
            }
        }
        v
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, lag_index: usize, channel: usize) -> f64 {
        self.weights[lag_index * self.channels + channel]
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lags(&self) -> LagSpec {
        self.lags
    }

    pub fn rate(&self) -> f64 {
        self.lags.rate
    }

    /// Euclidean norm of the weights.
    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&DecoderFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DecoderFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

/// On-disk decoder layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecoderFile {
    rate: f64,
    lambda: f64,
    tau_min_ms: f64,
    tau_max_ms: f64,
    channels: usize,
    weights: Vec<f64>,
}

impl From<&Decoder> for DecoderFile {
    fn from(d: &Decoder) -> Self {
        Self {
            rate: d.lags.rate,
            lambda: d.lambda,
            tau_min_ms: d.lags.tau_min_ms,
            tau_max_ms: d.lags.tau_max_ms,
            channels: d.channels,
            weights: d.weights.clone(),
        }
    }
}

impl TryFrom<DecoderFile> for Decoder {
    type Error = Error;

    fn try_from(f: DecoderFile) -> Result<Self> {
        let lags = LagSpec::new(f.tau_min_ms, f.tau_max_ms, f.rate)?;
        Decoder::new(f.weights, f.channels, lags, f.lambda)
    }
}

impl Serialize for Decoder {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DecoderFile::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Decoder {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = DecoderFile::deserialize(deserializer)?;
        Decoder::try_from(file).map_err(serde::de::Error::custom)
    }
}

/// Reconstructed envelope `s_hat(t) = sum_n sum_tau r(t + tau, n) d(tau, n)`,
/// with samples outside the recording taken as zero. Not normalized.
pub fn reconstruct(d: &Decoder, rec: &MultiChannelRecording) -> Result<Envelope> {
    if rec.channels() != d.channels() {
        return Err(Error::DimensionMismatch(format!(
            "decoder has {} channels, recording {}",
            d.channels(),
            rec.channels()
        )));
    }
    if rec.rate() != d.rate() {
        return Err(Error::DimensionMismatch(format!(
            "decoder at {} Hz, recording at {} Hz",
            d.rate(),
            rec.rate()
        )));
    }
    let t_len = rec.len();
    let mut out = vec![0.0; t_len];
    for (c, channel) in rec.channel_iter().enumerate() {
        for j in 0..d.lags().len() {
            let w = d.weight(j, c);
            let lag = d.lags().lag(j);
            let range = lagged::valid_range(t_len, lag);
            let shifted = &channel[(range.start as i64 + lag) as usize..(range.end as i64 + lag) as usize];
            for (acc, &r) in out[range].iter_mut().zip(shifted) {
                *acc += r * w;
            }
        }
    }
    Ok(Envelope {
        signal: SampledSignal::new(out, rec.rate())?,
        normalized: false,
        degenerate: false,
    })
}

/// Sample Pearson correlation.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "pearson inputs have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InvalidInput("pearson needs at least two samples".into()));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 {
        return Err(Error::UndefinedCorrelation("first sequence is constant"));
    }
    if sbb == 0.0 {
        return Err(Error::UndefinedCorrelation("second sequence is constant"));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_fifteen_decades() {
        let g = default_lambda_grid();
        assert_eq!(g.len(), 15);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[14], 1e11);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn pearson_examples() {
        let x = [0.3, 1.7, -2.0, 4.4];
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        // cov = 2, var_a = 2, var_b = 42/9  =>  r = 2 / sqrt(84/9)
        let oracle = 2.0 / (84.0f64 / 9.0).sqrt();
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 1.0, 4.0]).unwrap();
        assert!((r - oracle).abs() < 1e-12);
        assert!((r - 0.6547).abs() < 1e-4);
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(pearson(&[1.0], &[2.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[2.0]).is_err());
    }

    #[test]
    fn column_vector_round_trip() {
        let lags = LagSpec::new(0.0, 2.0, 1000.0).unwrap();
        let v: Vec<f64> = (0..6).map(f64::from).collect();
        let d = Decoder::from_column_vector(&v, lags, 2, 0.5).unwrap();
        // channel 0 holds lags 0..3 as coefficients 0,1,2
        assert_eq!(d.weight(0, 0), 0.0);
        assert_eq!(d.weight(2, 0), 2.0);
        assert_eq!(d.weight(0, 1), 3.0);
        assert_eq!(d.to_column_vector(), v);
    }

    #[test]
    fn json_round_trip_and_layout() {
        let lags = LagSpec::new(0.0, 250.0, 128.0).unwrap();
        let w: Vec<f64> = (0..66).map(|i| (i as f64).sin() / 7.0).collect();
        let d = Decoder::new(w, 2, lags, 1e5).unwrap();
        let text = d.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["rate", "lambda", "tau_min_ms", "tau_max_ms", "channels", "weights"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(Decoder::from_json(&text).unwrap(), d);
        assert!(Decoder::from_json(&text.replacen("\"rate\"", "\"bogus\": 1, \"rate\"", 1)).is_err());
    }

    #[test]
    fn zero_decoder_reconstructs_zero() {
        let rec = MultiChannelRecording::from_channels(vec![vec![0.5, 0.1, 0.9]; 2], 128.0).unwrap();
        let d = Decoder::zeros(2, LagSpec::new(0.0, 10.0, 128.0).unwrap()).unwrap();
        let s = reconstruct(&d, &rec).unwrap();
        assert!(s.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reconstruct_checks_dimensions() {
        let rec = MultiChannelRecording::from_channels(vec![vec![0.5; 10]], 128.0).unwrap();
        let d = Decoder::zeros(2, LagSpec::default_window()).unwrap();
        assert!(reconstruct(&d, &rec).is_err());
    }
}
