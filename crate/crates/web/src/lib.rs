//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function wraps a plain Rust function of the same name
//! (prefixed `run_`) so the numerics can be tested natively.

use std::f64::consts::PI;

use aad_core::decoding::{pearson, select_lambda, TrainingCorpus};
use aad_core::signal::{normalize_unit_interval, preprocess_stimulus, SampledSignal};
use aad_core::simulation::{run_experiment, SimulationConfig, Simulator};
use aad_core::Result;
use wasm_bindgen::prelude::*;

const DEMO_CHANNELS: usize = 16;
const DEMO_DURATION_S: f64 = 10.0;
const DEMO_TRAINING: usize = 6;
const DEMO_TEST: usize = 12;

fn demo_config(snr_db: f64, leakage: f64, seed: u64) -> SimulationConfig {
    SimulationConfig {
        channels: DEMO_CHANNELS,
        duration_s: DEMO_DURATION_S,
        snr_db,
        leakage,
        seed,
        n_training_trials: DEMO_TRAINING,
        n_test_trials: DEMO_TEST,
        ..SimulationConfig::default()
    }
}

/// Envelope of an amplitude-modulated tone next to the true modulator.
#[wasm_bindgen]
pub struct EnvelopeDemo {
    envelope: Vec<f64>,
    reference: Vec<f64>,
    correlation: f64,
}

#[wasm_bindgen]
impl EnvelopeDemo {
    /// Extracted envelope at 128 Hz, in `[0, 1]`.
    #[wasm_bindgen(getter)]
    pub fn envelope(&self) -> Vec<f64> {
        self.envelope.clone()
    }

    /// Modulator sampled at 128 Hz and normalized to `[0, 1]`.
    #[wasm_bindgen(getter)]
    pub fn reference(&self) -> Vec<f64> {
        self.reference.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn correlation(&self) -> f64 {
        self.correlation
    }
}

pub fn run_envelope_demo(carrier_hz: f64, mod_hz: f64, depth: f64, duration_s: f64) -> Result<EnvelopeDemo> {
    let audio_rate = 8000.0;
    let n = (duration_s * audio_rate).round() as usize;
    let modulator = |t: f64| 1.0 + depth * (2.0 * PI * mod_hz * t).sin();
    let audio: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / audio_rate;
            modulator(t) * (2.0 * PI * carrier_hz * t).sin()
        })
        .collect();
    let env = preprocess_stimulus(&SampledSignal::new(audio, audio_rate)?)?;
    let rate = env.rate();
    let reference: Vec<f64> = (0..env.len()).map(|i| modulator(i as f64 / rate)).collect();
    let reference = normalize_unit_interval(&SampledSignal::new(reference, rate)?);
    let correlation = pearson(env.samples(), reference.samples()).unwrap_or(0.0);
    Ok(EnvelopeDemo {
        envelope: env.samples().to_vec(),
        reference: reference.samples().to_vec(),
        correlation,
    })
}

#[wasm_bindgen]
pub fn envelope_demo(
    carrier_hz: f64,
    mod_hz: f64,
    depth: f64,
    duration_s: f64,
) -> std::result::Result<EnvelopeDemo, JsError> {
    run_envelope_demo(carrier_hz, mod_hz, depth, duration_s).map_err(|e| JsError::new(&e.to_string()))
}

/// Leave-one-out reconstruction accuracy across the lambda grid.
#[wasm_bindgen]
pub struct LambdaSweep {
    grid: Vec<f64>,
    mean_r: Vec<f64>,
    selected: usize,
}

#[wasm_bindgen]
impl LambdaSweep {
    #[wasm_bindgen(getter)]
    pub fn grid(&self) -> Vec<f64> {
        self.grid.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn mean_r(&self) -> Vec<f64> {
        self.mean_r.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn selected(&self) -> usize {
        self.selected
    }
}

pub fn run_lambda_sweep(snr_db: f64, seed: u64) -> Result<LambdaSweep> {
    let cfg = demo_config(snr_db, 0.0, seed);
    let sim = Simulator::new(cfg.clone())?;
    let corpus: TrainingCorpus = sim.training_corpus()?;
    let report = select_lambda(&corpus, cfg.lags()?, &cfg.grid)?;
    Ok(LambdaSweep {
        grid: report.grid,
        mean_r: report.mean_r,
        selected: report.selected_index,
    })
}

#[wasm_bindgen]
pub fn lambda_sweep(snr_db: f64, seed: u64) -> std::result::Result<LambdaSweep, JsError> {
    run_lambda_sweep(snr_db, seed).map_err(|e| JsError::new(&e.to_string()))
}

/// Three-talker classification of simulated test trials.
#[wasm_bindgen]
pub struct AttentionDemo {
    r_values: Vec<f64>,
    correct: Vec<u8>,
    accuracy: f64,
    lambda: f64,
}

#[wasm_bindgen]
impl AttentionDemo {
    /// Row-major `trials x 3` correlations; column 0 is the attended talker.
    #[wasm_bindgen(getter)]
    pub fn r_values(&self) -> Vec<f64> {
        self.r_values.clone()
    }

    /// 1 for each correctly classified trial.
    #[wasm_bindgen(getter)]
    pub fn correct(&self) -> Vec<u8> {
        self.correct.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    #[wasm_bindgen(getter)]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

pub fn run_attention_demo(snr_db: f64, leakage: f64, seed: u64) -> Result<AttentionDemo> {
    let outcome = run_experiment(&demo_config(snr_db, leakage, seed))?;
    Ok(AttentionDemo {
        r_values: outcome.results.iter().flat_map(|r| r.r_values).collect(),
        correct: outcome.results.iter().map(|r| u8::from(r.correct)).collect(),
        accuracy: outcome.summary.accuracy,
        lambda: outcome.decoder.lambda(),
    })
}

#[wasm_bindgen]
pub fn attention_demo(snr_db: f64, leakage: f64, seed: u64) -> std::result::Result<AttentionDemo, JsError> {
    run_attention_demo(snr_db, leakage, seed).map_err(|e| JsError::new(&e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_demo_tracks_modulator() {
        let d = run_envelope_demo(500.0, 3.0, 0.8, 4.0).unwrap();
        assert_eq!(d.envelope.len(), 512);
        assert_eq!(d.reference.len(), 512);
        assert!(d.correlation > 0.98, "r = {}", d.correlation);
    }

    #[test]
    fn envelope_demo_rejects_empty_audio() {
        assert!(run_envelope_demo(500.0, 3.0, 0.8, 0.0).is_err());
    }

    #[test]
    fn sweep_selects_the_best_grid_point() {
        let s = run_lambda_sweep(0.0, 2).unwrap();
        assert_eq!(s.grid.len(), s.mean_r.len());
        let best = s.mean_r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(s.mean_r[s.selected], best);
    }

    #[test]
    fn attention_demo_matches_library_run() {
        let d = run_attention_demo(10.0, 0.2, 4).unwrap();
        let lib = run_experiment(&demo_config(10.0, 0.2, 4)).unwrap();
        assert_eq!(d.r_values.len(), 3 * DEMO_TEST);
        assert_eq!(d.accuracy, lib.summary.accuracy);
        let n_correct = d.correct.iter().map(|&c| c as usize).sum::<usize>();
        assert_eq!(n_correct, lib.summary.n_correct);
        assert!(d.accuracy > 0.8);
    }
}
