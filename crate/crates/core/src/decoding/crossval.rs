use serde::{Deserialize, Serialize};

use super::lagged::{build_lagged_matrix, LagSpec};
use super::ridge::NormalEquations;
use super::{pearson, reconstruct, Decoder};
use crate::error::{Error, Result};
use crate::signal::{Envelope, MultiChannelRecording};

/// Paired recordings and stimulus envelopes used to train a decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingCorpus {
    trials: Vec<(MultiChannelRecording, Envelope)>,
}

impl TrainingCorpus {
    pub fn new(trials: Vec<(MultiChannelRecording, Envelope)>) -> Result<Self> {
        let Some((first, _)) = trials.first() else {
            return Err(Error::InvalidInput("training corpus is empty".into()));
        };
        let (channels, rate) = (first.channels(), first.rate());
        for (k, (rec, env)) in trials.iter().enumerate() {
            if rec.len() != env.len() {
                return Err(Error::DimensionMismatch(format!(
                    "trial {k}: recording has {} samples, envelope {}",
                    rec.len(),
                    env.len()
                )));
            }
            if rec.channels() != channels {
                return Err(Error::DimensionMismatch(format!(
                    "trial {k} has {} channels, trial 0 has {channels}",
                    rec.channels()
                )));
            }
            if rec.rate() != rate || env.rate() != rate {
                return Err(Error::DimensionMismatch(format!(
                    "trial {k} is not sampled at {rate} Hz"
                )));
            }
        }
        Ok(Self { trials })
    }

    pub fn trials(&self) -> &[(MultiChannelRecording, Envelope)] {
        &self.trials
    }

    /// Number of trials `K`.
    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.trials[0].0.channels()
    }

    pub fn rate(&self) -> f64 {
        self.trials[0].0.rate()
    }

    fn normal_equations(&self, k: usize, lags: LagSpec) -> Result<NormalEquations> {
        let (rec, env) = &self.trials[k];
        let design = build_lagged_matrix(rec, lags).map_err(|e| match e {
            Error::InsufficientData {
                available, required, ..
            } => Error::InsufficientData {
                trial: Some(k),
                available,
                required,
            },
            other => other,
        })?;
        NormalEquations::from_design(&design, env)
    }
}

fn require_two(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InsufficientData {
            trial: None,
            available: k,
            required: 2,
        });
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn map_trials<T: Send>(k: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    use rayon::prelude::*;
    (0..k).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_trials<T: Send>(k: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..k).map(f).collect()
}

/// Single-trial ridge decoders for every trial at every lambda of `grid`.
/// Indexed `[trial][grid index]`.
fn prelims_over_grid(corpus: &TrainingCorpus, lags: LagSpec, grid: &[f64]) -> Result<Vec<Vec<Decoder>>> {
    let channels = corpus.channels();
    map_trials(corpus.len(), |k| {
        let eq = corpus.normal_equations(k, lags)?;
        grid.iter()
            .map(|&lambda| Decoder::from_column_vector(&eq.solve(lambda)?, lags, channels, lambda))
            .collect()
    })
}

/// One ridge decoder per trial, each fitted on that trial alone.
pub fn preliminary_decoders(corpus: &TrainingCorpus, lags: LagSpec, lambda: f64) -> Result<Vec<Decoder>> {
    require_two(corpus.len())?;
    Ok(prelims_over_grid(corpus, lags, &[lambda])?
        .into_iter()
        .map(|mut per_lambda| per_lambda.remove(0))
        .collect())
}

/// Decoder for held-out trial `k` (zero-based): the average of all
/// preliminary decoders except the `k`-th.
pub fn loo_decoder(prelims: &[Decoder], k: usize) -> Result<Decoder> {
    require_two(prelims.len())?;
    if k >= prelims.len() {
        return Err(Error::InvalidInput(format!(
            "held-out index {k} out of range for {} trials",
            prelims.len()
        )));
    }
    let first = &prelims[0];
    for d in prelims {
        if d.weights().len() != first.weights().len() || d.channels() != first.channels() {
            return Err(Error::DimensionMismatch("preliminary decoders differ in shape".into()));
        }
    }
    let mut sum = vec![0.0; first.weights().len()];
    for (i, d) in prelims.iter().enumerate() {
        if i == k {
            continue;
        }
        for (acc, w) in sum.iter_mut().zip(d.weights()) {
            *acc += w;
        }
    }
    let denom = (prelims.len() - 1) as f64;
    sum.iter_mut().for_each(|v| *v /= denom);
    Decoder::new(sum, first.channels(), first.lags(), first.lambda())
}

/// Leave-one-out scores of a single lambda.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEvaluation {
    pub lambda: f64,
    pub mean_r: f64,
    pub per_trial_r: Vec<f64>,
    /// Trials whose correlation was undefined; they count as `r = 0`.
    pub undefined_trials: Vec<usize>,
}

fn score_prelims(corpus: &TrainingCorpus, prelims: &[Decoder], lambda: f64) -> Result<LambdaEvaluation> {
    let mut per_trial_r = Vec::with_capacity(prelims.len());
    let mut undefined_trials = Vec::new();
    for (k, (rec, env)) in corpus.trials().iter().enumerate() {
        let d = loo_decoder(prelims, k)?;
        let s_hat = reconstruct(&d, rec)?;
        match pearson(s_hat.samples(), env.samples()) {
            Ok(r) => per_trial_r.push(r),
            Err(Error::UndefinedCorrelation(_)) => {
                per_trial_r.push(0.0);
                undefined_trials.push(k);
            }
            Err(e) => return Err(e),
        }
    }
    let mean_r = per_trial_r.iter().sum::<f64>() / per_trial_r.len() as f64;
    Ok(LambdaEvaluation {
        lambda,
        mean_r,
        per_trial_r,
        undefined_trials,
    })
}

/// Mean leave-one-out Pearson correlation across trials for one lambda.
pub fn evaluate_lambda(corpus: &TrainingCorpus, lags: LagSpec, lambda: f64) -> Result<LambdaEvaluation> {
    let prelims = preliminary_decoders(corpus, lags, lambda)?;
    score_prelims(corpus, &prelims, lambda)
}

/// Outcome of the lambda search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidationReport {
    pub grid: Vec<f64>,
    pub mean_r: Vec<f64>,
    /// `K x |grid|`: `per_trial_r[k][g]`.
    pub per_trial_r: Vec<Vec<f64>>,
    /// `(trial, grid index)` pairs with undefined correlation.
    pub undefined: Vec<(usize, usize)>,
    pub selected_lambda: f64,
    pub selected_index: usize,
}

impl CrossValidationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Evaluates every lambda of `grid` by leave-one-out cross-validation and
/// selects the one with the highest mean correlation (smallest lambda on
/// ties).
pub fn select_lambda(corpus: &TrainingCorpus, lags: LagSpec, grid: &[f64]) -> Result<CrossValidationReport> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("lambda grid is empty".into()));
    }
    if grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::InvalidConfig(
            "lambda grid values must be finite and >= 0".into(),
        ));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("lambda grid must be strictly increasing".into()));
    }
    require_two(corpus.len())?;

    let by_trial = prelims_over_grid(corpus, lags, grid)?;
    let k = corpus.len();
    let mut mean_r = Vec::with_capacity(grid.len());
    let mut per_trial_r = vec![Vec::with_capacity(grid.len()); k];
    let mut undefined = Vec::new();
    for (g, &lambda) in grid.iter().enumerate() {
        let prelims: Vec<Decoder> = by_trial.iter().map(|row| row[g].clone()).collect();
        let eval = score_prelims(corpus, &prelims, lambda)?;
        mean_r.push(eval.mean_r);
        for (row, r) in per_trial_r.iter_mut().zip(eval.per_trial_r) {
            row.push(r);
        }
        undefined.extend(eval.undefined_trials.into_iter().map(|t| (t, g)));
    }

    let mut selected_index = 0;
    for (g, &r) in mean_r.iter().enumerate() {
        if r > mean_r[selected_index] {
            selected_index = g;
        }
    }
    Ok(CrossValidationReport {
        grid: grid.to_vec(),
        mean_r,
        per_trial_r,
        undefined,
        selected_lambda: grid[selected_index],
        selected_index,
    })
}

/// How the deployed decoder is built from the training trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalFit {
    /// One ridge fit on all trials stacked in time.
    #[default]
    Joint,
    /// Average of the single-trial decoders.
    Average,
}

/// Joint ridge fit over all trials at `lambda`.
pub fn fit_final_decoder(corpus: &TrainingCorpus, lags: LagSpec, lambda: f64) -> Result<Decoder> {
    fit_final_decoder_with(corpus, lags, lambda, FinalFit::Joint)
}

pub fn fit_final_decoder_with(
    corpus: &TrainingCorpus,
    lags: LagSpec,
    lambda: f64,
    method: FinalFit,
) -> Result<Decoder> {
    match method {
        FinalFit::Joint => {
            let mut eq = corpus.normal_equations(0, lags)?;
            for k in 1..corpus.len() {
                eq.accumulate(&corpus.normal_equations(k, lags)?)?;
            }
            Decoder::from_column_vector(&eq.solve(lambda)?, lags, corpus.channels(), lambda)
        }
        FinalFit::Average => {
            let prelims = prelims_over_grid(corpus, lags, &[lambda])?;
            let first = &prelims[0][0];
            let mut sum = vec![0.0; first.weights().len()];
            for row in &prelims {
                for (acc, w) in sum.iter_mut().zip(row[0].weights()) {
                    *acc += w;
                }
            }
            let k = prelims.len() as f64;
            sum.iter_mut().for_each(|v| *v /= k);
            Decoder::new(sum, first.channels(), lags, lambda)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::SampledSignal;

    fn lags0() -> LagSpec {
        LagSpec::new(0.0, 0.0, 128.0).unwrap()
    }

    fn wave(n: usize, phase: f64) -> Vec<f64> {
        (0..n).map(|i| 0.5 + 0.5 * (i as f64 * 0.17 + phase).sin()).collect()
    }

    fn broadcast_trial(n: usize, channels: usize, phase: f64) -> (MultiChannelRecording, Envelope) {
        let s = wave(n, phase);
        let rec = MultiChannelRecording::from_channels(vec![s.clone(); channels], 128.0).unwrap();
        (rec, Envelope::from_signal(SampledSignal::new(s, 128.0).unwrap()))
    }

    fn scalar(w: f64) -> Decoder {
        Decoder::new(vec![w], 1, lags0(), 1.0).unwrap()
    }

    #[test]
    fn loo_examples() {
        let prelims = vec![scalar(1.0), scalar(2.0), scalar(6.0)];
        assert_eq!(loo_decoder(&prelims, 0).unwrap().weights(), &[4.0]);
        let same = vec![scalar(0.3); 4];
        assert_eq!(loo_decoder(&same, 2).unwrap().weights(), &[0.3]);
        assert!(loo_decoder(&prelims[..1], 0).is_err());
        assert!(loo_decoder(&prelims, 3).is_err());
    }

    #[test]
    fn corpus_validation() {
        let (rec, env) = broadcast_trial(50, 2, 0.0);
        let short = Envelope::from_signal(SampledSignal::new(vec![0.5; 49], 128.0).unwrap());
        assert!(TrainingCorpus::new(vec![(rec.clone(), short)]).is_err());
        let (other, env3) = broadcast_trial(50, 3, 0.0);
        assert!(TrainingCorpus::new(vec![(rec, env), (other, env3)]).is_err());
        assert!(TrainingCorpus::new(vec![]).is_err());
    }

    #[test]
    fn self_predicting_corpus_scores_high() {
        let corpus = TrainingCorpus::new((0..4).map(|k| broadcast_trial(200, 3, k as f64)).collect()).unwrap();
        let eval = evaluate_lambda(&corpus, lags0(), 1e-3).unwrap();
        assert!(eval.mean_r >= 0.999, "{}", eval.mean_r);
        assert!(eval.undefined_trials.is_empty());
    }

    #[test]
    fn identical_trials_score_identically() {
        let corpus = TrainingCorpus::new(vec![broadcast_trial(120, 2, 0.4); 3]).unwrap();
        let lags = LagSpec::new(0.0, 30.0, 128.0).unwrap();
        let prelims = preliminary_decoders(&corpus, lags, 0.1).unwrap();
        assert!(prelims.windows(2).all(|w| w[0] == w[1]));
        let eval = evaluate_lambda(&corpus, lags, 0.1).unwrap();
        assert!(eval.per_trial_r.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn short_trial_is_named() {
        let corpus = TrainingCorpus::new(vec![broadcast_trial(40, 1, 0.0), broadcast_trial(3, 1, 0.0)]).unwrap();
        let err = preliminary_decoders(&corpus, LagSpec::default_window(), 1.0).unwrap_err();
        assert!(matches!(err, Error::InsufficientData { trial: Some(1), .. }), "{err}");
    }

    #[test]
    fn constant_reconstruction_is_flagged() {
        // all-zero recordings give an all-zero reconstruction
        let zero = MultiChannelRecording::from_channels(vec![vec![0.0; 30]], 128.0).unwrap();
        let env = Envelope::from_signal(SampledSignal::new(wave(30, 0.0), 128.0).unwrap());
        let corpus = TrainingCorpus::new(vec![(zero.clone(), env.clone()), (zero, env)]).unwrap();
        let eval = evaluate_lambda(&corpus, lags0(), 1.0).unwrap();
        assert_eq!(eval.mean_r, 0.0);
        assert_eq!(eval.undefined_trials, vec![0, 1]);
    }

    #[test]
    fn grid_validation_and_single_entry() {
        let corpus = TrainingCorpus::new((0..3).map(|k| broadcast_trial(80, 2, k as f64)).collect()).unwrap();
        assert!(select_lambda(&corpus, lags0(), &[]).is_err());
        assert!(select_lambda(&corpus, lags0(), &[1.0, 1.0]).is_err());
        assert!(select_lambda(&corpus, lags0(), &[10.0, 1.0]).is_err());
        let report = select_lambda(&corpus, lags0(), &[3.5]).unwrap();
        assert_eq!(report.selected_lambda, 3.5);
        assert_eq!(report.per_trial_r.len(), 3);
    }

    #[test]
    fn ties_resolve_to_smallest_lambda() {
        // zero recordings: every lambda scores 0
        let zero = MultiChannelRecording::from_channels(vec![vec![0.0; 30]], 128.0).unwrap();
        let env = Envelope::from_signal(SampledSignal::new(wave(30, 0.0), 128.0).unwrap());
        let corpus = TrainingCorpus::new(vec![(zero.clone(), env.clone()), (zero, env)]).unwrap();
        let report = select_lambda(&corpus, lags0(), &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(report.selected_lambda, 0.5);
        assert_eq!(report.undefined.len(), 6);
    }

    #[test]
    fn average_final_fit() {
        let corpus = TrainingCorpus::new((0..3).map(|k| broadcast_trial(90, 2, k as f64)).collect()).unwrap();
        let lags = LagSpec::new(0.0, 20.0, 128.0).unwrap();
        let avg = fit_final_decoder_with(&corpus, lags, 1.0, FinalFit::Average).unwrap();
        let prelims = preliminary_decoders(&corpus, lags, 1.0).unwrap();
        for (i, w) in avg.weights().iter().enumerate() {
            let mean = prelims.iter().map(|d| d.weights()[i]).sum::<f64>() / 3.0;
            assert!((w - mean).abs() < 1e-12);
        }
    }
}
