//! Three-stream attended-speech detection.
//!
//! The decoder reconstructs an envelope from the recording; the candidate
//! stream whose envelope correlates best with the reconstruction is taken
//! as the attended one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decoding::{pearson, reconstruct, Decoder};
use crate::error::{Error, Result};
use crate::signal::{Envelope, MultiChannelRecording};

/// Number of competing streams per trial.
pub const STREAMS: usize = 3;

/// 97.5th percentile of the standard normal.
const Z_95: f64 = 1.959_963_984_540_054;

/// Condition labels attached to a cocktail-party trial.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialMetadata {
    pub layout: String,
    pub level: String,
    pub target_gender: String,
}

/// One recording with the envelopes of the target and two maskers.
#[derive(Debug, Clone, PartialEq)]
pub struct CocktailTrial {
    recording: MultiChannelRecording,
    candidates: [Envelope; STREAMS],
    true_target: usize,
    pub metadata: TrialMetadata,
}

impl CocktailTrial {
    /// Candidates ordered (target, masker 1, masker 2).
    pub fn new(
        recording: MultiChannelRecording,
        candidates: [Envelope; STREAMS],
        metadata: TrialMetadata,
    ) -> Result<Self> {
        Self::with_target(recording, candidates, 0, metadata)
    }

    pub fn with_target(
        recording: MultiChannelRecording,
        candidates: [Envelope; STREAMS],
        true_target: usize,
        metadata: TrialMetadata,
    ) -> Result<Self> {
        if true_target >= STREAMS {
            return Err(Error::InvalidInput(format!("target index {true_target} out of range")));
        }
        for (i, c) in candidates.iter().enumerate() {
            if c.len() != recording.len() {
                return Err(Error::DimensionMismatch(format!(
                    "candidate {i} has {} samples, recording {}",
                    c.len(),
                    recording.len()
                )));
            }
        }
        Ok(Self {
            recording,
            candidates,
            true_target,
            metadata,
        })
    }

    pub fn recording(&self) -> &MultiChannelRecording {
        &self.recording
    }

    pub fn candidates(&self) -> &[Envelope; STREAMS] {
        &self.candidates
    }

    pub fn true_target(&self) -> usize {
        self.true_target
    }
}

/// Classification of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionResult {
    /// Correlations with (target, masker 1, masker 2) in candidate order.
    pub r_values: [f64; STREAMS],
    pub detected: usize,
    pub correct: bool,
    pub tie: bool,
    /// Candidates whose correlation was undefined and scored as -1.
    pub undefined: Vec<usize>,
    #[serde(default)]
    pub metadata: TrialMetadata,
}

/// Decides between candidates given their correlations. Exact ties resolve
/// to the lowest tied index and are never counted correct.
pub fn classify(r_values: [f64; STREAMS], true_target: usize) -> (usize, bool, bool) {
    let mut detected = 0;
    for i in 1..STREAMS {
        if r_values[i] > r_values[detected] {
            detected = i;
        }
    }
    let tie = (0..STREAMS).any(|i| i != detected && r_values[i] == r_values[detected]);
    (detected, detected == true_target && !tie, tie)
}

/// Reconstructs the envelope from the trial's recording and picks the best
/// correlated candidate.
pub fn detect_attention(d: &Decoder, trial: &CocktailTrial) -> Result<AttentionResult> {
    let s_hat = reconstruct(d, &trial.recording)?;
    let mut r_values = [0.0; STREAMS];
    let mut undefined = Vec::new();
    for (i, cand) in trial.candidates.iter().enumerate() {
        r_values[i] = match pearson(s_hat.samples(), cand.samples()) {
            Ok(r) => r,
            Err(Error::UndefinedCorrelation(_)) => {
                undefined.push(i);
                -1.0
            }
            Err(e) => return Err(e),
        };
    }
    let (detected, correct, tie) = classify(r_values, trial.true_target);
    Ok(AttentionResult {
        r_values,
        detected,
        correct,
        tie,
        undefined,
        metadata: trial.metadata.clone(),
    })
}

/// Wilson score interval for a binomial proportion `p` observed over `n`
/// trials.
pub fn wilson_interval(p: f64, n: usize) -> (f64, f64) {
    let n = n as f64;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionAccuracy {
    pub n_trials: usize,
    pub n_correct: usize,
    pub accuracy: f64,
}

/// Detection accuracy over a set of trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracySummary {
    pub n_trials: usize,
    pub n_correct: usize,
    pub accuracy: f64,
    /// Wilson 95% interval of `accuracy`.
    pub interval: (f64, f64),
    /// Keys are `layout=<id>`, `level=<id>` and `target_gender=<tag>`.
    pub by_condition: BTreeMap<String, ConditionAccuracy>,
}

impl AccuracySummary {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Plain-text condition x accuracy table.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<28} {:>6} {:>8} {:>9}\n",
            "condition", "trials", "correct", "accuracy"
        );
        for (key, c) in &self.by_condition {
            out.push_str(&format!(
                "{key:<28} {:>6} {:>8} {:>9.4}\n",
                c.n_trials, c.n_correct, c.accuracy
            ));
        }
        out.push_str(&format!(
            "{:<28} {:>6} {:>8} {:>9.4}  (95% CI {:.4}-{:.4})\n",
            "overall", self.n_trials, self.n_correct, self.accuracy, self.interval.0, self.interval.1
        ));
        out
    }
}

pub fn detection_accuracy(results: &[AttentionResult]) -> Result<AccuracySummary> {
    if results.is_empty() {
        return Err(Error::InvalidInput("no attention results to summarize".into()));
    }
    let n_trials = results.len();
    let n_correct = results.iter().filter(|r| r.correct).count();
    let accuracy = n_correct as f64 / n_trials as f64;

    let mut by_condition: BTreeMap<String, ConditionAccuracy> = BTreeMap::new();
    for r in results {
        let keys = [
            ("layout", &r.metadata.layout),
            ("level", &r.metadata.level),
            ("target_gender", &r.metadata.target_gender),
        ];
        for (name, value) in keys {
            if value.is_empty() {
                continue;
            }
            let entry = by_condition
                .entry(format!("{name}={value}"))
                .or_insert(ConditionAccuracy {
                    n_trials: 0,
                    n_correct: 0,
                    accuracy: 0.0,
                });
            entry.n_trials += 1;
            entry.n_correct += usize::from(r.correct);
        }
    }
    for c in by_condition.values_mut() {
        c.accuracy = c.n_correct as f64 / c.n_trials as f64;
    }
    Ok(AccuracySummary {
        n_trials,
        n_correct,
        accuracy,
        interval: wilson_interval(accuracy, n_trials),
        by_condition,
    })
}
