use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use aad_core::attention::{detect_attention, detection_accuracy, AttentionResult};
use aad_core::behavioral::{build_sessions, default_layouts, score_words, LevelCondition, SessionPlan};
use aad_core::decoding::{fit_final_decoder_with, select_lambda, Decoder, FinalFit, TrainingCorpus};
use aad_core::signal::io::{load_recording, load_signal};
use aad_core::signal::{preprocess_recording_with, preprocess_stimulus_with};
use aad_core::simulation::Simulator;
use aad_core::stats::{anova_oneway, pairwise_bonferroni_with, PairwiseVariance};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{parse_grid, parse_levels, RunConfig};
use crate::error::{CliError, CliResult};
use crate::layout::{load_test, load_training, trial_dir_name, TEST_STREAMS};
use crate::output::{input_digest, OutputDir};
use crate::{
    AnovaArgs, BehavioralGenArgs, BehavioralScoreArgs, DecodeArgs, FinalFitArg, PairwiseArg, PreprocessArgs,
    SignalKind, SimulateArgs, TrainArgs,
};

fn input_base(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new(""))
}

pub fn preprocess(a: PreprocessArgs) -> CliResult<()> {
    let mut cfg = RunConfig::load_optional(a.config.as_deref())?
        .preprocess
        .unwrap_or_default();
    if let Some(r) = a.rate {
        cfg.rate = r;
    }
    if let Some(v) = a.low_hz {
        cfg.low_hz = v;
    }
    if let Some(v) = a.high_hz {
        cfg.high_hz = v;
    }
    let inputs = vec![input_digest(input_base(&a.input), &a.input)?];
    let mut out = OutputDir::create(&a.out)?;
    let report = match a.kind {
        SignalKind::Stimulus => {
            let audio = load_signal(&a.input)?;
            let env = preprocess_stimulus_with(&audio, cfg.band(), cfg.rate)?;
            out.write_envelope("envelope", &env, a.format)?;
            json!({ "kind": "stimulus", "samples": env.len(), "rate": env.rate(), "degenerate": env.degenerate })
        }
        SignalKind::Recording => {
            let rec = load_recording(&a.input)?;
            let pre = preprocess_recording_with(&rec, cfg.band(), cfg.rate)?;
            out.write_recording("recording", &pre.recording, a.format)?;
            json!({
                "kind": "recording",
                "channels": pre.recording.channels(),
                "samples": pre.recording.len(),
                "rate": pre.recording.rate(),
                "degenerate_channels": pre.degenerate_channels,
            })
        }
    };
    out.write_json("preprocess_report.json", &report)?;
    out.finish(
        "preprocess",
        None,
        &json!({ "preprocess": cfg, "format": a.format }),
        inputs,
    )
}

pub fn train(a: TrainArgs) -> CliResult<()> {
    let mut cfg = RunConfig::load_optional(a.config.as_deref())?.train.unwrap_or_default();
    if let Some(g) = &a.grid {
        cfg.grid = parse_grid(g)?;
    }
    if a.lambda.is_some() {
        cfg.lambda = a.lambda;
    }
    if let Some(v) = a.tau_min_ms {
        cfg.tau_min_ms = v;
    }
    if let Some(v) = a.tau_max_ms {
        cfg.tau_max_ms = v;
    }
    if let Some(v) = a.rate {
        cfg.rate = v;
    }
    if let Some(f) = a.final_fit {
        cfg.final_fit = match f {
            FinalFitArg::Joint => FinalFit::Joint,
            FinalFitArg::Average => FinalFit::Average,
        };
    }
    let lags = cfg.lags()?;
    let loaded = load_training(&a.corpus)?;
    let corpus = TrainingCorpus::new(loaded.items)?;
    if corpus.rate() != cfg.rate {
        return Err(CliError::Data(format!(
            "corpus is sampled at {} Hz but {} Hz was expected",
            corpus.rate(),
            cfg.rate
        )));
    }
    let mut out = OutputDir::create(&a.out)?;
    let lambda = match cfg.lambda {
        Some(l) => l,
        None => {
            let report = select_lambda(&corpus, lags, &cfg.grid)?;
            out.write_json("cv_report.json", &report)?;
            report.selected_lambda
        }
    };
    let decoder = fit_final_decoder_with(&corpus, lags, lambda, cfg.final_fit)?;
    out.write_json("decoder.json", &decoder)?;
    println!("trained on {} trials, lambda = {lambda:e}", corpus.len());
    out.finish("train", None, &cfg, loaded.inputs)
}

fn results_jsonl(results: &[AttentionResult]) -> CliResult<String> {
    let mut text = String::new();
    for r in results {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    Ok(text)
}

pub fn decode(a: DecodeArgs) -> CliResult<()> {
    let text = fs::read_to_string(&a.decoder)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", a.decoder.display())))?;
    let decoder = Decoder::from_json(&text).map_err(|e| CliError::Data(format!("{}: {e}", a.decoder.display())))?;
    let mut inputs = vec![input_digest(input_base(&a.decoder), &a.decoder)?];
    let loaded = load_test(&a.trials)?;
    inputs.extend(loaded.inputs);
    let results = loaded
        .items
        .iter()
        .map(|t| detect_attention(&decoder, t))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = detection_accuracy(&results)?;
    let mut out = OutputDir::create(&a.out)?;
    out.write("results.jsonl", results_jsonl(&results)?.as_bytes())?;
    out.write_json("summary.json", &summary)?;
    print!("{}", summary.table());
    out.finish("decode", None, &json!({ "trials": results.len() }), inputs)
}

pub fn simulate(a: SimulateArgs) -> CliResult<()> {
    let mut cfg = RunConfig::load_optional(a.config.as_deref())?
        .simulate
        .unwrap_or_default();
    macro_rules! set {
        ($($flag:ident => $field:ident),*) => {
            $(if let Some(v) = a.$flag { cfg.$field = v; })*
        };
    }
    set!(seed => seed, channels => channels, rate => rate, snr_db => snr_db, leakage => leakage,
         duration_s => duration_s, train_trials => n_training_trials, test_trials => n_test_trials,
         tau_min_ms => tau_min_ms, tau_max_ms => tau_max_ms);
    if let Some(g) = &a.grid {
        cfg.grid = parse_grid(g)?;
    }
    let sim = Simulator::new(cfg.clone())?;
    let lags = cfg.lags()?;
    let mut out = OutputDir::create(&a.out)?;

    let mut trials = Vec::with_capacity(cfg.n_training_trials);
    for k in 0..cfg.n_training_trials {
        let (rec, env) = sim.training_trial(k)?;
        let dir = format!("train/{}", trial_dir_name(k));
        out.write_recording(&format!("{dir}/recording"), &rec, a.format)?;
        out.write_envelope(&format!("{dir}/envelope"), &env, a.format)?;
        trials.push((rec, env));
    }
    let corpus = TrainingCorpus::new(trials)?;
    let report = select_lambda(&corpus, lags, &cfg.grid)?;
    let decoder = fit_final_decoder_with(&corpus, lags, report.selected_lambda, cfg.final_fit)?;
    drop(corpus);

    let mut results = Vec::with_capacity(cfg.n_test_trials);
    for i in 0..cfg.n_test_trials {
        let trial = sim.test_trial(i)?;
        let dir = format!("test/{}", trial_dir_name(i));
        out.write_recording(&format!("{dir}/recording"), trial.recording(), a.format)?;
        for (stem, env) in TEST_STREAMS.iter().zip(trial.candidates()) {
            out.write_envelope(&format!("{dir}/{stem}"), env, a.format)?;
        }
        out.write_json(&format!("{dir}/meta.json"), &trial.metadata)?;
        results.push(detect_attention(&decoder, &trial)?);
    }
    let summary = detection_accuracy(&results)?;
    out.write_json("cv_report.json", &report)?;
    out.write_json("decoder.json", &decoder)?;
    out.write("results.jsonl", results_jsonl(&results)?.as_bytes())?;
    out.write_json("summary.json", &summary)?;
    print!("{}", summary.table());
    out.finish(
        "simulate",
        Some(cfg.seed),
        &json!({ "simulate": cfg, "format": a.format }),
        Vec::new(),
    )
}

pub fn behavioral_gen(a: BehavioralGenArgs) -> CliResult<()> {
    let mut cfg = RunConfig::load_optional(a.config.as_deref())?
        .behavioral
        .unwrap_or_default();
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(l) = &a.levels {
        cfg.levels = parse_levels(l)?;
    }
    if let Some(t) = a.tmr_db {
        cfg.tmr_db = t;
    }
    if let Some(r) = a.reps {
        cfg.reps = r;
    }
    let levels = cfg
        .levels
        .iter()
        .map(|&t| LevelCondition::with_tmr(t, cfg.tmr_db))
        .collect::<Result<Vec<_>, _>>()?;
    let layouts = cfg.layouts.clone().unwrap_or_else(default_layouts);
    let sessions = build_sessions(&levels, &layouts, cfg.reps, cfg.seed)?;
    let mut out = OutputDir::create(&a.out)?;
    out.write_json("sessions.json", &sessions)?;
    let total: usize = sessions.iter().map(|s| s.trials.len()).sum();
    println!("{} sessions, {total} trials", sessions.len());
    out.finish("behavioral gen", Some(cfg.seed), &cfg, Vec::new())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResponseEntry {
    session: usize,
    trial: usize,
    words: Vec<String>,
}

#[derive(Debug, Default, Serialize)]
struct ScoreTally {
    trials: usize,
    words_correct: usize,
    fraction: f64,
}

impl ScoreTally {
    fn add(&mut self, correct: usize) {
        self.trials += 1;
        self.words_correct += correct;
        self.fraction = self.words_correct as f64 / (5 * self.trials) as f64;
    }
}

pub fn behavioral_score(a: BehavioralScoreArgs) -> CliResult<()> {
    let read =
        |p: &Path| fs::read_to_string(p).map_err(|e| CliError::Data(format!("cannot read {}: {e}", p.display())));
    let mut sessions: Vec<SessionPlan> = serde_json::from_str(&read(&a.sessions)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", a.sessions.display())))?;
    let responses: Vec<ResponseEntry> = serde_json::from_str(&read(&a.responses)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", a.responses.display())))?;
    let inputs = vec![
        input_digest(input_base(&a.sessions), &a.sessions)?,
        input_digest(input_base(&a.responses), &a.responses)?,
    ];

    for r in &responses {
        let trial = sessions
            .iter_mut()
            .find(|s| s.session == r.session)
            .and_then(|s| s.trials.get_mut(r.trial))
            .ok_or_else(|| CliError::Data(format!("no trial {} in session {}", r.trial, r.session)))?;
        let score = score_words(trial, &r.words)?;
        trial.response = aad_core::behavioral::MatrixSentence::parse(&r.words.join(" ")).ok();
        trial.score = Some(score);
    }

    let mut overall = ScoreTally::default();
    let mut by_session: BTreeMap<String, ScoreTally> = BTreeMap::new();
    let mut by_layout: BTreeMap<String, ScoreTally> = BTreeMap::new();
    for s in &sessions {
        for t in &s.trials {
            if let Some(score) = &t.score {
                let correct = score.per_word.iter().filter(|&&ok| ok).count();
                overall.add(correct);
                by_session
                    .entry(format!("session={} level={}", s.session, s.level.label()))
                    .or_default()
                    .add(correct);
                by_layout.entry(t.layout.label()).or_default().add(correct);
            }
        }
    }
    let mut out = OutputDir::create(&a.out)?;
    out.write_json("scored_sessions.json", &sessions)?;
    out.write_json(
        "score_summary.json",
        &json!({ "overall": overall, "by_session": by_session, "by_layout": by_layout }),
    )?;
    println!(
        "{} responses scored, {:.4} of words correct",
        overall.trials, overall.fraction
    );
    out.finish(
        "behavioral score",
        None,
        &json!({ "responses": responses.len() }),
        inputs,
    )
}

/// Every numeric field of a CSV file; a non-numeric first line is taken as
/// a header.
fn read_group(path: &Path) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).filter(|f| !f.is_empty()).collect();
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) => values.extend(v),
            Err(_) if i == 0 => {}
            Err(_) => {
                return Err(CliError::Data(format!(
                    "{}:{}: non-numeric value",
                    path.display(),
                    i + 1
                )));
            }
        }
    }
    Ok(values)
}

pub fn anova(a: AnovaArgs) -> CliResult<()> {
    let mut cfg = RunConfig::load_optional(a.config.as_deref())?.stats.unwrap_or_default();
    if let Some(p) = a.pairwise {
        cfg.pairwise_variance = match p {
            PairwiseArg::Pooled => PairwiseVariance::PooledPair,
            PairwiseArg::Msw => PairwiseVariance::AnovaMsw,
        };
    }
    let groups = a.groups.iter().map(|p| read_group(p)).collect::<CliResult<Vec<_>>>()?;
    let inputs = a
        .groups
        .iter()
        .map(|p| input_digest(input_base(p), p))
        .collect::<CliResult<Vec<_>>>()?;
    let result = anova_oneway(&groups)?;
    let pairwise = pairwise_bonferroni_with(&groups, cfg.pairwise_variance)?;
    let report = result.report();
    let mut out = OutputDir::create(&a.out)?;
    out.write_json(
        "anova.json",
        &json!({ "anova": result, "pairwise": pairwise, "report": report }),
    )?;
    println!("{report}");
    for p in &pairwise {
        println!(
            "  group {} vs {}: t({})={:.3}, p={:.4}, adjusted p={:.4}",
            p.group_a, p.group_b, p.df, p.t_stat, p.p_raw, p.p_adjusted
        );
    }
    out.finish("stats anova", None, &cfg, inputs)
}
