use aad_core::decoding::{
    build_lagged_matrix, default_lambda_grid, fit_decoder, fit_final_decoder_with, loo_decoder, reconstruct, Decoder,
    FinalFit, LagSpec, NormalEquations, TrainingCorpus,
};
use aad_core::signal::{Envelope, MultiChannelRecording, SampledSignal};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RATE: f64 = 1000.0;

struct Instance {
    rec: MultiChannelRecording,
    env: Envelope,
    lags: LagSpec,
    lambda: f64,
}

fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = rng.random_range(40..=500);
    let n = rng.random_range(1..=8);
    let l = rng.random_range(1..=16usize);
    let tau_min = rng.random_range(-5..=5) as f64;
    let grid = default_lambda_grid();
    let lambda = grid[rng.random_range(0..grid.len())];
    let rows = (0..n)
        .map(|_| (0..t).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let s = (0..t).map(|_| rng.random_range(0.0..1.0)).collect();
    Instance {
        rec: MultiChannelRecording::from_channels(rows, RATE).unwrap(),
        env: Envelope::from_signal(SampledSignal::new(s, RATE).unwrap()),
        // at 1 kHz one millisecond is one sample
        lags: LagSpec::new(tau_min, tau_min + (l - 1) as f64, RATE).unwrap(),
        lambda,
    }
}

/// Design matrix written straight from the definition
/// `R[t, c L + j] = r(t + tau_min + j, c)`, zero outside the recording.
fn oracle_design(rec: &MultiChannelRecording, lags: LagSpec) -> DMatrix<f64> {
    let (t_len, l) = (rec.len(), lags.len());
    DMatrix::from_fn(t_len, rec.channels() * l, |t, col| {
        let (c, j) = (col / l, col % l);
        let idx = t as i64 + lags.tau_min() + j as i64;
        if (0..t_len as i64).contains(&idx) {
            rec.channel(c)[idx as usize]
        } else {
            0.0
        }
    })
}

fn oracle_solution(inst: &Instance) -> DVector<f64> {
    let r = oracle_design(&inst.rec, inst.lags);
    let s = DVector::from_column_slice(inst.env.samples());
    let a = r.transpose() * &r + DMatrix::identity(r.ncols(), r.ncols()) * inst.lambda;
    a.try_inverse().expect("regularized system is invertible") * (r.transpose() * s)
}

fn objective(r: &DMatrix<f64>, s: &DVector<f64>, d: &DVector<f64>, lambda: f64) -> f64 {
    ((s - r * d).norm_squared() + lambda * d.norm_squared()) / s.len() as f64
}

fn fd_gradient(r: &DMatrix<f64>, s: &DVector<f64>, d: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let h = 1e-6;
    DVector::from_fn(d.len(), |i, _| {
        let mut plus = d.clone();
        let mut minus = d.clone();
        plus[i] += h;
        minus[i] -= h;
        (objective(r, s, &plus, lambda) - objective(r, s, &minus, lambda)) / (2.0 * h)
    })
}

#[test]
fn solver_matches_explicit_inverse() {
    for seed in 0..100 {
        let inst = instance(seed);
        let design = build_lagged_matrix(&inst.rec, inst.lags).unwrap();
        let (d, _) = fit_decoder(&design, &inst.env, inst.lambda).unwrap();
        let oracle = oracle_solution(&inst);
        let worst = d
            .to_column_vector()
            .iter()
            .zip(oracle.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8, "seed {seed}: {worst}");
    }
}

#[test]
fn design_matches_definition() {
    for seed in 0..20 {
        let inst = instance(seed);
        let design = build_lagged_matrix(&inst.rec, inst.lags).unwrap();
        let oracle = oracle_design(&inst.rec, inst.lags);
        for t in 0..design.samples() {
            for col in 0..design.columns() {
                assert_eq!(design.get(t, col), oracle[(t, col)]);
            }
        }
    }
}

#[test]
fn fitted_decoder_is_a_stationary_point() {
    for seed in 100..120 {
        let inst = instance(seed);
        let design = build_lagged_matrix(&inst.rec, inst.lags).unwrap();
        let (d, diag) = fit_decoder(&design, &inst.env, inst.lambda).unwrap();
        let r = oracle_design(&inst.rec, inst.lags);
        let s = DVector::from_column_slice(inst.env.samples());
        let d = DVector::from_vec(d.to_column_vector());
        let at_fit = fd_gradient(&r, &s, &d, inst.lambda).norm();
        let at_zero = fd_gradient(&r, &s, &DVector::zeros(d.len()), inst.lambda).norm();
        assert!(at_fit / at_zero <= 1e-4, "seed {seed}: {}", at_fit / at_zero);
        assert!((diag.regularized_mse - objective(&r, &s, &d, inst.lambda)).abs() <= 1e-10);
    }
}

#[test]
fn normal_equation_residual_is_small() {
    for seed in 200..230 {
        let inst = instance(seed);
        let design = build_lagged_matrix(&inst.rec, inst.lags).unwrap();
        let eq = NormalEquations::from_design(&design, &inst.env).unwrap();
        let d = eq.solve(inst.lambda).unwrap();
        let b_inf = eq.rhs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let res_inf = eq.residual(&d, inst.lambda).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(res_inf <= 1e-8 * b_inf, "seed {seed}: {res_inf} vs {b_inf}");
    }
}

#[test]
fn matrix_and_convolution_reconstructions_agree_exactly() {
    for seed in 300..320 {
        let inst = instance(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..inst.rec.channels() * inst.lags.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let d = Decoder::from_column_vector(&v, inst.lags, inst.rec.channels(), 1.0).unwrap();
        let direct = reconstruct(&d, &inst.rec).unwrap();
        let via_matrix = build_lagged_matrix(&inst.rec, inst.lags).unwrap().multiply(&v).unwrap();
        assert_eq!(direct.samples(), via_matrix.as_slice(), "seed {seed}");
    }
}

#[test]
fn huge_lambda_drives_decoder_to_zero() {
    for seed in 400..410 {
        let inst = instance(seed);
        let design = build_lagged_matrix(&inst.rec, inst.lags).unwrap();
        let eq = NormalEquations::from_design(&design, &inst.env).unwrap();
        let b_norm = eq.rhs().iter().map(|v| v * v).sum::<f64>().sqrt();
        let d = eq.solve(1e11).unwrap();
        let d_norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        // (G + lambda I)^-1 has norm at most 1 / lambda
        assert!(d_norm <= b_norm / 1e11 * (1.0 + 1e-12));
        assert!(d_norm <= 1e-6 * b_norm);
        let dec = Decoder::from_column_vector(&d, inst.lags, inst.rec.channels(), 1e11).unwrap();
        let s_hat = reconstruct(&dec, &inst.rec).unwrap();
        assert!(s_hat.samples().iter().all(|v| v.abs() <= 1e-6));
    }
}

#[test]
fn loo_decoder_matches_exclude_and_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let lags = LagSpec::new(0.0, 7.0, RATE).unwrap();
    let prelims: Vec<Decoder> = (0..20)
        .map(|_| {
            let w = (0..3 * lags.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
            Decoder::new(w, 3, lags, 10.0).unwrap()
        })
        .collect();
    for k in 0..prelims.len() {
        let kept: Vec<&Decoder> = prelims
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, d)| d)
            .collect();
        let brute: Vec<f64> = (0..prelims[0].weights().len())
            .map(|i| {
                let mut acc = 0.0;
                for d in &kept {
                    acc += d.weights()[i];
                }
                acc / kept.len() as f64
            })
            .collect();
        assert_eq!(loo_decoder(&prelims, k).unwrap().weights(), brute.as_slice());
    }
}

#[test]
fn joint_fit_of_duplicated_trial_halves_lambda() {
    let inst = instance(500);
    let corpus = TrainingCorpus::new(vec![(inst.rec.clone(), inst.env.clone()); 2]).unwrap();
    let joint = fit_final_decoder_with(&corpus, inst.lags, 2.0, FinalFit::Joint).unwrap();
    let design = build_lagged_matrix(&inst.rec, inst.lags).unwrap();
    let (single, _) = fit_decoder(&design, &inst.env, 1.0).unwrap();
    for (a, b) in joint.weights().iter().zip(single.weights()) {
        assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
    }
    let average = fit_final_decoder_with(&corpus, inst.lags, 1.0, FinalFit::Average).unwrap();
    assert_eq!(average.weights(), single.weights());
}

#[test]
fn joint_fit_matches_stacked_design() {
    let a = instance(600);
    let mut rng = ChaCha8Rng::seed_from_u64(601);
    let n = a.rec.channels();
    let t2 = 80;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..t2).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let s2: Vec<f64> = (0..t2).map(|_| rng.random_range(0.0..1.0)).collect();
    let rec2 = MultiChannelRecording::from_channels(rows, RATE).unwrap();
    let env2 = Envelope::from_signal(SampledSignal::new(s2.clone(), RATE).unwrap());
    let corpus = TrainingCorpus::new(vec![(a.rec.clone(), a.env.clone()), (rec2.clone(), env2)]).unwrap();
    let joint = fit_final_decoder_with(&corpus, a.lags, a.lambda, FinalFit::Joint).unwrap();

    // lags never reach across trials: stack the per-trial designs
    let r1 = oracle_design(&a.rec, a.lags);
    let r2 = oracle_design(&rec2, a.lags);
    let mut r = DMatrix::zeros(r1.nrows() + r2.nrows(), r1.ncols());
    r.rows_mut(0, r1.nrows()).copy_from(&r1);
    r.rows_mut(r1.nrows(), r2.nrows()).copy_from(&r2);
    let s = DVector::from_iterator(r.nrows(), a.env.samples().iter().chain(&s2).copied());
    let p = r.ncols();
    let oracle = (r.transpose() * &r + DMatrix::identity(p, p) * a.lambda)
        .try_inverse()
        .unwrap()
        * (r.transpose() * s);
    for (x, y) in joint.to_column_vector().iter().zip(oracle.iter()) {
        assert!((x - y).abs() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stronger_regularization_shrinks_weights(seed in 0u64..10_000, i in 0usize..14) {
        let inst = instance(seed);
        let design = build_lagged_matrix(&inst.rec, inst.lags).unwrap();
        let eq = NormalEquations::from_design(&design, &inst.env).unwrap();
        let grid = default_lambda_grid();
        let norm = |lambda: f64| eq.solve(lambda).unwrap().iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(norm(grid[i]) >= norm(grid[i + 1]));
    }

    #[test]
    fn scaling_target_scales_weights(seed in 0u64..10_000, exp in -4i32..4, c in 0.1f64..10.0) {
        let inst = instance(seed);
        let design = build_lagged_matrix(&inst.rec, inst.lags).unwrap();
        let (d, _) = fit_decoder(&design, &inst.env, inst.lambda).unwrap();
        let scaled = |factor: f64| {
            let s: Vec<f64> = inst.env.samples().iter().map(|v| v * factor).collect();
            let env = Envelope::from_signal(SampledSignal::new(s, RATE).unwrap());
            fit_decoder(&design, &env, inst.lambda).unwrap().0
        };
        // powers of two scale every intermediate exactly
        let p2 = 2f64.powi(exp);
        for (a, b) in scaled(p2).weights().iter().zip(d.weights()) {
            prop_assert_eq!(*a, b * p2);
        }
        for (a, b) in scaled(c).weights().iter().zip(d.weights()) {
            prop_assert!((a - b * c).abs() <= 1e-12 * (b * c).abs().max(1e-3));
        }
    }

    #[test]
    fn fitting_is_deterministic(seed in 0u64..10_000) {
        let inst = instance(seed);
        let design = build_lagged_matrix(&inst.rec, inst.lags).unwrap();
        let a = fit_decoder(&design, &inst.env, inst.lambda).unwrap();
        let b = fit_decoder(&design, &inst.env, inst.lambda).unwrap();
        prop_assert_eq!(a.0.weights(), b.0.weights());
    }
}
