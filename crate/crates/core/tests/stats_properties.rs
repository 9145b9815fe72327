use aad_core::stats::{anova_oneway, f_upper_tail, inc_beta, pairwise_bonferroni, t_two_sided};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

#[test]
fn incomplete_beta_matches_monte_carlo() {
    let spots = [
        (0.3, 2.0, 5.0),
        (0.5, 0.5, 0.5),
        (0.8, 7.0, 1.5),
        (0.15, 1.0, 12.0),
        (0.6, 3.0, 3.0),
    ];
    let n = 1_000_000;
    for (i, &(x, a, b)) in spots.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let dist = Beta::new(a, b).unwrap();
        let hits = (0..n).filter(|_| dist.sample(&mut rng) <= x).count();
        let p_hat = hits as f64 / n as f64;
        let exact = inc_beta(x, a, b);
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!(
            (p_hat - exact).abs() <= 3.0 * se,
            "I_{x}({a},{b}) = {exact}, MC {p_hat}"
        );
    }
}

#[test]
fn unequal_pair_matches_t_oracle() {
    // means 2 and 6, pooled variance 1, n = 3 each: t = -4 / sqrt(2/3), df = 4
    let groups = vec![vec![1.0, 2.0, 3.0], vec![5.0, 6.0, 7.0], vec![3.0, 4.0, 5.0]];
    let pairs = pairwise_bonferroni(&groups).unwrap();
    let t = -4.0 / (2.0f64 / 3.0).sqrt();
    assert!((pairs[0].t_stat - t).abs() < 1e-12);
    // for df = 4: P(|T| > t) = 1 - (3/2) u + (1/2) u^3 with u = t / sqrt(t^2 + 4)
    let u = t.abs() / (t * t + 4.0).sqrt();
    let oracle = 1.0 - 1.5 * u + 0.5 * u.powi(3);
    assert!((pairs[0].p_raw - oracle).abs() < 1e-6);
    assert_eq!(pairs[0].p_adjusted, (3.0 * pairs[0].p_raw).min(1.0));
}

fn groups_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(proptest::collection::vec(-50.0f64..50.0, 2..12), 2..5)
        .prop_filter("non-degenerate", |g| anova_oneway(g).is_ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_data_leaves_tests_unchanged(groups in groups_strategy(), c in 0.01f64..100.0) {
        let scaled: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().map(|v| v * c).collect()).collect();
        let (a, b) = (anova_oneway(&groups).unwrap(), anova_oneway(&scaled).unwrap());
        prop_assert!((a.f_stat - b.f_stat).abs() <= 1e-12 * a.f_stat.max(1.0));
        prop_assert!((a.p_value - b.p_value).abs() <= 1e-12);
        for (x, y) in pairwise_bonferroni(&groups).unwrap().iter().zip(pairwise_bonferroni(&scaled).unwrap()) {
            prop_assert!((x.t_stat - y.t_stat).abs() <= 1e-12 * x.t_stat.abs().max(1.0));
            prop_assert!((x.p_raw - y.p_raw).abs() <= 1e-12);
            prop_assert!((x.p_adjusted - y.p_adjusted).abs() <= 1e-12);
        }
    }

    #[test]
    fn two_groups_give_f_equal_t_squared(a in proptest::collection::vec(-5.0f64..5.0, 2..20),
                                         b in proptest::collection::vec(-5.0f64..5.0, 2..20)) {
        let groups = vec![a, b];
        prop_assume!(anova_oneway(&groups).is_ok());
        let f = anova_oneway(&groups).unwrap();
        let t = pairwise_bonferroni(&groups).unwrap()[0];
        prop_assert!((f.f_stat - t.t_stat * t.t_stat).abs() <= 1e-10 * f.f_stat.max(1.0));
        prop_assert!((f.p_value - t.p_raw).abs() <= 1e-10);
    }

    #[test]
    fn p_values_are_probabilities(groups in groups_strategy()) {
        let r = anova_oneway(&groups).unwrap();
        prop_assert!(r.f_stat >= 0.0 && (0.0..=1.0).contains(&r.p_value));
        prop_assert_eq!(r.df_between, groups.len() - 1);
        let pairs = pairwise_bonferroni(&groups).unwrap();
        prop_assert_eq!(pairs.len(), groups.len() * (groups.len() - 1) / 2);
        for p in pairs {
            prop_assert!(p.p_raw <= p.p_adjusted && p.p_adjusted <= 1.0);
        }
    }

    #[test]
    fn tails_are_monotone(x in 0.0f64..30.0, dx in 0.01f64..5.0, df in 1.0f64..200.0) {
        prop_assert!(f_upper_tail(x + dx, 2.0, df) <= f_upper_tail(x, 2.0, df));
        prop_assert!(t_two_sided(x + dx, df) <= t_two_sided(x, df));
    }
}
