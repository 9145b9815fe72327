//! One-way ANOVA and Bonferroni-adjusted pairwise t tests.

mod special;

pub use special::{f_upper_tail, inc_beta, ln_gamma, t_two_sided};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f_stat: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p_value: f64,
}

impl AnovaResult {
    /// `F(2,2547)=18.22, p<0.01` style summary line.
    pub fn report(&self) -> String {
        let p = if self.p_value < 0.01 {
            "p<0.01".to_string()
        } else {
            format!("p={:.2}", self.p_value)
        };
        format!("F({},{})={:.2}, {p}", self.df_between, self.df_within, self.f_stat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseResult {
    pub group_a: usize,
    pub group_b: usize,
    pub t_stat: f64,
    pub df: usize,
    pub p_raw: f64,
    pub p_adjusted: f64,
}

/// Variance estimate used by the pairwise t tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairwiseVariance {
    /// Pooled variance of the two groups being compared.
    #[default]
    PooledPair,
    /// Within-group mean square of the full ANOVA.
    AnovaMsw,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sum_sq_dev(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum()
}

fn check_groups(groups: &[Vec<f64>]) -> Result<()> {
    if groups.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 groups, got {}",
            groups.len()
        )));
    }
    for (i, g) in groups.iter().enumerate() {
        if g.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "group {i} has {} values, need at least 2",
                g.len()
            )));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("group {i} contains non-finite values")));
        }
    }
    Ok(())
}

/// Within-group sum of squares and degrees of freedom.
fn within(groups: &[Vec<f64>]) -> (f64, usize) {
    let ssw = groups.iter().map(|g| sum_sq_dev(g)).sum();
    let n: usize = groups.iter().map(Vec::len).sum();
    (ssw, n - groups.len())
}

pub fn anova_oneway(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    check_groups(groups)?;
    let n_total: usize = groups.iter().map(Vec::len).sum();
    let grand = groups.iter().flatten().sum::<f64>() / n_total as f64;
    let ssb: f64 = groups.iter().map(|g| g.len() as f64 * (mean(g) - grand).powi(2)).sum();
    let (ssw, df_within) = within(groups);
    if ssw == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let df_between = groups.len() - 1;
    let f_stat = (ssb / df_between as f64) / (ssw / df_within as f64);
    Ok(AnovaResult {
        f_stat,
        df_between,
        df_within,
        p_value: f_upper_tail(f_stat, df_between as f64, df_within as f64),
    })
}

/// All `g(g-1)/2` two-sample t tests, with p values multiplied by the
/// number of comparisons and capped at 1.
pub fn pairwise_bonferroni(groups: &[Vec<f64>]) -> Result<Vec<PairwiseResult>> {
    pairwise_bonferroni_with(groups, PairwiseVariance::PooledPair)
}

pub fn pairwise_bonferroni_with(groups: &[Vec<f64>], variance: PairwiseVariance) -> Result<Vec<PairwiseResult>> {
    check_groups(groups)?;
    let g = groups.len();
    let m = (g * (g - 1) / 2) as f64;
    let (ssw, df_w) = within(groups);
    let mut out = Vec::with_capacity(g * (g - 1) / 2);
    for a in 0..g {
        for b in a + 1..g {
            let (x, y) = (&groups[a], &groups[b]);
            let (s2, df) = match variance {
                PairwiseVariance::PooledPair => {
                    let df = x.len() + y.len() - 2;
                    ((sum_sq_dev(x) + sum_sq_dev(y)) / df as f64, df)
                }
                PairwiseVariance::AnovaMsw => (ssw / df_w as f64, df_w),
            };
            if s2 == 0.0 {
                return Err(Error::DegenerateVariance);
            }
            let se = (s2 * (1.0 / x.len() as f64 + 1.0 / y.len() as f64)).sqrt();
            let t_stat = (mean(x) - mean(y)) / se;
            let p_raw = t_two_sided(t_stat, df as f64);
            out.push(PairwiseResult {
                group_a: a,
                group_b: b,
                t_stat,
                df,
                p_raw,
                p_adjusted: (m * p_raw).min(1.0),
            });
        }
    }
    Ok(out)
}
