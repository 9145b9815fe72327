use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::MultiChannelRecording;

/// Range of time lags integrated by a decoder, `[tau_min, tau_max]`.
///
/// Lags are given in milliseconds and converted to whole samples at the
/// working rate (rounded to nearest). A lag `tau` pairs the stimulus at
/// time `t` with the response at time `t + tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagSpec {
    pub tau_min_ms: f64,
    pub tau_max_ms: f64,
    pub rate: f64,
}

impl LagSpec {
    pub fn new(tau_min_ms: f64, tau_max_ms: f64, rate: f64) -> Result<Self> {
        let spec = Self {
            tau_min_ms,
            tau_max_ms,
            rate,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// 0 to 250 ms at 128 Hz: 33 lags.
    pub fn default_window() -> Self {
        Self {
            tau_min_ms: 0.0,
            tau_max_ms: 250.0,
            rate: crate::signal::WORKING_RATE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::InvalidRate(self.rate));
        }
        if !(self.tau_min_ms.is_finite() && self.tau_max_ms.is_finite()) {
            return Err(Error::InvalidConfig("lag bounds must be finite".into()));
        }
        if self.tau_min() > self.tau_max() {
            return Err(Error::InvalidConfig(format!(
                "tau_min ({} ms) exceeds tau_max ({} ms)",
                self.tau_min_ms, self.tau_max_ms
            )));
        }
        Ok(())
    }

    fn to_samples(self, ms: f64) -> i64 {
        (ms * self.rate / 1000.0).round() as i64
    }

    pub fn tau_min(&self) -> i64 {
        self.to_samples(self.tau_min_ms)
    }

    pub fn tau_max(&self) -> i64 {
        self.to_samples(self.tau_max_ms)
    }

    /// Number of lags `L = tau_max - tau_min + 1`.
    pub fn len(&self) -> usize {
        (self.tau_max() - self.tau_min() + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lag of row `j` of the decoder, in samples.
    pub fn lag(&self, j: usize) -> i64 {
        self.tau_min() + j as i64
    }
}

/// Time samples `t` for which `t + lag` stays inside `[0, len)`.
pub(crate) fn valid_range(len: usize, lag: i64) -> std::ops::Range<usize> {
    let n = len as i64;
    let start = (-lag).clamp(0, n);
    let end = (n - lag).clamp(0, n);
    start as usize..end.max(start) as usize
}

/// `T x (N * L)` design matrix. Column `c * L + j` holds channel `c`
/// shifted by lag `tau_min + j`, zero where the shifted index falls outside
/// the recording.
#[derive(Debug, Clone)]
pub struct LaggedDesignMatrix {
    values: Mat<f64>,
    lags: LagSpec,
    channels: usize,
}

impl LaggedDesignMatrix {
    pub fn values(&self) -> &Mat<f64> {
        &self.values
    }

    pub fn lags(&self) -> LagSpec {
        self.lags
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Number of time samples `T`.
    pub fn samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn columns(&self) -> usize {
        self.values.ncols()
    }

    pub fn get(&self, t: usize, column: usize) -> f64 {
        self.values[(t, column)]
    }

    /// `R * v` for a column-ordered weight vector, accumulated column by
    /// column in the same order as [`reconstruct`](super::reconstruct).
    pub fn multiply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.columns() {
            return Err(Error::DimensionMismatch(format!(
                "weight vector has {} entries, design matrix {} columns",
                v.len(),
                self.columns()
            )));
        }
        let mut out = vec![0.0; self.samples()];
        for (col, &w) in v.iter().enumerate() {
            let column = self.values.col(col);
            for (t, acc) in out.iter_mut().enumerate() {
                *acc += column[t] * w;
            }
        }
        Ok(out)
    }
}

/// Builds the lagged design matrix of a recording.
pub fn build_lagged_matrix(rec: &MultiChannelRecording, lags: LagSpec) -> Result<LaggedDesignMatrix> {
    lags.validate()?;
    if rec.rate() != lags.rate {
        return Err(Error::DimensionMismatch(format!(
            "recording at {} Hz, lag window defined at {} Hz",
            rec.rate(),
            lags.rate
        )));
    }
    let t_len = rec.len();
    let l = lags.len();
    if t_len < l {
        return Err(Error::InsufficientData {
            trial: None,
            available: t_len,
            required: l,
        });
    }
    let n = rec.channels();
    let mut values = Mat::<f64>::zeros(t_len, n * l);
    for (c, channel) in rec.channel_iter().enumerate() {
        for j in 0..l {
            let lag = lags.lag(j);
            let mut column = values.col_mut(c * l + j);
            for t in valid_range(t_len, lag) {
                column[t] = channel[(t as i64 + lag) as usize];
            }
        }
    }
    Ok(LaggedDesignMatrix {
        values,
        lags,
        channels: n,
    })
}
