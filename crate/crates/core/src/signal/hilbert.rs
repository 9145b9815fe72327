use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::SampledSignal;
use crate::error::{Error, Result};

/// Magnitude of the analytic signal.
///
/// The analytic signal is built in the frequency domain: the spectrum is
/// kept at DC (and Nyquist for even lengths), doubled at positive
/// frequencies and zeroed at negative ones before the inverse transform.
pub fn analytic_envelope(x: &SampledSignal) -> Result<SampledSignal> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidInput("analytic envelope needs at least 2 samples".into()));
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    let mut buf: Vec<Complex64> = x.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward.process(&mut buf);

    let half = n / 2;
    for (k, bin) in buf.iter_mut().enumerate() {
        let gain = if k == 0 || (n.is_multiple_of(2) && k == half) {
            1.0
        } else if k <= (n - 1) / 2 {
            2.0
        } else {
            0.0
        };
        *bin *= gain;
    }
    inverse.process(&mut buf);

    let scale = 1.0 / n as f64;
    let env = buf.iter().map(|c| c.norm() * scale).collect();
    SampledSignal::new(env, x.rate())
}
