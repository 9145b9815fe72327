use std::f64::consts::PI;

use super::{BandSpec, SampledSignal};
use crate::error::Result;

/// Order of each band edge (high-pass and low-pass halves).
const EDGE_ORDER: usize = 4;
/// Padding length in time constants of the slowest pole.
const SETTLE_TIME_CONSTANTS: f64 = 7.0;

/// Second-order section in transposed direct form II, normalized so a0 = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn from_unnormalized(b: [f64; 3], a: [f64; 3]) -> Self {
        let inv = 1.0 / a[0];
        Self {
            b: [b[0] * inv, b[1] * inv, b[2] * inv],
            a: [a[1] * inv, a[2] * inv],
        }
    }

    fn lowpass(cutoff_hz: f64, rate: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * cutoff_hz / rate;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        // 1 - cos(w0) without cancellation at small w0
        let one_minus_cos = 2.0 * (w0 / 2.0).sin().powi(2);
        Self::from_unnormalized(
            [one_minus_cos / 2.0, one_minus_cos, one_minus_cos / 2.0],
            [1.0 + alpha, -2.0 * cos, 1.0 - alpha],
        )
    }

    fn highpass(cutoff_hz: f64, rate: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * cutoff_hz / rate;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let one_plus_cos = 1.0 + cos;
        Self::from_unnormalized(
            [one_plus_cos / 2.0, -one_plus_cos, one_plus_cos / 2.0],
            [1.0 + alpha, -2.0 * cos, 1.0 - alpha],
        )
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// State that makes a constant unit input produce a constant output.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let s2 = self.b[2] - self.a[1] * g;
        let s1 = self.b[1] - self.a[0] * g + s2;
        [s1, s2]
    }

    fn run(&self, x: &mut [f64], mut state: [f64; 2]) {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        for v in x.iter_mut() {
            let input = *v;
            let y = b0 * input + state[0];
            state[0] = b1 * input - a1 * y + state[1];
            state[1] = b2 * input - a2 * y;
            *v = y;
        }
    }

    /// Complex frequency response at `f_hz`.
    pub fn response(&self, f_hz: f64, rate: f64) -> (f64, f64) {
        let w = 2.0 * PI * f_hz / rate;
        let z1 = (w.cos(), -w.sin());
        let z2 = ((2.0 * w).cos(), -(2.0 * w).sin());
        let num = (
            self.b[0] + self.b[1] * z1.0 + self.b[2] * z2.0,
            self.b[1] * z1.1 + self.b[2] * z2.1,
        );
        let den = (
            1.0 + self.a[0] * z1.0 + self.a[1] * z2.0,
            self.a[0] * z1.1 + self.a[1] * z2.1,
        );
        let d2 = den.0 * den.0 + den.1 * den.1;
        (
            (num.0 * den.0 + num.1 * den.1) / d2,
            (num.1 * den.0 - num.0 * den.1) / d2,
        )
    }
}

/// Butterworth band-pass: a 4th-order high-pass at the lower edge cascaded
/// with a 4th-order low-pass at the upper edge, as second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterworthBandpass {
    sections: Vec<Biquad>,
    /// Edge padding long enough for the slowest pole to settle.
    settle_len: usize,
}

impl ButterworthBandpass {
    pub fn design(band: BandSpec, rate: f64) -> Result<Self> {
        band.validate(rate)?;
        let mut sections = Vec::with_capacity(EDGE_ORDER);
        for k in 0..EDGE_ORDER / 2 {
            let q = butterworth_q(EDGE_ORDER, k);
            sections.push(Biquad::highpass(band.low_hz, rate, q));
        }
        for k in 0..EDGE_ORDER / 2 {
            let q = butterworth_q(EDGE_ORDER, k);
            sections.push(Biquad::lowpass(band.high_hz, rate, q));
        }
        // envelope decay per sample of the highest-Q high-pass pole pair
        let decay = 2.0 * PI * band.low_hz / rate / (2.0 * butterworth_q(EDGE_ORDER, 0));
        let settle_len = (SETTLE_TIME_CONSTANTS / decay).ceil() as usize;
        Ok(Self { sections, settle_len })
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Total filter order.
    pub fn order(&self) -> usize {
        2 * self.sections.len()
    }

    /// Single-pass magnitude response at `f_hz`.
    pub fn magnitude(&self, f_hz: f64, rate: f64) -> f64 {
        self.sections
            .iter()
            .map(|s| {
                let (re, im) = s.response(f_hz, rate);
                re.hypot(im)
            })
            .product()
    }

    fn filter_with_steady_start(&self, x: &mut [f64]) {
        let x0 = x[0];
        let mut level = x0;
        for s in &self.sections {
            let zi = s.step_state();
            s.run(x, [zi[0] * level, zi[1] * level]);
            level *= s.dc_gain();
        }
    }

    /// Forward-backward filtering with odd reflective padding at both ends
    /// and steady-state initial conditions. The padding is at least three
    /// times the filter order and, where the signal allows, long enough for
    /// the start-up transient of the high-pass poles to die out.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = (3 * (self.order() + 1)).max(self.settle_len).min(n - 1);

        let mut ext = Vec::with_capacity(n + 2 * pad);
        let (first, last) = (x[0], x[n - 1]);
        ext.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * last - x[n - 1 - i]));

        self.filter_with_steady_start(&mut ext);
        ext.reverse();
        self.filter_with_steady_start(&mut ext);
        ext.reverse();

        ext.drain(..pad);
        ext.truncate(n);
        ext
    }
}

/// Q of the k-th pole pair of an order-`n` Butterworth prototype.
fn butterworth_q(n: usize, k: usize) -> f64 {
    let theta = PI * (2 * k + 1) as f64 / (2 * n) as f64;
    1.0 / (2.0 * theta.sin())
}

/// Zero-phase band-pass of `x`.
pub fn bandpass_zero_phase(x: &SampledSignal, band: BandSpec) -> Result<SampledSignal> {
    let filter = ButterworthBandpass::design(band, x.rate())?;
    SampledSignal::new(filter.filtfilt(x.samples()), x.rate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn tone(f: f64, rate: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * f * i as f64 / rate).sin()).collect()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn butterworth_qs() {
        assert!((butterworth_q(4, 0) - 1.306_562_964_876_376_6).abs() < 1e-12);
        assert!((butterworth_q(4, 1) - 0.541_196_100_146_197).abs() < 1e-12);
    }

    #[test]
    fn dc_is_rejected() {
        let x = SampledSignal::new(vec![1.0; 20_000], 1000.0).unwrap();
        let y = bandpass_zero_phase(&x, BandSpec::new(0.3, 30.0)).unwrap();
        let worst = y.samples()[1000..19_000].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst <= 0.01, "{worst}");
    }

    #[test]
    fn passband_tone_keeps_amplitude_and_phase() {
        let rate = 1000.0;
        let x = tone(5.0, rate, 20_000);
        let y = bandpass_zero_phase(&SampledSignal::new(x.clone(), rate).unwrap(), BandSpec::new(0.3, 30.0)).unwrap();
        let interior = 2000..18_000;
        let ratio = rms(&y.samples()[interior.clone()]) / rms(&x[interior.clone()]);
        assert!((ratio - 1.0).abs() <= 0.05, "{ratio}");

        let lag = |k: isize| -> f64 {
            interior
                .clone()
                .map(|i| x[i] * y.samples()[(i as isize + k) as usize])
                .sum()
        };
        let best = (-50..=50)
            .max_by(|a, b| lag(*a).partial_cmp(&lag(*b)).unwrap())
            .unwrap();
        assert_eq!(best, 0);
    }

    #[test]
    fn stopband_tone_is_attenuated() {
        let rate = 1000.0;
        let x = tone(50.0, rate, 20_000);
        let y = bandpass_zero_phase(&SampledSignal::new(x.clone(), rate).unwrap(), BandSpec::new(0.3, 30.0)).unwrap();
        let db = 20.0 * (rms(&y.samples()[2000..18_000]) / rms(&x[2000..18_000])).log10();
        assert!(db <= -30.0, "{db} dB");
    }

    #[test]
    fn magnitude_response_is_butterworth_like() {
        let f = ButterworthBandpass::design(BandSpec::new(0.3, 30.0), 1000.0).unwrap();
        assert_eq!(f.order(), 8);
        assert!((f.magnitude(5.0, 1000.0) - 1.0).abs() < 0.01);
        // half-power at both edges
        assert!((f.magnitude(30.0, 1000.0) - 0.5f64.sqrt()).abs() < 0.01);
        assert!((f.magnitude(0.3, 1000.0) - 0.5f64.sqrt()).abs() < 0.01);
    }

    #[test]
    fn nyquist_violation() {
        let x = SampledSignal::new(vec![0.0; 100], 50.0).unwrap();
        assert!(matches!(
            bandpass_zero_phase(&x, BandSpec::new(0.3, 30.0)),
            Err(Error::InvalidBand { .. })
        ));
    }

    #[test]
    fn short_input_is_handled() {
        let x = SampledSignal::new(vec![1.0, 2.0, 0.5], 1000.0).unwrap();
        assert_eq!(bandpass_zero_phase(&x, BandSpec::new(0.3, 30.0)).unwrap().len(), 3);
    }
}
