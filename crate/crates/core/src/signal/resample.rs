use std::f64::consts::PI;

use super::SampledSignal;
use crate::error::{Error, Result};

/// Kaiser window shape parameter of the anti-alias filter.
const KAISER_BETA: f64 = 5.0;
/// Filter half-length, in multiples of `max(up, down)` taps.
const HALF_LEN_FACTOR: usize = 10;
const MAX_DENOMINATOR: u64 = 100_000;

/// Reduces `target / source` to a ratio of small integers `(up, down)`.
pub fn rational_ratio(source: f64, target: f64) -> Result<(usize, usize)> {
    for r in [source, target] {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidRate(r));
        }
    }
    let is_int = |v: f64| (v - v.round()).abs() <= 1e-9 * v.max(1.0) && v.round() <= u64::MAX as f64;
    if is_int(source) && is_int(target) {
        let (s, t) = (source.round() as u64, target.round() as u64);
        let g = gcd(s, t);
        return Ok(((t / g) as usize, (s / g) as usize));
    }
    // continued-fraction approximation of target / source
    let x = target / source;
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut rem = x;
    loop {
        let a = rem.floor();
        let a_int = a as u64;
        let h2 = a_int.saturating_mul(h1).saturating_add(h0);
        let k2 = a_int.saturating_mul(k1).saturating_add(k0);
        if k2 > MAX_DENOMINATOR || h2 > MAX_DENOMINATOR {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = rem - a;
        if frac.abs() < 1e-12 || ((h1 as f64 / k1 as f64) - x).abs() <= 1e-12 * x {
            break;
        }
        rem = 1.0 / frac;
    }
    if h1 == 0 || k1 == 0 {
        return Err(Error::InvalidInput(format!(
            "cannot express {target}/{source} as a rational resampling ratio"
        )));
    }
    Ok((h1 as usize, k1 as usize))
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Output length of resampling `len` samples from `source` to `target` Hz.
pub fn resampled_len(len: usize, source: f64, target: f64) -> usize {
    match rational_ratio(source, target) {
        Ok((up, down)) => (len * up).div_ceil(down),
        Err(_) => (len as f64 * target / source).ceil() as usize,
    }
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half = x / 2.0;
    for k in 1..200 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Kaiser-windowed sinc low-pass with cutoff `cutoff` (fraction of
/// Nyquist), unit DC gain, `2 * half_len + 1` taps.
fn lowpass_taps(half_len: usize, cutoff: f64) -> Vec<f64> {
    let n = 2 * half_len + 1;
    let denom = bessel_i0(KAISER_BETA);
    let mut h: Vec<f64> = (0..n)
        .map(|i| {
            let m = i as f64 - half_len as f64;
            let ratio = m / half_len as f64;
            let w = bessel_i0(KAISER_BETA * (1.0 - ratio * ratio).max(0.0).sqrt()) / denom;
            cutoff * sinc(cutoff * m) * w
        })
        .collect();
    let sum: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= sum);
    h
}

/// Rational-ratio polyphase resampling with a Kaiser-windowed anti-alias
/// low-pass at `min(source, target) / 2`, with each polyphase branch scaled
/// to unit DC gain. The filter is centred so the
/// output carries no delay; samples beyond the edges are taken as zero.
pub fn resample(x: &SampledSignal, target_rate: f64) -> Result<SampledSignal> {
    if !(target_rate.is_finite() && target_rate > 0.0) {
        return Err(Error::InvalidRate(target_rate));
    }
    if target_rate == x.rate() {
        return Ok(x.clone());
    }
    let (up, down) = rational_ratio(x.rate(), target_rate)?;
    let max_rate = up.max(down);
    let half_len = HALF_LEN_FACTOR * max_rate;
    let mut taps = lowpass_taps(half_len, 1.0 / max_rate as f64);
    // unit DC gain in every polyphase branch
    for phase in 0..up {
        let sum: f64 = taps.iter().skip(phase).step_by(up).sum();
        taps.iter_mut().skip(phase).step_by(up).for_each(|v| *v /= sum);
    }

    let input = x.samples();
    let n_in = input.len() as i64;
    let n_out = (input.len() * up).div_ceil(down);
    let (up_i, down_i, half_i) = (up as i64, down as i64, half_len as i64);

    let out: Vec<f64> = (0..n_out as i64)
        .map(|m| {
            let centre = m * down_i;
            let lo = (centre - half_i).div_euclid(up_i) + i64::from((centre - half_i).rem_euclid(up_i) != 0);
            let hi = (centre + half_i).div_euclid(up_i);
            let mut acc = 0.0;
            for n in lo.max(0)..=hi.min(n_in - 1) {
                let k = centre - n * up_i + half_i;
                acc += input[n as usize] * taps[k as usize];
            }
            acc
        })
        .collect();
    SampledSignal::new(out, target_rate)
}
