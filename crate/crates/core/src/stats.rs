//! Special-function and order-statistic helpers.

use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// Solve `Q(shape, x) = p` for `x`, where `Q` is the upper regularized
/// incomplete gamma function.
pub fn inverse_gamma_ur(shape: f64, p: f64) -> Result<f64> {
    if !(shape > 0.0) {
        return Err(Error::domain(format!("gamma shape must be positive, got {shape}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("tail probability must lie in (0, 1), got {p}")));
    }
    let mut lo = 0.0_f64;
    let mut hi = shape.max(1.0);
    while gamma_ur(shape, hi) > p {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Internal("inverse gamma bracket diverged".into()));
        }
    }
    // Q is strictly decreasing in x: safeguarded Newton inside the bracket.
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let q = gamma_ur(shape, x);
        let f = q - p;
        if f > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        // dQ/dx = -x^{a-1} e^{-x} / Gamma(a)
        let log_pdf = (shape - 1.0) * x.ln() - x - ln_gamma(shape);
        let slope = -log_pdf.exp();
        let mut next = if slope != 0.0 && slope.is_finite() {
            x - f / slope
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Linear-interpolated sample quantile (Hyndman-Fan type 7). Sorts in place.
pub fn quantile(samples: &mut [f64], q: f64) -> Option<f64> {
    if samples.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    samples.sort_by(f64::total_cmp);
    let pos = q * (samples.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    let lo = samples[i];
    let hi = samples[(i + 1).min(samples.len() - 1)];
    Some(lo + frac * (hi - lo))
}

pub fn median(samples: &[f64]) -> Option<f64> {
    let mut v = samples.to_vec();
    quantile(&mut v, 0.5)
}

/// Normal-approximation two-sided binomial confidence interval for a rate `p` over `n` trials.
pub fn binomial_ci(p: f64, n: usize, z: f64) -> (f64, f64) {
    let sd = (p * (1.0 - p) / n as f64).sqrt();
    (p - z * sd, p + z * sd)
}
