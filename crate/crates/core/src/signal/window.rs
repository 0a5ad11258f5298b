//! Analysis windows.

use std::f64::consts::PI;

/// Periodic Hann window, `w[n] = 0.5 - 0.5 cos(2 pi n / length)`.
pub fn hann_window(length: usize) -> Vec<f64> {
    (0..length)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / length as f64).cos())
        .collect()
}

/// Zeroth-order modified Bessel function of the first kind, summed from its
/// power series until the next term is below `1e-12` of the running total.
pub fn bessel_i0(x: f64) -> f64 {
    let half_sq = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= half_sq / (k * k);
        sum += term;
        if term <= 1e-12 * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// Symmetric Kaiser window of `length` points with shape parameter `beta`.
pub fn kaiser_window(length: usize, beta: f64) -> Vec<f64> {
    if length == 1 {
        return vec![1.0];
    }
    let denom = bessel_i0(beta);
    let span = (length - 1) as f64;
    (0..length)
        .map(|n| {
            let r = 2.0 * n as f64 / span - 1.0;
            bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / denom
        })
        .collect()
}

/// Continuous Kaiser taper on `[-1, 1]`, zero outside.
pub(crate) fn kaiser_taper(u: f64, beta: f64, i0_beta: f64) -> f64 {
    if u.abs() > 1.0 {
        0.0
    } else {
        bessel_i0(beta * (1.0 - u * u).sqrt()) / i0_beta
    }
}
