//! Scalar special functions used across the crate.

use std::f64::consts::{PI, SQRT_2};

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density. Returns 0 at ±∞.
pub fn norm_pdf(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Upper tail 1 - Φ(x), accurate for large x.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

pub fn bessel_j0(x: f64) -> f64 {
    libm::j0(x)
}

/// k! as a float.
pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Area of the unit sphere S_{d-1} in R^d.
pub fn unit_sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// Riemann zeta for real s in (0, 1), through the alternating eta series
/// with Borwein's acceleration.
pub fn zeta(s: f64) -> f64 {
    let n = 40usize;
    // d_k coefficients of Borwein's algorithm 2
    let mut d = vec![0.0f64; n + 1];
    let mut term = 1.0;
    let mut acc = term;
    d[0] = acc;
    for i in 1..=n {
        term *= 4.0 * ((n + i - 1) as f64) * ((n - i + 1) as f64) / ((2 * i - 1) as f64 * (2 * i) as f64);
        acc += term;
        d[i] = acc;
    }
    let dn = d[n];
    let mut sum = 0.0;
    for k in 0..n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (d[k] - dn) / ((k + 1) as f64).powf(s);
    }
    let eta = -sum / dn;
    eta / (1.0 - 2f64.powf(1.0 - s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_basics() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((norm_pdf(1.0) - 0.241_970_724_519_143_37).abs() < 1e-15);
        assert!((norm_sf(3.0) - 1.349_898_031_630_094_6e-3).abs() < 1e-16);
    }

    #[test]
    fn zeta_half() {
        assert!((zeta(0.5) + 1.460_354_508_809_586_8).abs() < 1e-12);
        assert!((zeta(0.3) + 0.904_559_257_253_984).abs() < 1e-12);
    }

    #[test]
    fn sphere_area() {
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    }
}
