//! Chi and noncentral chi densities and the noncentral chi mean.
//!
//! These are the only distributions the random-dual integrals touch: the
//! magnitude of a d-dimensional standard Gaussian (chi) and the magnitude of
//! a d-dimensional Gaussian with mean mu in every coordinate (noncentral chi
//! with noncentrality `lambda_d = mu * sqrt(d)`).

use crate::error::{Error, Result};

use super::bessel::{bessel_i0e, bessel_i1e, bessel_ive};
use super::gamma::ln_gamma;

/// Below this value of `lambda_d * y` the Bessel quotient
/// `(lambda y)^{-d/2} I_{d/2-1}(lambda y)` is replaced by its analytic
/// limit; the dropped correction is O((lambda y)^2) < 1e-16.
const SMALL_ARG_THRESHOLD: f64 = 1e-8;

/// Kummer-series / large-noncentrality switch for the mean, expressed in
/// `x = lambda^2 / 2`. Keeps the series sum below ~1e262.
const MEAN_SERIES_MAX_X: f64 = 600.0;

fn check_nonneg(v: f64, name: &str, context: &'static str) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::domain(context, format!("{name} = {v} must be finite and nonnegative")));
    }
    Ok(())
}

fn check_rank(d: u32, context: &'static str) -> Result<()> {
    if d == 0 {
        return Err(Error::domain(context, "rank d must be >= 1"));
    }
    Ok(())
}

/// Density of the chi distribution with `d` degrees of freedom:
/// `u^{d-1} e^{-u^2/2} / (2^{d/2-1} Gamma(d/2))`.
pub fn chi_pdf(u: f64, d: u32) -> Result<f64> {
    check_rank(d, "chi_pdf")?;
    check_nonneg(u, "u", "chi_pdf")?;
    Ok(chi_pdf_unchecked(u, d))
}

pub(crate) fn chi_pdf_unchecked(u: f64, d: u32) -> f64 {
    let half_d = 0.5 * d as f64;
    let log_norm = (half_d - 1.0) * std::f64::consts::LN_2
        + ln_gamma(half_d).expect("d/2 > 0");
    if u == 0.0 {
        // u^{d-1} is 1 for d = 1 and 0 otherwise
        return if d == 1 { (-log_norm).exp() } else { 0.0 };
    }
    ((d as f64 - 1.0) * u.ln() - 0.5 * u * u - log_norm).exp()
}

/// Density of the noncentral chi distribution with `d` degrees of freedom
/// and noncentrality `lambda_d`:
/// `e^{-(y^2+lambda^2)/2} y^d lambda (lambda y)^{-d/2} I_{d/2-1}(lambda y)`.
///
/// Continuous at `lambda_d = 0`, where it reduces to [`chi_pdf`].
pub fn noncentral_chi_pdf(y: f64, d: u32, lambda_d: f64) -> Result<f64> {
    check_rank(d, "noncentral_chi_pdf")?;
    check_nonneg(y, "y", "noncentral_chi_pdf")?;
    check_nonneg(lambda_d, "lambda_d", "noncentral_chi_pdf")?;
    Ok(noncentral_chi_pdf_unchecked(y, d, lambda_d))
}

pub(crate) fn noncentral_chi_pdf_unchecked(y: f64, d: u32, lambda_d: f64) -> f64 {
    let z = lambda_d * y;
    if z < SMALL_ARG_THRESHOLD {
        return chi_pdf_unchecked(y, d) * (-0.5 * lambda_d * lambda_d).exp();
    }
    let nu = 0.5 * d as f64 - 1.0;
    // exp(-(y^2+l^2)/2) I_nu(z) = exp(-(y-l)^2/2) * [e^{-z} I_nu(z)]
    let gauss = -0.5 * (y - lambda_d) * (y - lambda_d);
    let ive = bessel_ive(nu, z).expect("z > 0, nu >= -1/2");
    let log_alg = (d as f64) * y.ln() + lambda_d.ln() - 0.5 * (d as f64) * z.ln();
    (gauss + log_alg).exp() * ive
}

/// Mean of the chi distribution with `d` degrees of freedom:
/// `sqrt(2) Gamma((d+1)/2) / Gamma(d/2)`.
pub fn chi_mean(d: u32) -> Result<f64> {
    check_rank(d, "chi_mean")?;
    let df = d as f64;
    let lg = ln_gamma(0.5 * (df + 1.0))? - ln_gamma(0.5 * df)?;
    Ok(std::f64::consts::SQRT_2 * lg.exp())
}

/// Mean of the noncentral chi distribution with `d` degrees of freedom and
/// noncentrality `lambda_d`.
///
/// For `d = 2` this is the Bessel closed form
/// `sqrt(pi/2) ((x+1) I_0(x/2) + x I_1(x/2)) e^{-x/2}` with `x = lambda^2/2`,
/// evaluated through the scaled Bessel functions so it is stable for any
/// noncentrality. Other ranks go through the confluent-hypergeometric series
/// (Kummer-transformed so every term is positive), with a large-`lambda`
/// expansion past the series range.
pub fn noncentral_chi_mean(d: u32, lambda_d: f64) -> Result<f64> {
    check_rank(d, "noncentral_chi_mean")?;
    check_nonneg(lambda_d, "lambda_d", "noncentral_chi_mean")?;
    if d == 2 {
        return Ok(noncentral_chi_mean_d2(lambda_d));
    }
    let x = 0.5 * lambda_d * lambda_d;
    if x <= MEAN_SERIES_MAX_X {
        Ok(mean_kummer_series(d, x))
    } else {
        Ok(mean_large_lambda(d, lambda_d))
    }
}

/// d = 2 closed form through scaled Bessel functions.
pub(crate) fn noncentral_chi_mean_d2(lambda_d: f64) -> f64 {
    let x = 0.5 * lambda_d * lambda_d;
    let half = 0.5 * x;
    let i0e = bessel_i0e(half).expect("half >= 0");
    let i1e = if half > 0.0 { bessel_i1e(half).expect("half > 0") } else { 0.0 };
    (std::f64::consts::PI / 2.0).sqrt() * ((x + 1.0) * i0e + x * i1e)
}

/// `sqrt(2) Gamma((d+1)/2)/Gamma(d/2) * e^{-x} 1F1(d/2 + 1/2; d/2; x)`
/// with `x = lambda^2/2`. The Kummer transform of `1F1(-1/2; d/2; -x)`
/// makes every series term positive.
fn mean_kummer_series(d: u32, x: f64) -> f64 {
    let df = d as f64;
    let central = std::f64::consts::SQRT_2
        * (ln_gamma(0.5 * (df + 1.0)).unwrap() - ln_gamma(0.5 * df).unwrap()).exp();
    if x == 0.0 {
        return central;
    }
    let b = 0.5 * df;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 0..5000 {
        let kf = k as f64;
        term *= x * (b + 0.5 + kf) / ((b + kf) * (kf + 1.0));
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    central * (-x).exp() * sum
}

/// Expansion of the mean in inverse powers of the noncentrality:
/// `lambda (1 + (d-1)/(2 lambda^2) - (d-1)(d-3)/(8 lambda^4) + c3/lambda^6)`.
fn mean_large_lambda(d: u32, lambda: f64) -> f64 {
    let df = d as f64;
    let l2 = lambda * lambda;
    let c1 = 0.5 * (df - 1.0);
    let c2 = -(df - 1.0) * (df - 3.0) / 8.0;
    let c3 = ((df + 4.0) * (df * df - 13.0 * df + 75.0) - 315.0) / 16.0;
    lambda * (1.0 + c1 / l2 + c2 / (l2 * l2) + c3 / (l2 * l2 * l2))
}
