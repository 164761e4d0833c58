//! Natural log of the Gamma function via the Lanczos approximation
//! (g = 7, 9 coefficients), with the reflection formula below 1/2.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;

const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6E-6,
    1.505_632_735_149_311_6E-7,
];

/// `ln Gamma(t)` for `t > 0`, relative accuracy around 1e-13 or better.
pub fn ln_gamma(t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::domain("ln_gamma", format!("argument {t} must be finite and positive")));
    }
    Ok(ln_gamma_pos(t))
}

fn ln_gamma_pos(t: f64) -> f64 {
    if t < 0.5 {
        // reflection: Gamma(t) Gamma(1-t) = pi / sin(pi t)
        let pi = std::f64::consts::PI;
        return (pi / (pi * t).sin()).ln() - ln_gamma_pos(1.0 - t);
    }
    let z = t - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let base = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * base.ln() - base + acc.ln()
}
