//! Scalar special functions and probability densities underlying the RDT
//! integrals: modified Bessel functions, log-gamma, the chi / noncentral chi
//! family, and the adaptive quadrature they are integrated with.

pub mod bessel;
pub mod chi;
pub mod gamma;
pub mod quad;

pub use bessel::{bessel_i0, bessel_i0e, bessel_i1, bessel_i1e, bessel_ive};
pub use chi::{chi_mean, chi_pdf, noncentral_chi_mean, noncentral_chi_pdf};
pub use gamma::ln_gamma;
pub use quad::{integrate, integrate_semi_infinite, QuadratureConfig};

use crate::error::{Error, Result};

/// The scalar variables that survive after the Gaussian vectors of the
/// random dual are integrated out: a chi magnitude `u`, a noncentral chi
/// magnitude `y`, and the noncentrality bookkeeping
/// (`lambda_d = mu sqrt(d)`, `x_lambda = lambda_d^2 / 2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureVars {
    pub u: f64,
    pub y: f64,
    pub lambda_d: f64,
    pub x_lambda: f64,
    pub mu: f64,
}

impl QuadratureVars {
    /// Build from the per-coordinate Gaussian mean `mu`.
    pub fn from_mu(u: f64, y: f64, mu: f64, d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("QuadratureVars", "rank d must be >= 1"));
        }
        for (name, v) in [("u", u), ("y", y), ("mu", mu)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(
                    "QuadratureVars",
                    format!("{name} = {v} must be finite and nonnegative"),
                ));
            }
        }
        let lambda_d = mu * (d as f64).sqrt();
        Ok(QuadratureVars { u, y, lambda_d, x_lambda: 0.5 * lambda_d * lambda_d, mu })
    }

    /// Build from the noncentrality `lambda_d` directly.
    pub fn from_lambda(u: f64, y: f64, lambda_d: f64, d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("QuadratureVars", "rank d must be >= 1"));
        }
        let mu = lambda_d / (d as f64).sqrt();
        Self::from_mu(u, y, mu, d)
    }
}
