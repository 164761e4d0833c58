//! Partially lifted random-dual lower bound.
//!
//! Instead of the plain bound's bare expectation, the lifted bound passes
//! the random dual through an exponential smoothing with inverse
//! temperature `c3` and optimizes three auxiliary scalars:
//!
//! ```text
//! phi0_lift = max_{c3, r_y} min_{gamma} [ c3/2 r^2 r_y^2 + gamma
//!             - alpha_eff/c3 * ln f_lift(c3 gamma_x)
//!             - r r_y gamma_hat + 1/(2 c3) ln(1 - c3 r r_y / (2 gamma_hat)) ]
//! ```
//!
//! where `gamma_x = r_bar/(1+r_bar)`, `r_bar = r_y^2/(4 gamma)`, `gamma_hat`
//! closes the spherical max in closed form, and
//! `f_lift(beta) = E exp(-beta (u - r y)^2)` is a double integral against
//! the chi / noncentral-chi pair. As `c3 -> 0` the whole expression
//! collapses to the plain bound's functional, which pins the `alpha_eff`
//! scaling to `alpha / d`.
//!
//! The nested max-min is evaluated in the printed order on log-spaced grids
//! with local refinement; `f_lift` is tabulated once per query on a dense
//! `ln beta` grid (cubic spline, series expansion below `beta = 1e-3`),
//! which makes the grid search essentially free.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plain::{phi0_plain, CurvePoint, RdtQuery};
use crate::specfun::chi::{chi_pdf_unchecked, noncentral_chi_pdf_unchecked};
use crate::specfun::quad::{integrate, integrate_with_breaks, QuadratureConfig};

/// How the sample-complexity ratio enters the lifted objective. The rank-d
/// measurement counting gives `alpha / d` (the plain bound's scaling, and
/// the one under which the `c3 -> 0` limit reproduces the plain bound
/// exactly); `AsPrinted` keeps the bare `alpha` for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum AlphaScaling {
    #[default]
    PerDn,
    AsPrinted,
}

impl AlphaScaling {
    fn effective(&self, alpha: f64, d: u32) -> f64 {
        match self {
            AlphaScaling::PerDn => alpha / d as f64,
            AlphaScaling::AsPrinted => alpha,
        }
    }
}

/// The scalar optimization state of the lifted search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftedSearchPoint {
    pub c3: f64,
    pub r_y: f64,
    pub gamma: f64,
    /// Derived: `r_y^2 / (4 gamma)`.
    pub r_y_bar: f64,
    /// Derived: `r_y_bar / (1 + r_y_bar)`, always in (0, 1).
    pub gamma_x: f64,
    /// Derived: the closed-form spherical maximizer for the query's `r`.
    pub gamma_hat_sph: f64,
}

impl LiftedSearchPoint {
    pub fn new(c3: f64, r_y: f64, gamma: f64, r: f64) -> Result<Self> {
        for (name, v) in [("c3", c3), ("r_y", r_y), ("gamma", gamma)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(
                    "LiftedSearchPoint",
                    format!("{name} = {v} must be finite and positive"),
                ));
            }
        }
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::domain("LiftedSearchPoint", format!("r = {r} must be nonnegative")));
        }
        let r_y_bar = r_y * r_y / (4.0 * gamma);
        Ok(LiftedSearchPoint {
            c3,
            r_y,
            gamma,
            r_y_bar,
            gamma_x: r_y_bar / (1.0 + r_y_bar),
            gamma_hat_sph: gamma_hat_sph(c3, r, r_y),
        })
    }
}

/// Log-spaced grids and refinement policy for the nested scalar search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftedSearchConfig {
    pub c3_grid: Vec<f64>,
    pub r_y_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub refine_rounds: usize,
    pub refine_shrink: f64,
}

impl Default for LiftedSearchConfig {
    fn default() -> Self {
        LiftedSearchConfig {
            c3_grid: log_grid(1e-3, 1e3, 24),
            r_y_grid: log_grid(1e-3, 1e3, 24),
            gamma_grid: log_grid(1e-3, 1e3, 24),
            refine_rounds: 3,
            refine_shrink: 0.5,
        }
    }
}

impl LiftedSearchConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, grid) in
            [("c3", &self.c3_grid), ("r_y", &self.r_y_grid), ("gamma", &self.gamma_grid)]
        {
            if grid.is_empty() {
                return Err(Error::precondition("LiftedSearchConfig", format!("{name} grid empty")));
            }
            if grid.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
                return Err(Error::precondition(
                    "LiftedSearchConfig",
                    format!("{name} grid must be positive"),
                ));
            }
        }
        if !(self.refine_shrink > 0.1 && self.refine_shrink < 0.9) {
            return Err(Error::precondition(
                "LiftedSearchConfig",
                format!("refine_shrink = {} outside (0.1, 0.9)", self.refine_shrink),
            ));
        }
        Ok(())
    }
}

/// `count` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let step = (ln_hi - ln_lo) / (count - 1) as f64;
    (0..count).map(|i| (ln_lo + i as f64 * step).exp()).collect()
}

/// Closed-form maximizer of the spherical term:
/// `(c3 r r_y + sqrt(c3^2 r^2 r_y^2 + 4)) / 4`.
///
/// Always exceeds `c3 r r_y / 2`, so the log argument
/// `1 - c3 r r_y / (2 gamma_hat)` stays in (0, 1].
pub fn gamma_hat_sph(c3: f64, r: f64, r_y: f64) -> f64 {
    let a = c3 * r * r_y;
    0.25 * (a + (a * a + 4.0).sqrt())
}

/// `E exp(-c3 gamma_x (u - r y)^2)` with `u ~ chi(d)` and, conditioned on
/// `u`, `y ~ noncentral chi(d, u x / r)`. Always in (0, 1].
///
/// On the `r = 0` boundary the inner magnitude collapses to `x u` and a
/// single integral in `u` remains.
pub fn f_q_lift(query: &RdtQuery, c3: f64, gamma_x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(c3.is_finite() && c3 > 0.0) {
        return Err(Error::domain("f_q_lift", format!("c3 = {c3} must be positive")));
    }
    if !(gamma_x > 0.0 && gamma_x < 1.0) {
        return Err(Error::domain("f_q_lift", format!("gamma_x = {gamma_x} must be in (0, 1)")));
    }
    laplace_transform(query, c3 * gamma_x, cfg)
}

/// `E exp(-beta S^2)` where `S = u - r y` is the magnitude mismatch.
fn laplace_transform(query: &RdtQuery, beta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    nested_expectation(query, cfg, move |s| (-beta * s * s).exp(), Some(beta))
}

/// `E g(u - r y)` via iterated adaptive quadrature: outer over the chi
/// variable `u`, inner over the noncentral chi variable `y` whose
/// noncentrality `u x / r` moves with `u`. `beta_hint` locates the narrow
/// exponential spike (if any) so the inner partition covers it.
fn nested_expectation<G>(
    query: &RdtQuery,
    cfg: &QuadratureConfig,
    g: G,
    beta_hint: Option<f64>,
) -> Result<f64>
where
    G: Fn(f64) -> f64 + Sync,
{
    cfg.validate()?;
    let d = query.d;
    let r = query.r;
    if r == 0.0 {
        let x = query.x;
        return integrate(
            |u| g((1.0 - x) * u) * chi_pdf_unchecked(u, d),
            0.0,
            cfg.truncation_radius,
            cfg,
        );
    }
    let ratio = query.x / r;
    let inner_cfg = QuadratureConfig {
        abs_tol: 0.1 * cfg.abs_tol,
        rel_tol: cfg.rel_tol,
        ..*cfg
    };
    let outer = integrate(
        |u| {
            let lambda = u * ratio;
            // the noncentral density lives within 12 sigma of lambda; the
            // exponential factor (when present) adds a spike of width
            // 1/(r sqrt(beta)) at y = u/r that must sit on a segment seam
            let lo = (lambda - 12.0).max(0.0);
            let hi = lambda + 12.0;
            let mut breaks = [f64::NAN; 3];
            if let Some(beta) = beta_hint {
                if beta > 0.0 {
                    let spike = u / r;
                    let width = 15.0 / (r * beta.sqrt());
                    breaks = [spike - width, spike, spike + width];
                }
            }
            let inner = integrate_with_breaks(
                |y| g(u - r * y) * noncentral_chi_pdf_unchecked(y, d, lambda),
                lo,
                hi,
                &breaks,
                &inner_cfg,
            )
            .unwrap_or(f64::NAN);
            inner * chi_pdf_unchecked(u, d)
        },
        0.0,
        cfg.truncation_radius,
        cfg,
    )?;
    if outer.is_nan() {
        return Err(Error::QuadratureNoConverge {
            estimate: outer,
            error_bound: f64::INFINITY,
            requested: cfg.abs_tol,
        });
    }
    Ok(outer)
}

/// The lifted objective at one search point, using the directly integrated
/// `f_q_lift`. The last two terms are the closed spherical maximum
/// `-r r_y gamma_hat + 1/(2 c3) ln(1 - c3 r r_y / (2 gamma_hat))`.
pub fn lifted_objective(
    query: &RdtQuery,
    point: &LiftedSearchPoint,
    scaling: AlphaScaling,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let f = if query.x == 1.0 && query.r == 0.0 {
        1.0 // mismatch is identically zero at the planted point
    } else {
        f_q_lift(query, point.c3, point.gamma_x, cfg)?
    };
    Ok(objective_terms(query, point.c3, point.r_y, point.gamma, f, scaling))
}

fn objective_terms(
    query: &RdtQuery,
    c3: f64,
    r_y: f64,
    gamma: f64,
    f_lift: f64,
    scaling: AlphaScaling,
) -> f64 {
    let r = query.r;
    let alpha_eff = scaling.effective(query.alpha, query.d);
    let gamma_hat = gamma_hat_sph(c3, r, r_y);
    let a = c3 * r * r_y;
    let log_arg = 1.0 - a / (2.0 * gamma_hat);
    0.5 * c3 * r * r * r_y * r_y + gamma - alpha_eff / c3 * f_lift.max(1e-300).ln()
        - r * r_y * gamma_hat
        + 0.5 / c3 * log_arg.ln()
}

/// Tabulated `beta -> E exp(-beta S^2)`: cubic spline over `ln beta` on
/// [1e-4, 1e6], moment series below 1e-3, square-root tail above.
struct LaplaceTable {
    t_lo: f64,
    step: f64,
    values: Vec<f64>,
    second_derivs: Vec<f64>,
    m2: f64,
    m4: f64,
    m6: f64,
}

const TABLE_BETA_MIN: f64 = 1e-4;
const TABLE_BETA_MAX: f64 = 1e4;
const TABLE_POINTS: usize = 320;
const SERIES_BETA_MAX: f64 = 1e-3;

impl LaplaceTable {
    fn build(query: &RdtQuery, cfg: &QuadratureConfig) -> Result<Self> {
        let (m2, m4, m6) = if query.r == 0.0 {
            // S = (1 - x) u with u ~ chi(d): E u^{2k} = d (d+2) ... (d+2k-2)
            let b = 1.0 - query.x;
            let df = query.d as f64;
            (
                b * b * df,
                b.powi(4) * df * (df + 2.0),
                b.powi(6) * df * (df + 2.0) * (df + 4.0),
            )
        } else {
            (
                nested_expectation(query, cfg, |s| s * s, None)?,
                nested_expectation(query, cfg, |s| s.powi(4), None)?,
                nested_expectation(query, cfg, |s| s.powi(6), None)?,
            )
        };

        // node values only need spline-level accuracy; the moments above
        // keep the caller's full tolerance for the series region
        let node_cfg = QuadratureConfig {
            abs_tol: cfg.abs_tol.max(1e-9),
            rel_tol: cfg.rel_tol.max(1e-7),
            ..*cfg
        };
        let t_lo = TABLE_BETA_MIN.ln();
        let t_hi = TABLE_BETA_MAX.ln();
        let step = (t_hi - t_lo) / (TABLE_POINTS - 1) as f64;
        let values: Vec<f64> = (0..TABLE_POINTS)
            .into_par_iter()
            .map(|i| {
                let beta = (t_lo + i as f64 * step).exp();
                laplace_transform(query, beta, &node_cfg)
            })
            .collect::<Result<_>>()?;
        let second_derivs = natural_spline_second_derivs(&values, step);
        Ok(LaplaceTable { t_lo, step, values, second_derivs, m2, m4, m6 })
    }

    fn eval(&self, beta: f64) -> f64 {
        debug_assert!(beta > 0.0);
        if beta <= SERIES_BETA_MAX {
            let poly = 1.0 - self.m2 * beta + 0.5 * self.m4 * beta * beta
                - self.m6 * beta * beta * beta / 6.0;
            return poly.clamp(1e-300, 1.0);
        }
        let n = self.values.len();
        let t_max = self.t_lo + (n - 1) as f64 * self.step;
        let t = beta.ln();
        if t >= t_max {
            // square-root tail: f ~ A / sqrt(beta)
            return (self.values[n - 1] * (0.5 * (t_max - t)).exp()).max(1e-300);
        }
        let pos = (t - self.t_lo) / self.step;
        let i = (pos.floor() as usize).min(n - 2);
        let a = (i + 1) as f64 - pos;
        let b = pos - i as f64;
        let h2 = self.step * self.step / 6.0;
        let v = a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second_derivs[i] + (b * b * b - b) * self.second_derivs[i + 1])
                * h2;
        v.clamp(1e-300, 1.0)
    }
}

/// Second derivatives for a natural cubic spline on a uniform grid:
/// `m_{i-1} + 4 m_i + m_{i+1} = 6 (y_{i+1} - 2 y_i + y_{i-1}) / h^2`
/// with `m_0 = m_{n-1} = 0`, solved by the Thomas algorithm.
fn natural_spline_second_derivs(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut m = vec![0.0f64; n];
    if n < 3 {
        return m;
    }
    let mut diag = vec![4.0f64; n - 2];
    let mut rhs: Vec<f64> = (1..n - 1)
        .map(|i| 6.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h))
        .collect();
    for i in 1..n - 2 {
        let w = 1.0 / diag[i - 1];
        diag[i] -= w;
        rhs[i] -= w * rhs[i - 1];
    }
    m[n - 2] = rhs[n - 3] / diag[n - 3];
    for j in (0..n - 3).rev() {
        m[j + 1] = (rhs[j] - m[j + 2]) / diag[j];
    }
    m
}

/// Max over `(c3, r_y)` of min over `gamma` of the lifted objective,
/// followed by local log-grid refinement rounds around the incumbent.
/// Deterministic for a fixed configuration.
pub fn phi0_lifted(
    query: &RdtQuery,
    search: &LiftedSearchConfig,
    scaling: AlphaScaling,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    search.validate()?;
    cfg.validate()?;
    if query.r == 0.0 && query.x == 1.0 {
        // objective reduces to bare gamma; its infimum over gamma > 0 is 0
        return Ok(0.0);
    }
    let table = LaplaceTable::build(query, cfg)?;

    let mut c3_grid = search.c3_grid.clone();
    let mut r_y_grid = search.r_y_grid.clone();
    let mut gamma_grid = search.gamma_grid.clone();

    let mut best = grid_pass(query, &table, &c3_grid, &r_y_grid, &gamma_grid, scaling);
    for _ in 0..search.refine_rounds {
        c3_grid = refine_grid(&c3_grid, best.1, search.refine_shrink);
        r_y_grid = refine_grid(&r_y_grid, best.2, search.refine_shrink);
        gamma_grid = refine_grid(&gamma_grid, best.3, search.refine_shrink);
        let candidate = grid_pass(query, &table, &c3_grid, &r_y_grid, &gamma_grid, scaling);
        if candidate.0 > best.0 {
            best = candidate;
        }
    }
    Ok(best.0)
}

/// One full sweep: returns (value, c3, r_y, gamma) of the max-min incumbent.
/// Cells are evaluated in parallel; the argmax reduction is sequential and
/// first-index tie-broken, so the result is thread-count independent.
///
/// The gamma minimum must be tight for the bound to be valid (a sloppy
/// inner min overstates the max-min), so the grid scan is polished by a
/// golden-section descent in `ln gamma` around the grid argmin. The outer
/// max side needs no such care: under-exploring it only loses sharpness.
fn grid_pass(
    query: &RdtQuery,
    table: &LaplaceTable,
    c3_grid: &[f64],
    r_y_grid: &[f64],
    gamma_grid: &[f64],
    scaling: AlphaScaling,
) -> (f64, f64, f64, f64) {
    let cells: Vec<(f64, f64)> = c3_grid
        .iter()
        .flat_map(|&c3| r_y_grid.iter().map(move |&r_y| (c3, r_y)))
        .collect();
    let evaluated: Vec<(f64, f64)> = cells
        .par_iter()
        .map(|&(c3, r_y)| gamma_min(query, table, c3, r_y, gamma_grid, scaling))
        .collect();
    let mut best = (f64::NEG_INFINITY, c3_grid[0], r_y_grid[0], gamma_grid[0]);
    for (cell, &(val, gamma)) in cells.iter().zip(&evaluated) {
        if val > best.0 {
            best = (val, cell.0, cell.1, gamma);
        }
    }
    best
}

/// Minimum of the objective over gamma at fixed (c3, r_y): coarse grid scan,
/// bracket expansion if the min sits on a grid edge, then golden-section.
fn gamma_min(
    query: &RdtQuery,
    table: &LaplaceTable,
    c3: f64,
    r_y: f64,
    gamma_grid: &[f64],
    scaling: AlphaScaling,
) -> (f64, f64) {
    let eval = |gamma: f64| {
        let r_y_bar = r_y * r_y / (4.0 * gamma);
        let gamma_x = r_y_bar / (1.0 + r_y_bar);
        let f = table.eval(c3 * gamma_x);
        objective_terms(query, c3, r_y, gamma, f, scaling)
    };

    let mut min_val = f64::INFINITY;
    let mut min_idx = 0usize;
    for (i, &gamma) in gamma_grid.iter().enumerate() {
        let val = eval(gamma);
        if val < min_val {
            min_val = val;
            min_idx = i;
        }
    }

    // bracket in ln gamma around the grid argmin, expanding past the grid
    // edge (the infimum may sit below any preset grid)
    let ln_step = if gamma_grid.len() >= 2 {
        (gamma_grid[gamma_grid.len() - 1].ln() - gamma_grid[0].ln()) / (gamma_grid.len() - 1) as f64
    } else {
        1.0
    };
    let mut lo = gamma_grid[min_idx].ln() - ln_step;
    let mut hi = gamma_grid[min_idx].ln() + ln_step;
    const LN_GAMMA_FLOOR: f64 = -41.0; // gamma ~ 1.5e-18
    const LN_GAMMA_CEIL: f64 = 41.0;
    if min_idx == 0 {
        while lo > LN_GAMMA_FLOOR && eval(lo.exp()) < eval((lo + ln_step).exp()) {
            lo -= ln_step;
        }
    }
    if min_idx == gamma_grid.len() - 1 {
        while hi < LN_GAMMA_CEIL && eval(hi.exp()) < eval((hi - ln_step).exp()) {
            hi += ln_step;
        }
    }

    // golden-section in ln gamma
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c.exp());
    let mut fd = eval(d.exp());
    for _ in 0..70 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d.exp());
        }
    }
    let gamma = (0.5 * (a + b)).exp();
    let val = eval(gamma);
    // never report worse than the plain grid scan
    if val <= min_val {
        (val, gamma)
    } else {
        (min_val, gamma_grid[min_idx])
    }
}

/// Shrink the grid's log-span by `shrink` around `center`, keeping the
/// point count.
fn refine_grid(grid: &[f64], center: f64, shrink: f64) -> Vec<f64> {
    let span = grid[grid.len() - 1].ln() - grid[0].ln();
    let half = 0.5 * span * shrink;
    log_grid((center.ln() - half).exp(), (center.ln() + half).exp(), grid.len())
}

/// `max(0, phi0_plain, phi0_lifted)`: the sharpest certified lower bound.
pub fn best_lower_bound(
    query: &RdtQuery,
    search: &LiftedSearchConfig,
    scaling: AlphaScaling,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let plain = phi0_plain(query, cfg)?;
    let lifted = phi0_lifted(query, search, scaling, cfg)?;
    Ok(plain.max(lifted).max(0.0))
}

/// Evaluate plain and lifted bounds along a grid of overlaps.
pub fn curve_lifted(
    alpha: f64,
    d: u32,
    c: f64,
    x_grid: &[f64],
    search: &LiftedSearchConfig,
    scaling: AlphaScaling,
    cfg: &QuadratureConfig,
) -> Result<Vec<CurvePoint>> {
    search.validate()?;
    x_grid
        .par_iter()
        .map(|&x| {
            let query = RdtQuery::new(alpha, d, c, x)?;
            let plain = phi0_plain(&query, cfg)?;
            let lifted = phi0_lifted(&query, search, scaling, cfg)?;
            Ok(CurvePoint::new(x, plain, Some(lifted)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plain::f_q;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn gamma_hat_closed_form() {
        // r = 0 collapses to sqrt(4)/4
        assert_eq!(gamma_hat_sph(3.7, 0.0, 11.0), 0.5);
        // a = 2: (2 + sqrt(8))/4
        let v = gamma_hat_sph(2.0, 1.0, 1.0);
        assert!((v - (2.0 + 8.0f64.sqrt()) / 4.0).abs() < 1e-15);
        // the log argument stays positive for any a
        for &a in &[0.1, 1.0, 10.0, 100.0] {
            let gh = gamma_hat_sph(a, 1.0, 1.0);
            assert!(1.0 - a / (2.0 * gh) > 0.0, "a={a}");
        }
    }

    #[test]
    fn search_point_derived_fields() {
        let p = LiftedSearchPoint::new(2.0, 3.0, 0.5, 1.0).unwrap();
        assert!((p.r_y_bar - 4.5).abs() < 1e-15);
        assert!((p.gamma_x - 4.5 / 5.5).abs() < 1e-15);
        assert!(p.gamma_x > 0.0 && p.gamma_x < 1.0);
        assert!(LiftedSearchPoint::new(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn f_q_lift_limits() {
        let q = RdtQuery::new(2.5, 2, 1.0, 0.5).unwrap();
        let tiny_c3 = f_q_lift(&q, 1e-12, 0.5, &cfg()).unwrap();
        assert!((tiny_c3 - 1.0).abs() < 1e-9, "{tiny_c3}");
        let tiny_gx = f_q_lift(&q, 1.0, 1e-12, &cfg()).unwrap();
        assert!((tiny_gx - 1.0).abs() < 1e-9, "{tiny_gx}");
    }

    #[test]
    fn f_q_lift_monotone_in_penalty() {
        let q = RdtQuery::new(2.5, 2, 1.0, 0.4).unwrap();
        let mut prev = 1.0;
        for &c3 in &[0.01, 0.1, 1.0, 10.0, 100.0] {
            let v = f_q_lift(&q, c3, 0.5, &cfg()).unwrap();
            assert!(v > 0.0 && v <= 1.0);
            assert!(v < prev, "c3={c3}: {v} !< {prev}");
            prev = v;
        }
        let mut prev = 1.0;
        for &gx in &[0.05, 0.2, 0.5, 0.8, 0.95] {
            let v = f_q_lift(&q, 1.0, gx, &cfg()).unwrap();
            assert!(v < prev, "gamma_x={gx}: {v} !< {prev}");
            prev = v;
        }
    }

    #[test]
    fn objective_at_planted_point_reduces_to_gamma() {
        // x = 1, c = 1: the mismatch is identically zero and the spherical
        // terms carry the r r_y factor, leaving bare gamma
        let q = RdtQuery::new(2.5, 2, 1.0, 1.0).unwrap();
        for &(c3, r_y, gamma) in &[(0.5, 2.0, 0.3), (4.0, 0.1, 1.7)] {
            let p = LiftedSearchPoint::new(c3, r_y, gamma, q.r).unwrap();
            let v = lifted_objective(&q, &p, AlphaScaling::PerDn, &cfg()).unwrap();
            assert!((v - gamma).abs() < 1e-12, "{v} vs {gamma}");
        }
    }

    #[test]
    fn objective_finite_everywhere_on_grid() {
        let q = RdtQuery::new(2.5, 2, 1.0, 0.3).unwrap();
        for &c3 in &[1e-3, 1.0, 1e3] {
            for &r_y in &[1e-3, 1.0, 1e3] {
                let p = LiftedSearchPoint::new(c3, r_y, 0.7, q.r).unwrap();
                let v = lifted_objective(&q, &p, AlphaScaling::PerDn, &cfg()).unwrap();
                assert!(v.is_finite(), "c3={c3} r_y={r_y}: {v}");
            }
        }
    }

    #[test]
    fn small_c3_limit_recovers_plain_functional() {
        // at c3 = 1e-6 the objective must match
        // gamma + alpha_eff gamma_x f_q - r r_y within 1e-3
        let q = RdtQuery::new(2.5, 2, 1.0, 0.45).unwrap();
        let fq = f_q(&q, &cfg()).unwrap();
        for &(r_y, gamma) in &[(0.7, 0.4), (1.8, 0.2), (0.2, 1.1)] {
            let p = LiftedSearchPoint::new(1e-6, r_y, gamma, q.r).unwrap();
            let v = lifted_objective(&q, &p, AlphaScaling::PerDn, &cfg()).unwrap();
            let plain_functional = gamma + q.alpha / 2.0 * p.gamma_x * fq - q.r * r_y;
            assert!(
                (v - plain_functional).abs() < 1e-3,
                "r_y={r_y} gamma={gamma}: {v} vs {plain_functional}"
            );
        }
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let q = RdtQuery::new(2.5, 2, 1.0, 0.5).unwrap();
        let table = LaplaceTable::build(&q, &cfg()).unwrap();
        for &beta in &[2e-4, 1e-2, 0.37, 2.9, 41.0, 800.0] {
            let direct = laplace_transform(&q, beta, &cfg()).unwrap();
            let tab = table.eval(beta);
            assert!(
                (direct - tab).abs() < 1e-7 * direct.max(1e-3),
                "beta={beta}: direct {direct} vs table {tab}"
            );
        }
        // series region consistency
        let direct = laplace_transform(&q, 5e-4, &cfg()).unwrap();
        assert!((table.eval(5e-4) - direct).abs() < 1e-9);
    }

    #[test]
    fn phi0_lifted_deterministic_and_plant_exact() {
        let planted = RdtQuery::new(2.5, 2, 1.0, 1.0).unwrap();
        let search = LiftedSearchConfig::default();
        assert_eq!(phi0_lifted(&planted, &search, AlphaScaling::PerDn, &cfg()).unwrap(), 0.0);

        let q = RdtQuery::new(2.5, 2, 1.0, 0.2).unwrap();
        let a = phi0_lifted(&q, &search, AlphaScaling::PerDn, &cfg()).unwrap();
        let b = phi0_lifted(&q, &search, AlphaScaling::PerDn, &cfg()).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn lifting_beats_plain_at_small_overlap() {
        let q = RdtQuery::new(2.5, 2, 1.0, 0.2).unwrap();
        let search = LiftedSearchConfig::default();
        let lifted = phi0_lifted(&q, &search, AlphaScaling::PerDn, &cfg()).unwrap();
        let plain = phi0_plain(&q, &cfg()).unwrap();
        assert!(
            lifted > plain + 1e-4,
            "expected a visible lifting effect: lifted {lifted} vs plain {plain}"
        );
        let best = best_lower_bound(&q, &search, AlphaScaling::PerDn, &cfg()).unwrap();
        assert!((best - lifted).abs() < 1e-15);
        assert!(best >= plain - 1e-9 && best >= 0.0);
    }
}

#[cfg(feature = "probe-internals")]
pub fn probe_incumbent(
    query: &RdtQuery,
    search: &LiftedSearchConfig,
    scaling: AlphaScaling,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64, f64, f64)> {
    let table = LaplaceTable::build(query, cfg)?;
    let mut c3_grid = search.c3_grid.clone();
    let mut r_y_grid = search.r_y_grid.clone();
    let mut gamma_grid = search.gamma_grid.clone();
    let mut best = grid_pass(query, &table, &c3_grid, &r_y_grid, &gamma_grid, scaling);
    for _ in 0..search.refine_rounds {
        c3_grid = refine_grid(&c3_grid, best.1, search.refine_shrink);
        r_y_grid = refine_grid(&r_y_grid, best.2, search.refine_shrink);
        gamma_grid = refine_grid(&gamma_grid, best.3, search.refine_shrink);
        let candidate = grid_pass(query, &table, &c3_grid, &r_y_grid, &gamma_grid, scaling);
        if candidate.0 > best.0 {
            best = candidate;
        }
    }
    Ok(best)
}
