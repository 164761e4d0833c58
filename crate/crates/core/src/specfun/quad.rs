//! Adaptive Gauss-Kronrod (G7/K15) quadrature for the semi-infinite
//! Gaussian-tail integrals that all the RDT bounds reduce to.
//!
//! Every integrand in this crate decays like `exp(-t^2/2)` times polynomial
//! growth, so a semi-infinite integral is truncated at a configurable radius
//! (12 standard deviations past the last bump by default) and the remaining
//! finite interval is subdivided adaptively, always splitting the segment
//! with the largest error estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and truncation for the adaptive quadrature.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper cutoff for semi-infinite integrals. Call sites push it out by
    /// the noncentrality when the integrand's bump sits away from zero.
    pub truncation_radius: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            truncation_radius: 12.0,
            max_subdivisions: 400,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.truncation_radius > 0.0) {
            return Err(Error::precondition(
                "QuadratureConfig",
                format!(
                    "tolerances and truncation radius must be positive (abs {}, rel {}, radius {})",
                    self.abs_tol, self.rel_tol, self.truncation_radius
                ),
            ));
        }
        Ok(())
    }

    pub fn with_truncation_radius(mut self, radius: f64) -> Self {
        self.truncation_radius = radius;
        self
    }
}

// K15 abscissae on [-1, 1] (positive half; symmetric).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

// K15 weights matching XGK.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// G7 weights for the embedded Gauss rule (odd-indexed K15 nodes).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod evaluation on [a, b]: returns (K15 value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut kronrod = WGK[7] * f_center;
    let mut gauss = WG[3] * f_center;
    let mut res_abs = kronrod.abs();
    let mut samples = [0.0f64; 15];
    samples[7] = f_center;

    for j in 0..7 {
        let dx = half * XGK[j];
        let f_lo = f(center - dx);
        let f_hi = f(center + dx);
        samples[j] = f_lo;
        samples[14 - j] = f_hi;
        kronrod += WGK[j] * (f_lo + f_hi);
        res_abs += WGK[j] * (f_lo.abs() + f_hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f_lo + f_hi);
        }
    }

    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((samples[j] - mean).abs() + (samples[14 - j] - mean).abs());
    }

    let value = kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();

    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// Adaptive integral of `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    integrate_with_breaks(f, a, b, &[], cfg)
}

/// Adaptive integral with caller-supplied interior breakpoints. Breakpoints
/// land on initial segment boundaries, so features much narrower than the
/// interval (known bump locations, exponential spikes) cannot slip between
/// the first error estimates. Points outside `(a, b)` are ignored.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::precondition(
            "integrate",
            format!("invalid interval [{a}, {b}]"),
        ));
    }

    // seed with uniform segments so an isolated bump inside a long interval
    // cannot hide from the first error estimate, then merge in breakpoints
    const INITIAL_SEGMENTS: usize = 8;
    let mut cuts: Vec<f64> = (0..=INITIAL_SEGMENTS)
        .map(|i| a + (b - a) * i as f64 / INITIAL_SEGMENTS as f64)
        .collect();
    for &p in breaks {
        if p > a && p < b && p.is_finite() {
            cuts.push(p);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12 * (b - a));

    let mut segments: Vec<Segment> = Vec::with_capacity(cfg.max_subdivisions + 1);
    for pair in cuts.windows(2) {
        let (value, err) = gk15(&f, pair[0], pair[1]);
        segments.push(Segment { a: pair[0], b: pair[1], value, err });
    }

    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let total_err: f64 = segments.iter().map(|s| s.err).sum();
        if total.is_nan() || total_err.is_nan() {
            return Err(Error::QuadratureNoConverge {
                estimate: total,
                error_bound: f64::INFINITY,
                requested: cfg.abs_tol,
            });
        }
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= tol {
            return Ok(total);
        }
        if segments.len() >= cfg.max_subdivisions {
            return Err(Error::QuadratureNoConverge {
                estimate: total,
                error_bound: total_err,
                requested: tol,
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .expect("nonempty segment list");
        let seg = segments[worst];
        let mid = 0.5 * (seg.a + seg.b);
        let (lv, le) = gk15(&f, seg.a, mid);
        let (rv, re) = gk15(&f, mid, seg.b);
        segments[worst] = Segment { a: seg.a, b: mid, value: lv, err: le };
        segments.push(Segment { a: mid, b: seg.b, value: rv, err: re });
    }
}

/// Adaptive integral of `f` over `[0, inf)`, truncated at
/// `cfg.truncation_radius`. The integrand must decay at least like a
/// Gaussian tail beyond the truncation point.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, cfg: &QuadratureConfig) -> Result<f64> {
    integrate(f, 0.0, cfg.truncation_radius, cfg)
}
