//! Random rank-d measurement ensembles and the solver objectives.
//!
//! An instance is a Gaussian `dm x dn` sensing matrix `A`, a planted unit
//! vector, and the `m` rank-d quadratic measurements
//! `y_i = sum_j (A_{jm+i,:} x)^2`. The recovery objective and its gradient
//! are evaluated matrix-free through the `d` row inner products per
//! measurement; the rank-d matrices `B_i` are materialized only on demand
//! (tests, spectra).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Log-barrier schedule of the outer solver loop.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BarrierConfig {
    pub t0_init: f64,
    pub t0_multiplier: f64,
    pub t0_max: f64,
}

impl Default for BarrierConfig {
    fn default() -> Self {
        BarrierConfig { t0_init: 0.01, t0_multiplier: 1.6, t0_max: 1e7 }
    }
}

impl BarrierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0_init > 0.0 && self.t0_init < self.t0_max && self.t0_multiplier > 1.0) {
            return Err(Error::precondition(
                "BarrierConfig",
                format!(
                    "need 0 < t0_init < t0_max and multiplier > 1 (init {}, mult {}, max {})",
                    self.t0_init, self.t0_multiplier, self.t0_max
                ),
            ));
        }
        Ok(())
    }
}

/// How the planted signal is chosen.
#[derive(Debug, Clone)]
pub enum Planted {
    RandomUnit,
    Given(Vec<f64>),
}

/// A concrete random rank-d phase retrieval problem.
#[derive(Debug, Clone)]
pub struct MeasurementInstance {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    /// `dm x dn`, row-major, iid standard normal.
    a: Vec<f64>,
    pub x_true: Vec<f64>,
    pub y_bar: Vec<f64>,
    pub seed: u64,
}

/// Serialized form: the matrix is regenerated from the seed on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub x_true: Vec<f64>,
    pub y_bar: Vec<f64>,
}

/// Draw the instance: `A` first, then the planted vector, from a single
/// counter-based stream so the pair is reproducible from the seed alone.
pub fn generate_instance(
    n: usize,
    m: usize,
    d: usize,
    seed: u64,
    planted: Planted,
) -> Result<MeasurementInstance> {
    if n == 0 || m == 0 || d == 0 {
        return Err(Error::domain("generate_instance", "n, m, d must all be >= 1"));
    }
    let (dn, dm) = (d * n, d * m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let a: Vec<f64> = (0..dm * dn).map(|_| normal.sample(&mut rng)).collect();

    let x_true = match planted {
        Planted::RandomUnit => {
            let v: Vec<f64> = (0..dn).map(|_| normal.sample(&mut rng)).collect();
            normalize(v)?
        }
        Planted::Given(v) => {
            if v.len() != dn {
                return Err(Error::domain(
                    "generate_instance",
                    format!("planted vector has length {}, expected {dn}", v.len()),
                ));
            }
            normalize(v)?
        }
    };

    let mut instance = MeasurementInstance { n, m, d, a, x_true, y_bar: Vec::new(), seed };
    instance.y_bar = instance.measure(&instance.x_true);
    Ok(instance)
}

fn normalize(v: Vec<f64>) -> Result<Vec<f64>> {
    let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::domain("generate_instance", "planted vector has zero norm"));
    }
    Ok(v.into_iter().map(|t| t / norm).collect())
}

impl MeasurementInstance {
    pub fn dn(&self) -> usize {
        self.d * self.n
    }

    pub fn dm(&self) -> usize {
        self.d * self.m
    }

    pub(crate) fn row(&self, k: usize) -> &[f64] {
        let dn = self.dn();
        &self.a[k * dn..(k + 1) * dn]
    }

    /// `A x` into `out` (length `dm`).
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dn());
        debug_assert_eq!(out.len(), self.dm());
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = dot(self.row(k), x);
        }
    }

    /// All `m` rank-d measurements of `x`.
    pub fn measure(&self, x: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.dm()];
        self.apply(x, &mut w);
        let mut y = vec![0.0; self.m];
        for j in 0..self.d {
            for i in 0..self.m {
                let t = w[j * self.m + i];
                y[i] += t * t;
            }
        }
        y
    }

    /// The rank-d PSD measurement matrix `B_i = sum_j a_{jm+i} a_{jm+i}^T`
    /// (dn x dn, dense). Intended for tests and small instances.
    pub fn b_matrix(&self, i: usize) -> Result<Vec<f64>> {
        if i >= self.m {
            return Err(Error::domain(
                "b_matrix",
                format!("measurement index {i} out of range (m = {})", self.m),
            ));
        }
        let dn = self.dn();
        let mut b = vec![0.0; dn * dn];
        for j in 0..self.d {
            let row = self.row(j * self.m + i);
            for p in 0..dn {
                for q in 0..dn {
                    b[p * dn + q] += row[p] * row[q];
                }
            }
        }
        Ok(b)
    }

    /// Recovery objective `sum_i (y_i - x^T B_i x)^2`, matrix-free.
    pub fn f_plain_grouped(&self, x: &[f64]) -> f64 {
        let mut w = vec![0.0; self.dm()];
        self.apply(x, &mut w);
        self.f_plain_from_projections(&w)
    }

    fn f_plain_from_projections(&self, w: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.m {
            let mut q = 0.0;
            for j in 0..self.d {
                let t = w[j * self.m + i];
                q += t * t;
            }
            let res = self.y_bar[i] - q;
            total += res * res;
        }
        total
    }

    /// Gradient of [`Self::f_plain_grouped`]:
    /// `sum_i 4 (x^T B_i x - y_i) B_i x`, matrix-free.
    pub fn grad_f_plain(&self, x: &[f64]) -> Vec<f64> {
        let (_, grad) = self.f_plain_with_grad(x);
        grad
    }

    /// Objective and gradient in one pass over the matrix.
    pub fn f_plain_with_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let dn = self.dn();
        let mut w = vec![0.0; self.dm()];
        self.apply(x, &mut w);

        let mut value = 0.0;
        let mut res = vec![0.0; self.m];
        for i in 0..self.m {
            let mut q = 0.0;
            for j in 0..self.d {
                let t = w[j * self.m + i];
                q += t * t;
            }
            let r = q - self.y_bar[i];
            res[i] = r;
            value += r * r;
        }

        let mut grad = vec![0.0; dn];
        for j in 0..self.d {
            for i in 0..self.m {
                let k = j * self.m + i;
                let scale = 4.0 * res[i] * w[k];
                axpy(scale, self.row(k), &mut grad);
            }
        }
        (value, grad)
    }

    /// Log-barrier objective `t0 f_plain(x) - ln(1 - ||x||^2)`, defined
    /// strictly inside the unit ball.
    pub fn f_bar(&self, t0: f64, x: &[f64]) -> Result<f64> {
        let gap = self.ball_gap(x)?;
        let mut w = vec![0.0; self.dm()];
        self.apply(x, &mut w);
        Ok(t0 * self.f_plain_from_projections(&w) - gap.ln())
    }

    /// Barrier objective and gradient
    /// `t0 grad_f_plain(x) + 2x / (1 - ||x||^2)`.
    pub fn f_bar_with_grad(&self, t0: f64, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let gap = self.ball_gap(x)?;
        let (plain, mut grad) = self.f_plain_with_grad(x);
        let barrier_scale = 2.0 / gap;
        for (g, &xi) in grad.iter_mut().zip(x) {
            *g = t0 * *g + barrier_scale * xi;
        }
        Ok((t0 * plain - gap.ln(), grad))
    }

    fn ball_gap(&self, x: &[f64]) -> Result<f64> {
        let norm_sq: f64 = x.iter().map(|t| t * t).sum();
        if norm_sq >= 1.0 {
            return Err(Error::BarrierDomain { norm: norm_sq.sqrt() });
        }
        Ok(1.0 - norm_sq)
    }

    pub fn to_record(&self) -> InstanceRecord {
        InstanceRecord {
            seed: self.seed,
            n: self.n,
            m: self.m,
            d: self.d,
            x_true: self.x_true.clone(),
            y_bar: self.y_bar.clone(),
        }
    }

    /// Rebuild from a record: the matrix comes back from the seed, the
    /// stored measurements are cross-checked against it.
    pub fn from_record(record: InstanceRecord) -> Result<Self> {
        let instance = generate_instance(
            record.n,
            record.m,
            record.d,
            record.seed,
            Planted::Given(record.x_true.clone()),
        )?;
        for (i, (&stored, &fresh)) in record.y_bar.iter().zip(&instance.y_bar).enumerate() {
            if (stored - fresh).abs() > 1e-10 * fresh.abs().max(1.0) {
                return Err(Error::InconsistentInstance {
                    message: format!("y_bar[{i}]: stored {stored}, recomputed {fresh}"),
                });
            }
        }
        Ok(instance)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn axpy(scale: f64, v: &[f64], out: &mut [f64]) {
    for (o, &vi) in out.iter_mut().zip(v) {
        *o += scale * vi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> MeasurementInstance {
        generate_instance(8, 20, 2, 42, Planted::RandomUnit).unwrap()
    }

    #[test]
    fn shapes_and_determinism() {
        let inst = small();
        assert_eq!(inst.a.len(), inst.dm() * inst.dn());
        assert_eq!(inst.y_bar.len(), inst.m);
        let norm: f64 = inst.x_true.iter().map(|t| t * t).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);

        let again = generate_instance(8, 20, 2, 42, Planted::RandomUnit).unwrap();
        assert_eq!(inst.a, again.a);
        assert_eq!(inst.x_true, again.x_true);
        assert_eq!(inst.y_bar, again.y_bar);

        let other = generate_instance(8, 20, 2, 43, Planted::RandomUnit).unwrap();
        assert_ne!(inst.a, other.a);
    }

    #[test]
    fn measurement_mean_is_rank() {
        // each y_i is chi-square with d degrees of freedom, mean d
        let inst = generate_instance(6, 10_000, 2, 7, Planted::RandomUnit).unwrap();
        let mean: f64 = inst.y_bar.iter().sum::<f64>() / inst.m as f64;
        assert!((mean - 2.0).abs() < 0.1, "mean {mean}");
    }

    #[test]
    fn y_bar_recomputable_and_quadratic_form_consistent() {
        let inst = small();
        let recomputed = inst.measure(&inst.x_true);
        for (a, b) in inst.y_bar.iter().zip(&recomputed) {
            assert!((a - b).abs() < 1e-10);
        }
        // x^T B_i x = y_i through the dense matrix
        let dn = inst.dn();
        for i in [0usize, 7, 19] {
            let b = inst.b_matrix(i).unwrap();
            let mut quad = 0.0;
            for p in 0..dn {
                for q in 0..dn {
                    quad += inst.x_true[p] * b[p * dn + q] * inst.x_true[q];
                }
            }
            assert!((quad - inst.y_bar[i]).abs() < 1e-10, "i={i}");
        }
        assert!(inst.b_matrix(20).is_err());
    }

    #[test]
    fn b_matrix_is_low_rank_psd() {
        let inst = small();
        let dn = inst.dn();
        let b = inst.b_matrix(3).unwrap();
        for p in 0..dn {
            for q in 0..dn {
                assert!((b[p * dn + q] - b[q * dn + p]).abs() < 1e-12);
            }
        }
        // PSD via random quadratic forms
        let trace: f64 = (0..dn).map(|p| b[p * dn + p]).sum();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let v: Vec<f64> = (0..dn).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut quad = 0.0;
            for p in 0..dn {
                for q in 0..dn {
                    quad += v[p] * b[p * dn + q] * v[q];
                }
            }
            assert!(quad >= -1e-10 * trace, "negative quadratic form {quad}");
        }
        // rank <= d: trace(B)^2 <= rank * trace(B^2) (Cauchy-Schwarz on
        // the eigenvalues)
        let mut trace_sq = 0.0;
        for p in 0..dn {
            for q in 0..dn {
                trace_sq += b[p * dn + q] * b[q * dn + p];
            }
        }
        assert!(trace * trace <= inst.d as f64 * trace_sq * (1.0 + 1e-10));
    }

    #[test]
    fn objective_anchors_and_symmetry() {
        let inst = small();
        assert!(inst.f_plain_grouped(&inst.x_true) < 1e-20);
        let neg: Vec<f64> = inst.x_true.iter().map(|t| -t).collect();
        assert_eq!(inst.f_plain_grouped(&neg), inst.f_plain_grouped(&inst.x_true));

        let zero = vec![0.0; inst.dn()];
        let expected: f64 = inst.y_bar.iter().map(|y| y * y).sum();
        assert!((inst.f_plain_grouped(&zero) - expected).abs() < 1e-10 * expected);

        // gradient vanishes at the planted point and is odd
        let g = inst.grad_f_plain(&inst.x_true);
        assert!(g.iter().all(|t| t.abs() < 1e-10));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v: Vec<f64> = (0..inst.dn())
            .map(|_| {
                let t: f64 = StandardNormal.sample(&mut rng);
                t * 0.1
            })
            .collect();
        let gv = inst.grad_f_plain(&v);
        let neg_v: Vec<f64> = v.iter().map(|t| -t).collect();
        let gnv = inst.grad_f_plain(&neg_v);
        for (a, b) in gv.iter().zip(&gnv) {
            assert!((a + b).abs() < 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let inst = small();
        let dn = inst.dn();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..5 {
            let mut x: Vec<f64> =
                (0..dn).map(|_| { let t: f64 = StandardNormal.sample(&mut rng); t }).collect();
            let norm: f64 = x.iter().map(|t| t * t).sum::<f64>().sqrt();
            for t in x.iter_mut() {
                *t *= 0.6 / norm;
            }

            let (_, grad) = inst.f_plain_with_grad(&x);
            let (_, grad_bar) = inst.f_bar_with_grad(3.7, &x).unwrap();
            let h = 1e-5;
            for p in (0..dn).step_by(dn / 4) {
                let mut xp = x.clone();
                xp[p] += h;
                let mut xm = x.clone();
                xm[p] -= h;
                let fd = (inst.f_plain_grouped(&xp) - inst.f_plain_grouped(&xm)) / (2.0 * h);
                assert!(
                    (fd - grad[p]).abs() <= 1e-5 * fd.abs().max(1.0),
                    "trial {trial} coord {p}: fd {fd} vs grad {}",
                    grad[p]
                );
                let fd_bar =
                    (inst.f_bar(3.7, &xp).unwrap() - inst.f_bar(3.7, &xm).unwrap()) / (2.0 * h);
                assert!(
                    (fd_bar - grad_bar[p]).abs() <= 1e-5 * fd_bar.abs().max(1.0),
                    "barrier trial {trial} coord {p}: fd {fd_bar} vs grad {}",
                    grad_bar[p]
                );
            }
        }
    }

    #[test]
    fn matrix_free_matches_dense_b_evaluation() {
        let inst = generate_instance(10, 15, 3, 77, Planted::RandomUnit).unwrap();
        let dn = inst.dn();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut x: Vec<f64> = (0..dn).map(|_| { let t: f64 = StandardNormal.sample(&mut rng); t }).collect();
        let norm: f64 = x.iter().map(|t| t * t).sum::<f64>().sqrt();
        for t in x.iter_mut() {
            *t *= 0.8 / norm;
        }

        // brute force through dense B matrices
        let mut brute = 0.0;
        let mut brute_grad = vec![0.0; dn];
        for i in 0..inst.m {
            let b = inst.b_matrix(i).unwrap();
            let mut bx = vec![0.0; dn];
            for p in 0..dn {
                bx[p] = dot(&b[p * dn..(p + 1) * dn], &x);
            }
            let quad = dot(&x, &bx);
            let res = quad - inst.y_bar[i];
            brute += res * res;
            for p in 0..dn {
                brute_grad[p] += 4.0 * res * bx[p];
            }
        }
        let (fast, fast_grad) = inst.f_plain_with_grad(&x);
        assert!((fast - brute).abs() < 1e-9 * brute.max(1.0), "{fast} vs {brute}");
        for (a, b) in fast_grad.iter().zip(&brute_grad) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn barrier_blows_up_at_the_boundary() {
        let inst = small();
        let dn = inst.dn();
        let dir: Vec<f64> = inst.x_true.clone();
        let at = |s: f64| {
            let x: Vec<f64> = dir.iter().map(|t| t * s).collect();
            inst.f_bar(0.01, &x).unwrap()
        };
        let near_wall = at(1.0 - 1e-9);
        let mid = at(0.5);
        assert!(near_wall > mid + 10.0, "{near_wall} vs {mid}");

        let outside = vec![1.0; dn];
        assert!(matches!(inst.f_bar(0.01, &outside), Err(Error::BarrierDomain { .. })));

        let zero = vec![0.0; dn];
        let expected: f64 = 0.01 * inst.y_bar.iter().map(|y| y * y).sum::<f64>();
        assert!((inst.f_bar(0.01, &zero).unwrap() - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn record_round_trip_and_consistency_check() {
        let inst = small();
        let record = inst.to_record();
        let json = serde_json::to_string(&record).unwrap();
        let parsed: InstanceRecord = serde_json::from_str(&json).unwrap();
        let back = MeasurementInstance::from_record(parsed).unwrap();
        assert_eq!(back.a, inst.a);
        // y_bar is recomputed after renormalizing the stored planted vector,
        // which can move the last ulp
        for (a, b) in back.y_bar.iter().zip(&inst.y_bar) {
            assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }

        let mut tampered = inst.to_record();
        tampered.y_bar[0] += 1.0;
        assert!(matches!(
            MeasurementInstance::from_record(tampered),
            Err(Error::InconsistentInstance { .. })
        ));
    }

    #[test]
    fn given_planted_vector_is_normalized() {
        let v = vec![3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let inst = generate_instance(4, 6, 1, 9, Planted::Given(v)).unwrap();
        assert!((inst.x_true[0] - 1.0).abs() < 1e-15);
        assert!(generate_instance(4, 6, 1, 9, Planted::Given(vec![0.0; 4])).is_err());
        assert!(generate_instance(4, 6, 1, 9, Planted::Given(vec![1.0; 3])).is_err());
    }
}
