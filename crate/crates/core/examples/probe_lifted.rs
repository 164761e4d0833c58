use rdmpr_core::lifted::*;
use rdmpr_core::plain::*;
use rdmpr_core::specfun::QuadratureConfig;

fn main() {
    let cfg = QuadratureConfig::default();
    let search = LiftedSearchConfig::default();
    let grid = uniform_grid(0.005, 0.995, 56);

    for alpha in [2.5, 2.2] {
        let t0 = std::time::Instant::now();
        let curve = curve_lifted(alpha, 2, 1.0, &grid, &search, AlphaScaling::PerDn, &cfg).unwrap();
        let v = monotone_test(&curve).unwrap();
        println!("alpha {alpha}: monotone={} max_slope={:+.4e} first_violation={:?}  [{:?}]",
                 v.monotone, v.max_positive_slope, v.first_violation_x, t0.elapsed());
        let mut max_excess = f64::NEG_INFINITY;
        for p in &curve {
            let excess = p.phi0_lifted.unwrap() - p.phi0_plain;
            if p.x < 0.8 && excess > max_excess { max_excess = excess; }
        }
        println!("  max lift excess over plain for x<0.8: {max_excess:.4e}");
        for p in curve.iter().step_by(7) {
            println!("  x={:.3}  plain={:+.5e}  lifted={:+.5e}", p.x, p.phi0_plain, p.phi0_lifted.unwrap());
        }
    }
}
