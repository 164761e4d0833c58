use rdmpr_core::plain::*;
use rdmpr_core::specfun::QuadratureConfig;

fn main() {
    let cfg = QuadratureConfig::default();
    for alpha in [1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0] {
        let grid = transition_grid(1.0);
        let curve = curve_plain(alpha, 1, 1.0, &grid, &cfg).unwrap();
        let v = monotone_test(&curve).unwrap();
        println!(
            "d=1 alpha {:5.2}  left {:+.4e}  monotone {}  max_slope {:+.3e}",
            alpha, curve[0].best_bound, v.monotone, v.max_positive_slope
        );
    }
    let pt1 = find_pt_plain(1, 1.0, (1.4, 2.4), &cfg).unwrap();
    println!("find_pt_plain(d=1,c=1) = {pt1}");
    let pt2 = find_pt_plain(2, 1.0, (2.0, 3.5), &cfg).unwrap();
    let again = find_pt_plain(2, 1.0, (2.0, 3.5), &cfg).unwrap();
    println!("find_pt_plain(d=2,c=1) = {pt2}, deterministic: {}", pt2.to_bits() == again.to_bits());
}
