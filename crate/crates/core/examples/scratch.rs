use hameig::grid::Grid;
use hameig::presets::Preset;
use hameig::solver::{solve, SolveOptions};
use hameig::verifier::{verify, VerifyOptions};

fn main() {
    let opts = VerifyOptions::default();
    for p in Preset::all() {
        let problem = p.problem();
        for r in [0.5, 1.0, 10.0] {
            let report = verify(&problem, r, &opts).unwrap();
            for i in 0..2 {
                let c = &report.components[i];
                println!(
                    "{:?} comp {} R={:4}: c3_sup = {:.6}  ref = {:.6}  slack = {:+.6}  gamma={:.4} zh={:.4} zg={:.4}",
                    p, i + 1, r, c.c3_sup,
                    c.reference_bound.unwrap(),
                    c.c3_sup - c.reference_bound.unwrap(),
                    c.gamma_min, c.zeta_h, c.zeta_g,
                );
            }
        }
    }

    println!();
    let grid = Grid::new(600).unwrap();
    for p in Preset::all() {
        let problem = p.problem();
        let t0 = std::time::Instant::now();
        match solve(&problem, 1.0, grid, &SolveOptions::default()) {
            Ok(pair) => {
                let min1 = pair.u.u1().min();
                let min2 = pair.u.u2().min();
                println!(
                    "{:?}: lambda = {:.9}  iters = {}  int_res = {:.2e}  ode_res = {:.2e}  bc = {:?}  cone_ok = {}  min(u1) = {:+.4e}  min(u2) = {:+.4e}  worst_margin = {:+.3e}  [{:?}]",
                    p, pair.lambda, pair.iterations, pair.integral_residual,
                    pair.ode_residual, pair.bc_residual, pair.cone_ok,
                    min1, min2, pair.worst_iterate_cone_margin, t0.elapsed()
                );
            }
            Err(e) => println!("{p:?}: SOLVE FAILED: {e}"),
        }
    }
}
