//! One-shot coupled-MAC probe: run a single symmetric gain and print the
//! verdict. Used to bracket the (3,6,L,w) threshold at chosen Monte-Carlo
//! settings without rebuilding the test suite.
//!
//! Usage: mac_probe <h> <mc> <trend_window> <max_iter> <seed> [L w]

use coupled_de_core::densities::Grid;
use coupled_de_core::ensembles::CoupledSpec;
use coupled_de_core::mac::{run_mac_coupled, MacSettings, MacSpec};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let h: f64 = args[1].parse().unwrap();
    let mc: usize = args[2].parse().unwrap();
    let window: usize = args[3].parse().unwrap();
    let max_iter: usize = args[4].parse().unwrap();
    let seed: u64 = args[5].parse().unwrap();
    let big_l: usize = args.get(6).map_or(32, |s| s.parse().unwrap());
    let w: usize = args.get(7).map_or(4, |s| s.parse().unwrap());

    let grid = Grid::new(20.0, 512).unwrap();
    let cspec = CoupledSpec::new(3, 6, big_l, w).unwrap();
    let spec = MacSpec::symmetric(h, mc, seed).unwrap();
    let settings = MacSettings {
        max_iterations: max_iter,
        trend_window: window,
        ..MacSettings::default()
    };
    let t0 = Instant::now();
    let run = run_mac_coupled(&grid, cspec, &spec, &settings, 0).unwrap();
    println!(
        "h={h} mc={mc} window={window} seed={seed} L={big_l} w={w} => converged={} its={} pe={:.3e} [{:.0}s]",
        run.converged,
        run.iterations,
        run.error_prob,
        t0.elapsed().as_secs_f64()
    );
}
