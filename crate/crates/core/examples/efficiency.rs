//! Wall time of the time loop for Crank–Nicolson (one CG solve per step)
//! against ETD2 (one Krylov φ-combination per step) and ETD2RK (two).
//!
//! `cargo run --release --example efficiency -- 301`

use ebetd::driver::config::{Experiment, ExperimentConfig};
use ebetd::driver::peanut::peanut_efficiency;
use ebetd::steppers::Scheme;

fn main() -> ebetd::Result<()> {
    let mut cfg = ExperimentConfig::defaults(Experiment::RdPeanutEfficiency);
    cfg.n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(301);
    println!("n = {}, dt = {:?}, t_end = {}", cfg.n, cfg.dt, cfg.t_end);
    for r in peanut_efficiency(&cfg, &[Scheme::Cn, Scheme::Etd2, Scheme::Etd2Rk])? {
        let e = r.outcome.norms().map_or(f64::NAN, |n| n.l_2);
        println!(
            "{:<7} {:>4} steps {:>8.3} s  ({} Krylov matvecs, {} CG iterations, l_2 error {e:.2e})",
            r.scheme.name(),
            r.steps,
            r.loop_seconds,
            r.stats.krylov_matvecs,
            r.stats.cg_iterations
        );
    }
    Ok(())
}
