//! Time-step robustness on the fine peanut grid: the exponential schemes
//! and Crank–Nicolson stay bounded at large steps where explicit RK4 blows
//! up.
//!
//! `cargo run --release --example stability -- 201`

use ebetd::driver::config::{Experiment, ExperimentConfig};
use ebetd::driver::peanut::{peanut_stability, RunOutcome};
use ebetd::steppers::Scheme;

fn main() -> ebetd::Result<()> {
    let mut cfg = ExperimentConfig::defaults(Experiment::RdPeanutStability);
    if let Some(n) = std::env::args().nth(1).and_then(|a| a.parse().ok()) {
        cfg.n = n;
    }
    let schemes = [Scheme::Etd2, Scheme::Etd2Rk, Scheme::Cn, Scheme::Rk4];
    let dts = [1e-3, 1e-2, 0.05, 0.1];
    println!("n = {}, t_end = {}", cfg.n, cfg.t_end);
    for r in peanut_stability(&cfg, &schemes, &dts)? {
        let status = match r.outcome {
            RunOutcome::Completed(e) => format!("l_2 error {:.3e}", e.l_2),
            RunOutcome::BlownUp { time, norm } => format!("blew up at t = {time:.4} (norm {norm:.1e})"),
        };
        println!("{:<7} dt {:<6} {status}", r.scheme.name(), r.dt);
    }
    Ok(())
}
