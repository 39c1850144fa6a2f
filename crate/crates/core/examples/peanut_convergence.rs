//! Space-time convergence of the peanut reaction–diffusion problem with
//! `dt = h`, for the three second-order schemes.
//!
//! `cargo run --release --example peanut_convergence -- 81 161 321`

use ebetd::driver::config::{Experiment, ExperimentConfig};
use ebetd::driver::peanut::peanut_convergence;
use ebetd::driver::report::table_rows;
use ebetd::steppers::Scheme;

fn main() -> ebetd::Result<()> {
    let mut ns: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if ns.is_empty() {
        ns = vec![41, 81, 161];
    }
    let mut cfg = ExperimentConfig::defaults(Experiment::RdPeanutConvergence);
    for scheme in [Scheme::Cn, Scheme::Etd2, Scheme::Etd2Rk] {
        cfg.scheme = scheme;
        let rows = peanut_convergence(&cfg, &ns)?;
        let (header, body) = table_rows(&rows);
        println!("{} to t = {}", scheme.name(), cfg.t_end);
        println!("  {}", header.join("\t"));
        for r in body {
            println!("  {}", r.join("\t"));
        }
    }
    Ok(())
}
