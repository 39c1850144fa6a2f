use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ebetd::driver::config::{Experiment, ExperimentConfig};
use ebetd::driver::peanut::{peanut_convergence, peanut_efficiency, peanut_stability, RunOutcome};
use ebetd::driver::poisson::poisson_sweep;
use ebetd::driver::report::{fitted_slope, table_rows, ErrorReport};
use ebetd::driver::stefan::run_stefan_square;
use ebetd::steppers::Scheme;
use ebetd::{Error, Result};

/// Embedded-boundary ETD experiments.
#[derive(Parser, Debug)]
#[command(name = "ebetd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Elliptic convergence sweep on the virus outline.
    PoissonVirus {
        #[command(flatten)]
        common: Common,
        /// Node counts per axis; defaults to `--n` alone.
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<usize>,
    },
    /// Peanut reaction-diffusion convergence table with dt = h.
    RdPeanutConvergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<usize>,
    },
    /// Peanut stability sweep over schemes and time steps.
    RdPeanutStability {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "etd2,etd2rk,cn,rk4")]
        schemes: Vec<Scheme>,
        #[arg(long, value_delimiter = ',', default_value = "1e-4,1e-3,1e-2,0.05,0.1")]
        dts: Vec<f64>,
    },
    /// Wall time of the time loop for several schemes.
    RdPeanutEfficiency {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "cn,etd2,etd2rk")]
        schemes: Vec<Scheme>,
    },
    /// Free-boundary run from the square initial domain.
    StefanSquare {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Flat `key = value` file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long = "krylov-tol")]
    krylov_tol: Option<f64>,
    #[arg(long = "cg-tol")]
    cg_tol: Option<f64>,
    /// Output directory for CSV tables and VTK dumps.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "dump-every")]
    dump_every: Option<usize>,
}

impl Common {
    fn resolve(&self, experiment: Experiment) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::defaults(experiment);
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
            if cfg.experiment != experiment {
                return Err(Error::Config(format!(
                    "{} configures '{}' but the subcommand is '{experiment}'",
                    path.display(),
                    cfg.experiment
                )));
            }
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.dt {
            cfg.dt = Some(v);
        }
        if let Some(v) = self.t_end {
            cfg.t_end = v;
        }
        if let Some(v) = self.scheme {
            cfg.scheme = v;
        }
        if let Some(v) = self.krylov_tol {
            cfg.krylov_tol = v;
        }
        if let Some(v) = self.cg_tol {
            cfg.cg_tol = v;
        }
        if let Some(v) = &self.out {
            cfg.out_dir = Some(v.clone());
        }
        if let Some(v) = self.dump_every {
            cfg.dump_every = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_table(title: &str, rows: &[ErrorReport]) {
    let (header, body) = table_rows(rows);
    println!("{title}");
    println!("{}", header.join("\t"));
    for r in body {
        println!("{}", r.join("\t"));
    }
    if rows.len() > 1 {
        let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let li: Vec<f64> = rows.iter().map(|r| r.l_inf).collect();
        let l2: Vec<f64> = rows.iter().map(|r| r.l_2).collect();
        println!(
            "fitted slope: l_inf {:.3}, l_2 {:.3}",
            fitted_slope(&hs, &li),
            fitted_slope(&hs, &l2)
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::PoissonVirus { common, sweep } => {
            let cfg = common.resolve(Experiment::PoissonVirus)?;
            let ns = if sweep.is_empty() { vec![cfg.n] } else { sweep };
            let (sol, grad) = poisson_sweep(&cfg, &ns)?;
            print_table("solution error", &sol);
            print_table("gradient error", &grad);
        }
        Command::RdPeanutConvergence { common, sweep } => {
            let cfg = common.resolve(Experiment::RdPeanutConvergence)?;
            let ns = if sweep.is_empty() { vec![cfg.n] } else { sweep };
            let rows = peanut_convergence(&cfg, &ns)?;
            print_table(&format!("{} at t = {}", cfg.scheme, cfg.t_end), &rows);
        }
        Command::RdPeanutStability { common, schemes, dts } => {
            let cfg = common.resolve(Experiment::RdPeanutStability)?;
            println!("scheme\tdt\tstatus\tl_2");
            for r in peanut_stability(&cfg, &schemes, &dts)? {
                match r.outcome {
                    RunOutcome::Completed(e) => println!("{}\t{:e}\tcompleted\t{:.4e}", r.scheme, r.dt, e.l_2),
                    RunOutcome::BlownUp { time, norm } => {
                        println!("{}\t{:e}\tblowup at t = {time:.4} (norm {norm:.2e})\t-", r.scheme, r.dt)
                    }
                }
            }
        }
        Command::RdPeanutEfficiency { common, schemes } => {
            let cfg = common.resolve(Experiment::RdPeanutEfficiency)?;
            println!("scheme\tn\tsteps\tseconds");
            for r in peanut_efficiency(&cfg, &schemes)? {
                println!("{}\t{}\t{}\t{:.3}", r.scheme, r.n, r.steps, r.loop_seconds);
            }
        }
        Command::StefanSquare { common } => {
            let cfg = common.resolve(Experiment::StefanSquare)?;
            let run = run_stefan_square(&cfg)?;
            let first = &run.records[0];
            let last = run.last();
            println!("steps {} dt {:e} h {:e}", last.step, run.dt, run.h);
            println!(
                "area {:.6} -> {:.6}, isoperimetric ratio {:.4} -> {:.4}, max u {:.4e}",
                first.metrics.area,
                last.metrics.area,
                first.metrics.isoperimetric_ratio,
                last.metrics.isoperimetric_ratio,
                last.max_u
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ebetd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
