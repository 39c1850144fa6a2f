//! Reaction–diffusion runs on the fixed peanut domain: convergence,
//! stability and timing studies.

use std::time::Instant;

use crate::driver::config::ExperimentConfig;
use crate::driver::output::{write_csv_table, write_field_dump};
use crate::driver::poisson::BOX;
use crate::driver::problems::peanut;
use crate::driver::report::{fill_orders, table_rows, ErrorNorms, ErrorReport};
use crate::ebpoisson::EmbeddedOperator;
use crate::error::{Error, Result};
use crate::geometry::{Point, UniformGrid2D};
use crate::phifun::KrylovOptions;
use crate::steppers::{Scheme, SemiDiscreteSystem, StepStats, Stepper, StepperOptions, StepperState, TimeForcing};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunOutcome {
    Completed(ErrorNorms),
    /// The solution norm left the admissible range; a labelled result,
    /// not a failure of the run.
    BlownUp {
        time: f64,
        norm: f64,
    },
}

impl RunOutcome {
    pub fn norms(&self) -> Option<ErrorNorms> {
        match self {
            RunOutcome::Completed(n) => Some(*n),
            RunOutcome::BlownUp { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeanutRun {
    pub scheme: Scheme,
    pub n: usize,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub dofs: usize,
    pub outcome: RunOutcome,
    pub stats: StepStats,
    /// Wall time of the time loop alone.
    pub loop_seconds: f64,
}

impl PeanutRun {
    pub fn label(&self) -> String {
        format!("{}x{}x{}", self.n, self.n, self.steps)
    }
}

/// Integrates `u_t = ∇·(β∇u) + f` with the configured scheme to `t_end`
/// and measures the error against the exact solution.
pub fn run_rd_peanut(cfg: &ExperimentConfig) -> Result<PeanutRun> {
    let grid = UniformGrid2D::square(BOX.0, BOX.1, cfg.n - 1)?;
    let shape = peanut::geometry();
    let ls = grid.sample(&shape);
    let bc = |p: Point, t: f64| peanut::exact(p, t);
    let op = EmbeddedOperator::assemble_with_geometry(&ls, &shape, &peanut::beta, &bc, 0.0)?;
    let points: Vec<Point> = (0..op.n_dofs()).map(|d| op.dof_point(d)).collect();
    let forcing = TimeForcing(|t: f64, out: &mut [f64]| {
        out.copy_from_slice(&op.boundary_load_at(&bc, t));
        for (o, p) in out.iter_mut().zip(&points) {
            *o += peanut::source(*p, t);
        }
    });
    let sys = SemiDiscreteSystem::new(&op.matrix, &forcing);

    let dt_req = cfg.dt_for(grid.h);
    let steps = ((cfg.t_end / dt_req) - 1e-9).ceil().max(1.0) as usize;
    let dt = cfg.t_end / steps as f64;
    let options = StepperOptions {
        krylov: KrylovOptions::with_tolerance(cfg.krylov_tol),
        cg_tol: cfg.cg_tol,
        ..Default::default()
    };
    let mut stepper = Stepper::new(cfg.scheme, options);
    let mut state = StepperState::new(op.sample(|p| peanut::exact(p, 0.0)), 0.0);
    let dump = |state: &StepperState, step: usize| -> Result<()> {
        if let Some(dir) = &cfg.out_dir {
            if cfg.dump_every > 0 && step.is_multiple_of(cfg.dump_every) {
                let u = op.prolong(&state.u, &bc, state.t, 0.0);
                let name = format!("rd_peanut_{}_n{}_{:06}.vtk", cfg.scheme, cfg.n, step);
                write_field_dump(&grid, &u, &ls.values, &dir.join(name))?;
            }
        }
        Ok(())
    };
    dump(&state, 0)?;

    let start = Instant::now();
    let mut outcome = None;
    for step in 1..=steps {
        match stepper.step(&sys, &mut state, dt) {
            Ok(()) => {}
            Err(Error::Blowup { time, norm }) => {
                outcome = Some(RunOutcome::BlownUp { time, norm });
                break;
            }
            Err(e) => return Err(e),
        }
        dump(&state, step)?;
    }
    let loop_seconds = start.elapsed().as_secs_f64();
    let outcome = outcome.unwrap_or_else(|| {
        let t = state.t;
        RunOutcome::Completed(ErrorNorms::from_errors(
            state.u.iter().zip(&points).map(|(u, p)| u - peanut::exact(*p, t)),
            grid.h,
        ))
    });
    Ok(PeanutRun {
        scheme: cfg.scheme,
        n: cfg.n,
        h: grid.h,
        dt,
        steps,
        dofs: op.n_dofs(),
        outcome,
        stats: stepper.stats,
        loop_seconds,
    })
}

fn run_all(configs: Vec<ExperimentConfig>) -> Result<Vec<PeanutRun>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || run_rd_peanut(c))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("peanut worker panicked"))
            .collect()
    })
}

/// Convergence table with `dt = h` over the given node counts.
pub fn peanut_convergence(cfg: &ExperimentConfig, ns: &[usize]) -> Result<Vec<ErrorReport>> {
    let configs = ns
        .iter()
        .map(|&n| {
            let mut c = cfg.clone();
            c.n = n;
            c.dt = None;
            c
        })
        .collect();
    let mut rows = Vec::new();
    for run in run_all(configs)? {
        let norms = run.outcome.norms().ok_or(Error::Blowup {
            time: f64::NAN,
            norm: f64::INFINITY,
        })?;
        rows.push(ErrorReport::new(run.label(), run.n, run.h, norms));
    }
    fill_orders(&mut rows);
    if let Some(dir) = &cfg.out_dir {
        let (header, body) = table_rows(&rows);
        write_csv_table(
            &header,
            &body,
            &dir.join(format!("rd_peanut_convergence_{}.csv", cfg.scheme)),
        )?;
    }
    Ok(rows)
}

/// Every scheme at every time step on one grid.
pub fn peanut_stability(cfg: &ExperimentConfig, schemes: &[Scheme], dts: &[f64]) -> Result<Vec<PeanutRun>> {
    let mut configs = Vec::new();
    for &scheme in schemes {
        for &dt in dts {
            let mut c = cfg.clone();
            c.scheme = scheme;
            c.dt = Some(dt);
            c.dump_every = 0;
            configs.push(c);
        }
    }
    let runs = run_all(configs)?;
    if let Some(dir) = &cfg.out_dir {
        let header = ["scheme", "dt", "steps", "status", "l_inf", "l_2"];
        let body: Vec<Vec<String>> = runs
            .iter()
            .map(|r| {
                let (status, li, l2) = match r.outcome {
                    RunOutcome::Completed(n) => ("completed", format!("{:.4e}", n.l_inf), format!("{:.4e}", n.l_2)),
                    RunOutcome::BlownUp { .. } => ("blowup", "-".into(), "-".into()),
                };
                vec![
                    r.scheme.to_string(),
                    format!("{:e}", r.dt),
                    r.steps.to_string(),
                    status.into(),
                    li,
                    l2,
                ]
            })
            .collect();
        write_csv_table(&header, &body, &dir.join("rd_peanut_stability.csv"))?;
    }
    Ok(runs)
}

/// Sequential timing runs (one at a time so they do not compete).
pub fn peanut_efficiency(cfg: &ExperimentConfig, schemes: &[Scheme]) -> Result<Vec<PeanutRun>> {
    let mut runs = Vec::new();
    for &scheme in schemes {
        let mut c = cfg.clone();
        c.scheme = scheme;
        c.dump_every = 0;
        runs.push(run_rd_peanut(&c)?);
    }
    if let Some(dir) = &cfg.out_dir {
        let header = [
            "scheme",
            "n",
            "dt",
            "steps",
            "seconds",
            "krylov_matvecs",
            "cg_iterations",
        ];
        let body: Vec<Vec<String>> = runs
            .iter()
            .map(|r| {
                vec![
                    r.scheme.to_string(),
                    r.n.to_string(),
                    format!("{:e}", r.dt),
                    r.steps.to_string(),
                    format!("{:.3}", r.loop_seconds),
                    r.stats.krylov_matvecs.to_string(),
                    r.stats.cg_iterations.to_string(),
                ]
            })
            .collect();
        write_csv_table(&header, &body, &dir.join("rd_peanut_efficiency.csv"))?;
    }
    Ok(runs)
}
