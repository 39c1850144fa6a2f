//! Elliptic convergence study on the virus outline.

use crate::driver::config::ExperimentConfig;
use crate::driver::output::{write_csv_table, write_field_dump};
use crate::driver::problems::virus;
use crate::driver::report::{fill_orders, ErrorNorms, ErrorReport};
use crate::ebpoisson::EmbeddedOperator;
use crate::error::Result;
use crate::geometry::{Point, UniformGrid2D};

/// Computational box of the elliptic and peanut problems.
pub const BOX: (f64, f64) = (-1.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonRun {
    pub n: usize,
    pub h: f64,
    pub dofs: usize,
    pub cg_iterations: usize,
    pub solution: ErrorNorms,
    /// Norms of the Euclidean gradient error.
    pub gradient: ErrorNorms,
}

/// Assembles and solves on an `n × n` node grid and measures solution and
/// gradient errors at the computational nodes.
pub fn run_poisson_virus(cfg: &ExperimentConfig) -> Result<PoissonRun> {
    let grid = UniformGrid2D::square(BOX.0, BOX.1, cfg.n - 1)?;
    let shape = virus::geometry();
    let ls = grid.sample(&shape);
    let bc = |p: Point, _t: f64| virus::exact(p);
    let op = EmbeddedOperator::assemble_with_geometry(&ls, &shape, &virus::beta, &bc, 0.0)?;
    let f = op.sample(virus::source);
    let sol = op.solve(&f, cfg.cg_tol)?;
    let exact = op.sample(virus::exact);
    let solution = ErrorNorms::from_errors(sol.x.iter().zip(&exact).map(|(a, b)| a - b), grid.h);
    let grad = op.evaluate_gradient(&sol.x, &bc, 0.0);
    let gradient = ErrorNorms::from_errors(
        grad.iter().enumerate().map(|(d, g)| {
            let e = virus::exact_gradient(op.dof_point(d));
            (g[0] - e[0]).hypot(g[1] - e[1])
        }),
        grid.h,
    );
    if let Some(dir) = &cfg.out_dir {
        let u = op.prolong(&sol.x, &bc, 0.0, 0.0);
        write_field_dump(
            &grid,
            &u,
            &ls.values,
            &dir.join(format!("poisson_virus_n{}.vtk", cfg.n)),
        )?;
    }
    Ok(PoissonRun {
        n: cfg.n,
        h: grid.h,
        dofs: op.n_dofs(),
        cg_iterations: sol.iterations,
        solution,
        gradient,
    })
}

/// Runs every resolution (concurrently) and returns the solution and
/// gradient tables with orders filled in.
pub fn poisson_sweep(cfg: &ExperimentConfig, ns: &[usize]) -> Result<(Vec<ErrorReport>, Vec<ErrorReport>)> {
    let runs: Vec<Result<PoissonRun>> = std::thread::scope(|s| {
        let handles: Vec<_> = ns
            .iter()
            .map(|&n| {
                let mut c = cfg.clone();
                c.n = n;
                s.spawn(move || run_poisson_virus(&c))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("poisson worker panicked"))
            .collect()
    });
    let mut sol = Vec::new();
    let mut grad = Vec::new();
    for r in runs {
        let r = r?;
        let label = format!("{}x{}", r.n, r.n);
        sol.push(ErrorReport::new(label.clone(), r.n, r.h, r.solution));
        grad.push(ErrorReport::new(label, r.n, r.h, r.gradient));
    }
    fill_orders(&mut sol);
    fill_orders(&mut grad);
    if let Some(dir) = &cfg.out_dir {
        for (name, rows) in [
            ("poisson_virus_solution.csv", &sol),
            ("poisson_virus_gradient.csv", &grad),
        ] {
            let (header, body) = crate::driver::report::table_rows(rows);
            write_csv_table(&header, &body, &dir.join(name))?;
        }
    }
    Ok((sol, grad))
}
