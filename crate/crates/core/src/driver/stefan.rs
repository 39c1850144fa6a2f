//! Free-boundary population run: logistic growth inside a domain whose
//! boundary moves with velocity `−μ∇u`.
//!
//! Each step extends the interface velocity, advects and reinitializes the
//! level set, extrapolates the solution onto the new domain, reassembles the
//! operator there and takes one ETD2 step.

use crate::driver::config::ExperimentConfig;
use crate::driver::output::{write_csv_table, write_field_dump};
use crate::driver::problems::stefan;
use crate::ebpoisson::{EmbeddedOperator, ZeroDirichlet};
use crate::error::{Error, Result};
use crate::geometry::{Axis, BoundaryCrossing, LevelSet, LevelSetField, Point, PointClass, UniformGrid2D};
use crate::levelset::{
    advect_subcycled, crossings, extend_speed, extrapolate_quadratic, interface_metrics, reinitialize, CrossingSample,
    InterfaceMetrics, DEFAULT_EXTENSION_ITERATIONS, DEFAULT_REINIT_ITERATIONS,
};
use crate::phifun::KrylovOptions;
use crate::steppers::{Scheme, SemiDiscreteSystem, StateForcing, Stepper, StepperOptions, StepperState};

/// Cells between the box rim and the nearest admissible inside node; the
/// WENO stencils need three of them.
pub const RIM_MARGIN_CELLS: usize = 4;

/// Front displacement, in cells, accumulated between reinitializations.
/// Advection only degrades `|∇ρ|` in proportion to how far the front has
/// moved; reinitializing a field that is already a distance function only
/// adds drift.
pub const REINIT_DISPLACEMENT_CELLS: f64 = 0.5;

/// Smallest `|n·e_axis|` at which an axis crossing yields a speed sample.
const MIN_AXIS_NORMAL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StefanParams {
    pub diffusion: f64,
    pub mobility: f64,
    pub growth_a: f64,
    pub growth_b: f64,
}

impl Default for StefanParams {
    fn default() -> Self {
        Self {
            diffusion: stefan::DIFFUSION,
            mobility: stefan::MOBILITY,
            growth_a: stefan::GROWTH_A,
            growth_b: stefan::GROWTH_B,
        }
    }
}

impl StefanParams {
    pub fn reaction(&self, u: f64) -> f64 {
        u * (self.growth_a - self.growth_b * u)
    }
}

/// Diagnostics after one step (step 0 is the initial state).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StefanRecord {
    pub step: usize,
    pub t: f64,
    pub metrics: InterfaceMetrics,
    pub max_u: f64,
    pub min_u: f64,
    /// `∫u` by the nodal rule over the dofs.
    pub mass: f64,
    /// `∫∫ u(a − bu)` from the start, trapezoidal in time.
    pub reaction_integral: f64,
    pub dofs: usize,
    pub advect_substeps: usize,
    /// Newly covered nodes the extrapolation could not reach (set to 0).
    pub missed: usize,
}

#[derive(Debug, Clone)]
pub struct StefanRun {
    pub h: f64,
    pub dt: f64,
    pub records: Vec<StefanRecord>,
    pub final_level_set: LevelSetField,
    /// Final solution on the grid, zero outside the domain.
    pub final_u: Vec<f64>,
}

impl StefanRun {
    pub fn last(&self) -> &StefanRecord {
        self.records.last().expect("a run records its initial state")
    }
}

/// The square start of the population model with its default parameters.
pub fn run_stefan_square(cfg: &ExperimentConfig) -> Result<StefanRun> {
    run_stefan(cfg, StefanParams::default())
}

pub fn run_stefan(cfg: &ExperimentConfig, params: StefanParams) -> Result<StefanRun> {
    if cfg.scheme.history_len() > 1 {
        return Err(Error::Unsupported(format!(
            "moving-domain runs carry at most one history term; '{}' needs {}",
            cfg.scheme,
            cfg.scheme.history_len()
        )));
    }
    let grid = UniformGrid2D::square(stefan::BOX.0, stefan::BOX.1, cfg.n - 1)?;
    let h = grid.h;
    let mut ls = LevelSetField::new(grid, grid.sample_fn(stefan::rho0))?;
    check_rim(&ls, 0.0)?;
    let beta = move |_: Point| params.diffusion;
    let mut op = EmbeddedOperator::assemble(&ls, &beta, &ZeroDirichlet, 0.0)?;
    let mut u = op.sample(stefan::u0);
    // u_{n−1} on the current dofs, once one step has been taken.
    let mut prev: Option<Vec<f64>> = None;

    let dt_req = cfg.dt.unwrap_or(h / 4.0);
    let steps = ((cfg.t_end / dt_req) - 1e-9).ceil().max(1.0) as usize;
    let dt = cfg.t_end / steps as f64;
    let options = StepperOptions {
        krylov: KrylovOptions::with_tolerance(cfg.krylov_tol),
        cg_tol: cfg.cg_tol,
        ..Default::default()
    };
    let mut stepper = Stepper::new(cfg.scheme, options);
    let forcing = StateForcing(move |u: &[f64], _t: f64, out: &mut [f64]| {
        for (o, v) in out.iter_mut().zip(u) {
            *o = params.reaction(*v);
        }
    });

    let production = |u: &[f64]| h * h * u.iter().map(|v| params.reaction(*v)).sum::<f64>();
    let mut records = vec![record(0, 0.0, &ls, &u, h, 0.0, 0, 0)];
    let mut reaction_integral = 0.0;
    let mut last_production = production(&u);
    let dump = |step: usize, op: &EmbeddedOperator, ls: &LevelSetField, u: &[f64], t: f64| -> Result<()> {
        if let Some(dir) = &cfg.out_dir {
            if cfg.dump_every > 0 && step.is_multiple_of(cfg.dump_every) {
                let field = op.prolong(u, &ZeroDirichlet, t, 0.0);
                write_field_dump(
                    &grid,
                    &field,
                    &ls.values,
                    &dir.join(format!("stefan_square_{step:06}.vtk")),
                )?;
            }
        }
        Ok(())
    };
    dump(0, &op, &ls, &u, 0.0)?;

    let mut t = 0.0;
    let mut displacement = 0.0;
    for step in 1..=steps {
        let u_nodal = op.prolong(&u, &ZeroDirichlet, t, 0.0);

        // Move the boundary.
        let mut substeps = 0;
        let new_ls = if params.mobility == 0.0 {
            ls.clone()
        } else {
            let velocity = interface_velocity(&ls, &op, &u_nodal, params.mobility)?;
            if velocity.iter().all(|v| v[0] == 0.0 && v[1] == 0.0) {
                ls.clone()
            } else {
                let (moved, n_sub) = advect_subcycled(&ls, &velocity, dt)?;
                substeps = n_sub;
                check_rim(&moved, t + dt)?;
                displacement += dt * velocity.iter().fold(0.0f64, |m, v| m.max(v[0].hypot(v[1])));
                if displacement >= REINIT_DISPLACEMENT_CELLS * h {
                    displacement = 0.0;
                    reinitialize(&moved, DEFAULT_REINIT_ITERATIONS)?
                } else {
                    moved
                }
            }
        };
        check_rim(&new_ls, t + dt)?;

        // Carry u_n and u_{n−1} onto the new domain.
        let valid: Vec<bool> = op.classes.iter().map(|c| *c != PointClass::Outside).collect();
        let new_op = EmbeddedOperator::assemble(&new_ls, &beta, &ZeroDirichlet, t)?;
        let (u_new, missed) = transfer(&ls, &new_op, &u_nodal, &valid)?;
        let prev_new = match &prev {
            Some(p) => {
                let p_nodal = op.prolong(p, &ZeroDirichlet, t, 0.0);
                Some(transfer(&ls, &new_op, &p_nodal, &valid)?.0)
            }
            None => None,
        };

        let sys = SemiDiscreteSystem::new(&new_op.matrix, &forcing);
        let mut state = StepperState::new(u_new.clone(), t);
        if let (Some(p), Scheme::Etd2) = (&prev_new, cfg.scheme) {
            state
                .history
                .push_front(p.iter().map(|v| params.reaction(*v)).collect());
        }
        stepper.step(&sys, &mut state, dt)?;

        prev = Some(u_new);
        u = state.u;
        t = state.t;
        ls = new_ls;
        op = new_op;
        let p = production(&u);
        reaction_integral += 0.5 * dt * (last_production + p);
        last_production = p;
        records.push(record(step, t, &ls, &u, h, reaction_integral, substeps, missed));
        dump(step, &op, &ls, &u, t)?;
    }

    if let Some(dir) = &cfg.out_dir {
        let header = [
            "step",
            "t",
            "area",
            "perimeter",
            "isoperimetric_ratio",
            "max_u",
            "min_u",
            "mass",
        ];
        let body: Vec<Vec<String>> = records
            .iter()
            .map(|r| {
                vec![
                    r.step.to_string(),
                    format!("{:.6e}", r.t),
                    format!("{:.10e}", r.metrics.area),
                    format!("{:.10e}", r.metrics.perimeter),
                    format!("{:.10e}", r.metrics.isoperimetric_ratio),
                    format!("{:.10e}", r.max_u),
                    format!("{:.10e}", r.min_u),
                    format!("{:.10e}", r.mass),
                ]
            })
            .collect();
        write_csv_table(&header, &body, &dir.join("stefan_square_metrics.csv"))?;
    }
    let final_u = op.prolong(&u, &ZeroDirichlet, t, 0.0);
    Ok(StefanRun {
        h,
        dt,
        records,
        final_level_set: ls,
        final_u,
    })
}

#[allow(clippy::too_many_arguments)]
fn record(
    step: usize,
    t: f64,
    ls: &LevelSetField,
    u: &[f64],
    h: f64,
    reaction_integral: f64,
    advect_substeps: usize,
    missed: usize,
) -> StefanRecord {
    StefanRecord {
        step,
        t,
        metrics: interface_metrics(ls),
        max_u: u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min_u: u.iter().copied().fold(f64::INFINITY, f64::min),
        mass: h * h * u.iter().sum::<f64>(),
        reaction_integral,
        dofs: u.len(),
        advect_substeps,
        missed,
    }
}

fn check_rim(ls: &LevelSetField, time: f64) -> Result<()> {
    let g = &ls.grid;
    let m = RIM_MARGIN_CELLS;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let near = i < m || j < m || i + m >= g.nx || j + m >= g.ny;
            if near && ls.at(i, j) <= 0.0 {
                return Err(Error::InterfaceAtRim { time });
            }
        }
    }
    Ok(())
}

/// Quadratically extrapolates a nodal field trusted on `valid` to every
/// dof of `new_op`, clamping at zero.
fn transfer(ls: &LevelSetField, new_op: &EmbeddedOperator, nodal: &[f64], valid: &[bool]) -> Result<(Vec<f64>, usize)> {
    let g = &new_op.grid;
    let mut targets = vec![false; g.len()];
    for &node in &new_op.dof_nodes {
        if !valid[node] {
            targets[node] = true;
        }
    }
    let mut missed = 0;
    let field = if targets.iter().any(|&b| b) {
        let (f, m) = extrapolate_quadratic(ls, nodal, valid, &targets)?;
        missed = m;
        f
    } else {
        nodal.to_vec()
    };
    let values = new_op
        .dof_nodes
        .iter()
        .map(|&k| {
            let v = field[k];
            if v.is_finite() {
                v.max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok((values, missed))
}

/// Inward derivative at the boundary from `u(0) = 0` and up to two dof
/// samples at distances `s1 < s2`.
fn inward_derivative(s1: f64, u1: f64, second: Option<(f64, f64)>) -> f64 {
    match second {
        Some((s2, u2)) => (u1 * s2 * s2 - u2 * s1 * s1) / (s1 * s2 * (s2 - s1)),
        None => u1 / s1,
    }
}

/// Velocity `−μ ∂u/∂n · n` sampled at crossings and extended to every node.
fn interface_velocity(ls: &LevelSetField, op: &EmbeddedOperator, u_nodal: &[f64], mobility: f64) -> Result<Vec<Point>> {
    let mut vx = Vec::new();
    let mut vy = Vec::new();
    for c in crossings(ls)? {
        if let Some(v) = crossing_velocity(ls, op, u_nodal, &c, mobility) {
            vx.push(CrossingSample {
                crossing: c,
                value: v[0],
            });
            vy.push(CrossingSample {
                crossing: c,
                value: v[1],
            });
        }
    }
    let n = ls.grid.len();
    if vx.is_empty() {
        return Ok(vec![[0.0, 0.0]; n]);
    }
    let ex = extend_speed(ls, &vx, DEFAULT_EXTENSION_ITERATIONS)?;
    let ey = extend_speed(ls, &vy, DEFAULT_EXTENSION_ITERATIONS)?;
    Ok((0..n).map(|k| [ex[k], ey[k]]).collect())
}

fn crossing_velocity(
    ls: &LevelSetField,
    op: &EmbeddedOperator,
    u_nodal: &[f64],
    c: &BoundaryCrossing,
    mobility: f64,
) -> Option<Point> {
    let g = &ls.grid;
    let gr = ls.gradient(c.point);
    let m = gr[0].hypot(gr[1]);
    if !(m > 0.0) {
        return None;
    }
    let normal = [gr[0] / m, gr[1] / m];
    let a = match c.axis {
        Axis::X => 0,
        Axis::Y => 1,
    };
    if normal[a].abs() < MIN_AXIS_NORMAL {
        return None;
    }
    let (ii, ji) = g.ij(c.inside);
    let (io, jo) = g.ij(c.outside);
    let outward = if (io, jo) > (ii, ji) { 1isize } else { -1 };
    // Walk inward past the node next to the boundary, whose value is a
    // ghost reconstruction.
    let step_in = |k: usize, times: isize| -> Option<usize> {
        let (i, j) = g.ij(k);
        let (di, dj) = if a == 0 {
            (-outward * times, 0)
        } else {
            (0, -outward * times)
        };
        let (ni, nj) = (i as isize + di, j as isize + dj);
        (ni >= 0 && nj >= 0 && (ni as usize) < g.nx && (nj as usize) < g.ny).then(|| g.index(ni as usize, nj as usize))
    };
    let dof_value = |k: Option<usize>| k.and_then(|k| op.node_dofs[k].map(|_| u_nodal[k]));
    let s1 = c.distance + g.h;
    let u1 = dof_value(step_in(c.inside, 1))?;
    let second = dof_value(step_in(c.inside, 2)).map(|u2| (s1 + g.h, u2));
    let inward = inward_derivative(s1, u1, second);
    let du_daxis = -inward * outward as f64;
    let du_dn = du_daxis / normal[a];
    let speed = -mobility * du_dn;
    Some([speed * normal[0], speed * normal[1]])
}
