//! Oracles and fixtures shared by the integration tests and the acceptance
//! suite.
#![allow(dead_code)]

use ebetd::driver::report::fitted_slope;
use ebetd::geometry::{shapes, LevelSetField, UniformGrid2D};
use ebetd::levelset::{advect_subcycled, crossings};
use ebetd::phifun::KrylovOptions;
use ebetd::sparse::SymSparseMatrix;
use ebetd::steppers::{
    Forcing, Scheme, SemiDiscreteSystem, StateForcing, Stepper, StepperOptions, StepperState, TimeForcing,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Dense symmetric matrix with spectrum in `[lo, 0]`, both ends attained.
pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, lo: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let q = g.qr().q();
    let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..0.0)).collect();
    d[0] = lo;
    d[1] = 0.0;
    let a = &q * DMatrix::from_diagonal(&DVector::from_vec(d)) * q.transpose();
    (&a + a.transpose()) * 0.5
}

/// Negative semidefinite sparse system: a weighted path-graph Laplacian
/// minus a nonnegative diagonal.
pub fn random_system(rng: &mut ChaCha8Rng, n: usize) -> SymSparseMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, -rng.gen_range(0.0..5.0)));
    }
    for i in 0..n - 1 {
        let w = rng.gen_range(0.1..50.0);
        t.push((i, i, -w));
        t.push((i + 1, i + 1, -w));
        t.push((i, i + 1, w));
        t.push((i + 1, i, w));
    }
    SymSparseMatrix::from_triplets(n, &t)
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let r: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    d / r.max(f64::MIN_POSITIVE)
}

pub fn tight_stepper_options() -> StepperOptions {
    StepperOptions {
        krylov: KrylovOptions::with_tolerance(1e-13),
        cg_tol: 1e-14,
        ..Default::default()
    }
}

const T_END: f64 = 2.0;
const U0: f64 = 0.5;

/// `u' = −u + 2u(1 − u/3)`, a logistic law with rate 1 and capacity 3/2.
fn logistic_exact(t: f64) -> f64 {
    let k = 1.5;
    k / (1.0 + (k / U0 - 1.0) * (-t).exp())
}

/// `u' = −u + cos t`.
fn linear_exact(t: f64) -> f64 {
    0.5 * (t.cos() + t.sin()) + (U0 - 0.5) * (-t).exp()
}

fn scalar_run(scheme: Scheme, f: &dyn Forcing, dt: f64) -> f64 {
    let c = SymSparseMatrix::from_triplets(1, &[(0, 0, -1.0)]);
    let sys = SemiDiscreteSystem::new(&c, f);
    let mut s = Stepper::new(scheme, tight_stepper_options());
    let mut st = StepperState::new(vec![U0], 0.0);
    let n = (T_END / dt).round() as usize;
    for _ in 0..n {
        s.step(&sys, &mut st, dt).unwrap();
    }
    st.u[0]
}

/// Fitted dt-sweep slope of `scheme` on a scalar problem with a closed-form
/// solution. CN rejects state-dependent forcing and gets the linear
/// problem; on that problem ETD3RK would superconverge, so everything else
/// runs the logistic one.
pub fn observed_order(scheme: Scheme) -> f64 {
    let dts = [0.1, 0.05, 0.025, 0.0125];
    let logistic = StateForcing(|u: &[f64], _t: f64, out: &mut [f64]| out[0] = 2.0 * u[0] * (1.0 - u[0] / 3.0));
    let linear = TimeForcing(|t: f64, out: &mut [f64]| out[0] = t.cos());
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            if scheme == Scheme::Cn {
                (scalar_run(scheme, &linear, dt) - linear_exact(T_END)).abs()
            } else {
                (scalar_run(scheme, &logistic, dt) - logistic_exact(T_END)).abs()
            }
        })
        .collect();
    fitted_slope(&dts, &errs)
}

/// Largest radial error of the zero-level crossings after advecting a
/// circle once around the origin with `v = (−y, x)`.
pub fn rotation_error(cells: usize) -> f64 {
    let (center, r) = ([0.3, 0.0], 0.4);
    let g = UniformGrid2D::square(-1.0, 1.0, cells).unwrap();
    let ls = g.sample(&shapes::circle(center, r));
    let v: Vec<[f64; 2]> = (0..g.len())
        .map(|k| {
            let p = g.point(k);
            [-p[1], p[0]]
        })
        .collect();
    let (out, _) = advect_subcycled(&ls, &v, 2.0 * std::f64::consts::PI).unwrap();
    max_radial_error(&out, center, r)
}

pub fn max_radial_error(ls: &LevelSetField, center: [f64; 2], r: f64) -> f64 {
    crossings(ls)
        .unwrap()
        .iter()
        .map(|c| ((c.point[0] - center[0]).hypot(c.point[1] - center[1]) - r).abs())
        .fold(0.0, f64::max)
}

/// Largest displacement, in cells, of any zero crossing of `after` from the
/// nearest crossing of `before` on the same grid line. A crossing on a line
/// that `before` does not cut (a near-tangent line) is measured against the
/// nearest crossing point of `before` in the plane.
pub fn crossing_drift_cells(before: &LevelSetField, after: &LevelSetField) -> f64 {
    let g = before.grid;
    let key = |c: &ebetd::geometry::BoundaryCrossing| {
        let (i, j) = g.ij(c.inside);
        match c.axis {
            ebetd::geometry::Axis::X => (0u8, j),
            ebetd::geometry::Axis::Y => (1u8, i),
        }
    };
    let reference = crossings(before).unwrap();
    crossings(after)
        .unwrap()
        .iter()
        .map(|c| {
            let same_line = reference
                .iter()
                .filter(|r| key(r) == key(c))
                .map(|r| (r.gamma_coord - c.gamma_coord).abs())
                .fold(f64::INFINITY, f64::min);
            if same_line.is_finite() {
                same_line
            } else {
                reference
                    .iter()
                    .map(|r| (r.point[0] - c.point[0]).hypot(r.point[1] - c.point[1]))
                    .fold(f64::INFINITY, f64::min)
            }
        })
        .fold(0.0, f64::max)
        / g.h
}
