//! Temporal convergence of every stepper on the scalar logistic law
//! `u' = −u + 2u(1 − u/3)`, whose solution is known in closed form.
//!
//! `cargo run --release --example scheme_orders`

use ebetd::driver::report::fitted_slope;
use ebetd::sparse::SymSparseMatrix;
use ebetd::steppers::{
    Forcing, Scheme, SemiDiscreteSystem, StateForcing, Stepper, StepperOptions, StepperState, TimeForcing,
};

const T: f64 = 2.0;

fn integrate(scheme: Scheme, forcing: &dyn Forcing, dt: f64) -> ebetd::Result<f64> {
    let c = SymSparseMatrix::from_triplets(1, &[(0, 0, -1.0)]);
    let sys = SemiDiscreteSystem::new(&c, forcing);
    let mut stepper = Stepper::new(scheme, StepperOptions::default());
    let mut state = StepperState::new(vec![0.5], 0.0);
    for _ in 0..(T / dt).round() as usize {
        stepper.step(&sys, &mut state, dt)?;
    }
    Ok(state.u[0])
}

fn main() -> ebetd::Result<()> {
    let logistic = StateForcing(|u: &[f64], _t: f64, out: &mut [f64]| out[0] = 2.0 * u[0] * (1.0 - u[0] / 3.0));
    let logistic_exact = 1.5 / (1.0 + 2.0 * (-T).exp());
    // Crank–Nicolson accepts only time-dependent forcing: u' = −u + cos t.
    let linear = TimeForcing(|t: f64, out: &mut [f64]| out[0] = t.cos());
    let linear_exact = 0.5 * (T.cos() + T.sin());
    let dts = [0.1, 0.05, 0.025, 0.0125];
    println!("{:<8} {:>5} {:>8}   errors", "scheme", "order", "fitted");
    for scheme in Scheme::ALL {
        let mut errs = Vec::new();
        for &dt in &dts {
            let e = if scheme == Scheme::Cn {
                integrate(scheme, &linear, dt)? - linear_exact
            } else {
                integrate(scheme, &logistic, dt)? - logistic_exact
            };
            errs.push(e.abs());
        }
        let shown: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
        println!(
            "{:<8} {:>5} {:>8.3}   {}",
            scheme.name(),
            scheme.order(),
            fitted_slope(&dts, &errs),
            shown.join(" ")
        );
    }
    Ok(())
}
