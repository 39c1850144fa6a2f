//! Temporal order of every stepper on scalar problems, and algebraic
//! identities between the multistep family and ETD1/ETD2.

mod common;

use common::{observed_order, random_system, rel_diff, tight_stepper_options as tight};
use ebetd::phifun::phi_combination_dense;
use ebetd::steppers::{Scheme, SemiDiscreteSystem, StateForcing, Stepper, StepperState, TimeForcing};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn every_scheme_reaches_its_nominal_order() {
    for scheme in Scheme::ALL {
        let slope = observed_order(scheme);
        let nominal = scheme.order() as f64;
        assert!(
            (slope - nominal).abs() <= 0.25,
            "{scheme}: slope {slope:.3}, nominal {nominal}"
        );
    }
}

#[test]
fn multistep_collapses_to_etd1_and_etd2() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let n = rng.gen_range(2..=100);
        let c = random_system(&mut rng, n);
        let shift: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let forcing = StateForcing(move |u: &[f64], t: f64, out: &mut [f64]| {
            for i in 0..u.len() {
                out[i] = u[i].sin() + shift[i] * t.cos();
            }
        });
        let sys = SemiDiscreteSystem::new(&c, &forcing);
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut st = StepperState::new(u, 0.3);
        st.history
            .push_front((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let dt = rng.gen_range(1e-3..0.5);
        let mut s = Stepper::new(Scheme::Etd2, tight());
        let ms1 = s.multistep_update(&sys, &st, dt, 1).unwrap();
        let e1 = s.etd1_update(&sys, &st, dt).unwrap();
        assert!(rel_diff(&ms1, &e1) <= 1e-12);
        let ms2 = s.multistep_update(&sys, &st, dt, 2).unwrap();
        let e2 = s.etd2_update(&sys, &st, dt).unwrap();
        assert!(rel_diff(&ms2, &e2) <= 1e-12);
    }
}

#[test]
fn etd_schemes_are_exact_for_constant_forcing() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 40;
    let c = random_system(&mut rng, n);
    let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let gf = g.clone();
    let forcing = TimeForcing(move |_t: f64, out: &mut [f64]| out.copy_from_slice(&gf));
    let sys = SemiDiscreteSystem::new(&c, &forcing);
    let u0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let dt = 0.05;
    let steps = 6;
    // u(t) = e^{tC}u0 + t φ1(tC) g
    let a = c.to_dense() * (dt * steps as f64);
    let tg: Vec<f64> = g.iter().map(|v| v * dt * steps as f64).collect();
    let exact = phi_combination_dense(&a, &[&u0, &tg]).unwrap();
    for scheme in [
        Scheme::Etd1,
        Scheme::Etd2,
        Scheme::EtdMs3,
        Scheme::EtdMs4,
        Scheme::Etd2Rk,
        Scheme::Etd3Rk,
        Scheme::Etd4Rk,
    ] {
        let mut s = Stepper::new(scheme, tight());
        let mut st = StepperState::new(u0.clone(), 0.0);
        for _ in 0..steps {
            s.step(&sys, &mut st, dt).unwrap();
        }
        let e = rel_diff(&st.u, &exact);
        assert!(e <= 1e-10, "{scheme}: {e:e}");
    }
}
