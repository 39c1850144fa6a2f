//! Time integrators for the semi-discrete system `U' = C U + F(U, t)`.
//!
//! Exponential schemes evaluate every stage as one φ-combination
//! `Σ_k φ_k(τ C) v_k` (integral normalization, `φ_k(0) = 1/k`). Crank–Nicolson
//! and classical RK4 are included as baselines.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::phifun::{phi_combination_with_stats, KrylovOptions, PhiCombinationRequest};
use crate::sparse::{cg_solve_from, ic0_factor, Ic0Factor, SymSparseMatrix, DEFAULT_CG_TOL};

/// Right-hand side `F(U, t)` of the semi-discrete system.
pub trait Forcing: Sync {
    fn eval(&self, u: &[f64], t: f64, out: &mut [f64]);

    /// True when `F` depends on `t` only.
    fn is_state_independent(&self) -> bool {
        false
    }
}

/// `F(t)` given as a closure writing into its output slice.
pub struct TimeForcing<F>(pub F);

impl<F> Forcing for TimeForcing<F>
where
    F: Fn(f64, &mut [f64]) + Sync,
{
    fn eval(&self, _u: &[f64], t: f64, out: &mut [f64]) {
        (self.0)(t, out)
    }

    fn is_state_independent(&self) -> bool {
        true
    }
}

/// `F(U, t)` given as a closure.
pub struct StateForcing<F>(pub F);

impl<F> Forcing for StateForcing<F>
where
    F: Fn(&[f64], f64, &mut [f64]) + Sync,
{
    fn eval(&self, u: &[f64], t: f64, out: &mut [f64]) {
        (self.0)(u, t, out)
    }
}

/// `U' = C U + F(U, t)` with a symmetric sparse `C`.
#[derive(Clone, Copy)]
pub struct SemiDiscreteSystem<'a> {
    pub linear: &'a SymSparseMatrix,
    pub forcing: &'a dyn Forcing,
}

impl<'a> SemiDiscreteSystem<'a> {
    pub fn new(linear: &'a SymSparseMatrix, forcing: &'a dyn Forcing) -> Self {
        Self { linear, forcing }
    }

    pub fn dim(&self) -> usize {
        self.linear.n()
    }

    fn f(&self, u: &[f64], t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.forcing.eval(u, t, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Etd1,
    Etd2,
    EtdMs3,
    EtdMs4,
    Etd2Rk,
    Etd3Rk,
    Etd4Rk,
    Cn,
    Rk4,
}

impl Scheme {
    pub const ALL: [Scheme; 9] = [
        Scheme::Etd1,
        Scheme::Etd2,
        Scheme::EtdMs3,
        Scheme::EtdMs4,
        Scheme::Etd2Rk,
        Scheme::Etd3Rk,
        Scheme::Etd4Rk,
        Scheme::Cn,
        Scheme::Rk4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Etd1 => "etd1",
            Scheme::Etd2 => "etd2",
            Scheme::EtdMs3 => "etd_ms3",
            Scheme::EtdMs4 => "etd_ms4",
            Scheme::Etd2Rk => "etd2rk",
            Scheme::Etd3Rk => "etd3rk",
            Scheme::Etd4Rk => "etd4rk",
            Scheme::Cn => "cn",
            Scheme::Rk4 => "rk4",
        }
    }

    pub fn order(self) -> usize {
        match self {
            Scheme::Etd1 => 1,
            Scheme::Etd2 | Scheme::Etd2Rk | Scheme::Cn => 2,
            Scheme::EtdMs3 | Scheme::Etd3Rk => 3,
            Scheme::EtdMs4 | Scheme::Etd4Rk | Scheme::Rk4 => 4,
        }
    }

    /// Number of past `F` values a multistep scheme needs.
    pub fn history_len(self) -> usize {
        match self {
            Scheme::Etd2 => 1,
            Scheme::EtdMs3 => 2,
            Scheme::EtdMs4 => 3,
            _ => 0,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown scheme '{s}'")))
    }
}

/// Solution, time and `F` history (newest first: `F_{n−1}, F_{n−2}, …`).
#[derive(Debug, Clone)]
pub struct StepperState {
    pub u: Vec<f64>,
    pub t: f64,
    pub history: VecDeque<Vec<f64>>,
    history_dt: Option<f64>,
}

impl StepperState {
    pub fn new(u: Vec<f64>, t: f64) -> Self {
        Self {
            u,
            t,
            history: VecDeque::new(),
            history_dt: None,
        }
    }

    /// Drops the `F` history, e.g. after the unknowns were redefined.
    pub fn clear_history(&mut self) {
        self.history.clear();
        self.history_dt = None;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepperOptions {
    pub krylov: KrylovOptions,
    pub cg_tol: f64,
    /// Norm beyond which a solution is declared blown up.
    pub blowup_norm: f64,
}

impl Default for StepperOptions {
    fn default() -> Self {
        Self {
            krylov: KrylovOptions::default(),
            cg_tol: DEFAULT_CG_TOL,
            blowup_norm: 1e10,
        }
    }
}

/// Work counters accumulated across steps.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub steps: usize,
    pub phi_calls: usize,
    pub krylov_matvecs: usize,
    pub krylov_substeps: usize,
    pub cg_iterations: usize,
    pub f_evals: usize,
}

struct CnCache {
    dt: f64,
    lhs: SymSparseMatrix,
    precond: Ic0Factor,
}

/// Advances a [`StepperState`] with a fixed scheme, bootstrapping
/// multistep schemes with the self-starting ETD-RK scheme of equal order.
pub struct Stepper {
    pub scheme: Scheme,
    pub options: StepperOptions,
    pub stats: StepStats,
    cn: Option<CnCache>,
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

fn lin(terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = vec![0.0; terms[0].1.len()];
    for (a, x) in terms {
        axpy(*a, x, &mut out);
    }
    out
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Coefficients `c_k` of `binom(−λ, m) = Σ_k c_k λ^k`.
pub fn binomial_neg_lambda_coeffs(m: usize) -> Vec<f64> {
    // Π_{i<m} (−λ − i) / m!
    let mut poly = vec![1.0];
    for i in 0..m {
        let mut next = vec![0.0; poly.len() + 1];
        for (k, c) in poly.iter().enumerate() {
            next[k] += -(i as f64) * c;
            next[k + 1] += -c;
        }
        poly = next;
    }
    let fact: f64 = (1..=m).map(|i| i as f64).product();
    poly.iter().map(|c| c / fact).collect()
}

fn binom(m: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

impl Stepper {
    pub fn new(scheme: Scheme, options: StepperOptions) -> Self {
        Self {
            scheme,
            options,
            stats: StepStats::default(),
            cn: None,
        }
    }

    fn phi(&mut self, sys: &SemiDiscreteSystem<'_>, scale: f64, vectors: Vec<&[f64]>) -> Result<Vec<f64>> {
        let req = PhiCombinationRequest::new(sys.linear, scale, vectors).options(self.options.krylov);
        let (y, st) = phi_combination_with_stats(&req)?;
        self.stats.phi_calls += 1;
        self.stats.krylov_matvecs += st.matvecs;
        self.stats.krylov_substeps += st.substeps;
        Ok(y)
    }

    fn f(&mut self, sys: &SemiDiscreteSystem<'_>, u: &[f64], t: f64) -> Vec<f64> {
        self.stats.f_evals += 1;
        sys.f(u, t)
    }

    /// One step of size `dt`.
    pub fn step(&mut self, sys: &SemiDiscreteSystem<'_>, state: &mut StepperState, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        if state.u.len() != sys.dim() {
            return Err(Error::Dimension {
                expected: sys.dim(),
                found: state.u.len(),
            });
        }
        if let Some(hdt) = state.history_dt {
            if (hdt - dt).abs() > 1e-12 * dt {
                state.clear_history();
            }
        }
        let need = self.scheme.history_len();
        let fn_now = self.f(sys, &state.u, state.t);
        let next = if need > state.history.len() {
            let boot = match self.scheme.order() {
                3 => Scheme::Etd3Rk,
                4 => Scheme::Etd4Rk,
                _ => Scheme::Etd2Rk,
            };
            self.rk_step(boot, sys, state, &fn_now, dt)?
        } else {
            match self.scheme {
                Scheme::Etd1 => self.etd1(sys, state, &fn_now, dt)?,
                Scheme::Etd2 => self.etd2(sys, state, &fn_now, dt)?,
                Scheme::EtdMs3 => self.etd_multistep(sys, state, &fn_now, dt, 3)?,
                Scheme::EtdMs4 => self.etd_multistep(sys, state, &fn_now, dt, 4)?,
                Scheme::Etd2Rk | Scheme::Etd3Rk | Scheme::Etd4Rk => {
                    self.rk_step(self.scheme, sys, state, &fn_now, dt)?
                }
                Scheme::Cn => self.cn(sys, state, &fn_now, dt)?,
                Scheme::Rk4 => self.rk4(sys, state, &fn_now, dt),
            }
        };
        let t_next = state.t + dt;
        let nn = norm(&next);
        if !nn.is_finite() || nn > self.options.blowup_norm {
            return Err(Error::Blowup { time: t_next, norm: nn });
        }
        if need > 0 {
            state.history.push_front(fn_now);
            state.history.truncate(need);
            state.history_dt = Some(dt);
        }
        state.u = next;
        state.t = t_next;
        self.stats.steps += 1;
        Ok(())
    }

    /// ETD1 update from `state` without advancing it.
    pub fn etd1_update(&mut self, sys: &SemiDiscreteSystem<'_>, state: &StepperState, dt: f64) -> Result<Vec<f64>> {
        let fnow = self.f(sys, &state.u, state.t);
        self.etd1(sys, state, &fnow, dt)
    }

    /// ETD2 update from `state` (needs one history entry) without advancing it.
    pub fn etd2_update(&mut self, sys: &SemiDiscreteSystem<'_>, state: &StepperState, dt: f64) -> Result<Vec<f64>> {
        let fnow = self.f(sys, &state.u, state.t);
        self.etd2(sys, state, &fnow, dt)
    }

    /// Order-`s` backward-difference multistep update (`s ≥ 1`, needs
    /// `s − 1` history entries) without advancing `state`.
    pub fn multistep_update(
        &mut self,
        sys: &SemiDiscreteSystem<'_>,
        state: &StepperState,
        dt: f64,
        s: usize,
    ) -> Result<Vec<f64>> {
        if s == 0 {
            return Err(Error::Config("multistep order must be at least 1".into()));
        }
        let fnow = self.f(sys, &state.u, state.t);
        self.etd_multistep(sys, state, &fnow, dt, s)
    }

    fn etd1(&mut self, sys: &SemiDiscreteSystem<'_>, st: &StepperState, fnow: &[f64], dt: f64) -> Result<Vec<f64>> {
        let v1: Vec<f64> = fnow.iter().map(|f| dt * f).collect();
        self.phi(sys, dt, vec![&st.u, &v1])
    }

    fn etd2(&mut self, sys: &SemiDiscreteSystem<'_>, st: &StepperState, fnow: &[f64], dt: f64) -> Result<Vec<f64>> {
        let prev = st
            .history
            .front()
            .ok_or(Error::MissingHistory { needed: 1, found: 0 })?;
        let v1: Vec<f64> = fnow.iter().map(|f| dt * f).collect();
        let v2: Vec<f64> = fnow.iter().zip(prev).map(|(a, b)| dt * (a - b)).collect();
        self.phi(sys, dt, vec![&st.u, &v1, &v2])
    }

    /// Order-`s` multistep update `e^{dtC}U_n + dt Σ_m g_m ∇^m F_n` with
    /// `g_m = (−1)^m Σ_k c_{m,k} φ_{k+1}(dtC)`.
    fn etd_multistep(
        &mut self,
        sys: &SemiDiscreteSystem<'_>,
        st: &StepperState,
        fnow: &[f64],
        dt: f64,
        s: usize,
    ) -> Result<Vec<f64>> {
        if st.history.len() < s - 1 {
            return Err(Error::MissingHistory {
                needed: s - 1,
                found: st.history.len(),
            });
        }
        let n = sys.dim();
        let past = |j: usize| -> &[f64] {
            if j == 0 {
                fnow
            } else {
                &st.history[j - 1]
            }
        };
        let mut v: Vec<Vec<f64>> = vec![vec![0.0; n]; s];
        for m in 0..s {
            let mut diff = vec![0.0; n];
            for j in 0..=m {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                axpy(sign * binom(m, j), past(j), &mut diff);
            }
            let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
            for (k, c) in binomial_neg_lambda_coeffs(m).iter().enumerate() {
                if *c != 0.0 {
                    axpy(dt * sign_m * c, &diff, &mut v[k]);
                }
            }
        }
        let mut vecs: Vec<&[f64]> = vec![&st.u];
        vecs.extend(v.iter().map(|x| x.as_slice()));
        self.phi(sys, dt, vecs)
    }

    fn rk_step(
        &mut self,
        scheme: Scheme,
        sys: &SemiDiscreteSystem<'_>,
        st: &StepperState,
        fnow: &[f64],
        dt: f64,
    ) -> Result<Vec<f64>> {
        let (u, t) = (&st.u, st.t);
        let half = 0.5 * dt;
        match scheme {
            Scheme::Etd2Rk => {
                let v1 = lin(&[(dt, fnow)]);
                let a = self.phi(sys, dt, vec![u, &v1])?;
                let fa = self.f(sys, &a, t + dt);
                let v2 = lin(&[(dt, &fa), (-dt, fnow)]);
                self.phi(sys, dt, vec![u, &v1, &v2])
            }
            Scheme::Etd3Rk => {
                let a = self.phi(sys, half, vec![u, &lin(&[(half, fnow)])])?;
                let fa = self.f(sys, &a, t + half);
                let b = self.phi(sys, dt, vec![u, &lin(&[(2.0 * dt, &fa), (-dt, fnow)])])?;
                let fb = self.f(sys, &b, t + dt);
                let v1 = lin(&[(dt, fnow)]);
                let v2 = lin(&[(-3.0 * dt, fnow), (4.0 * dt, &fa), (-dt, &fb)]);
                let v3 = lin(&[(2.0 * dt, fnow), (-4.0 * dt, &fa), (2.0 * dt, &fb)]);
                self.phi(sys, dt, vec![u, &v1, &v2, &v3])
            }
            Scheme::Etd4Rk => {
                let a = self.phi(sys, half, vec![u, &lin(&[(half, fnow)])])?;
                let fa = self.f(sys, &a, t + half);
                let b = self.phi(sys, half, vec![u, &lin(&[(half, &fa)])])?;
                let fb = self.f(sys, &b, t + half);
                let c = self.phi(sys, half, vec![&a, &lin(&[(dt, &fb), (-half, fnow)])])?;
                let fc = self.f(sys, &c, t + dt);
                let v1 = lin(&[(dt, fnow)]);
                let v2 = lin(&[(-3.0 * dt, fnow), (2.0 * dt, &fa), (2.0 * dt, &fb), (-dt, &fc)]);
                let v3 = lin(&[(2.0 * dt, fnow), (-2.0 * dt, &fa), (-2.0 * dt, &fb), (2.0 * dt, &fc)]);
                self.phi(sys, dt, vec![u, &v1, &v2, &v3])
            }
            other => Err(Error::Unsupported(format!(
                "{other} is not an exponential Runge-Kutta scheme"
            ))),
        }
    }

    fn cn(&mut self, sys: &SemiDiscreteSystem<'_>, st: &StepperState, fnow: &[f64], dt: f64) -> Result<Vec<f64>> {
        if !sys.forcing.is_state_independent() {
            return Err(Error::Unsupported(
                "Crank-Nicolson requires a forcing that does not depend on the solution".into(),
            ));
        }
        let stale = self.cn.as_ref().is_none_or(|c| c.dt != dt || c.lhs.n() != sys.dim());
        if stale {
            let lhs = sys.linear.shifted(1.0, -0.5 * dt);
            let precond = ic0_factor(&lhs)?;
            self.cn = Some(CnCache { dt, lhs, precond });
        }
        let fnext = self.f(sys, &st.u, st.t + dt);
        let cu = sys.linear.matvec(&st.u);
        let rhs = lin(&[(1.0, &st.u), (0.5 * dt, &cu), (0.5 * dt, fnow), (0.5 * dt, &fnext)]);
        let cache = self.cn.as_ref().expect("cache populated above");
        let maxit = 10 * sys.dim().max(10);
        let out = cg_solve_from(
            &cache.lhs,
            &rhs,
            st.u.clone(),
            Some(&cache.precond),
            self.options.cg_tol,
            maxit,
        )?;
        self.stats.cg_iterations += out.iterations;
        Ok(out.x)
    }

    fn rk4(&mut self, sys: &SemiDiscreteSystem<'_>, st: &StepperState, fnow: &[f64], dt: f64) -> Vec<f64> {
        let (u, t) = (&st.u, st.t);
        let rhs = |this: &mut Self, x: &[f64], tt: f64, f: Option<&[f64]>| -> Vec<f64> {
            let mut k = sys.linear.matvec(x);
            let fx = match f {
                Some(f) => f.to_vec(),
                None => this.f(sys, x, tt),
            };
            axpy(1.0, &fx, &mut k);
            k
        };
        let k1 = rhs(self, u, t, Some(fnow));
        let k2 = rhs(self, &lin(&[(1.0, u), (0.5 * dt, &k1)]), t + 0.5 * dt, None);
        let k3 = rhs(self, &lin(&[(1.0, u), (0.5 * dt, &k2)]), t + 0.5 * dt, None);
        let k4 = rhs(self, &lin(&[(1.0, u), (dt, &k3)]), t + dt, None);
        lin(&[
            (1.0, u),
            (dt / 6.0, &k1),
            (dt / 3.0, &k2),
            (dt / 3.0, &k3),
            (dt / 6.0, &k4),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(c: f64) -> SymSparseMatrix {
        SymSparseMatrix::from_triplets(1, &[(0, 0, c)])
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("etd9".parse::<Scheme>().is_err());
    }

    #[test]
    fn binomial_coefficients() {
        assert_eq!(binomial_neg_lambda_coeffs(0), vec![1.0]);
        assert_eq!(binomial_neg_lambda_coeffs(1), vec![0.0, -1.0]);
        let c2 = binomial_neg_lambda_coeffs(2);
        assert!((c2[1] - 0.5).abs() < 1e-15 && (c2[2] - 0.5).abs() < 1e-15);
        let c3 = binomial_neg_lambda_coeffs(3);
        let expect = [0.0, -2.0 / 6.0, -3.0 / 6.0, -1.0 / 6.0];
        for (a, b) in c3.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn etd1_is_exact_for_constant_forcing() {
        let c = scalar(-1.0);
        let f = TimeForcing(|_t: f64, out: &mut [f64]| out[0] = 1.0);
        let sys = SemiDiscreteSystem::new(&c, &f);
        let mut st = StepperState::new(vec![0.0], 0.0);
        let mut s = Stepper::new(Scheme::Etd1, StepperOptions::default());
        s.step(&sys, &mut st, 0.1).unwrap();
        assert!((st.u[0] - (1.0 - (-0.1f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn zero_operator_gives_forward_euler_and_trapezoid() {
        let c = SymSparseMatrix::from_triplets(2, &[]);
        let f = TimeForcing(|t: f64, out: &mut [f64]| {
            out[0] = 3.0;
            out[1] = t;
        });
        let sys = SemiDiscreteSystem::new(&c, &f);
        let mut st = StepperState::new(vec![1.0, 0.0], 0.0);
        Stepper::new(Scheme::Etd1, StepperOptions::default())
            .step(&sys, &mut st, 0.5)
            .unwrap();
        assert!((st.u[0] - 2.5).abs() < 1e-14 && st.u[1].abs() < 1e-14);
        let mut st = StepperState::new(vec![1.0, 0.0], 0.0);
        Stepper::new(Scheme::Cn, StepperOptions::default())
            .step(&sys, &mut st, 0.5)
            .unwrap();
        assert!((st.u[0] - 2.5).abs() < 1e-12 && (st.u[1] - 0.125).abs() < 1e-12);
    }

    #[test]
    fn cn_amplification_factor() {
        let c = scalar(-1.0);
        let f = TimeForcing(|_t: f64, out: &mut [f64]| out[0] = 0.0);
        let sys = SemiDiscreteSystem::new(&c, &f);
        for dt in [0.1, 1.0, 100.0] {
            let mut st = StepperState::new(vec![1.0], 0.0);
            Stepper::new(Scheme::Cn, StepperOptions::default())
                .step(&sys, &mut st, dt)
                .unwrap();
            let g = (1.0 - dt / 2.0) / (1.0 + dt / 2.0);
            assert!((st.u[0] - g).abs() < 1e-12);
            assert!(st.u[0].abs() < 1.0);
        }
    }

    #[test]
    fn cn_rejects_state_dependent_forcing() {
        let c = scalar(-1.0);
        let f = StateForcing(|u: &[f64], _t: f64, out: &mut [f64]| out[0] = u[0] * u[0]);
        let sys = SemiDiscreteSystem::new(&c, &f);
        let mut st = StepperState::new(vec![1.0], 0.0);
        let r = Stepper::new(Scheme::Cn, StepperOptions::default()).step(&sys, &mut st, 0.1);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn rk4_matches_taylor_polynomial() {
        let lam = -0.7;
        let c = scalar(lam);
        let f = TimeForcing(|_t: f64, out: &mut [f64]| out[0] = 0.0);
        let sys = SemiDiscreteSystem::new(&c, &f);
        let mut st = StepperState::new(vec![1.0], 0.0);
        let dt = 0.3;
        Stepper::new(Scheme::Rk4, StepperOptions::default())
            .step(&sys, &mut st, dt)
            .unwrap();
        let z: f64 = lam * dt;
        let taylor = 1.0 + z + z * z / 2.0 + z.powi(3) / 6.0 + z.powi(4) / 24.0;
        assert!((st.u[0] - taylor).abs() < 1e-15);
    }

    #[test]
    fn rk4_reports_blowup() {
        let c = scalar(-1e4);
        let f = TimeForcing(|_t: f64, out: &mut [f64]| out[0] = 0.0);
        let sys = SemiDiscreteSystem::new(&c, &f);
        let mut st = StepperState::new(vec![1.0], 0.0);
        let mut s = Stepper::new(Scheme::Rk4, StepperOptions::default());
        let mut res = Ok(());
        for _ in 0..20 {
            res = s.step(&sys, &mut st, 0.01);
            if res.is_err() {
                break;
            }
        }
        assert!(matches!(res, Err(Error::Blowup { .. })));
    }

    #[test]
    fn exponential_schemes_propagate_exactly_without_forcing() {
        let c = SymSparseMatrix::from_triplets(
            3,
            &[(0, 0, -2.0), (1, 1, -0.5), (2, 2, -30.0), (0, 1, 0.3), (1, 0, 0.3)],
        );
        let f = TimeForcing(|_t: f64, out: &mut [f64]| out.fill(0.0));
        let sys = SemiDiscreteSystem::new(&c, &f);
        let u0 = vec![1.0, -2.0, 0.5];
        let exact = crate::sparse::dense_expm(&(c.to_dense() * 0.2)).unwrap() * nalgebra::DVector::from_vec(u0.clone());
        for s in Scheme::ALL {
            if matches!(s, Scheme::Cn | Scheme::Rk4) {
                continue;
            }
            let mut st = StepperState::new(u0.clone(), 0.0);
            Stepper::new(s, StepperOptions::default())
                .step(&sys, &mut st, 0.2)
                .unwrap();
            for i in 0..3 {
                assert!((st.u[i] - exact[i]).abs() < 1e-9, "{s}");
            }
        }
    }

    #[test]
    fn multistep_without_history_is_an_error() {
        let c = scalar(-1.0);
        let f = TimeForcing(|_t: f64, out: &mut [f64]| out[0] = 1.0);
        let sys = SemiDiscreteSystem::new(&c, &f);
        let st = StepperState::new(vec![0.0], 0.0);
        let mut s = Stepper::new(Scheme::Etd2, StepperOptions::default());
        assert!(matches!(
            s.etd2(&sys, &st, &[1.0], 0.1),
            Err(Error::MissingHistory { .. })
        ));
        assert!(matches!(
            s.etd_multistep(&sys, &st, &[1.0], 0.1, 3),
            Err(Error::MissingHistory { .. })
        ));
    }

    #[test]
    fn history_is_rebuilt_when_dt_changes() {
        let c = scalar(-1.0);
        let f = TimeForcing(|t: f64, out: &mut [f64]| out[0] = t.cos());
        let sys = SemiDiscreteSystem::new(&c, &f);
        let mut st = StepperState::new(vec![0.0], 0.0);
        let mut s = Stepper::new(Scheme::EtdMs3, StepperOptions::default());
        for _ in 0..4 {
            s.step(&sys, &mut st, 0.1).unwrap();
        }
        assert_eq!(st.history.len(), 2);
        s.step(&sys, &mut st, 0.05).unwrap();
        assert_eq!(st.history.len(), 1);
    }
}
