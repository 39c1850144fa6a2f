//! φ-functions and the Krylov evaluation of their linear combinations.
//!
//! All public φ-functions use the integral normalization
//!
//! ```text
//! φ_0(z) = e^z,   φ_k(z) = ∫₀¹ e^{(1−λ)z} λ^{k−1} dλ   (k ≥ 1),
//! ```
//!
//! so `φ_k(0) = 1/k` and `z φ_{k+1}(z) + 1 = k φ_k(z)`. The exponential-integrator
//! literature more often uses `φ̂_k(z) = φ_k(z) / (k−1)!` (with `φ̂_k(0) = 1/k!`);
//! that convention appears here only in the `*_hat` helpers and inside the
//! Krylov kernel, where the combination `Σ φ_k(A) v_k` is rewritten as
//! `Σ φ̂_k(A) ((k−1)! v_k)` and obtained as `y(1)` of
//!
//! ```text
//! y' = A y + Σ_k t^{k−1}/(k−1)! u_k,   y(0) = v_0,   u_k = (k−1)! v_k.
//! ```

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::{dense_expm, LinearOperator};

/// Largest φ order supported by the scalar routines.
pub const MAX_SCALAR_ORDER: usize = 8;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

thread_local! {
    static GL30: Vec<(f64, f64)> = gauss_legendre_unit(30);
}

/// Standard-normalized `φ̂_k(z)` for complex arguments.
pub fn phi_hat_complex(k: usize, z: Complex64) -> Complex64 {
    assert!(k <= MAX_SCALAR_ORDER, "phi order {k} exceeds {MAX_SCALAR_ORDER}");
    if k == 0 {
        return z.exp();
    }
    let r = z.norm();
    if r < 1.0 {
        // Σ_j z^j / (j+k)!
        let mut term = Complex64::new(1.0 / factorial(k), 0.0);
        let mut sum = term;
        for j in 1..60 {
            term *= z / (j + k) as f64;
            sum += term;
            if term.norm() <= 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else if r >= 2.0 * k as f64 {
        // Upward recursion is stable once |z| exceeds the order.
        let mut phi = z.exp();
        for j in 0..k {
            phi = (phi - 1.0 / factorial(j)) / z;
        }
        phi
    } else {
        let sum = GL30.with(|nodes| {
            nodes
                .iter()
                .map(|&(lam, w)| ((1.0 - lam) * z).exp() * (w * lam.powi(k as i32 - 1)))
                .sum::<Complex64>()
        });
        sum / factorial(k - 1)
    }
}

/// Standard-normalized `φ̂_k(z)`.
pub fn phi_hat(k: usize, z: f64) -> f64 {
    phi_hat_complex(k, Complex64::new(z, 0.0)).re
}

/// `φ_k(z)` in the integral normalization (`φ_k(0) = 1/k`).
pub fn phi_scalar(k: usize, z: f64) -> f64 {
    phi_scalar_complex(k, Complex64::new(z, 0.0)).re
}

/// Complex-argument `φ_k(z)` in the integral normalization.
pub fn phi_scalar_complex(k: usize, z: Complex64) -> Complex64 {
    if k == 0 {
        z.exp()
    } else {
        phi_hat_complex(k, z) * factorial(k - 1)
    }
}

/// Dense `φ_k(A)` via the exponential of the block matrix
/// `[[A, I, 0, …], [0, 0, I, …], …]` whose top-right block is `φ̂_k(A)`.
pub fn phi_dense(k: usize, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "phi_dense needs a square matrix");
    if k == 0 {
        return dense_expm(a);
    }
    let size = (k + 1) * n;
    let mut big = DMatrix::zeros(size, size);
    big.view_mut((0, 0), (n, n)).copy_from(a);
    for b in 0..k {
        for i in 0..n {
            big[(b * n + i, (b + 1) * n + i)] = 1.0;
        }
    }
    let e = dense_expm(&big)?;
    Ok(e.view((0, k * n), (n, n)).into_owned() * factorial(k - 1))
}

/// Dense reference for `Σ_k φ_k(A) v_k` through a single exponential of the
/// `(n + p) × (n + p)` augmented matrix `[[A, W], [0, J]]`.
pub fn phi_combination_dense(a: &DMatrix<f64>, vectors: &[&[f64]]) -> Result<Vec<f64>> {
    let n = a.nrows();
    let p = vectors.len().saturating_sub(1);
    for v in vectors {
        if v.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: v.len(),
            });
        }
    }
    if vectors.is_empty() {
        return Ok(vec![0.0; n]);
    }
    if p == 0 {
        let e = dense_expm(a)?;
        let v0 = nalgebra::DVector::from_column_slice(vectors[0]);
        return Ok((e * v0).as_slice().to_vec());
    }
    let size = n + p;
    let mut aug = DMatrix::zeros(size, size);
    aug.view_mut((0, 0), (n, n)).copy_from(a);
    // Column n + c carries u_{p−c}.
    for c in 0..p {
        let k = p - c;
        let w = factorial(k - 1);
        for i in 0..n {
            aug[(i, n + c)] = w * vectors[k][i];
        }
    }
    for c in 0..p - 1 {
        aug[(n + c, n + c + 1)] = 1.0;
    }
    let e = dense_expm(&aug)?;
    let mut rhs = nalgebra::DVector::zeros(size);
    rhs.rows_mut(0, n).copy_from_slice(vectors[0]);
    rhs[size - 1] = 1.0;
    let y = e * rhs;
    Ok(y.rows(0, n).iter().copied().collect())
}

/// How new Krylov vectors are orthogonalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orthogonalization {
    /// Full Arnoldi.
    Full,
    /// Incomplete orthogonalization against the given number of most recent
    /// basis vectors.
    Incomplete(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    pub tolerance: f64,
    pub initial_krylov_dim: usize,
    pub max_krylov_dim: usize,
    pub min_substep: f64,
    pub orthogonalization: Orthogonalization,
}

pub const DEFAULT_KRYLOV_TOL: f64 = 1e-8;

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_KRYLOV_TOL,
            initial_krylov_dim: 10,
            max_krylov_dim: 128,
            min_substep: 1e-10,
            orthogonalization: Orthogonalization::Incomplete(2),
        }
    }
}

impl KrylovOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }
}

/// One evaluation of `Σ_{k=0}^{p} φ_k(scale · A) v_k`.
pub struct PhiCombinationRequest<'a> {
    pub operator: &'a dyn LinearOperator,
    pub vectors: Vec<&'a [f64]>,
    pub scale: f64,
    pub options: KrylovOptions,
}

impl<'a> PhiCombinationRequest<'a> {
    pub fn new(operator: &'a dyn LinearOperator, scale: f64, vectors: Vec<&'a [f64]>) -> Self {
        Self {
            operator,
            vectors,
            scale,
            options: KrylovOptions::default(),
        }
    }

    pub fn options(mut self, options: KrylovOptions) -> Self {
        self.options = options;
        self
    }
}

/// Work counters for one φ-combination.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhiStats {
    pub substeps: usize,
    pub rejected: usize,
    pub matvecs: usize,
    pub max_dim: usize,
    pub happy_breakdowns: usize,
}

const STEP_SAFETY: f64 = 0.9;
const MAX_GROWTH: f64 = 5.0;
const MAX_SHRINK: f64 = 0.2;
const ROUNDOFF_FACTOR: f64 = 10.0;

/// Krylov basis and projected matrix for one substep.
pub struct KrylovWorkspace {
    basis: Vec<Vec<f64>>,
    hess: DMatrix<f64>,
    dim: usize,
    happy: bool,
    norm_scale: f64,
    scratch: Vec<f64>,
}

impl KrylovWorkspace {
    fn new(n: usize, max_dim: usize) -> Self {
        Self {
            basis: Vec::with_capacity(max_dim + 1),
            hess: DMatrix::zeros(max_dim + 1, max_dim),
            dim: 0,
            happy: false,
            norm_scale: 0.0,
            scratch: vec![0.0; n],
        }
    }

    fn reset(&mut self, start: &[f64], beta: f64) {
        self.basis.clear();
        self.basis.push(start.iter().map(|v| v / beta).collect());
        self.hess.fill(0.0);
        self.dim = 0;
        self.happy = false;
        self.norm_scale = 0.0;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn hessenberg(&self) -> nalgebra::DMatrixView<'_, f64> {
        self.hess.view((0, 0), (self.dim + 1, self.dim))
    }

    /// Extends the basis to dimension `target` (or until breakdown).
    fn extend(
        &mut self,
        op: &dyn LinearOperator,
        scale: f64,
        target: usize,
        ortho: Orthogonalization,
        stats: &mut PhiStats,
    ) {
        while self.dim < target && !self.happy {
            let j = self.dim;
            op.apply(&self.basis[j], &mut self.scratch);
            stats.matvecs += 1;
            let w = &mut self.scratch;
            if scale != 1.0 {
                w.iter_mut().for_each(|v| *v *= scale);
            }
            let wnorm = dot(w, w).sqrt();
            self.norm_scale = self.norm_scale.max(wnorm);
            let first = match ortho {
                Orthogonalization::Full => 0,
                Orthogonalization::Incomplete(q) => (j + 1).saturating_sub(q.max(1)),
            };
            for i in first..=j {
                let hij = dot(&self.basis[i], w);
                self.hess[(i, j)] = hij;
                axpy(-hij, &self.basis[i], w);
            }
            let hnext = dot(w, w).sqrt();
            self.hess[(j + 1, j)] = hnext;
            self.dim = j + 1;
            if hnext <= 1e-14 * self.norm_scale.max(f64::MIN_POSITIVE) {
                self.happy = true;
                break;
            }
            self.basis.push(w.iter().map(|v| v / hnext).collect());
        }
    }

    /// `φ̂_p(sH)e₁` and the last component of `φ̂_{p+1}(sH)e₁`.
    fn projected_phi(&self, s: f64, p: usize) -> Result<(Vec<f64>, f64)> {
        let m = self.dim;
        let q = p + 1;
        let size = m + q;
        let mut k = DMatrix::zeros(size, size);
        for j in 0..m {
            for i in 0..=(j + 1).min(m - 1) {
                k[(i, j)] = s * self.hess[(i, j)];
            }
        }
        k[(0, m)] = 1.0;
        for i in 0..q - 1 {
            k[(m + i, m + i + 1)] = 1.0;
        }
        let e = dense_expm(&k)?;
        let phi_p = (0..m).map(|i| e[(i, m + p - 1)]).collect();
        Ok((phi_p, e[(m - 1, m + p)]))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Evaluates `Σ_k φ_k(scale·A) v_k` by integrating the equivalent linear ODE
/// over `[0, 1]` with adaptive substeps and an adaptive Krylov dimension.
pub fn phi_combination(req: &PhiCombinationRequest<'_>) -> Result<Vec<f64>> {
    phi_combination_with_stats(req).map(|(y, _)| y)
}

pub fn phi_combination_with_stats(req: &PhiCombinationRequest<'_>) -> Result<(Vec<f64>, PhiStats)> {
    let n = req.operator.dim();
    let opts = req.options;
    if req.vectors.is_empty() {
        return Err(Error::Unsupported("phi combination needs at least v_0".into()));
    }
    if !(opts.tolerance > 0.0) {
        return Err(Error::Config("Krylov tolerance must be positive".into()));
    }
    for v in &req.vectors {
        if v.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: v.len(),
            });
        }
    }
    let p_in = req.vectors.len() - 1;
    if p_in > MAX_SCALAR_ORDER {
        return Err(Error::Unsupported(format!("phi order {p_in} > {MAX_SCALAR_ORDER}")));
    }
    let p = p_in.max(1);
    // Forcing vectors u_k = (k−1)! v_k, k = 1..=p.
    let mut forcing: Vec<Vec<f64>> = Vec::with_capacity(p);
    for k in 1..=p {
        if k <= p_in {
            let f = factorial(k - 1);
            forcing.push(req.vectors[k].iter().map(|v| v * f).collect());
        } else {
            forcing.push(vec![0.0; n]);
        }
    }

    let mut stats = PhiStats::default();
    let mut y: Vec<f64> = req.vectors[0].to_vec();
    if req.scale == 0.0 {
        // φ_k(0) = 1/k.
        for k in 1..=p_in {
            axpy(1.0 / k as f64, req.vectors[k], &mut y);
        }
        return Ok((y, stats));
    }

    let max_dim = opts.max_krylov_dim.max(1).min(n.max(1));
    let mut ws = KrylovWorkspace::new(n, max_dim);
    let mut w: Vec<Vec<f64>> = vec![vec![0.0; n]; p + 1];
    let mut t = 0.0f64;
    let mut s = 1.0f64;
    let mut m_start = opts.initial_krylov_dim.clamp(1, max_dim);

    while t < 1.0 {
        s = s.min(1.0 - t);
        w[0].copy_from_slice(&y);
        for j in 1..=p {
            let (prev, cur) = w.split_at_mut(j);
            req.operator.apply(&prev[j - 1], &mut cur[0]);
            stats.matvecs += 1;
            cur[0].iter_mut().for_each(|v| *v *= req.scale);
            let mut coef = 1.0;
            for l in 0..=(p - j) {
                if l > 0 {
                    coef *= t / l as f64;
                }
                if coef != 0.0 {
                    axpy(coef, &forcing[j + l - 1], &mut cur[0]);
                }
            }
        }
        let beta = norm(&w[p]);
        let ynorm = norm(&y);
        let wnorms: Vec<f64> = w.iter().map(|v| norm(v)).collect();
        // Rounding error of the higher Taylor terms, which cancel against
        // the Krylov term when ‖sA‖ is large. The j ≤ 1 terms set a floor
        // proportional to s that no substep choice can lower, so they are
        // left out.
        let roundoff = |s: f64| {
            let mut c = s;
            let mut acc = 0.0;
            for (j, wn) in wnorms.iter().enumerate().skip(2) {
                c *= s / j as f64;
                acc += c * wn;
            }
            ROUNDOFF_FACTOR * f64::EPSILON * acc
        };

        let poly_part = |s: f64, out: &mut Vec<f64>| {
            out.clear();
            out.extend_from_slice(&w[0]);
            let mut c = 1.0;
            for (j, wj) in w.iter().enumerate().take(p).skip(1) {
                c *= s / j as f64;
                axpy(c, wj, out);
            }
        };

        if beta == 0.0 {
            let s = 1.0 - t;
            let mut out = Vec::with_capacity(n);
            poly_part(s, &mut out);
            y = out;
            stats.substeps += 1;
            break;
        }

        ws.reset(&w[p], beta);
        let mut m = m_start;
        ws.extend(req.operator, req.scale, m, opts.orthogonalization, &mut stats);
        loop {
            let md = ws.dim;
            let (phi_p, last) = ws.projected_phi(s, p)?;
            let err = if ws.happy {
                0.0
            } else {
                s.powi(p as i32 + 1) * beta * ws.hess[(md, md - 1)] * last.abs()
            };
            let scale_norm = if ynorm > 0.0 { ynorm } else { beta * s.powi(p as i32) };
            let tol_local = opts.tolerance * s * scale_norm;
            let round = roundoff(s);
            if p >= 2 && round > 0.5 * tol_local && s > opts.min_substep {
                stats.rejected += 1;
                let shrink =
                    (STEP_SAFETY * (0.5 * tol_local / round).powf(1.0 / (p - 1) as f64)).clamp(MAX_SHRINK, STEP_SAFETY);
                s = (s * shrink).max(opts.min_substep);
                continue;
            }
            if err + round <= tol_local {
                let mut out = Vec::with_capacity(n);
                poly_part(s, &mut out);
                let c = s.powi(p as i32) * beta;
                for (i, coef) in phi_p.iter().enumerate() {
                    axpy(c * coef, &ws.basis[i], &mut out);
                }
                y = out;
                t += s;
                if 1.0 - t < 1e-14 {
                    t = 1.0;
                }
                stats.substeps += 1;
                stats.max_dim = stats.max_dim.max(md);
                if ws.happy {
                    stats.happy_breakdowns += 1;
                }
                let order = (md as f64 / 4.0).max(1.0);
                let mut grow = if err == 0.0 {
                    MAX_GROWTH
                } else {
                    (STEP_SAFETY * (tol_local / err).powf(1.0 / order)).clamp(1.0, MAX_GROWTH)
                };
                if p >= 2 && round > 0.0 {
                    let limit = (0.5 * tol_local / round).powf(1.0 / (p - 1) as f64);
                    grow = grow.min(limit.max(1.0));
                }
                s *= grow;
                m_start = md.max(opts.initial_krylov_dim.min(max_dim));
                break;
            }
            if md < max_dim && !ws.happy {
                m = (md + (md / 3).max(4)).min(max_dim);
                ws.extend(req.operator, req.scale, m, opts.orthogonalization, &mut stats);
                continue;
            }
            stats.rejected += 1;
            let order = (md as f64 / 4.0).max(1.0);
            let shrink = if err.is_finite() {
                (STEP_SAFETY * (tol_local / err).powf(1.0 / order)).clamp(MAX_SHRINK, STEP_SAFETY)
            } else {
                MAX_SHRINK
            };
            let s_new = s * shrink;
            if s_new < opts.min_substep {
                let mut best = Vec::with_capacity(n);
                poly_part(s, &mut best);
                return Err(Error::KrylovAccuracy {
                    estimate: err,
                    bound: tol_local,
                    best,
                });
            }
            s = s_new;
        }
    }
    Ok((y, stats))
}
