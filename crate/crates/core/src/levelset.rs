//! Level-set evolution for moving boundaries: HJ-WENO advection,
//! reinitialization, speed extension, normal-direction extrapolation and
//! interface measures.

use crate::error::{Error, Result};
use crate::geometry::{find_crossing, BoundaryCrossing, Direction, LevelSetField, Point, UniformGrid2D};

/// Default narrow-band half width in cells.
pub const DEFAULT_BAND_CELLS: f64 = 8.0;
pub const DEFAULT_REINIT_ITERATIONS: usize = 10;
pub const DEFAULT_EXTENSION_ITERATIONS: usize = 20;
/// CFL number of the explicit level-set updates.
pub const CFL: f64 = 0.5;
const GRADIENT_FLOOR: f64 = 1e-10;
const MAX_RELAX_ROUNDS: usize = 200;
const RELAX_TOL: f64 = 1e-15;
const UPWIND_CLOSURE_ROUNDS: usize = 4;
const ORDERS: [(bool, bool); 4] = [(false, false), (true, false), (false, true), (true, true)];
const AXES: [(Direction, Direction); 2] = [(Direction::West, Direction::East), (Direction::South, Direction::North)];

/// Nodes with `|ρ| ≤ width`, plus every node adjacent to a sign change.
#[derive(Debug, Clone, PartialEq)]
pub struct NarrowBand {
    pub width: f64,
    pub nodes: Vec<usize>,
    pub mask: Vec<bool>,
}

impl NarrowBand {
    pub fn new(ls: &LevelSetField, width: f64) -> Self {
        let g = &ls.grid;
        let mut mask: Vec<bool> = ls.values.iter().map(|v| v.abs() <= width).collect();
        for k in 0..g.len() {
            for d in [Direction::East, Direction::North] {
                if let Some(nb) = g.neighbor(k, d) {
                    if ls.is_inside(k) != ls.is_inside(nb) {
                        mask[k] = true;
                        mask[nb] = true;
                    }
                }
            }
        }
        let nodes = (0..g.len()).filter(|&k| mask[k]).collect();
        Self { width, nodes, mask }
    }

    pub fn with_default_width(ls: &LevelSetField) -> Self {
        Self::new(ls, DEFAULT_BAND_CELLS * ls.grid.h)
    }
}

/// Every grid segment crossed by the zero level set.
pub fn crossings(ls: &LevelSetField) -> Result<Vec<BoundaryCrossing>> {
    let g = &ls.grid;
    let mut out = Vec::new();
    for k in 0..g.len() {
        for d in [Direction::East, Direction::North] {
            if let Some(nb) = g.neighbor(k, d) {
                let (a, b) = (ls.is_inside(k), ls.is_inside(nb));
                if a && !b {
                    out.push(find_crossing(g, ls, k, nb)?);
                } else if b && !a {
                    out.push(find_crossing(g, ls, nb, k)?);
                }
            }
        }
    }
    Ok(out)
}

/// Field value with linear extrapolation past the grid rim.
#[inline]
fn at_ext(values: &[f64], g: &UniformGrid2D, i: isize, j: isize) -> f64 {
    let ci = i.clamp(0, g.nx as isize - 1);
    let cj = j.clamp(0, g.ny as isize - 1);
    let base = values[ci as usize + g.nx * cj as usize];
    let mut v = base;
    if i != ci {
        let inward = if i < 0 { 1 } else { -1 };
        let nxt = values[(ci + inward) as usize + g.nx * cj as usize];
        v += (i - ci).abs() as f64 * (base - nxt);
    }
    if j != cj {
        let inward = if j < 0 { 1 } else { -1 };
        let nxt = values[ci as usize + g.nx * (cj + inward) as usize];
        v += (j - cj).abs() as f64 * (base - nxt);
    }
    v
}

/// Fifth-order WENO combination of five consecutive one-sided differences.
#[inline]
fn weno5(v1: f64, v2: f64, v3: f64, v4: f64, v5: f64) -> f64 {
    let p1 = v1 / 3.0 - 7.0 * v2 / 6.0 + 11.0 * v3 / 6.0;
    let p2 = -v2 / 6.0 + 5.0 * v3 / 6.0 + v4 / 3.0;
    let p3 = v3 / 3.0 + 5.0 * v4 / 6.0 - v5 / 6.0;
    let s1 = 13.0 / 12.0 * (v1 - 2.0 * v2 + v3).powi(2) + 0.25 * (v1 - 4.0 * v2 + 3.0 * v3).powi(2);
    let s2 = 13.0 / 12.0 * (v2 - 2.0 * v3 + v4).powi(2) + 0.25 * (v2 - v4).powi(2);
    let s3 = 13.0 / 12.0 * (v3 - 2.0 * v4 + v5).powi(2) + 0.25 * (3.0 * v3 - 4.0 * v4 + v5).powi(2);
    let vmax = [v1, v2, v3, v4, v5].iter().fold(0.0f64, |m, v| m.max(v * v));
    let eps = 1e-6 * vmax + 1e-99;
    let a1 = 0.1 / (s1 + eps).powi(2);
    let a2 = 0.6 / (s2 + eps).powi(2);
    let a3 = 0.3 / (s3 + eps).powi(2);
    (a1 * p1 + a2 * p2 + a3 * p3) / (a1 + a2 + a3)
}

/// Left- and right-biased WENO5 derivatives at a node along one axis.
#[inline]
fn weno_derivs(values: &[f64], g: &UniformGrid2D, i: isize, j: isize, axis_x: bool) -> (f64, f64) {
    let f = |o: isize| {
        if axis_x {
            at_ext(values, g, i + o, j)
        } else {
            at_ext(values, g, i, j + o)
        }
    };
    let h = g.h;
    // d[k] = (f(k−2) − f(k−3)) / h for k = 0..6, i.e. D⁻ at offsets −2..3.
    let mut d = [0.0; 6];
    let mut prev = f(-3);
    for (k, dk) in d.iter_mut().enumerate() {
        let cur = f(k as isize - 2);
        *dk = (cur - prev) / h;
        prev = cur;
    }
    let minus = weno5(d[0], d[1], d[2], d[3], d[4]);
    let plus = weno5(d[5], d[4], d[3], d[2], d[1]);
    (minus, plus)
}

/// Largest admissible advection step for a nodal velocity field.
pub fn cfl_limit(grid: &UniformGrid2D, velocity: &[Point]) -> f64 {
    let vmax = velocity.iter().fold(0.0f64, |m, v| m.max(v[0].abs().max(v[1].abs())));
    if vmax == 0.0 {
        f64::INFINITY
    } else {
        CFL * grid.h / vmax
    }
}

fn advection_rate(values: &[f64], g: &UniformGrid2D, velocity: &[Point], out: &mut [f64]) {
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.index(i, j);
            let v = velocity[k];
            let mut r = 0.0;
            if v[0] != 0.0 {
                let (m, p) = weno_derivs(values, g, i as isize, j as isize, true);
                r -= v[0] * if v[0] > 0.0 { m } else { p };
            }
            if v[1] != 0.0 {
                let (m, p) = weno_derivs(values, g, i as isize, j as isize, false);
                r -= v[1] * if v[1] > 0.0 { m } else { p };
            }
            out[k] = r;
        }
    }
}

/// Third-order TVD Runge–Kutta in increment form, so that a zero rate
/// leaves the field bitwise unchanged.
fn tvd_rk3(values: &[f64], dt: f64, rate: impl Fn(&[f64], &mut [f64])) -> Vec<f64> {
    let n = values.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    rate(values, &mut k1);
    let s1: Vec<f64> = (0..n).map(|k| values[k] + dt * k1[k]).collect();
    rate(&s1, &mut k2);
    let s2: Vec<f64> = (0..n).map(|k| values[k] + 0.25 * dt * (k1[k] + k2[k])).collect();
    rate(&s2, &mut k3);
    (0..n)
        .map(|k| values[k] + dt * (k1[k] / 6.0 + k2[k] / 6.0 + 2.0 * k3[k] / 3.0))
        .collect()
}

/// One HJ-WENO5 / TVD-RK3 step of `ρ_t + v·∇ρ = 0`.
pub fn hj_weno_advect(ls: &LevelSetField, velocity: &[Point], dt: f64) -> Result<LevelSetField> {
    let g = ls.grid;
    if velocity.len() != g.len() {
        return Err(Error::Dimension {
            expected: g.len(),
            found: velocity.len(),
        });
    }
    let limit = cfl_limit(&g, velocity);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, limit });
    }
    let values = tvd_rk3(&ls.values, dt, |v, out| advection_rate(v, &g, velocity, out));
    LevelSetField::new(g, values)
}

/// Advects over `dt` with the fewest equal substeps that respect the CFL
/// limit. Returns the field and the number of substeps.
pub fn advect_subcycled(ls: &LevelSetField, velocity: &[Point], dt: f64) -> Result<(LevelSetField, usize)> {
    let limit = cfl_limit(&ls.grid, velocity);
    let steps = if limit.is_finite() {
        (dt / limit).ceil().max(1.0) as usize
    } else {
        1
    };
    let sub = dt / steps as f64;
    let mut cur = ls.clone();
    for _ in 0..steps {
        cur = hj_weno_advect(&cur, velocity, sub)?;
    }
    Ok((cur, steps))
}

/// Godunov approximation of `|∇ρ|` for the characteristic direction `sign`.
#[inline]
fn godunov_norm(a: f64, b: f64, c: f64, d: f64, sign: f64) -> f64 {
    // a, b: backward/forward x-derivatives; c, d: the same along y.
    let (gx, gy) = if sign > 0.0 {
        (
            a.max(0.0).powi(2).max(b.min(0.0).powi(2)),
            c.max(0.0).powi(2).max(d.min(0.0).powi(2)),
        )
    } else {
        (
            a.min(0.0).powi(2).max(b.max(0.0).powi(2)),
            c.min(0.0).powi(2).max(d.max(0.0).powi(2)),
        )
    };
    (gx + gy).sqrt()
}

/// Iterates `ρ_τ + S(ρ⁰)(|∇ρ| − 1) = 0` with `S = ρ⁰/√(ρ⁰² + h²)`, WENO5
/// one-sided derivatives, the Godunov Hamiltonian and TVD-RK3 in pseudo
/// time with step `0.5 h`.
pub fn reinitialize(ls: &LevelSetField, n_iter: usize) -> Result<LevelSetField> {
    if n_iter == 0 {
        return Err(Error::Config("reinitialization needs at least one iteration".into()));
    }
    if !ls.has_interface() {
        return Err(Error::Config("reinitialization needs a zero level set".into()));
    }
    let g = ls.grid;
    let h = g.h;
    let sign: Vec<f64> = ls.values.iter().map(|&r| r / (r * r + h * h).sqrt()).collect();
    let rate = |v: &[f64], out: &mut [f64]| {
        for j in 0..g.ny {
            for i in 0..g.nx {
                let k = g.index(i, j);
                let s = sign[k];
                if s == 0.0 {
                    out[k] = 0.0;
                    continue;
                }
                let (a, b) = weno_derivs(v, &g, i as isize, j as isize, true);
                let (c, d) = weno_derivs(v, &g, i as isize, j as isize, false);
                out[k] = -s * (godunov_norm(a, b, c, d, s) - 1.0);
            }
        }
    };
    let mut values = ls.values.clone();
    for _ in 0..n_iter {
        values = tvd_rk3(&values, CFL * h, rate);
    }
    LevelSetField::new(g, values)
}

/// Unit normals `∇ρ/|∇ρ|` at every node, `None` where the gradient is
/// degenerate.
pub fn nodal_normals(ls: &LevelSetField) -> Vec<Option<Point>> {
    let g = &ls.grid;
    (0..g.len())
        .map(|k| {
            let (i, j) = g.ij(k);
            let gr = ls.nodal_gradient(i, j);
            let m = gr[0].hypot(gr[1]);
            if m < GRADIENT_FLOOR {
                None
            } else {
                Some([gr[0] / m, gr[1] / m])
            }
        })
        .collect()
}

/// Scalar sample attached to one boundary crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingSample {
    pub crossing: BoundaryCrossing,
    pub value: f64,
}

/// Extends crossing samples off the interface by driving the first-order
/// upwind discretization of `S(ρ) n·∇q = 0` to steady state. Nodes adjacent to a
/// crossing are held at the inverse-distance average of their samples.
pub fn extend_speed(ls: &LevelSetField, samples: &[CrossingSample], n_iter: usize) -> Result<Vec<f64>> {
    let g = ls.grid;
    let h = g.h;
    if samples.is_empty() {
        return Err(Error::Config("speed extension needs interface samples".into()));
    }
    let mean = samples.iter().map(|s| s.value).sum::<f64>() / samples.len() as f64;
    let mut wsum = vec![0.0; g.len()];
    let mut vsum = vec![0.0; g.len()];
    for s in samples {
        let c = &s.crossing;
        for (node, d) in [(c.inside, c.distance), (c.outside, h - c.distance)] {
            let w = 1.0 / (d + 1e-3 * h);
            wsum[node] += w;
            vsum[node] += w * s.value;
        }
    }
    let frozen: Vec<bool> = wsum.iter().map(|&w| w > 0.0).collect();
    let mut q: Vec<f64> = (0..g.len())
        .map(|k| if frozen[k] { vsum[k] / wsum[k] } else { mean })
        .collect();
    let normals = nodal_normals(ls);
    let band = NarrowBand::with_default_width(ls);
    let degenerate = band
        .nodes
        .iter()
        .filter(|&&k| !frozen[k] && normals[k].is_none())
        .count();
    if degenerate * 100 > band.nodes.len() {
        return Err(Error::TooManyDegenerate {
            count: degenerate,
            band: band.nodes.len(),
        });
    }
    let sign: Vec<f64> = ls.values.iter().map(|&r| r / (r * r + h * h).sqrt()).collect();
    // Gauss–Seidel on the steady upwind equations, one grid ordering per
    // iteration.
    for it in 0..n_iter {
        let (rev_i, rev_j) = ORDERS[it % 4];
        for jj in 0..g.ny {
            let j = if rev_j { g.ny - 1 - jj } else { jj };
            for ii in 0..g.nx {
                let i = if rev_i { g.nx - 1 - ii } else { ii };
                let k = g.index(i, j);
                if frozen[k] {
                    continue;
                }
                let Some(n) = normals[k] else { continue };
                let (mut acc, mut wsum) = (0.0, 0.0);
                for (c, (minus, plus)) in AXES.into_iter().enumerate() {
                    let a = sign[k] * n[c];
                    if a == 0.0 {
                        continue;
                    }
                    if let Some(nb) = g.neighbor(k, if a > 0.0 { minus } else { plus }) {
                        acc += a.abs() * q[nb];
                        wsum += a.abs();
                    }
                }
                if wsum > 0.0 {
                    q[k] = acc / wsum;
                }
            }
        }
    }
    Ok(q)
}

/// Normal-direction extrapolation that reproduces quadratics exactly.
///
/// Second derivatives are extended as constants, first derivatives with
/// slope `n·H`, and the field with slope `n·∇u` corrected for the
/// first-order upwind truncation. Each level is solved by Gauss–Seidel
/// sweeps in the four grid orderings.
///
/// `valid` marks nodes where `u` is trusted; values are produced on
/// `targets` (typically a narrow band). Returns the field (unchanged at
/// valid nodes) and the number of targets that could not be reached.
pub fn extrapolate_quadratic(
    ls: &LevelSetField,
    u: &[f64],
    valid: &[bool],
    targets: &[bool],
) -> Result<(Vec<f64>, usize)> {
    let g = ls.grid;
    let n = g.len();
    for len in [u.len(), valid.len(), targets.len()] {
        if len != n {
            return Err(Error::Dimension {
                expected: n,
                found: len,
            });
        }
    }
    let h = g.h;
    let normals = nodal_normals(ls);
    let nb = |k: usize, d: Direction| g.neighbor(k, d);
    let ok = |k: Option<usize>| k.is_some_and(|k| valid[k]);

    // Second derivatives where the full 3×3 stencil is valid.
    let mut hess: [Vec<f64>; 3] = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut hess_ok = vec![false; n];
    // First derivatives where the central stencils are valid.
    let mut grad: [Vec<f64>; 2] = [vec![0.0; n], vec![0.0; n]];
    let mut grad_ok = vec![false; n];
    for k in 0..n {
        if !valid[k] {
            continue;
        }
        let (e, w, no, s) = (
            nb(k, Direction::East),
            nb(k, Direction::West),
            nb(k, Direction::North),
            nb(k, Direction::South),
        );
        if ok(e) && ok(w) && ok(no) && ok(s) {
            let (e, w, no, s) = (e.unwrap(), w.unwrap(), no.unwrap(), s.unwrap());
            grad[0][k] = (u[e] - u[w]) / (2.0 * h);
            grad[1][k] = (u[no] - u[s]) / (2.0 * h);
            grad_ok[k] = true;
            let ne = nb(e, Direction::North);
            let se = nb(e, Direction::South);
            let nw = nb(w, Direction::North);
            let sw = nb(w, Direction::South);
            if ok(ne) && ok(se) && ok(nw) && ok(sw) {
                hess[0][k] = (u[e] - 2.0 * u[k] + u[w]) / (h * h);
                hess[1][k] = (u[ne.unwrap()] - u[se.unwrap()] - u[nw.unwrap()] + u[sw.unwrap()]) / (4.0 * h * h);
                hess[2][k] = (u[no] - 2.0 * u[k] + u[s]) / (h * h);
                hess_ok[k] = true;
            }
        }
    }
    if !hess_ok.iter().any(|&b| b) {
        return Err(Error::Config(
            "extrapolation needs a valid 3x3 stencil somewhere".into(),
        ));
    }
    // Targets plus their upwind closure, so nodes at the edge of the target
    // set see complete upwind stencils.
    let mut wanted: Vec<bool> = (0..n).map(|k| valid[k] || targets[k]).collect();
    for _ in 0..UPWIND_CLOSURE_ROUNDS {
        let mut grown = false;
        for k in 0..n {
            if !wanted[k] || valid[k] {
                continue;
            }
            let Some(nk) = normals[k] else { continue };
            for (c, (minus, plus)) in AXES.into_iter().enumerate() {
                if nk[c].abs() < 1e-12 {
                    continue;
                }
                if let Some(m) = g.neighbor(k, if nk[c] > 0.0 { minus } else { plus }) {
                    if !wanted[m] {
                        wanted[m] = true;
                        grown = true;
                    }
                }
            }
        }
        if !grown {
            break;
        }
    }

    // Hessian: constant along normals.
    let mut h_known = hess_ok.clone();
    sweep(&g, &normals, &wanted, &mut h_known, |k, up, known| {
        let mut out = [0.0; 3];
        let mut wsum = 0.0;
        for &(nbk, w) in up {
            if !known[nbk] {
                continue;
            }
            wsum += w;
        }
        if wsum == 0.0 {
            return None;
        }
        for (c, o) in out.iter_mut().enumerate() {
            *o = up.iter().map(|&(nbk, w)| w * hess[c][nbk]).sum::<f64>() / wsum;
        }
        let mut change = 0.0f64;
        for c in 0..3 {
            change = change.max(rel_change(hess[c][k], out[c]));
            hess[c][k] = out[c];
        }
        Some(change)
    });

    // Gradient: slope n·H along normals.
    let mut g_known = grad_ok.clone();
    sweep(&g, &normals, &wanted, &mut g_known, |k, up, known| {
        if !h_known[k] {
            return None;
        }
        let n = normals[k]?;
        let mut wsum = 0.0;
        let mut acc = [0.0; 2];
        for &(nbk, w) in up {
            if !known[nbk] {
                continue;
            }
            wsum += w;
            acc[0] += w * grad[0][nbk];
            acc[1] += w * grad[1][nbk];
        }
        if wsum == 0.0 {
            return None;
        }
        let slope = [
            n[0] * hess[0][k] + n[1] * hess[1][k],
            n[0] * hess[1][k] + n[1] * hess[2][k],
        ];
        let new = [(acc[0] + h * slope[0]) / wsum, (acc[1] + h * slope[1]) / wsum];
        let change = rel_change(grad[0][k], new[0]).max(rel_change(grad[1][k], new[1]));
        grad[0][k] = new[0];
        grad[1][k] = new[1];
        Some(change)
    });

    // Field: slope n·∇u with the upwind truncation correction.
    let mut out = u.to_vec();
    let mut u_known = valid.to_vec();
    sweep(&g, &normals, &wanted, &mut u_known, |k, up, known| {
        if !g_known[k] || !h_known[k] {
            return None;
        }
        let n = normals[k]?;
        let mut wsum = 0.0;
        let mut acc = 0.0;
        for &(nbk, w) in up {
            if !known[nbk] {
                continue;
            }
            wsum += w;
            acc += w * out[nbk];
        }
        if wsum == 0.0 {
            return None;
        }
        let rhs = n[0] * grad[0][k] + n[1] * grad[1][k] - 0.5 * h * (n[0].abs() * hess[0][k] + n[1].abs() * hess[2][k]);
        let new = (acc + h * rhs) / wsum;
        let change = rel_change(out[k], new);
        out[k] = new;
        Some(change)
    });

    for k in 0..n {
        if !valid[k] && !targets[k] {
            out[k] = u[k];
        }
    }
    let missed = (0..n).filter(|&k| targets[k] && !u_known[k]).count();
    Ok((out, missed))
}

/// Gauss–Seidel sweeps of an upwind update until every reachable node of
/// `wanted` is reached, then relaxes until the values settle. `update`
/// receives the upwind neighbours with weights `|n_a|`, uses the known
/// ones, stores the new value and returns its relative change.
fn sweep(
    g: &UniformGrid2D,
    normals: &[Option<Point>],
    wanted: &[bool],
    known: &mut [bool],
    mut update: impl FnMut(usize, &[(usize, f64)], &[bool]) -> Option<f64>,
) {
    let mut up: Vec<(usize, f64)> = Vec::with_capacity(2);
    let mut solved = vec![false; g.len()];
    let visit = |k: usize, up: &mut Vec<(usize, f64)>| -> bool {
        let Some(n) = normals[k] else { return false };
        up.clear();
        for (c, (minus, plus)) in AXES.into_iter().enumerate() {
            let w = n[c].abs();
            if w < 1e-12 {
                continue;
            }
            match g.neighbor(k, if n[c] > 0.0 { minus } else { plus }) {
                Some(nbk) => up.push((nbk, w)),
                None => return false,
            }
        }
        !up.is_empty()
    };
    // Reach every node, provisionally using the upwind values known so far.
    loop {
        let mut changed = false;
        for &(rev_i, rev_j) in &ORDERS {
            for jj in 0..g.ny {
                let j = if rev_j { g.ny - 1 - jj } else { jj };
                for ii in 0..g.nx {
                    let i = if rev_i { g.nx - 1 - ii } else { ii };
                    let k = g.index(i, j);
                    if known[k] || !wanted[k] || !visit(k, &mut up) {
                        continue;
                    }
                    if update(k, &up, known).is_some() {
                        known[k] = true;
                        solved[k] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    // Relax the coupled equations (cycles where normals change sign).
    for _ in 0..MAX_RELAX_ROUNDS {
        let mut delta = 0.0f64;
        for &(rev_i, rev_j) in &ORDERS {
            for jj in 0..g.ny {
                let j = if rev_j { g.ny - 1 - jj } else { jj };
                for ii in 0..g.nx {
                    let i = if rev_i { g.nx - 1 - ii } else { ii };
                    let k = g.index(i, j);
                    if solved[k] && visit(k, &mut up) {
                        if let Some(d) = update(k, &up, known) {
                            delta = delta.max(d);
                        }
                    }
                }
            }
        }
        if delta <= RELAX_TOL {
            break;
        }
    }
}

#[inline]
fn rel_change(old: f64, new: f64) -> f64 {
    if old.is_finite() {
        (new - old).abs() / new.abs().max(1.0)
    } else {
        f64::INFINITY
    }
}

/// Area, perimeter and `4π·area/perimeter²` of `{ρ < 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceMetrics {
    pub area: f64,
    pub perimeter: f64,
    pub isoperimetric_ratio: f64,
}

/// Smoothed Heaviside/delta quadrature with half width `1.5 h`.
pub fn interface_metrics(ls: &LevelSetField) -> InterfaceMetrics {
    let g = &ls.grid;
    let h = g.h;
    let eps = 1.5 * h;
    let pi = std::f64::consts::PI;
    let mut area = 0.0;
    let mut perimeter = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let r = ls.at(i, j);
            let inside = if r < -eps {
                1.0
            } else if r > eps {
                0.0
            } else {
                let x = -r;
                0.5 * (1.0 + x / eps + (pi * x / eps).sin() / pi)
            };
            area += inside;
            if r.abs() < eps {
                let delta = (1.0 + (pi * r / eps).cos()) / (2.0 * eps);
                let gr = ls.nodal_gradient(i, j);
                perimeter += delta * gr[0].hypot(gr[1]);
            }
        }
    }
    area *= h * h;
    perimeter *= h * h;
    let ratio = if perimeter > 0.0 {
        4.0 * pi * area / (perimeter * perimeter)
    } else {
        0.0
    };
    InterfaceMetrics {
        area,
        perimeter,
        isoperimetric_ratio: ratio,
    }
}
