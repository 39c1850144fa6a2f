//! Structural invariants of the assembled embedded-boundary operator.
#![allow(clippy::type_complexity, clippy::neg_cmp_op_on_partial_ord)]

use ebetd::driver::problems::{peanut, virus};
use ebetd::ebpoisson::{EmbeddedOperator, Neighbor, ZeroDirichlet};
use ebetd::geometry::{shapes, LevelSet, Point, UniformGrid2D};
use ebetd::sparse::SymSparseMatrix;
use proptest::prelude::*;

/// Complete Cholesky of a symmetric matrix in band storage. Returns false
/// on a nonpositive pivot. Dofs follow node order, so the half bandwidth is
/// at most one grid row.
fn banded_cholesky_succeeds(a: &SymSparseMatrix) -> bool {
    let n = a.n();
    let mut bw = 0;
    for i in 0..n {
        let (cols, _) = a.row(i);
        for &j in cols {
            bw = bw.max(i.abs_diff(j));
        }
    }
    // band[i][k] holds L(i, i - bw + k).
    let w = bw + 1;
    let mut band = vec![0.0; n * w];
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if j <= i {
                band[i * w + (j + bw - i)] = v;
            }
        }
    }
    for i in 0..n {
        let lo = i.saturating_sub(bw);
        for j in lo..=i {
            let jlo = j.saturating_sub(bw).max(lo);
            let mut s = band[i * w + (j + bw - i)];
            for k in jlo..j {
                s -= band[i * w + (k + bw - i)] * band[j * w + (k + bw - j)];
            }
            if j == i {
                if !(s > 0.0) {
                    return false;
                }
                band[i * w + bw] = s.sqrt();
            } else {
                band[i * w + (j + bw - i)] = s / band[j * w + bw];
            }
        }
    }
    true
}

fn assert_structure(op: &EmbeddedOperator) {
    let a = &op.matrix;
    assert!(a.is_symmetric());
    for i in 0..a.n() {
        let (cols, vals) = a.row(i);
        let mut diag = 0.0;
        let mut off = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i {
                diag = -v;
            } else {
                assert_eq!(a.get(j, i), v, "entry ({i},{j}) not mirrored");
                assert!(-v <= 0.0, "positive off-diagonal of -A in row {i}");
                off += v;
            }
        }
        assert!(diag > 0.0, "row {i}: diagonal of -A is {diag}");
        assert!(diag >= off * (1.0 - 1e-14), "row {i} not diagonally dominant");
    }
}

fn unit_beta(_: Point) -> f64 {
    1.0
}

#[test]
fn benchmark_geometries_are_symmetric_and_definite() {
    for cells in [80, 160] {
        let grid = UniformGrid2D::square(-1.0, 1.0, cells).unwrap();
        let circle = shapes::circle([0.05, -0.02], 0.63);
        let pea = peanut::geometry();
        let vir = virus::geometry();
        let cases: [(&str, &dyn LevelSet, &(dyn Fn(Point) -> f64 + Sync)); 3] = [
            ("circle", &circle, &unit_beta),
            ("peanut", &pea, &peanut::beta),
            ("virus", &vir, &virus::beta),
        ];
        for (name, geom, beta) in cases {
            let ls = grid.sample(geom);
            let op = EmbeddedOperator::assemble_with_geometry(&ls, geom, beta, &ZeroDirichlet, 0.0).unwrap();
            assert_structure(&op);
            let neg = op.matrix.scaled(-1.0);
            assert!(banded_cholesky_succeeds(&neg), "{name} at {cells} cells: -A not SPD");
        }
    }
}

#[test]
fn cholesky_oracle_rejects_indefinite() {
    let a = SymSparseMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
    assert!(!banded_cholesky_succeeds(&a));
    assert!(banded_cholesky_succeeds(&SymSparseMatrix::identity(3)));
}

fn manufactured(p: Point) -> f64 {
    (p[0] + 0.3).sin() * (1.5 * p[1]).exp()
}

/// Max truncation error at rows whose four arms are all unknowns, at rows
/// with at least one eliminated ghost, and max error of the eliminated
/// ghost values themselves.
fn truncation(cells: usize) -> (f64, f64, f64) {
    let grid = UniformGrid2D::square(-1.0, 1.0, cells).unwrap();
    let geom = peanut::geometry();
    let ls = grid.sample(&geom);
    let bc = exact_bc(manufactured);
    let op = EmbeddedOperator::assemble_with_geometry(&ls, &geom, &peanut::beta, &bc, 0.0).unwrap();
    let u = op.sample(manufactured);
    let au = op.apply(&u);
    let (mut interior, mut modified, mut ghost) = (0.0f64, 0.0f64, 0.0f64);
    for d in 0..op.n_dofs() {
        let p = op.dof_point(d);
        let err = (au[d] - div_beta_grad(p, &manufactured)).abs();
        let mut eliminated = false;
        for nb in &op.neighbors[d] {
            if let Neighbor::Ghost(g) = nb {
                eliminated = true;
                let v = g.evaluate(u[d], &bc, 0.0);
                ghost = ghost.max((v - manufactured(grid.point(g.ghost))).abs());
            }
        }
        if eliminated {
            modified = modified.max(err);
        } else {
            interior = interior.max(err);
        }
    }
    (interior, modified, ghost)
}

fn exact_bc(f: impl Fn(Point) -> f64 + Sync) -> impl Fn(Point, f64) -> f64 + Sync {
    move |p, _| f(p)
}

/// `∇·(β∇u)` by fourth-order central differences with a tiny step, an
/// oracle independent of the operator's stencils.
fn div_beta_grad(p: Point, u: &impl Fn(Point) -> f64) -> f64 {
    let e = 1e-3;
    let flux = |q: Point, axis: usize| {
        let mut a = q;
        let mut b = q;
        let mut c = q;
        let mut d = q;
        a[axis] += 2.0 * e;
        b[axis] += e;
        c[axis] -= e;
        d[axis] -= 2.0 * e;
        peanut::beta(q) * (-u(a) + 8.0 * u(b) - 8.0 * u(c) + u(d)) / (12.0 * e)
    };
    let mut total = 0.0;
    for axis in 0..2 {
        let mut a = p;
        let mut b = p;
        let mut c = p;
        let mut d = p;
        a[axis] += 2.0 * e;
        b[axis] += e;
        c[axis] -= e;
        d[axis] -= 2.0 * e;
        total += (-flux(a, axis) + 8.0 * flux(b, axis) - 8.0 * flux(c, axis) + flux(d, axis)) / (12.0 * e);
    }
    total
}

#[test]
fn truncation_error_orders() {
    let (i1, m1, g1) = truncation(80);
    let (i2, m2, g2) = truncation(160);
    let interior_rate = (i1 / i2).log2();
    assert!(interior_rate > 1.8, "interior truncation rate {interior_rate}");
    // Ghost values carry the O(h^2) interpolation error, which the 1/h^2
    // stencil weight turns into an O(1) row residual.
    let ghost_rate = (g1 / g2).log2();
    assert!(ghost_rate > 1.8, "ghost value rate {ghost_rate}");
    assert!(m2 < 1.5 * m1, "modified-row truncation grows: {m1:.3e} -> {m2:.3e}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn random_ellipses_keep_structure(
        cx in -0.2f64..0.2, cy in -0.2f64..0.2,
        a in 0.3f64..0.7, b in 0.3f64..0.7,
        theta in 0.0f64..std::f64::consts::PI,
        cells in 24usize..56,
        beta_amp in 0.0f64..0.9,
    ) {
        let (s, c) = theta.sin_cos();
        let value = move |p: Point| {
            let (x, y) = (p[0] - cx, p[1] - cy);
            let (u, v) = (c * x + s * y, -s * x + c * y);
            (u / a).powi(2) + (v / b).powi(2) - 1.0
        };
        let gradient = move |p: Point| {
            let (x, y) = (p[0] - cx, p[1] - cy);
            let (u, v) = (c * x + s * y, -s * x + c * y);
            let (gu, gv) = (2.0 * u / (a * a), 2.0 * v / (b * b));
            [c * gu - s * gv, s * gu + c * gv]
        };
        let geom = ebetd::geometry::FnLevelSet { value, gradient };
        let grid = UniformGrid2D::square(-1.0, 1.0, cells).unwrap();
        let ls = grid.sample(&geom);
        let beta = move |p: Point| 1.0 + beta_amp * (3.0 * p[0] * p[1]).sin();
        let op = EmbeddedOperator::assemble_with_geometry(&ls, &geom, &beta, &ZeroDirichlet, 0.0).unwrap();
        assert_structure(&op);
        prop_assert!(banded_cholesky_succeeds(&op.matrix.scaled(-1.0)));
        // Dense cross-check of the band oracle on small systems.
        if op.n_dofs() <= 400 {
            prop_assert!(op.matrix.to_dense().scale(-1.0).cholesky().is_some());
        }
    }

    #[test]
    fn maximum_principle_on_random_data(
        r in 0.35f64..0.8, f0 in 0.0f64..3.0, g0 in 0.0f64..2.0, cells in 24usize..64,
    ) {
        let geom = shapes::circle([0.03, 0.0], r);
        let grid = UniformGrid2D::square(-1.0, 1.0, cells).unwrap();
        let ls = grid.sample(&geom);
        let bc = move |p: Point, _t: f64| g0 * (1.0 + p[0]);
        let op = EmbeddedOperator::assemble_with_geometry(&ls, &geom, &unit_beta, &bc, 0.0).unwrap();
        let f = op.sample(|p| -f0 * (1.0 + p[1] * p[1]));
        let sol = op.solve(&f, 1e-12).unwrap();
        prop_assert!(sol.x.iter().all(|&v| v >= -1e-10));
    }
}
