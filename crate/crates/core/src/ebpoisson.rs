//! Symmetric embedded-boundary discretization of `∇·(β∇u)` with Dirichlet
//! data on an implicitly described boundary.
//!
//! Unknowns live on computational nodes. Each stencil arm that reaches an
//! interior ghost node is closed by expressing the ghost value through the
//! arm's own node and boundary data, so only the diagonal and the boundary
//! load change and the matrix stays symmetric:
//!
//! * the ghost borders the interface along the arm (or sits on the box
//!   rim): linear interpolation between the node and the crossing;
//! * otherwise: a three-centre multiquadric interpolant with a linear tail
//!   through the node and the boundary projections of node and ghost.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{
    classify_points, closest_boundary_point, find_crossing, Direction, LevelSet, LevelSetField, Point, PointClass,
    UniformGrid2D,
};
use crate::sparse::{cg_solve, ic0_factor, CgOutcome, SymSparseMatrix};

/// Dirichlet values on the boundary, possibly time dependent.
pub trait DirichletData: Sync {
    fn value(&self, p: Point, t: f64) -> f64;
}

impl<F> DirichletData for F
where
    F: Fn(Point, f64) -> f64 + Sync,
{
    fn value(&self, p: Point, t: f64) -> f64 {
        self(p, t)
    }
}

/// Homogeneous boundary data.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroDirichlet;

impl DirichletData for ZeroDirichlet {
    fn value(&self, _p: Point, _t: f64) -> f64 {
        0.0
    }
}

/// Largest admissible condition number of a local RBF system.
pub const RBF_CONDITION_LIMIT: f64 = 1e12;

/// Ghost value as a combination of the arm's node and boundary values:
/// `u_ghost = w_node u_node + Σ weights[i] u_D(points[i])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostRule {
    pub ghost: usize,
    pub w_node: f64,
    pub points: [Point; 2],
    pub weights: [f64; 2],
    pub count: usize,
    pub kind: GhostKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GhostKind {
    /// Linear interpolation along the arm through the boundary crossing.
    Line,
    /// Multiquadric interpolation through boundary projections.
    Rbf,
}

impl GhostRule {
    /// Distance from the arm's node to the boundary crossing (line rule only).
    pub fn crossing_distance(&self, h: f64) -> Option<f64> {
        match self.kind {
            GhostKind::Line => Some(h / self.weights[0]),
            GhostKind::Rbf => None,
        }
    }

    pub fn evaluate(&self, u_node: f64, bc: &dyn DirichletData, t: f64) -> f64 {
        let mut v = self.w_node * u_node;
        for i in 0..self.count {
            v += self.weights[i] * bc.value(self.points[i], t);
        }
        v
    }
}

/// What sits at the end of one stencil arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Neighbor {
    Dof(usize),
    Ghost(GhostRule),
}

/// One Dirichlet contribution to the load: `weight · u_D(point, t)` in row `dof`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTerm {
    pub dof: usize,
    pub weight: f64,
    pub point: Point,
}

/// Cardinal weights of the local RBF interpolant evaluated at the ghost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfWeights {
    pub w_node: f64,
    pub points: [Point; 2],
    pub weights: [f64; 2],
    pub count: usize,
    pub condition: f64,
}

/// Assembled operator: `matrix · U + boundary_load ≈ ∇·(β∇u)` at the dofs.
#[derive(Debug, Clone)]
pub struct EmbeddedOperator {
    pub grid: UniformGrid2D,
    pub classes: Vec<PointClass>,
    pub matrix: SymSparseMatrix,
    /// Node index of every dof.
    pub dof_nodes: Vec<usize>,
    /// Dof index of every node, `None` for non-computational nodes.
    pub node_dofs: Vec<Option<usize>>,
    /// Stencil arms per dof, indexed by [`Direction::slot`].
    pub neighbors: Vec<[Neighbor; 4]>,
    /// Face-midpoint β per dof and arm.
    pub beta_faces: Vec<[f64; 4]>,
    pub boundary_terms: Vec<BoundaryTerm>,
    /// Load at the assembly time.
    pub boundary_load: Vec<f64>,
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn dist(a: Point, b: Point) -> f64 {
    let d = sub(a, b);
    d[0].hypot(d[1])
}

fn face_midpoint(grid: &UniformGrid2D, a: usize, b: usize) -> Point {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let p = grid.point(lo);
    let q = grid.point(hi);
    [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
}

/// Samples gathered along one stencil arm.
#[derive(Debug, Clone, Copy, Default)]
struct ArmSamples {
    clean: [(f64, f64); 2],
    clean_len: usize,
    /// Multiquadric ghost met before any clean sample.
    first_rbf: Option<(f64, f64)>,
}

impl ArmSamples {
    fn push_clean(&mut self, offset: f64, value: f64) {
        self.clean[self.clean_len] = (offset, value);
        self.clean_len += 1;
    }
}

/// Slope at 0 of the parabola through `(0, u0)`, `a` and `b`.
fn lagrange_slope(u0: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (x1, u1) = a;
    let (x2, u2) = b;
    -(x1 + x2) / (x1 * x2) * u0 - x2 / (x1 * (x1 - x2)) * u1 - x1 / (x2 * (x2 - x1)) * u2
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves the symmetric local RBF system for the cardinal weights at
/// `target`. Coordinates are shifted to `origin` and scaled by `h`; the
/// multiquadric shape parameter equals `h`, i.e. one in scaled units.
fn rbf_solve(
    centers: &[Point],
    target: Point,
    origin: Point,
    h: f64,
    tail: &[Box<dyn Fn(Point) -> f64>],
) -> Result<(Vec<f64>, f64)> {
    let scaled = |p: Point| [(p[0] - origin[0]) / h, (p[1] - origin[1]) / h];
    let c: Vec<Point> = centers.iter().map(|&p| scaled(p)).collect();
    let x = scaled(target);
    let nc = c.len();
    let nt = tail.len();
    let size = nc + nt;
    let psi = |a: Point, b: Point| (dist(a, b).powi(2) + 1.0).sqrt();
    let mut b = DMatrix::zeros(size, size);
    let mut rhs = DVector::zeros(size);
    for i in 0..nc {
        for j in 0..nc {
            b[(i, j)] = psi(c[i], c[j]);
        }
        for (k, f) in tail.iter().enumerate() {
            b[(i, nc + k)] = f(c[i]);
            b[(nc + k, i)] = f(c[i]);
        }
        rhs[i] = psi(x, c[i]);
    }
    for (k, f) in tail.iter().enumerate() {
        rhs[nc + k] = f(x);
    }
    let cond = condition_number(&b);
    if !(cond <= RBF_CONDITION_LIMIT) {
        return Ok((Vec::new(), cond));
    }
    let w = b.lu().solve(&rhs).ok_or(Error::SingularRbf {
        node: usize::MAX,
        condition: cond,
    })?;
    Ok((w.iter().take(nc).copied().collect(), cond))
}

/// Weights reproducing the ghost value from `u(node)`, `u(g1)`, `u(g2)`,
/// where `g1` and `g2` are boundary points. Coincident boundary points
/// collapse to one; nearly collinear centres switch the tail to `{1, t}`
/// along the centres' principal direction.
pub fn rbf_ghost_weights(node: Point, ghost: Point, g1: Point, g2: Point, h: f64) -> Result<RbfWeights> {
    let coincident = dist(g1, g2) <= 1e-8 * h;
    let line_tail = |dir: Point| -> Vec<Box<dyn Fn(Point) -> f64>> {
        vec![
            Box::new(|_p: Point| 1.0),
            Box::new(move |p: Point| p[0] * dir[0] + p[1] * dir[1]),
        ]
    };
    if coincident {
        let g = [0.5 * (g1[0] + g2[0]), 0.5 * (g1[1] + g2[1])];
        let d = sub(g, node);
        let len = d[0].hypot(d[1]);
        let dir = if len > 0.0 {
            [d[0] / len, d[1] / len]
        } else {
            [1.0, 0.0]
        };
        let (w, cond) = rbf_solve(&[node, g], ghost, node, h, &line_tail(dir))?;
        if w.is_empty() {
            return Err(Error::SingularRbf {
                node: usize::MAX,
                condition: cond,
            });
        }
        return Ok(RbfWeights {
            w_node: w[0],
            points: [g, g],
            weights: [w[1], 0.0],
            count: 1,
            condition: cond,
        });
    }
    let centers = [node, g1, g2];
    let full: Vec<Box<dyn Fn(Point) -> f64>> = vec![
        Box::new(|_p: Point| 1.0),
        Box::new(|p: Point| p[0]),
        Box::new(|p: Point| p[1]),
    ];
    let (mut w, mut cond) = rbf_solve(&centers, ghost, node, h, &full)?;
    if w.is_empty() {
        // Principal direction of the centred centres.
        let m = [(node[0] + g1[0] + g2[0]) / 3.0, (node[1] + g1[1] + g2[1]) / 3.0];
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for p in &centers {
            let d = sub(*p, m);
            sxx += d[0] * d[0];
            sxy += d[0] * d[1];
            syy += d[1] * d[1];
        }
        let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
        let dir = [angle.cos(), angle.sin()];
        let (w2, cond2) = rbf_solve(&centers, ghost, node, h, &line_tail(dir))?;
        if w2.is_empty() {
            return Err(Error::SingularRbf {
                node: usize::MAX,
                condition: cond2,
            });
        }
        w = w2;
        cond = cond2;
    }
    Ok(RbfWeights {
        w_node: w[0],
        points: [g1, g2],
        weights: [w[1], w[2]],
        count: 2,
        condition: cond,
    })
}

impl EmbeddedOperator {
    /// Assembles with crossings and projections taken from the sampled field.
    pub fn assemble(
        ls: &LevelSetField,
        beta: &(dyn Fn(Point) -> f64 + Sync),
        bc: &dyn DirichletData,
        t: f64,
    ) -> Result<Self> {
        Self::assemble_with_geometry(ls, ls, beta, bc, t)
    }

    /// Assembles using the node classification of `ls` and the boundary
    /// geometry (crossings, projections) of `geometry`.
    pub fn assemble_with_geometry(
        ls: &LevelSetField,
        geometry: &dyn LevelSet,
        beta: &(dyn Fn(Point) -> f64 + Sync),
        bc: &dyn DirichletData,
        t: f64,
    ) -> Result<Self> {
        let grid = ls.grid;
        let h = grid.h;
        let h2 = h * h;
        let classes = classify_points(ls);
        let mut node_dofs = vec![None; grid.len()];
        let mut dof_nodes = Vec::new();
        for (k, c) in classes.iter().enumerate() {
            if *c == PointClass::Computational {
                node_dofs[k] = Some(dof_nodes.len());
                dof_nodes.push(k);
            }
        }
        if dof_nodes.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let proj_tol = 1e-12 * h;
        let mut triplets = Vec::with_capacity(5 * dof_nodes.len());
        let mut neighbors = Vec::with_capacity(dof_nodes.len());
        let mut beta_faces = Vec::with_capacity(dof_nodes.len());
        let mut boundary_terms = Vec::new();
        for (dof, &node) in dof_nodes.iter().enumerate() {
            let p = grid.point(node);
            let mut diag = 0.0;
            let mut arms = [Neighbor::Dof(0); 4];
            let mut faces = [0.0; 4];
            for dir in Direction::ALL {
                let nb = grid
                    .neighbor(node, dir)
                    .expect("computational nodes are never on the rim");
                let bf = beta(face_midpoint(&grid, node, nb));
                faces[dir.slot()] = bf;
                let coef = bf / h2;
                if let Some(q) = node_dofs[nb] {
                    triplets.push((dof, q, coef));
                    diag -= coef;
                    arms[dir.slot()] = Neighbor::Dof(q);
                    continue;
                }
                debug_assert_eq!(classes[nb], PointClass::InteriorGhost);
                let next = grid.neighbor(nb, dir);
                let rule = match next {
                    Some(o) if ls.is_inside(o) => {
                        let ghost = grid.point(nb);
                        let g1 = closest_boundary_point(geometry, ghost, proj_tol)?;
                        let g2 = closest_boundary_point(geometry, p, proj_tol)?;
                        let w = rbf_ghost_weights(p, ghost, g1, g2, h).map_err(|e| match e {
                            Error::SingularRbf { condition, .. } => Error::SingularRbf { node, condition },
                            other => other,
                        })?;
                        GhostRule {
                            ghost: nb,
                            w_node: w.w_node,
                            points: w.points,
                            weights: w.weights,
                            count: w.count,
                            kind: GhostKind::Rbf,
                        }
                    }
                    other => {
                        let (point, s) = match other {
                            Some(o) => {
                                let c = find_crossing(&grid, geometry, nb, o)?;
                                (c.point, h + c.distance)
                            }
                            None => (grid.point(nb), h),
                        };
                        if s < h * (1.0 - 1e-12) {
                            return Err(Error::DegenerateDenominator { node });
                        }
                        let g_gamma = h / s;
                        GhostRule {
                            ghost: nb,
                            w_node: 1.0 - g_gamma,
                            points: [point, point],
                            weights: [g_gamma, 0.0],
                            count: 1,
                            kind: GhostKind::Line,
                        }
                    }
                };
                // β (u_ghost − u_P)/h² with u_ghost eliminated.
                diag += coef * (rule.w_node - 1.0);
                for i in 0..rule.count {
                    boundary_terms.push(BoundaryTerm {
                        dof,
                        weight: coef * rule.weights[i],
                        point: rule.points[i],
                    });
                }
                arms[dir.slot()] = Neighbor::Ghost(rule);
            }
            triplets.push((dof, dof, diag));
            neighbors.push(arms);
            beta_faces.push(faces);
        }
        let matrix = SymSparseMatrix::from_triplets(dof_nodes.len(), &triplets);
        let mut op = Self {
            grid,
            classes,
            matrix,
            dof_nodes,
            node_dofs,
            neighbors,
            beta_faces,
            boundary_terms,
            boundary_load: Vec::new(),
        };
        op.boundary_load = op.boundary_load_at(bc, t);
        Ok(op)
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_nodes.len()
    }

    pub fn dof_point(&self, dof: usize) -> Point {
        self.grid.point(self.dof_nodes[dof])
    }

    /// Boundary load for the data at time `t`.
    pub fn boundary_load_at(&self, bc: &dyn DirichletData, t: f64) -> Vec<f64> {
        let mut b = vec![0.0; self.n_dofs()];
        for term in &self.boundary_terms {
            b[term.dof] += term.weight * bc.value(term.point, t);
        }
        b
    }

    pub fn refresh_boundary_load(&mut self, bc: &dyn DirichletData, t: f64) {
        self.boundary_load = self.boundary_load_at(bc, t);
    }

    /// `matrix · u + boundary_load`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut y = self.matrix.matvec(u);
        y.iter_mut().zip(&self.boundary_load).for_each(|(a, b)| *a += b);
        y
    }

    /// Samples a nodal function at the dofs.
    pub fn sample(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.dof_nodes.iter().map(|&k| f(self.grid.point(k))).collect()
    }

    /// Solves `∇·(β∇u) = f` for the dof values with IC(0)-preconditioned CG
    /// on the positive definite `−matrix`.
    pub fn solve(&self, f: &[f64], tol: f64) -> Result<CgOutcome> {
        let neg = self.matrix.scaled(-1.0);
        let rhs: Vec<f64> = self.boundary_load.iter().zip(f).map(|(b, f)| b - f).collect();
        let pre = ic0_factor(&neg)?;
        cg_solve(&neg, &rhs, Some(&pre), tol, 10 * self.n_dofs().max(10))
    }

    /// Walks away from `dof` along one arm collecting `(offset, value)`
    /// samples until two clean ones are found. Dof values and line-rule
    /// boundary crossings are clean; a multiquadric ghost contributes a
    /// flagged sample and the walk continues at the dof beyond it, if any.
    fn arm_samples(&self, dof: usize, dir: Direction, u: &[f64], bc: &dyn DirichletData, t: f64) -> ArmSamples {
        let h = self.grid.h;
        let mut arm = ArmSamples::default();
        let mut cur = dof;
        let mut offset = 0.0;
        while arm.clean_len < 2 {
            match self.neighbors[cur][dir.slot()] {
                Neighbor::Dof(q) => {
                    offset += h;
                    arm.push_clean(offset, u[q]);
                    cur = q;
                }
                Neighbor::Ghost(rule) => match rule.kind {
                    GhostKind::Line => {
                        arm.push_clean(offset + h / rule.weights[0], bc.value(rule.points[0], t));
                        break;
                    }
                    GhostKind::Rbf => {
                        if arm.first_rbf.is_none() && arm.clean_len == 0 {
                            arm.first_rbf = Some((offset + h, rule.evaluate(u[cur], bc, t)));
                        }
                        let beyond = self.grid.neighbor(rule.ghost, dir).and_then(|k| self.node_dofs[k]);
                        match beyond {
                            Some(q) => {
                                offset += 2.0 * h;
                                arm.push_clean(offset, u[q]);
                                cur = q;
                            }
                            None => break,
                        }
                    }
                },
            }
        }
        arm
    }

    /// Least-squares quadratic through the dofs of the surrounding 5×5
    /// block and the boundary points of their ghost rules; returns its
    /// gradient at the dof.
    fn local_fit_gradient(&self, dof: usize, u: &[f64], bc: &dyn DirichletData, t: f64) -> Option<Point> {
        let g = &self.grid;
        let h = g.h;
        let node = self.dof_nodes[dof];
        let origin = g.point(node);
        let (i0, j0) = g.ij(node);
        let mut samples: Vec<(Point, f64)> = Vec::new();
        let boundary = |q: usize, samples: &mut Vec<(Point, f64)>| {
            for arm in &self.neighbors[q] {
                if let Neighbor::Ghost(rule) = arm {
                    for &pt in &rule.points[..rule.count] {
                        if dist(pt, origin) <= 2.5 * h && !samples.iter().any(|(s, _)| dist(*s, pt) < 1e-9 * h) {
                            samples.push((pt, bc.value(pt, t)));
                        }
                    }
                }
            }
        };
        for dj in -2isize..=2 {
            for di in -2isize..=2 {
                let (i, j) = (i0 as isize + di, j0 as isize + dj);
                if i < 0 || j < 0 || i >= g.nx as isize || j >= g.ny as isize {
                    continue;
                }
                let k = g.index(i as usize, j as usize);
                if let Some(q) = self.node_dofs[k] {
                    if q != dof {
                        samples.push((g.point(k), u[q]));
                    }
                    boundary(q, &mut samples);
                }
            }
        }
        if samples.len() < 8 {
            return None;
        }
        let rows = samples.len();
        let mut a = DMatrix::zeros(rows, 5);
        let mut b = DVector::zeros(rows);
        for (r, (p, v)) in samples.iter().enumerate() {
            let (x, y) = ((p[0] - origin[0]) / h, (p[1] - origin[1]) / h);
            a[(r, 0)] = x;
            a[(r, 1)] = y;
            a[(r, 2)] = x * x;
            a[(r, 3)] = x * y;
            a[(r, 4)] = y * y;
            b[r] = v - u[dof];
        }
        let svd = a.svd(true, true);
        let sv = &svd.singular_values;
        if sv.min() <= 1e-8 * sv.max() {
            return None;
        }
        let coef = svd.solve(&b, 0.0).ok()?;
        Some([coef[0] / h, coef[1] / h])
    }

    /// Gradient at every dof from three-point (possibly nonuniform)
    /// differences. Boundary crossings enter at their true distance. Of the
    /// clean two-sample stencils (central, forward, backward) the one with
    /// the smallest reach is used, central on ties. An axis without a clean
    /// stencil takes its component from a local least-squares quadratic.
    pub fn evaluate_gradient(&self, u: &[f64], bc: &dyn DirichletData, t: f64) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.n_dofs());
        for dof in 0..self.n_dofs() {
            let u0 = u[dof];
            let mut g = [0.0; 2];
            let mut lsq: Option<Option<Point>> = None;
            for (c, (minus, plus)) in [(Direction::West, Direction::East), (Direction::South, Direction::North)]
                .into_iter()
                .enumerate()
            {
                let m = self.arm_samples(dof, minus, u, bc, t);
                let p = self.arm_samples(dof, plus, u, bc, t);
                let neg = |s: (f64, f64)| (-s.0, s.1);
                let mut best: Option<(f64, [(f64, f64); 2])> = None;
                let mut consider = |pts: [(f64, f64); 2]| {
                    let reach = pts[0].0.abs().max(pts[1].0.abs());
                    if best.is_none_or(|(r, _)| reach < r * (1.0 - 1e-12)) {
                        best = Some((reach, pts));
                    }
                };
                if m.clean_len >= 1 && p.clean_len >= 1 {
                    consider([neg(m.clean[0]), p.clean[0]]);
                }
                if p.clean_len == 2 {
                    consider([p.clean[0], p.clean[1]]);
                }
                if m.clean_len == 2 {
                    consider([neg(m.clean[0]), neg(m.clean[1])]);
                }
                g[c] = match best {
                    Some((_, pts)) => lagrange_slope(u0, pts[0], pts[1]),
                    None => {
                        let fit = *lsq.get_or_insert_with(|| self.local_fit_gradient(dof, u, bc, t));
                        match fit {
                            Some(fg) => fg[c],
                            None => {
                                let first = |a: &ArmSamples| a.first_rbf.or((a.clean_len > 0).then(|| a.clean[0]));
                                match (first(&m), first(&p)) {
                                    (Some(ms), Some(ps)) => lagrange_slope(u0, neg(ms), ps),
                                    _ => 0.0,
                                }
                            }
                        }
                    }
                };
            }
            out.push(g);
        }
        out
    }

    /// Nodal field with dof values, reconstructed ghost values (first arm
    /// that reaches each ghost) and `fill` elsewhere.
    pub fn prolong(&self, u: &[f64], bc: &dyn DirichletData, t: f64, fill: f64) -> Vec<f64> {
        let mut out = vec![fill; self.grid.len()];
        let mut set = vec![false; self.grid.len()];
        for (dof, &node) in self.dof_nodes.iter().enumerate() {
            out[node] = u[dof];
            set[node] = true;
        }
        for dof in 0..self.n_dofs() {
            for arm in &self.neighbors[dof] {
                if let Neighbor::Ghost(rule) = arm {
                    if !set[rule.ghost] {
                        out[rule.ghost] = rule.evaluate(u[dof], bc, t);
                        set[rule.ghost] = true;
                    }
                }
            }
        }
        out
    }
}
