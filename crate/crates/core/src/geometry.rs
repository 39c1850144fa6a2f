//! Uniform Cartesian grids, level-set descriptions of irregular domains, and
//! the geometric queries the embedded-boundary discretization needs.
//!
//! Sign convention: a level set is negative inside the domain and positive
//! outside. A node with value exactly zero is treated as inside.

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Node-centred uniform grid; node `(i, j)` sits at `(x_lo + i h, y_lo + j h)`
/// and has linear index `i + nx * j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid2D {
    pub x_lo: f64,
    pub y_lo: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl UniformGrid2D {
    pub fn new(x_lo: f64, y_lo: f64, h: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Config(format!("grid spacing must be positive, got {h}")));
        }
        if nx < 4 || ny < 4 {
            return Err(Error::Config(format!(
                "grid needs at least 4 nodes per axis, got {nx}x{ny}"
            )));
        }
        Ok(Self { x_lo, y_lo, h, nx, ny })
    }

    /// Square box `[lo, hi]²` split into `cells` intervals per axis.
    pub fn square(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        let h = (hi - lo) / cells as f64;
        Self::new(lo, lo, h, cells + 1, cells + 1)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.nx * j
    }

    #[inline]
    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.h
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y_lo + j as f64 * self.h
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Point {
        let (i, j) = self.ij(idx);
        [self.x(i), self.y(j)]
    }

    pub fn x_hi(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn y_hi(&self) -> f64 {
        self.y(self.ny - 1)
    }

    pub fn on_rim(&self, idx: usize) -> bool {
        let (i, j) = self.ij(idx);
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    /// Axis neighbour of `idx` in direction `dir`, if it exists.
    pub fn neighbor(&self, idx: usize, dir: Direction) -> Option<usize> {
        let (i, j) = self.ij(idx);
        let (di, dj) = dir.offset();
        let ni = i as isize + di;
        let nj = j as isize + dj;
        if ni < 0 || nj < 0 || ni >= self.nx as isize || nj >= self.ny as isize {
            None
        } else {
            Some(self.index(ni as usize, nj as usize))
        }
    }

    /// Samples a level set at every node.
    pub fn sample(&self, ls: &dyn LevelSet) -> LevelSetField {
        let values = (0..self.len()).map(|k| ls.value(self.point(k))).collect();
        LevelSetField { grid: *self, values }
    }

    /// Samples an arbitrary function at every node.
    pub fn sample_fn(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        (0..self.len()).map(|k| f(self.point(k))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

/// The four axis directions, in stencil order east, west, north, south.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    East,
    West,
    North,
    South,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::East, Direction::West, Direction::North, Direction::South];

    pub fn offset(self) -> (isize, isize) {
        match self {
            Direction::East => (1, 0),
            Direction::West => (-1, 0),
            Direction::North => (0, 1),
            Direction::South => (0, -1),
        }
    }

    pub fn axis(self) -> Axis {
        match self {
            Direction::East | Direction::West => Axis::X,
            Direction::North | Direction::South => Axis::Y,
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::East => Direction::West,
            Direction::West => Direction::East,
            Direction::North => Direction::South,
            Direction::South => Direction::North,
        }
    }

    /// Position in [`Direction::ALL`].
    pub fn slot(self) -> usize {
        self as usize
    }
}

/// A scalar function whose negative region is the domain.
pub trait LevelSet: Sync {
    fn value(&self, p: Point) -> f64;
    fn gradient(&self, p: Point) -> Point;
}

impl<T: LevelSet + ?Sized> LevelSet for &T {
    fn value(&self, p: Point) -> f64 {
        (**self).value(p)
    }
    fn gradient(&self, p: Point) -> Point {
        (**self).gradient(p)
    }
}

/// Level set given by a closure and its gradient.
pub struct FnLevelSet<F, G> {
    pub value: F,
    pub gradient: G,
}

impl<F, G> LevelSet for FnLevelSet<F, G>
where
    F: Fn(Point) -> f64 + Sync,
    G: Fn(Point) -> Point + Sync,
{
    fn value(&self, p: Point) -> f64 {
        (self.value)(p)
    }
    fn gradient(&self, p: Point) -> Point {
        (self.gradient)(p)
    }
}

/// Nodal samples of a level set. Off-node values use the bicubic
/// (Catmull–Rom) interpolant; gradients are nodal central differences
/// interpolated bilinearly.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetField {
    pub grid: UniformGrid2D,
    pub values: Vec<f64>,
}

#[inline]
fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

impl LevelSetField {
    pub fn new(grid: UniformGrid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("level-set values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    #[inline]
    pub fn is_inside(&self, idx: usize) -> bool {
        self.values[idx] <= 0.0
    }

    pub fn has_interface(&self) -> bool {
        let any_in = self.values.iter().any(|&v| v <= 0.0);
        let any_out = self.values.iter().any(|&v| v > 0.0);
        any_in && any_out
    }

    fn clamped(&self, i: isize, j: isize) -> f64 {
        let i = i.clamp(0, self.grid.nx as isize - 1) as usize;
        let j = j.clamp(0, self.grid.ny as isize - 1) as usize;
        self.at(i, j)
    }

    /// Cell index and local coordinate for a point, clamped to the grid.
    fn locate(&self, p: Point) -> (isize, isize, f64, f64) {
        let g = &self.grid;
        let fx = ((p[0] - g.x_lo) / g.h).clamp(0.0, (g.nx - 1) as f64);
        let fy = ((p[1] - g.y_lo) / g.h).clamp(0.0, (g.ny - 1) as f64);
        let snap = |f: f64| if (f - f.round()).abs() < 1e-10 { f.round() } else { f };
        let (fx, fy) = (snap(fx), snap(fy));
        let i = (fx.floor() as isize).min(g.nx as isize - 2);
        let j = (fy.floor() as isize).min(g.ny as isize - 2);
        (i, j, fx - i as f64, fy - j as f64)
    }

    /// Central-difference gradient at a node (one-sided on the rim).
    pub fn nodal_gradient(&self, i: usize, j: usize) -> Point {
        let g = &self.grid;
        let dx = if i == 0 {
            (self.at(1, j) - self.at(0, j)) / g.h
        } else if i + 1 == g.nx {
            (self.at(i, j) - self.at(i - 1, j)) / g.h
        } else {
            (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * g.h)
        };
        let dy = if j == 0 {
            (self.at(i, 1) - self.at(i, 0)) / g.h
        } else if j + 1 == g.ny {
            (self.at(i, j) - self.at(i, j - 1)) / g.h
        } else {
            (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * g.h)
        };
        [dx, dy]
    }
}

impl LevelSet for LevelSetField {
    fn value(&self, p: Point) -> f64 {
        let (i, j, tx, ty) = self.locate(p);
        // Exact nodal values on grid lines avoid needless rounding.
        let wx = catmull_rom(tx);
        let wy = catmull_rom(ty);
        let mut acc = 0.0;
        for (b, wyb) in wy.iter().enumerate() {
            if *wyb == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for (a, wxa) in wx.iter().enumerate() {
                if *wxa != 0.0 {
                    row += wxa * self.clamped(i + a as isize - 1, j + b as isize - 1);
                }
            }
            acc += wyb * row;
        }
        acc
    }

    fn gradient(&self, p: Point) -> Point {
        let (i, j, tx, ty) = self.locate(p);
        let (i, j) = (i as usize, j as usize);
        let g00 = self.nodal_gradient(i, j);
        let g10 = self.nodal_gradient(i + 1, j);
        let g01 = self.nodal_gradient(i, j + 1);
        let g11 = self.nodal_gradient(i + 1, j + 1);
        let mut out = [0.0; 2];
        for c in 0..2 {
            out[c] = (1.0 - tx) * (1.0 - ty) * g00[c]
                + tx * (1.0 - ty) * g10[c]
                + (1.0 - tx) * ty * g01[c]
                + tx * ty * g11[c];
        }
        out
    }
}

/// Role of a node in the embedded-boundary discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointClass {
    Outside,
    /// Inside the domain with at least one axis neighbour outside (or missing).
    InteriorGhost,
    /// Inside with all four axis neighbours inside; an unknown of the solve.
    Computational,
}

/// Classifies every node. Nodes on the outermost ring lack a full stencil
/// and are never computational; when inside they are interior ghosts.
pub fn classify_points(ls: &LevelSetField) -> Vec<PointClass> {
    let g = &ls.grid;
    (0..g.len())
        .map(|k| {
            if !ls.is_inside(k) {
                return PointClass::Outside;
            }
            let all_inside = Direction::ALL.iter().all(|&d| match g.neighbor(k, d) {
                Some(nb) => ls.is_inside(nb),
                None => false,
            });
            if all_inside {
                PointClass::Computational
            } else {
                PointClass::InteriorGhost
            }
        })
        .collect()
}

/// Intersection of the zero level set with a grid segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCrossing {
    pub axis: Axis,
    pub inside: usize,
    pub outside: usize,
    /// Coordinate of the crossing along `axis`.
    pub gamma_coord: f64,
    pub point: Point,
    /// Distance from the inside node to the crossing.
    pub distance: f64,
}

/// Relative (to `h`) location tolerance of [`find_crossing`].
pub const CROSSING_TOL: f64 = 1e-12;

/// Locates the zero of the level set restricted to the segment between two
/// axis-neighbouring nodes, with `ρ(inside) ≤ 0 ≤ ρ(outside)`.
///
/// Safeguarded secant iteration: a secant step is taken only when it falls
/// inside the current bracket, otherwise the bracket is bisected.
pub fn find_crossing(
    grid: &UniformGrid2D,
    ls: &dyn LevelSet,
    inside: usize,
    outside: usize,
) -> Result<BoundaryCrossing> {
    let p0 = grid.point(inside);
    let p1 = grid.point(outside);
    let axis = if p0[1] == p1[1] { Axis::X } else { Axis::Y };
    let at = |t: f64| [p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])];
    let f = |t: f64| ls.value(at(t));
    let finish = |t: f64| {
        let point = at(t);
        let gamma_coord = match axis {
            Axis::X => point[0],
            Axis::Y => point[1],
        };
        BoundaryCrossing {
            axis,
            inside,
            outside,
            gamma_coord,
            point,
            distance: t * grid.h,
        }
    };

    let f0 = f(0.0);
    let f1 = f(1.0);
    if f0 > 0.0 || f1 < 0.0 || !f0.is_finite() || !f1.is_finite() {
        return Err(Error::DegenerateCrossing { inside, outside });
    }
    if f0 == 0.0 {
        return Ok(finish(0.0));
    }
    if f1 == 0.0 {
        return Ok(finish(1.0));
    }

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut flo, mut fhi) = (f0, f1);
    let (mut xa, mut fa) = (0.0f64, f0);
    let (mut xb, mut fb) = (1.0f64, f1);
    let fscale = f0.abs().max(f1.abs());
    for _ in 0..200 {
        let mut c = if fb != fa {
            xb - fb * (xb - xa) / (fb - fa)
        } else {
            f64::NAN
        };
        let width = hi - lo;
        if !(c > lo && c < hi) {
            c = 0.5 * (lo + hi);
        }
        let fc = f(c);
        if fc == 0.0 || fc.abs() <= 1e-15 * fscale {
            return Ok(finish(c));
        }
        if fc < 0.0 {
            lo = c;
            flo = fc;
        } else {
            hi = c;
            fhi = fc;
        }
        xa = xb;
        fa = fb;
        xb = c;
        fb = fc;
        // Force progress when the secant keeps landing on one side.
        if hi - lo > 0.5 * width {
            let m = 0.5 * (lo + hi);
            let fm = f(m);
            if fm < 0.0 {
                lo = m;
                flo = fm;
            } else {
                hi = m;
                fhi = fm;
            }
        }
        if hi - lo <= CROSSING_TOL {
            let t = if flo.abs() < fhi.abs() { lo } else { hi };
            return Ok(finish(t));
        }
    }
    Ok(finish(0.5 * (lo + hi)))
}

pub const DEGENERATE_GRADIENT: f64 = 1e-10;
pub const PROJECTION_MAX_ITER: usize = 50;

/// Projects `p` onto the zero level set by Newton steps along the normal,
/// `q ← q − ρ(q) ∇ρ(q) / |∇ρ(q)|²`.
pub fn closest_boundary_point(ls: &dyn LevelSet, p: Point, tol: f64) -> Result<Point> {
    let mut q = p;
    let mut r = ls.value(q);
    if r.abs() <= tol {
        return Ok(q);
    }
    for _ in 0..PROJECTION_MAX_ITER {
        let g = ls.gradient(q);
        let g2 = g[0] * g[0] + g[1] * g[1];
        if g2.sqrt() < DEGENERATE_GRADIENT {
            return Err(Error::DegenerateNormal { x: q[0], y: q[1] });
        }
        q = [q[0] - r * g[0] / g2, q[1] - r * g[1] / g2];
        r = ls.value(q);
        if r.abs() <= tol {
            return Ok(q);
        }
    }
    Err(Error::NoConvergence {
        what: "boundary projection",
        iterations: PROJECTION_MAX_ITER,
        residual: r.abs(),
    })
}

/// Analytic level sets for the test geometries.
pub mod shapes {
    use super::*;

    /// `|p − c|² − r²`.
    pub fn circle_quadratic(c: Point, r: f64) -> impl LevelSet {
        FnLevelSet {
            value: move |p: Point| (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) - r * r,
            gradient: move |p: Point| [2.0 * (p[0] - c[0]), 2.0 * (p[1] - c[1])],
        }
    }

    /// Signed distance to a circle.
    pub fn circle(c: Point, r: f64) -> impl LevelSet {
        FnLevelSet {
            value: move |p: Point| ((p[0] - c[0]).hypot(p[1] - c[1])) - r,
            gradient: move |p: Point| {
                let d = (p[0] - c[0]).hypot(p[1] - c[1]);
                if d == 0.0 {
                    [0.0, 0.0]
                } else {
                    [(p[0] - c[0]) / d, (p[1] - c[1]) / d]
                }
            },
        }
    }

    /// Signed distance to the half-plane `n·p > offset` (unit normal `n`).
    pub fn half_plane(n: Point, offset: f64) -> impl LevelSet {
        FnLevelSet {
            value: move |p: Point| n[0] * p[0] + n[1] * p[1] - offset,
            gradient: move |_| n,
        }
    }

    /// Exact signed distance to the axis-aligned square `max(|x|,|y|) ≤ half`.
    pub fn square(half: f64) -> impl LevelSet {
        FnLevelSet {
            value: move |p: Point| square_sdf(p, half),
            gradient: move |p: Point| {
                let e = 1e-7;
                [
                    (square_sdf([p[0] + e, p[1]], half) - square_sdf([p[0] - e, p[1]], half)) / (2.0 * e),
                    (square_sdf([p[0], p[1] + e], half) - square_sdf([p[0], p[1] - e], half)) / (2.0 * e),
                ]
            },
        }
    }

    pub fn square_sdf(p: Point, half: f64) -> f64 {
        let dx = p[0].abs() - half;
        let dy = p[1].abs() - half;
        if dx <= 0.0 && dy <= 0.0 {
            dx.max(dy)
        } else {
            dx.max(0.0).hypot(dy.max(0.0))
        }
    }

    /// Two overlapping Gaussian wells: a non-convex "peanut".
    pub fn peanut() -> impl LevelSet {
        FnLevelSet {
            value: |p: Point| {
                let (x, y) = (p[0], p[1]);
                0.5 - (-20.0 * (x * x + (y - 0.25).powi(2))).exp() - (-20.0 * (x * x + (y + 0.25).powi(2))).exp()
            },
            gradient: |p: Point| {
                let (x, y) = (p[0], p[1]);
                let a = (-20.0 * (x * x + (y - 0.25).powi(2))).exp();
                let b = (-20.0 * (x * x + (y + 0.25).powi(2))).exp();
                [40.0 * x * (a + b), 40.0 * ((y - 0.25) * a + (y + 0.25) * b)]
            },
        }
    }

    /// Star-shaped "virus" outline
    /// `x = (0.6 + 0.1 sin 12θ) cos θ`, `y = (0.6 + 0.05 sin 12θ) sin θ`,
    /// as the level set `|p| − R(arg p)`.
    #[derive(Debug, Clone, Copy, Default)]
    pub struct Virus;

    impl Virus {
        pub fn curve(theta: f64) -> (Point, Point) {
            let s = (12.0 * theta).sin();
            let c12 = 12.0 * (12.0 * theta).cos();
            let (ax, ay) = (0.6 + 0.1 * s, 0.6 + 0.05 * s);
            let p = [ax * theta.cos(), ay * theta.sin()];
            let dp = [
                0.1 * c12 * theta.cos() - ax * theta.sin(),
                0.05 * c12 * theta.sin() + ay * theta.cos(),
            ];
            (p, dp)
        }

        /// Curve parameter whose polar angle equals `phi`.
        pub fn parameter_for_angle(phi: f64) -> f64 {
            let mut theta = phi;
            for _ in 0..60 {
                let (c, dc) = Self::curve(theta);
                let ang = c[1].atan2(c[0]);
                let mut g = ang - phi;
                g -= (g / std::f64::consts::TAU).round() * std::f64::consts::TAU;
                let dang = (c[0] * dc[1] - c[1] * dc[0]) / (c[0] * c[0] + c[1] * c[1]);
                let step = g / dang;
                theta -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            theta
        }
    }

    impl LevelSet for Virus {
        fn value(&self, p: Point) -> f64 {
            let phi = p[1].atan2(p[0]);
            let theta = Self::parameter_for_angle(phi);
            let (c, _) = Self::curve(theta);
            p[0].hypot(p[1]) - c[0].hypot(c[1])
        }

        fn gradient(&self, p: Point) -> Point {
            let r = p[0].hypot(p[1]);
            if r == 0.0 {
                return [0.0, 0.0];
            }
            let phi = p[1].atan2(p[0]);
            let theta = Self::parameter_for_angle(phi);
            let (c, dc) = Self::curve(theta);
            let big_r = c[0].hypot(c[1]);
            let dr_dtheta = (c[0] * dc[0] + c[1] * dc[1]) / big_r;
            let dphi_dtheta = (c[0] * dc[1] - c[1] * dc[0]) / (big_r * big_r);
            let dr_dphi = dr_dtheta / dphi_dtheta;
            let gphi = [-p[1] / (r * r), p[0] / (r * r)];
            [p[0] / r - dr_dphi * gphi[0], p[1] / r - dr_dphi * gphi[1]]
        }
    }
}
