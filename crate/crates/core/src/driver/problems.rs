//! Closed-form data of the benchmark problems.

use crate::geometry::{shapes, LevelSet, Point};

/// Poisson problem `∇·(β∇u) = f` inside the virus outline.
pub mod virus {
    use super::*;

    pub fn geometry() -> shapes::Virus {
        shapes::Virus
    }

    pub fn exact(p: Point) -> f64 {
        let (x, y) = (p[0], p[1]);
        x.exp() * (x * x * y.sin() + y * y)
    }

    pub fn exact_gradient(p: Point) -> Point {
        let (x, y) = (p[0], p[1]);
        let e = x.exp();
        [
            e * (x * x * y.sin() + y * y + 2.0 * x * y.sin()),
            e * (x * x * y.cos() + 2.0 * y),
        ]
    }

    pub fn beta(p: Point) -> f64 {
        2.0 + (p[0] * p[1]).sin()
    }

    /// `β Δu + ∇β·∇u`.
    pub fn source(p: Point) -> f64 {
        let (x, y) = (p[0], p[1]);
        let e = x.exp();
        let lap = e * (y * y + 4.0 * x * y.sin() + 2.0 * y.sin() + 2.0);
        let g = exact_gradient(p);
        let c = (x * y).cos();
        beta(p) * lap + y * c * g[0] + x * c * g[1]
    }
}

/// Reaction–diffusion problem `u_t = ∇·(β∇u) + f` inside the peanut.
pub mod peanut {
    use super::*;

    pub fn geometry() -> impl LevelSet {
        shapes::peanut()
    }

    pub fn exact(p: Point, t: f64) -> f64 {
        (-t).exp() * (p[0] * p[0] + p[1] * p[1] - 0.25)
    }

    pub fn exact_gradient(p: Point, t: f64) -> Point {
        let e = (-t).exp();
        [2.0 * e * p[0], 2.0 * e * p[1]]
    }

    pub fn beta(p: Point) -> f64 {
        0.25 - p[0] * p[0] - p[1] * p[1]
    }

    /// `u_t − ∇·(β∇u)` for the exact solution.
    pub fn source(p: Point, t: f64) -> f64 {
        let r2 = p[0] * p[0] + p[1] * p[1];
        (-t).exp() * (7.0 * r2 - 0.75)
    }
}

/// Free-boundary logistic growth from a square patch.
pub mod stefan {
    use super::*;

    pub const DIFFUSION: f64 = 1.5;
    pub const MOBILITY: f64 = 1.0;
    pub const GROWTH_A: f64 = 1.0;
    pub const GROWTH_B: f64 = 1.0;
    pub const HALF_WIDTH: f64 = 0.5;
    pub const BOX: (f64, f64) = (-2.0, 2.0);

    pub fn rho0(p: Point) -> f64 {
        shapes::square_sdf(p, HALF_WIDTH)
    }

    /// Separable quartic bump vanishing on the square's edges, peak 1.25.
    pub fn u0(p: Point) -> f64 {
        let (x, y) = (p[0], p[1]);
        if x.abs() > HALF_WIDTH || y.abs() > HALF_WIDTH {
            return 0.0;
        }
        let w = HALF_WIDTH * HALF_WIDTH;
        320.0 * (w - x * x).powi(2) * (w - y * y).powi(2)
    }

    pub fn reaction(u: f64) -> f64 {
        u * (GROWTH_A - GROWTH_B * u)
    }
}
