//! Variable-coefficient Poisson problem inside the star-shaped virus
//! outline, assembled and solved directly with the library primitives.
//!
//! `cargo run --release --example poisson_virus -- 50 90 170`

use ebetd::driver::problems::virus;
use ebetd::driver::report::{fitted_slope, ErrorNorms};
use ebetd::ebpoisson::EmbeddedOperator;
use ebetd::geometry::{classify_points, Point, PointClass, UniformGrid2D};

fn main() -> ebetd::Result<()> {
    let mut ns: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if ns.is_empty() {
        ns = vec![50, 90, 170];
    }
    let shape = virus::geometry();
    let bc = |p: Point, _t: f64| virus::exact(p);
    let (mut hs, mut errs) = (Vec::new(), Vec::new());
    println!("{:>5} {:>7} {:>6} {:>12} {:>12}", "n", "dofs", "cg", "l_inf", "l_2");
    for n in ns {
        let grid = UniformGrid2D::square(-1.0, 1.0, n - 1)?;
        let ls = grid.sample(&shape);
        let ghosts = classify_points(&ls)
            .iter()
            .filter(|&&c| c == PointClass::InteriorGhost)
            .count();
        let op = EmbeddedOperator::assemble_with_geometry(&ls, &shape, &virus::beta, &bc, 0.0)?;
        debug_assert!(op.matrix.is_symmetric());
        let sol = op.solve(&op.sample(virus::source), 1e-12)?;
        let exact = op.sample(virus::exact);
        let e = ErrorNorms::from_errors(sol.x.iter().zip(&exact).map(|(a, b)| a - b), grid.h);
        println!(
            "{n:>5} {:>7} {:>6} {:>12.4e} {:>12.4e}   ({ghosts} ghost nodes)",
            op.n_dofs(),
            sol.iterations,
            e.l_inf,
            e.l_2
        );
        hs.push(grid.h);
        errs.push(e.l_2);
    }
    if hs.len() > 1 {
        println!("fitted l_2 order {:.3}", fitted_slope(&hs, &errs));
    }
    Ok(())
}
