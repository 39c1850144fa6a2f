//! Level-set toolkit properties on randomized geometry.
#![allow(clippy::needless_range_loop)]

mod common;

use ebetd::geometry::{shapes, LevelSetField, Point, UniformGrid2D};
use ebetd::levelset::{
    advect_subcycled, crossings, extend_speed, extrapolate_quadratic, hj_weno_advect, interface_metrics, reinitialize,
    CrossingSample, NarrowBand,
};
use proptest::prelude::*;

fn grid(cells: usize) -> UniformGrid2D {
    UniformGrid2D::square(-1.0, 1.0, cells).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn zero_velocity_is_bitwise_identity(cx in -0.3f64..0.3, cy in -0.3f64..0.3, r in 0.2f64..0.6, cells in 10usize..50) {
        let g = grid(cells);
        let ls = g.sample(&shapes::circle_quadratic([cx, cy], r));
        let v = vec![[0.0, 0.0]; g.len()];
        let out = hj_weno_advect(&ls, &v, 0.37 * g.h).unwrap();
        prop_assert_eq!(&out.values, &ls.values);
        let (sub, _) = advect_subcycled(&ls, &v, 1.0).unwrap();
        prop_assert_eq!(sub.values, ls.values);
    }

    #[test]
    fn quadratic_extrapolation_reproduces_quadratics(
        cx in -0.2f64..0.2, cy in -0.2f64..0.2, r in 0.35f64..0.6,
        c in proptest::collection::vec(-2.0f64..2.0, 6),
    ) {
        let g = grid(64);
        let ls = g.sample(&shapes::circle([cx, cy], r));
        let f = |p: Point| c[0] + c[1] * p[0] + c[2] * p[1] + c[3] * p[0] * p[0] + c[4] * p[0] * p[1] + c[5] * p[1] * p[1];
        let valid: Vec<bool> = (0..g.len()).map(|k| ls.is_inside(k)).collect();
        let u: Vec<f64> = (0..g.len()).map(|k| if valid[k] { f(g.point(k)) } else { f64::NAN }).collect();
        let band = NarrowBand::new(&ls, 4.0 * g.h);
        let targets: Vec<bool> = (0..g.len()).map(|k| band.mask[k] && !valid[k]).collect();
        let (out, missed) = extrapolate_quadratic(&ls, &u, &valid, &targets).unwrap();
        prop_assert_eq!(missed, 0);
        for k in 0..g.len() {
            if targets[k] {
                prop_assert!((out[k] - f(g.point(k))).abs() < 1e-8);
            } else if valid[k] {
                prop_assert_eq!(out[k], u[k]);
            }
        }
    }

    #[test]
    fn reinitialization_keeps_the_interface(
        cx in -0.2f64..0.2, cy in -0.2f64..0.2, r in 0.3f64..0.6,
        scale in 0.3f64..3.0, wobble in 0.0f64..0.5,
    ) {
        let g = grid(80);
        let sd = shapes::circle([cx, cy], r);
        // Same zero set, far from a distance function.
        let values: Vec<f64> = (0..g.len()).map(|k| {
            let p = g.point(k);
            let d = ebetd::geometry::LevelSet::value(&sd, p);
            d * scale * (1.0 + wobble * (3.0 * p[0]).sin() * (2.0 * p[1]).cos())
        }).collect();
        let ls = LevelSetField::new(g, values).unwrap();
        prop_assert!(common::crossing_drift_cells(&ls, &ls) == 0.0);
        let out = reinitialize(&ls, 10).unwrap();
        // Normal distance of the new crossings from the true circle, which
        // stays meaningful where the circle is tangent to a grid line.
        let worst = crossings(&out).unwrap().iter()
            .map(|c| ebetd::geometry::LevelSet::value(&sd, c.point).abs())
            .fold(0.0, f64::max);
        prop_assert!(worst <= g.h, "normal drift {} h", worst / g.h);
    }

    #[test]
    fn uniform_speed_stays_uniform(cx in -0.2f64..0.2, cy in -0.2f64..0.2, r in 0.3f64..0.6, speed in -3.0f64..3.0) {
        let g = grid(48);
        let ls = g.sample(&shapes::circle([cx, cy], r));
        let samples: Vec<CrossingSample> = crossings(&ls).unwrap().into_iter()
            .map(|crossing| CrossingSample { crossing, value: speed })
            .collect();
        let ext = extend_speed(&ls, &samples, 200).unwrap();
        let band = NarrowBand::new(&ls, 3.0 * g.h);
        for k in 0..g.len() {
            if band.mask[k] {
                prop_assert!((ext[k] - speed).abs() <= 1e-12 * speed.abs().max(1.0));
            }
        }
    }
}

#[test]
fn outward_normal_speed_grows_a_circle_at_the_right_rate() {
    let g = grid(100);
    let r0 = 0.4;
    let ls = g.sample(&shapes::circle([0.0, 0.0], r0));
    let v: Vec<Point> = (0..g.len())
        .map(|k| {
            let p = g.point(k);
            let m = p[0].hypot(p[1]).max(1e-12);
            [0.5 * p[0] / m, 0.5 * p[1] / m]
        })
        .collect();
    let t = 0.2;
    let (out, _) = advect_subcycled(&ls, &v, t).unwrap();
    let expected = r0 + 0.5 * t;
    let err = common::max_radial_error(&out, [0.0, 0.0], expected);
    assert!(err < 0.1 * g.h, "radial error {err:e}");
    let m = interface_metrics(&out);
    let area = std::f64::consts::PI * expected * expected;
    assert!((m.area - area).abs() / area < 1e-2);
}
