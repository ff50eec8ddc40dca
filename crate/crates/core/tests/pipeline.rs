use stokes_lab::analysis::experiments::*;
use stokes_lab::analysis::norms::{ExactPressure, ExactVelocity};
use stokes_lab::analysis::{weighted_norm, Order};
use stokes_lab::assembly::{rhs_dirac, rhs_regular};
use stokes_lab::{DofMap, ElementPair, ExactSolution, Integrator, Mesh, Pattern, Quadrature, Rect, WeightSpec};

#[test]
fn weighted_norm_is_monotone_in_the_weight() {
    let mesh = Mesh::structured(Pattern::CrissCross, 8, Rect::unit()).unwrap();
    let integ = Integrator::default();
    let exact = ExactSolution::SmoothCurl;
    let z = [0.5, 0.5];
    // on the unit square dist <= 1, so dist^1 <= dist^0.5 pointwise
    let (small, big) = (WeightSpec::dist_point(z, 1.0), WeightSpec::dist_point(z, 0.5));
    for order in [Order::Value, Order::Gradient] {
        let a = weighted_norm(&mesh, &ExactVelocity(&exact), Some(&small), 2.0, order, &integ).unwrap();
        let b = weighted_norm(&mesh, &ExactVelocity(&exact), Some(&big), 2.0, order, &integ).unwrap();
        assert!(a <= b, "{order:?}: {a} > {b}");
    }
    let c1 = weighted_norm(&mesh, &ExactPressure(&exact), Some(&WeightSpec::constant(1.0)), 2.0, Order::Value, &integ).unwrap();
    let c4 = weighted_norm(&mesh, &ExactPressure(&exact), Some(&WeightSpec::constant(4.0)), 2.0, Order::Value, &integ).unwrap();
    assert!((c4 - 2.0 * c1).abs() <= 1e-12 * c4);
}

#[test]
fn best_approximation_ratio_stays_bounded() {
    let exact = ExactSolution::SmoothCurl;
    let w = WeightSpec::dist_point([0.5, 0.5], 1.0);
    let plan = LevelPlan::new(Pattern::CrissCross, 4, 3);
    for pair in [ElementPair::Mini, ElementPair::TaylorHood] {
        for weight in [None, Some(&w)] {
            let rep = best_approx_experiment(&exact, "smooth_curl", pair, weight, 2.0, &plan, false).unwrap();
            let r = rep.column("ratio").unwrap();
            // TH tends to zero: the projection outpaces the quasi-interpolant
            assert!(r.iter().all(|&v| v > 0.0 && v < 10.0), "{pair} {r:?}");
        }
    }
}

#[test]
fn mollified_sources_approach_the_point_load() {
    let mesh = Mesh::structured(Pattern::CrissCross, 4, Rect::unit()).unwrap();
    // centroid of a criss-cross cell; every bump below stays inside it
    let z = [0.375, 0.5 + 0.125 / 3.0];
    let force = [1.0, -2.0];
    for pair in [ElementPair::Mini, ElementPair::TaylorHood] {
        let dofs = DofMap::new(&mesh, pair);
        let point = rhs_dirac(&mesh, &dofs, &[(z, force)]).unwrap();
        let scale = point.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut errs = Vec::new();
        for r in [0.024, 0.012, 0.006] {
            // (1 - |x-z|^2/r^2)^2 on the disc, normalized to unit mass
            let c = 3.0 / (std::f64::consts::PI * r * r);
            let f = |x: [f64; 2]| {
                let t = ((x[0] - z[0]).powi(2) + (x[1] - z[1]).powi(2)) / (r * r);
                let b = if t < 1.0 { c * (1.0 - t).powi(2) } else { 0.0 };
                [b * force[0], b * force[1]]
            };
            let load = rhs_regular(&mesh, &dofs, &Quadrature::gauss(400), f).unwrap();
            errs.push(load.iter().zip(&point).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale);
        }
        // second order in r for a symmetric bump on a smooth basis
        assert!(errs.windows(2).all(|w| w[1] < 0.35 * w[0]), "{pair}: {errs:?}");
    }
}
