use std::f64::consts::PI;

use stokes_lab::quadrature::red_children;
use stokes_lab::weights::*;
use stokes_lab::{Integrator, Mesh, Pattern, Rect, Singularity, WeightSpec};

#[test]
fn conjugate_characteristic_relation() {
    let z = [0.5, 0.5];
    let w = WeightSpec::dist_point(z, 1.0);
    let balls: Vec<Ball> = [0.05, 0.1, 0.2, 0.4].iter().map(|&r| Ball { center: z, radius: r }).collect();
    let rule = BallRule::default();
    for p in [2.0, 3.0] {
        let pc = p / (p - 1.0);
        let a = estimate_ap_constant(&w, p, &balls, &rule).unwrap();
        let b = estimate_ap_constant(&w.conjugate(p), pc, &balls, &rule).unwrap();
        for (x, y) in a.per_ball.iter().zip(&b.per_ball) {
            assert!((y - x.powf(1.0 / (p - 1.0))).abs() < 1e-6 * y, "p = {p}: {x} vs {y}");
        }
    }
}

#[test]
fn centered_characteristic_is_stable_under_refinement() {
    let z = [0.5, 0.5];
    let w = WeightSpec::dist_point(z, 1.0);
    let balls: Vec<Ball> = [0.01, 0.1, 0.3].iter().map(|&r| Ball { center: z, radius: r }).collect();
    let coarse = estimate_ap_constant(&w, 2.0, &balls, &BallRule::default()).unwrap();
    let fine = estimate_ap_constant(&w, 2.0, &balls, &BallRule::default().refined()).unwrap();
    // closed form on centered balls: (2r/3)(2/r) = 4/3
    for (a, b) in coarse.per_ball.iter().zip(&fine.per_ball) {
        assert!((a - 4.0 / 3.0).abs() < 1e-6 && (b - 4.0 / 3.0).abs() < 1e-6);
    }
}

#[test]
fn measure_is_additive_over_red_children() {
    let w = WeightSpec::dist_point([0.2, 0.1], 1.5);
    let integ = Integrator::default();
    let balls = BallRule::default();
    let t = [[0.0, 0.0], [0.6, 0.1], [0.1, 0.7]];
    let parent = weight_measure(&w, &Region::Cell(t), &integ, &balls).unwrap();
    let kids: f64 = red_children(t).iter().map(|&c| weight_measure(&w, &Region::Cell(c), &integ, &balls).unwrap()).sum();
    assert!((parent - kids).abs() <= 1e-8 * parent);
}

#[test]
fn distance_power_scales_exactly() {
    let z = [0.3, 0.7];
    for alpha in [-1.0, 0.5, 1.0, 1.7] {
        let w = WeightSpec::dist_point(z, alpha);
        for t in [0.5, 0.125, 2.0] {
            let x = [z[0] + 0.6 * t, z[1] - 0.8 * t];
            let v = w.eval(x).unwrap();
            assert!((v - t.powf(alpha)).abs() <= 1e-12 * v.max(1.0));
        }
    }
}

#[test]
fn natterer_sandwich() {
    let y = [0.4, 0.4];
    let (kappa, h) = (2.0, 0.05);
    let s = WeightSpec::natterer(y, kappa, h);
    for i in 0..40 {
        let x = [(i as f64 * 0.37).fract(), (i as f64 * 0.61).fract()];
        let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
        let v = s.eval(x).unwrap();
        assert!(v >= d.max(kappa * h) - 1e-15 && v <= d + kappa * h + 1e-15);
    }
}

#[test]
fn maximal_function_witnesses() {
    let z = [0.5, 0.5];
    let integ = Integrator::default();
    let sides = geometric_sides(0.25, 0.25 / 64.0);
    // dist^{-1} is A_1: M w / w stays moderate away from and near z
    let inv = WeightSpec::dist_point(z, -1.0);
    for x in [[0.2, 0.3], [0.45, 0.5], [0.5, 0.52], [0.8, 0.7]] {
        let r = approx_maximal(&inv, x, &sides, &integ) / inv.eval(x).unwrap();
        assert!(r < 4.0, "{x:?}: {r}");
    }
    // dist^{+1} is not: the ratio blows up on approach
    let lin = WeightSpec::dist_point(z, 1.0);
    let ratios: Vec<f64> = (2..8)
        .map(|j| {
            let x = [0.5 + 2f64.powi(-j), 0.5];
            approx_maximal(&lin, x, &sides, &integ) / lin.eval(x).unwrap()
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]));
    assert!(ratios.last().unwrap() > &10.0);
}

#[test]
fn embedding_ratios() {
    let integ = Integrator::default();
    let balls = BallRule::default();
    let z = [0.5, 0.5];
    let big_r = 0.4;
    let lin = WeightSpec::dist_point(z, 1.0);
    let flat = WeightSpec::constant(2.0);
    let edge = WeightSpec::dist_point(z, 2.0);
    let mut edge_vals = Vec::new();
    for k in 1..=3 {
        let r = big_r / 2f64.powi(k);
        let a = embedding_condition_ratio(&lin, 2.0, z, r, big_r, &integ, &balls).unwrap();
        assert!((a - r / big_r).abs() < 1e-9 && a <= 1.0);
        let c = embedding_condition_ratio(&flat, 2.0, z, r, big_r, &integ, &balls).unwrap();
        assert!((c - (r / big_r).powi(2)).abs() < 1e-12);
        edge_vals.push(embedding_condition_ratio(&edge, 2.0, z, r, big_r, &integ, &balls).unwrap());
    }
    for v in &edge_vals {
        assert!((v - edge_vals[0]).abs() < 1e-9, "alpha = 2 is flat in r/R: {edge_vals:?}");
    }
    assert!(embedding_condition_ratio(&lin, 2.0, z, 0.5, 0.4, &integ, &balls).is_err());
}

/// Raw integral of sigma^{-2-lambda} over the unit square, graded at y.
fn natterer_integral(mesh: &Mesh, y: [f64; 2], kappa: f64, lambda: f64) -> f64 {
    let s = WeightSpec::natterer(y, kappa, mesh.h());
    let integ = Integrator::default();
    (0..mesh.n_cells())
        .map(|c| integ.integrate(mesh.cell_points(c), &[Singularity::Point(y)], |x| s.value(x).powf(-2.0 - lambda)))
        .sum()
}

#[test]
fn natterer_ratio_matches_independent_quadrature() {
    // reference values from an adaptive double integral of the same weight
    let mesh = Mesh::structured(Pattern::CrissCross, 4, Rect::unit()).unwrap();
    let levels = natterer_integral_ratio(0.1, 2.0, std::slice::from_ref(&mesh), &[[0.5, 0.5]], &Integrator::default()).unwrap();
    assert!((levels[0].ratio - 2.338).abs() < 2e-3, "{}", levels[0].ratio);
    let fine = Mesh::structured(Pattern::CrissCross, 32, Rect::unit()).unwrap();
    let levels = natterer_integral_ratio(0.2, 2.0, std::slice::from_ref(&fine), &[[0.5, 0.5]], &Integrator::default()).unwrap();
    assert!((levels[0].ratio - 9.717).abs() < 5e-3, "{}", levels[0].ratio);
}

#[test]
fn natterer_integral_grows_with_lambda_and_stays_bounded() {
    let kappa = 2.0;
    for n in [4, 8, 16] {
        let mesh = Mesh::structured(Pattern::CrissCross, n, Rect::unit()).unwrap();
        for y in [[0.5, 0.5], [0.02, 0.03]] {
            let (a, b) = (natterer_integral(&mesh, y, kappa, 0.1), natterer_integral(&mesh, y, kappa, 0.2));
            assert!(b > a);
        }
        for lambda in [0.1, 0.2] {
            let r = natterer_integral_ratio(lambda, kappa, std::slice::from_ref(&mesh), &[[0.5, 0.5], [0.02, 0.03]], &Integrator::default()).unwrap();
            assert!(r[0].ratio <= 2.0 * PI * kappa.powf(-lambda) / lambda);
        }
    }
}

#[test]
fn natterer_rejects_bad_parameters() {
    let mesh = Mesh::structured(Pattern::CrissCross, 1, Rect::unit()).unwrap();
    let integ = Integrator::default();
    assert!(natterer_integral_ratio(0.1, 2.0, std::slice::from_ref(&mesh), &[[0.5, 0.5]], &integ).is_err());
    let m4 = Mesh::structured(Pattern::CrissCross, 4, Rect::unit()).unwrap();
    assert!(natterer_integral_ratio(1.5, 2.0, std::slice::from_ref(&m4), &[[0.5, 0.5]], &integ).is_err());
    assert!(natterer_integral_ratio(0.1, 0.5, std::slice::from_ref(&m4), &[[0.5, 0.5]], &integ).is_err());
}

mod grammar {
    use proptest::prelude::*;
    use stokes_lab::WeightSpec;

    // natterer specs carry no mesh size; it is rebound after parsing
    const H: f64 = 0.05;

    fn spec() -> impl Strategy<Value = WeightSpec> {
        let pt = (0.01f64..0.99, 0.01f64..0.99).prop_map(|(x, y)| [x, y]);
        prop_oneof![
            (0.1f64..10.0).prop_map(WeightSpec::constant),
            (pt.clone(), -1.5f64..1.9).prop_map(|(z, a)| WeightSpec::dist_point(z, a)),
            (pt, 1.1f64..4.0).prop_map(|(y, k)| WeightSpec::natterer(y, k, H)),
        ]
    }

    proptest! {
        #[test]
        fn display_then_parse_is_identity(w in spec(), x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let back = w.to_string().parse::<WeightSpec>().unwrap().with_mesh_size(H);
            let (a, b) = (w.value([x, y]), back.value([x, y]));
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0) || (a.is_infinite() && b.is_infinite()));
            let (c, d) = (w.conjugate(3.0).to_string(), back.conjugate(3.0).to_string());
            prop_assert_eq!(c, d);
        }
    }
}
