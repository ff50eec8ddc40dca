//! One PASS/FAIL line per acceptance criterion. Run with `--nocapture` to
//! see the table.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stokes_lab::analysis::experiments::*;
use stokes_lab::analysis::norms::DiscretePair;
use stokes_lab::analysis::ExperimentReport;
use stokes_lab::{ElementPair, ExactSolution, Mesh, Pattern, Point, Rect, WeightSpec};

const CENTER: Point = [0.5, 0.5];

fn verdict(id: usize, name: &str, pass: bool, detail: &str) {
    println!("criterion {id:>2} {} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn last_eoc(rep: &ExperimentReport, q: &str) -> f64 {
    rep.eoc_column(q).unwrap().last().copied().flatten().unwrap()
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

#[test]
fn criterion_01_smooth_rates() {
    let plan = LevelPlan::new(Pattern::CrissCross, 4, 4);
    let exact = ExactSolution::SmoothCurl;
    let mut ok = true;
    let mut detail = Vec::new();
    for (pair, checks) in [
        (ElementPair::TaylorHood, vec![("h1_velocity", 2.0, 0.2), ("l2_velocity", 3.0, 0.3), ("l2_pressure", 2.0, 0.3)]),
        (ElementPair::Mini, vec![("h1_velocity", 1.0, 0.15), ("l2_velocity", 2.0, 0.2)]),
    ] {
        let t = Instant::now();
        let rep = convergence_experiment(&exact, "smooth_curl", pair, &plan).unwrap();
        let secs = t.elapsed().as_secs_f64();
        ok &= secs <= 120.0;
        for (q, target, tol) in checks {
            let r = last_eoc(&rep, q);
            ok &= within(r, target, tol);
            let all: Vec<String> = rep.eoc_column(q).unwrap().iter().flatten().map(|v| format!("{v:.3}")).collect();
            detail.push(format!("{pair} {q} {r:.3} [{}]", all.join(" ")));
        }
        detail.push(format!("{pair} {secs:.1}s"));
    }
    verdict(1, "smooth baseline rates", ok, &detail.join(", "));
    assert!(ok);
}

#[test]
fn criterion_02_dirac_rate() {
    let plan = LevelPlan::new(Pattern::CrissCross, 2, 4);
    let setup = DiracSetup { points: vec![(CENTER, [1.0, 0.0])], alpha: 1.0, reference_extra: 2 };
    let mut ok = true;
    let mut detail = Vec::new();
    for pair in [ElementPair::TaylorHood, ElementPair::Mini] {
        let t = Instant::now();
        let rep = dirac_convergence_experiment(&setup, pair, &plan, false).unwrap();
        let secs = t.elapsed().as_secs_f64();
        let r = last_eoc(&rep, "l2_velocity");
        ok &= r >= 0.8 && secs <= 300.0;
        detail.push(format!("{pair} eoc {r:.3} ({secs:.1}s)"));
    }
    verdict(2, "point-source L2 rate", ok, &detail.join(", "));
    assert!(ok);
}

#[test]
fn criterion_03_weighted_stability() {
    let plan = LevelPlan::new(Pattern::CrissCross, 4, 4);
    let w = WeightSpec::dist_point(CENTER, 1.0);
    let exact = ExactSolution::SmoothCurl;
    let mut ok = true;
    let mut detail = Vec::new();
    for pair in [ElementPair::TaylorHood, ElementPair::Mini] {
        let rep = stability_experiment(&exact, "smooth_curl", pair, Some(&w), 2.0, &plan, false).unwrap();
        let rho = rep.column("rho").unwrap();
        let s = spread(&rho);
        ok &= s < 1.25;
        let max = rho.iter().cloned().fold(0.0, f64::max);
        detail.push(format!("{pair} max rho {max:.4} spread {s:.3}"));
    }
    // a discrete pair is reproduced exactly by its own projection
    let mesh = Mesh::structured(Pattern::CrissCross, 4, Rect::unit()).unwrap();
    for pair in [ElementPair::TaylorHood, ElementPair::Mini] {
        let dofs = stokes_lab::DofMap::new(&mesh, pair);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut u = vec![0.0; dofs.n_velocity()];
        for &g in dofs.free_to_global() {
            u[g] = rng.random_range(-1.0..1.0);
        }
        let mut p: Vec<f64> = (0..dofs.n_pressure()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mean = stokes_lab::assembly::mean_row(&mesh);
        let m: f64 = p.iter().zip(&mean).map(|(a, b)| a * b).sum();
        p.iter_mut().for_each(|v| *v -= m);
        let data = DiscretePair {
            velocity: stokes_lab::analysis::DiscreteField::velocity(&mesh, &dofs, u),
            pressure: stokes_lab::analysis::DiscreteField::pressure(&mesh, &dofs, p),
        };
        let one = LevelPlan::new(Pattern::CrissCross, 4, 1);
        let rep = stability_experiment(&data, "discrete", pair, Some(&w), 2.0, &one, false).unwrap();
        let rho = rep.column("rho").unwrap()[0];
        ok &= within(rho, 1.0, 1e-9);
        detail.push(format!("{pair} capture rho-1 {:.1e}", rho - 1.0));
    }
    verdict(3, "weighted stability", ok, &detail.join(", "));
    assert!(ok);
}

#[test]
fn criterion_04_infsup() {
    let plan = LevelPlan::new(Pattern::CrissCross, 4, 4);
    let w = WeightSpec::dist_point(CENTER, 1.0);
    let mut ok = true;
    let mut detail = Vec::new();
    for pair in [ElementPair::TaylorHood, ElementPair::Mini] {
        for weight in [None, Some(&w)] {
            let t = Instant::now();
            let rep = infsup_experiment(pair, weight, &plan, false).unwrap();
            let secs = t.elapsed().as_secs_f64();
            let beta = rep.column("beta").unwrap();
            let max = beta.iter().cloned().fold(0.0, f64::max);
            let min = beta.iter().cloned().fold(f64::INFINITY, f64::min);
            ok &= min >= 0.5 * max && min > 0.05 && secs <= 180.0;
            let label = if weight.is_some() { "dist^1" } else { "unweighted" };
            detail.push(format!("{pair} {label} beta [{min:.3}, {max:.3}] {secs:.1}s"));
        }
    }
    verdict(4, "discrete inf-sup", ok, &detail.join(", "));
    assert!(ok);
}

fn random_field(rng: &mut ChaCha8Rng) -> ([f64; 4], [f64; 4]) {
    let mut a = [0.0; 4];
    let mut b = [0.0; 4];
    for k in 0..4 {
        a[k] = rng.random_range(-1.0..1.0);
        b[k] = rng.random_range(0.5..3.0);
    }
    (a, b)
}

#[test]
fn criterion_05_fortin() {
    let plan = LevelPlan::new(Pattern::CrissCross, 4, 4);
    let w = WeightSpec::dist_point(CENTER, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut mean, mut bdef, mut worst) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10 {
        let (a, f) = random_field(&mut rng);
        // v = bump * (a0 sin(f0 x + f1 y) + a1 cos(..), a2 sin(..) + a3 cos(f2 x + f3 y))
        let v = move |x: Point| {
            let bump = x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]);
            let s = (f[0] * x[0] + f[1] * x[1]).sin();
            let c = (f[2] * x[0] + f[3] * x[1]).cos();
            [bump * (a[0] * s + a[1] * c), bump * (a[2] * s + a[3] * c)]
        };
        let dv = move |x: Point| {
            let (px, py) = (x[0] * (1.0 - x[0]), x[1] * (1.0 - x[1]));
            let bump = px * py;
            let db = [(1.0 - 2.0 * x[0]) * py, px * (1.0 - 2.0 * x[1])];
            let s = (f[0] * x[0] + f[1] * x[1]).sin();
            let c = (f[2] * x[0] + f[3] * x[1]).cos();
            let ds = [f[0] * (f[0] * x[0] + f[1] * x[1]).cos(), f[1] * (f[0] * x[0] + f[1] * x[1]).cos()];
            let dc = [-f[2] * (f[2] * x[0] + f[3] * x[1]).sin(), -f[3] * (f[2] * x[0] + f[3] * x[1]).sin()];
            let row = |p: f64, q: f64| {
                let g = p * s + q * c;
                [db[0] * g + bump * (p * ds[0] + q * dc[0]), db[1] * g + bump * (p * ds[1] + q * dc[1])]
            };
            [row(a[0], a[1]), row(a[2], a[3])]
        };
        let rep = fortin_experiment(&plan, &v, &dv, Some(&w), 2.0).unwrap();
        mean = mean.max(rep.column("mean_defect").unwrap().iter().cloned().fold(0.0, f64::max));
        bdef = bdef.max(rep.column("b_defect").unwrap().iter().cloned().fold(0.0, f64::max));
        worst = worst.max(spread(&rep.column("stability").unwrap()));
    }
    let ok = mean <= 1e-10 && bdef <= 1e-9 && worst <= 2.0;
    verdict(5, "Fortin identities", ok, &format!("cell-mean {mean:.1e}, pairing {bdef:.1e}, stability spread {worst:.3}"));
    assert!(ok);
}

#[test]
fn criterion_06_regularized_delta() {
    let plan = LevelPlan::new(Pattern::CrissCross, 4, 4);
    let mut ok = true;
    let mut detail = Vec::new();
    for pair in [ElementPair::TaylorHood, ElementPair::Mini] {
        let rep = delta_experiment(pair, &plan, [0.3, 0.4], [0.5, 0.3, 0.2], 5).unwrap();
        let mass = rep.column("mass_defect").unwrap().iter().cloned().fold(0.0, f64::max);
        let moment = rep.column("moment_defect").unwrap().iter().cloned().fold(0.0, f64::max);
        let s = spread(&rep.column("sup_h2").unwrap());
        ok &= mass <= 1e-10 && moment <= 1e-10 && s < 1.3;
        detail.push(format!("{pair} mass {mass:.1e} moments {moment:.1e} sup*h^2 spread {s:.3}"));
    }
    verdict(6, "regularized delta", ok, &detail.join(", "));
    assert!(ok);
}

#[test]
fn criterion_07_quasi_interpolation() {
    use std::f64::consts::PI;
    let plan = LevelPlan::new(Pattern::CrissCross, 4, 4);
    let field = |x: Point| {
        let (s, c) = ((PI * x[0]).sin(), (PI * x[1]).sin());
        (s * c, [PI * (PI * x[0]).cos() * c, PI * s * (PI * x[1]).cos()])
    };
    let plain = interp_experiment(&plan, &field, None, 2.0, &[]).unwrap();
    let c_err = plain.column("c_err").unwrap();
    let eoc = last_eoc(&plain, "l2_error");
    let mut ok = spread(&c_err) < 1.5 && within(eoc, 2.0, 0.3);
    let w = WeightSpec::dist_point(CENTER, 1.0);
    let weighted = interp_experiment(&plan, &field, Some(&w), 2.0, &[]).unwrap();
    let mut spreads = Vec::new();
    for q in ["c_stab", "c_err", "c_mixed"] {
        let s = spread(&weighted.column(q).unwrap());
        ok &= s < 1.5;
        spreads.push(format!("{q} {s:.3}"));
    }
    verdict(7, "quasi-interpolation", ok, &format!("c_err spread {:.3}, L2 eoc {eoc:.3}, weighted {}", spread(&c_err), spreads.join(" ")));
    assert!(ok);
}

// The ratio increases monotonically toward its limit, so the spread over a
// window shrinks as the window moves to finer meshes; n = 16..128 is used.
// Every level is also held to the whole-plane bound 2 pi kappa^-lambda / lambda.
#[test]
fn criterion_08_natterer() {
    let plan = LevelPlan::new(Pattern::CrissCross, 16, 4);
    let samples = [CENTER, [0.25, 0.7], [0.05, 0.05]];
    let kappa: f64 = 2.0;
    let mut ok = true;
    let mut detail = Vec::new();
    for lambda in [0.1, 0.2] {
        let rep = natterer_experiment(&plan, lambda, kappa, &samples).unwrap();
        let ratio = rep.column("ratio").unwrap();
        let s = spread(&ratio);
        let bound = 2.0 * std::f64::consts::PI * kappa.powf(-lambda) / lambda;
        ok &= s <= 3.0 && ratio.iter().all(|&r| r <= bound);
        detail.push(format!("lambda {lambda} spread {s:.3} max {:.3} bound {bound:.2}", ratio.iter().cloned().fold(0.0, f64::max)));
    }
    verdict(8, "Natterer integral bound", ok, &detail.join(", "));
    assert!(ok);
}

#[test]
fn criterion_09_green_decay() {
    let plan = LevelPlan::new(Pattern::CrissCross, 4, 3);
    let setup = GreenSetup { zs: vec![CENTER], i: 0, j: 1, lambda: 0.1, kappa: 2.0, reference_extra: 2 };
    let rep = green_decay_experiment(&setup, ElementPair::TaylorHood, &plan).unwrap();
    let q = rep.column("q").unwrap();
    let ok = q.windows(2).all(|w| w[1] <= 1.2 * w[0]);
    verdict(9, "Green decay trend", ok, &format!("q = {q:.4?}"));
    assert!(ok);
}

#[test]
fn criterion_10_th_perturbation() {
    let plan = LevelPlan::new(Pattern::CrissCross, 4, 4);
    let rep = perturbation_experiment(&plan, None, 2.0, 10, 3).unwrap();
    let r1 = rep.column("r1_max").unwrap();
    let r2 = rep.column("r2_min").unwrap();
    let ok = r2.iter().all(|&v| v > 0.0) && spread(&r1) <= 3.0 && spread(&r2) <= 3.0;
    verdict(10, "Taylor-Hood perturbation", ok, &format!("r1 max {r1:.3?}, r2 min {r2:.3?}"));
    assert!(ok);
}
