//! Level studies: each runs a pipeline on a sequence of nested structured
//! meshes and records one report row per level.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::exact::StokesData;
use crate::analysis::norms::{weighted_norm, DiscreteField, Diff, ExactPressure, ExactVelocity, FieldSource, Order};
use crate::analysis::report::ExperimentReport;
use crate::approximation::{fortin_mini, interp_estimates, quasi_interpolate, quasi_interpolate_velocity, th_perturbation_field, Target};
use crate::assembly::{assemble, rhs_dirac, rhs_divergence, rhs_green, rhs_projection, RegularizedDelta};
use crate::error::{Error, Result};
use crate::fem::{CellGeometry, DofMap, ElementPair};
use crate::mesh::{Mesh, Pattern, Point, Rect};
use crate::quadrature::{Integrator, Quadrature, Singularity};
use crate::solver::{infsup_beta, SaddleSolver, Solution};
use crate::weights::{ap_admissible_range, ap_restricted_check, in_open_interval, natterer_integral_ratio, weight_measure, BallRule, Region, WeightSpec};

/// Structured meshes with `n = base_n * 2^k`, `k = 0..levels`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelPlan {
    pub pattern: Pattern,
    pub base_n: usize,
    pub levels: usize,
    pub domain: Rect,
}

impl LevelPlan {
    pub fn new(pattern: Pattern, base_n: usize, levels: usize) -> Self {
        LevelPlan { pattern, base_n, levels, domain: Rect::unit() }
    }

    pub fn n(&self, k: usize) -> usize {
        self.base_n << k
    }

    pub fn mesh(&self, k: usize) -> Result<Mesh> {
        Mesh::structured(self.pattern, self.n(k), self.domain)
    }

    fn check(&self) -> Result<()> {
        if self.base_n == 0 || self.levels == 0 {
            return Err(Error::InvalidArgument("need base_n >= 1 and at least one level".into()));
        }
        Ok(())
    }

    fn echo(&self, cfg: &mut BTreeMap<String, String>) {
        cfg.insert("pattern".into(), self.pattern.to_string());
        cfg.insert("base_n".into(), self.base_n.to_string());
        cfg.insert("levels".into(), self.levels.to_string());
        let d = self.domain;
        cfg.insert("domain".into(), format!("{},{},{},{}", d.x0, d.y0, d.x1, d.y1));
    }
}

fn config(plan: &LevelPlan, pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    let mut cfg = BTreeMap::new();
    plan.echo(&mut cfg);
    for (k, v) in pairs {
        cfg.insert(k.to_string(), v.clone());
    }
    cfg
}

fn weight_label(w: Option<&WeightSpec>) -> String {
    w.map_or_else(|| "const:1".to_string(), |w| w.to_string())
}

/// The implementable instance of the stability hypothesis: `p = 2` and a
/// weight that is constant or `dist(., Z)^alpha` to interior points with
/// `0 < alpha < 2`, positive on a boundary collar.
pub fn condition_s_gate(weight: Option<&WeightSpec>, p: f64, domain: &Rect) -> Result<()> {
    if p != 2.0 {
        return Err(Error::Gate(format!("p = {p}: only p = 2 is certified")));
    }
    let w = match weight {
        None | Some(WeightSpec::Constant(_)) => return Ok(()),
        Some(w) => w,
    };
    let WeightSpec::DistPower { set, alpha } = w else {
        return Err(Error::Gate(format!("weight `{w}` is outside the certified class dist(., Z)^alpha")));
    };
    if set.iter().any(|s| !matches!(s, Singularity::Point(_))) {
        return Err(Error::Gate("only point sets are certified".into()));
    }
    let range = ap_admissible_range(2, 0, p)?;
    if !(in_open_interval(*alpha, range) && *alpha > 0.0) {
        return Err(Error::Gate(format!("alpha = {alpha} lies outside the admissible interval (0, 2)")));
    }
    let eps = 0.05 * domain.width().min(domain.height());
    if !ap_restricted_check(w, domain, eps, 64)?.admissible {
        return Err(Error::Gate(format!("weight `{w}` is not positive and continuous near the boundary")));
    }
    Ok(())
}

/// Taylor–Hood stability needs every cell to have at least two interior
/// edges; the pattern fixes this for all levels.
pub fn mesh_gate(pair: ElementPair, plan: &LevelPlan) -> Result<()> {
    if pair == ElementPair::TaylorHood && !plan.mesh(0)?.th_mesh_ok() {
        return Err(Error::MeshHypothesis(format!(
            "{} meshes have cells with fewer than two interior edges; use criss-cross or pass the force flag",
            plan.pattern
        )));
    }
    Ok(())
}

struct LevelSolve {
    mesh: Mesh,
    sys: crate::assembly::SaddleSystem,
    sol: Solution,
}

impl LevelSolve {
    fn velocity(&self) -> DiscreteField<'_> {
        DiscreteField::velocity(&self.mesh, &self.sys.dofs, self.sol.velocity.clone())
    }

    fn pressure(&self) -> DiscreteField<'_> {
        DiscreteField::pressure(&self.mesh, &self.sys.dofs, self.sol.pressure.clone())
    }

    fn dofs(&self) -> usize {
        self.sys.dofs.n_velocity() + self.sys.dofs.n_pressure()
    }
}

fn stokes_projection(mesh: Mesh, pair: ElementPair, exact: &dyn StokesData, integ: &Integrator) -> Result<LevelSolve> {
    let sys = assemble(&mesh, pair, None)?;
    let load = rhs_projection(&mesh, &sys.dofs, exact, integ)?;
    let g = rhs_divergence(&mesh, exact, integ)?;
    let sol = SaddleSolver::new(&sys)?.solve_constrained(&sys, &load, Some(&g))?;
    Ok(LevelSolve { mesh, sys, sol })
}

fn dirac_solve(mesh: Mesh, pair: ElementPair, points: &[(Point, [f64; 2])]) -> Result<LevelSolve> {
    let sys = assemble(&mesh, pair, None)?;
    let load = rhs_dirac(&mesh, &sys.dofs, points)?;
    let sol = SaddleSolver::new(&sys)?.solve(&sys, &load)?;
    Ok(LevelSolve { mesh, sys, sol })
}

/// Classical error rates of the Stokes projection of an exact pair.
pub fn convergence_experiment(exact: &dyn StokesData, label: &str, pair: ElementPair, plan: &LevelPlan) -> Result<ExperimentReport> {
    plan.check()?;
    let integ = Integrator::default();
    let q = ["h1_velocity", "l2_velocity", "l2_pressure"];
    let mut rep = ExperimentReport::new("convergence", &q, &q)
        .with_config(&config(plan, &[("pair", pair.to_string()), ("exact", label.to_string())]));
    let (eu, ep) = (ExactVelocity(exact), ExactPressure(exact));
    for k in 0..plan.levels {
        let s = stokes_projection(plan.mesh(k)?, pair, exact, &integ)?;
        let (u, p) = (s.velocity(), s.pressure());
        let (du, dp) = (Diff(&eu, &u), Diff(&ep, &p));
        rep.push(
            k,
            s.mesh.h(),
            s.dofs(),
            vec![
                weighted_norm(&s.mesh, &du, None, 2.0, Order::Gradient, &integ)?,
                weighted_norm(&s.mesh, &du, None, 2.0, Order::Value, &integ)?,
                weighted_norm(&s.mesh, &dp, None, 2.0, Order::Value, &integ)?,
            ],
        );
    }
    Ok(rep)
}

/// `rho = (|grad u_h| + |pi_h|) / (|grad u| + |pi|)` in `L^p(w)` per level.
pub fn stability_experiment(
    exact: &dyn StokesData,
    label: &str,
    pair: ElementPair,
    weight: Option<&WeightSpec>,
    p: f64,
    plan: &LevelPlan,
    force: bool,
) -> Result<ExperimentReport> {
    plan.check()?;
    if !force {
        condition_s_gate(weight, p, &plan.domain)?;
        mesh_gate(pair, plan)?;
    }
    let integ = Integrator::default();
    let mut rep = ExperimentReport::new("stability", &["rho", "grad_uh", "ph", "grad_u", "p_exact"], &[]).with_config(&config(
        plan,
        &[("pair", pair.to_string()), ("exact", label.to_string()), ("weight", weight_label(weight)), ("p", p.to_string()), ("force_gates", force.to_string())],
    ));
    let (eu, ep) = (ExactVelocity(exact), ExactPressure(exact));
    for k in 0..plan.levels {
        let s = stokes_projection(plan.mesh(k)?, pair, exact, &integ)?;
        let w = weight.map(|w| w.with_mesh_size(s.mesh.h()));
        let w = w.as_ref();
        let (u, pr) = (s.velocity(), s.pressure());
        let guh = weighted_norm(&s.mesh, &u, w, p, Order::Gradient, &integ)?;
        let ph = weighted_norm(&s.mesh, &pr, w, p, Order::Value, &integ)?;
        let gu = weighted_norm(&s.mesh, &eu, w, p, Order::Gradient, &integ)?;
        let pe = weighted_norm(&s.mesh, &ep, w, p, Order::Value, &integ)?;
        rep.push(k, s.mesh.h(), s.dofs(), vec![(guh + ph) / (gu + pe), guh, ph, gu, pe]);
    }
    Ok(rep)
}

/// Projection error over the quasi-interpolation error, a proxy for the
/// best-approximation constant.
pub fn best_approx_experiment(
    exact: &dyn StokesData,
    label: &str,
    pair: ElementPair,
    weight: Option<&WeightSpec>,
    p: f64,
    plan: &LevelPlan,
    force: bool,
) -> Result<ExperimentReport> {
    plan.check()?;
    if !force {
        condition_s_gate(weight, p, &plan.domain)?;
        mesh_gate(pair, plan)?;
    }
    let integ = Integrator::default();
    let mut rep = ExperimentReport::new("best_approx", &["ratio", "projection_error", "interpolation_error", "exact_capture"], &[]).with_config(&config(
        plan,
        &[("pair", pair.to_string()), ("exact", label.to_string()), ("weight", weight_label(weight)), ("p", p.to_string())],
    ));
    let (eu, ep) = (ExactVelocity(exact), ExactPressure(exact));
    for k in 0..plan.levels {
        let s = stokes_projection(plan.mesh(k)?, pair, exact, &integ)?;
        let w = weight.map(|w| w.with_mesh_size(s.mesh.h()));
        let w = w.as_ref();
        let sing: Vec<Singularity> = exact.singular_points().into_iter().map(Singularity::Point).collect();
        let (u, pr) = (s.velocity(), s.pressure());
        let proj = weighted_norm(&s.mesh, &Diff(&eu, &u), w, p, Order::Gradient, &integ)?
            + weighted_norm(&s.mesh, &Diff(&ep, &pr), w, p, Order::Value, &integ)?;
        let iu = DiscreteField::velocity(&s.mesh, &s.sys.dofs, quasi_interpolate_velocity(&s.mesh, &s.sys.dofs, |x| exact.velocity(x), &integ, &sing));
        let ip = DiscreteField::pressure(&s.mesh, &s.sys.dofs, quasi_interpolate(&s.mesh, |x| exact.pressure(x), Target::Pressure, &integ, &sing));
        let interp = weighted_norm(&s.mesh, &Diff(&eu, &iu), w, p, Order::Gradient, &integ)?
            + weighted_norm(&s.mesh, &Diff(&ep, &ip), w, p, Order::Value, &integ)?;
        let scale = weighted_norm(&s.mesh, &eu, w, p, Order::Gradient, &integ)? + weighted_norm(&s.mesh, &ep, w, p, Order::Value, &integ)?;
        let capture = proj <= 1e-10 * scale.max(1.0);
        let ratio = if capture { 0.0 } else { proj / interp };
        rep.push(k, s.mesh.h(), s.dofs(), vec![ratio, proj, interp, if capture { 1.0 } else { 0.0 }]);
    }
    Ok(rep)
}

/// Discrete inf-sup constant per level.
pub fn infsup_experiment(pair: ElementPair, weight: Option<&WeightSpec>, plan: &LevelPlan, force: bool) -> Result<ExperimentReport> {
    plan.check()?;
    if !force {
        mesh_gate(pair, plan)?;
    }
    let mut rep = ExperimentReport::new("infsup", &["beta", "lambda_min"], &[])
        .with_config(&config(plan, &[("pair", pair.to_string()), ("weight", weight_label(weight)), ("p", "2".into())]));
    for k in 0..plan.levels {
        let mesh = plan.mesh(k)?;
        let r = infsup_beta(&mesh, pair, weight)?;
        let dofs = DofMap::new(&mesh, pair);
        rep.push(k, mesh.h(), dofs.n_velocity() + dofs.n_pressure(), vec![r.beta, r.lambda_min]);
        // timings stay out of the CSV so reruns are byte-identical
        rep.notes.push(format!("level {k}: {} pressure dofs, {:.2}s", r.pressure_dofs, r.seconds));
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiracSetup {
    pub points: Vec<(Point, [f64; 2])>,
    pub alpha: f64,
    /// Levels beyond the finest experiment level used for the reference.
    pub reference_extra: usize,
}

/// Velocity error of point-forced solves against a finer reference, with
/// weighted and unweighted energy norms per level.
pub fn dirac_convergence_experiment(setup: &DiracSetup, pair: ElementPair, plan: &LevelPlan, force: bool) -> Result<ExperimentReport> {
    plan.check()?;
    if setup.points.is_empty() {
        return Err(Error::InvalidArgument("no point sources".into()));
    }
    if !force && !(setup.alpha > 0.0 && setup.alpha < 2.0) {
        return Err(Error::Gate(format!("alpha = {} lies outside the admissible interval (0, 2)", setup.alpha)));
    }
    if !force {
        mesh_gate(pair, plan)?;
    }
    for (z, _) in &setup.points {
        if !(plan.domain.dist_to_boundary(*z) > 0.0) {
            return Err(Error::Gate(format!("source ({}, {}) must lie inside the domain", z[0], z[1])));
        }
    }
    let integ = Integrator::default();
    let zs: Vec<Singularity> = setup.points.iter().map(|(z, _)| Singularity::Point(*z)).collect();
    let w = WeightSpec::DistPower { set: zs, alpha: setup.alpha };
    let q = ["l2_velocity", "grad_uh_weighted", "ph_weighted", "grad_uh", "omega_h"];
    let mut rep = ExperimentReport::new("dirac", &q, &["l2_velocity", "grad_uh"]).with_config(&config(
        plan,
        &[
            ("pair", pair.to_string()),
            ("alpha", setup.alpha.to_string()),
            ("reference_extra", setup.reference_extra.to_string()),
            ("sources", setup.points.iter().map(|(z, f)| format!("{},{}:{},{}", z[0], z[1], f[0], f[1])).collect::<Vec<_>>().join(";")),
            ("force_gates", force.to_string()),
        ],
    ));
    let ref_mesh = Mesh::structured(plan.pattern, plan.n(plan.levels - 1 + setup.reference_extra), plan.domain)?;
    let reference = dirac_solve(ref_mesh, pair, &setup.points)?;
    let u_ref = reference.velocity();
    let balls = BallRule::default();
    for k in 0..plan.levels {
        let s = dirac_solve(plan.mesh(k)?, pair, &setup.points)?;
        let (u, pr) = (s.velocity(), s.pressure());
        let ut = u.on_mesh(&reference.mesh)?;
        let l2 = weighted_norm(&reference.mesh, &Diff(&u_ref, &ut), None, 2.0, Order::Value, &integ)?;
        let gw = weighted_norm(&s.mesh, &u, Some(&w), 2.0, Order::Gradient, &integ)?;
        let pw = weighted_norm(&s.mesh, &pr, Some(&w), 2.0, Order::Value, &integ)?;
        let g = weighted_norm(&s.mesh, &u, None, 2.0, Order::Gradient, &integ)?;
        let mut omega_h: f64 = 0.0;
        for c in 0..s.mesh.n_cells() {
            omega_h = omega_h.max(weight_measure(&w, &Region::Cell(s.mesh.cell_points(c)), &integ, &balls)?);
        }
        rep.push(k, s.mesh.h(), s.dofs(), vec![l2, gw, pw, g, omega_h]);
    }
    rep.notes.push(format!("reference: n = {}, {} unknowns", plan.n(plan.levels - 1 + setup.reference_extra), reference.dofs()));
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreenSetup {
    pub zs: Vec<Point>,
    pub i: usize,
    pub j: usize,
    pub lambda: f64,
    pub kappa: f64,
    pub reference_extra: usize,
}

/// `q = max_z |sigma_z^{mu/2} grad (G_ref - G_h)|_{L2} / h^{lambda/2}` with
/// `mu = 2 + lambda`; the delta is built on the level mesh and reused on
/// the reference mesh.
pub fn green_decay_experiment(setup: &GreenSetup, pair: ElementPair, plan: &LevelPlan) -> Result<ExperimentReport> {
    plan.check()?;
    if !(setup.lambda > 0.0 && setup.lambda <= 0.25) {
        return Err(Error::InvalidArgument(format!("lambda must lie in (0, 1/4], got {}", setup.lambda)));
    }
    if !(setup.kappa > 1.0) {
        return Err(Error::InvalidArgument(format!("kappa must exceed 1, got {}", setup.kappa)));
    }
    if setup.zs.is_empty() {
        return Err(Error::InvalidArgument("no sample points".into()));
    }
    let integ = Integrator::default();
    let mu = 2.0 + setup.lambda;
    let mut rep = ExperimentReport::new("green", &["q", "q_plain", "weighted_error", "plain_error"], &["weighted_error", "plain_error"]).with_config(&config(
        plan,
        &[
            ("pair", pair.to_string()),
            ("i", (setup.i + 1).to_string()),
            ("j", (setup.j + 1).to_string()),
            ("lambda", setup.lambda.to_string()),
            ("kappa", setup.kappa.to_string()),
            ("reference_extra", setup.reference_extra.to_string()),
            ("z", setup.zs.iter().map(|z| format!("{},{}", z[0], z[1])).collect::<Vec<_>>().join(";")),
        ],
    ));
    for k in 0..plan.levels {
        let mesh = plan.mesh(k)?;
        let h = mesh.h();
        if setup.kappa * h > plan.domain.diameter() {
            return Err(Error::InvalidArgument(format!("kappa h = {} exceeds the domain diameter", setup.kappa * h)));
        }
        let fine = Mesh::structured(plan.pattern, plan.n(k + setup.reference_extra), plan.domain)?;
        let sys = assemble(&mesh, pair, None)?;
        let fsys = assemble(&fine, pair, None)?;
        let (solver, fsolver) = (SaddleSolver::new(&sys)?, SaddleSolver::new(&fsys)?);
        let (mut q, mut qp, mut ew, mut ep) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for &z in &setup.zs {
            let delta = RegularizedDelta::new(&mesh, pair, z)?;
            let g = solver.solve(&sys, &rhs_green(&mesh, &sys.dofs, &delta, setup.i, setup.j)?)?;
            let gref = fsolver.solve(&fsys, &rhs_green(&fine, &fsys.dofs, &delta, setup.i, setup.j)?)?;
            let gh = DiscreteField::velocity(&mesh, &sys.dofs, g.velocity);
            let gr = DiscreteField::velocity(&fine, &fsys.dofs, gref.velocity);
            let ght = gh.on_mesh(&fine)?;
            let diff = Diff(&gr, &ght);
            let sigma = WeightSpec::natterer(z, setup.kappa, h).power(mu);
            let weighted = weighted_norm(&fine, &diff, Some(&sigma), 2.0, Order::Gradient, &integ)?;
            let plain = weighted_norm(&fine, &diff, None, 2.0, Order::Gradient, &integ)?;
            q = q.max(weighted / h.powf(0.5 * setup.lambda));
            qp = qp.max(plain / h.powf(0.5 * setup.lambda));
            ew = ew.max(weighted);
            ep = ep.max(plain);
        }
        rep.push(k, h, sys.dofs.n_velocity() + sys.dofs.n_pressure(), vec![q, qp, ew, ep]);
    }
    Ok(rep)
}

/// Regularized delta moment defects and the sup-norm scaling constant.
/// `z` is placed at the same barycentric position of the cell containing
/// `anchor` at every level.
pub fn delta_experiment(pair: ElementPair, plan: &LevelPlan, anchor: Point, bary: [f64; 3], seed: u64) -> Result<ExperimentReport> {
    plan.check()?;
    let mut rep = ExperimentReport::new("delta", &["mass_defect", "moment_defect", "sup_h2"], &[])
        .with_config(&config(plan, &[("pair", pair.to_string()), ("seed", seed.to_string())]));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..plan.levels {
        let mesh = plan.mesh(k)?;
        let dofs = DofMap::new(&mesh, pair);
        let cell = mesh.locate_point(anchor)?;
        let geo = CellGeometry::of_cell(&mesh, cell)?;
        let z = geo.to_physical(bary);
        let d = RegularizedDelta::new(&mesh, pair, z)?;
        let dgeo = CellGeometry::of_cell(&mesh, d.cell())?;
        let mass = (d.integrate(|_| 1.0) - 1.0).abs();
        let mut moment: f64 = 0.0;
        for _ in 0..20 {
            let v: Vec<f64> = (0..dofs.n_velocity()).map(|_| rng.random_range(-1.0..1.0)).collect();
            for comp in 0..2 {
                let lhs = d.integrate(|x| crate::fem::velocity_at(&dofs, &v, d.cell(), &dgeo, dgeo.barycentric(x)).0[comp]);
                let rhs = crate::fem::velocity_at(&dofs, &v, d.cell(), &dgeo, dgeo.barycentric(z)).0[comp];
                moment = moment.max((lhs - rhs).abs());
            }
        }
        let sup = d.max_abs(60) * d.h_cell().powi(2);
        rep.push(k, mesh.h(), dofs.n_velocity(), vec![mass, moment, sup]);
    }
    Ok(rep)
}

/// Cell-mean defects, divergence defects and weighted stability of the
/// Mini Fortin operator for a smooth field vanishing on the boundary.
pub fn fortin_experiment(
    plan: &LevelPlan,
    v: &dyn Fn(Point) -> [f64; 2],
    dv: &dyn Fn(Point) -> [[f64; 2]; 2],
    weight: Option<&WeightSpec>,
    p: f64,
) -> Result<ExperimentReport> {
    plan.check()?;
    let integ = Integrator::default();
    let rule = Quadrature::gauss(16);
    let mut rep = ExperimentReport::new("fortin", &["mean_defect", "b_defect", "stability"], &[])
        .with_config(&config(plan, &[("weight", weight_label(weight)), ("p", p.to_string())]));
    struct Exact<'a>(&'a dyn Fn(Point) -> [f64; 2], &'a dyn Fn(Point) -> [[f64; 2]; 2]);
    impl FieldSource for Exact<'_> {
        fn sample(&self, _: usize, x: Point) -> crate::analysis::norms::Sample {
            crate::analysis::norms::Sample::vector((self.0)(x), (self.1)(x))
        }
    }
    for k in 0..plan.levels {
        let mesh = plan.mesh(k)?;
        let dofs = DofMap::new(&mesh, ElementPair::Mini);
        let f = fortin_mini(&mesh, &dofs, v)?;
        let field = DiscreteField::velocity(&mesh, &dofs, f.clone());
        let mut mean: f64 = 0.0;
        // int_T (v - F v) and -int q div v per pressure basis
        let mut bv = vec![0.0; mesh.n_vertices()];
        for c in 0..mesh.n_cells() {
            let geo = CellGeometry::of_cell(&mesh, c)?;
            let pts = mesh.cell_points(c);
            for comp in 0..2 {
                let d = rule.integrate(pts, |x| v(x)[comp] - field.at_cell(c, x).value[comp]);
                mean = mean.max(d.abs());
            }
            let cell = mesh.cells()[c];
            for (i, &vk) in cell.iter().enumerate() {
                bv[vk] -= rule.integrate(pts, |x| {
                    let g = dv(x);
                    geo.barycentric(x)[i] * (g[0][0] + g[1][1])
                });
            }
        }
        let bmat = crate::assembly::divergence(&mesh, &dofs, &Quadrature::degree6())?;
        let bf = bmat.matvec(&f);
        let bdef = bv.iter().zip(&bf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let w = weight.map(|w| w.with_mesh_size(mesh.h()));
        let exact = Exact(v, dv);
        let stab = weighted_norm(&mesh, &field, w.as_ref(), p, Order::Gradient, &integ)? / weighted_norm(&mesh, &exact, w.as_ref(), p, Order::Gradient, &integ)?;
        rep.push(k, mesh.h(), dofs.n_velocity(), vec![mean, bdef, stab]);
    }
    Ok(rep)
}

/// Quasi-interpolation ratios per level for a scalar field.
pub fn interp_experiment(
    plan: &LevelPlan,
    field: &dyn Fn(Point) -> (f64, [f64; 2]),
    weight: Option<&WeightSpec>,
    p: f64,
    singular: &[Point],
) -> Result<ExperimentReport> {
    plan.check()?;
    let integ = Integrator::default();
    let sing: Vec<Singularity> = singular.iter().map(|&z| Singularity::Point(z)).collect();
    let q = ["c_stab", "c_err", "c_mixed", "l2_error", "h1_error", "cells_skipped"];
    let mut rep = ExperimentReport::new("interpolation", &q, &["l2_error", "h1_error"])
        .with_config(&config(plan, &[("weight", weight_label(weight)), ("p", p.to_string())]));
    for k in 0..plan.levels {
        let mesh = plan.mesh(k)?;
        let r = interp_estimates(&mesh, field, weight, p, &integ, &sing)?;
        rep.push(k, mesh.h(), mesh.n_vertices(), vec![r.c_stab, r.c_err, r.c_mixed, r.l2_error, r.h1_error, r.cells_skipped as f64]);
    }
    Ok(rep)
}

/// Normalized Natterer integral per level, maximized over sample points.
pub fn natterer_experiment(plan: &LevelPlan, lambda: f64, kappa: f64, samples: &[Point]) -> Result<ExperimentReport> {
    plan.check()?;
    let meshes: Vec<Mesh> = (0..plan.levels).map(|k| plan.mesh(k)).collect::<Result<_>>()?;
    let levels = natterer_integral_ratio(lambda, kappa, &meshes, samples, &Integrator::default())?;
    let mut rep = ExperimentReport::new("natterer", &["ratio"], &[])
        .with_config(&config(plan, &[("lambda", lambda.to_string()), ("kappa", kappa.to_string())]));
    for (k, (l, m)) in levels.iter().zip(&meshes).enumerate() {
        rep.push(k, l.h, m.n_cells(), vec![l.ratio]);
    }
    Ok(rep)
}

/// Extremes of the two perturbation ratios over random zero-mean pressures.
pub fn perturbation_experiment(plan: &LevelPlan, weight: Option<&WeightSpec>, p: f64, samples: usize, seed: u64) -> Result<ExperimentReport> {
    plan.check()?;
    let integ = Integrator::default();
    let mut rep = ExperimentReport::new("perturbation", &["r1_max", "r1_min", "r2_max", "r2_min"], &[])
        .with_config(&config(plan, &[("weight", weight_label(weight)), ("p", p.to_string()), ("samples", samples.to_string()), ("seed", seed.to_string())]));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..plan.levels {
        let mesh = plan.mesh(k)?;
        let dofs = DofMap::new(&mesh, ElementPair::TaylorHood);
        let mean = crate::assembly::mean_row(&mesh);
        let (mut r1, mut r2) = (Vec::new(), Vec::new());
        let start = Instant::now();
        for _ in 0..samples {
            let mut q: Vec<f64> = (0..mesh.n_vertices()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let m = q.iter().zip(&mean).map(|(a, b)| a * b).sum::<f64>() / mesh.total_area();
            q.iter_mut().for_each(|v| *v -= m);
            let r = th_perturbation_field(&mesh, &dofs, &q, weight, p, &integ)?;
            r1.extend(r.r1);
            r2.extend(r.r2);
        }
        log::debug!("perturbation level {k}: {:.2}s", start.elapsed().as_secs_f64());
        let ext = |v: &[f64]| (v.iter().cloned().fold(f64::NEG_INFINITY, f64::max), v.iter().cloned().fold(f64::INFINITY, f64::min));
        let (a, b) = ext(&r1);
        let (c, d) = ext(&r2);
        rep.push(k, mesh.h(), dofs.n_velocity(), vec![a, b, c, d]);
    }
    Ok(rep)
}

/// Mesh statistics per level.
pub fn mesh_report(plan: &LevelPlan) -> Result<ExperimentReport> {
    plan.check()?;
    let q = ["vertices", "cells", "edges", "size_ratio", "aspect_ratio", "th_mesh_ok", "conformity_violations", "area_defect"];
    let mut rep = ExperimentReport::new("mesh_info", &q, &[]).with_config(&config(plan, &[]));
    for k in 0..plan.levels {
        let m = plan.mesh(k)?;
        let s = m.shape_metrics();
        rep.push(
            k,
            m.h(),
            m.n_vertices(),
            vec![
                m.n_vertices() as f64,
                m.n_cells() as f64,
                m.n_edges() as f64,
                s.size_ratio,
                s.aspect_ratio,
                if m.th_mesh_ok() { 1.0 } else { 0.0 },
                m.conformity_violations() as f64,
                (m.total_area() - plan.domain.area()).abs(),
            ],
        );
    }
    Ok(rep)
}

/// A_p lower bound over the standard ball family, the largest cell
/// measure and the smallest collar value per level.
pub fn weight_report(w: &WeightSpec, p: f64, plan: &LevelPlan) -> Result<ExperimentReport> {
    plan.check()?;
    w.validate()?;
    let integ = Integrator::default();
    let rule = BallRule::default();
    let mut rep = ExperimentReport::new("weights_diag", &["ap_lower_bound", "omega_h", "collar_min", "restricted_ok"], &[])
        .with_config(&config(plan, &[("weight", w.to_string()), ("p", p.to_string())]));
    let point_range = ap_admissible_range(2, 0, p)?;
    let seg_range = ap_admissible_range(2, 1, p)?;
    rep.notes.push(format!("A_p exponent range: points ({}, {}), segments ({}, {})", point_range.0, point_range.1, seg_range.0, seg_range.1));
    if let Some(a) = w.singular_exponent() {
        rep.notes.push(format!("singular exponent {a}, locally integrable: {}", w.locally_integrable()));
    }
    let eps = 0.05 * plan.domain.width().min(plan.domain.height());
    for k in 0..plan.levels {
        let mesh = plan.mesh(k)?;
        let h = mesh.h();
        let wh = w.with_mesh_size(h);
        let ap = crate::weights::estimate_ap_constant(&wh, p, &crate::weights::standard_ball_family(&wh, &plan.domain, h), &rule)?;
        let mut omega_h: f64 = 0.0;
        for c in 0..mesh.n_cells() {
            omega_h = omega_h.max(weight_measure(&wh, &Region::Cell(mesh.cell_points(c)), &integ, &rule)?);
        }
        let rc = ap_restricted_check(&wh, &plan.domain, eps, 64)?;
        rep.push(k, h, mesh.n_cells(), vec![ap.value, omega_h, rc.omega_l, if rc.admissible { 1.0 } else { 0.0 }]);
    }
    Ok(rep)
}
