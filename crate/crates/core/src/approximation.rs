//! Star-averaged quasi-interpolation, the Mini Fortin operator and the
//! Taylor–Hood perturbation field.

use serde::Serialize;

use crate::assembly::divergence;
use crate::error::{Error, Result};
use crate::fem::{bubble_cell_integral, pressure_at, CellGeometry, DofMap, ElementPair};
use crate::mesh::{Mesh, Point};
use crate::quadrature::{Integrator, Quadrature, Singularity};
use crate::weights::{weight_measure, BallRule, Region, WeightSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// Boundary vertex values set to zero.
    Velocity,
    /// Shifted by a constant to zero mean.
    Pressure,
}

/// Per-vertex values of the star-averaged interpolant of a scalar field.
pub fn quasi_interpolate(mesh: &Mesh, f: impl Fn(Point) -> f64, target: Target, integ: &Integrator, singular: &[Singularity]) -> Vec<f64> {
    let cell_int: Vec<f64> = (0..mesh.n_cells())
        .map(|c| integ.integrate(mesh.cell_points(c), singular, &f))
        .collect();
    let mut vals: Vec<f64> = (0..mesh.n_vertices())
        .map(|v| {
            let cells = mesh.vertex_cells(v);
            let num: f64 = cells.iter().map(|&c| cell_int[c]).sum();
            let den: f64 = cells.iter().map(|&c| mesh.cell_area(c)).sum();
            num / den
        })
        .collect();
    match target {
        Target::Velocity => {
            for (v, x) in vals.iter_mut().enumerate() {
                if mesh.vertex_on_boundary(v) {
                    *x = 0.0;
                }
            }
        }
        Target::Pressure => {
            let mean = crate::assembly::mean_row(mesh);
            let c_q = -vals.iter().zip(&mean).map(|(a, m)| a * m).sum::<f64>() / mesh.total_area();
            for x in vals.iter_mut() {
                *x += c_q;
            }
        }
    }
    vals
}

/// Interpolates both velocity components and lifts them into the pair's
/// velocity space.
pub fn quasi_interpolate_velocity(mesh: &Mesh, dofs: &DofMap, u: impl Fn(Point) -> [f64; 2], integ: &Integrator, singular: &[Singularity]) -> Vec<f64> {
    let c0 = quasi_interpolate(mesh, |x| u(x)[0], Target::Velocity, integ, singular);
    let c1 = quasi_interpolate(mesh, |x| u(x)[1], Target::Velocity, integ, singular);
    dofs.lift_p1(mesh, [&c0, &c1])
}

fn p1_value_grad(mesh: &Mesh, coeffs: &[f64], cell: usize, geo: &CellGeometry, x: Point) -> (f64, [f64; 2]) {
    pressure_at(mesh, coeffs, cell, geo, geo.barycentric(x))
}

fn grad_pth(g: [f64; 2], p: f64) -> f64 {
    (g[0] * g[0] + g[1] * g[1]).powf(0.5 * p)
}

/// Per-level maxima of the local interpolation ratios.
#[derive(Clone, Debug, Serialize)]
pub struct InterpLevel {
    pub h: f64,
    pub c_stab: f64,
    pub c_err: f64,
    pub c_mixed: f64,
    /// Largest interpolation error over cells whose vertices are interior.
    pub interior_error: f64,
    pub l2_error: f64,
    pub h1_error: f64,
    pub cells_used: usize,
    pub cells_skipped: usize,
}

/// Local stability and approximation ratios of the velocity-variant
/// interpolant on cells whose vertices are all interior. `field` returns
/// value and gradient.
pub fn interp_estimates(
    mesh: &Mesh,
    field: &dyn Fn(Point) -> (f64, [f64; 2]),
    weight: Option<&WeightSpec>,
    p: f64,
    integ: &Integrator,
    singular: &[Singularity],
) -> Result<InterpLevel> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p must lie in (1, inf), got {p}")));
    }
    let mut sing: Vec<Singularity> = singular.to_vec();
    if let Some(w) = weight {
        w.validate()?;
        sing.extend(w.singular_set());
    }
    let pi = quasi_interpolate(mesh, |x| field(x).0, Target::Velocity, integ, &sing);
    let nc = mesh.n_cells();
    let (mut s_grad, mut n_stab, mut n_err, mut n_plain, mut wm) = (vec![0.0; nc], vec![0.0; nc], vec![0.0; nc], vec![0.0; nc], vec![0.0; nc]);
    let (mut l2, mut h1) = (0.0, 0.0);
    for c in 0..nc {
        let geo = CellGeometry::of_cell(mesh, c)?;
        for (x, q) in integ.points(mesh.cell_points(c), &sing) {
            let w = weight.map_or(1.0, |w| w.value(x));
            if !w.is_finite() {
                return Err(Error::QuadratureDivergence(format!("weight not finite at ({}, {})", x[0], x[1])));
            }
            let (v, gv) = field(x);
            let (iv, giv) = p1_value_grad(mesh, &pi, c, &geo, x);
            let e = (v - iv).abs();
            let ge = [gv[0] - giv[0], gv[1] - giv[1]];
            s_grad[c] += q * w * grad_pth(gv, p);
            n_stab[c] += q * w * grad_pth(giv, p);
            n_err[c] += q * w * e.powf(p);
            n_plain[c] += q * e.powf(p);
            wm[c] += q * w;
            l2 += q * e * e;
            h1 += q * (ge[0] * ge[0] + ge[1] * ge[1]);
        }
    }
    let mut out = InterpLevel {
        h: mesh.h(),
        c_stab: 0.0,
        c_err: 0.0,
        c_mixed: 0.0,
        interior_error: 0.0,
        l2_error: l2.sqrt(),
        h1_error: h1.sqrt(),
        cells_used: 0,
        cells_skipped: 0,
    };
    for c in 0..nc {
        if mesh.cells()[c].iter().any(|&v| mesh.vertex_on_boundary(v)) {
            continue;
        }
        let star = mesh.star(c)?;
        let sg: f64 = star.members.iter().map(|&t| s_grad[t]).sum();
        let sw: f64 = star.members.iter().map(|&t| wm[t]).sum();
        out.interior_error = out.interior_error.max(n_plain[c].powf(1.0 / p));
        if sg <= 1e-300 {
            out.cells_skipped += 1;
            continue;
        }
        let hs = mesh.cell_diameter(c);
        let gnorm = sg.powf(1.0 / p);
        out.c_stab = out.c_stab.max(n_stab[c].powf(1.0 / p) / gnorm);
        out.c_err = out.c_err.max(n_err[c].powf(1.0 / p) / (hs * gnorm));
        out.c_mixed = out.c_mixed.max(n_plain[c].powf(1.0 / p) / (hs.powf(1.0 + 2.0 / p) * sw.powf(-1.0 / p) * gnorm));
        out.cells_used += 1;
    }
    Ok(out)
}

const FORTIN_DEGREE: usize = 16;

/// `F v = Pi v + sum_T gamma_T b_T` with `gamma_T = int_T (v - Pi v) / int_T b_T`,
/// so cell means of `v` are preserved. Returns Mini velocity coefficients.
pub fn fortin_mini(mesh: &Mesh, dofs: &DofMap, v: impl Fn(Point) -> [f64; 2]) -> Result<Vec<f64>> {
    if dofs.pair() != ElementPair::Mini {
        return Err(Error::InvalidArgument("the Fortin operator is built for the mini element".into()));
    }
    let rule = Quadrature::gauss(FORTIN_DEGREE);
    let integ = Integrator::new(rule.clone(), 0);
    let mut coeffs = quasi_interpolate_velocity(mesh, dofs, &v, &integ, &[]);
    let nv = mesh.n_vertices();
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of_cell(mesh, c)?;
        let pts = mesh.cell_points(c);
        let bint = bubble_cell_integral(pts, true);
        for comp in 0..2 {
            let vc: Vec<f64> = mesh.cells()[c].iter().map(|&k| coeffs[dofs.velocity_dof(comp, k)]).collect();
            let resid = rule.integrate(pts, |x| {
                let l = geo.barycentric(x);
                v(x)[comp] - (vc[0] * l[0] + vc[1] * l[1] + vc[2] * l[2])
            });
            coeffs[dofs.velocity_dof(comp, nv + c)] = resid / bint;
        }
    }
    Ok(coeffs)
}

/// Output of [`th_perturbation_field`]. Ratios are `None` when `grad q_h`
/// vanishes.
#[derive(Clone, Debug)]
pub struct Perturbation {
    /// Taylor–Hood velocity coefficients (vertex values zero).
    pub w: Vec<f64>,
    /// `|grad w|^p_{L^p(w)} / (h^{p'} |grad q|^{p'}_{L^{p'}(w')})`
    pub r1: Option<f64>,
    /// `-b(w, q) / (h^{p'} sum_T w'(T) |grad q|_T|^{p'})`; the pairing is
    /// negative under `b(v, q) = -int q div v`.
    pub r2: Option<f64>,
    /// `b(w, q)`
    pub b_value: f64,
}

/// Midpoint field built from tangential pressure derivatives. At an edge
/// shared by two cells `w'(T)/|T|` is taken from the lower-indexed cell.
pub fn th_perturbation_field(
    mesh: &Mesh,
    dofs: &DofMap,
    q: &[f64],
    weight: Option<&WeightSpec>,
    p: f64,
    integ: &Integrator,
) -> Result<Perturbation> {
    if dofs.pair() != ElementPair::TaylorHood {
        return Err(Error::InvalidArgument("the perturbation field lives in the Taylor–Hood space".into()));
    }
    if !mesh.th_mesh_ok() {
        return Err(Error::MeshHypothesis("some cell has fewer than two interior edges".into()));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p must lie in (1, inf), got {p}")));
    }
    let pc = p / (p - 1.0);
    let w = weight.cloned().unwrap_or(WeightSpec::Constant(1.0)).with_mesh_size(mesh.h());
    let wc = w.conjugate(p);
    let balls = BallRule::default();
    let wc_cell: Vec<f64> = (0..mesh.n_cells())
        .map(|c| weight_measure(&wc, &Region::Cell(mesh.cell_points(c)), integ, &balls))
        .collect::<Result<_>>()?;
    let nv = mesh.n_vertices();
    let mut coeffs = vec![0.0; dofs.n_velocity()];
    for (e, [a, b]) in mesh.edges().iter().enumerate() {
        if mesh.edge_on_boundary(e) {
            continue;
        }
        let (pa, pb) = (mesh.vertex(*a), mesh.vertex(*b));
        let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
        let tau = [(pb[0] - pa[0]) / len, (pb[1] - pa[1]) / len];
        let dq = (q[*b] - q[*a]) / len;
        let t = mesh.edge_cells(e).iter().flatten().copied().min().unwrap();
        let mag = -len.powf(pc) * dq.signum() * dq.abs().powf(pc - 1.0) * wc_cell[t] / mesh.cell_area(t);
        for comp in 0..2 {
            coeffs[dofs.velocity_dof(comp, nv + e)] = mag * tau[comp];
        }
    }
    let bmat = divergence(mesh, dofs, &Quadrature::degree6())?;
    let b_value: f64 = bmat.matvec(&coeffs).iter().zip(q).map(|(a, b)| a * b).sum();
    let h = mesh.h();
    let sing = w.singular_set();
    let (mut num1, mut den1, mut den2) = (0.0, 0.0, 0.0);
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of_cell(mesh, c)?;
        let gq = pressure_at(mesh, q, c, &geo, [1.0 / 3.0; 3]).1;
        let gq_p = grad_pth(gq, pc);
        den2 += wc_cell[c] * gq_p;
        for (x, wq) in integ.points(mesh.cell_points(c), &sing) {
            let (_, gw) = crate::fem::velocity_at(dofs, &coeffs, c, &geo, geo.barycentric(x));
            num1 += wq * w.value(x) * (grad_pth(gw[0], p) + grad_pth(gw[1], p));
            den1 += wq * wc.value(x) * gq_p;
        }
    }
    let scale = h.powf(pc);
    let vacuous = den2 <= 1e-300;
    Ok(Perturbation {
        w: coeffs,
        r1: (!vacuous).then(|| num1 / (scale * den1)),
        r2: (!vacuous).then(|| -b_value / (scale * den2)),
        b_value,
    })
}
