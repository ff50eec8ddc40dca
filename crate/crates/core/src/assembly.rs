//! Stokes bilinear forms, weighted blocks and load vectors.
//!
//! `a(u, v) = int grad u : grad v` and `b(v, q) = -int q div v`. Velocity
//! vectors in this module are full length (boundary dofs included);
//! [`SaddleSystem`] blocks act on the free dofs only.

use faer::{Mat, Side};
use faer::prelude::Solve;
use log::warn;

use crate::analysis::exact::StokesData;
use crate::error::{Error, Result};
use crate::fem::{velocity_basis, CellGeometry, DofMap, ElementPair};
use crate::mesh::{Mesh, Point};
use crate::quadrature::{Integrator, Quadrature, Singularity};
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::weights::WeightSpec;

/// Quadrature points of a cell, graded toward `singular`.
fn cell_points(mesh: &Mesh, cell: usize, integ: &Integrator, singular: &[Singularity]) -> Vec<(Point, f64)> {
    integ.points(mesh.cell_points(cell), singular)
}

fn weight_at(w: Option<&WeightSpec>, x: Point) -> Result<f64> {
    match w {
        None => Ok(1.0),
        Some(w) => {
            let v = w.value(x);
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(Error::QuadratureDivergence(format!("weight `{w}` is not finite at ({}, {})", x[0], x[1])))
            }
        }
    }
}

fn singular_of(w: Option<&WeightSpec>) -> Vec<Singularity> {
    w.map(|w| w.singular_set()).unwrap_or_default()
}

fn check_weight(w: &WeightSpec) -> Result<()> {
    w.validate()?;
    if !w.locally_integrable() {
        return Err(Error::QuadratureDivergence(format!("weight `{w}` is not locally integrable")));
    }
    Ok(())
}

/// Vector stiffness `int w grad u : grad v` on all velocity dofs.
pub fn stiffness(mesh: &Mesh, dofs: &DofMap, weight: Option<&WeightSpec>, integ: &Integrator) -> Result<CsrMatrix> {
    if let Some(w) = weight {
        check_weight(w)?;
    }
    let sing = singular_of(weight);
    let n = dofs.n_velocity();
    let mut tb = TripletBuilder::new(n, n);
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of_cell(mesh, c)?;
        let loc = dofs.cell_velocity(c);
        let nl = loc.len();
        let mut k = [[0.0; 6]; 6];
        for (x, q) in cell_points(mesh, c, integ, &sing) {
            let wq = q * weight_at(weight, x)?;
            let b = velocity_basis(dofs.pair(), &geo, geo.barycentric(x));
            for a in 0..nl {
                for e in 0..nl {
                    k[a][e] += wq * (b.grads[a][0] * b.grads[e][0] + b.grads[a][1] * b.grads[e][1]);
                }
            }
        }
        for comp in 0..2 {
            for a in 0..nl {
                for e in 0..nl {
                    tb.push(dofs.velocity_dof(comp, loc[a]), dofs.velocity_dof(comp, loc[e]), k[a][e]);
                }
            }
        }
    }
    Ok(tb.build())
}

/// Pressure mass `int w q r`.
pub fn pressure_mass(mesh: &Mesh, weight: Option<&WeightSpec>, integ: &Integrator) -> Result<CsrMatrix> {
    if let Some(w) = weight {
        check_weight(w)?;
    }
    let sing = singular_of(weight);
    let n = mesh.n_vertices();
    let mut tb = TripletBuilder::new(n, n);
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of_cell(mesh, c)?;
        let cell = mesh.cells()[c];
        let mut m = [[0.0; 3]; 3];
        for (x, q) in cell_points(mesh, c, integ, &sing) {
            let wq = q * weight_at(weight, x)?;
            let l = geo.barycentric(x);
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += wq * l[i] * l[j];
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                tb.push(cell[i], cell[j], m[i][j]);
            }
        }
    }
    Ok(tb.build())
}

/// Divergence coupling `-int q div v`, pressure rows by all velocity columns.
pub fn divergence(mesh: &Mesh, dofs: &DofMap, rule: &Quadrature) -> Result<CsrMatrix> {
    let mut tb = TripletBuilder::new(dofs.n_pressure(), dofs.n_velocity());
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of_cell(mesh, c)?;
        let loc = dofs.cell_velocity(c);
        let cell = mesh.cells()[c];
        let mut d = [[[0.0; 6]; 3]; 2];
        let scale = 2.0 * geo.area;
        for (l, w) in rule.points().iter().zip(rule.weights()) {
            let b = velocity_basis(dofs.pair(), &geo, *l);
            for i in 0..3 {
                for a in 0..loc.len() {
                    for (comp, dc) in d.iter_mut().enumerate() {
                        dc[i][a] -= w * scale * l[i] * b.grads[a][comp];
                    }
                }
            }
        }
        for (comp, dc) in d.iter().enumerate() {
            for i in 0..3 {
                for a in 0..loc.len() {
                    tb.push(cell[i], dofs.velocity_dof(comp, loc[a]), dc[i][a]);
                }
            }
        }
    }
    Ok(tb.build())
}

/// `m_k = int psi_k`.
pub fn mean_row(mesh: &Mesh) -> Vec<f64> {
    let mut m = vec![0.0; mesh.n_vertices()];
    for c in 0..mesh.n_cells() {
        let a = mesh.cell_area(c) / 3.0;
        for &v in &mesh.cells()[c] {
            m[v] += a;
        }
    }
    m
}

/// Weighted p = 2 blocks for a weight `w` and its conjugate `w' = 1/w`.
#[derive(Clone, Debug)]
pub struct WeightedBlocks {
    pub weight: WeightSpec,
    /// `int w grad u : grad v` on free dofs.
    pub a_w: CsrMatrix,
    /// `int w' grad u : grad v` on free dofs.
    pub a_wc: CsrMatrix,
    pub m_w: CsrMatrix,
    pub m_wc: CsrMatrix,
}

/// Assembled Stokes blocks with boundary velocity dofs eliminated.
#[derive(Clone, Debug)]
pub struct SaddleSystem {
    pub dofs: DofMap,
    /// Velocity stiffness on free dofs.
    pub a: CsrMatrix,
    /// Divergence coupling on free velocity columns.
    pub b: CsrMatrix,
    /// Divergence coupling on all velocity columns.
    pub b_full: CsrMatrix,
    pub mean: Vec<f64>,
    /// Unweighted pressure mass.
    pub m: CsrMatrix,
    pub weighted: Option<WeightedBlocks>,
}

impl SaddleSystem {
    pub fn pair(&self) -> ElementPair {
        self.dofs.pair()
    }

    pub fn n_free(&self) -> usize {
        self.dofs.n_free()
    }

    pub fn n_pressure(&self) -> usize {
        self.dofs.n_pressure()
    }
}

/// Assembles the Stokes blocks; with a weight, also the weighted variants
/// for `w` and its p = 2 conjugate.
pub fn assemble(mesh: &Mesh, pair: ElementPair, weight: Option<&WeightSpec>) -> Result<SaddleSystem> {
    assemble_with(mesh, pair, weight, &Integrator::default())
}

pub fn assemble_with(mesh: &Mesh, pair: ElementPair, weight: Option<&WeightSpec>, integ: &Integrator) -> Result<SaddleSystem> {
    let dofs = DofMap::new(mesh, pair);
    let free = dofs.free_to_global().to_vec();
    let restrict = |full: &CsrMatrix| {
        let map: Vec<Option<usize>> = (0..dofs.n_velocity()).map(|g| dofs.free_index(g)).collect();
        full.submatrix(&free, &map, free.len())
    };
    let plain = Integrator::new(integ.rule.clone(), 0);
    let a = restrict(&stiffness(mesh, &dofs, None, &plain)?);
    let b_full = divergence(mesh, &dofs, &integ.rule)?;
    let map: Vec<Option<usize>> = (0..dofs.n_velocity()).map(|g| dofs.free_index(g)).collect();
    let rows: Vec<usize> = (0..dofs.n_pressure()).collect();
    let b = b_full.submatrix(&rows, &map, free.len());
    let m = pressure_mass(mesh, None, &plain)?;
    let weighted = match weight {
        None => None,
        Some(w) => {
            let w = w.with_mesh_size(mesh.h());
            let wc = w.conjugate(2.0);
            Some(WeightedBlocks {
                a_w: restrict(&stiffness(mesh, &dofs, Some(&w), integ)?),
                a_wc: restrict(&stiffness(mesh, &dofs, Some(&wc), integ)?),
                m_w: pressure_mass(mesh, Some(&w), integ)?,
                m_wc: pressure_mass(mesh, Some(&wc), integ)?,
                weight: w,
            })
        }
    };
    Ok(SaddleSystem { mean: mean_row(mesh), dofs, a, b, b_full, m, weighted })
}

/// `int f . phi_i` for a smooth vector field.
pub fn rhs_regular(mesh: &Mesh, dofs: &DofMap, rule: &Quadrature, f: impl Fn(Point) -> [f64; 2]) -> Result<Vec<f64>> {
    let mut load = vec![0.0; dofs.n_velocity()];
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of_cell(mesh, c)?;
        let loc = dofs.cell_velocity(c);
        let scale = 2.0 * geo.area;
        for (l, w) in rule.points().iter().zip(rule.weights()) {
            let fx = f(geo.to_physical(*l));
            let b = velocity_basis(dofs.pair(), &geo, *l);
            for (a, &s) in loc.iter().enumerate() {
                for comp in 0..2 {
                    load[dofs.velocity_dof(comp, s)] += w * scale * fx[comp] * b.values[a];
                }
            }
        }
    }
    Ok(load)
}

/// Point-evaluation load `sum_z F_z . phi_i(z)`.
pub fn rhs_dirac(mesh: &Mesh, dofs: &DofMap, points: &[(Point, [f64; 2])]) -> Result<Vec<f64>> {
    let mut load = vec![0.0; dofs.n_velocity()];
    for &(z, force) in points {
        if mesh.domain().dist_to_boundary(z) <= 0.0 {
            return Err(Error::PointOutsideDomain { x: z[0], y: z[1] });
        }
        let c = mesh.locate_point(z)?;
        let geo = CellGeometry::of_cell(mesh, c)?;
        let l = geo.barycentric(z);
        if l.iter().any(|&v| v.abs() < 1e-12) {
            warn!("dirac point ({}, {}) lies on a cell interface; assigned to cell {c}", z[0], z[1]);
        }
        let b = velocity_basis(dofs.pair(), &geo, l);
        for (a, &s) in dofs.cell_velocity(c).iter().enumerate() {
            for comp in 0..2 {
                load[dofs.velocity_dof(comp, s)] += force[comp] * b.values[a];
            }
        }
    }
    Ok(load)
}

/// `int grad u : grad phi_i - pi div phi_i` for an exact pair.
pub fn rhs_projection(mesh: &Mesh, dofs: &DofMap, exact: &dyn StokesData, integ: &Integrator) -> Result<Vec<f64>> {
    let sing: Vec<Singularity> = exact.singular_points().into_iter().map(Singularity::Point).collect();
    let mut load = vec![0.0; dofs.n_velocity()];
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of_cell(mesh, c)?;
        let loc = dofs.cell_velocity(c);
        for (x, q) in cell_points(mesh, c, integ, &sing) {
            let gu = exact.velocity_gradient(x);
            let p = exact.pressure(x);
            if !(p.is_finite() && gu.iter().flatten().all(|v| v.is_finite())) {
                return Err(Error::QuadratureDivergence(format!("exact data not finite at ({}, {})", x[0], x[1])));
            }
            let b = velocity_basis(dofs.pair(), &geo, geo.barycentric(x));
            for (a, &s) in loc.iter().enumerate() {
                let g = b.grads[a];
                for comp in 0..2 {
                    load[dofs.velocity_dof(comp, s)] += q * (gu[comp][0] * g[0] + gu[comp][1] * g[1] - p * g[comp]);
                }
            }
        }
    }
    Ok(load)
}

/// `-int q_k div u` for every pressure basis function of an exact velocity.
pub fn rhs_divergence(mesh: &Mesh, exact: &dyn StokesData, integ: &Integrator) -> Result<Vec<f64>> {
    let sing: Vec<Singularity> = exact.singular_points().into_iter().map(Singularity::Point).collect();
    let mut g = vec![0.0; mesh.n_vertices()];
    for c in 0..mesh.n_cells() {
        let geo = CellGeometry::of_cell(mesh, c)?;
        let cell = mesh.cells()[c];
        for (x, q) in cell_points(mesh, c, integ, &sing) {
            let gu = exact.velocity_gradient(x);
            let div = gu[0][0] + gu[1][1];
            if !div.is_finite() {
                return Err(Error::QuadratureDivergence(format!("exact data not finite at ({}, {})", x[0], x[1])));
            }
            let l = geo.barycentric(x);
            for (k, &v) in cell.iter().enumerate() {
                g[v] -= q * l[k] * div;
            }
        }
    }
    Ok(g)
}

/// Quadrature degree for products involving the regularized delta.
const DELTA_DEGREE: usize = 12;

/// `b_T^2 q` supported on the cell containing `z`, with `q` from the local
/// moment space so that `int delta r = r(z)` for every `r` in that space.
///
/// The moment space is the local velocity space, enlarged for Mini by the
/// first derivatives of the bubble so derivative loads are exact too.
#[derive(Clone, Debug)]
pub struct RegularizedDelta {
    pair: ElementPair,
    z: Point,
    cell: usize,
    geo: CellGeometry,
    h_cell: f64,
    coeffs: [f64; 6],
}

fn moment_basis(pair: ElementPair, geo: &CellGeometry, l: [f64; 3]) -> [f64; 6] {
    let b = velocity_basis(pair, geo, l);
    match pair {
        ElementPair::TaylorHood => b.values,
        ElementPair::Mini => {
            // derivatives of 27 l0 l1 l2, written with barycentrics
            let g = &geo.grad_lambda;
            let dx = 27.0 * (l[1] * l[2] * g[0][0] + l[0] * l[2] * g[1][0] + l[0] * l[1] * g[2][0]);
            let dy = 27.0 * (l[1] * l[2] * g[0][1] + l[0] * l[2] * g[1][1] + l[0] * l[1] * g[2][1]);
            [b.values[0], b.values[1], b.values[2], b.values[3], dx, dy]
        }
    }
}

impl RegularizedDelta {
    pub fn new(mesh: &Mesh, pair: ElementPair, z: Point) -> Result<Self> {
        let cell = mesh.locate_point(z)?;
        let geo = CellGeometry::of_cell(mesh, cell)?;
        let rule = Quadrature::gauss(DELTA_DEGREE);
        let scale = 2.0 * geo.area;
        let mut gram = Mat::<f64>::zeros(6, 6);
        for (l, w) in rule.points().iter().zip(rule.weights()) {
            let psi = moment_basis(pair, &geo, *l);
            let bb = (27.0 * l[0] * l[1] * l[2]).powi(2);
            for i in 0..6 {
                for j in 0..6 {
                    gram[(i, j)] += w * scale * bb * psi[i] * psi[j];
                }
            }
        }
        let target = moment_basis(pair, &geo, geo.barycentric(z));
        let llt = gram
            .llt(Side::Lower)
            .map_err(|e| Error::Factorization(format!("moment gram matrix: {e:?}")))?;
        let rhs = Mat::<f64>::from_fn(6, 1, |i, _| target[i]);
        let sol = llt.solve(&rhs);
        let mut coeffs = [0.0; 6];
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c = sol[(i, 0)];
        }
        Ok(RegularizedDelta { pair, z, cell, geo, h_cell: mesh.cell_diameter(cell), coeffs })
    }

    pub fn z(&self) -> Point {
        self.z
    }

    /// Index of the supporting cell in the mesh it was built on.
    pub fn cell(&self) -> usize {
        self.cell
    }

    pub fn support(&self) -> [Point; 3] {
        self.geo.points
    }

    pub fn h_cell(&self) -> f64 {
        self.h_cell
    }

    fn value_bary(&self, l: [f64; 3]) -> f64 {
        let psi = moment_basis(self.pair, &self.geo, l);
        let q: f64 = psi.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum();
        (27.0 * l[0] * l[1] * l[2]).powi(2) * q
    }

    pub fn contains(&self, x: Point) -> bool {
        self.geo.barycentric(x).iter().all(|&v| v >= -1e-12)
    }

    pub fn value(&self, x: Point) -> f64 {
        let l = self.geo.barycentric(x);
        if l.iter().any(|&v| v < 0.0) {
            0.0
        } else {
            self.value_bary(l)
        }
    }

    /// `int delta f` over the support.
    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        let rule = Quadrature::gauss(DELTA_DEGREE);
        let scale = 2.0 * self.geo.area;
        rule.points()
            .iter()
            .zip(rule.weights())
            .map(|(l, w)| w * scale * self.value_bary(*l) * f(self.geo.to_physical(*l)))
            .sum()
    }

    /// Sup norm sampled on a barycentric lattice with `n` subdivisions.
    pub fn max_abs(&self, n: usize) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..=n {
            for j in 0..=(n - i) {
                let l = [i as f64 / n as f64, j as f64 / n as f64, (n - i - j) as f64 / n as f64];
                m = m.max(self.value_bary(l).abs());
            }
        }
        m
    }
}

/// `int delta d_i phi^j` on every cell of `mesh` inside the delta support
/// (`mesh` may be the support mesh or any nested refinement of it).
pub fn rhs_green(mesh: &Mesh, dofs: &DofMap, delta: &RegularizedDelta, i: usize, j: usize) -> Result<Vec<f64>> {
    if i > 1 || j > 1 {
        return Err(Error::InvalidArgument(format!("derivative indices must be 0 or 1, got ({i}, {j})")));
    }
    let rule = Quadrature::gauss(DELTA_DEGREE);
    let mut load = vec![0.0; dofs.n_velocity()];
    for c in 0..mesh.n_cells() {
        if !delta.contains(mesh.cell_centroid(c)) {
            continue;
        }
        let geo = CellGeometry::of_cell(mesh, c)?;
        let scale = 2.0 * geo.area;
        let loc = dofs.cell_velocity(c);
        for (l, w) in rule.points().iter().zip(rule.weights()) {
            let x = geo.to_physical(*l);
            let d = delta.value_bary(delta.geo.barycentric(x));
            let b = velocity_basis(dofs.pair(), &geo, *l);
            for (a, &s) in loc.iter().enumerate() {
                load[dofs.velocity_dof(j, s)] += w * scale * d * b.grads[a][i];
            }
        }
    }
    Ok(load)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{barycentric_monomial_integral, velocity_at};
    use crate::mesh::{Pattern, Rect};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mesh(p: Pattern, n: usize) -> Mesh {
        Mesh::structured(p, n, Rect::unit()).unwrap()
    }

    #[test]
    fn blocks_are_consistent() {
        for pair in [ElementPair::Mini, ElementPair::TaylorHood] {
            let m = mesh(Pattern::CrissCross, 3);
            let sys = assemble(&m, pair, Some(&WeightSpec::constant(1.0))).unwrap();
            assert!(sys.a.max_asymmetry() <= 1e-12);
            let w = sys.weighted.as_ref().unwrap();
            assert!(w.a_w.max_abs_diff(&sys.a) <= 1e-12);
            assert!(w.m_w.max_abs_diff(&sys.m) <= 1e-12);
            let ones = vec![1.0; sys.n_pressure()];
            let bt1 = sys.b.matvec_t(&ones);
            assert!(bt1.iter().all(|v| v.abs() <= 1e-12));
            let total: f64 = sys.mean.iter().sum();
            assert!((total - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn doubling_quadrature_leaves_blocks_unchanged() {
        let m = mesh(Pattern::RightDiagonal, 3);
        for pair in [ElementPair::Mini, ElementPair::TaylorHood] {
            let lo = assemble_with(&m, pair, None, &Integrator::new(Quadrature::degree6(), 0)).unwrap();
            let hi = assemble_with(&m, pair, None, &Integrator::new(Quadrature::gauss(12), 0)).unwrap();
            assert!(lo.a.max_abs_diff(&hi.a) < 1e-12);
            assert!(lo.b.max_abs_diff(&hi.b) < 1e-12);
        }
    }

    #[test]
    fn constant_load_matches_basis_integrals() {
        let m = mesh(Pattern::RightDiagonal, 2);
        let rule = Quadrature::degree6();
        for pair in [ElementPair::Mini, ElementPair::TaylorHood] {
            let dofs = DofMap::new(&m, pair);
            let load = rhs_regular(&m, &dofs, &rule, |_| [2.0, -1.0]).unwrap();
            let mut expect = vec![0.0; dofs.n_velocity()];
            for c in 0..m.n_cells() {
                let area = m.cell_area(c);
                // P1: |T|/3; P2 vertex: 0; P2 midpoint: |T|/3; bubble: 27 |T|/60
                let ints: Vec<f64> = match pair {
                    ElementPair::Mini => vec![
                        barycentric_monomial_integral(area, 1, 0, 0);
                        3
                    ]
                    .into_iter()
                    .chain([27.0 * barycentric_monomial_integral(area, 1, 1, 1)])
                    .collect(),
                    ElementPair::TaylorHood => {
                        let v = 2.0 * barycentric_monomial_integral(area, 2, 0, 0) - barycentric_monomial_integral(area, 1, 0, 0);
                        let e = 4.0 * barycentric_monomial_integral(area, 1, 1, 0);
                        vec![v, v, v, e, e, e]
                    }
                };
                for (a, &s) in dofs.cell_velocity(c).iter().enumerate() {
                    expect[dofs.velocity_dof(0, s)] += 2.0 * ints[a];
                    expect[dofs.velocity_dof(1, s)] -= ints[a];
                }
            }
            for (x, y) in load.iter().zip(&expect) {
                assert!((x - y).abs() < 1e-14);
            }
            let zero = rhs_regular(&m, &dofs, &rule, |_| [0.0, 0.0]).unwrap();
            assert!(zero.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn dirac_load_examples() {
        let m = mesh(Pattern::CrissCross, 2);
        let th = DofMap::new(&m, ElementPair::TaylorHood);
        let z = m.vertex(4);
        let load = rhs_dirac(&m, &th, &[(z, [1.0, 0.0])]).unwrap();
        for (g, v) in load.iter().enumerate() {
            let expect = if g == th.velocity_dof(0, 4) { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-14);
        }
        let mini = DofMap::new(&m, ElementPair::Mini);
        let c = 5;
        let load = rhs_dirac(&m, &mini, &[(m.cell_centroid(c), [0.0, 2.0])]).unwrap();
        assert!((load[mini.velocity_dof(1, m.n_vertices() + c)] - 2.0).abs() < 1e-14);
        assert!(rhs_dirac(&m, &mini, &[([1.5, 0.5], [1.0, 0.0])]).is_err());
        assert!(rhs_dirac(&m, &mini, &[([1.0, 0.5], [1.0, 0.0])]).is_err());
    }

    fn random_field(dofs: &DofMap, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut v: Vec<f64> = (0..dofs.n_velocity()).map(|_| rng.random_range(-1.0..1.0)).collect();
        for (g, x) in v.iter_mut().enumerate() {
            if dofs.free_index(g).is_none() {
                *x = 0.0;
            }
        }
        v
    }

    #[test]
    fn regularized_delta_moments() {
        let m = mesh(Pattern::CrissCross, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for pair in [ElementPair::Mini, ElementPair::TaylorHood] {
            let dofs = DofMap::new(&m, pair);
            let z = [0.43, 0.61];
            let d = RegularizedDelta::new(&m, pair, z).unwrap();
            assert!((d.integrate(|_| 1.0) - 1.0).abs() < 1e-11);
            let geo = CellGeometry::of_cell(&m, d.cell()).unwrap();
            for _ in 0..20 {
                let v = random_field(&dofs, &mut rng);
                for comp in 0..2 {
                    let lhs = d.integrate(|x| velocity_at(&dofs, &v, d.cell(), &geo, geo.barycentric(x)).0[comp]);
                    let rhs = velocity_at(&dofs, &v, d.cell(), &geo, geo.barycentric(z)).0[comp];
                    assert!((lhs - rhs).abs() < 1e-10);
                }
            }
            assert_eq!(d.value([0.9, 0.1]), 0.0);
        }
    }

    #[test]
    fn green_load_gives_derivative_at_z() {
        let m = mesh(Pattern::CrissCross, 4);
        let fine = mesh(Pattern::CrissCross, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for pair in [ElementPair::Mini, ElementPair::TaylorHood] {
            let z = [0.43, 0.61];
            let d = RegularizedDelta::new(&m, pair, z).unwrap();
            let dofs = DofMap::new(&m, pair);
            let geo = CellGeometry::of_cell(&m, d.cell()).unwrap();
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let load = rhs_green(&m, &dofs, &d, i, j).unwrap();
                for (g, v) in load.iter().enumerate() {
                    if g / dofs.n_scalar() != j {
                        assert_eq!(*v, 0.0);
                    }
                }
                let v = random_field(&dofs, &mut rng);
                let lhs: f64 = load.iter().zip(&v).map(|(a, b)| a * b).sum();
                let grad = velocity_at(&dofs, &v, d.cell(), &geo, geo.barycentric(z)).1;
                assert!((lhs - grad[j][i]).abs() < 1e-9, "{pair} ({i},{j})");
            }
            // the same load on a nested mesh reproduces the derivative of a
            // fine field that is linear on the support
            let fdofs = DofMap::new(&fine, pair);
            let load = rhs_green(&fine, &fdofs, &d, 1, 0).unwrap();
            let mut coeffs = vec![0.0; fdofs.n_velocity()];
            let lin = |x: Point| 2.0 * x[0] - 3.0 * x[1];
            for v in 0..fine.n_vertices() {
                coeffs[fdofs.velocity_dof(0, v)] = lin(fine.vertex(v));
            }
            if pair == ElementPair::TaylorHood {
                for (e, [a, b]) in fine.edges().iter().enumerate() {
                    let (pa, pb) = (fine.vertex(*a), fine.vertex(*b));
                    coeffs[fdofs.velocity_dof(0, fine.n_vertices() + e)] = lin([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                }
            }
            let lhs: f64 = load.iter().zip(&coeffs).map(|(a, b)| a * b).sum();
            assert!((lhs + 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_load_examples() {
        let m = mesh(Pattern::CrissCross, 2);
        let dofs = DofMap::new(&m, ElementPair::TaylorHood);
        struct Pressure1;
        impl StokesData for Pressure1 {
            fn velocity(&self, _: Point) -> [f64; 2] {
                [0.0; 2]
            }
            fn velocity_gradient(&self, _: Point) -> [[f64; 2]; 2] {
                [[0.0; 2]; 2]
            }
            fn pressure(&self, _: Point) -> f64 {
                1.0
            }
        }
        let load = rhs_projection(&m, &dofs, &Pressure1, &Integrator::default()).unwrap();
        for g in dofs.free_to_global() {
            assert!(load[*g].abs() < 1e-13);
        }
    }

    #[test]
    fn weighted_blocks_are_monotone() {
        let m = mesh(Pattern::CrissCross, 2);
        let w1 = WeightSpec::dist_point([0.5, 0.5], 1.0);
        let w2 = WeightSpec::constant(2.0); // dist <= sqrt(2)/2 < 2 on the square
        let dofs = DofMap::new(&m, ElementPair::Mini);
        let integ = Integrator::default();
        let a1 = stiffness(&m, &dofs, Some(&w1), &integ).unwrap();
        let a2 = stiffness(&m, &dofs, Some(&w2), &integ).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let v: Vec<f64> = (0..dofs.n_velocity()).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(a1.bilinear(&v, &v) <= a2.bilinear(&v, &v));
        }
    }

    #[test]
    fn divergence_load_matches_matrix() {
        let mesh = Mesh::structured(Pattern::CrissCross, 3, Rect::unit()).unwrap();
        let integ = Integrator::default();
        let smooth = crate::analysis::exact::ExactSolution::SmoothCurl;
        assert!(rhs_divergence(&mesh, &smooth, &integ).unwrap().iter().all(|g| g.abs() < 1e-14));
        for pair in [ElementPair::Mini, ElementPair::TaylorHood] {
            let dofs = DofMap::new(&mesh, pair);
            let u: Vec<f64> = (0..dofs.n_velocity()).map(|i| if dofs.boundary_mask()[i % dofs.n_scalar()] { 0.0 } else { (i as f64).cos() }).collect();
            let field = crate::analysis::norms::DiscreteField::velocity(&mesh, &dofs, u.clone());
            let data = crate::analysis::norms::DiscretePair {
                velocity: field.clone(),
                pressure: crate::analysis::norms::DiscreteField::pressure(&mesh, &dofs, vec![0.0; dofs.n_pressure()]),
            };
            let g = rhs_divergence(&mesh, &data, &integ).unwrap();
            let bu = divergence(&mesh, &dofs, &Quadrature::degree6()).unwrap().matvec(&u);
            for (a, b) in g.iter().zip(&bu) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }
}
