//! Mini and Taylor–Hood spaces: reference bases and global dof numbering.
//!
//! Scalar velocity dofs are numbered vertices first, then bubbles (Mini,
//! one per cell) or edge midpoints (Taylor–Hood, one per edge). A vector
//! velocity dof is `component * n_scalar + scalar`. Pressure dofs are the
//! mesh vertices.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::quadrature::triangle_area;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElementPair {
    Mini,
    TaylorHood,
}

impl ElementPair {
    /// Local scalar velocity basis size.
    pub fn local_velocity(&self) -> usize {
        match self {
            ElementPair::Mini => 4,
            ElementPair::TaylorHood => 6,
        }
    }

    /// Polynomial degree of the velocity basis.
    pub fn velocity_degree(&self) -> usize {
        match self {
            ElementPair::Mini => 3,
            ElementPair::TaylorHood => 2,
        }
    }
}

impl FromStr for ElementPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mini" => Ok(ElementPair::Mini),
            "th" | "taylor-hood" | "taylorhood" | "taylor_hood" => Ok(ElementPair::TaylorHood),
            other => Err(Error::InvalidArgument(format!("unknown element pair `{other}` (mini|th)"))),
        }
    }
}

impl fmt::Display for ElementPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementPair::Mini => "mini",
            ElementPair::TaylorHood => "th",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Velocity,
    Pressure,
}

/// Affine cell data: vertices, area and the constant barycentric gradients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellGeometry {
    pub points: [Point; 3],
    pub area: f64,
    pub grad_lambda: [[f64; 2]; 3],
}

impl CellGeometry {
    pub fn new(points: [Point; 3]) -> Result<Self> {
        let [p0, p1, p2] = points;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let scale = [p0, p1, p2]
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1.0);
        if !(det > 1e-14 * scale * scale) {
            return Err(Error::DegenerateCell(usize::MAX));
        }
        let grad_lambda = [
            [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
            [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
            [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
        ];
        Ok(CellGeometry { points, area: 0.5 * det, grad_lambda })
    }

    pub fn of_cell(mesh: &Mesh, cell: usize) -> Result<Self> {
        CellGeometry::new(mesh.cell_points(cell)).map_err(|_| Error::DegenerateCell(cell))
    }

    pub fn to_physical(&self, l: [f64; 3]) -> Point {
        let [p0, p1, p2] = self.points;
        [
            l[0] * p0[0] + l[1] * p1[0] + l[2] * p2[0],
            l[0] * p0[1] + l[1] * p1[1] + l[2] * p2[1],
        ]
    }

    pub fn barycentric(&self, x: Point) -> [f64; 3] {
        let p0 = self.points[0];
        let d = [x[0] - p0[0], x[1] - p0[1]];
        let l1 = self.grad_lambda[1][0] * d[0] + self.grad_lambda[1][1] * d[1];
        let l2 = self.grad_lambda[2][0] * d[0] + self.grad_lambda[2][1] * d[1];
        [1.0 - l1 - l2, l1, l2]
    }
}

/// Values and physical gradients of a local basis at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LocalBasis {
    pub n: usize,
    pub values: [f64; 6],
    pub grads: [[f64; 2]; 6],
}

fn add_scaled(acc: &mut [f64; 2], s: f64, g: [f64; 2]) {
    acc[0] += s * g[0];
    acc[1] += s * g[1];
}

/// Continuous P1 basis.
pub fn p1_basis(geo: &CellGeometry, l: [f64; 3]) -> LocalBasis {
    let mut b = LocalBasis { n: 3, ..Default::default() };
    for i in 0..3 {
        b.values[i] = l[i];
        b.grads[i] = geo.grad_lambda[i];
    }
    b
}

/// `27 l0 l1 l2`, equal to 1 at the barycenter.
pub fn bubble(geo: &CellGeometry, l: [f64; 3]) -> (f64, [f64; 2]) {
    let g = &geo.grad_lambda;
    let mut grad = [0.0; 2];
    add_scaled(&mut grad, 27.0 * l[1] * l[2], g[0]);
    add_scaled(&mut grad, 27.0 * l[0] * l[2], g[1]);
    add_scaled(&mut grad, 27.0 * l[0] * l[1], g[2]);
    (27.0 * l[0] * l[1] * l[2], grad)
}

/// Scalar velocity basis in local order: vertices, then bubble (Mini) or the
/// midpoints of the edges opposite each vertex (Taylor–Hood).
pub fn velocity_basis(pair: ElementPair, geo: &CellGeometry, l: [f64; 3]) -> LocalBasis {
    let g = &geo.grad_lambda;
    match pair {
        ElementPair::Mini => {
            let mut b = p1_basis(geo, l);
            let (v, gb) = bubble(geo, l);
            b.n = 4;
            b.values[3] = v;
            b.grads[3] = gb;
            b
        }
        ElementPair::TaylorHood => {
            let mut b = LocalBasis { n: 6, ..Default::default() };
            for i in 0..3 {
                b.values[i] = l[i] * (2.0 * l[i] - 1.0);
                b.grads[i] = [(4.0 * l[i] - 1.0) * g[i][0], (4.0 * l[i] - 1.0) * g[i][1]];
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                b.values[3 + i] = 4.0 * l[j] * l[k];
                let mut gm = [0.0; 2];
                add_scaled(&mut gm, 4.0 * l[k], g[j]);
                add_scaled(&mut gm, 4.0 * l[j], g[k]);
                b.grads[3 + i] = gm;
            }
            b
        }
    }
}

/// Basis values and gradients on a mesh cell.
pub fn eval_basis(pair: ElementPair, component: Component, mesh: &Mesh, cell: usize, l: [f64; 3]) -> Result<LocalBasis> {
    if cell >= mesh.n_cells() {
        return Err(Error::CellOutOfRange { index: cell, count: mesh.n_cells() });
    }
    let tol = 1e-12;
    if l.iter().any(|&v| v < -tol) || (l.iter().sum::<f64>() - 1.0).abs() > tol {
        return Err(Error::InvalidArgument(format!("invalid barycentric coordinates {l:?}")));
    }
    let geo = CellGeometry::of_cell(mesh, cell)?;
    Ok(match component {
        Component::Velocity => velocity_basis(pair, &geo, l),
        Component::Pressure => p1_basis(&geo, l),
    })
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `int_T l0^a l1^b l2^c = 2|T| a! b! c! / (a+b+c+2)!`
pub fn barycentric_monomial_integral(area: f64, a: u32, b: u32, c: u32) -> f64 {
    2.0 * area * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2)
}

/// Integral of the bubble over a cell, unnormalized `l0 l1 l2` or scaled
/// by 27.
pub fn bubble_cell_integral(cell: [Point; 3], normalized: bool) -> f64 {
    let raw = barycentric_monomial_integral(triangle_area(cell), 1, 1, 1);
    if normalized {
        27.0 * raw
    } else {
        raw
    }
}

/// Global numbering for a pair on a mesh.
#[derive(Clone, Debug)]
pub struct DofMap {
    pair: ElementPair,
    n_scalar: usize,
    n_pressure: usize,
    local: usize,
    cell_dofs: Vec<usize>,
    boundary: Vec<bool>,
    free: Vec<Option<usize>>,
    free_to_global: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, pair: ElementPair) -> Self {
        let nv = mesh.n_vertices();
        let local = pair.local_velocity();
        let n_scalar = match pair {
            ElementPair::Mini => nv + mesh.n_cells(),
            ElementPair::TaylorHood => nv + mesh.n_edges(),
        };
        let mut cell_dofs = Vec::with_capacity(local * mesh.n_cells());
        for (c, cell) in mesh.cells().iter().enumerate() {
            cell_dofs.extend_from_slice(cell);
            match pair {
                ElementPair::Mini => cell_dofs.push(nv + c),
                ElementPair::TaylorHood => cell_dofs.extend(mesh.cell_edges(c).iter().map(|e| nv + e)),
            }
        }
        let mut boundary = vec![false; n_scalar];
        for (v, b) in boundary.iter_mut().enumerate().take(nv) {
            *b = mesh.vertex_on_boundary(v);
        }
        if pair == ElementPair::TaylorHood {
            for e in 0..mesh.n_edges() {
                boundary[nv + e] = mesh.edge_on_boundary(e);
            }
        }
        let mut free = vec![None; 2 * n_scalar];
        let mut free_to_global = Vec::new();
        for (g, slot) in free.iter_mut().enumerate() {
            if !boundary[g % n_scalar] {
                *slot = Some(free_to_global.len());
                free_to_global.push(g);
            }
        }
        DofMap { pair, n_scalar, n_pressure: nv, local, cell_dofs, boundary, free, free_to_global }
    }

    pub fn pair(&self) -> ElementPair {
        self.pair
    }

    pub fn n_scalar(&self) -> usize {
        self.n_scalar
    }

    /// Total velocity dofs, boundary included.
    pub fn n_velocity(&self) -> usize {
        2 * self.n_scalar
    }

    pub fn n_pressure(&self) -> usize {
        self.n_pressure
    }

    pub fn n_free(&self) -> usize {
        self.free_to_global.len()
    }

    /// Scalar velocity dofs of a cell in local basis order.
    pub fn cell_velocity(&self, cell: usize) -> &[usize] {
        &self.cell_dofs[cell * self.local..(cell + 1) * self.local]
    }

    pub fn velocity_dof(&self, component: usize, scalar: usize) -> usize {
        component * self.n_scalar + scalar
    }

    pub fn scalar_on_boundary(&self, scalar: usize) -> bool {
        self.boundary[scalar]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn free_index(&self, global: usize) -> Option<usize> {
        self.free[global]
    }

    pub fn free_to_global(&self) -> &[usize] {
        &self.free_to_global
    }

    /// Restricts a full velocity vector to the free dofs.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free_to_global.iter().map(|&g| full[g]).collect()
    }

    /// Expands free values to a full velocity vector with zero boundary.
    pub fn extend(&self, free: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_velocity()];
        for (&g, &v) in self.free_to_global.iter().zip(free) {
            full[g] = v;
        }
        full
    }

    /// Lifts per-vertex P1 values of both components into the velocity
    /// space (bubbles zero, midpoints averaged).
    pub fn lift_p1(&self, mesh: &Mesh, comps: [&[f64]; 2]) -> Vec<f64> {
        let nv = mesh.n_vertices();
        let mut out = vec![0.0; self.n_velocity()];
        for (c, vals) in comps.iter().enumerate() {
            out[c * self.n_scalar..c * self.n_scalar + nv].copy_from_slice(&vals[..nv]);
            if self.pair == ElementPair::TaylorHood {
                for (e, [a, b]) in mesh.edges().iter().enumerate() {
                    out[c * self.n_scalar + nv + e] = 0.5 * (vals[*a] + vals[*b]);
                }
            }
        }
        out
    }
}

/// Velocity value and gradient (`grad[component] = [d/dx, d/dy]`) of a
/// coefficient vector on one cell.
pub fn velocity_at(dofs: &DofMap, coeffs: &[f64], cell: usize, geo: &CellGeometry, l: [f64; 3]) -> ([f64; 2], [[f64; 2]; 2]) {
    let b = velocity_basis(dofs.pair(), geo, l);
    let mut v = [0.0; 2];
    let mut g = [[0.0; 2]; 2];
    for (a, &s) in dofs.cell_velocity(cell).iter().enumerate() {
        for c in 0..2 {
            let u = coeffs[dofs.velocity_dof(c, s)];
            v[c] += u * b.values[a];
            g[c][0] += u * b.grads[a][0];
            g[c][1] += u * b.grads[a][1];
        }
    }
    (v, g)
}

/// Pressure value and gradient on one cell.
pub fn pressure_at(mesh: &Mesh, coeffs: &[f64], cell: usize, geo: &CellGeometry, l: [f64; 3]) -> (f64, [f64; 2]) {
    let mut v = 0.0;
    let mut g = [0.0; 2];
    for (i, &k) in mesh.cells()[cell].iter().enumerate() {
        v += coeffs[k] * l[i];
        add_scaled(&mut g, coeffs[k], geo.grad_lambda[i]);
    }
    (v, g)
}
