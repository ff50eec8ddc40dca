//! Conforming triangulations of axis-aligned rectangles.
//!
//! Structured meshes carry an integer lattice alongside the floating point
//! coordinates: every vertex is `origin + (i, j) / den * (width, height)` with
//! integer `i, j`. Conformity checks run on the lattice so they are exact.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Relative tolerance used when deciding whether a point lies in a closed cell.
const LOCATE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let ok = [x0, y0, x1, y1].iter().all(|v| v.is_finite()) && x1 > x0 && y1 > y0;
        if !ok {
            return Err(Error::InvalidMeshParameter(format!(
                "degenerate rectangle [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(Rect { x0, y0, x1, y1 })
    }

    pub fn unit() -> Self {
        Rect { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point {
        [0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1)]
    }

    /// Closed containment with a tolerance relative to the rectangle size.
    pub fn contains(&self, x: Point) -> bool {
        let tol = LOCATE_TOL * self.diameter();
        x[0] >= self.x0 - tol && x[0] <= self.x1 + tol && x[1] >= self.y0 - tol && x[1] <= self.y1 + tol
    }

    /// Distance from an interior point to the boundary; negative outside.
    pub fn dist_to_boundary(&self, x: Point) -> f64 {
        (x[0] - self.x0).min(self.x1 - x[0]).min(x[1] - self.y0).min(self.y1 - x[1])
    }

    /// Largest ball radius that fits in the rectangle.
    pub fn inradius(&self) -> f64 {
        0.5 * self.width().min(self.height())
    }
}

/// Triangulation pattern of the structured grid squares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    /// Each square split by the diagonal from its lower-left to its upper-right corner.
    RightDiagonal,
    /// Each square split by both diagonals; the square center becomes a vertex.
    CrissCross,
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "right" | "right-diagonal" => Ok(Pattern::RightDiagonal),
            "criss-cross" | "crisscross" => Ok(Pattern::CrissCross),
            other => Err(Error::InvalidArgument(format!("unknown mesh pattern `{other}`"))),
        }
    }
}

impl std::fmt::Display for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Pattern::RightDiagonal => "right",
            Pattern::CrissCross => "criss-cross",
        })
    }
}

/// Exact integer coordinates of the vertices of a structured mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub coords: Vec<[i64; 2]>,
    pub den: i64,
}

/// The cells touching a given cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Star {
    pub center_cell: usize,
    pub members: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeMetrics {
    /// max h_T / min h_T
    pub size_ratio: f64,
    /// max h_T / min inradius
    pub aspect_ratio: f64,
}

/// Uniform bucket grid over the domain used by [`Mesh::locate_point`].
#[derive(Clone, Debug)]
struct Locator {
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

/// A conforming triangulation of a rectangle.
#[derive(Clone, Debug)]
pub struct Mesh {
    domain: Rect,
    vertices: Vec<Point>,
    lattice: Option<Lattice>,
    cells: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_boundary: Vec<bool>,
    edge_cells: Vec<[Option<usize>; 2]>,
    /// Edge opposite to each local vertex.
    cell_edges: Vec<[usize; 3]>,
    vertex_cells: Vec<Vec<usize>>,
    vertex_boundary: Vec<bool>,
    cell_diameters: Vec<f64>,
    h: f64,
    locator: Locator,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn orient_i(a: [i64; 2], b: [i64; 2], c: [i64; 2]) -> i128 {
    (b[0] - a[0]) as i128 * (c[1] - a[1]) as i128 - (b[1] - a[1]) as i128 * (c[0] - a[0]) as i128
}

impl Mesh {
    /// Builds a mesh from raw parts, computing the topology and validating
    /// orientation.
    pub fn from_parts(
        domain: Rect,
        vertices: Vec<Point>,
        lattice: Option<Lattice>,
        cells: Vec<[usize; 3]>,
    ) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidMeshParameter("mesh has no cells".into()));
        }
        for (c, tri) in cells.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMeshParameter(format!(
                    "cell {c} references a vertex out of range"
                )));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > 0.0) {
                return Err(Error::DegenerateCell(c));
            }
        }

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_cells: Vec<[Option<usize>; 2]> = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, tri) in cells.iter().enumerate() {
            let mut local = [0usize; 3];
            for (i, slot) in local.iter_mut().enumerate() {
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                let key = (a.min(b), a.max(b));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_cells.push([None, None]);
                    edges.len() - 1
                });
                match edge_cells[e] {
                    [None, _] => edge_cells[e][0] = Some(c),
                    [Some(_), None] => edge_cells[e][1] = Some(c),
                    _ => {
                        return Err(Error::InvalidMeshParameter(format!(
                            "edge {key:?} shared by more than two cells"
                        )))
                    }
                }
                *slot = e;
            }
            cell_edges.push(local);
        }
        let edge_boundary: Vec<bool> = edge_cells.iter().map(|ec| ec[1].is_none()).collect();

        let mut vertex_cells = vec![Vec::new(); vertices.len()];
        for (c, tri) in cells.iter().enumerate() {
            for &v in tri {
                vertex_cells[v].push(c);
            }
        }
        let mut vertex_boundary = vec![false; vertices.len()];
        for (e, ab) in edges.iter().enumerate() {
            if edge_boundary[e] {
                vertex_boundary[ab[0]] = true;
                vertex_boundary[ab[1]] = true;
            }
        }

        let cell_diameters: Vec<f64> = cells
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|v| vertices[v]);
                dist(a, b).max(dist(b, c)).max(dist(c, a))
            })
            .collect();
        let h = cell_diameters.iter().cloned().fold(0.0, f64::max);

        let locator = Locator::build(&domain, &vertices, &cells, h);
        Ok(Mesh {
            domain,
            vertices,
            lattice,
            cells,
            edges,
            edge_boundary,
            edge_cells,
            cell_edges,
            vertex_cells,
            vertex_boundary,
            cell_diameters,
            h,
            locator,
        })
    }

    /// Structured triangulation of `domain` with `n` squares per side.
    pub fn structured(pattern: Pattern, n: usize, domain: Rect) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMeshParameter("n must be at least 1".into()));
        }
        let domain = Rect::new(domain.x0, domain.y0, domain.x1, domain.y1)?;
        let grid = |i: usize, j: usize| j * (n + 1) + i;
        let (den, scale) = match pattern {
            Pattern::RightDiagonal => (n as i64, 1i64),
            Pattern::CrissCross => (2 * n as i64, 2i64),
        };
        let mut coords = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                coords.push([i as i64 * scale, j as i64 * scale]);
            }
        }
        let mut cells = Vec::new();
        match pattern {
            Pattern::RightDiagonal => {
                for j in 0..n {
                    for i in 0..n {
                        let (v00, v10, v11, v01) = (grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1));
                        cells.push([v00, v10, v11]);
                        cells.push([v00, v11, v01]);
                    }
                }
            }
            Pattern::CrissCross => {
                for j in 0..n {
                    for i in 0..n {
                        coords.push([2 * i as i64 + 1, 2 * j as i64 + 1]);
                    }
                }
                let base = (n + 1) * (n + 1);
                for j in 0..n {
                    for i in 0..n {
                        let (v00, v10, v11, v01) = (grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1));
                        let c = base + j * n + i;
                        cells.push([v00, v10, c]);
                        cells.push([v10, v11, c]);
                        cells.push([v11, v01, c]);
                        cells.push([v01, v00, c]);
                    }
                }
            }
        }
        let lattice = Lattice { coords, den };
        let vertices = lattice_points(&domain, &lattice);
        Mesh::from_parts(domain, vertices, Some(lattice), cells)
    }

    /// Red refinement: every cell is split into four congruent children.
    ///
    /// Children of cell `c` are `4c..4c+4`, ordered as the three corner
    /// children (at local vertices 0, 1, 2) followed by the middle child.
    /// Existing vertices keep their indices; edge midpoints follow in edge order.
    pub fn refine_uniform(&self) -> Result<Mesh> {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        for &[a, b] in &self.edges {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        }
        let lattice = self.lattice.as_ref().map(|lat| {
            let mut coords: Vec<[i64; 2]> = lat.coords.iter().map(|c| [2 * c[0], 2 * c[1]]).collect();
            for &[a, b] in &self.edges {
                coords.push([lat.coords[a][0] + lat.coords[b][0], lat.coords[a][1] + lat.coords[b][1]]);
            }
            Lattice { coords, den: 2 * lat.den }
        });
        if let Some(lat) = &lattice {
            vertices = lattice_points(&self.domain, lat);
        }
        let mut cells = Vec::with_capacity(4 * self.cells.len());
        for (c, &[v0, v1, v2]) in self.cells.iter().enumerate() {
            let [e0, e1, e2] = self.cell_edges[c];
            let (m0, m1, m2) = (nv + e0, nv + e1, nv + e2);
            cells.push([v0, m2, m1]);
            cells.push([m2, v1, m0]);
            cells.push([m1, m0, v2]);
            cells.push([m0, m1, m2]);
        }
        Mesh::from_parts(self.domain, vertices, lattice, cells)
    }

    pub fn domain(&self) -> &Rect {
        &self.domain
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_on_boundary(&self, e: usize) -> bool {
        self.edge_boundary[e]
    }

    /// Cells incident to edge `e`; the second entry is `None` on the boundary.
    pub fn edge_cells(&self, e: usize) -> [Option<usize>; 2] {
        self.edge_cells[e]
    }

    /// Edges of a cell, indexed by the opposite local vertex.
    pub fn cell_edges(&self, c: usize) -> [usize; 3] {
        self.cell_edges[c]
    }

    pub fn vertex_cells(&self, v: usize) -> &[usize] {
        &self.vertex_cells[v]
    }

    pub fn vertex_on_boundary(&self, v: usize) -> bool {
        self.vertex_boundary[v]
    }

    pub fn cell_points(&self, c: usize) -> [Point; 3] {
        self.cells[c].map(|v| self.vertices[v])
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        let [a, b, p] = self.cell_points(c);
        signed_area(a, b, p)
    }

    pub fn cell_centroid(&self, c: usize) -> Point {
        let [a, b, p] = self.cell_points(c);
        [(a[0] + b[0] + p[0]) / 3.0, (a[1] + b[1] + p[1]) / 3.0]
    }

    pub fn cell_diameter(&self, c: usize) -> f64 {
        self.cell_diameters[c]
    }

    pub fn cell_diameters(&self) -> &[f64] {
        &self.cell_diameters
    }

    /// Global mesh size `h = max h_T`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cell_inradius(&self, c: usize) -> f64 {
        let [a, b, p] = self.cell_points(c);
        2.0 * self.cell_area(c) / (dist(a, b) + dist(b, p) + dist(p, a))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_area(c)).sum()
    }

    fn check_cell(&self, cell: usize) -> Result<()> {
        if cell >= self.cells.len() {
            return Err(Error::CellOutOfRange { index: cell, count: self.cells.len() });
        }
        Ok(())
    }

    /// All cells whose closure meets the closure of `cell`.
    ///
    /// On a conforming mesh two closed cells intersect exactly when they
    /// share a vertex.
    pub fn star(&self, cell: usize) -> Result<Star> {
        self.check_cell(cell)?;
        let mut members: Vec<usize> = self.cells[cell]
            .iter()
            .flat_map(|&v| self.vertex_cells[v].iter().copied())
            .collect();
        members.sort_unstable();
        members.dedup();
        Ok(Star { center_cell: cell, members })
    }

    pub fn interior_edge_count(&self, cell: usize) -> Result<usize> {
        self.check_cell(cell)?;
        Ok(self.cell_edges[cell].iter().filter(|&&e| !self.edge_boundary[e]).count())
    }

    /// Whether every cell has at least two edges in the interior of the domain.
    pub fn th_mesh_ok(&self) -> bool {
        self.cell_edges
            .iter()
            .all(|es| es.iter().filter(|&&e| !self.edge_boundary[e]).count() >= 2)
    }

    /// Barycentric coordinates of `x` with respect to `cell`.
    pub fn barycentric(&self, cell: usize, x: Point) -> [f64; 3] {
        barycentric(self.cell_points(cell), x)
    }

    /// Cell whose closure contains `x`, lowest index on shared faces.
    pub fn locate_point(&self, x: Point) -> Result<usize> {
        if !x[0].is_finite() || !x[1].is_finite() || !self.domain.contains(x) {
            return Err(Error::PointOutsideDomain { x: x[0], y: x[1] });
        }
        let (i, j) = self.locator.bucket_of(&self.domain, x);
        let mut best: Option<usize> = None;
        for &c in &self.locator.buckets[j * self.locator.nx + i] {
            if best.is_some_and(|b| b < c) {
                continue;
            }
            let lam = self.barycentric(c, x);
            if lam.iter().all(|&l| l >= -LOCATE_TOL) {
                best = Some(best.map_or(c, |b: usize| b.min(c)));
            }
        }
        best.ok_or(Error::PointOutsideDomain { x: x[0], y: x[1] })
    }

    pub fn shape_metrics(&self) -> ShapeMetrics {
        let hmax = self.h;
        let hmin = self.cell_diameters.iter().cloned().fold(f64::INFINITY, f64::min);
        let rmin = (0..self.n_cells()).map(|c| self.cell_inradius(c)).fold(f64::INFINITY, f64::min);
        ShapeMetrics { size_ratio: hmax / hmin, aspect_ratio: hmax / rmin }
    }

    /// Number of cell pairs whose intersection is not empty, a shared
    /// vertex, or a shared full edge. Quadratic in the cell count; meant for
    /// small meshes. Exact on lattice meshes.
    pub fn conformity_violations(&self) -> usize {
        let n = self.n_cells();
        let mut bad = 0;
        for a in 0..n {
            for b in (a + 1)..n {
                if !self.pair_conforms(a, b) {
                    bad += 1;
                }
            }
        }
        bad
    }

    fn pair_conforms(&self, a: usize, b: usize) -> bool {
        let ta = self.cells[a];
        let tb = self.cells[b];
        match &self.lattice {
            Some(lat) => {
                let pa = ta.map(|v| lat.coords[v]);
                let pb = tb.map(|v| lat.coords[v]);
                let sep = separated(&pa, &pb, |p, q, r| orient_i(p, q, r).signum() as i32)
                    || separated(&pb, &pa, |p, q, r| orient_i(p, q, r).signum() as i32);
                if !sep {
                    return false;
                }
                no_hanging(&ta, &pa, &tb, &pb, |p, q, r| orient_i(p, q, r).signum() as i32)
                    && no_hanging(&tb, &pb, &ta, &pa, |p, q, r| orient_i(p, q, r).signum() as i32)
            }
            None => {
                let pa = ta.map(|v| self.vertices[v]);
                let pb = tb.map(|v| self.vertices[v]);
                let scale = self.h * self.h * 1e-12;
                let orient = |p: Point, q: Point, r: Point| {
                    let s = 2.0 * signed_area(p, q, r);
                    if s > scale {
                        1
                    } else if s < -scale {
                        -1
                    } else {
                        0
                    }
                };
                let sep = separated(&pa, &pb, orient) || separated(&pb, &pa, orient);
                sep && no_hanging(&ta, &pa, &tb, &pb, orient) && no_hanging(&tb, &pb, &ta, &pa, orient)
            }
        }
    }

    /// Writes the plain text mesh format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "d=2 nv={} nc={}", self.n_vertices(), self.n_cells());
        for p in &self.vertices {
            let _ = writeln!(s, "{} {}", p[0], p[1]);
        }
        for t in &self.cells {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        s
    }

    /// Parses the plain text mesh format. The domain is the bounding box of
    /// the vertices.
    pub fn from_text(text: &str) -> Result<Mesh> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines
            .next()
            .ok_or(Error::MeshFormat { line: 1, message: "empty input".into() })?;
        let mut nv = None;
        let mut nc = None;
        let mut dim = None;
        for tok in header.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or(Error::MeshFormat {
                line: hline + 1,
                message: format!("bad header token `{tok}`"),
            })?;
            let v: usize = v.parse().map_err(|_| Error::MeshFormat {
                line: hline + 1,
                message: format!("bad integer in `{tok}`"),
            })?;
            match k {
                "d" => dim = Some(v),
                "nv" => nv = Some(v),
                "nc" => nc = Some(v),
                _ => {
                    return Err(Error::MeshFormat { line: hline + 1, message: format!("unknown key `{k}`") })
                }
            }
        }
        let missing = |what: &str| Error::MeshFormat { line: hline + 1, message: format!("missing {what}") };
        if dim.ok_or_else(|| missing("d"))? != 2 {
            return Err(Error::MeshFormat { line: hline + 1, message: "only d=2 is supported".into() });
        }
        let nv = nv.ok_or_else(|| missing("nv"))?;
        let nc = nc.ok_or_else(|| missing("nc"))?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = lines.next().ok_or(Error::MeshFormat { line: 0, message: "truncated vertex list".into() })?;
            let vals: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::MeshFormat { line: ln + 1, message: e.to_string() })?;
            if vals.len() != 2 {
                return Err(Error::MeshFormat { line: ln + 1, message: "expected two coordinates".into() });
            }
            vertices.push([vals[0], vals[1]]);
        }
        let mut cells = Vec::with_capacity(nc);
        for _ in 0..nc {
            let (ln, l) = lines.next().ok_or(Error::MeshFormat { line: 0, message: "truncated cell list".into() })?;
            let vals: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::MeshFormat { line: ln + 1, message: e.to_string() })?;
            if vals.len() != 3 {
                return Err(Error::MeshFormat { line: ln + 1, message: "expected three vertex indices".into() });
            }
            cells.push([vals[0], vals[1], vals[2]]);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::MeshFormat { line: ln + 1, message: "trailing content".into() });
        }
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &vertices {
            x0 = x0.min(p[0]);
            y0 = y0.min(p[1]);
            x1 = x1.max(p[0]);
            y1 = y1.max(p[1]);
        }
        let domain = Rect::new(x0, y0, x1, y1)?;
        Mesh::from_parts(domain, vertices, None, cells)
    }
}

/// Barycentric coordinates of `x` in the triangle `t`.
pub fn barycentric(t: [Point; 3], x: Point) -> [f64; 3] {
    let area = signed_area(t[0], t[1], t[2]);
    let l0 = signed_area(x, t[1], t[2]) / area;
    let l1 = signed_area(t[0], x, t[2]) / area;
    [l0, l1, 1.0 - l0 - l1]
}

fn lattice_points(domain: &Rect, lat: &Lattice) -> Vec<Point> {
    let den = lat.den as f64;
    lat.coords
        .iter()
        .map(|c| {
            [
                domain.x0 + c[0] as f64 / den * domain.width(),
                domain.y0 + c[1] as f64 / den * domain.height(),
            ]
        })
        .collect()
}

/// True when an edge line of counter-clockwise `a` has all of `b` on its
/// closed outer side.
fn separated<P: Copy>(a: &[P; 3], b: &[P; 3], orient: impl Fn(P, P, P) -> i32) -> bool {
    (0..3).any(|i| {
        let (p, q) = (a[i], a[(i + 1) % 3]);
        b.iter().all(|&r| orient(p, q, r) <= 0)
    })
}

/// No vertex of `b` lies in the closure of `a` unless it is a vertex of `a`.
fn no_hanging<P: Copy>(
    ta: &[usize; 3],
    pa: &[P; 3],
    tb: &[usize; 3],
    pb: &[P; 3],
    orient: impl Fn(P, P, P) -> i32,
) -> bool {
    tb.iter().zip(pb.iter()).all(|(&v, &r)| {
        if ta.contains(&v) {
            return true;
        }
        let inside = (0..3).all(|i| orient(pa[i], pa[(i + 1) % 3], r) >= 0);
        !inside
    })
}

impl Locator {
    fn build(domain: &Rect, vertices: &[Point], cells: &[[usize; 3]], h: f64) -> Locator {
        let target = |len: f64| ((len / h.max(f64::MIN_POSITIVE)).ceil() as usize).clamp(1, 4096);
        let nx = target(domain.width());
        let ny = target(domain.height());
        let mut buckets = vec![Vec::new(); nx * ny];
        let loc = Locator { nx, ny, buckets: Vec::new() };
        for (c, t) in cells.iter().enumerate() {
            let pts = t.map(|v| vertices[v]);
            let lo = [pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min), pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min)];
            let hi = [pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max), pts.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max)];
            let pad = LOCATE_TOL * domain.diameter() * 4.0;
            let (i0, j0) = loc.bucket_of(domain, [lo[0] - pad, lo[1] - pad]);
            let (i1, j1) = loc.bucket_of(domain, [hi[0] + pad, hi[1] + pad]);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(c);
                }
            }
        }
        Locator { nx, ny, buckets }
    }

    fn bucket_of(&self, domain: &Rect, x: Point) -> (usize, usize) {
        let fx = (x[0] - domain.x0) / domain.width() * self.nx as f64;
        let fy = (x[1] - domain.y0) / domain.height() * self.ny as f64;
        let clamp = |f: f64, n: usize| (f.floor().max(0.0) as usize).min(n - 1);
        (clamp(fx, self.nx), clamp(fy, self.ny))
    }
}
