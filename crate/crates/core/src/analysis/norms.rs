//! Discrete fields and weighted L^p norms of values and gradients.

use crate::analysis::exact::StokesData;
use crate::error::{Error, Result};
use crate::fem::{pressure_at, velocity_at, CellGeometry, DofMap};
use crate::mesh::{Mesh, Point};
use crate::quadrature::{Integrator, Singularity};
use crate::weights::WeightSpec;

/// Value components and gradient rows of a field at one point. Scalar
/// fields use `n = 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sample {
    pub n: usize,
    pub value: [f64; 2],
    pub grad: [[f64; 2]; 2],
}

impl Sample {
    pub fn scalar(v: f64, g: [f64; 2]) -> Self {
        Sample { n: 1, value: [v, 0.0], grad: [g, [0.0; 2]] }
    }

    pub fn vector(v: [f64; 2], g: [[f64; 2]; 2]) -> Self {
        Sample { n: 2, value: v, grad: g }
    }

    /// `|v|^p` with the Euclidean norm.
    pub fn value_pth(&self, p: f64) -> f64 {
        let s: f64 = self.value[..self.n].iter().map(|v| v * v).sum();
        s.powf(0.5 * p)
    }

    /// `sum_i |grad v^i|^p`.
    pub fn grad_pth(&self, p: f64) -> f64 {
        self.grad[..self.n]
            .iter()
            .map(|g| (g[0] * g[0] + g[1] * g[1]).powf(0.5 * p))
            .sum()
    }

    pub fn minus(&self, other: &Sample) -> Sample {
        let mut s = *self;
        for i in 0..self.n {
            s.value[i] -= other.value[i];
            s.grad[i][0] -= other.grad[i][0];
            s.grad[i][1] -= other.grad[i][1];
        }
        s
    }
}

/// Something that can be sampled at points of a given integration mesh.
/// `cell` indexes that mesh.
pub trait FieldSource {
    fn sample(&self, cell: usize, x: Point) -> Sample;
    fn singular_points(&self) -> Vec<Point> {
        Vec::new()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Velocity,
    Pressure,
}

/// Finite element coefficients on a mesh, evaluable anywhere in the domain.
#[derive(Clone, Debug)]
pub struct DiscreteField<'a> {
    pub mesh: &'a Mesh,
    pub dofs: &'a DofMap,
    pub kind: FieldKind,
    pub coeffs: Vec<f64>,
}

impl<'a> DiscreteField<'a> {
    pub fn velocity(mesh: &'a Mesh, dofs: &'a DofMap, coeffs: Vec<f64>) -> Self {
        DiscreteField { mesh, dofs, kind: FieldKind::Velocity, coeffs }
    }

    pub fn pressure(mesh: &'a Mesh, dofs: &'a DofMap, coeffs: Vec<f64>) -> Self {
        DiscreteField { mesh, dofs, kind: FieldKind::Pressure, coeffs }
    }

    /// Evaluation inside a known cell of the field's own mesh.
    pub fn at_cell(&self, cell: usize, x: Point) -> Sample {
        let geo = CellGeometry::of_cell(self.mesh, cell).expect("mesh cells are nondegenerate");
        let l = geo.barycentric(x);
        match self.kind {
            FieldKind::Velocity => {
                let (v, g) = velocity_at(self.dofs, &self.coeffs, cell, &geo, l);
                Sample::vector(v, g)
            }
            FieldKind::Pressure => {
                let (v, g) = pressure_at(self.mesh, &self.coeffs, cell, &geo, l);
                Sample::scalar(v, g)
            }
        }
    }

    /// Evaluation by point location (lowest cell index on interfaces).
    pub fn eval(&self, x: Point) -> Result<Sample> {
        let c = self.mesh.locate_point(x)?;
        Ok(self.at_cell(c, x))
    }

    /// Coarse cell containing each cell of a nested finer mesh.
    pub fn transfer_map(&self, fine: &Mesh) -> Result<Vec<usize>> {
        (0..fine.n_cells()).map(|c| self.mesh.locate_point(fine.cell_centroid(c))).collect()
    }

    /// The field viewed as a source on a nested finer mesh.
    pub fn on_mesh(&'a self, fine: &Mesh) -> Result<Transferred<'a>> {
        Ok(Transferred { field: self, map: self.transfer_map(fine)? })
    }
}

impl FieldSource for DiscreteField<'_> {
    fn sample(&self, cell: usize, x: Point) -> Sample {
        self.at_cell(cell, x)
    }
}

/// A discrete field sampled on a nested finer mesh.
pub struct Transferred<'a> {
    field: &'a DiscreteField<'a>,
    map: Vec<usize>,
}

impl FieldSource for Transferred<'_> {
    fn sample(&self, cell: usize, x: Point) -> Sample {
        self.field.at_cell(self.map[cell], x)
    }
}

pub struct ExactVelocity<'a>(pub &'a dyn StokesData);
pub struct ExactPressure<'a>(pub &'a dyn StokesData);

impl FieldSource for ExactVelocity<'_> {
    fn sample(&self, _: usize, x: Point) -> Sample {
        Sample::vector(self.0.velocity(x), self.0.velocity_gradient(x))
    }
    fn singular_points(&self) -> Vec<Point> {
        self.0.singular_points()
    }
}

impl FieldSource for ExactPressure<'_> {
    fn sample(&self, _: usize, x: Point) -> Sample {
        Sample::scalar(self.0.pressure(x), [0.0; 2])
    }
    fn singular_points(&self) -> Vec<Point> {
        self.0.singular_points()
    }
}

/// Pointwise difference of two sources.
pub struct Diff<'a>(pub &'a dyn FieldSource, pub &'a dyn FieldSource);

impl FieldSource for Diff<'_> {
    fn sample(&self, cell: usize, x: Point) -> Sample {
        self.0.sample(cell, x).minus(&self.1.sample(cell, x))
    }
    fn singular_points(&self) -> Vec<Point> {
        let mut s = self.0.singular_points();
        s.extend(self.1.singular_points());
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Value,
    Gradient,
}

/// `sum_T int_T w f` with quadrature graded toward the weight's singular set
/// and `extra` points.
pub fn weighted_integral(
    mesh: &Mesh,
    weight: Option<&WeightSpec>,
    extra: &[Point],
    integ: &Integrator,
    mut f: impl FnMut(usize, Point) -> f64,
) -> Result<f64> {
    let mut sing: Vec<Singularity> = extra.iter().map(|&z| Singularity::Point(z)).collect();
    if let Some(w) = weight {
        w.validate()?;
        sing.extend(w.singular_set());
    }
    let mut total = 0.0;
    for c in 0..mesh.n_cells() {
        for (x, q) in integ.points(mesh.cell_points(c), &sing) {
            let w = weight.map_or(1.0, |w| w.value(x));
            total += q * w * f(c, x);
        }
    }
    if !total.is_finite() {
        return Err(Error::QuadratureDivergence("weighted integral is not finite".into()));
    }
    Ok(total)
}

/// `(sum_T int_T w |.|^p)^{1/p}` over the cells of `mesh`.
pub fn weighted_norm(
    mesh: &Mesh,
    field: &dyn FieldSource,
    weight: Option<&WeightSpec>,
    p: f64,
    order: Order,
    integ: &Integrator,
) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p must lie in (1, inf), got {p}")));
    }
    let total = weighted_integral(mesh, weight, &field.singular_points(), integ, |c, x| {
        let s = field.sample(c, x);
        match order {
            Order::Value => s.value_pth(p),
            Order::Gradient => s.grad_pth(p),
        }
    })?;
    Ok(total.powf(1.0 / p))
}

/// Velocity and pressure from a discrete solution, evaluated by point
/// location; lets a discrete pair stand in for an exact one.
pub struct DiscretePair<'a> {
    pub velocity: DiscreteField<'a>,
    pub pressure: DiscreteField<'a>,
}

impl StokesData for DiscretePair<'_> {
    fn velocity(&self, x: Point) -> [f64; 2] {
        self.velocity.eval(x).map(|s| s.value).unwrap_or([f64::NAN; 2])
    }
    fn velocity_gradient(&self, x: Point) -> [[f64; 2]; 2] {
        self.velocity.eval(x).map(|s| s.grad).unwrap_or([[f64::NAN; 2]; 2])
    }
    fn pressure(&self, x: Point) -> f64 {
        self.pressure.eval(x).map(|s| s.value[0]).unwrap_or(f64::NAN)
    }
}
