//! Quadrature on the reference triangle and graded integration toward
//! singular points and segments.

use crate::mesh::{barycentric, Point};

/// Reference triangle area; rule weights sum to this value.
pub const REFERENCE_AREA: f64 = 0.5;

/// A quadrature rule on the reference triangle, points in barycentric form.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
    degree: usize,
}

impl Quadrature {
    fn from_normalized(points: Vec<[f64; 3]>, unit_weights: Vec<f64>, degree: usize) -> Self {
        let weights = unit_weights.into_iter().map(|w| w * REFERENCE_AREA).collect();
        Quadrature { points, weights, degree }
    }

    /// One point at the barycenter, exact for linears.
    pub fn centroid() -> Self {
        Self::from_normalized(vec![[1.0 / 3.0; 3]], vec![1.0], 1)
    }

    /// Three interior points, exact for quadratics.
    pub fn three_point() -> Self {
        let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
        Self::from_normalized(vec![[a, b, b], [b, a, b], [b, b, a]], vec![1.0 / 3.0; 3], 2)
    }

    /// Symmetric twelve point rule exact for polynomials of degree six.
    pub fn degree6() -> Self {
        const A1: f64 = 0.063_089_014_491_502_228_340_331_602_870_819;
        const W1: f64 = 0.050_844_906_370_206_816_920_936_809_106_869;
        const A2: f64 = 0.249_286_745_170_910_421_291_638_553_107_019;
        const W2: f64 = 0.116_786_275_726_379_366_025_289_611_385_58;
        const B3: f64 = 0.053_145_049_844_816_947_353_249_671_631_398;
        const C3: f64 = 0.310_352_451_033_784_405_416_607_733_956_55;
        const W3: f64 = 0.082_851_075_618_373_575_193_553_456_420_442;
        let mut pts = Vec::with_capacity(12);
        let mut ws = Vec::with_capacity(12);
        for (a, w) in [(A1, W1), (A2, W2)] {
            let c = 1.0 - 2.0 * a;
            pts.extend([[c, a, a], [a, c, a], [a, a, c]]);
            ws.extend([w; 3]);
        }
        let a3 = 1.0 - B3 - C3;
        for p in [[a3, B3, C3], [a3, C3, B3], [B3, a3, C3], [C3, a3, B3], [B3, C3, a3], [C3, B3, a3]] {
            pts.push(p);
            ws.push(W3);
        }
        Self::from_normalized(pts, ws, 6)
    }

    /// Collapsed (conical product) Gauss-Legendre rule exact for the given
    /// polynomial degree.
    pub fn gauss(degree: usize) -> Self {
        let n = degree.div_ceil(2) + 1;
        let (x, w) = gauss_legendre(n);
        let mut pts = Vec::with_capacity(n * n);
        let mut ws = Vec::with_capacity(n * n);
        for (xi, wi) in x.iter().zip(&w) {
            let u = 0.5 * (xi + 1.0);
            for (xj, wj) in x.iter().zip(&w) {
                let v = 0.5 * (xj + 1.0);
                let (px, py) = (u, v * (1.0 - u));
                pts.push([1.0 - px - py, px, py]);
                ws.push(0.25 * wi * wj * (1.0 - u));
            }
        }
        Quadrature { points: pts, weights: ws, degree }
    }

    /// Vertices (weight zero) and edge midpoints (weight |T|/3); exact for
    /// quadratics.
    pub fn vertex_midpoint() -> Self {
        let pts = vec![
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.5, 0.5],
            [0.5, 0.0, 0.5],
            [0.5, 0.5, 0.0],
        ];
        let third = 1.0 / 3.0;
        Self::from_normalized(pts, vec![0.0, 0.0, 0.0, third, third, third], 2)
    }

    /// Cheapest available rule exact for `degree`.
    pub fn for_degree(degree: usize) -> Self {
        match degree {
            0 | 1 => Self::centroid(),
            2 => Self::three_point(),
            3..=6 => Self::degree6(),
            d => Self::gauss(d),
        }
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates `f` over the physical triangle `tri`.
    pub fn integrate(&self, tri: [Point; 3], mut f: impl FnMut(Point) -> f64) -> f64 {
        let scale = triangle_area(tri) / REFERENCE_AREA;
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(l, w)| w * f(from_barycentric(tri, *l)))
            .sum::<f64>()
            * scale
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // p1 = P_n(z), p0 = P_{n-1}(z)
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

pub fn triangle_area(t: [Point; 3]) -> f64 {
    0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[1][1] - t[0][1]) * (t[2][0] - t[0][0]))
}

pub fn from_barycentric(t: [Point; 3], l: [f64; 3]) -> Point {
    [
        l[0] * t[0][0] + l[1] * t[1][0] + l[2] * t[2][0],
        l[0] * t[0][1] + l[1] * t[1][1] + l[2] * t[2][1],
    ]
}

fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// Red refinement of a triangle: three corner children then the middle one.
pub fn red_children(t: [Point; 3]) -> [[Point; 3]; 4] {
    let m0 = midpoint(t[1], t[2]);
    let m1 = midpoint(t[2], t[0]);
    let m2 = midpoint(t[0], t[1]);
    [[t[0], m2, m1], [m2, t[1], m0], [m1, m0, t[2]], [m0, m1, m2]]
}

/// A set where a weight or a field may fail to be smooth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Singularity {
    Point(Point),
    Segment(Point, Point),
}

impl Singularity {
    pub fn distance(&self, x: Point) -> f64 {
        match *self {
            Singularity::Point(p) => (x[0] - p[0]).hypot(x[1] - p[1]),
            Singularity::Segment(a, b) => {
                let d = [b[0] - a[0], b[1] - a[1]];
                let len2 = d[0] * d[0] + d[1] * d[1];
                let t = if len2 > 0.0 {
                    (((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                (x[0] - a[0] - t * d[0]).hypot(x[1] - a[1] - t * d[1])
            }
        }
    }

    /// Whether the set meets the closed triangle `t`.
    pub fn meets(&self, t: [Point; 3]) -> bool {
        let tol = 1e-12 * triangle_area(t).abs();
        let inside = |p: Point| barycentric(t, p).iter().all(|&l| l >= -1e-12);
        match *self {
            Singularity::Point(p) => inside(p),
            Singularity::Segment(a, b) => {
                if inside(a) || inside(b) {
                    return true;
                }
                (0..3).any(|i| segments_intersect(a, b, t[i], t[(i + 1) % 3], tol))
            }
        }
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point, tol: f64) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    let straddle = |a: f64, b: f64| (a > tol && b < -tol) || (a < -tol && b > tol);
    if straddle(d1, d2) && straddle(d3, d4) {
        return true;
    }
    let on = |a: Point, b: Point, p: Point, d: f64| {
        d.abs() <= tol
            && p[0] >= a[0].min(b[0]) - tol
            && p[0] <= a[0].max(b[0]) + tol
            && p[1] >= a[1].min(b[1]) - tol
            && p[1] <= a[1].max(b[1]) + tol
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// Cell integration settings: a base rule, and the number of red
/// subdivision levels applied toward singular sets meeting the cell.
#[derive(Clone, Debug)]
pub struct Integrator {
    pub rule: Quadrature,
    pub grading_levels: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator { rule: Quadrature::degree6(), grading_levels: 8 }
    }
}

impl Integrator {
    pub fn new(rule: Quadrature, grading_levels: usize) -> Self {
        Integrator { rule, grading_levels }
    }

    /// Physical quadrature points and weights for `tri`, graded toward any
    /// member of `singular` meeting the closed triangle.
    pub fn points(&self, tri: [Point; 3], singular: &[Singularity]) -> Vec<(Point, f64)> {
        let mut out = Vec::with_capacity(self.rule.len());
        self.collect(tri, singular, self.grading_levels, &mut out);
        out
    }

    fn collect(&self, tri: [Point; 3], singular: &[Singularity], depth: usize, out: &mut Vec<(Point, f64)>) {
        let meets = depth > 0 && singular.iter().any(|s| s.meets(tri));
        if meets {
            for child in red_children(tri) {
                self.collect(child, singular, depth - 1, out);
            }
        } else {
            let scale = triangle_area(tri) / REFERENCE_AREA;
            for (l, w) in self.rule.points.iter().zip(&self.rule.weights) {
                out.push((from_barycentric(tri, *l), w * scale));
            }
        }
    }

    pub fn integrate(&self, tri: [Point; 3], singular: &[Singularity], mut f: impl FnMut(Point) -> f64) -> f64 {
        self.points(tri, singular).into_iter().map(|(x, w)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Closed form: integral of l0^a l1^b l2^c over a triangle of area |T|.
    fn monomial_exact(area: f64, a: u32, b: u32, c: u32) -> f64 {
        2.0 * area * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2)
    }

    fn check_exactness(rule: &Quadrature) {
        let tri = [[0.3, -0.2], [1.7, 0.1], [0.4, 1.3]];
        let area = triangle_area(tri);
        let d = rule.degree() as u32;
        for a in 0..=d {
            for b in 0..=(d - a) {
                for c in 0..=(d - a - b) {
                    let got = rule.integrate(tri, |x| {
                        let l = barycentric(tri, x);
                        l[0].powi(a as i32) * l[1].powi(b as i32) * l[2].powi(c as i32)
                    });
                    let want = monomial_exact(area, a, b, c);
                    assert!(
                        (got - want).abs() <= 1e-13 * want.max(1e-3),
                        "degree {} rule fails on ({a},{b},{c}): {got} vs {want}",
                        rule.degree()
                    );
                }
            }
        }
    }

    #[test]
    fn rules_meet_declared_degree() {
        for rule in [
            Quadrature::centroid(),
            Quadrature::three_point(),
            Quadrature::degree6(),
            Quadrature::vertex_midpoint(),
            Quadrature::gauss(4),
            Quadrature::gauss(9),
            Quadrature::gauss(14),
        ] {
            let total: f64 = rule.weights().iter().sum();
            assert!((total - REFERENCE_AREA).abs() < 1e-14);
            check_exactness(&rule);
        }
    }

    #[test]
    fn vertex_midpoint_examples() {
        let rule = Quadrature::vertex_midpoint();
        let tri = [[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]];
        let area = 1.0;
        let l = |x| barycentric(tri, x);
        assert!((rule.integrate(tri, |x| l(x)[0].powi(2)) - area / 6.0).abs() < 1e-15);
        assert!((rule.integrate(tri, |x| l(x)[0] * l(x)[1]) - area / 12.0).abs() < 1e-15);
        assert!((rule.integrate(tri, |_| 1.0) - area).abs() < 1e-15);
        assert!(rule.weights()[..3].iter().all(|&w| w == 0.0));
        assert!(rule.weights()[3..].iter().all(|&w| w > 0.0));
    }

    #[test]
    fn graded_integration_of_inverse_distance() {
        // integral of 1/r over the right triangle with legs 1 at its right-angle vertex:
        // int_0^{pi/2} int_0^{1/(cos t + sin t)} dr dt = sqrt(2) * ln(1 + sqrt(2))
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let exact = 2f64.sqrt() * (1.0 + 2f64.sqrt()).ln();
        let sing = [Singularity::Point([0.0, 0.0])];
        let f = |x: Point| 1.0 / x[0].hypot(x[1]);
        let coarse = Integrator::new(Quadrature::degree6(), 4).integrate(tri, &sing, f);
        let fine = Integrator::new(Quadrature::degree6(), 12).integrate(tri, &sing, f);
        assert!((fine - exact).abs() < (coarse - exact).abs());
        assert!((fine - exact).abs() / exact < 1e-4);
    }

    #[test]
    fn segment_meets_triangle() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(Singularity::Segment([-1.0, 0.25], [2.0, 0.25]).meets(tri));
        assert!(!Singularity::Segment([-1.0, 2.0], [2.0, 2.0]).meets(tri));
        assert!(Singularity::Segment([0.5, 0.5], [1.0, 1.0]).meets(tri));
        assert!((Singularity::Segment([0.0, 0.0], [1.0, 0.0]).distance([0.5, 2.0]) - 2.0).abs() < 1e-15);
    }
}
