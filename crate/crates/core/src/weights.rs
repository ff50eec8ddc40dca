//! Muckenhoupt weights: evaluation, integration and A_p diagnostics.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point, Rect};
use crate::quadrature::{gauss_legendre, Integrator, Singularity};

/// Symbolic description of a weight, evaluable at any point of the plane.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSpec {
    Constant(f64),
    /// `dist(x, K)^alpha` for a finite set `K` of points and segments.
    DistPower { set: Vec<Singularity>, alpha: f64 },
    /// `(|x - y|^2 + (kappa h)^2)^(1/2)`; `h` is bound from the mesh in use.
    Natterer { y: Point, kappa: f64, h: Option<f64> },
    /// `w^(1/(1-p))`.
    Conjugate { inner: Box<WeightSpec>, p: f64 },
    /// `w^s`.
    Power { inner: Box<WeightSpec>, s: f64 },
}

impl WeightSpec {
    pub fn constant(c: f64) -> Self {
        WeightSpec::Constant(c)
    }

    pub fn dist_point(z: Point, alpha: f64) -> Self {
        WeightSpec::DistPower { set: vec![Singularity::Point(z)], alpha }
    }

    pub fn natterer(y: Point, kappa: f64, h: f64) -> Self {
        WeightSpec::Natterer { y, kappa, h: Some(h) }
    }

    pub fn conjugate(&self, p: f64) -> Self {
        WeightSpec::Conjugate { inner: Box::new(self.clone()), p }
    }

    pub fn power(&self, s: f64) -> Self {
        WeightSpec::Power { inner: Box::new(self.clone()), s }
    }

    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightSpec::Constant(c) if !(c.is_finite() && *c > 0.0) => {
                Err(Error::InvalidWeight(format!("constant weight must be positive, got {c}")))
            }
            WeightSpec::DistPower { set, alpha } => {
                if set.is_empty() {
                    Err(Error::InvalidWeight("distance weight needs a nonempty set".into()))
                } else if !alpha.is_finite() {
                    Err(Error::InvalidWeight("exponent must be finite".into()))
                } else {
                    Ok(())
                }
            }
            WeightSpec::Natterer { kappa, h, .. } => {
                if !(*kappa > 1.0) {
                    Err(Error::InvalidWeight(format!("natterer kappa must exceed 1, got {kappa}")))
                } else if h.is_some_and(|h| !(h > 0.0)) {
                    Err(Error::InvalidWeight("natterer mesh size must be positive".into()))
                } else {
                    Ok(())
                }
            }
            WeightSpec::Conjugate { inner, p } => {
                if !(*p > 1.0 && p.is_finite()) {
                    return Err(Error::InvalidWeight(format!("conjugate exponent must lie in (1, inf), got {p}")));
                }
                inner.validate()
            }
            WeightSpec::Power { inner, s } => {
                if !s.is_finite() {
                    return Err(Error::InvalidWeight("power must be finite".into()));
                }
                inner.validate()
            }
            _ => Ok(()),
        }
    }

    /// Binds the mesh size of every Natterer factor.
    pub fn with_mesh_size(&self, h: f64) -> Self {
        match self {
            WeightSpec::Natterer { y, kappa, .. } => WeightSpec::Natterer { y: *y, kappa: *kappa, h: Some(h) },
            WeightSpec::Conjugate { inner, p } => WeightSpec::Conjugate { inner: Box::new(inner.with_mesh_size(h)), p: *p },
            WeightSpec::Power { inner, s } => WeightSpec::Power { inner: Box::new(inner.with_mesh_size(h)), s: *s },
            other => other.clone(),
        }
    }

    /// Raw pointwise value. Returns `inf` (or `0`) on the singular set and
    /// `NaN` for an unbound Natterer weight; use [`WeightSpec::eval`] for
    /// checked evaluation.
    pub fn value(&self, x: Point) -> f64 {
        match self {
            WeightSpec::Constant(c) => *c,
            WeightSpec::DistPower { set, alpha } => {
                let d = set.iter().map(|s| s.distance(x)).fold(f64::INFINITY, f64::min);
                d.powf(*alpha)
            }
            WeightSpec::Natterer { y, kappa, h } => match h {
                Some(h) => {
                    let r = (x[0] - y[0]).hypot(x[1] - y[1]);
                    r.hypot(kappa * h)
                }
                None => f64::NAN,
            },
            WeightSpec::Conjugate { inner, p } => inner.value(x).powf(1.0 / (1.0 - p)),
            WeightSpec::Power { inner, s } => inner.value(x).powf(*s),
        }
    }

    /// Checked evaluation.
    pub fn eval(&self, x: Point) -> Result<f64> {
        if !(x[0].is_finite() && x[1].is_finite()) {
            return Err(Error::InvalidArgument("non-finite evaluation point".into()));
        }
        if self.has_unbound_mesh_size() {
            return Err(Error::InvalidWeight("natterer weight used before its mesh size was bound".into()));
        }
        let v = self.value(x);
        if v.is_finite() && v >= 0.0 {
            Ok(v)
        } else {
            Err(Error::SingularEvaluation)
        }
    }

    fn has_unbound_mesh_size(&self) -> bool {
        match self {
            WeightSpec::Natterer { h, .. } => h.is_none(),
            WeightSpec::Conjugate { inner, .. } | WeightSpec::Power { inner, .. } => inner.has_unbound_mesh_size(),
            _ => false,
        }
    }

    /// Points and segments where the weight may vanish or blow up.
    pub fn singular_set(&self) -> Vec<Singularity> {
        match self {
            WeightSpec::DistPower { set, alpha } if *alpha != 0.0 => set.clone(),
            WeightSpec::Conjugate { inner, .. } | WeightSpec::Power { inner, .. } => inner.singular_set(),
            _ => Vec::new(),
        }
    }

    /// Effective distance exponent near the singular set, if any.
    pub fn singular_exponent(&self) -> Option<f64> {
        match self {
            WeightSpec::DistPower { alpha, .. } => Some(*alpha),
            WeightSpec::Conjugate { inner, p } => inner.singular_exponent().map(|a| a / (1.0 - p)),
            WeightSpec::Power { inner, s } => inner.singular_exponent().map(|a| a * s),
            _ => None,
        }
    }

    /// Whether the weight is locally integrable near each part of its
    /// singular set in two dimensions.
    pub fn locally_integrable(&self) -> bool {
        match self.singular_exponent() {
            None => true,
            Some(a) => self.singular_set().iter().all(|s| match s {
                Singularity::Point(_) => a > -2.0,
                Singularity::Segment(..) => a > -1.0,
            }),
        }
    }
}

fn fmt_point(p: Point) -> String {
    format!("{},{}", p[0], p[1])
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Constant(c) => write!(f, "const:{c}"),
            WeightSpec::DistPower { set, alpha } => {
                let points: Vec<String> = set
                    .iter()
                    .filter_map(|s| match s {
                        Singularity::Point(p) => Some(fmt_point(*p)),
                        _ => None,
                    })
                    .collect();
                let segs: Vec<String> = set
                    .iter()
                    .filter_map(|s| match s {
                        Singularity::Segment(a, b) => Some(format!("{},{}", fmt_point(*a), fmt_point(*b))),
                        _ => None,
                    })
                    .collect();
                if segs.is_empty() {
                    write!(f, "dist:{}:{alpha}", points.join(";"))
                } else if points.is_empty() {
                    write!(f, "seg:{}:{alpha}", segs.join(";"))
                } else {
                    write!(f, "dist:{}|{}:{alpha}", points.join(";"), segs.join(";"))
                }
            }
            WeightSpec::Natterer { y, kappa, .. } => write!(f, "natterer:{}:{kappa}", fmt_point(*y)),
            WeightSpec::Conjugate { inner, p } => write!(f, "conj:{inner}:{p}"),
            WeightSpec::Power { inner, s } => write!(f, "pow:{inner}:{s}"),
        }
    }
}

fn parse_err(spec: &str, reason: impl Into<String>) -> Error {
    Error::WeightParse { spec: spec.to_string(), reason: reason.into() }
}

fn parse_f64(spec: &str, tok: &str) -> Result<f64> {
    tok.trim().parse::<f64>().map_err(|_| parse_err(spec, format!("`{tok}` is not a number")))
}

fn parse_point(spec: &str, tok: &str) -> Result<Point> {
    let (x, y) = tok.split_once(',').ok_or_else(|| parse_err(spec, format!("`{tok}` is not a point x,y")))?;
    Ok([parse_f64(spec, x)?, parse_f64(spec, y)?])
}

fn parse_segment(spec: &str, tok: &str) -> Result<Singularity> {
    let vals: Vec<&str> = tok.split(',').collect();
    if vals.len() != 4 {
        return Err(parse_err(spec, format!("`{tok}` is not a segment x1,y1,x2,y2")));
    }
    let v: Vec<f64> = vals.iter().map(|t| parse_f64(spec, t)).collect::<Result<_>>()?;
    Ok(Singularity::Segment([v[0], v[1]], [v[2], v[3]]))
}

impl FromStr for WeightSpec {
    type Err = Error;

    /// Grammar: `const:<c>`, `dist:<x>,<y>[;<x>,<y>...]:<alpha>`,
    /// `seg:<x1>,<y1>,<x2>,<y2>[;...]:<alpha>`, `natterer:<x>,<y>:<kappa>`,
    /// `conj:<spec>:<p>`, `pow:<spec>:<s>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').ok_or_else(|| parse_err(s, "missing `:`"))?;
        let w = match kind {
            "const" => WeightSpec::Constant(parse_f64(s, rest)?),
            "dist" | "seg" => {
                let (set_txt, alpha) = rest.rsplit_once(':').ok_or_else(|| parse_err(s, "missing exponent"))?;
                let alpha = parse_f64(s, alpha)?;
                let (points_txt, segs_txt) = match (kind, set_txt.split_once('|')) {
                    ("dist", Some((p, g))) => (p, g),
                    ("dist", None) => (set_txt, ""),
                    _ => ("", set_txt),
                };
                let mut set = Vec::new();
                for tok in points_txt.split(';').filter(|t| !t.trim().is_empty()) {
                    set.push(Singularity::Point(parse_point(s, tok)?));
                }
                for tok in segs_txt.split(';').filter(|t| !t.trim().is_empty()) {
                    set.push(parse_segment(s, tok)?);
                }
                WeightSpec::DistPower { set, alpha }
            }
            "natterer" => {
                let (y, kappa) = rest.rsplit_once(':').ok_or_else(|| parse_err(s, "missing kappa"))?;
                WeightSpec::Natterer { y: parse_point(s, y)?, kappa: parse_f64(s, kappa)?, h: None }
            }
            "conj" | "pow" => {
                let (inner, e) = rest.rsplit_once(':').ok_or_else(|| parse_err(s, "missing exponent"))?;
                let inner = Box::new(inner.parse::<WeightSpec>()?);
                let e = parse_f64(s, e)?;
                if kind == "conj" {
                    WeightSpec::Conjugate { inner, p: e }
                } else {
                    WeightSpec::Power { inner, s: e }
                }
            }
            other => return Err(parse_err(s, format!("unknown weight kind `{other}`"))),
        };
        w.validate().map_err(|e| parse_err(s, e.to_string()))?;
        Ok(w)
    }
}

/// Open interval of exponents `alpha` for which `dist(., K)^alpha` is in
/// A_p when `K` is a smooth compact submanifold of dimension `k` in R^d.
pub fn ap_admissible_range(d: usize, k: usize, p: f64) -> Result<(f64, f64)> {
    if k >= d {
        return Err(Error::InvalidArgument(format!("submanifold dimension {k} must be below {d}")));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p must lie in (1, inf), got {p}")));
    }
    let c = (d - k) as f64;
    Ok((-c, c * (p - 1.0)))
}

pub fn in_open_interval(alpha: f64, range: (f64, f64)) -> bool {
    alpha > range.0 && alpha < range.1
}

/// Polar quadrature on balls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallRule {
    /// Gauss points per radial interval.
    pub radial: usize,
    /// Equispaced angular nodes (trapezoid rule, spectrally accurate for
    /// periodic integrands).
    pub angular: usize,
    /// Geometric radial grading levels toward the polar origin.
    pub grading: usize,
}

impl Default for BallRule {
    fn default() -> Self {
        BallRule { radial: 6, angular: 64, grading: 8 }
    }
}

impl BallRule {
    pub fn refined(&self) -> Self {
        BallRule { radial: self.radial, angular: 2 * self.angular, grading: 2 * self.grading }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

/// Quadrature points for a ball. When a singular point lies inside the ball
/// the polar origin is moved to it, so the radial grading resolves it.
pub fn ball_points(ball: &Ball, singular: &[Singularity], rule: &BallRule) -> Vec<(Point, f64)> {
    let c = ball.center;
    let r = ball.radius;
    let origin = singular
        .iter()
        .filter_map(|s| match s {
            Singularity::Point(p) => Some(*p),
            Singularity::Segment(a, b) => {
                let d = Singularity::Segment(*a, *b).distance(c);
                if d < r {
                    // closest point of the segment to the center
                    let dir = [b[0] - a[0], b[1] - a[1]];
                    let len2 = dir[0] * dir[0] + dir[1] * dir[1];
                    let t = if len2 > 0.0 { (((c[0] - a[0]) * dir[0] + (c[1] - a[1]) * dir[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
                    Some([a[0] + t * dir[0], a[1] + t * dir[1]])
                } else {
                    None
                }
            }
        })
        .find(|p| (p[0] - c[0]).hypot(p[1] - c[1]) < r)
        .unwrap_or(c);
    let (gx, gw) = gauss_legendre(rule.radial);
    let d = [origin[0] - c[0], origin[1] - c[1]];
    let d2 = d[0] * d[0] + d[1] * d[1];
    let mut out = Vec::with_capacity(rule.angular * rule.radial * (rule.grading + 1));
    let dtheta = 2.0 * PI / rule.angular as f64;
    for k in 0..rule.angular {
        let theta = (k as f64 + 0.5) * dtheta;
        let e = [theta.cos(), theta.sin()];
        let de = d[0] * e[0] + d[1] * e[1];
        let rho_max = -de + (de * de - d2 + r * r).max(0.0).sqrt();
        let mut hi = rho_max;
        for level in 0..=rule.grading {
            let lo = if level == rule.grading { 0.0 } else { 0.5 * hi };
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, w) in gx.iter().zip(&gw) {
                let rho = mid + half * x;
                out.push(([origin[0] + rho * e[0], origin[1] + rho * e[1]], w * half * rho * dtheta));
            }
            hi = lo;
        }
    }
    out
}

/// Region for [`weight_measure`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Cell([Point; 3]),
    Ball(Ball),
}

fn region_meets(region: &Region, s: &Singularity) -> bool {
    match region {
        Region::Cell(t) => s.meets(*t),
        Region::Ball(b) => s.distance(b.center) <= b.radius,
    }
}

/// `w(E) = int_E w dx` by graded cell quadrature or polar ball quadrature.
pub fn weight_measure(w: &WeightSpec, region: &Region, cells: &Integrator, balls: &BallRule) -> Result<f64> {
    w.validate()?;
    let sing = w.singular_set();
    if !w.locally_integrable() && sing.iter().any(|s| region_meets(region, s)) {
        return Err(Error::QuadratureDivergence(format!(
            "weight `{w}` is not integrable near its singular set"
        )));
    }
    let total = match region {
        Region::Cell(t) => cells.integrate(*t, &sing, |x| w.value(x)),
        Region::Ball(b) => ball_points(b, &sing, balls).into_iter().map(|(x, q)| q * w.value(x)).sum(),
    };
    if !total.is_finite() {
        return Err(Error::QuadratureDivergence(format!("non-finite measure for `{w}`")));
    }
    Ok(total)
}

fn ball_averages(w: &WeightSpec, p: f64, ball: &Ball, rule: &BallRule) -> (f64, f64) {
    let sing = w.singular_set();
    let pts = ball_points(ball, &sing, rule);
    let area: f64 = pts.iter().map(|(_, q)| q).sum();
    let e = 1.0 / (1.0 - p);
    let (mut a, mut b) = (0.0, 0.0);
    for (x, q) in &pts {
        let v = w.value(*x);
        a += q * v;
        b += q * v.powf(e);
    }
    (a / area, b / area)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApEstimate {
    /// Largest per-ball characteristic: a lower bound for `[w]_{A_p}`.
    pub value: f64,
    pub per_ball: Vec<f64>,
}

/// Lower bound for the A_p characteristic over a finite family of balls.
///
/// Each ball is integrated at two resolutions; a relative change above 5%
/// is reported as a diverging average.
pub fn estimate_ap_constant(w: &WeightSpec, p: f64, balls: &[Ball], rule: &BallRule) -> Result<ApEstimate> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p must lie in (1, inf), got {p}")));
    }
    w.validate()?;
    let mut per_ball = Vec::with_capacity(balls.len());
    let fine = rule.refined();
    for ball in balls {
        let (a, b) = ball_averages(w, p, ball, rule);
        let (af, bf) = ball_averages(w, p, ball, &fine);
        let drift = |x: f64, y: f64| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE);
        if !(a.is_finite() && b.is_finite() && af.is_finite() && bf.is_finite())
            || drift(a, af) > 0.05
            || drift(b, bf) > 0.05
        {
            return Err(Error::QuadratureDivergence(format!(
                "ball averages of `{w}` around ({}, {}) radius {} do not settle",
                ball.center[0], ball.center[1], ball.radius
            )));
        }
        per_ball.push(af * bf.powf(p - 1.0));
    }
    let value = per_ball.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(ApEstimate { value, per_ball })
}

/// Balls centered on the singular points of `w` and on a 3x3 grid of the
/// domain, radii doubling from `h` up to the domain diameter.
pub fn standard_ball_family(w: &WeightSpec, domain: &Rect, h: f64) -> Vec<Ball> {
    let mut centers: Vec<Point> = w
        .singular_set()
        .iter()
        .filter_map(|s| match s {
            Singularity::Point(p) => Some(*p),
            Singularity::Segment(a, b) => Some([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]),
        })
        .collect();
    for j in 1..=3 {
        for i in 1..=3 {
            centers.push([
                domain.x0 + domain.width() * i as f64 / 4.0,
                domain.y0 + domain.height() * j as f64 / 4.0,
            ]);
        }
    }
    let mut radii = Vec::new();
    let mut r = h;
    while r <= domain.diameter() * (1.0 + 1e-12) {
        radii.push(r);
        r *= 2.0;
    }
    centers
        .iter()
        .flat_map(|&c| radii.iter().map(move |&radius| Ball { center: c, radius }))
        .collect()
}

/// Lower bound for the maximal function at `x` using centered squares.
pub fn approx_maximal(w: &WeightSpec, x: Point, sides: &[f64], integrator: &Integrator) -> f64 {
    let sing = w.singular_set();
    sides
        .iter()
        .map(|&s| {
            let a = 0.5 * s;
            let (x0, x1, y0, y1) = (x[0] - a, x[0] + a, x[1] - a, x[1] + a);
            let t1 = [[x0, y0], [x1, y0], [x1, y1]];
            let t2 = [[x0, y0], [x1, y1], [x0, y1]];
            let total = integrator.integrate(t1, &sing, |y| w.value(y).abs())
                + integrator.integrate(t2, &sing, |y| w.value(y).abs());
            total / (s * s)
        })
        .fold(0.0, f64::max)
}

/// Geometric side lengths `h_max, h_max/2, ...` down to `h_min`.
pub fn geometric_sides(h_max: f64, h_min: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = h_max;
    while s >= h_min * (1.0 - 1e-12) {
        out.push(s);
        s *= 0.5;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NattererLevel {
    pub h: f64,
    /// `max_y int_Omega sigma_y^{-2-lambda} dx / h^{-lambda}`
    pub ratio: f64,
}

/// Normalized integral of the Natterer weight over each mesh level.
pub fn natterer_integral_ratio(
    lambda: f64,
    kappa: f64,
    meshes: &[Mesh],
    samples: &[Point],
    integrator: &Integrator,
) -> Result<Vec<NattererLevel>> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidArgument(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    if !(kappa > 1.0) {
        return Err(Error::InvalidArgument(format!("kappa must exceed 1, got {kappa}")));
    }
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no sample points".into()));
    }
    meshes
        .iter()
        .map(|mesh| {
            let h = mesh.h();
            let big_r = mesh.domain().diameter();
            if kappa * h > big_r {
                return Err(Error::InvalidArgument(format!(
                    "kappa h = {} exceeds R = {big_r}",
                    kappa * h
                )));
            }
            let mut ratio: f64 = 0.0;
            for &y in samples {
                let sigma = WeightSpec::natterer(y, kappa, h);
                let sing = [Singularity::Point(y)];
                let total: f64 = (0..mesh.n_cells())
                    .map(|c| integrator.integrate(mesh.cell_points(c), &sing, |x| sigma.value(x).powf(-2.0 - lambda)))
                    .sum();
                ratio = ratio.max(total / h.powf(-lambda));
            }
            Ok(NattererLevel { h, ratio })
        })
        .collect()
}

/// `(r/R)^{p+2} w(B(x,R)) / w(B(x,r))`.
pub fn embedding_condition_ratio(
    w: &WeightSpec,
    p: f64,
    x: Point,
    r: f64,
    big_r: f64,
    cells: &Integrator,
    balls: &BallRule,
) -> Result<f64> {
    if !(r > 0.0 && r <= big_r) {
        return Err(Error::InvalidArgument(format!("need 0 < r <= R, got r = {r}, R = {big_r}")));
    }
    let outer = weight_measure(w, &Region::Ball(Ball { center: x, radius: big_r }), cells, balls)?;
    let inner = weight_measure(w, &Region::Ball(Ball { center: x, radius: r }), cells, balls)?;
    Ok((r / big_r).powf(p + 2.0) * outer / inner)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RestrictedCheck {
    pub admissible: bool,
    /// Smallest sampled value in the collar.
    pub omega_l: f64,
}

/// Samples the collar `{x : dist(x, boundary) <= eps}` and checks the weight
/// is positive there and free of singular points.
pub fn ap_restricted_check(w: &WeightSpec, domain: &Rect, eps: f64, samples_per_side: usize) -> Result<RestrictedCheck> {
    if !(eps > 0.0 && eps < domain.inradius()) {
        return Err(Error::InvalidArgument(format!("collar width {eps} must lie in (0, inradius)")));
    }
    w.validate()?;
    let singular_in_collar = w.singular_set().iter().any(|s| match s {
        Singularity::Point(p) => domain.dist_to_boundary(*p) <= eps,
        Singularity::Segment(a, b) => domain.dist_to_boundary(*a) <= eps || domain.dist_to_boundary(*b) <= eps,
    });
    let n = samples_per_side.max(2);
    let mut omega_l = f64::INFINITY;
    for j in 0..=n {
        for i in 0..=n {
            let x = [
                domain.x0 + domain.width() * i as f64 / n as f64,
                domain.y0 + domain.height() * j as f64 / n as f64,
            ];
            if domain.dist_to_boundary(x) <= eps {
                omega_l = omega_l.min(w.value(x));
            }
        }
    }
    // points exactly on the inner rim of the collar
    for k in 0..=n {
        let t = k as f64 / n as f64;
        for x in [
            [domain.x0 + eps + t * (domain.width() - 2.0 * eps), domain.y0 + eps],
            [domain.x0 + eps + t * (domain.width() - 2.0 * eps), domain.y1 - eps],
            [domain.x0 + eps, domain.y0 + eps + t * (domain.height() - 2.0 * eps)],
            [domain.x1 - eps, domain.y0 + eps + t * (domain.height() - 2.0 * eps)],
        ] {
            omega_l = omega_l.min(w.value(x));
        }
    }
    let admissible = !singular_in_collar && omega_l.is_finite() && omega_l > 0.0;
    Ok(RestrictedCheck { admissible, omega_l })
}
