//! Closed-form velocity/pressure pairs.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::Point;

/// A velocity field with gradient and a pressure, evaluable anywhere.
/// `velocity_gradient(x)[i] = [d u_i/dx, d u_i/dy]`.
pub trait StokesData {
    fn velocity(&self, x: Point) -> [f64; 2];
    fn velocity_gradient(&self, x: Point) -> [[f64; 2]; 2];
    fn pressure(&self, x: Point) -> f64;
    /// Points where the fields blow up; quadrature is graded toward them.
    fn singular_points(&self) -> Vec<Point> {
        Vec::new()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExactSolution {
    /// `u = curl psi`, `psi = x^2 (1-x)^2 y^2 (1-y)^2`,
    /// `pi = sin(2 pi x) cos(2 pi y)` on the unit square.
    SmoothCurl,
    /// Free-space fundamental pair at `z` with force `f`.
    Stokeslet { z: Point, f: [f64; 2] },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolutionFlags {
    pub solenoidal: bool,
    pub zero_trace: bool,
}

fn g(t: f64) -> f64 {
    t * t * (1.0 - t) * (1.0 - t)
}

fn dg(t: f64) -> f64 {
    2.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
}

fn ddg(t: f64) -> f64 {
    2.0 * (1.0 - 6.0 * t + 6.0 * t * t)
}

impl ExactSolution {
    pub fn flags(&self) -> SolutionFlags {
        match self {
            ExactSolution::SmoothCurl => SolutionFlags { solenoidal: true, zero_trace: true },
            ExactSolution::Stokeslet { .. } => SolutionFlags { solenoidal: true, zero_trace: false },
        }
    }
}

impl StokesData for ExactSolution {
    fn velocity(&self, x: Point) -> [f64; 2] {
        match *self {
            ExactSolution::SmoothCurl => [g(x[0]) * dg(x[1]), -dg(x[0]) * g(x[1])],
            ExactSolution::Stokeslet { z, f } => {
                let r = [x[0] - z[0], x[1] - z[1]];
                let r2 = r[0] * r[0] + r[1] * r[1];
                let rf = r[0] * f[0] + r[1] * f[1];
                let lg = -0.5 * r2.ln();
                [
                    (lg * f[0] + r[0] * rf / r2) / (4.0 * PI),
                    (lg * f[1] + r[1] * rf / r2) / (4.0 * PI),
                ]
            }
        }
    }

    fn velocity_gradient(&self, x: Point) -> [[f64; 2]; 2] {
        match *self {
            ExactSolution::SmoothCurl => {
                let (a, b) = (x[0], x[1]);
                [
                    [dg(a) * dg(b), g(a) * ddg(b)],
                    [-ddg(a) * g(b), -dg(a) * dg(b)],
                ]
            }
            ExactSolution::Stokeslet { z, f } => {
                let r = [x[0] - z[0], x[1] - z[1]];
                let r2 = r[0] * r[0] + r[1] * r[1];
                let rf = r[0] * f[0] + r[1] * f[1];
                let mut out = [[0.0; 2]; 2];
                for (i, row) in out.iter_mut().enumerate() {
                    for (k, e) in row.iter_mut().enumerate() {
                        let delta = if i == k { 1.0 } else { 0.0 };
                        *e = (-r[k] * f[i] / r2 + (delta * rf + r[i] * f[k]) / r2 - 2.0 * r[i] * rf * r[k] / (r2 * r2))
                            / (4.0 * PI);
                    }
                }
                out
            }
        }
    }

    fn pressure(&self, x: Point) -> f64 {
        match *self {
            ExactSolution::SmoothCurl => (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos(),
            ExactSolution::Stokeslet { z, f } => {
                let r = [x[0] - z[0], x[1] - z[1]];
                let r2 = r[0] * r[0] + r[1] * r[1];
                (r[0] * f[0] + r[1] * f[1]) / (2.0 * PI * r2)
            }
        }
    }

    fn singular_points(&self) -> Vec<Point> {
        match self {
            ExactSolution::SmoothCurl => Vec::new(),
            ExactSolution::Stokeslet { z, .. } => vec![*z],
        }
    }
}

impl FromStr for ExactSolution {
    type Err = Error;

    /// `smooth_curl` or `stokeslet:<zx>,<zy>:<fx>,<fy>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "smooth_curl" {
            return Ok(ExactSolution::SmoothCurl);
        }
        let pair = |t: &str| -> Option<[f64; 2]> {
            let (a, b) = t.split_once(',')?;
            Some([a.trim().parse().ok()?, b.trim().parse().ok()?])
        };
        if let Some(rest) = s.strip_prefix("stokeslet:") {
            if let Some((z, f)) = rest.split_once(':') {
                if let (Some(z), Some(f)) = (pair(z), pair(f)) {
                    return Ok(ExactSolution::Stokeslet { z, f });
                }
            }
        }
        Err(Error::UnknownSolution(s.to_string()))
    }
}

impl fmt::Display for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactSolution::SmoothCurl => f.write_str("smooth_curl"),
            ExactSolution::Stokeslet { z, f: force } => {
                write!(f, "stokeslet:{},{}:{},{}", z[0], z[1], force[0], force[1])
            }
        }
    }
}

pub fn manufactured_solution(id: &str) -> Result<ExactSolution> {
    id.parse()
}
