//! Saddle-point solves and the discrete inf-sup constant at p = 2.

use std::time::Instant;

use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
use faer::prelude::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::{Mat, Par, Side};
use serde::Serialize;

use crate::assembly::{assemble, rhs_green, RegularizedDelta, SaddleSystem};
use crate::error::{Error, Result};
use crate::fem::ElementPair;
use crate::mesh::Mesh;
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::weights::WeightSpec;

const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct SolveInfo {
    pub factorization: &'static str,
    pub unknowns: usize,
    pub seconds: f64,
    pub refinement_steps: usize,
}

#[derive(Clone, Debug)]
pub struct Solution {
    /// Full velocity vector, zero on boundary dofs.
    pub velocity: Vec<f64>,
    /// Pressure with zero mean.
    pub pressure: Vec<f64>,
    pub multiplier: f64,
    /// Relative residual of the full KKT system.
    pub residual: f64,
    pub info: SolveInfo,
}

/// Factorized `[A B^T 0; B 0 m; 0 m^T 0]`.
pub struct SaddleSolver {
    kkt: CsrMatrix,
    lu: Lu<usize, f64>,
    n_free: usize,
    n_pressure: usize,
    mean: Vec<f64>,
    area: f64,
    factor_seconds: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl SaddleSolver {
    pub fn new(sys: &SaddleSystem) -> Result<Self> {
        let start = Instant::now();
        let (nf, np) = (sys.n_free(), sys.n_pressure());
        let n = nf + np + 1;
        let mut tb = TripletBuilder::new(n, n);
        for (i, j, v) in sys.a.triplets() {
            tb.push(i, j, v);
        }
        for (k, j, v) in sys.b.triplets() {
            tb.push(nf + k, j, v);
            tb.push(j, nf + k, v);
        }
        for (k, &m) in sys.mean.iter().enumerate() {
            tb.push(nf + k, nf + np, m);
            tb.push(nf + np, nf + k, m);
        }
        let kkt = tb.build();
        let lu = kkt
            .to_faer()?
            .sp_lu()
            .map_err(|e| Error::Factorization(format!("saddle system LU: {e:?}")))?;
        Ok(SaddleSolver {
            kkt,
            lu,
            n_free: nf,
            n_pressure: np,
            mean: sys.mean.clone(),
            area: sys.mean.iter().sum(),
            factor_seconds: start.elapsed().as_secs_f64(),
        })
    }

    fn solve_raw(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        self.lu.solve_in_place(x.as_mut());
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }

    /// Solves with a full-length velocity load and `B u = 0`.
    pub fn solve(&self, sys: &SaddleSystem, load: &[f64]) -> Result<Solution> {
        self.solve_constrained(sys, load, None)
    }

    /// Solves with a velocity load and, optionally, `B u = g`.
    pub fn solve_constrained(&self, sys: &SaddleSystem, load: &[f64], g: Option<&[f64]>) -> Result<Solution> {
        if let Some(g) = g {
            if g.len() != self.n_pressure {
                return Err(Error::InvalidArgument(format!("constraint has {} entries, expected {}", g.len(), self.n_pressure)));
            }
        }
        if load.len() != sys.dofs.n_velocity() {
            return Err(Error::InvalidArgument(format!(
                "load has {} entries, expected {}",
                load.len(),
                sys.dofs.n_velocity()
            )));
        }
        let start = Instant::now();
        let mut rhs = sys.dofs.restrict(load);
        if let Some(g) = g {
            rhs.extend_from_slice(g);
        }
        rhs.resize(self.n_free + self.n_pressure + 1, 0.0);
        let scale = norm(&rhs).max(f64::MIN_POSITIVE);
        let mut x = self.solve_raw(&rhs);
        let residual_of = |x: &[f64]| -> Vec<f64> { self.kkt.matvec(x).iter().zip(&rhs).map(|(a, b)| b - a).collect() };
        let mut r = residual_of(&x);
        let mut steps = 0;
        while norm(&r) / scale > 1e-13 && steps < 3 {
            let dx = self.solve_raw(&r);
            for (a, d) in x.iter_mut().zip(&dx) {
                *a += d;
            }
            r = residual_of(&x);
            steps += 1;
        }
        let residual = if norm(&rhs) == 0.0 { norm(&r) } else { norm(&r) / scale };
        if !(residual <= RESIDUAL_TOL) {
            return Err(Error::Factorization(format!("KKT residual {residual:e} exceeds {RESIDUAL_TOL:e}")));
        }
        let velocity = sys.dofs.extend(&x[..self.n_free]);
        let mut pressure = x[self.n_free..self.n_free + self.n_pressure].to_vec();
        let mean: f64 = pressure.iter().zip(&self.mean).map(|(p, m)| p * m).sum::<f64>() / self.area;
        for p in pressure.iter_mut() {
            *p -= mean;
        }
        Ok(Solution {
            velocity,
            pressure,
            multiplier: x[self.n_free + self.n_pressure],
            residual,
            info: SolveInfo {
                factorization: "sparse LU (partial pivoting)",
                unknowns: rhs.len(),
                seconds: self.factor_seconds + start.elapsed().as_secs_f64(),
                refinement_steps: steps,
            },
        })
    }
}

pub fn solve_saddle(sys: &SaddleSystem, load: &[f64]) -> Result<Solution> {
    SaddleSolver::new(sys)?.solve(sys, load)
}

/// Discrete Green's function for `d_i v^j` at the delta's point.
pub fn solve_green(mesh: &Mesh, pair: ElementPair, delta: &RegularizedDelta, i: usize, j: usize) -> Result<Solution> {
    let sys = assemble(mesh, pair, None)?;
    let load = rhs_green(mesh, &sys.dofs, delta, i, j)?;
    solve_saddle(&sys, &load)
}

#[derive(Clone, Debug, Serialize)]
pub struct InfSup {
    pub beta: f64,
    pub lambda_min: f64,
    pub pressure_dofs: usize,
    pub seconds: f64,
}

fn dense(a: &CsrMatrix) -> Mat<f64> {
    let mut m = Mat::<f64>::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.triplets() {
        m[(i, j)] += v;
    }
    m
}

/// Smallest generalized eigenvalue of `B A^{-1} B^T q = lambda M q` over
/// zero-mean pressures, by a dense reduction.
pub fn infsup_from_blocks(b: &CsrMatrix, a: &CsrMatrix, m: &CsrMatrix, mean: &[f64]) -> Result<InfSup> {
    let start = Instant::now();
    let (np, nf) = (b.nrows(), b.ncols());
    if np < 2 {
        return Err(Error::InvalidArgument("need at least two pressure dofs".into()));
    }
    let chol = a
        .to_faer()?
        .sp_cholesky(Side::Lower)
        .map_err(|e| Error::Factorization(format!("velocity stiffness Cholesky: {e:?}")))?;
    let mut x = Mat::<f64>::zeros(nf, np);
    for (k, j, v) in b.triplets() {
        x[(j, k)] = v;
    }
    chol.solve_in_place(x.as_mut());
    let mut s = Mat::<f64>::zeros(np, np);
    for (k, j, v) in b.triplets() {
        for l in 0..np {
            s[(k, l)] += v * x[(j, l)];
        }
    }
    // zero-mean pressures: drop the coordinate with the largest mean weight
    let kstar = (0..np)
        .max_by(|&i, &j| mean[i].abs().total_cmp(&mean[j].abs()))
        .unwrap();
    let keep: Vec<usize> = (0..np).filter(|&i| i != kstar).collect();
    let p = Mat::<f64>::from_fn(np, np - 1, |i, r| {
        if i == kstar {
            -mean[keep[r]] / mean[kstar]
        } else if i == keep[r] {
            1.0
        } else {
            0.0
        }
    });
    let pt = p.transpose().to_owned();
    let s_r = &pt * &(&s * &p);
    let m_r = &pt * &(&dense(m) * &p);
    let llt = m_r
        .llt(Side::Lower)
        .map_err(|e| Error::Eigen(format!("pressure mass is not positive definite: {e:?}")))?;
    let l = llt.L().to_owned();
    let mut c = s_r;
    solve_lower_triangular_in_place(l.as_ref(), c.as_mut(), Par::Seq);
    let mut c = c.transpose().to_owned();
    solve_lower_triangular_in_place(l.as_ref(), c.as_mut(), Par::Seq);
    let n = np - 1;
    let sym = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let eig = sym
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let lambda_min = eig[0];
    if lambda_min < -1e-10 {
        return Err(Error::Eigen(format!("negative eigenvalue {lambda_min:e}")));
    }
    Ok(InfSup {
        beta: lambda_min.max(0.0).sqrt(),
        lambda_min,
        pressure_dofs: np,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// `inf_q sup_v b(v,q) / (|grad v|_{L2(w')} |q|_{L2(w)})`, unweighted when
/// `weight` is `None`.
pub fn infsup_beta(mesh: &Mesh, pair: ElementPair, weight: Option<&WeightSpec>) -> Result<InfSup> {
    let sys = assemble(mesh, pair, weight)?;
    match &sys.weighted {
        None => infsup_from_blocks(&sys.b, &sys.a, &sys.m, &sys.mean),
        Some(w) => infsup_from_blocks(&sys.b, &w.a_wc, &w.m_w, &sys.mean),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Pattern, Rect};

    #[test]
    fn zero_load_gives_zero_solution() {
        let m = Mesh::structured(Pattern::CrissCross, 4, Rect::unit()).unwrap();
        for pair in [ElementPair::Mini, ElementPair::TaylorHood] {
            let sys = assemble(&m, pair, None).unwrap();
            let s = solve_saddle(&sys, &vec![0.0; sys.dofs.n_velocity()]).unwrap();
            assert!(s.velocity.iter().chain(&s.pressure).all(|v| *v == 0.0));
        }
    }

    #[test]
    fn solve_is_linear_and_divergence_free() {
        let m = Mesh::structured(Pattern::CrissCross, 3, Rect::unit()).unwrap();
        let sys = assemble(&m, ElementPair::TaylorHood, None).unwrap();
        let solver = SaddleSolver::new(&sys).unwrap();
        let n = sys.dofs.n_velocity();
        let l1: Vec<f64> = (0..n).map(|i| ((i * 7 % 11) as f64 - 5.0) / 5.0).collect();
        let l2: Vec<f64> = (0..n).map(|i| ((i * 3 % 7) as f64 - 3.0) / 3.0).collect();
        let comb: Vec<f64> = l1.iter().zip(&l2).map(|(a, b)| 2.5 * a + b).collect();
        let (s1, s2, s3) = (
            solver.solve(&sys, &l1).unwrap(),
            solver.solve(&sys, &l2).unwrap(),
            solver.solve(&sys, &comb).unwrap(),
        );
        for i in 0..n {
            assert!((s3.velocity[i] - 2.5 * s1.velocity[i] - s2.velocity[i]).abs() < 1e-9);
        }
        let bu = sys.b_full.matvec(&s1.velocity);
        assert!(bu.iter().all(|v| v.abs() < 1e-9));
        let mean: f64 = s1.pressure.iter().zip(&sys.mean).map(|(p, m)| p * m).sum();
        assert!(mean.abs() < 1e-12);
        assert!(s1.residual <= 1e-9);
    }

    #[test]
    fn infsup_constant_weight_invariance() {
        let m = Mesh::structured(Pattern::CrissCross, 4, Rect::unit()).unwrap();
        let plain = infsup_beta(&m, ElementPair::TaylorHood, None).unwrap();
        let scaled = infsup_beta(&m, ElementPair::TaylorHood, Some(&WeightSpec::constant(3.7))).unwrap();
        assert!(plain.beta > 0.05);
        assert!((plain.beta - scaled.beta).abs() < 1e-10);
    }

    #[test]
    fn infsup_is_scale_invariant() {
        let a = Mesh::structured(Pattern::RightDiagonal, 4, Rect::unit()).unwrap();
        let b = Mesh::structured(Pattern::RightDiagonal, 4, Rect::new(0.0, 0.0, 2.0, 2.0).unwrap()).unwrap();
        let ba = infsup_beta(&a, ElementPair::Mini, None).unwrap().beta;
        let bb = infsup_beta(&b, ElementPair::Mini, None).unwrap().beta;
        assert!((ba - bb).abs() < 1e-10);
    }
}
