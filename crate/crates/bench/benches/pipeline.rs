use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use stokes_lab::assembly::rhs_projection;
use stokes_lab::{assemble, infsup_beta, ElementPair, ExactSolution, Integrator, Mesh, Pattern, Rect, SaddleSolver, WeightSpec};

fn mesh(n: usize) -> Mesh {
    Mesh::structured(Pattern::CrissCross, n, Rect::unit()).unwrap()
}

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble");
    let w = WeightSpec::dist_point([0.5, 0.5], 1.0);
    for n in [8, 16] {
        let m = mesh(n);
        for pair in [ElementPair::Mini, ElementPair::TaylorHood] {
            g.bench_with_input(BenchmarkId::new(format!("{pair}"), n), &m, |b, m| b.iter(|| assemble(m, pair, None).unwrap()));
            g.bench_with_input(BenchmarkId::new(format!("{pair}-weighted"), n), &m, |b, m| b.iter(|| assemble(m, pair, Some(&w)).unwrap()));
        }
    }
    g.finish();
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("saddle_solve");
    g.sample_size(10);
    let exact = ExactSolution::SmoothCurl;
    for n in [8, 16, 32] {
        let m = mesh(n);
        let sys = assemble(&m, ElementPair::TaylorHood, None).unwrap();
        let load = rhs_projection(&m, &sys.dofs, &exact, &Integrator::default()).unwrap();
        g.bench_with_input(BenchmarkId::new("factor+solve", n), &n, |b, _| {
            b.iter(|| SaddleSolver::new(&sys).unwrap().solve(&sys, &load).unwrap())
        });
    }
    g.finish();
}

fn infsup(c: &mut Criterion) {
    let mut g = c.benchmark_group("infsup");
    g.sample_size(10);
    for n in [4, 8, 16] {
        let m = mesh(n);
        g.bench_with_input(BenchmarkId::new("th", n), &m, |b, m| b.iter(|| infsup_beta(m, ElementPair::TaylorHood, None).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, assembly, solve, infsup);
criterion_main!(benches);
