use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use eigbound::manifold::{assemble_laplacian, first_nontrivial_eigenvalue, graph_diameter, EigenConfig};
use eigbound::plap::solve_mu_p;
use eigbound::sl::{solve_mu_fd, solve_mu_shooting, FdConfig, ShootingConfig};
use eigbound_bench::{icosphere, p_problems, regular_problems, sphere_problem};

fn shooting(c: &mut Criterion) {
    let mut group = c.benchmark_group("shooting");
    for problem in regular_problems() {
        let id = format!("n{}_k{}_d{}", problem.n, problem.kappa, problem.diameter);
        group.bench_with_input(BenchmarkId::from_parameter(id), &problem, |b, p| {
            b.iter(|| solve_mu_shooting(black_box(p), &ShootingConfig::default()).unwrap().mu)
        });
    }
    group.finish();
}

fn finite_differences(c: &mut Criterion) {
    let mut group = c.benchmark_group("finite_differences");
    group.sample_size(20);
    for cells in [512, 2048] {
        let config = FdConfig {
            grid_points: cells,
            ..FdConfig::default()
        };
        let problem = sphere_problem(3);
        group.bench_with_input(BenchmarkId::new("sphere_n3", cells), &config, |b, cfg| {
            b.iter(|| solve_mu_fd(black_box(&problem), cfg).unwrap().mu)
        });
    }
    group.finish();
}

fn p_laplacian(c: &mut Criterion) {
    let mut group = c.benchmark_group("mu_p");
    group.sample_size(20);
    for problem in p_problems() {
        group.bench_with_input(BenchmarkId::from_parameter(problem.p), &problem, |b, p| {
            b.iter(|| solve_mu_p(black_box(p), &ShootingConfig::with_tolerance(1e-9)).unwrap().mu)
        });
    }
    group.finish();
}

fn icosphere_spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("icosphere");
    group.sample_size(10);
    for subdiv in [3, 4] {
        let mesh = icosphere(subdiv);
        let lap = assemble_laplacian(&mesh).unwrap();
        group.bench_with_input(BenchmarkId::new("lambda1", subdiv), &lap, |b, lap| {
            b.iter(|| {
                first_nontrivial_eigenvalue(&lap.stiffness, &lap.mass, &EigenConfig::default())
                    .unwrap()
                    .lambda1
            })
        });
        group.bench_with_input(BenchmarkId::new("graph_diameter", subdiv), &mesh, |b, m| {
            b.iter(|| graph_diameter(black_box(m)))
        });
    }
    group.finish();
}

criterion_group!(benches, shooting, finite_differences, p_laplacian, icosphere_spectrum);
criterion_main!(benches);
