use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mixfem::assembly::{assemble_block_matrix, AssemblyOptions};
use mixfem::forms::extract_blocks;
use mixfem::study::{PoissonLm, StokesBrinkman};

fn poisson_lm(c: &mut Criterion) {
    let mut group = c.benchmark_group("poisson_lm_3d");
    group.sample_size(10);
    for n in [8, 12] {
        let problem = PoissonLm::new(3, n, 1).unwrap();
        let blocks = extract_blocks(&problem.a).unwrap();
        for parallel in [false, true] {
            let opts = AssemblyOptions {
                parallel,
                quadrature_degree: None,
            };
            let label = if parallel { "parallel" } else { "sequential" };
            group.bench_with_input(BenchmarkId::new(label, n), &blocks, |b, blocks| {
                b.iter(|| assemble_block_matrix(blocks, &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn stokes_brinkman(c: &mut Criterion) {
    let mut group = c.benchmark_group("stokes_brinkman_p3p2");
    group.sample_size(10);
    let problem = StokesBrinkman::new(16, 2).unwrap();
    let blocks = extract_blocks(&problem.a).unwrap();
    for parallel in [false, true] {
        let opts = AssemblyOptions {
            parallel,
            quadrature_degree: None,
        };
        let label = if parallel { "parallel" } else { "sequential" };
        group.bench_function(label, |b| b.iter(|| assemble_block_matrix(&blocks, &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, poisson_lm, stokes_brinkman);
criterion_main!(benches);
