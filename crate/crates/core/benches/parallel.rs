//! Single-threaded versus default rayon pool on the data-parallel kernels.
//! Build with `--no-default-features` to time the plain sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use ugpf::cluster::truncated_cluster_expansion;
use ugpf::exact::{z_coeffs_sat, z_coeffs_subgraph};
use ugpf::instance::gen_random_regular;
use ugpf::zerofree::check_forward_invariant;
use ugpf::Budget;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool");
    let all = rayon::ThreadPoolBuilder::new().build().expect("pool");
    vec![("1-thread", one), ("default", all)]
}

fn kernels(c: &mut Criterion) {
    let b = Budget::default();
    let brute = gen_random_regular(10, 3, 4, 1).expect("instance");
    let subgraph = gen_random_regular(12, 3, 3, 2).expect("instance");
    let cluster = gen_random_regular(16, 3, 50, 3).expect("instance");

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("z_coeffs_sat n=10 k=4", name), &pool, |bench, pool| {
            bench.iter(|| pool.install(|| z_coeffs_sat(&brute, &b).expect("within budget")))
        });
        group.bench_with_input(BenchmarkId::new("z_coeffs_subgraph |E|=18", name), &pool, |bench, pool| {
            bench.iter(|| pool.install(|| z_coeffs_subgraph(&subgraph, 19, &b).expect("within budget")))
        });
        group.bench_with_input(BenchmarkId::new("cluster expansion m=4", name), &pool, |bench, pool| {
            bench.iter(|| pool.install(|| truncated_cluster_expansion(&cluster, Complex64::new(1.01, 0.0), 4, &b)))
        });
        group.bench_with_input(BenchmarkId::new("forward invariant 2000", name), &pool, |bench, pool| {
            bench.iter(|| pool.install(|| check_forward_invariant(100, 10, 5, 2000, 0).expect("valid")))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
