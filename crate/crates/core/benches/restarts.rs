use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use produal::picalc::{pi_c_bracket, PiOptions};
use produal::{BilinearKind, BilinearMap, NormedSpace};

fn ell(n: usize, p: f64) -> Arc<NormedSpace> {
    Arc::new(NormedSpace::lp(n, p).unwrap())
}

fn restarts(c: &mut Criterion) {
    let map = BilinearMap::new(BilinearKind::Hadamard, ell(4, 1.5), ell(4, 3.0), ell(4, 2.0)).unwrap();
    let h = [1.0, -0.5, 2.0, 0.25];
    let opts = PiOptions { restarts: 64, ..PiOptions::default() };
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut g = c.benchmark_group("pi_c_bracket");
    g.sample_size(20);
    g.bench_function("one_thread", |b| b.iter(|| single.install(|| pi_c_bracket(&map, &h, &opts).unwrap())));
    g.bench_function("default_pool", |b| b.iter(|| pi_c_bracket(&map, &h, &opts).unwrap()));
    g.finish();
}

criterion_group!(benches, restarts);
criterion_main!(benches);
