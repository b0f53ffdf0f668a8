use criterion::{criterion_group, criterion_main, Criterion};
use eastlab_bench::{corner_passage, simulate_box, slab_threshold, tv_grid};
use eastlab_core::Flavor;
use std::hint::black_box;

fn dynamics(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate");
    for flavor in Flavor::ALL {
        g.bench_function(format!("{flavor}/d2_L40_p0.05_t30"), |b| {
            b.iter(|| simulate_box(2, flavor, 0.05, 40, black_box(30.0), 1))
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    c.bench_function("fpp/bond_d2_L200", |b| {
        b.iter(|| corner_passage(2, Flavor::ModifiedEast, black_box(200), 3))
    });
}

fn percolation(c: &mut Criterion) {
    c.bench_function("slab_threshold/bond_n128", |b| {
        b.iter(|| slab_threshold(black_box(128), 5))
    });
}

fn mixing(c: &mut Criterion) {
    c.bench_function("tv_curve/d1_L9", |b| b.iter(|| tv_grid(1, black_box(9), 0.5, 20)));
}

criterion_group!(benches, dynamics, oracle, percolation, mixing);
criterion_main!(benches);
