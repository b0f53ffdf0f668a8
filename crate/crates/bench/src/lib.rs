//! Fixed workloads shared by the benchmarks.

use eastlab_core::dynamics::{simulate, Configuration};
use eastlab_core::fpp::fpp_times;
use eastlab_core::mixing::{build_generator, tv_curve_of};
use eastlab_core::percolation::SlabGeometry;
use eastlab_core::{Flavor, ModelParams, RandomSource};

/// Simulate from all-healthy up to `horizon`; returns the number of flips.
pub fn simulate_box(dim: usize, flavor: Flavor, p: f64, side: usize, horizon: f64, seed: u64) -> u64 {
    let params = ModelParams::new(dim, flavor, p, side).expect("valid parameters");
    let init = Configuration::all_healthy(params.lattice().len());
    simulate(&params, &init, horizon, &RandomSource::new(seed), &[])
        .expect("simulation succeeds")
        .updates
}

/// Passage time to the far corner at `p = 0`.
pub fn corner_passage(dim: usize, flavor: Flavor, side: usize, seed: u64) -> f64 {
    let params = ModelParams::new(dim, flavor, 0.0, side).expect("valid parameters");
    let pt = fpp_times(&params, &RandomSource::new(seed)).expect("p = 0");
    pt.times[pt.lattice.len() - 1]
}

/// Slab-crossing threshold of one bond sample.
pub fn slab_threshold(n: usize, seed: u64) -> f64 {
    let g = SlabGeometry::new(2, n, 0.2).expect("valid geometry");
    let s = g
        .sample(Flavor::ModifiedEast, 0.0, &mut RandomSource::new(seed).aux(0))
        .expect("fits");
    g.threshold(&s).expect("inside the box")
}

/// Total-variation curve on a small box.
pub fn tv_grid(dim: usize, side: usize, p: f64, points: usize) -> f64 {
    let params = ModelParams::new(dim, Flavor::East, p, side).expect("valid parameters");
    let generator = build_generator(&params).expect("small box");
    let times: Vec<f64> = (0..points).map(|k| k as f64 * 0.5).collect();
    tv_curve_of(&generator, &times).expect("converges").values[points - 1]
}
