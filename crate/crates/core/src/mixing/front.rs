//! Front speeds from the all-healthy start.

use serde::{Deserialize, Serialize};

use crate::constants::cutoff_window;
use crate::dynamics::{default_infection_cap, Configuration, Flavor, ModelParams, SimOptions, Simulator, StopRule};
use crate::error::{invalid, Result};
use crate::fpp::fpp_times;
use crate::replicas::map_replicas;
use crate::source::RandomSource;
use crate::stats::{linear_fit, EstimateCI, LinearFit, Moments};

pub const DEFAULT_RHO_SCALES: [usize; 8] = [200, 400, 600, 800, 1000, 1200, 1400, 1600];

/// Slope of `E[τ(n)]` against `n` for the one-dimensional chain, which is
/// the inverse front speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub p: f64,
    pub scales: Vec<usize>,
    pub reps: usize,
    /// Mean of the per-replica least-squares slopes.
    pub rho: EstimateCI,
    pub intercept: EstimateCI,
    pub mean_times: Vec<EstimateCI>,
    /// Fit of the mean times; its residuals drive `nonlinear`.
    pub pooled: Option<LinearFit>,
    /// Some mean time sits more than four standard errors off the pooled line.
    pub nonlinear: bool,
    pub censored: usize,
}

/// `τ(n)` for every `n` in `scales`, from all-healthy in `d = 1`.
fn chain_times(p: f64, scales: &[usize], source: &RandomSource) -> Result<(Vec<f64>, bool)> {
    let side = *scales.iter().max().expect("nonempty");
    let params = ModelParams::new(1, Flavor::East, p, side)?;
    if p == 0.0 {
        let pt = fpp_times(&params, source)?;
        return Ok((scales.iter().map(|&n| pt.times[n]).collect(), false));
    }
    let options = SimOptions {
        tracked: scales.to_vec(),
        ..SimOptions::default()
    };
    let mut sim = Simulator::new(&params, &Configuration::all_healthy(side + 1), source, options)?;
    let cap = default_infection_cap(&params, &[side as i64]);
    sim.run(cap, StopRule::TrackedInfected);
    let times: Vec<f64> = (0..scales.len()).map(|k| sim.infection_time_of(k)).collect();
    let censored = times.iter().any(|t| t.is_infinite());
    Ok((times.into_iter().map(|t| t.min(cap)).collect(), censored))
}

pub fn estimate_rho(p: f64, scales: &[usize], reps: usize, source: &RandomSource) -> Result<RhoEstimate> {
    if scales.len() < 2 {
        return invalid("need at least two scales");
    }
    if reps < 2 {
        return invalid("need at least two replicas");
    }
    if !(0.0..1.0).contains(&p) {
        return invalid("p must lie in [0, 1)");
    }
    let xs: Vec<f64> = scales.iter().map(|&n| n as f64).collect();
    let runs = map_replicas(source, reps, |_, src| chain_times(p, scales, &src))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let censored = runs.iter().filter(|r| r.1).count();
    let mut slopes = Moments::default();
    let mut intercepts = Moments::default();
    let mut per_scale = vec![Moments::default(); scales.len()];
    for (times, _) in &runs {
        let fit = linear_fit(&xs, times, None).expect("two or more scales");
        slopes.push(fit.slope);
        intercepts.push(fit.intercept);
        for (m, &t) in per_scale.iter_mut().zip(times) {
            m.push(t);
        }
    }
    let mean_times: Vec<EstimateCI> = per_scale.iter().map(Moments::estimate).collect();
    let ys: Vec<f64> = mean_times.iter().map(|e| e.estimate).collect();
    let pooled = linear_fit(&xs, &ys, None);
    let nonlinear = pooled.is_some_and(|f| {
        xs.iter()
            .zip(&mean_times)
            .any(|(&x, e)| (e.estimate - (f.slope * x + f.intercept)).abs() > 4.0 * e.stderr)
    });
    Ok(RhoEstimate {
        p,
        scales: scales.to_vec(),
        reps,
        rho: slopes.estimate(),
        intercept: intercepts.estimate(),
        mean_times,
        pooled,
        nonlinear,
        censored,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontRow {
    /// `diagonal` (`n e*`) or `axis` (`n e_1`).
    pub direction: String,
    /// `τ / n`.
    pub speed: EstimateCI,
    pub censored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontProfile {
    pub params: ModelParams,
    pub n: usize,
    pub rows: Vec<FrontRow>,
    /// Mean axis time over mean diagonal time.
    pub separation: f64,
    /// Frequency of `τ(n e*) >= ρ n + d (n ∨ L)^{2/3}` with `L = n`, when
    /// `ρ` is supplied.
    pub late_frequency: Option<EstimateCI>,
}

struct FrontSample {
    diagonal: f64,
    diagonal_censored: bool,
    axis: f64,
    axis_censored: bool,
}

fn front_sample(params: &ModelParams, n: usize, source: &RandomSource) -> Result<FrontSample> {
    let d = params.dim;
    let box_params = params.with_side(n);
    let corner = vec![n as i64; d];
    let axis_params = ModelParams::new(1, params.flavor, params.p, n)?;
    if params.p == 0.0 {
        let full = fpp_times(&box_params, source)?;
        let line = fpp_times(&axis_params, source)?;
        return Ok(FrontSample {
            diagonal: full.times[full.lattice.len() - 1],
            diagonal_censored: false,
            axis: line.times[n],
            axis_censored: false,
        });
    }
    let run = |p: &ModelParams, target: usize, x: &[i64]| -> Result<(f64, bool)> {
        let options = SimOptions {
            tracked: vec![target],
            ..SimOptions::default()
        };
        let lattice = p.lattice();
        let mut sim = Simulator::new(p, &Configuration::all_healthy(lattice.len()), source, options)?;
        let cap = default_infection_cap(p, x);
        sim.run(cap, StopRule::TrackedInfected);
        let t = sim.infection_time_of(0);
        Ok(if t.is_finite() { (t, false) } else { (cap, true) })
    };
    let diag_index = box_params.lattice().len() - 1;
    let (diagonal, diagonal_censored) = run(&box_params, diag_index, &corner)?;
    // The line {x_2 = .. = x_d = 0} evolves as the one-dimensional chain
    // driven by the same substreams.
    let (axis, axis_censored) = run(&axis_params, n, &[n as i64])?;
    Ok(FrontSample {
        diagonal,
        diagonal_censored,
        axis,
        axis_censored,
    })
}

pub fn front_profile(
    params: &ModelParams,
    n: usize,
    reps: usize,
    source: &RandomSource,
    rho: Option<f64>,
) -> Result<FrontProfile> {
    params.validate()?;
    if n == 0 || reps < 2 {
        return invalid("need n >= 1 and reps >= 2");
    }
    let samples = map_replicas(source, reps, |_, src| front_sample(params, n, &src))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let nf = n as f64;
    let diag: Moments = samples.iter().map(|s| s.diagonal / nf).collect();
    let axis: Moments = samples.iter().map(|s| s.axis / nf).collect();
    let rows = vec![
        FrontRow {
            direction: "diagonal".into(),
            speed: diag.estimate(),
            censored: samples.iter().filter(|s| s.diagonal_censored).count(),
        },
        FrontRow {
            direction: "axis".into(),
            speed: axis.estimate(),
            censored: samples.iter().filter(|s| s.axis_censored).count(),
        },
    ];
    let late_frequency = rho.map(|r| {
        let bound = r * nf + params.dim as f64 * cutoff_window(nf);
        let hits = samples.iter().filter(|s| s.diagonal >= bound).count();
        EstimateCI::proportion(hits as u64, reps as u64)
    });
    Ok(FrontProfile {
        params: params.with_side(n),
        n,
        separation: axis.mean / diag.mean,
        rows,
        late_frequency,
    })
}
