use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generator::{build_generator, GeneratorMatrix};
use crate::dynamics::ModelParams;
use crate::error::{invalid, Result};

/// Largest `Λ Δ` used in one uniformization step.
const MAX_STEP_MASS: f64 = 400.0;
/// Poisson tail mass left out of each step.
const TAIL_MASS: f64 = 1e-13;
/// Hard cap on the number of Poisson terms per step.
const MAX_TERMS: usize = 10_000;
/// Below this many states the maximum over initial states is exhaustive.
pub const EXHAUSTIVE_STATES: usize = 1 << 12;

/// Evolves row distributions under `e^{tQ}` by uniformization.
pub struct Propagator<'a> {
    generator: &'a GeneratorMatrix,
    rate: f64,
    /// Upper bound on the total truncation error accumulated so far.
    pub truncation: f64,
}

impl<'a> Propagator<'a> {
    pub fn new(generator: &'a GeneratorMatrix) -> Self {
        Self {
            generator,
            rate: generator.uniformization_rate(),
            truncation: 0.0,
        }
    }

    /// `μ ← μ P`, with `P = I + Q / Λ`.
    fn step(&self, mu: &[f64], out: &mut [f64]) {
        self.generator.apply_left(mu, out);
        for (o, &m) in out.iter_mut().zip(mu) {
            *o = m + *o / self.rate;
        }
    }

    /// `μ ← μ e^{tQ}`.
    pub fn evolve(&mut self, mu: &mut Vec<f64>, t: f64) -> Result<()> {
        if !(t >= 0.0) {
            return invalid("time must be non-negative");
        }
        if t == 0.0 {
            return Ok(());
        }
        let steps = (self.rate * t / MAX_STEP_MASS).ceil().max(1.0) as usize;
        let dt = t / steps as f64;
        let lam = self.rate * dt;
        let n = mu.len();
        let mut term = vec![0.0; n];
        let mut next = vec![0.0; n];
        let mut acc = vec![0.0; n];
        for _ in 0..steps {
            let mut w = (-lam).exp();
            let mut mass = w;
            term.copy_from_slice(mu);
            for (a, &x) in acc.iter_mut().zip(term.iter()) {
                *a = w * x;
            }
            let mut k = 0;
            while 1.0 - mass > TAIL_MASS || (k as f64) < lam {
                k += 1;
                if k > MAX_TERMS {
                    return invalid("uniformization did not converge within the term cap");
                }
                self.step(&term, &mut next);
                std::mem::swap(&mut term, &mut next);
                w *= lam / k as f64;
                mass += w;
                for (a, &x) in acc.iter_mut().zip(term.iter()) {
                    *a += w * x;
                }
            }
            self.truncation += (1.0 - mass).max(0.0);
            std::mem::swap(mu, &mut acc);
        }
        Ok(())
    }
}

pub fn total_variation(mu: &[f64], nu: &[f64]) -> f64 {
    0.5 * mu.iter().zip(nu).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `d_L(t)` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TVCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Whether the maximum ran over every initial state. Otherwise the
    /// values are a lower bound on `d_L`, taken over [`candidate_states`].
    pub exhaustive: bool,
    pub initial_states: usize,
    pub truncation_error: f64,
}

impl TVCurve {
    /// First grid time with `d_L(t) <= threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.values)
            .find(|(_, &v)| v <= threshold)
            .map(|(&t, _)| t)
    }

    pub fn is_non_increasing(&self, slack: f64) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + slack)
    }
}

/// All-healthy, all-infected, and a single infection at the far corner.
pub fn candidate_states(sites: usize) -> Vec<usize> {
    let all = (1usize << sites) - 1;
    let mut c = vec![all, 0, all ^ (1 << (sites - 1))];
    c.sort_unstable();
    c.dedup();
    c
}

fn initial_set(generator: &GeneratorMatrix) -> (Vec<usize>, bool) {
    let n = generator.states();
    if n < EXHAUSTIVE_STATES {
        ((0..n).collect(), true)
    } else {
        (candidate_states(generator.sites), false)
    }
}

fn point_mass(n: usize, s: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[s] = 1.0;
    v
}

pub fn tv_curve(params: &ModelParams, times: &[f64]) -> Result<TVCurve> {
    let generator = build_generator(params)?;
    tv_curve_of(&generator, times)
}

pub fn tv_curve_of(generator: &GeneratorMatrix, times: &[f64]) -> Result<TVCurve> {
    if times.iter().any(|t| !(*t >= 0.0)) {
        return invalid("times must be non-negative");
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let pi = generator.stationary();
    let (initial, exhaustive) = initial_set(generator);
    let n = generator.states();
    let per_state: Vec<Result<(Vec<f64>, f64)>> = initial
        .par_iter()
        .map(|&s| {
            let mut prop = Propagator::new(generator);
            let mut mu = point_mass(n, s);
            let mut now = 0.0;
            let mut out = vec![0.0; times.len()];
            for &k in &order {
                prop.evolve(&mut mu, times[k] - now)?;
                now = times[k];
                out[k] = total_variation(&mu, &pi);
            }
            Ok((out, prop.truncation))
        })
        .collect();
    let mut values = vec![0.0f64; times.len()];
    let mut truncation = 0.0f64;
    for r in per_state {
        let (v, e) = r?;
        for (a, b) in values.iter_mut().zip(v) {
            *a = a.max(b);
        }
        truncation = truncation.max(e);
    }
    Ok(TVCurve {
        times: times.to_vec(),
        values,
        exhaustive,
        initial_states: initial.len(),
        truncation_error: truncation,
    })
}

/// `T_mix = inf{t : d_L(t) <= threshold}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingTime {
    pub time: f64,
    pub threshold: f64,
    pub exhaustive: bool,
    pub initial_states: usize,
    pub truncation_error: f64,
}

const MAX_MIX_TIME: f64 = 1e5;
const RELATIVE_TOLERANCE: f64 = 1e-6;

pub fn t_mix(params: &ModelParams, threshold: f64) -> Result<MixingTime> {
    let generator = build_generator(params)?;
    t_mix_of(&generator, threshold)
}

pub fn t_mix_of(generator: &GeneratorMatrix, threshold: f64) -> Result<MixingTime> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return invalid("threshold must lie in (0, 1)");
    }
    let pi = generator.stationary();
    let (initial, exhaustive) = initial_set(generator);
    let n = generator.states();
    let mut truncation = 0.0f64;
    let mut advance = |dists: &mut Vec<Vec<f64>>, dt: f64| -> Result<f64> {
        let out: Vec<Result<(f64, f64)>> = dists
            .par_iter_mut()
            .map(|mu| {
                let mut prop = Propagator::new(generator);
                prop.evolve(mu, dt)?;
                Ok((total_variation(mu, &pi), prop.truncation))
            })
            .collect();
        let mut d = 0.0f64;
        for r in out {
            let (tv, e) = r?;
            d = d.max(tv);
            truncation += e;
        }
        Ok(d)
    };
    let start: Vec<Vec<f64>> = initial.iter().map(|&s| point_mass(n, s)).collect();
    let d0 = start.iter().map(|mu| total_variation(mu, &pi)).fold(0.0, f64::max);
    if d0 <= threshold {
        return Ok(MixingTime {
            time: 0.0,
            threshold,
            exhaustive,
            initial_states: initial.len(),
            truncation_error: 0.0,
        });
    }
    // Bracket, keeping the distributions at the lower end.
    let mut lo_dists = start;
    let mut lo = 0.0;
    let mut step = 0.25;
    let mut hi;
    loop {
        let mut trial = lo_dists.clone();
        let d = advance(&mut trial, step)?;
        if d <= threshold {
            hi = lo + step;
            break;
        }
        lo += step;
        lo_dists = trial;
        step = (step * 1.5).min(8.0);
        if lo > MAX_MIX_TIME {
            return invalid("distance did not reach the threshold within the time cap");
        }
    }
    while hi - lo > RELATIVE_TOLERANCE * hi {
        let mid = 0.5 * (lo + hi);
        let mut trial = lo_dists.clone();
        if advance(&mut trial, mid - lo)? <= threshold {
            hi = mid;
        } else {
            lo = mid;
            lo_dists = trial;
        }
    }
    Ok(MixingTime {
        time: hi,
        threshold,
        exhaustive,
        initial_states: initial.len(),
        truncation_error: truncation,
    })
}
