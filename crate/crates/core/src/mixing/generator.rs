use serde::{Deserialize, Serialize};

use crate::dynamics::{rate_at, Configuration, ModelParams};
use crate::error::{Error, Result};

/// Default cap on the number of sites for exact computations (`2^20` states).
pub const DEFAULT_CAP_LOG2: usize = 20;

/// Sparse generator over all configurations of the box. State `s` is the
/// configuration whose vertex `i` has state bit `i` of `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMatrix {
    pub params: ModelParams,
    pub sites: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    rates: Vec<f64>,
    diag: Vec<f64>,
}

pub fn build_generator(params: &ModelParams) -> Result<GeneratorMatrix> {
    build_generator_capped(params, DEFAULT_CAP_LOG2)
}

pub fn build_generator_capped(params: &ModelParams, cap_log2: usize) -> Result<GeneratorMatrix> {
    params.validate()?;
    let lattice = params.lattice();
    let sites = lattice.len();
    if sites > cap_log2 || sites > 31 {
        return Err(Error::StateSpaceTooLarge {
            sites,
            cap_log2: cap_log2.min(31),
        });
    }
    let n = 1usize << sites;
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(n * sites);
    let mut rates = Vec::with_capacity(n * sites);
    let mut diag = Vec::with_capacity(n);
    let mut states = vec![0u8; sites];
    row_ptr.push(0);
    for s in 0..n {
        for (i, st) in states.iter_mut().enumerate() {
            *st = ((s >> i) & 1) as u8;
        }
        let mut out = 0.0;
        for x in 0..sites {
            let c = rate_at(&lattice, params.flavor, &states, x);
            if c == 0 {
                continue;
            }
            let r = if states[x] == 1 {
                c as f64 * (1.0 - params.p)
            } else {
                c as f64 * params.p
            };
            if r > 0.0 {
                cols.push((s ^ (1 << x)) as u32);
                rates.push(r);
                out += r;
            }
        }
        diag.push(-out);
        row_ptr.push(cols.len());
    }
    Ok(GeneratorMatrix {
        params: *params,
        sites,
        row_ptr,
        cols,
        rates,
        diag,
    })
}

impl GeneratorMatrix {
    pub fn states(&self) -> usize {
        self.diag.len()
    }

    pub fn nonzeros(&self) -> usize {
        self.cols.len()
    }

    /// Off-diagonal entries of row `s`.
    pub fn row(&self, s: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[s]..self.row_ptr[s + 1];
        self.cols[r.clone()]
            .iter()
            .zip(&self.rates[r])
            .map(|(&c, &q)| (c as usize, q))
    }

    pub fn diagonal(&self, s: usize) -> f64 {
        self.diag[s]
    }

    pub fn entry(&self, from: usize, to: usize) -> f64 {
        if from == to {
            return self.diag[from];
        }
        self.row(from).find(|&(c, _)| c == to).map_or(0.0, |(_, q)| q)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.states();
        (0..n).map(|s| (0..n).map(|t| self.entry(s, t)).collect()).collect()
    }

    /// Largest `|row sum|`.
    pub fn row_sum_error(&self) -> f64 {
        (0..self.states())
            .map(|s| (self.row(s).map(|(_, q)| q).sum::<f64>() + self.diag[s]).abs())
            .fold(0.0, f64::max)
    }

    /// Product Bernoulli(`p`) measure over the box.
    pub fn stationary(&self) -> Vec<f64> {
        let p = self.params.p;
        (0..self.states())
            .map(|s| {
                let healthy = (s as u64).count_ones() as i32;
                p.powi(healthy) * (1.0 - p).powi(self.sites as i32 - healthy)
            })
            .collect()
    }

    /// `max |π(ω) q(ω,ω') - π(ω') q(ω',ω)|` over all pairs.
    pub fn detailed_balance_violation(&self, pi: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for s in 0..self.states() {
            for (t, q) in self.row(s) {
                worst = worst.max((pi[s] * q - pi[t] * self.entry(t, s)).abs());
            }
        }
        worst
    }

    /// `max_j |(π Q)_j|`.
    pub fn stationarity_residual(&self, pi: &[f64]) -> f64 {
        let mut out = vec![0.0; self.states()];
        self.apply_left(pi, &mut out);
        out.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `out = μ Q`.
    pub fn apply_left(&self, mu: &[f64], out: &mut [f64]) {
        for (s, o) in out.iter_mut().enumerate() {
            *o = mu[s] * self.diag[s];
        }
        for (s, &m) in mu.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            for (t, q) in self.row(s) {
                out[t] += m * q;
            }
        }
    }

    /// Uniform bound on the total exit rate: sites times the largest
    /// per-vertex rate.
    pub fn uniformization_rate(&self) -> f64 {
        (self.sites as f64 * self.params.flavor.max_rate(self.params.dim) as f64).max(1.0)
    }

    pub fn configuration(&self, s: usize) -> Configuration {
        Configuration::from_mask(s as u64, self.sites)
    }
}
