//! East and Modified East dynamics on the box `Λ_L` with minimal boundary
//! condition (only the origin is unconstrained).

mod good_set;
mod simulator;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{sup_norm, LatticeBox, Vertex};
use crate::source::RandomSource;

pub use good_set::{good_set_window, in_good_set};
pub use simulator::{EdgeKeying, Flip, SimOptions, Simulator, StopRule};

/// Which graphical construction drives the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    /// Site clocks; rate is the indicator of an infection behind `x`.
    East,
    /// Edge clocks; rate is the number of infections behind `x`.
    ModifiedEast,
}

impl Flavor {
    pub const ALL: [Flavor; 2] = [Flavor::East, Flavor::ModifiedEast];

    /// Largest per-vertex rate in dimension `dim`.
    pub fn max_rate(self, dim: usize) -> u32 {
        match self {
            Flavor::East => 1,
            Flavor::ModifiedEast => dim as u32,
        }
    }

    /// Short tag used in file names and tables: `s` (site) or `b` (bond).
    pub fn tag(self) -> &'static str {
        match self {
            Flavor::East => "site",
            Flavor::ModifiedEast => "bond",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::East => "east",
            Flavor::ModifiedEast => "modified-east",
        })
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "east" | "site" | "s" => Ok(Flavor::East),
            "modified-east" | "modified" | "bond" | "b" => Ok(Flavor::ModifiedEast),
            other => invalid(format!("unknown flavor {other:?} (expected site|bond)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub dim: usize,
    pub flavor: Flavor,
    /// Probability that a resample produces a healthy vertex.
    pub p: f64,
    pub side: usize,
}

impl ModelParams {
    pub fn new(dim: usize, flavor: Flavor, p: f64, side: usize) -> Result<Self> {
        let params = Self { dim, flavor, p, side };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return invalid("dimension must be at least 1");
        }
        if !(0.0..1.0).contains(&self.p) {
            return invalid(format!("p = {} must lie in [0, 1)", self.p));
        }
        LatticeBox::new(self.dim, self.side).map(|_| ())
    }

    pub fn lattice(&self) -> LatticeBox {
        LatticeBox::new(self.dim, self.side).expect("validated")
    }

    pub fn with_side(&self, side: usize) -> Self {
        Self { side, ..*self }
    }

    pub fn with_p(&self, p: f64) -> Self {
        Self { p, ..*self }
    }
}

/// Vertex states over `Λ_L`: 0 = infected, 1 = healthy.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    states: Vec<u8>,
}

impl Configuration {
    pub fn all_healthy(len: usize) -> Self {
        Self { states: vec![1; len] }
    }

    pub fn all_infected(len: usize) -> Self {
        Self { states: vec![0; len] }
    }

    pub fn from_states(states: Vec<u8>) -> Result<Self> {
        if let Some(bad) = states.iter().find(|&&s| s > 1) {
            return invalid(format!("vertex state {bad} is not 0 or 1"));
        }
        Ok(Self { states })
    }

    /// Product Bernoulli(`p`) configuration (healthy with probability `p`).
    pub fn sample_product<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> Self {
        Self {
            states: (0..len).map(|_| u8::from(rng.random::<f64>() < p)).collect(),
        }
    }

    /// Configuration of `lattice` whose infected set is `infected`.
    pub fn with_infections(lattice: &LatticeBox, infected: &[Vertex]) -> Result<Self> {
        let mut c = Self::all_healthy(lattice.len());
        for x in infected {
            c.states[lattice.encode_checked(x)?] = 0;
        }
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[u8] {
        &self.states
    }

    pub fn get(&self, index: usize) -> u8 {
        self.states[index]
    }

    pub fn is_infected(&self, index: usize) -> bool {
        self.states[index] == 0
    }

    pub fn set(&mut self, index: usize, state: u8) {
        assert!(state <= 1);
        self.states[index] = state;
    }

    pub fn infected_count(&self) -> usize {
        self.states.iter().filter(|&&s| s == 0).count()
    }

    /// Encode as a bitmask (bit `i` = state of vertex `i`); needs `len <= 64`.
    pub fn to_mask(&self) -> u64 {
        assert!(self.len() <= 64);
        self.states
            .iter()
            .enumerate()
            .fold(0, |m, (i, &s)| m | (u64::from(s) << i))
    }

    pub fn from_mask(mask: u64, len: usize) -> Self {
        Self {
            states: (0..len).map(|i| ((mask >> i) & 1) as u8).collect(),
        }
    }
}

/// Rate of vertex `index` given the states of the box.
#[inline]
pub(crate) fn rate_at(lattice: &LatticeBox, flavor: Flavor, states: &[u8], index: usize) -> u32 {
    if index == 0 {
        return 1;
    }
    let infected_behind = (0..lattice.dim())
        .filter_map(|axis| lattice.pred(index, axis))
        .filter(|&y| states[y] == 0)
        .count() as u32;
    match flavor {
        Flavor::East => infected_behind.min(1),
        Flavor::ModifiedEast => infected_behind,
    }
}

/// Update rate `c_x(ω)` of vertex `x`; members of `U_x` outside the orthant
/// count as healthy.
pub fn transition_rate(params: &ModelParams, config: &Configuration, x: &[i64]) -> Result<u32> {
    let lattice = params.lattice();
    check_config(&lattice, config)?;
    let index = lattice.encode_checked(x)?;
    Ok(rate_at(&lattice, params.flavor, config.states(), index))
}

pub(crate) fn check_config(lattice: &LatticeBox, config: &Configuration) -> Result<()> {
    if config.len() != lattice.len() {
        return invalid(format!(
            "configuration has {} vertices, box has {}",
            config.len(),
            lattice.len()
        ));
    }
    Ok(())
}

/// Observables of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    /// Time at which the run stopped (the horizon unless a stop rule fired).
    pub end_time: f64,
    pub tracked: Vec<Vertex>,
    /// `τ(x)` per tracked vertex; `+∞` if not infected by `end_time`.
    pub infection_times: Vec<f64>,
    /// Time spent infected in `[0, end_time]` per tracked vertex.
    pub occupation_times: Vec<f64>,
    pub good_set_time: Option<f64>,
    /// Number of state changes.
    pub updates: u64,
    pub final_config: Configuration,
    pub flips: Option<Vec<Flip>>,
}

/// A time that may have hit its cap before the event occurred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensoredTime {
    pub time: f64,
    pub censored: bool,
}

fn tracked_indices(lattice: &LatticeBox, tracked: &[Vertex]) -> Result<Vec<usize>> {
    tracked.iter().map(|x| lattice.encode_checked(x)).collect()
}

/// Run the graphical construction up to `horizon`.
pub fn simulate(
    params: &ModelParams,
    initial: &Configuration,
    horizon: f64,
    source: &RandomSource,
    tracked: &[Vertex],
) -> Result<TrajectoryStats> {
    if !(horizon >= 0.0) {
        return invalid("horizon must be non-negative");
    }
    let lattice = params.lattice();
    let options = SimOptions {
        tracked: tracked_indices(&lattice, tracked)?,
        ..SimOptions::default()
    };
    let mut sim = Simulator::new(params, initial, source, options)?;
    sim.run(horizon, StopRule::Horizon);
    Ok(sim.into_stats())
}

/// Hard cap used by [`infection_time`] when none is given:
/// `10 (4 |x|_∞ + d max(L,1)^{2/3})`.
pub fn default_infection_cap(params: &ModelParams, x: &[i64]) -> f64 {
    let side = params.side.max(1) as f64;
    10.0 * (4.0 * sup_norm(x) as f64 + params.dim as f64 * side.powf(2.0 / 3.0))
}

/// `τ(x) = inf{t : ω_t(x) = 0}`; censored at `cap`.
pub fn infection_time(
    params: &ModelParams,
    initial: &Configuration,
    x: &[i64],
    source: &RandomSource,
    cap: Option<f64>,
) -> Result<CensoredTime> {
    let lattice = params.lattice();
    let target = lattice.encode_checked(x)?;
    let cap = cap.unwrap_or_else(|| default_infection_cap(params, x));
    let options = SimOptions {
        tracked: vec![target],
        ..SimOptions::default()
    };
    let mut sim = Simulator::new(params, initial, source, options)?;
    sim.run(cap, StopRule::TrackedInfected);
    let tau = sim.infection_time_of(0);
    Ok(if tau.is_finite() {
        CensoredTime {
            time: tau,
            censored: false,
        }
    } else {
        CensoredTime {
            time: cap,
            censored: true,
        }
    })
}

/// Lebesgue time in `[0, t]` during which `v` is infected.
pub fn occupation_time(
    params: &ModelParams,
    initial: &Configuration,
    v: &[i64],
    t: f64,
    source: &RandomSource,
) -> Result<f64> {
    let stats = simulate(params, initial, t, source, &[v.to_vec()])?;
    Ok(stats.occupation_times[0])
}

/// Hitting time of `Ω̂_L`: every axis-parallel run of `window` consecutive
/// vertices contains an infection.
pub fn good_set_hitting_time(
    params: &ModelParams,
    initial: &Configuration,
    window: usize,
    source: &RandomSource,
    cap: f64,
) -> Result<CensoredTime> {
    if window == 0 || window > params.side + 1 {
        return invalid(format!(
            "window {window} must lie in [1, L+1] = [1, {}]",
            params.side + 1
        ));
    }
    let options = SimOptions {
        good_set_window: Some(window),
        ..SimOptions::default()
    };
    let mut sim = Simulator::new(params, initial, source, options)?;
    sim.run(cap, StopRule::GoodSet);
    Ok(match sim.good_set_time() {
        Some(t) => CensoredTime {
            time: t,
            censored: false,
        },
        None => CensoredTime {
            time: cap,
            censored: true,
        },
    })
}

#[cfg(test)]
mod tests;
