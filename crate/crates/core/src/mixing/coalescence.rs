//! Grand coupling: several initial configurations driven by the same clocks
//! and coins until they agree.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::tv::candidate_states;
use crate::dynamics::{Configuration, Flavor, ModelParams};
use crate::error::{invalid, Result};
use crate::lattice::LatticeBox;
use crate::replicas::map_replicas;
use crate::source::{ClockKey, ClockStream, RandomSource};
use crate::stats::{quantile, EstimateCI};

/// Boxes with at most this many sites track every initial configuration.
pub const EXACT_SITES: usize = 20;
/// Product-measure states added to the extreme ones on larger boxes.
pub const SAMPLED_STATES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coalescence {
    pub time: f64,
    pub censored: bool,
    /// True when every configuration of the box was tracked.
    pub exact: bool,
}

struct Ring {
    site: usize,
    /// Tail of the edge for Modified East; `None` for site clocks.
    tail: Option<usize>,
    stream: ClockStream,
}

fn rings(params: &ModelParams, lattice: &LatticeBox, source: &RandomSource) -> Vec<Ring> {
    let mut out = Vec::new();
    match params.flavor {
        Flavor::East => {
            for v in 0..lattice.len() {
                out.push(Ring {
                    site: v,
                    tail: None,
                    stream: source.clock(&ClockKey::site(&lattice.decode(v))),
                });
            }
        }
        Flavor::ModifiedEast => {
            out.push(Ring {
                site: 0,
                tail: None,
                stream: source.clock(&ClockKey::site(&lattice.origin())),
            });
            for v in 1..lattice.len() {
                let x = lattice.decode(v);
                for axis in 0..params.dim {
                    if let Some(u) = lattice.pred(v, axis) {
                        out.push(Ring {
                            site: v,
                            tail: Some(u),
                            stream: source.clock(&ClockKey::edge(&x, axis)),
                        });
                    }
                }
            }
        }
    }
    out
}

fn sort_dedup(states: &mut Vec<u64>) {
    states.sort_unstable();
    states.dedup();
}

/// Tracked initial states: all of them when the box is small, else the
/// extremes plus [`SAMPLED_STATES`] product-measure draws.
pub fn coupled_initial_states(params: &ModelParams, source: &RandomSource) -> Result<(Vec<u64>, bool)> {
    let lattice = params.lattice();
    let sites = lattice.len();
    if sites <= EXACT_SITES {
        return Ok(((0..1u64 << sites).collect(), true));
    }
    if sites > 64 {
        return invalid("coalescence tracking supports at most 64 sites");
    }
    let mut states: Vec<u64> = candidate_states(sites).into_iter().map(|s| s as u64).collect();
    let mut rng = source.aux(0xC0A1);
    for _ in 0..SAMPLED_STATES {
        states.push(Configuration::sample_product(sites, params.p, &mut rng).to_mask());
    }
    sort_dedup(&mut states);
    Ok((states, false))
}

pub fn coalescence_time(params: &ModelParams, horizon: f64, source: &RandomSource) -> Result<Coalescence> {
    params.validate()?;
    if !(horizon >= 0.0) {
        return invalid("horizon must be non-negative");
    }
    let lattice = params.lattice();
    let (mut states, exact) = coupled_initial_states(params, source)?;
    let mut clocks = rings(params, &lattice, source);
    let mut heap: BinaryHeap<Reverse<(OrdF64, usize)>> = clocks
        .iter()
        .enumerate()
        .map(|(i, c)| Reverse((OrdF64(c.stream.pending_time()), i)))
        .collect();
    let p = params.p;
    // A ring changes one bit, so it can at most halve the number of
    // distinct states; dedup only when coalescence has become possible.
    let mut until_check = 0usize;
    while states.len() > 1 {
        let Reverse((OrdF64(t), i)) = heap.pop().expect("clocks never run out");
        if t > horizon {
            return Ok(Coalescence {
                time: horizon,
                censored: true,
                exact,
            });
        }
        let ring = &mut clocks[i];
        let healthy = ring.stream.pending_coin() < p;
        ring.stream.advance();
        heap.push(Reverse((OrdF64(ring.stream.pending_time()), i)));
        let bit = 1u64 << ring.site;
        for s in states.iter_mut() {
            let active = match ring.tail {
                Some(u) => *s & (1 << u) == 0,
                None => {
                    ring.site == 0
                        || (0..params.dim)
                            .filter_map(|a| lattice.pred(ring.site, a))
                            .any(|u| *s & (1 << u) == 0)
                }
            };
            if active {
                *s = if healthy { *s | bit } else { *s & !bit };
            }
        }
        if until_check <= 1 {
            sort_dedup(&mut states);
            until_check = (usize::BITS - states.len().leading_zeros()) as usize - 1;
            if states.len() == 1 {
                return Ok(Coalescence {
                    time: t,
                    censored: false,
                    exact,
                });
            }
        } else {
            until_check -= 1;
        }
    }
    Ok(Coalescence {
        time: 0.0,
        censored: false,
        exact,
    })
}

#[derive(Debug, Clone, Copy)]
struct OrdF64(f64);

impl PartialEq for OrdF64 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalescenceSummary {
    pub reps: usize,
    pub censored: usize,
    pub exact: bool,
    /// Mean with censored runs counted at the horizon.
    pub mean: EstimateCI,
    pub median: f64,
    pub q90: f64,
    pub times: Vec<f64>,
}

impl CoalescenceSummary {
    /// Fraction of runs coalesced by time `t`.
    pub fn coalesced_by(&self, t: f64) -> EstimateCI {
        let hits = self.times.iter().filter(|&&x| x <= t).count();
        EstimateCI::proportion(hits as u64, self.reps as u64)
    }
}

pub fn coalescence_summary(
    params: &ModelParams,
    horizon: f64,
    reps: usize,
    source: &RandomSource,
) -> Result<CoalescenceSummary> {
    if reps == 0 {
        return invalid("reps must be positive");
    }
    let runs = map_replicas(source, reps, |_, src| coalescence_time(params, horizon, &src))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let exact = runs.iter().all(|r| r.exact);
    let censored = runs.iter().filter(|r| r.censored).count();
    // Censored runs sit at the horizon and never count as coalesced.
    let times: Vec<f64> = runs
        .iter()
        .map(|r| if r.censored { f64::INFINITY } else { r.time })
        .collect();
    let capped: crate::stats::Moments = runs.iter().map(|r| r.time).collect();
    let mut sorted = times.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(CoalescenceSummary {
        reps,
        censored,
        exact,
        mean: capped.estimate(),
        median: quantile(&sorted, 0.5),
        q90: quantile(&sorted, 0.9),
        times,
    })
}
