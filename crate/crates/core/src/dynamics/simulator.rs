//! Event-driven graphical construction.
//!
//! One min-heap holds, for every scheduled clock, its next *effective* ring:
//! the first ring whose coin disagrees with the current state of the target
//! vertex (or a checkpoint ring once the lookahead budget runs out). Rings
//! whose coin agrees are no-ops whatever the constraint, so they are drawn
//! and discarded without touching the heap. Ties are broken by clock index.
//!
//! A clock whose effective ring finds the constraint unsatisfied is dropped
//! from the heap; when it becomes relevant again at time `s` its stream is
//! fast-forwarded past `s`. When a Modified East vertex with several
//! incoming edges changes state, the other edges are rescheduled from the
//! current time, so lookahead never consumes rings that could have mattered.
//! All draws come from the clock substreams in order, so trajectories
//! coincide with an eager simulation that rings every clock.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::good_set::WindowTracker;
use super::{check_config, Configuration, Flavor, ModelParams, TrajectoryStats};
use crate::error::{invalid, Result};
use crate::lattice::LatticeBox;
use crate::source::{ClockKey, ClockStream, RandomSource};

const UNTRACKED: u32 = u32::MAX;
/// Lookahead budget per scheduling; past it a no-op ring is scheduled as a
/// checkpoint so that tiny `p` cannot stall the scheduler.
const MAX_LOOKAHEAD: usize = 64;

/// How Modified East edge clocks pick their substreams.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKeying {
    /// Each edge has its own stream.
    #[default]
    Distinct,
    /// The edge `x-1 -> x` reuses the site stream of `x`. Only valid in
    /// `d = 1`, where it realizes the clock bijection between the two models.
    HeadSite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    Horizon,
    /// Stop once every tracked vertex has been infected at least once.
    TrackedInfected,
    /// Stop on entering the good set (needs `good_set_window`).
    GoodSet,
}

#[derive(Debug, Clone, Default)]
pub struct SimOptions {
    pub tracked: Vec<usize>,
    pub record_flips: bool,
    pub good_set_window: Option<usize>,
    pub edge_keying: EdgeKeying,
}

/// A state change: `vertex` (box index) became infected or healthy at `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flip {
    pub time: f64,
    pub vertex: usize,
    pub infected: bool,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    clock: u32,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.clock.cmp(&self.clock))
    }
}

#[derive(Debug, Default)]
struct ClockSlot {
    stream: Option<Box<ClockStream>>,
    /// Lookahead copies for shared-target clocks, indexed by the target
    /// state they were searching against. Every ring between `stream` and
    /// a copy agrees with that state, so a later search resumes from it.
    ahead: [Option<Box<ClockStream>>; 2],
    scheduled: bool,
    due: f64,
}

pub struct Simulator {
    params: ModelParams,
    lattice: LatticeBox,
    source: RandomSource,
    keying: EdgeKeying,
    /// Every vertex is resampled by exactly one clock.
    single_writer: bool,
    state: Vec<u8>,
    infected_behind: Vec<u8>,
    clocks: Vec<ClockSlot>,
    heap: BinaryHeap<Event>,
    now: f64,
    end_time: f64,
    updates: u64,
    tracked: Vec<usize>,
    tracked_slot: Vec<u32>,
    tau: Vec<f64>,
    occupation: Vec<f64>,
    infected_since: Vec<f64>,
    never_infected: usize,
    windows: Option<WindowTracker>,
    good_set_time: Option<f64>,
    flips: Option<Vec<Flip>>,
}

impl Simulator {
    pub fn new(
        params: &ModelParams,
        initial: &Configuration,
        source: &RandomSource,
        options: SimOptions,
    ) -> Result<Self> {
        params.validate()?;
        let lattice = params.lattice();
        check_config(&lattice, initial)?;
        if options.edge_keying == EdgeKeying::HeadSite && params.dim != 1 {
            return invalid("head-site edge keying is only defined in dimension 1");
        }
        if params.dim > u8::MAX as usize {
            return invalid("dimension too large");
        }
        let len = lattice.len();
        let n_clocks = match params.flavor {
            Flavor::East => len,
            Flavor::ModifiedEast => len * params.dim,
        };
        if n_clocks > u32::MAX as usize {
            return invalid("too many clocks");
        }
        let state = initial.states().to_vec();
        let infected_behind = (0..len)
            .map(|v| {
                (0..params.dim)
                    .filter_map(|a| lattice.pred(v, a))
                    .filter(|&y| state[y] == 0)
                    .count() as u8
            })
            .collect();

        let mut tracked_slot = vec![UNTRACKED; len];
        let mut tau = Vec::with_capacity(options.tracked.len());
        let mut infected_since = Vec::with_capacity(options.tracked.len());
        let mut never_infected = 0;
        for (slot, &v) in options.tracked.iter().enumerate() {
            if v >= len {
                return invalid(format!("tracked index {v} outside the box"));
            }
            if tracked_slot[v] != UNTRACKED {
                return invalid("tracked vertices must be distinct");
            }
            tracked_slot[v] = slot as u32;
            if state[v] == 0 {
                tau.push(0.0);
                infected_since.push(0.0);
            } else {
                tau.push(f64::INFINITY);
                infected_since.push(f64::NAN);
                never_infected += 1;
            }
        }
        let windows = match options.good_set_window {
            Some(w) if w == 0 || w > params.side + 1 => return invalid("good-set window must lie in [1, L+1]"),
            Some(w) => Some(WindowTracker::new(&lattice, &state, w)),
            None => None,
        };
        let good_set_time = windows.as_ref().and_then(|w| w.is_good().then_some(0.0));

        let mut sim = Self {
            params: *params,
            lattice,
            source: *source,
            keying: options.edge_keying,
            single_writer: params.flavor == Flavor::East || params.dim == 1,
            state,
            infected_behind,
            clocks: (0..n_clocks).map(|_| ClockSlot::default()).collect(),
            heap: BinaryHeap::new(),
            now: 0.0,
            end_time: 0.0,
            updates: 0,
            tracked_slot,
            occupation: vec![0.0; options.tracked.len()],
            tracked: options.tracked,
            tau,
            infected_since,
            never_infected,
            windows,
            good_set_time,
            flips: options.record_flips.then(Vec::new),
        };
        for clock in 0..n_clocks {
            if sim.clock_exists(clock) && sim.clock_active(clock) {
                sim.schedule(clock);
            }
        }
        Ok(sim)
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn lattice(&self) -> &LatticeBox {
        &self.lattice
    }

    pub fn states(&self) -> &[u8] {
        &self.state
    }

    pub fn good_set_time(&self) -> Option<f64> {
        self.good_set_time
    }

    pub fn infection_time_of(&self, tracked_slot: usize) -> f64 {
        self.tau[tracked_slot]
    }

    fn clock_exists(&self, clock: usize) -> bool {
        match self.params.flavor {
            Flavor::East => true,
            Flavor::ModifiedEast => {
                let d = self.params.dim;
                clock == 0 || (clock >= d && self.lattice.coord(clock / d, clock % d) > 0)
            }
        }
    }

    /// Vertex resampled when `clock` rings.
    #[inline]
    fn target(&self, clock: usize) -> usize {
        match self.params.flavor {
            Flavor::East => clock,
            Flavor::ModifiedEast => clock / self.params.dim,
        }
    }

    #[inline]
    fn clock_active(&self, clock: usize) -> bool {
        match self.params.flavor {
            Flavor::East => clock == 0 || self.infected_behind[clock] > 0,
            Flavor::ModifiedEast => {
                if clock == 0 {
                    return true;
                }
                let d = self.params.dim;
                let tail = clock / d - self.lattice.stride(clock % d);
                self.state[tail] == 0
            }
        }
    }

    fn clock_key(&self, clock: usize) -> ClockKey {
        let d = self.params.dim;
        match self.params.flavor {
            Flavor::East => ClockKey::site(&self.lattice.decode(clock)),
            Flavor::ModifiedEast if clock == 0 => ClockKey::site(&self.lattice.origin()),
            Flavor::ModifiedEast => {
                let head = self.lattice.decode(clock / d);
                match self.keying {
                    EdgeKeying::Distinct => ClockKey::edge(&head, clock % d),
                    EdgeKeying::HeadSite => ClockKey::site(&head),
                }
            }
        }
    }

    fn activate(&mut self, clock: usize) {
        if !self.clocks[clock].scheduled {
            self.schedule(clock);
        }
    }

    /// Push the first ring after `now` whose coin would change the target.
    fn schedule(&mut self, clock: usize) {
        if self.clocks[clock].stream.is_none() {
            let stream = self.source.clock(&self.clock_key(clock));
            self.clocks[clock].stream = Some(Box::new(stream));
        }
        let now = self.now;
        let p = self.params.p;
        let healthy = self.state[self.target(clock)] == 1;
        let slot = &mut self.clocks[clock];
        if p == 0.0 && !healthy {
            slot.scheduled = false;
            return;
        }
        let stream = slot.stream.as_mut().expect("created above");
        stream.skip_through(now);
        let due = if self.single_writer {
            for _ in 0..MAX_LOOKAHEAD {
                if (stream.pending_coin() < p) != healthy {
                    break;
                }
                stream.advance();
            }
            stream.pending_time()
        } else {
            let ahead = match &mut slot.ahead[healthy as usize] {
                Some(a) if a.rings_consumed() >= stream.rings_consumed() => a,
                Some(a) => {
                    a.clone_from(stream);
                    a
                }
                cache => cache.insert(stream.clone()),
            };
            for _ in 0..MAX_LOOKAHEAD {
                if (ahead.pending_coin() < p) != healthy {
                    break;
                }
                ahead.advance();
            }
            ahead.pending_time()
        };
        slot.scheduled = true;
        slot.due = due;
        self.heap.push(Event {
            time: due,
            clock: clock as u32,
        });
    }

    fn stop_reached(&self, rule: StopRule) -> bool {
        match rule {
            StopRule::Horizon => false,
            StopRule::TrackedInfected => self.never_infected == 0,
            StopRule::GoodSet => self.good_set_time.is_some(),
        }
    }

    /// Process rings in time order until `horizon` or the stop rule fires.
    /// Returns the time at which the run stopped.
    pub fn run(&mut self, horizon: f64, rule: StopRule) -> f64 {
        if self.stop_reached(rule) {
            self.end_time = self.now;
            return self.now;
        }
        while let Some(&event) = self.heap.peek() {
            if event.time > horizon {
                break;
            }
            self.heap.pop();
            let clock = event.clock as usize;
            let slot = &mut self.clocks[clock];
            if !slot.scheduled || slot.due != event.time {
                continue;
            }
            self.now = event.time;
            slot.scheduled = false;
            let stream = slot.stream.as_mut().expect("scheduled clocks own a stream");
            // Reuse a lookahead copy parked on this ring instead of redrawing.
            if let Some(a) = slot
                .ahead
                .iter_mut()
                .flatten()
                .find(|a| a.pending_time() == event.time && a.rings_consumed() >= stream.rings_consumed())
            {
                std::mem::swap(stream, a);
            }
            while stream.pending_time() < event.time {
                stream.advance();
            }
            let coin = stream.pending_coin();
            stream.advance();
            if self.clock_active(clock) {
                let target = self.target(clock);
                let infected = coin >= self.params.p;
                if infected != (self.state[target] == 0) {
                    self.updates += 1;
                    self.flip(target, infected, clock);
                }
                self.schedule(clock);
                if self.stop_reached(rule) {
                    self.end_time = self.now;
                    return self.now;
                }
            }
        }
        self.now = self.now.max(horizon);
        self.end_time = horizon;
        horizon
    }

    fn flip(&mut self, v: usize, infected: bool, cause: usize) {
        let now = self.now;
        self.state[v] = if infected { 0 } else { 1 };
        let slot = self.tracked_slot[v];
        if slot != UNTRACKED {
            let s = slot as usize;
            if infected {
                if self.tau[s].is_infinite() {
                    self.tau[s] = now;
                    self.never_infected -= 1;
                }
                self.infected_since[s] = now;
            } else {
                self.occupation[s] += now - self.infected_since[s];
                self.infected_since[s] = f64::NAN;
            }
        }
        if let Some(w) = self.windows.as_mut() {
            w.update(&self.lattice, v, infected);
            if self.good_set_time.is_none() && w.is_good() {
                self.good_set_time = Some(now);
            }
        }
        if let Some(f) = self.flips.as_mut() {
            f.push(Flip {
                time: now,
                vertex: v,
                infected,
            });
        }
        let d = self.params.dim;
        if !self.single_writer {
            for axis in 0..d {
                let writer = v * d + axis;
                if writer != cause && self.lattice.pred(v, axis).is_some() && self.clocks[writer].scheduled {
                    self.schedule(writer);
                }
            }
        }
        for axis in 0..d {
            let Some(s) = self.lattice.succ(v, axis) else {
                continue;
            };
            if infected {
                self.infected_behind[s] += 1;
                match self.params.flavor {
                    Flavor::East => {
                        if self.infected_behind[s] == 1 {
                            self.activate(s);
                        }
                    }
                    Flavor::ModifiedEast => self.activate(s * d + axis),
                }
            } else {
                self.infected_behind[s] -= 1;
            }
        }
    }

    pub fn into_stats(mut self) -> TrajectoryStats {
        let end = self.end_time;
        for (s, &v) in self.tracked.iter().enumerate() {
            if self.state[v] == 0 {
                self.occupation[s] += end - self.infected_since[s];
            }
        }
        TrajectoryStats {
            end_time: end,
            tracked: self.tracked.iter().map(|&v| self.lattice.decode(v)).collect(),
            infection_times: self.tau,
            occupation_times: self.occupation,
            good_set_time: self.good_set_time,
            updates: self.updates,
            final_config: Configuration::from_states(self.state).expect("states stay binary"),
            flips: self.flips,
        }
    }
}
