use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::*;
use crate::fpp::{fpp_times, fpp_times_keyed};
use crate::lattice::LatticeBox;
use crate::source::{ClockKey, ClockStream};
use crate::stats::{ks_test, Moments};

fn params(d: usize, flavor: Flavor, p: f64, side: usize) -> ModelParams {
    ModelParams::new(d, flavor, p, side).unwrap()
}

fn healthy(params: &ModelParams) -> Configuration {
    Configuration::all_healthy(params.lattice().len())
}

fn flips_of(
    params: &ModelParams,
    initial: &Configuration,
    horizon: f64,
    source: &RandomSource,
    keying: EdgeKeying,
) -> Vec<Flip> {
    let options = SimOptions {
        record_flips: true,
        edge_keying: keying,
        ..SimOptions::default()
    };
    let mut sim = Simulator::new(params, initial, source, options).unwrap();
    sim.run(horizon, StopRule::Horizon);
    sim.into_stats().flips.unwrap()
}

struct Key(f64, usize);
impl PartialEq for Key {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o).is_eq()
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Key {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
    }
}

/// Rings every clock in time order and applies the rule at each ring.
fn eager_flips(
    params: &ModelParams,
    initial: &Configuration,
    horizon: f64,
    source: &RandomSource,
    keying: EdgeKeying,
) -> Vec<Flip> {
    let l = params.lattice();
    let d = params.dim;
    let mut clocks: Vec<(usize, usize, Option<usize>, ClockStream)> = Vec::new();
    match params.flavor {
        Flavor::East => {
            for v in 0..l.len() {
                clocks.push((v, v, None, source.clock(&ClockKey::site(&l.decode(v)))));
            }
        }
        Flavor::ModifiedEast => {
            clocks.push((0, 0, None, source.clock(&ClockKey::site(&l.origin()))));
            for v in 1..l.len() {
                for axis in 0..d {
                    if let Some(u) = l.pred(v, axis) {
                        let key = match keying {
                            EdgeKeying::Distinct => ClockKey::edge(&l.decode(v), axis),
                            EdgeKeying::HeadSite => ClockKey::site(&l.decode(v)),
                        };
                        clocks.push((v * d + axis, v, Some(u), source.clock(&key)));
                    }
                }
            }
        }
    }
    let mut heap: BinaryHeap<Reverse<Key>> = clocks
        .iter()
        .enumerate()
        .map(|(i, c)| Reverse(Key(c.3.pending_time(), i)))
        .collect();
    let mut state = initial.states().to_vec();
    let mut flips = Vec::new();
    while let Some(Reverse(Key(t, i))) = heap.pop() {
        if t > horizon {
            break;
        }
        let (_, v, tail, stream) = &mut clocks[i];
        let coin = stream.pending_coin();
        stream.advance();
        heap.push(Reverse(Key(stream.pending_time(), i)));
        let v = *v;
        let active = match (params.flavor, *tail) {
            (Flavor::ModifiedEast, Some(u)) => state[u] == 0,
            (Flavor::ModifiedEast, None) => true,
            (Flavor::East, _) => v == 0 || (0..d).filter_map(|a| l.pred(v, a)).any(|u| state[u] == 0),
        };
        let new = u8::from(coin < params.p);
        if active && new != state[v] {
            state[v] = new;
            flips.push(Flip {
                time: t,
                vertex: v,
                infected: new == 0,
            });
        }
    }
    flips
}

#[test]
fn rate_examples() {
    for flavor in Flavor::ALL {
        let p = params(2, flavor, 0.3, 3);
        let l = p.lattice();
        let c = healthy(&p);
        assert_eq!(transition_rate(&p, &c, &[0, 0]).unwrap(), 1);
        assert_eq!(
            transition_rate(&p, &Configuration::all_infected(l.len()), &[0, 0]).unwrap(),
            1
        );
        assert_eq!(transition_rate(&p, &c, &[2, 1]).unwrap(), 0);
        let both = Configuration::with_infections(&l, &[vec![1, 1], vec![2, 0]]).unwrap();
        let expected = match flavor {
            Flavor::East => 1,
            Flavor::ModifiedEast => 2,
        };
        assert_eq!(transition_rate(&p, &both, &[2, 1]).unwrap(), expected);
        let one = Configuration::with_infections(&l, &[vec![2, 0]]).unwrap();
        assert_eq!(transition_rate(&p, &one, &[2, 1]).unwrap(), 1);
        // Behind a boundary vertex only the in-box neighbor counts.
        assert_eq!(transition_rate(&p, &one, &[3, 0]).unwrap(), 1);
        assert!(transition_rate(&p, &c, &[4, 0]).is_err());
    }
}

#[test]
fn lazy_simulation_matches_eager_reference() {
    let cases = [
        (1, 12, 0.3),
        (2, 5, 0.0),
        (2, 5, 0.1),
        (2, 6, 0.5),
        (2, 4, 0.9),
        (3, 3, 0.2),
    ];
    for (d, side, p) in cases {
        for flavor in Flavor::ALL {
            for seed in 0..8 {
                let prm = params(d, flavor, p, side);
                let src = RandomSource::new(seed);
                let mut rng = src.aux(9);
                let init = Configuration::sample_product(prm.lattice().len(), 0.7, &mut rng);
                for start in [healthy(&prm), init] {
                    let a = flips_of(&prm, &start, 25.0, &src, EdgeKeying::Distinct);
                    let b = eager_flips(&prm, &start, 25.0, &src, EdgeKeying::Distinct);
                    assert_eq!(a, b, "d={d} L={side} p={p} {flavor} seed={seed}");
                }
            }
        }
    }
}

#[test]
fn matches_first_passage_oracle_at_p_zero() {
    for flavor in Flavor::ALL {
        let prm = params(2, flavor, 0.0, 15);
        let l = prm.lattice();
        let tracked: Vec<Vertex> = l.vertices().collect();
        for seed in 0..10 {
            let src = RandomSource::new(seed);
            let stats = simulate(&prm, &healthy(&prm), 1e9, &src, &tracked).unwrap();
            let oracle = fpp_times(&prm, &src).unwrap();
            assert_eq!(stats.infection_times, oracle.times, "{flavor} seed {seed}");
        }
    }
}

#[test]
fn flavors_coincide_in_one_dimension() {
    let prm = params(1, Flavor::East, 0.4, 15);
    for seed in 0..20 {
        let src = RandomSource::new(seed);
        let east = flips_of(&prm, &healthy(&prm), 40.0, &src, EdgeKeying::Distinct);
        let modified = flips_of(
            &ModelParams {
                flavor: Flavor::ModifiedEast,
                ..prm
            },
            &healthy(&prm),
            40.0,
            &src,
            EdgeKeying::HeadSite,
        );
        assert_eq!(east, modified);
        assert!(!east.is_empty());
    }
    let bad = Simulator::new(
        &params(2, Flavor::ModifiedEast, 0.1, 2),
        &Configuration::all_healthy(9),
        &RandomSource::new(0),
        SimOptions {
            edge_keying: EdgeKeying::HeadSite,
            ..SimOptions::default()
        },
    );
    assert!(bad.is_err());
    let oracle_east = fpp_times(&params(1, Flavor::East, 0.0, 30), &RandomSource::new(2)).unwrap();
    let oracle_mod = fpp_times_keyed(
        &params(1, Flavor::ModifiedEast, 0.0, 30),
        &RandomSource::new(2),
        EdgeKeying::HeadSite,
    )
    .unwrap();
    assert_eq!(oracle_east.times, oracle_mod.times);
}

fn restrict(flips: &[Flip], from: &LatticeBox, to: &LatticeBox) -> Vec<Flip> {
    flips
        .iter()
        .filter_map(|f| to.encode(&from.decode(f.vertex)).map(|v| Flip { vertex: v, ..*f }))
        .collect()
}

#[test]
fn restriction_to_a_sub_box() {
    for flavor in Flavor::ALL {
        for seed in 0..10 {
            let small = params(2, flavor, 0.3, 4);
            let large = small.with_side(7);
            let src = RandomSource::new(seed);
            let a = flips_of(&small, &healthy(&small), 20.0, &src, EdgeKeying::Distinct);
            let b = flips_of(&large, &healthy(&large), 20.0, &src, EdgeKeying::Distinct);
            assert_eq!(a, restrict(&b, &large.lattice(), &small.lattice()));
        }
    }
}

#[test]
fn projection_onto_a_face() {
    for flavor in Flavor::ALL {
        for seed in 0..10 {
            let full = params(3, flavor, 0.25, 3);
            let face = ModelParams { dim: 2, ..full };
            let src = RandomSource::new(seed);
            let a = flips_of(&full, &healthy(&full), 15.0, &src, EdgeKeying::Distinct);
            let b = flips_of(&face, &healthy(&face), 15.0, &src, EdgeKeying::Distinct);
            let fl = full.lattice();
            let projected: Vec<Flip> = a
                .iter()
                .filter(|f| fl.coord(f.vertex, 2) == 0)
                .map(|f| {
                    let x = fl.decode(f.vertex);
                    Flip {
                        vertex: face.lattice().encode(&x[..2]).unwrap(),
                        ..*f
                    }
                })
                .collect();
            assert_eq!(projected, b);
        }
    }
}

#[test]
fn infections_never_heal_at_p_zero() {
    for flavor in Flavor::ALL {
        let prm = params(2, flavor, 0.0, 10);
        let f = flips_of(&prm, &healthy(&prm), 12.0, &RandomSource::new(4), EdgeKeying::Distinct);
        assert!(!f.is_empty());
        assert!(f.iter().all(|x| x.infected));
        assert!(f.windows(2).all(|w| w[0].time <= w[1].time));
    }
}

#[test]
fn origin_infection_time_is_exponential() {
    let prm = params(1, Flavor::East, 0.0, 4);
    let src = RandomSource::new(12);
    let taus: Vec<f64> = (0..10_000)
        .map(|r| {
            infection_time(&prm, &healthy(&prm), &[0], &src.replica(r), None)
                .unwrap()
                .time
        })
        .collect();
    let m: Moments = taus.iter().copied().collect();
    assert!(m.estimate().covers(1.0, 3.0), "{m:?}");
    let ks = ks_test(&taus, |x| 1.0 - (-x).exp());
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn infection_time_edge_cases() {
    let prm = params(2, Flavor::East, 0.2, 5);
    let l = prm.lattice();
    let init = Configuration::with_infections(&l, &[vec![3, 2]]).unwrap();
    let t = infection_time(&prm, &init, &[3, 2], &RandomSource::new(0), None).unwrap();
    assert_eq!(
        t,
        CensoredTime {
            time: 0.0,
            censored: false
        }
    );
    let capped = infection_time(&prm, &healthy(&prm), &[5, 5], &RandomSource::new(0), Some(0.01)).unwrap();
    assert_eq!(
        capped,
        CensoredTime {
            time: 0.01,
            censored: true
        }
    );
    assert!(default_infection_cap(&prm, &[5, 5]) > 200.0);
    assert!(default_infection_cap(&params(1, Flavor::East, 0.1, 0), &[0]) > 0.0);
    assert!(infection_time(&prm, &healthy(&prm), &[6, 0], &RandomSource::new(0), None).is_err());
}

#[test]
fn one_dimensional_front_mean() {
    let n = 40;
    let prm = params(1, Flavor::East, 0.0, n);
    let src = RandomSource::new(5);
    let m: Moments = (0..4000)
        .map(|r| {
            infection_time(&prm, &healthy(&prm), &[n as i64], &src.replica(r), None)
                .unwrap()
                .time
        })
        .collect();
    assert!(m.estimate().covers(n as f64 + 1.0, 3.0), "{m:?}");
}

#[test]
fn diagonal_is_faster_than_n_at_p_zero() {
    let prm = params(2, Flavor::ModifiedEast, 0.0, 50);
    let src = RandomSource::new(6);
    let m: Moments = (0..1000)
        .map(|r| {
            infection_time(&prm, &healthy(&prm), &[50, 50], &src.replica(r), None)
                .unwrap()
                .time
        })
        .collect();
    assert!(m.mean < 50.0, "{m:?}");
}

#[test]
fn occupation_time_examples() {
    let prm = params(1, Flavor::East, 0.5, 0);
    let src = RandomSource::new(1);
    assert_eq!(occupation_time(&prm, &healthy(&prm), &[0], 0.0, &src).unwrap(), 0.0);
    let frozen = params(2, Flavor::East, 0.0, 3);
    let inf = Configuration::all_infected(16);
    assert_eq!(occupation_time(&frozen, &inf, &[2, 1], 7.5, &src).unwrap(), 7.5);
    // Two-state chain: ∫_0^t P(infected at s) ds.
    let (p, t) = (0.5, 10.0f64);
    for start in [Configuration::all_healthy(1), Configuration::all_infected(1)] {
        let indicator = if start.is_infected(0) { 1.0 } else { 0.0 };
        let exact = (1.0 - p) * t + (indicator - (1.0 - p)) * (1.0 - (-t).exp());
        let m: Moments = (0..10_000)
            .map(|r| occupation_time(&prm, &start, &[0], t, &src.replica(r)).unwrap())
            .collect();
        assert!(m.estimate().covers(exact, 3.0), "{m:?} vs {exact}");
    }
}

#[test]
fn trajectory_invariants() {
    for flavor in Flavor::ALL {
        let prm = params(2, flavor, 0.3, 6);
        let l = prm.lattice();
        let tracked: Vec<Vertex> = l.vertices().collect();
        let mut rng = RandomSource::new(3).aux(0);
        let init = Configuration::sample_product(l.len(), 0.6, &mut rng);
        let t = 8.0;
        let a = simulate(&prm, &init, t, &RandomSource::new(3), &tracked).unwrap();
        let b = simulate(&prm, &init, t, &RandomSource::new(3), &tracked).unwrap();
        assert_eq!(a, b);
        for i in 0..l.len() {
            let occ = a.occupation_times[i];
            assert!((0.0..=t).contains(&occ));
            assert_eq!(a.infection_times[i] == 0.0, init.is_infected(i));
            if occ > 0.0 {
                assert!(a.infection_times[i] <= t);
            }
        }
        assert_eq!(a.end_time, t);
    }
}

#[test]
fn product_measure_is_stationary() {
    let p = 0.7;
    let prm = params(1, Flavor::East, p, 3);
    let src = RandomSource::new(21);
    let reps = 100_000;
    let mut counts = [0u64; 16];
    for r in 0..reps {
        let rep = src.replica(r);
        let init = Configuration::sample_product(4, p, &mut rep.aux(0));
        let s = simulate(&prm, &init, 10.0, &rep, &[]).unwrap();
        counts[s.final_config.to_mask() as usize] += 1;
    }
    for (mask, &c) in counts.iter().enumerate() {
        let k = (mask as u32).count_ones() as i32;
        let pi = p.powi(k) * (1.0 - p).powi(4 - k);
        let est = crate::stats::EstimateCI::proportion(c, reps);
        assert!(est.covers(pi, 3.5), "state {mask}: {est:?} vs {pi}");
    }
}

#[test]
fn good_set_examples() {
    let prm = params(2, Flavor::East, 0.05, 6);
    let l = prm.lattice();
    let all = Configuration::all_infected(l.len());
    let src = RandomSource::new(0);
    let t = good_set_hitting_time(&prm, &all, 3, &src, 100.0).unwrap();
    assert_eq!(t.time, 0.0);
    let diagonal: Vec<Vertex> = (0..=6).map(|i| vec![i, 6 - i]).collect();
    let anti = Configuration::with_infections(&l, &diagonal).unwrap();
    assert_eq!(good_set_hitting_time(&prm, &anti, 7, &src, 100.0).unwrap().time, 0.0);
    assert!(good_set_hitting_time(&prm, &anti, 8, &src, 100.0).is_err());
    assert!(good_set_hitting_time(&prm, &anti, 0, &src, 100.0).is_err());
    assert_eq!(good_set_window(40), 41);
    assert_eq!(good_set_window(0), 1);
    assert_eq!(good_set_window(1), 1);
}

#[test]
fn good_set_time_agrees_with_direct_check() {
    for flavor in Flavor::ALL {
        for window in [2, 3, 5] {
            for seed in 0..5 {
                let prm = params(2, flavor, 0.3, 5);
                let l = prm.lattice();
                let src = RandomSource::new(seed);
                let options = SimOptions {
                    record_flips: true,
                    good_set_window: Some(window),
                    ..SimOptions::default()
                };
                let mut sim = Simulator::new(&prm, &healthy(&prm), &src, options).unwrap();
                sim.run(60.0, StopRule::GoodSet);
                let stats = sim.into_stats();
                let mut state = vec![1u8; l.len()];
                let mut first = None;
                for f in stats.flips.as_ref().unwrap() {
                    state[f.vertex] = u8::from(!f.infected);
                    if in_good_set(&l, &state, window) {
                        first = Some(f.time);
                        break;
                    }
                }
                assert_eq!(stats.good_set_time, first);
            }
        }
    }
}
