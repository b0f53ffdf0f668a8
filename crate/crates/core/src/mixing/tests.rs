use super::*;
use crate::dynamics::{simulate, transition_rate, Configuration, Flavor, ModelParams};
use crate::source::RandomSource;
use crate::stats::EstimateCI;

fn params(d: usize, flavor: Flavor, p: f64, side: usize) -> ModelParams {
    ModelParams::new(d, flavor, p, side).unwrap()
}

#[test]
fn single_site_generator() {
    let g = build_generator(&params(1, Flavor::East, 0.3, 0)).unwrap();
    let dense = g.to_dense();
    let expected = [[-0.3, 0.3], [0.7, -0.7]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((dense[i][j] - expected[i][j]).abs() < 1e-15);
        }
    }
}

#[test]
fn reversibility_and_stationarity() {
    for flavor in Flavor::ALL {
        for p in [0.2, 0.5, 0.8] {
            for (d, side) in [(2, 1), (1, 3), (3, 1), (2, 2)] {
                let g = build_generator(&params(d, flavor, p, side)).unwrap();
                let pi = g.stationary();
                assert!(g.row_sum_error() < 1e-12);
                assert!(g.detailed_balance_violation(&pi) < 1e-12);
                assert!(g.stationarity_residual(&pi) < 1e-10);
                assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn constrained_flip_has_zero_rate() {
    let prm = params(1, Flavor::East, 0.4, 2);
    let c = Configuration::from_states(vec![1, 1, 0]).unwrap();
    assert_eq!(transition_rate(&prm, &c, &[2]).unwrap(), 0);
    let g = build_generator(&prm).unwrap();
    let s = c.to_mask() as usize;
    assert_eq!(g.entry(s, s ^ 0b100), 0.0);
    assert!(g.entry(s, s ^ 0b001) > 0.0);
}

#[test]
fn flavors_share_the_generator_in_one_dimension() {
    for side in 0..=8 {
        let a = build_generator(&params(1, Flavor::East, 0.35, side)).unwrap();
        let b = build_generator(&params(1, Flavor::ModifiedEast, 0.35, side)).unwrap();
        assert_eq!(a.states(), b.states());
        for s in 0..a.states() {
            assert_eq!(a.row(s).collect::<Vec<_>>(), b.row(s).collect::<Vec<_>>());
            assert_eq!(a.diagonal(s), b.diagonal(s));
        }
    }
    let a = build_generator(&params(2, Flavor::East, 0.35, 1)).unwrap();
    let b = build_generator(&params(2, Flavor::ModifiedEast, 0.35, 1)).unwrap();
    assert_ne!(a, b);
}

#[test]
fn state_space_cap() {
    let err = build_generator(&params(2, Flavor::East, 0.5, 4)).unwrap_err();
    assert!(matches!(err, crate::error::Error::StateSpaceTooLarge { sites: 25, .. }));
    assert!(build_generator_capped(&params(1, Flavor::East, 0.5, 5), 4).is_err());
}

#[test]
fn single_site_curve_has_closed_form() {
    let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.2).collect();
    for d in 1..=3 {
        for p in [0.1, 0.5, 0.77] {
            for flavor in Flavor::ALL {
                let curve = tv_curve(&params(d, flavor, p, 0), &times).unwrap();
                let m = f64::max(p, 1.0 - p);
                for (t, v) in times.iter().zip(&curve.values) {
                    assert!((v - (-t).exp() * m).abs() < 1e-8, "t={t} {v}");
                }
                assert!(curve.exhaustive);
                let tm = t_mix(&params(d, flavor, p, 0), 0.25).unwrap();
                assert!((tm.time / (4.0 * m).ln() - 1.0).abs() < 2e-6, "{tm:?}");
            }
        }
    }
}

#[test]
fn curves_decrease_and_grow_with_the_box() {
    let times: Vec<f64> = (0..40).map(|k| k as f64 * 0.5).collect();
    for flavor in Flavor::ALL {
        let prm = params(1, flavor, 0.5, 3);
        let curve = tv_curve(&prm, &times).unwrap();
        assert!(curve.is_non_increasing(1e-12));
        assert!(curve.values[0] <= 1.0);
        let big = t_mix(&prm, 0.25).unwrap().time;
        let small = t_mix(&prm.with_side(0), 0.25).unwrap().time;
        assert!(big.is_finite() && big > small);
        let first = curve.first_below(0.25).unwrap();
        assert!(first >= big && first - big <= 0.5);
        // Projection onto an axis gives d = 2 at least the one-dimensional time.
        let one = t_mix(&params(1, flavor, 0.5, 2), 0.25).unwrap().time;
        let two = t_mix(&params(2, flavor, 0.5, 2), 0.25).unwrap().time;
        assert!(two >= one);
    }
}

#[test]
fn candidate_set_is_flagged_as_lower_bound() {
    let prm = params(2, Flavor::East, 0.5, 3);
    let curve = tv_curve(&prm, &[0.0, 1.0]).unwrap();
    assert!(!curve.exhaustive);
    assert_eq!(curve.initial_states, 3);
    assert!((curve.values[0] - (1.0 - 0.5f64.powi(16))).abs() < 1e-12);
}

#[test]
fn simulated_law_matches_uniformization() {
    let p = 0.7;
    let t = 6.0;
    let prm = params(1, Flavor::East, p, 3);
    let g = build_generator(&prm).unwrap();
    let mut mu = vec![0.0; 16];
    mu[15] = 1.0;
    Propagator::new(&g).evolve(&mut mu, t).unwrap();
    let src = RandomSource::new(13);
    let reps = 40_000;
    let mut counts = [0u64; 16];
    for r in 0..reps {
        let s = simulate(&prm, &Configuration::all_healthy(4), t, &src.replica(r), &[]).unwrap();
        counts[s.final_config.to_mask() as usize] += 1;
    }
    for s in 0..16 {
        let est = EstimateCI::proportion(counts[s], reps);
        assert!(
            est.covers(mu[s], 3.5) || (mu[s] - est.estimate).abs() < 2e-4,
            "{s}: {est:?} vs {}",
            mu[s]
        );
    }
}

#[test]
fn single_site_coalesces_at_first_ring() {
    let prm = params(2, Flavor::ModifiedEast, 0.5, 0);
    let summary = coalescence_summary(&prm, 100.0, 5000, &RandomSource::new(1)).unwrap();
    assert!(summary.exact);
    assert_eq!(summary.censored, 0);
    assert!(summary.mean.covers(1.0, 3.0), "{:?}", summary.mean);
}

/// Expected coalescence time of the four-state grand coupling (`d = 1`,
/// `L = 1`), from the chain on subsets of tracked states.
fn two_site_coalescence_mean(p: f64) -> f64 {
    // Subset of {0,1,2,3} as a 4-bit set; clocks at site 0 and site 1.
    let apply = |set: u32, site: usize, healthy: bool| -> u32 {
        let mut out = 0;
        for s in 0..4u32 {
            if set & (1 << s) == 0 {
                continue;
            }
            let active = site == 0 || s & 1 == 0;
            let t = if active {
                if healthy {
                    s | (1 << site)
                } else {
                    s & !(1 << site)
                }
            } else {
                s
            };
            out |= 1 << t;
        }
        out
    };
    let sets: Vec<u32> = (1..16).filter(|s: &u32| s.count_ones() > 1).collect();
    let idx = |s: u32| sets.iter().position(|&x| x == s);
    let n = sets.len();
    // T_S = 1/2 + Σ (rate / 2) T_{S'} with total rate 2.
    let mut a = vec![vec![0.0; n + 1]; n];
    for (i, &s) in sets.iter().enumerate() {
        a[i][i] += 1.0;
        a[i][n] = 0.5;
        for site in 0..2 {
            for (healthy, w) in [(true, p), (false, 1.0 - p)] {
                if let Some(j) = idx(apply(s, site, healthy)) {
                    a[i][j] -= w / 2.0;
                }
            }
        }
    }
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, piv);
        let pivot = a[c].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != c {
                let f = row[c] / pivot[c];
                for (x, y) in row[c..].iter_mut().zip(&pivot[c..]) {
                    *x -= f * y;
                }
            }
        }
    }
    let full = idx(15).unwrap();
    a[full][n] / a[full][full]
}

#[test]
fn two_site_coalescence_matches_subset_chain() {
    let exact = two_site_coalescence_mean(0.5);
    assert!(exact > 1.0);
    let prm = params(1, Flavor::East, 0.5, 1);
    let summary = coalescence_summary(&prm, 1e3, 20_000, &RandomSource::new(2)).unwrap();
    assert!(summary.mean.covers(exact, 3.0), "{:?} vs {exact}", summary.mean);
}

#[test]
fn coalescence_dominates_exact_distance() {
    let prm = params(1, Flavor::East, 0.5, 2);
    let times = [0.5, 1.0, 2.0, 4.0, 8.0];
    let curve = tv_curve(&prm, &times).unwrap();
    let summary = coalescence_summary(&prm, 1e3, 4000, &RandomSource::new(3)).unwrap();
    for (t, d) in times.iter().zip(&curve.values) {
        let c = summary.coalesced_by(*t);
        let not = EstimateCI::new(1.0 - c.estimate, c.stderr, c.reps);
        assert!(not.upper(3.0) >= *d, "t={t}: {not:?} vs {d}");
    }
}

#[test]
fn large_boxes_track_extremes_and_samples() {
    let prm = params(2, Flavor::East, 0.3, 5);
    let (states, exact) = coupled_initial_states(&prm, &RandomSource::new(0)).unwrap();
    assert!(!exact);
    assert!(states.len() >= 3 && states.len() <= 3 + SAMPLED_STATES);
    let c = coalescence_time(&prm, 0.01, &RandomSource::new(0)).unwrap();
    assert!(c.censored);
}

#[test]
fn rho_at_p_zero_is_one() {
    let est = estimate_rho(0.0, &[50, 100, 150, 200], 400, &RandomSource::new(4)).unwrap();
    assert!(est.rho.covers(1.0, 3.0), "{:?}", est.rho);
    assert!(est.intercept.covers(1.0, 3.0), "{:?}", est.intercept);
    assert!(!est.nonlinear);
}

#[test]
fn rho_grows_with_p() {
    let scales = [50, 100, 150, 200];
    let low = estimate_rho(0.05, &scales, 100, &RandomSource::new(5)).unwrap();
    let high = estimate_rho(0.3, &scales, 100, &RandomSource::new(6)).unwrap();
    assert!(low.rho.estimate >= 1.0 - 3.0 * low.rho.stderr);
    assert!(low.rho.le_within(&high.rho, 0.0), "{:?} {:?}", low.rho, high.rho);
}

#[test]
fn front_separation_at_p_zero() {
    let n = 50;
    let prof = front_profile(
        &params(2, Flavor::ModifiedEast, 0.0, n),
        n,
        300,
        &RandomSource::new(7),
        Some(1.0),
    )
    .unwrap();
    let diag = prof.rows[0].speed.estimate;
    let axis = prof.rows[1].speed.estimate;
    assert!(diag < 1.0 && 1.0 < axis * (1.0 + 2.0 / n as f64), "{prof:?}");
    assert!(prof.separation > 1.0);
    assert!(prof.late_frequency.unwrap().estimate < 0.05);
}

#[test]
fn front_simulation_matches_oracle_limit() {
    // Positive p takes the simulation path; tiny p must sit close to p = 0.
    let n = 20;
    let zero = front_profile(&params(2, Flavor::East, 0.0, n), n, 400, &RandomSource::new(8), None).unwrap();
    let tiny = front_profile(&params(2, Flavor::East, 1e-9, n), n, 400, &RandomSource::new(8), None).unwrap();
    for k in 0..2 {
        assert!((zero.rows[k].speed.estimate - tiny.rows[k].speed.estimate).abs() < 1e-6);
    }
}
