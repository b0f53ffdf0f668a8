//! Exact `p = 0` reduction to oriented first passage percolation.
//!
//! At `p = 0` infections never heal, so `τ(v)` is the first ring of the
//! relevant clock after the infection of a vertex behind `v`:
//!
//! * site flavor: `τ(v) = ring_v(min_{u ∈ U_v} τ(u))`,
//! * bond flavor: `τ(v) = min_{u ∈ U_v} ring_{u→v}(τ(u))`,
//!
//! where `ring_c(t)` is the first ring of clock `c` strictly after `t`. The
//! clocks are the same substreams the simulator consumes, so the two agree
//! bit for bit. The realized passage times `X = ring(t) - t` are i.i.d.
//! Exp(1) by memorylessness.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constants::{beta_t, open_probability};
use crate::dynamics::{EdgeKeying, Flavor, ModelParams};
use crate::error::{invalid, Result};
use crate::lattice::{LatticeBox, Vertex};
use crate::replicas::map_replicas;
use crate::source::{exp1, ClockKey, RandomSource};
use crate::stats::{linear_fit, log_sum_exp, EstimateCI, LinearFit, Moments};

/// Passage-time variables of one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassageField {
    pub flavor: Flavor,
    pub dim: usize,
    /// `Y`, the infection time of the origin.
    pub origin_delay: f64,
    /// Site flavor: one entry per vertex (index 0 unused). Bond flavor: entry
    /// `v * d + i` for the edge `v - e_i -> v`. Absent objects hold NaN.
    weights: Vec<f64>,
}

impl PassageField {
    /// Weights of the objects present in the box.
    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().copied().filter(|w| !w.is_nan())
    }

    pub fn raw_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn site_weight(&self, index: usize) -> Option<f64> {
        (self.flavor == Flavor::East)
            .then(|| self.weights.get(index).copied())
            .flatten()
            .filter(|w| !w.is_nan())
    }

    pub fn edge_weight(&self, head: usize, axis: usize) -> Option<f64> {
        (self.flavor == Flavor::ModifiedEast)
            .then(|| self.weights.get(head * self.dim + axis).copied())
            .flatten()
            .filter(|w| !w.is_nan())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassageTimes {
    pub lattice: LatticeBox,
    pub times: Vec<f64>,
    pub field: PassageField,
}

impl PassageTimes {
    pub fn time_at(&self, x: &[i64]) -> Option<f64> {
        self.lattice.encode(x).map(|i| self.times[i])
    }
}

#[derive(Debug, Clone, Copy)]
struct Node(f64, usize);

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == std::cmp::Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
    }
}

pub fn fpp_times(params: &ModelParams, source: &RandomSource) -> Result<PassageTimes> {
    fpp_times_keyed(params, source, EdgeKeying::Distinct)
}

/// Dijkstra over the box with orientation-restricted relaxation.
pub fn fpp_times_keyed(params: &ModelParams, source: &RandomSource, keying: EdgeKeying) -> Result<PassageTimes> {
    params.validate()?;
    if params.p != 0.0 {
        return invalid(format!(
            "first passage reduction is exact only at p = 0 (got {})",
            params.p
        ));
    }
    if keying == EdgeKeying::HeadSite && params.dim != 1 {
        return invalid("head-site edge keying is only defined in dimension 1");
    }
    let lattice = params.lattice();
    let d = params.dim;
    let n = lattice.len();
    let mut times = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut weights = vec![
        f64::NAN;
        match params.flavor {
            Flavor::East => n,
            Flavor::ModifiedEast => n * d,
        }
    ];
    let origin_delay = source.clock(&ClockKey::site(&lattice.origin())).pending_time();
    times[0] = origin_delay;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse(Node(origin_delay, 0)));
    while let Some(Reverse(Node(t, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for axis in 0..d {
            let Some(v) = lattice.succ(u, axis) else {
                continue;
            };
            match params.flavor {
                Flavor::East => {
                    // First finalized predecessor carries the minimum.
                    if times[v].is_finite() {
                        continue;
                    }
                    let mut clock = source.clock(&ClockKey::site(&lattice.decode(v)));
                    let ring = clock.first_ring_after(t);
                    weights[v] = ring - t;
                    times[v] = ring;
                    heap.push(Reverse(Node(ring, v)));
                }
                Flavor::ModifiedEast => {
                    let head = lattice.decode(v);
                    let key = match keying {
                        EdgeKeying::Distinct => ClockKey::edge(&head, axis),
                        EdgeKeying::HeadSite => ClockKey::site(&head),
                    };
                    let ring = source.clock(&key).first_ring_after(t);
                    weights[v * d + axis] = ring - t;
                    if ring < times[v] {
                        times[v] = ring;
                        heap.push(Reverse(Node(ring, v)));
                    }
                }
            }
        }
    }
    Ok(PassageTimes {
        lattice,
        times,
        field: PassageField {
            flavor: params.flavor,
            dim: d,
            origin_delay,
            weights,
        },
    })
}

/// Threshold decomposition of a passage field: an object is open iff its
/// weight is below `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpennessField {
    pub threshold: f64,
    /// Aligned with [`PassageField::weights`].
    pub open: Vec<bool>,
    weights: Vec<f64>,
}

impl OpennessField {
    pub fn open_fraction(&self) -> f64 {
        self.open.iter().filter(|&&o| o).count() as f64 / self.open.len().max(1) as f64
    }

    pub fn open_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().zip(&self.open).filter(|(_, &o)| o).map(|(&w, _)| w)
    }

    pub fn closed_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights
            .iter()
            .zip(&self.open)
            .filter(|(_, &o)| !o)
            .map(|(&w, _)| w)
    }
}

pub fn decompose_open(field: &PassageField, threshold: f64) -> Result<OpennessField> {
    if !(threshold > 0.0) {
        return invalid("threshold must be positive");
    }
    let weights: Vec<f64> = field.weights().collect();
    Ok(OpennessField {
        threshold,
        open: weights.iter().map(|&w| w < threshold).collect(),
        weights,
    })
}

/// Two-stage sampler: openness ~ Bernoulli(`1 - e^{-T}`), then an Exp(1)
/// conditioned below `T` (open) or above `T` (closed). Reproduces Exp(1).
pub fn sample_two_stage<R: Rng + ?Sized>(threshold: f64, rng: &mut R) -> (bool, f64) {
    let p_open = open_probability(threshold);
    let open = rng.random::<f64>() < p_open;
    let x = if open {
        // Inverse CDF of Exp(1) restricted to [0, T).
        let u: f64 = rng.random();
        -(-u * p_open).ln_1p()
    } else {
        threshold + exp1(rng)
    };
    (open, x)
}

/// Estimate of `E[exp(τ(ℓ e*)/ℓ)]` at `p = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentDiagnostic {
    pub dim: usize,
    pub block: usize,
    pub flavor: Flavor,
    pub moment: EstimateCI,
    pub log_moment: f64,
    /// Hill estimate of the tail index of `exp(τ/ℓ)`; the mean is finite
    /// only if the index exceeds one.
    pub tail_index: f64,
    pub tail_index_stderr: f64,
    /// Share of the sum carried by the largest term.
    pub max_term_share: f64,
    pub diverges: bool,
    pub threshold_t: Option<f64>,
    pub epsilon: Option<f64>,
    /// `exp(d β_T + ε)` when a threshold is supplied.
    pub bound: Option<f64>,
    pub below_bound: Option<bool>,
}

/// Tail index below which the empirical moment is reported as divergent.
pub const DIVERGENCE_TAIL_INDEX: f64 = 1.25;

fn diagonal_passage(params: &ModelParams, source: &RandomSource) -> Result<f64> {
    let pt = fpp_times(params, source)?;
    Ok(pt.times[pt.lattice.len() - 1])
}

/// `E[exp(τ(ℓ e*)/ℓ)]` over `reps` replicas, compared against
/// `exp(d β_T + ε)` when `(threshold, epsilon)` is supplied.
pub fn exp_moment_diagnostic(
    dim: usize,
    block: usize,
    flavor: Flavor,
    reps: usize,
    source: &RandomSource,
    threshold: Option<(f64, f64)>,
) -> Result<MomentDiagnostic> {
    if block == 0 || reps < 2 {
        return invalid("need block >= 1 and reps >= 2");
    }
    let params = ModelParams::new(dim, flavor, 0.0, block)?;
    let taus: Vec<f64> = map_replicas(source, reps, |_, src| diagonal_passage(&params, &src))
        .into_iter()
        .collect::<Result<_>>()?;
    let logs: Vec<f64> = taus.iter().map(|t| t / block as f64).collect();
    Ok(moment_from_logs(dim, block, flavor, &logs, threshold))
}

pub(crate) fn moment_from_logs(
    dim: usize,
    block: usize,
    flavor: Flavor,
    logs: &[f64],
    threshold: Option<(f64, f64)>,
) -> MomentDiagnostic {
    let n = logs.len();
    let lse = log_sum_exp(logs);
    let log_moment = lse - (n as f64).ln();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Moments = logs.iter().map(|x| (x - top).exp()).collect();
    let scale = top.exp();
    let moment = EstimateCI::new(log_moment.exp(), scale * scaled.stderr(), n as u64);
    let max_term_share = (top - lse).exp();

    let mut sorted = logs.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let k = (n / 100).clamp(10.min(n - 1), n - 1);
    let base = sorted[k];
    let mean_excess = sorted[..k].iter().map(|x| x - base).sum::<f64>() / k as f64;
    let tail_index = if mean_excess > 0.0 {
        1.0 / mean_excess
    } else {
        f64::INFINITY
    };
    let tail_index_stderr = tail_index / (k as f64).sqrt();

    let (bound, below) = match threshold {
        Some((t, eps)) => {
            let b = beta_t(t).map(|bt| (dim as f64 * bt + eps).exp()).unwrap_or(f64::NAN);
            (Some(b), Some(moment.estimate < b))
        }
        None => (None, None),
    };
    MomentDiagnostic {
        dim,
        block,
        flavor,
        moment,
        log_moment,
        tail_index,
        tail_index_stderr,
        max_term_share,
        diverges: tail_index < DIVERGENCE_TAIL_INDEX,
        threshold_t: threshold.map(|t| t.0),
        epsilon: threshold.map(|t| t.1),
        bound,
        below_bound: below,
    }
}

/// Empirical `P(τ(n e*) ≥ λ n)` per scale plus the fitted slope of its
/// logarithm in `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernoffCertificate {
    pub lambda: f64,
    pub scales: Vec<usize>,
    pub tail: Vec<EstimateCI>,
    /// Fit over scales with a nonzero count; `None` if fewer than two.
    pub decay: Option<LinearFit>,
}

pub fn chernoff_certificate(
    dim: usize,
    flavor: Flavor,
    scales: &[usize],
    lambda: f64,
    reps: usize,
    source: &RandomSource,
) -> Result<ChernoffCertificate> {
    let mut tail = Vec::with_capacity(scales.len());
    for (k, &n) in scales.iter().enumerate() {
        let params = ModelParams::new(dim, flavor, 0.0, n)?;
        let src = source.replica(0xC4E0 + k as u64);
        let hits = map_replicas(&src, reps, |_, s| {
            diagonal_passage(&params, &s).map(|t| t >= lambda * n as f64)
        })
        .into_iter()
        .collect::<Result<Vec<bool>>>()?;
        tail.push(EstimateCI::proportion(
            hits.iter().filter(|&&h| h).count() as u64,
            reps as u64,
        ));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = scales
        .iter()
        .zip(&tail)
        .filter(|(_, e)| e.estimate > 0.0)
        .map(|(&n, e)| (n as f64, e.estimate.ln()))
        .unzip();
    Ok(ChernoffCertificate {
        lambda,
        scales: scales.to_vec(),
        tail,
        decay: linear_fit(&xs, &ys, None),
    })
}

/// CSV rows `x_1,..,x_d,tau` in index order.
pub fn passage_rows(times: &PassageTimes) -> Vec<(Vertex, f64)> {
    (0..times.lattice.len())
        .map(|i| (times.lattice.decode(i), times.times[i]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ks_test;

    fn params(d: usize, flavor: Flavor, side: usize) -> ModelParams {
        ModelParams::new(d, flavor, 0.0, side).unwrap()
    }

    #[test]
    fn rejects_positive_p() {
        let p = ModelParams::new(2, Flavor::East, 0.1, 3).unwrap();
        assert!(fpp_times(&p, &RandomSource::new(1)).is_err());
    }

    #[test]
    fn one_dimensional_chain_is_a_sum() {
        for flavor in Flavor::ALL {
            let pt = fpp_times(&params(1, flavor, 20), &RandomSource::new(5)).unwrap();
            let mut acc = pt.field.origin_delay;
            assert_eq!(pt.times[0], acc);
            for i in 1..=20 {
                acc += match flavor {
                    Flavor::East => pt.field.site_weight(i).unwrap(),
                    Flavor::ModifiedEast => pt.field.edge_weight(i, 0).unwrap(),
                };
                assert!((pt.times[i] - acc).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn one_dimensional_mean_is_n_plus_one() {
        let n = 30;
        let src = RandomSource::new(99);
        let m: Moments = (0..4000)
            .map(|r| fpp_times(&params(1, Flavor::East, n), &src.replica(r)).unwrap().times[n])
            .collect();
        assert!(m.estimate().covers(n as f64 + 1.0, 3.0), "{:?}", m);
    }

    #[test]
    fn recursion_structure_holds() {
        for flavor in Flavor::ALL {
            let pt = fpp_times(&params(2, flavor, 12), &RandomSource::new(8)).unwrap();
            let l = &pt.lattice;
            for v in 1..l.len() {
                let preds: Vec<usize> = (0..2).filter_map(|a| l.pred(v, a)).collect();
                let min_pred = preds.iter().map(|&u| pt.times[u]).fold(f64::INFINITY, f64::min);
                assert!(pt.times[v] > min_pred);
                match flavor {
                    Flavor::East => {
                        let x = pt.field.site_weight(v).unwrap();
                        assert!((pt.times[v] - (min_pred + x)).abs() < 1e-9);
                    }
                    Flavor::ModifiedEast => {
                        let best = (0..2)
                            .filter_map(|a| l.pred(v, a).map(|u| pt.times[u] + pt.field.edge_weight(v, a).unwrap()))
                            .fold(f64::INFINITY, f64::min);
                        assert!((pt.times[v] - best).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn flavors_coincide_in_one_dimension_under_the_bijection() {
        for seed in 0..20 {
            let src = RandomSource::new(seed);
            let a = fpp_times(&params(1, Flavor::East, 25), &src).unwrap();
            let b = fpp_times_keyed(&params(1, Flavor::ModifiedEast, 25), &src, EdgeKeying::HeadSite).unwrap();
            assert_eq!(a.times, b.times);
        }
    }

    #[test]
    fn origin_delay_is_exponential() {
        let src = RandomSource::new(2024);
        let ys: Vec<f64> = (0..10_000)
            .map(|r| fpp_times(&params(2, Flavor::East, 0), &src.replica(r)).unwrap().times[0])
            .collect();
        let ks = ks_test(&ys, |x| 1.0 - (-x).exp());
        assert!(ks.p_value > 0.01, "{ks:?}");
    }

    #[test]
    fn realized_weights_are_exponential() {
        let pt = fpp_times(&params(2, Flavor::ModifiedEast, 60), &RandomSource::new(5)).unwrap();
        let w: Vec<f64> = pt.field.weights().collect();
        assert_eq!(w.len(), 2 * 60 * 61);
        assert!(w.iter().all(|&x| x > 0.0));
        let ks = ks_test(&w, |x| 1.0 - (-x).exp());
        assert!(ks.p_value > 0.01, "{ks:?}");
    }

    #[test]
    fn openness_fraction_and_conditional_mean() {
        let pt = fpp_times(&params(2, Flavor::ModifiedEast, 230), &RandomSource::new(12)).unwrap();
        let open = decompose_open(&pt.field, 1.0).unwrap();
        let n = open.open.len() as f64;
        assert!(n > 100_000.0);
        let expected = 1.0 - (-1.0f64).exp();
        let se = (expected * (1.0 - expected) / n).sqrt();
        assert!((open.open_fraction() - expected).abs() < 3.0 * se);
        let m: Moments = open.open_weights().collect();
        assert!(m.estimate().covers(beta_t(1.0).unwrap(), 3.0), "{m:?}");
        assert!(open.closed_weights().all(|w| w >= 1.0));
        let all_open = decompose_open(&pt.field, 1e9).unwrap();
        assert_eq!(all_open.open_fraction(), 1.0);
        assert!(decompose_open(&pt.field, 0.0).is_err());
    }

    #[test]
    fn two_stage_sampling_reproduces_exponential() {
        let mut rng = RandomSource::new(77).aux(1);
        for t in [0.3, 1.0, 2.0] {
            let xs: Vec<f64> = (0..20_000).map(|_| sample_two_stage(t, &mut rng).1).collect();
            let ks = ks_test(&xs, |x| 1.0 - (-x).exp());
            assert!(ks.p_value > 0.01, "T={t} {ks:?}");
        }
    }

    #[test]
    fn moment_of_gamma_three_at_one_half() {
        // τ(2 e_1) = Y + X_1 + X_2 ~ Gamma(3, 1), E exp(τ/2) = (1 - 1/2)^{-3} = 8.
        let d = exp_moment_diagnostic(1, 2, Flavor::East, 200_000, &RandomSource::new(3), None).unwrap();
        assert!((d.moment.estimate / 8.0 - 1.0).abs() < 0.1, "{d:?}");
        assert!(!d.diverges, "{d:?}");
    }

    #[test]
    fn moment_at_block_one_diverges() {
        let d = exp_moment_diagnostic(1, 1, Flavor::East, 200_000, &RandomSource::new(3), None).unwrap();
        assert!(d.diverges, "{d:?}");
    }

    #[test]
    fn geodesic_times_increase_along_paths() {
        let pt = fpp_times(&params(3, Flavor::East, 6), &RandomSource::new(31)).unwrap();
        let l = &pt.lattice;
        for v in 0..l.len() {
            for a in 0..3 {
                if let Some(w) = l.succ(v, a) {
                    // A successor is infected after at least one predecessor.
                    let min_pred = (0..3)
                        .filter_map(|b| l.pred(w, b))
                        .map(|u| pt.times[u])
                        .fold(f64::INFINITY, f64::min);
                    assert!(pt.times[w] > min_pred);
                }
            }
        }
    }
}
