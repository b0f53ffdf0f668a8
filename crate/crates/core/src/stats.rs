//! Small statistics toolkit shared by the Monte Carlo drivers.

use serde::{Deserialize, Serialize};

/// Streaming count/mean/M2 accumulator. `merge` is associative, so replica
/// results can be combined in any grouping; callers merge in replica order
/// to get bit-identical output regardless of worker count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        Moments {
            count: self.count + other.count,
            mean: self.mean + delta * other.count as f64 / n,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * other.count as f64 / n,
        }
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            return f64::INFINITY;
        }
        (self.variance() / self.count as f64).sqrt()
    }

    pub fn estimate(&self) -> EstimateCI {
        EstimateCI::new(self.mean, self.stderr(), self.count)
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Monte Carlo point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateCI {
    pub estimate: f64,
    pub stderr: f64,
    pub reps: u64,
}

impl EstimateCI {
    pub fn new(estimate: f64, stderr: f64, reps: u64) -> Self {
        Self { estimate, stderr, reps }
    }

    /// Binomial proportion with its plug-in standard error.
    pub fn proportion(successes: u64, reps: u64) -> Self {
        let p = if reps == 0 {
            f64::NAN
        } else {
            successes as f64 / reps as f64
        };
        Self::new(p, (p * (1.0 - p) / reps as f64).sqrt(), reps)
    }

    pub fn lower(&self, z: f64) -> f64 {
        self.estimate - z * self.stderr
    }

    pub fn upper(&self, z: f64) -> f64 {
        self.estimate + z * self.stderr
    }

    /// `|estimate - value| <= z * stderr`.
    pub fn covers(&self, value: f64, z: f64) -> bool {
        (self.estimate - value).abs() <= z * self.stderr
    }

    /// `self <= other` up to `z` combined standard errors.
    pub fn le_within(&self, other: &EstimateCI, z: f64) -> bool {
        self.estimate - other.estimate <= z * self.stderr.hypot(other.stderr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    /// Residual standard deviation.
    pub residual_sd: f64,
    pub points: usize,
}

/// Ordinary least squares `y = slope x + intercept`, optionally weighted.
pub fn linear_fit(xs: &[f64], ys: &[f64], weights: Option<&[f64]>) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let sw: f64 = (0..n).map(w).sum();
    let mx = (0..n).map(|i| w(i) * xs[i]).sum::<f64>() / sw;
    let my = (0..n).map(|i| w(i) * ys[i]).sum::<f64>() / sw;
    let sxx: f64 = (0..n).map(|i| w(i) * (xs[i] - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = (0..n).map(|i| w(i) * (xs[i] - mx) * (ys[i] - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = (0..n).map(|i| w(i) * (ys[i] - intercept - slope * xs[i]).powi(2)).sum();
    let dof = n.saturating_sub(2).max(1) as f64;
    let s2 = rss / dof;
    // With known inverse-variance weights the scale is fixed at one.
    let scale = if weights.is_some() { 1.0_f64.max(s2) } else { s2 };
    Some(LinearFit {
        slope,
        intercept,
        slope_stderr: (scale / sxx).sqrt(),
        intercept_stderr: (scale * (1.0 / sw + mx * mx / sxx)).sqrt(),
        residual_sd: (rss / dof).sqrt(),
        points: n,
    })
}

/// Two-sided one-sample Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub samples: usize,
}

pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    // Stephens' small-sample correction of the asymptotic Kolmogorov law.
    let sq = n.sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d),
        samples: xs.len(),
    }
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Empirical quantile with linear interpolation (type 7).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `log(sum(exp(xs)))` without overflow.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
