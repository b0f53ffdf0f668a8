//! Closed-form scalars: `β_c`, `T_c`, `β_T`, `α_T(t)`, the Chernoff level
//! `λ = (1 + d β_T)/2`, and cutoff bookkeeping `T_L = ρ L + d L^{2/3}`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Below this `p_c` the series form of `β_c` is used.
const SERIES_CUTOFF: f64 = 0.05;

/// `β_c = 1 + (1 - p) ln(1 - p) / p`, the mean of an Exp(1) variable
/// conditioned below `T_c = -ln(1 - p)`.
pub fn beta_c(p_c: f64) -> Result<f64> {
    if !(p_c > 0.0 && p_c < 1.0) {
        return invalid(format!("p_c = {p_c} must lie in (0, 1)"));
    }
    if p_c < SERIES_CUTOFF {
        // Σ_{j≥1} p^j / (j (j+1)); the closed form cancels to 1 - 1 here.
        let mut term = p_c;
        let mut sum = 0.0;
        for j in 1..60 {
            let jf = j as f64;
            let add = term / (jf * (jf + 1.0));
            sum += add;
            if add < 1e-18 * sum {
                break;
            }
            term *= p_c;
        }
        return Ok(sum);
    }
    Ok(1.0 + (1.0 - p_c) * (-p_c).ln_1p() / p_c)
}

/// `T_c` with `1 - e^{-T_c} = p_c`.
pub fn critical_time(p_c: f64) -> Result<f64> {
    if !(p_c > 0.0 && p_c < 1.0) {
        return invalid(format!("p_c = {p_c} must lie in (0, 1)"));
    }
    Ok(-(-p_c).ln_1p())
}

/// Probability that an Exp(1) variable is below `t`.
pub fn open_probability(t: f64) -> f64 {
    -(-t).exp_m1()
}

/// `β_T = E[X | X < T] = 1 - T / (e^T - 1)` for `X ~ Exp(1)`.
pub fn beta_t(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return invalid(format!("T = {t} must be positive"));
    }
    if t < 1e-4 {
        // T/2 - T^2/12 + T^4/720
        let t2 = t * t;
        return Ok(t / 2.0 - t2 / 12.0 + t2 * t2 / 720.0);
    }
    if t > 700.0 {
        return Ok(1.0);
    }
    Ok(1.0 - t / t.exp_m1())
}

/// `α_T(s) = E[e^{sX} | X ≤ T] = (e^T - e^{sT}) / ((1 - s)(e^T - 1))` for
/// `s ≤ 1`, with the removable point `s = 1` filled by `T e^T/(e^T - 1)`.
/// Negative `s` is accepted (the conditional MGF is finite there).
pub fn alpha_t(t: f64, s: f64) -> Result<f64> {
    if !(t > 0.0) {
        return invalid(format!("T = {t} must be positive"));
    }
    if !(s <= 1.0) {
        return invalid(format!("argument {s} beyond the removable point 1"));
    }
    let gap = 1.0 - s;
    // e^T - e^{sT} = -e^T expm1(-(1-s) T)
    let scaled = if gap == 0.0 { t } else { -(-gap * t).exp_m1() / gap };
    // e^T / (e^T - 1) = 1 / (1 - e^{-T})
    Ok(scaled / open_probability(t))
}

/// `λ = (1 + d β_T) / 2`.
pub fn chernoff_level(dim: usize, beta_t: f64) -> f64 {
    (1.0 + dim as f64 * beta_t) / 2.0
}

/// `T_L = ρ L + d L^{2/3}`.
pub fn cutoff_location(rho: f64, dim: usize, side: f64) -> f64 {
    rho * side + dim as f64 * cutoff_window(side)
}

/// `L^{2/3}`.
pub fn cutoff_window(side: f64) -> f64 {
    side.powf(2.0 / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Estimated,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub dim: usize,
    pub p_c: f64,
    pub p_c_provenance: Provenance,
    pub t_c: f64,
    pub beta_c: f64,
    pub d_beta_c: f64,
    pub condition_holds: bool,
    /// `1 - d β_c`; positive when the condition holds.
    pub condition_margin: f64,
    pub threshold_t: Option<f64>,
    pub beta_t: Option<f64>,
    pub d_beta_t: Option<f64>,
    pub lambda: Option<f64>,
    pub lambda_note: Option<String>,
    pub rho: Option<f64>,
    pub side: Option<usize>,
    pub cutoff_location: Option<f64>,
    pub cutoff_window: Option<f64>,
}

/// Evaluate the diagonal-speed condition and the derived constants.
pub fn condition_report(
    dim: usize,
    p_c: f64,
    provenance: Provenance,
    threshold_t: Option<f64>,
    rho: Option<f64>,
    side: Option<usize>,
) -> Result<ConstantsReport> {
    if dim == 0 {
        return invalid("dimension must be at least 1");
    }
    let t_c = critical_time(p_c)?;
    let bc = beta_c(p_c)?;
    let d_beta_c = dim as f64 * bc;
    let mut report = ConstantsReport {
        dim,
        p_c,
        p_c_provenance: provenance,
        t_c,
        beta_c: bc,
        d_beta_c,
        condition_holds: d_beta_c < 1.0,
        condition_margin: 1.0 - d_beta_c,
        threshold_t,
        beta_t: None,
        d_beta_t: None,
        lambda: None,
        lambda_note: None,
        rho,
        side,
        cutoff_location: None,
        cutoff_window: None,
    };
    if let Some(t) = threshold_t {
        let bt = beta_t(t)?;
        report.beta_t = Some(bt);
        report.d_beta_t = Some(dim as f64 * bt);
        if t <= t_c {
            report.lambda_note = Some(format!(
                "T = {t} does not exceed T_c = {t_c:.6}; open paths need T > T_c"
            ));
        } else if dim as f64 * bt >= 1.0 {
            report.lambda_note = Some(format!("d beta_T = {:.6} >= 1", dim as f64 * bt));
        } else {
            report.lambda = Some(chernoff_level(dim, bt));
        }
    }
    if let Some(l) = side {
        let w = cutoff_window(l as f64);
        report.cutoff_window = Some(w);
        if let Some(r) = rho {
            report.cutoff_location = Some(cutoff_location(r, dim, l as f64));
        }
    }
    Ok(report)
}
