//! Exact and Monte Carlo mixing diagnostics.
//!
//! Exact computations work on the full state space of a small box through
//! the sparse generator and uniformization. Monte Carlo diagnostics cover
//! coalescence under the grand coupling and the front speeds that set the
//! location of the cutoff.

mod coalescence;
mod front;
mod generator;
mod tv;

pub use coalescence::{
    coalescence_summary, coalescence_time, coupled_initial_states, Coalescence, CoalescenceSummary, EXACT_SITES,
    SAMPLED_STATES,
};
pub use front::{estimate_rho, front_profile, FrontProfile, FrontRow, RhoEstimate, DEFAULT_RHO_SCALES};
pub use generator::{build_generator, build_generator_capped, GeneratorMatrix, DEFAULT_CAP_LOG2};
pub use tv::{
    candidate_states, t_mix, t_mix_of, total_variation, tv_curve, tv_curve_of, MixingTime, Propagator, TVCurve,
    EXHAUSTIVE_STATES,
};

#[cfg(test)]
mod tests;
