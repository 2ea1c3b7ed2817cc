//! Quantitative estimates behind the convergence results.
//!
//! * [`vdc_check`] evaluates both sides of van der Corput's inequality.
//! * [`pair_corr_supnorm`] brackets `max_m sup_t |Σ Y_{n+m} Y_n e(nt)|` with
//!   a zero-padded FFT grid and a Bernstein correction, and
//!   [`unif_est_scaling`] fits its growth exponent in `N`.
//! * [`prop_main_tail`] and [`prop_main_ap_tail`] compute the lacunary
//!   tail series whose summability drives the convergence proofs.
//! * [`slln_ratio`], [`pair_sum_bound`] and [`bc_density`] cover the
//!   probabilistic lemmas about the selection bits.

mod probabilistic;
mod supnorm;
mod tails;
mod vdc;

pub use probabilistic::{
    bc_density, bc_mean_density, bc_uniform, pair_sum_bound, pair_sum_value, slln_ratio, slln_ratio_from,
    PairSumReport, BC_STREAM, PAIR_SUM_RANGE,
};
pub use supnorm::{
    autocorr_supnorm, autocorr_supnorm_with, bernstein_upper, dense_scan, grid_size_for, grid_values,
    pair_corr_supnorm, unif_est_scaling, unif_est_scaling_with, write_fit_csv, write_scaling_csv, ScalingFit,
    ScalingRow, SupNormBracket, YSource, GRID_OVERSAMPLING, SLOPE_TOLERANCE,
};
pub use tails::{prop_main_ap_tail, prop_main_tail, tail_series, TailReport, MAX_COMBINED_DEGREE};
pub use vdc::{vdc_check, vdc_check_all, VdcReport};
