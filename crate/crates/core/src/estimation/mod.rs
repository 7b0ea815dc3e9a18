//! Censored maximum-likelihood estimation of the model parameters.
//!
//! A pair ending in a lane change toward `d` contributes
//! `log(g_d(t_max) * (1 - F_{-d}(t_max)))`; a censored pair contributes
//! `log((1 - F_left(t_max)) * (1 - F_right(t_max)))`. Directions without an
//! adjacent lane carry zero passage probability.

mod fit;
mod likelihood;

pub use fit::{fit, standard_errors, FitOptions, FitResult, Inference, PValueMethod};
pub use likelihood::{
    log_likelihood_from_passage, pair_log_likelihood, prepare_pairs, total_log_likelihood, Convention,
    PreparedPair, PROBABILITY_FLOOR,
};
