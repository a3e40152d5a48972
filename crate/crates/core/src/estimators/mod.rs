//! Exponent estimation, closed-form exponent formulas, and the empirical
//! maximal Markov-type-2 ratio.

mod fit;
mod markov;
mod theory;

pub use fit::{fit_loglog, pooled_fit, ExponentFit, FitWindow};
pub use markov::{markov_type_exact, markov_type_ratio, MarkovTypeEstimate, MAX_EXACT_STEPS, MAX_EXACT_VERTICES};
pub use theory::{
    cell_diam_exponent, d_gamma_bounds, d_lower_above, d_lower_below, d_upper_above, d_upper_below, euclid_exponent,
    theory_constants, TheoryConstants, GAMMA_UIPT,
};
