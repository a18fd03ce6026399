//! Posteriors on group size and future births given one observed rank.

mod closed_form;
mod frequentist;
mod general;
mod tabulated;

pub use closed_form::{
    future_count_posterior, pareto_closed_form, ParetoRankPosterior, RankPrior, RANK_PRIOR_NODES,
};
pub use frequentist::{coverage_check, frequentist_estimate, sia_truncation_demo, unbiasedness_check};
pub use general::{
    general_posterior, prior_insensitivity_check, AlphaPrior, GeneralOptions, InsensitivityReport, NminPrior,
    ParameterPrior, RankCut, ALPHA_MAX,
};
pub use tabulated::{GridSpec, Summary, TabulatedPosterior, Variable};
