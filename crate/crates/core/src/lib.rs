//! Poisson-regression workbench for comparing markedness feature systems on
//! cross-linguistic counts of noun-phrase orders.
//!
//! Each of the 24 orders of demonstrative (`D`), numeral (`N`), adjective
//! (`A`) and noun (`n`) is an observation; a [`FeatureSystem`] maps it to 0/1
//! markedness indicators, and [`glm::fit_poisson`] finds the weights that
//! maximise the Poisson likelihood of the observed counts.

pub mod analysis;
pub mod dataset;
pub mod error;
pub mod features;
pub mod glm;
pub mod order;

pub use analysis::{
    compare_all, discrepancy_table, fit_model, pearson_x2, signed_chi2, ComparisonReport,
    Discrepancy, ModelFit, SystemOutcome, SystemSummary,
};
pub use dataset::{
    builtin_dryer_table, load_dataset, response_vector, round_adjusted, DependentVariable,
    OrderCounts, TypologyDataset,
};
pub use error::{Error, Result};
pub use features::{
    builtin_system, builtin_systems, cysouw_features, load_feature_system, validate_cinque_ours,
    FeatureSystem, ValidationCheck, ValidationReport,
};
pub use glm::{
    fit_poisson, linear_predictor, log_likelihood, poisson_logpmf, wald_inference, DesignMatrix,
    FitOptions, FitResult, ResponseVector,
};
pub use order::{parse_word_order, Element, WordOrder};
