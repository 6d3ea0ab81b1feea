//! Counterfactual effect estimation and testing.

mod effects;
mod inference;
mod pipeline;
mod treatment;

pub use effects::{
    estimate_effects, estimate_effects_original, estimate_effects_transformed, EffectPath, Effects,
    Estimand, Scale,
};
pub use inference::{bootstrap_test, gaussian_test, significance_stars, EffectTest, TestMethod, MIN_BOOT};
pub use pipeline::{run_carima, AnalysisConfig, ArmaOrders, CausalReport, HorizonSummary, TestChoice};
pub use treatment::{validate_treatment, TreatmentPath, Violation, ViolationKind};
