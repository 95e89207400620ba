//! Scoring candidate products by mutual information with the label, budget
//! allocation across product orders, and the final ranked feature sets.

mod budget;
mod counts;
mod engine;
mod entropy;
mod rank;

pub use budget::{allocate_budget, BudgetPlan};
pub use counts::{mutual_information, CountKey, CountTable, MiScore, SUPPORT_CAP};
pub use engine::{count_products, product_value, score_stage, ScoringConfig, StageScores};
pub use entropy::{
    bub_coefficients, entropy, support_bucket, EntropyEstimate, Estimator, BUB_SUPPORT_CAP,
};
pub use rank::{
    final_order, final_rank, heuristic_noise, heuristic_products, parse_scores, rank_desc,
    write_scores, ScoredFeature,
};
