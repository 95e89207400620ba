//! Two-stage semantic role labeling: argument identification over
//! candidate spans, then role classification of the identified arguments,
//! each an averaged perceptron over a selected feature set.

mod candidates;
mod decode;
mod grid;
mod model;
mod perceptron;
mod stage;
mod train;

pub use candidates::{
    argid_instances, generate_candidates, role_inventory, roleclass_instances, Candidate, Source,
};
pub use decode::{
    decode_all, evaluate, gold_predictions, write_predictions, ArgSource, DecodeStats, Decoder,
    Prediction, Prf,
};
pub use grid::{sensitivity_grid, Grid, GRID_SIZES};
pub use model::{extract, parse_model, write_model, FeatureDict, Model, StageModel};
pub use perceptron::{dot, Averaged};
pub use stage::Stage;
pub use train::{
    assemble, best_model, candidate_count, dev_f1, majority_roleclass, train, train_argid,
    train_roleclass, TrainConfig, TrainData,
};
