//! Optimisers and the staged fitting pipeline.

mod adam;
mod lbfgs;
mod pipeline;

pub use adam::{Adam, AdamConfig};
pub use lbfgs::{lbfgs, LbfgsConfig, LbfgsReport};
pub use pipeline::{
    joint_context, lbfgs_translate, run_pipeline, run_stage2, run_stage3, scene_backend, AlignedPerson, NnBackend,
    PipelineConfig, PipelineOutput, Schedule, Stage3Output,
};

use serde::{Deserialize, Serialize};

use crate::body::BodyParams;

/// Optimised variables: one parameter set per person and the shared scene scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimState {
    pub humans: Vec<BodyParams>,
    pub scale: f64,
}
