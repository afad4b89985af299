//! Articulated body model: template, parameters, skinned forward pass with an
//! analytic reverse pass, and the procedural humanoid used when no external
//! body asset is supplied.
//!
//! Template frame convention: y up, the body faces +z, left is +x.

mod contacts;
mod format;
mod kinematics;
mod params;
mod rotation;
mod synthetic;
mod template;

pub use contacts::{static_contact_preset, ContactSource, ContactVertexSet};
pub use format::{load_template, save_template, template_from_json, template_to_json};
pub use kinematics::{backward, forward, BodyGradInput, Posed};
pub use params::{BodyParams, ParamLayout};
pub use rotation::{axis_angle_to_matrix, axis_angle_jacobian};
pub use synthetic::{make_synthetic_humanoid, make_synthetic_humanoid_with, HumanoidOptions, COCO_KEYPOINT_MAP, SYNTHETIC_PART_NAMES};
pub use template::{BodyTemplate, SparseRow};
