//! Fitting objective: keypoint reprojection, depth Chamfer, contact,
//! interpenetration and regularisation terms with analytic gradients.
//!
//! Nearest-neighbour correspondences, the active contact set and the
//! occlusion masks are piecewise constant. Gradients are taken with them held
//! fixed; [`Matching`] makes that explicit so callers can freeze them.

mod eval;

pub use eval::{
    evaluate, evaluate_human, evaluate_with, extract_contacts, loss_contact, loss_depth, loss_interpenetration,
    loss_j2d, loss_reg, ContactReport, Evaluation, HumanEvaluation, Matching, TermValues,
};

use serde::{Deserialize, Serialize};

use crate::body::{forward, BodyParams, BodyTemplate, ContactVertexSet};
use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, KdTree, Mask, RobustLoss, Vec2, Vec3};
use crate::nn::NearestScene;
use crate::visibility::VisibilityMasks;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    pub j2d: f64,
    pub d: f64,
    pub c: f64,
    pub i: f64,
    pub reg: f64,
    pub reg_occluded_multiplier: f64,
    pub scale_reg: f64,
    pub trans_reg: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self::joint()
    }
}

impl LossWeights {
    pub fn joint() -> Self {
        Self {
            j2d: 10000.0,
            d: 0.005,
            c: 0.7,
            i: 0.3,
            reg: 45.0,
            reg_occluded_multiplier: 3.0,
            scale_reg: 1.0,
            trans_reg: 0.1,
        }
    }

    /// Translation alignment objective: keypoints plus depth only.
    pub fn alignment() -> Self {
        Self { j2d: 5000.0, d: 0.6, ..Self::zero() }
    }

    pub fn zero() -> Self {
        Self {
            j2d: 0.0,
            d: 0.0,
            c: 0.0,
            i: 0.0,
            reg: 0.0,
            reg_occluded_multiplier: 1.0,
            scale_reg: 0.0,
            trans_reg: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("weights.j2d", self.j2d),
            ("weights.d", self.d),
            ("weights.c", self.c),
            ("weights.i", self.i),
            ("weights.reg", self.reg),
            ("weights.scale_reg", self.scale_reg),
            ("weights.trans_reg", self.trans_reg),
        ];
        for (name, w) in fields {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::invariant(name, format!("must be finite and >= 0, got {w}")));
            }
        }
        if !(self.reg_occluded_multiplier.is_finite() && self.reg_occluded_multiplier >= 1.0) {
            return Err(Error::invariant(
                "weights.reg_occluded_multiplier",
                format!("must be >= 1, got {}", self.reg_occluded_multiplier),
            ));
        }
        Ok(())
    }
}

/// Detected 2D keypoints indexed by detector keypoint id, in pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keypoints2D {
    pub points: Vec<[f64; 2]>,
    pub confidence: Vec<f64>,
}

impl Keypoints2D {
    pub fn new(points: Vec<[f64; 2]>, confidence: Vec<f64>) -> Result<Self> {
        let kp = Self { points, confidence };
        kp.validate()?;
        Ok(kp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() != self.confidence.len() {
            return Err(Error::invariant(
                "keypoints",
                format!("{} points but {} confidences", self.points.len(), self.confidence.len()),
            ));
        }
        if let Some(c) = self.confidence.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::invariant("keypoints.confidence", format!("{c} outside [0, 1]")));
        }
        if self.points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invariant("keypoints.points", "non-finite coordinate"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, id: usize) -> Vec2 {
        Vec2::new(self.points[id][0], self.points[id][1])
    }
}

/// Distance thresholds for contacts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContactThresholds {
    /// Active-contact gate on the squared distance, in m^2.
    pub active_sq: f64,
    /// Contact extraction distance, in m; strict comparison.
    pub extract: f64,
}

impl Default for ContactThresholds {
    fn default() -> Self {
        Self { active_sq: 0.15 * 0.15, extract: 0.05 }
    }
}

impl ContactThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.active_sq.is_finite() && self.active_sq > 0.0) {
            return Err(Error::invariant("contacts.active_sq", format!("must be > 0, got {}", self.active_sq)));
        }
        if !(self.extract.is_finite() && self.extract > 0.0) {
            return Err(Error::invariant("contacts.extract", format!("must be > 0, got {}", self.extract)));
        }
        Ok(())
    }
}

/// Everything the objective needs about one person.
#[derive(Debug, Clone)]
pub struct HumanTerms {
    pub keypoints: Keypoints2D,
    /// `(detector keypoint id, joint index)` pairs.
    pub keypoint_map: Vec<(usize, usize)>,
    /// Observed metric points of this person.
    pub points: Vec<Vec3>,
    points_tree: KdTree,
    pub masks: VisibilityMasks,
    pub contacts: ContactVertexSet,
    pub human_mask: Option<Mask>,
    pub init: BodyParams,
    /// Initial vertices relative to the initial root.
    pub init_relative: Vec<Vec3>,
}

impl HumanTerms {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        template: &BodyTemplate,
        keypoints: Keypoints2D,
        keypoint_map: Vec<(usize, usize)>,
        points: Vec<Vec3>,
        masks: VisibilityMasks,
        contacts: ContactVertexSet,
        human_mask: Option<Mask>,
        init: BodyParams,
    ) -> Result<Self> {
        let n = template.num_vertices();
        if masks.camera_facing.len() != n || masks.occluded.len() != n {
            return Err(Error::DimensionMismatch(format!("visibility masks do not cover {n} vertices")));
        }
        if let Some(&(k, j)) = keypoint_map.iter().find(|(k, j)| *k >= keypoints.len() || *j >= template.num_joints()) {
            return Err(Error::invariant("keypoint_map", format!("pair ({k}, {j}) out of range")));
        }
        let posed = forward(template, &init)?;
        let init_relative = posed.vertices.iter().map(|v| v - posed.root).collect();
        let points_tree = KdTree::new(&points);
        Ok(Self {
            keypoints,
            keypoint_map,
            points,
            points_tree,
            masks,
            contacts,
            human_mask,
            init,
            init_relative,
        })
    }

    pub fn points_tree(&self) -> &KdTree {
        &self.points_tree
    }
}

/// Shared context for a joint fit of one or more people against one scene.
pub struct ObjectiveContext<'a> {
    pub template: &'a BodyTemplate,
    pub scene: &'a dyn NearestScene,
    pub cam: CameraIntrinsics,
    pub humans: Vec<HumanTerms>,
    pub thresholds: ContactThresholds,
    pub contact_loss: RobustLoss,
    pub penetration_loss: RobustLoss,
    pub init_scale: f64,
}

impl<'a> ObjectiveContext<'a> {
    pub fn new(
        template: &'a BodyTemplate,
        scene: &'a dyn NearestScene,
        cam: CameraIntrinsics,
        humans: Vec<HumanTerms>,
    ) -> Self {
        Self {
            template,
            scene,
            cam,
            humans,
            thresholds: ContactThresholds::default(),
            contact_loss: RobustLoss::default(),
            penetration_loss: RobustLoss::default(),
            init_scale: 1.0,
        }
    }
}
