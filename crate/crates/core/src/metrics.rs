//! Pose and contact evaluation against ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{procrustes_align, Vec3};

/// Pose errors in millimeters, contact scores in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mpjpe: f64,
    pub pa_mpjpe: f64,
    pub mpvpe: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContactCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl ContactCounts {
    pub fn from_labels(pred: &[bool], gt: &[bool]) -> Result<Self> {
        if pred.len() != gt.len() {
            return Err(Error::CardinalityMismatch(format!("{} predicted vs {} true contact labels", pred.len(), gt.len())));
        }
        let mut c = Self::default();
        for (&p, &g) in pred.iter().zip(gt) {
            match (p, g) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => {}
            }
        }
        Ok(c)
    }

    pub fn add(&mut self, other: ContactCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    /// Zero when nothing was predicted.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// Zero when nothing is true.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn mean_distance_mm(a: &[Vec3], b: &[Vec3]) -> f64 {
    1000.0 * a.iter().zip(b).map(|(p, q)| (p - q).norm()).sum::<f64>() / a.len() as f64
}

pub fn compute_metrics(
    pred_vertices: &[Vec3],
    pred_joints: &[Vec3],
    gt_vertices: &[Vec3],
    gt_joints: &[Vec3],
    pred_contacts: &[bool],
    gt_contacts: &[bool],
) -> Result<MetricsReport> {
    if pred_vertices.len() != gt_vertices.len() || pred_vertices.is_empty() {
        return Err(Error::CardinalityMismatch(format!(
            "{} predicted vs {} true vertices",
            pred_vertices.len(),
            gt_vertices.len()
        )));
    }
    if pred_joints.len() != gt_joints.len() || pred_joints.is_empty() {
        return Err(Error::CardinalityMismatch(format!("{} predicted vs {} true joints", pred_joints.len(), gt_joints.len())));
    }
    let counts = ContactCounts::from_labels(pred_contacts, gt_contacts)?;
    let aligned = procrustes_align(pred_joints, gt_joints)?;
    let moved: Vec<Vec3> = pred_joints.iter().map(|p| aligned.apply(p)).collect();
    Ok(MetricsReport {
        mpjpe: mean_distance_mm(pred_joints, gt_joints),
        pa_mpjpe: mean_distance_mm(&moved, gt_joints),
        mpvpe: mean_distance_mm(pred_vertices, gt_vertices),
        precision: counts.precision(),
        recall: counts.recall(),
        f1: counts.f1(),
    })
}
