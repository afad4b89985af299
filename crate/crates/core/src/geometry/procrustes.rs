use super::{Mat3, Vec3};
use crate::error::{Error, Result};

/// Rigid transform mapping predicted points onto targets: `target ~ rotation * pred + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidAlignment {
    pub rotation: Mat3,
    pub translation: Vec3,
    /// Always 1; the alignment never rescales.
    pub scale: f64,
    /// Mean point distance after alignment, in the input units.
    pub residual: f64,
}

impl RigidAlignment {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }
}

/// Least-squares rotation and translation (Kabsch) from `pred` to `gt`.
pub fn procrustes_align(pred: &[Vec3], gt: &[Vec3]) -> Result<RigidAlignment> {
    if pred.len() != gt.len() {
        return Err(Error::CardinalityMismatch(format!(
            "{} predicted vs {} target points",
            pred.len(),
            gt.len()
        )));
    }
    if pred.len() < 3 {
        return Err(Error::DegenerateConfiguration(format!(
            "need at least 3 points, got {}",
            pred.len()
        )));
    }
    let n = pred.len() as f64;
    let mu_p = pred.iter().sum::<Vec3>() / n;
    let mu_g = gt.iter().sum::<Vec3>() / n;
    let mut cov = Mat3::zeros();
    for (p, g) in pred.iter().zip(gt) {
        cov += (g - mu_g) * (p - mu_p).transpose();
    }
    let svd = cov.svd(true, true);
    let s = svd.singular_values;
    if !(s[0] > 0.0) || s[1] <= 1e-12 * s[0] {
        return Err(Error::DegenerateConfiguration(
            "rank-deficient cross-covariance".into(),
        ));
    }
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut d = Mat3::identity();
    if (u * v_t).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let rotation = u * d * v_t;
    let translation = mu_g - rotation * mu_p;
    let residual = pred
        .iter()
        .zip(gt)
        .map(|(p, g)| (rotation * p + translation - g).norm())
        .sum::<f64>()
        / n;
    Ok(RigidAlignment {
        rotation,
        translation,
        scale: 1.0,
        residual,
    })
}
