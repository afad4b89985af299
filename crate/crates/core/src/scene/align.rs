use rand::Rng;
use serde::{Deserialize, Serialize};

use super::RansacConfig;
use crate::error::{Error, Result};
use crate::geometry::{Mask, PointMap, Vec3};

const MIN_OVERLAP: usize = 100;

/// Affine depth correction `p -> s * p + (0, 0, tz)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleShift {
    pub s: f64,
    /// Meters.
    pub tz: f64,
}

impl ScaleShift {
    pub const IDENTITY: ScaleShift = ScaleShift { s: 1.0, tz: 0.0 };

    #[inline]
    pub fn apply(&self, p: Vec3) -> Vec3 {
        Vec3::new(self.s * p.x, self.s * p.y, self.s * p.z + self.tz)
    }
}

fn least_squares(pairs: &[(f64, f64)], idx: impl Iterator<Item = usize>) -> Option<ScaleShift> {
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in idx {
        let (x, y) = pairs[i];
        n += 1.0;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    if n < 2.0 {
        return None;
    }
    let (mx, my) = (sx / n, sy / n);
    let var = sxx / n - mx * mx;
    if !(var > 1e-300) {
        return None;
    }
    let s = (sxy / n - mx * my) / var;
    Some(ScaleShift { s, tz: my - s * mx })
}

/// Fits the scale and depth shift taking `rel` onto `metric`, using depth
/// residuals over pixels valid in both and not set in `exclude`.
pub fn align_scale_shift(
    rel: &PointMap,
    metric: &PointMap,
    exclude: Option<&Mask>,
    cfg: &RansacConfig,
) -> Result<ScaleShift> {
    cfg.validate()?;
    if rel.width() != metric.width() || rel.height() != metric.height() {
        return Err(Error::DimensionMismatch(format!(
            "relative map {}x{} vs metric map {}x{}",
            rel.width(),
            rel.height(),
            metric.width(),
            metric.height()
        )));
    }
    if let Some(m) = exclude {
        if m.width() != rel.width() || m.height() != rel.height() {
            return Err(Error::DimensionMismatch("exclusion mask size differs from point maps".into()));
        }
    }
    let pairs: Vec<(f64, f64)> = rel
        .valid_points()
        .filter(|(i, _)| !exclude.is_some_and(|m| m.get_index(*i)))
        .filter_map(|(i, pr)| metric.get_index(i).map(|pm| (pr.z, pm.z)))
        .collect();
    if pairs.len() < MIN_OVERLAP {
        return Err(Error::InsufficientOverlap {
            found: pairs.len(),
            needed: MIN_OVERLAP,
        });
    }

    let thr = cfg.inlier_threshold;
    let count = |m: &ScaleShift| {
        pairs
            .iter()
            .filter(|(x, y)| (m.s * x + m.tz - y).abs() < thr)
            .count()
    };
    let mut best: Option<(usize, ScaleShift)> = None;
    for it in 0..cfg.iterations {
        let mut rng = cfg.iteration_rng(it);
        let a = rng.gen_range(0..pairs.len());
        let b = rng.gen_range(0..pairs.len() - 1);
        let b = if b >= a { b + 1 } else { b };
        let ((x1, y1), (x2, y2)) = (pairs[a], pairs[b]);
        if (x1 - x2).abs() < 1e-12 {
            continue;
        }
        let s = (y1 - y2) / (x1 - x2);
        if !(s > 0.0) {
            continue;
        }
        let model = ScaleShift { s, tz: y1 - s * x1 };
        let n = count(&model);
        if best.is_none_or(|(bn, _)| n > bn) {
            best = Some((n, model));
        }
    }
    let best_fraction = best.map_or(0.0, |(n, _)| n as f64 / pairs.len() as f64);
    let no_consensus = Error::NoConsensus {
        best_fraction,
        required: cfg.min_inlier_fraction,
    };
    let Some((_, mut model)) = best else {
        return Err(no_consensus);
    };
    if best_fraction < cfg.min_inlier_fraction {
        return Err(no_consensus);
    }
    // refit on the consensus set, then once more on the refit's own inliers
    for _ in 0..2 {
        let inliers = (0..pairs.len()).filter(|&i| {
            let (x, y) = pairs[i];
            (model.s * x + model.tz - y).abs() < thr
        });
        match least_squares(&pairs, inliers) {
            Some(m) if m.s > 0.0 => model = m,
            _ => break,
        }
    }
    Ok(model)
}
