use serde::{Deserialize, Serialize};

use super::outliers::{adaptive_k, outlier_flags, OutlierConfig};
use super::{align_scale_shift, fit_floor_plane, recalibrate_intrinsics, synthesize_floor};
use super::{Plane, RansacConfig, ScaleShift};
use crate::error::{Error, Result};
use crate::geometry::{estimate_grid_normals, CameraIntrinsics, DepthRaster, Mask, PointCloud, PointMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Observed,
    SynthesizedFloor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    pub align_ransac: RansacConfig,
    pub plane_ransac: RansacConfig,
    pub outliers: OutlierConfig,
    /// Meters between synthesized floor samples.
    pub floor_spacing: f64,
    /// Fractional growth of the scene box before sampling the floor.
    pub floor_extent_inflation: f64,
    /// When false the floor mask is ignored and no floor is fitted.
    pub floor_enabled: bool,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            align_ransac: RansacConfig::alignment_default(),
            plane_ransac: RansacConfig::plane_default(),
            outliers: OutlierConfig::default(),
            floor_spacing: 0.02,
            floor_extent_inflation: 0.1,
            floor_enabled: true,
        }
    }
}

impl SceneConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.align_ransac.seed = seed;
        self.plane_ransac.seed = seed.wrapping_add(1);
        self
    }
}

/// Pixel-aligned inputs for the human-free scene image.
#[derive(Debug, Clone, Copy)]
pub struct SceneInputs<'a> {
    pub depth: &'a DepthRaster,
    pub relpoints: &'a PointMap,
    pub floor_mask: Option<&'a Mask>,
    /// Intrinsics that produced `depth`.
    pub depth_intrinsics: CameraIntrinsics,
}

#[derive(Debug, Clone)]
pub struct SceneScaffold {
    /// Observed points followed by synthesized floor points.
    pub points: PointCloud,
    pub provenance: Vec<Provenance>,
    pub floor: Option<Plane>,
    pub cam: CameraIntrinsics,
    /// Metric point map after alignment and outlier removal, pixel-aligned
    /// with the inputs.
    pub point_map: PointMap,
    pub scale_shift: ScaleShift,
}

impl SceneScaffold {
    pub fn observed_count(&self) -> usize {
        self.provenance.iter().filter(|p| **p == Provenance::Observed).count()
    }
}

pub fn build_scene(inputs: &SceneInputs<'_>, cfg: &SceneConfig) -> Result<SceneScaffold> {
    let (w, h) = (inputs.relpoints.width(), inputs.relpoints.height());
    if let Some(mask) = inputs.floor_mask {
        if mask.width() != w || mask.height() != h {
            return Err(Error::AlignmentMismatch(format!(
                "floor mask {}x{} vs point map {w}x{h}",
                mask.width(),
                mask.height()
            )));
        }
    }
    let metric = inputs.depth_intrinsics.backproject(inputs.depth)?;
    let scale_shift = align_scale_shift(inputs.relpoints, &metric, None, &cfg.align_ransac)?;
    let mut point_map = inputs.relpoints.map_valid(|p| scale_shift.apply(p));

    let (pixels, raw): (Vec<usize>, Vec<_>) = point_map.valid_points().unzip();
    let flags = outlier_flags(&raw, adaptive_k(w, h), &cfg.outliers);
    for (&i, _) in pixels.iter().zip(&flags).filter(|(_, f)| **f) {
        point_map.invalidate_index(i);
    }

    let observed = estimate_grid_normals(&point_map);
    let observed_pixels: Vec<usize> = point_map.valid_points().map(|(i, _)| i).collect();

    let floor = match inputs.floor_mask.filter(|_| cfg.floor_enabled) {
        Some(mask) => {
            let floor_idx: Vec<usize> = observed_pixels
                .iter()
                .enumerate()
                .filter(|(_, &px)| mask.get_index(px))
                .map(|(k, _)| k)
                .collect();
            match fit_floor_plane(&observed, &floor_idx, &cfg.plane_ransac) {
                Ok(plane) => Some(plane),
                Err(Error::NoConsensus { .. } | Error::TooFewPoints { .. }) => None,
                Err(e) => return Err(e),
            }
        }
        None => None,
    };

    let mut points = observed.clone();
    let mut provenance = vec![Provenance::Observed; observed.len()];
    if let (Some(plane), Some(aabb)) = (floor, observed.aabb()) {
        let synthesized = synthesize_floor(&plane, &aabb.inflated(cfg.floor_extent_inflation), cfg.floor_spacing);
        provenance.extend(std::iter::repeat_n(Provenance::SynthesizedFloor, synthesized.len()));
        points.extend(&synthesized);
    }
    let cam = recalibrate_intrinsics(&point_map)?;
    Ok(SceneScaffold {
        points,
        provenance,
        floor,
        cam,
        point_map,
        scale_shift,
    })
}
