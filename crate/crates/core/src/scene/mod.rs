//! Metric scene construction: scale/shift alignment of a relative point map
//! to metric depth, outlier filtering, floor fitting and completion, and
//! focal-length recalibration.

mod align;
mod build;
mod floor;
mod intrinsics;
mod outliers;
mod plane;

use serde::{Deserialize, Serialize};

pub use align::{align_scale_shift, ScaleShift};
pub use build::{build_scene, Provenance, SceneConfig, SceneInputs, SceneScaffold};
pub use floor::synthesize_floor;
pub use intrinsics::recalibrate_intrinsics;
pub use outliers::{adaptive_k, outlier_flags, remove_outliers, OutlierConfig};
pub use plane::{fit_floor_plane, Plane};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RansacConfig {
    pub iterations: usize,
    /// Meters.
    pub inlier_threshold: f64,
    pub min_inlier_fraction: f64,
    pub seed: u64,
}

impl RansacConfig {
    pub fn alignment_default() -> Self {
        Self {
            iterations: 256,
            inlier_threshold: 0.05,
            min_inlier_fraction: 0.3,
            seed: 0,
        }
    }

    pub fn plane_default() -> Self {
        Self {
            inlier_threshold: 0.02,
            ..Self::alignment_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invariant("ransac.iterations", "must be at least 1"));
        }
        if !(self.inlier_threshold > 0.0) {
            return Err(Error::invariant("ransac.inlier_threshold", "must be positive"));
        }
        if !(self.min_inlier_fraction > 0.0 && self.min_inlier_fraction <= 1.0) {
            return Err(Error::invariant("ransac.min_inlier_fraction", "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Independent generator per iteration so the sample sequence does not
    /// depend on evaluation order.
    pub(crate) fn iteration_rng(&self, iteration: usize) -> rand_chacha::ChaCha8Rng {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(iteration as u64);
        rng
    }
}
