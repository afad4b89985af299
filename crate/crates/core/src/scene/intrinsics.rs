use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, PointMap};

const MIN_PIXELS: usize = 100;
const AXIS_GUARD: f64 = 1e-6;

fn median(values: &mut [f64]) -> f64 {
    let n = values.len();
    values.sort_by(f64::total_cmp);
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Median per-pixel focal lengths implied by a point map under a centered
/// principal point.
pub fn recalibrate_intrinsics(pm: &PointMap) -> Result<CameraIntrinsics> {
    let (w, h) = (pm.width(), pm.height());
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let mut fx = Vec::new();
    let mut fy = Vec::new();
    for (i, p) in pm.valid_points() {
        let (u, v) = ((i % w) as f64, (i / w) as f64);
        if !(p.z > 0.0) {
            continue;
        }
        if p.x.abs() > AXIS_GUARD * p.z {
            fx.push((u - cx) * p.z / p.x);
        }
        if p.y.abs() > AXIS_GUARD * p.z {
            fy.push((v - cy) * p.z / p.y);
        }
    }
    let found = fx.len().min(fy.len());
    if found < MIN_PIXELS {
        return Err(Error::InsufficientPixels {
            found,
            needed: MIN_PIXELS,
        });
    }
    CameraIntrinsics::new(median(&mut fx), median(&mut fy), w, h)
}
