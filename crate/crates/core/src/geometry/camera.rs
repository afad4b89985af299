use serde::{Deserialize, Serialize};

use super::{DepthRaster, PointMap, Vec2, Vec3};
use crate::error::{Error, Result};

/// Pinhole camera with the principal point fixed at the image center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, width: usize, height: usize) -> Result<Self> {
        let cam = Self {
            fx,
            fy,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx.is_finite() && self.fx > 0.0 && self.fy.is_finite() && self.fy > 0.0) {
            return Err(Error::invariant(
                "intrinsics",
                format!("focal lengths must be positive, got ({}, {})", self.fx, self.fy),
            ));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::invariant("intrinsics", "image size must be at least 1x1"));
        }
        Ok(())
    }

    pub fn cx(&self) -> f64 {
        self.width as f64 / 2.0
    }

    pub fn cy(&self) -> f64 {
        self.height as f64 / 2.0
    }

    pub fn diagonal(&self) -> f64 {
        ((self.width * self.width + self.height * self.height) as f64).sqrt()
    }

    /// Projects a single point, returning `None` behind or on the image plane.
    #[inline]
    pub fn project_point(&self, p: &Vec3) -> Option<Vec2> {
        if p.z <= 0.0 {
            return None;
        }
        Some(Vec2::new(
            self.fx * p.x / p.z + self.cx(),
            self.fy * p.y / p.z + self.cy(),
        ))
    }

    pub fn project(&self, points: &[Vec3]) -> Result<Vec<Vec2>> {
        points
            .iter()
            .enumerate()
            .map(|(index, p)| {
                self.project_point(p)
                    .ok_or(Error::NonPositiveDepth { index, depth: p.z })
            })
            .collect()
    }

    /// Pixel containing the projection of `p`, if it lands inside the image.
    pub fn pixel_of(&self, p: &Vec3) -> Option<(usize, usize)> {
        let uv = self.project_point(p)?;
        let (u, v) = (uv.x.round(), uv.y.round());
        if u < 0.0 || v < 0.0 || u >= self.width as f64 || v >= self.height as f64 {
            return None;
        }
        Some((u as usize, v as usize))
    }

    #[inline]
    pub fn backproject_pixel(&self, u: f64, v: f64, z: f64) -> Vec3 {
        Vec3::new((u - self.cx()) * z / self.fx, (v - self.cy()) * z / self.fy, z)
    }

    pub fn backproject(&self, depth: &DepthRaster) -> Result<PointMap> {
        if depth.width() != self.width || depth.height() != self.height {
            return Err(Error::DimensionMismatch(format!(
                "camera is {}x{}, depth raster is {}x{}",
                self.width,
                self.height,
                depth.width(),
                depth.height()
            )));
        }
        let mut pm = PointMap::invalid(self.width, self.height);
        for v in 0..self.height {
            for u in 0..self.width {
                if let Some(z) = depth.get(u, v) {
                    pm.set(u, v, Some(self.backproject_pixel(u as f64, v as f64, z)));
                }
            }
        }
        Ok(pm)
    }
}
