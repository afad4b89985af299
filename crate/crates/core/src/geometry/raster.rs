use super::Vec3;
use crate::error::{Error, Result};

/// Row-major per-pixel depth in meters. Invalid pixels are stored as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthRaster {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl DepthRaster {
    pub fn invalid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![f64::NAN; width * height],
        }
    }

    /// Builds a raster from raw values; anything non-finite or `<= 0` is invalid.
    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "depth raster {width}x{height} needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        let values = values
            .into_iter()
            .map(|z| if z.is_finite() && z > 0.0 { z } else { f64::NAN })
            .collect();
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        let z = self.values[v * self.width + u];
        (!z.is_nan()).then_some(z)
    }

    pub fn set(&mut self, u: usize, v: usize, z: Option<f64>) {
        self.values[v * self.width + u] = match z {
            Some(z) if z.is_finite() && z > 0.0 => z,
            _ => f64::NAN,
        };
    }
}

/// Row-major grid of camera-frame points. Invalid pixels hold NaN coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMap {
    width: usize,
    height: usize,
    points: Vec<Vec3>,
}

impl PointMap {
    pub fn invalid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            points: vec![Vec3::repeat(f64::NAN); width * height],
        }
    }

    /// Builds a map from raw points; a pixel with any non-finite coordinate is invalid.
    pub fn from_points(width: usize, height: usize, points: Vec<Vec3>) -> Result<Self> {
        if points.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "point map {width}x{height} needs {} points, got {}",
                width * height,
                points.len()
            )));
        }
        let points = points
            .into_iter()
            .map(|p| {
                if p.iter().all(|c| c.is_finite()) {
                    p
                } else {
                    Vec3::repeat(f64::NAN)
                }
            })
            .collect();
        Ok(Self {
            width,
            height,
            points,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn raw(&self) -> &[Vec3] {
        &self.points
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Option<Vec3> {
        self.get_index(v * self.width + u)
    }

    #[inline]
    pub fn get_index(&self, i: usize) -> Option<Vec3> {
        let p = self.points[i];
        (!p.x.is_nan()).then_some(p)
    }

    pub fn set(&mut self, u: usize, v: usize, p: Option<Vec3>) {
        self.points[v * self.width + u] = match p {
            Some(p) if p.iter().all(|c| c.is_finite()) => p,
            _ => Vec3::repeat(f64::NAN),
        };
    }

    pub fn invalidate_index(&mut self, i: usize) {
        self.points[i] = Vec3::repeat(f64::NAN);
    }

    pub fn valid_count(&self) -> usize {
        self.points.iter().filter(|p| !p.x.is_nan()).count()
    }

    /// `(pixel index, point)` for every valid pixel in row-major order.
    pub fn valid_points(&self) -> impl Iterator<Item = (usize, Vec3)> + '_ {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.x.is_nan())
            .map(|(i, p)| (i, *p))
    }

    pub fn map_valid(&self, f: impl Fn(Vec3) -> Vec3) -> PointMap {
        PointMap {
            width: self.width,
            height: self.height,
            points: self
                .points
                .iter()
                .map(|p| if p.x.is_nan() { *p } else { f(*p) })
                .collect(),
        }
    }
}

/// Binary per-pixel mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Self {
            width,
            height,
            bits: vec![value; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "mask {width}x{height} needs {} entries, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> bool {
        self.bits[v * self.width + u]
    }

    #[inline]
    pub fn get_index(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, u: usize, v: usize, value: bool) {
        self.bits[v * self.width + u] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}
