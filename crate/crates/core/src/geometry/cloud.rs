use super::Vec3;
use crate::error::{Error, Result};

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = *iter.next()?;
        let (min, max) = iter.fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
        Some(Self { min, max })
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    /// Grows every side by `fraction` of the box extent along that axis.
    pub fn inflated(&self, fraction: f64) -> Self {
        let pad = self.extent() * fraction * 0.5;
        Self {
            min: self.min - pad,
            max: self.max + pad,
        }
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (a, b) = (self.min, self.max);
        [
            Vec3::new(a.x, a.y, a.z),
            Vec3::new(b.x, a.y, a.z),
            Vec3::new(a.x, b.y, a.z),
            Vec3::new(b.x, b.y, a.z),
            Vec3::new(a.x, a.y, b.z),
            Vec3::new(b.x, a.y, b.z),
            Vec3::new(a.x, b.y, b.z),
            Vec3::new(b.x, b.y, b.z),
        ]
    }
}

/// Unordered 3D points with optional per-point unit normals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    /// Either empty (no normals at all) or one entry per point.
    pub normals: Vec<Option<Vec3>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        Self {
            points,
            normals: Vec::new(),
        }
    }

    pub fn with_normals(points: Vec<Vec3>, normals: Vec<Option<Vec3>>) -> Result<Self> {
        let pc = Self { points, normals };
        pc.validate()?;
        Ok(pc)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.normals.is_empty() && self.normals.len() != self.points.len() {
            return Err(Error::invariant(
                "normals",
                format!("{} normals for {} points", self.normals.len(), self.points.len()),
            ));
        }
        for (i, n) in self.normals.iter().enumerate() {
            if let Some(n) = n {
                if (n.norm() - 1.0).abs() > 1e-6 {
                    return Err(Error::invariant(
                        "normals",
                        format!("normal {i} has length {}", n.norm()),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_normals(&self) -> bool {
        !self.normals.is_empty()
    }

    pub fn normal(&self, i: usize) -> Option<Vec3> {
        self.normals.get(i).copied().flatten()
    }

    pub fn aabb(&self) -> Option<Aabb> {
        Aabb::from_points(&self.points)
    }

    /// Appends `other`, padding normals with `None` when only one side has them.
    pub fn extend(&mut self, other: &PointCloud) {
        if self.has_normals() || other.has_normals() {
            if !self.has_normals() {
                self.normals = vec![None; self.points.len()];
            }
            if other.has_normals() {
                self.normals.extend_from_slice(&other.normals);
            } else {
                self.normals.extend(std::iter::repeat_n(None, other.len()));
            }
        }
        self.points.extend_from_slice(&other.points);
    }

    pub fn select(&self, keep: &[usize]) -> PointCloud {
        PointCloud {
            points: keep.iter().map(|&i| self.points[i]).collect(),
            normals: if self.has_normals() {
                keep.iter().map(|&i| self.normals[i]).collect()
            } else {
                Vec::new()
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extend_pads_missing_normals() {
        let mut a = PointCloud::new(vec![Vec3::zeros(); 2]);
        let b = PointCloud::with_normals(vec![Vec3::x()], vec![Some(Vec3::y())]).unwrap();
        a.extend(&b);
        assert_eq!(a.normals, vec![None, None, Some(Vec3::y())]);
    }

    #[test]
    fn rejects_non_unit_normals() {
        assert!(PointCloud::with_normals(vec![Vec3::x()], vec![Some(Vec3::y() * 2.0)]).is_err());
    }

    #[test]
    fn inflation_is_symmetric() {
        let b = Aabb {
            min: Vec3::zeros(),
            max: Vec3::new(2.0, 4.0, 0.0),
        }
        .inflated(0.1);
        assert!((b.min - Vec3::new(-0.1, -0.2, 0.0)).norm() < 1e-12);
        assert!((b.max - Vec3::new(2.1, 4.2, 0.0)).norm() < 1e-12);
    }
}
