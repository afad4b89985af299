use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::RansacConfig;
use crate::error::{Error, Result};
use crate::geometry::{Mat3, PointCloud, Vec3};

/// Point-inlier normal agreement required during floor fitting.
const NORMAL_AGREEMENT_DEG: f64 = 25.0;

/// Plane `{p : normal . p = offset}` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub normal: Vec3,
    /// Meters.
    pub offset: f64,
}

impl Plane {
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    pub fn project(&self, p: &Vec3) -> Vec3 {
        p - self.normal * self.signed_distance(p)
    }

    fn through(a: &Vec3, b: &Vec3, c: &Vec3) -> Option<Plane> {
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if !(len > 1e-12) {
            return None;
        }
        let normal = n / len;
        Some(Plane {
            normal,
            offset: normal.dot(a),
        })
    }

    /// Flip so that `normal . reference < 0`, i.e. the normal points from the
    /// reference point back toward the camera at the origin.
    fn oriented_toward_camera(self, reference: &Vec3) -> Plane {
        if self.normal.dot(reference) > 0.0 {
            Plane {
                normal: -self.normal,
                offset: -self.offset,
            }
        } else {
            self
        }
    }

    /// Total least-squares plane through `points`.
    pub fn fit(points: &[Vec3]) -> Option<Plane> {
        if points.len() < 3 {
            return None;
        }
        let centroid = points.iter().sum::<Vec3>() / points.len() as f64;
        let mut cov = Mat3::zeros();
        for p in points {
            let d = p - centroid;
            cov += d * d.transpose();
        }
        let eig = cov.symmetric_eigen();
        let normal = eig.eigenvectors.column(eig.eigenvalues.imin()).into_owned();
        let normal = normal.try_normalize(1e-300)?;
        Some(Plane {
            normal,
            offset: normal.dot(&centroid),
        })
    }
}

/// RANSAC floor fit over `pc.points[floor_points]`, scoring both position and
/// normal agreement, refined by least squares on the consensus set.
pub fn fit_floor_plane(pc: &PointCloud, floor_points: &[usize], cfg: &RansacConfig) -> Result<Plane> {
    cfg.validate()?;
    if floor_points.len() < 3 {
        return Err(Error::TooFewPoints {
            found: floor_points.len(),
            needed: 3,
        });
    }
    let pts: Vec<Vec3> = floor_points.iter().map(|&i| pc.points[i]).collect();
    let normals: Vec<Option<Vec3>> = floor_points.iter().map(|&i| pc.normal(i)).collect();
    let cos_limit = NORMAL_AGREEMENT_DEG.to_radians().cos();
    let thr = cfg.inlier_threshold;
    let is_inlier = |plane: &Plane, i: usize| {
        plane.signed_distance(&pts[i]).abs() < thr
            && normals[i].is_none_or(|n| n.dot(&plane.normal) > cos_limit)
    };

    let mut best: Option<(usize, Plane)> = None;
    for it in 0..cfg.iterations {
        let mut rng = cfg.iteration_rng(it);
        let idx = sample(&mut rng, pts.len(), 3);
        let (a, b, c) = (pts[idx.index(0)], pts[idx.index(1)], pts[idx.index(2)]);
        let Some(plane) = Plane::through(&a, &b, &c) else {
            continue;
        };
        let plane = plane.oriented_toward_camera(&((a + b + c) / 3.0));
        let n = (0..pts.len()).filter(|&i| is_inlier(&plane, i)).count();
        if best.is_none_or(|(bn, _)| n > bn) {
            best = Some((n, plane));
        }
    }
    let best_fraction = best.map_or(0.0, |(n, _)| n as f64 / pts.len() as f64);
    let Some((_, mut plane)) = best.filter(|_| best_fraction >= cfg.min_inlier_fraction) else {
        return Err(Error::NoConsensus {
            best_fraction,
            required: cfg.min_inlier_fraction,
        });
    };
    for _ in 0..2 {
        let inliers: Vec<Vec3> = (0..pts.len()).filter(|&i| is_inlier(&plane, i)).map(|i| pts[i]).collect();
        let Some(refit) = Plane::fit(&inliers) else {
            break;
        };
        let centroid = inliers.iter().sum::<Vec3>() / inliers.len() as f64;
        plane = refit.oriented_toward_camera(&centroid);
    }
    Ok(plane)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn floor_cloud(n: usize, noise: f64, outliers: f64, seed: u64) -> (PointCloud, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gauss = Normal::new(0.0, noise.max(1e-300)).unwrap();
        let mut points = Vec::new();
        let mut normals = Vec::new();
        let mut clean = Vec::new();
        for _ in 0..n {
            let (x, z) = (rng.gen_range(-2.0..2.0), rng.gen_range(1.0..6.0));
            if rng.gen_bool(outliers) {
                points.push(Vec3::new(x, rng.gen_range(-1.0..1.2), z));
                normals.push(None);
                clean.push(false);
            } else {
                let y = if noise > 0.0 { 1.2 + gauss.sample(&mut rng) } else { 1.2 };
                points.push(Vec3::new(x, y, z));
                normals.push(Some(Vec3::new(0.0, -1.0, 0.0)));
                clean.push(true);
            }
        }
        (PointCloud::with_normals(points, normals).unwrap(), clean)
    }

    fn angle_deg(a: &Vec3, b: &Vec3) -> f64 {
        a.dot(b).clamp(-1.0, 1.0).acos().to_degrees()
    }

    #[test]
    fn exact_plane_through_origin() {
        let points: Vec<Vec3> = (0..50).map(|i| Vec3::new((i % 7) as f64, 0.0, (i / 7) as f64 + 1.0)).collect();
        let pc = PointCloud::new(points);
        let idx: Vec<usize> = (0..50).collect();
        let plane = fit_floor_plane(&pc, &idx, &RansacConfig::plane_default()).unwrap();
        assert!(plane.normal.y.abs() > 1.0 - 1e-9);
        assert!(plane.offset.abs() < 1e-9);
    }

    #[test]
    fn normal_points_toward_camera() {
        let (pc, _) = floor_cloud(300, 0.0, 0.0, 1);
        let idx: Vec<usize> = (0..pc.len()).collect();
        let plane = fit_floor_plane(&pc, &idx, &RansacConfig::plane_default()).unwrap();
        assert!((plane.normal - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-9);
        assert!((plane.offset + 1.2).abs() < 1e-9);
    }

    #[test]
    fn robust_to_noise_and_outliers() {
        let (pc, clean) = floor_cloud(2000, 0.005, 0.2, 2);
        let idx: Vec<usize> = (0..pc.len()).collect();
        let plane = fit_floor_plane(&pc, &idx, &RansacConfig::plane_default()).unwrap();
        let clean_pts: Vec<Vec3> = (0..pc.len()).filter(|&i| clean[i]).map(|i| pc.points[i]).collect();
        let oracle = Plane::fit(&clean_pts).unwrap();
        let err = angle_deg(&plane.normal, &oracle.normal).min(angle_deg(&plane.normal, &-oracle.normal));
        assert!(err < 1.0, "angular error {err} deg");
    }

    #[test]
    fn too_few_points() {
        let (pc, _) = floor_cloud(10, 0.0, 0.0, 3);
        assert!(matches!(
            fit_floor_plane(&pc, &[0, 1], &RansacConfig::plane_default()),
            Err(Error::TooFewPoints { found: 2, .. })
        ));
    }

    #[test]
    fn invariant_under_rigid_motion() {
        let (pc, _) = floor_cloud(500, 0.005, 0.2, 4);
        let idx: Vec<usize> = (0..pc.len()).collect();
        let cfg = RansacConfig::plane_default();
        let plane = fit_floor_plane(&pc, &idx, &cfg).unwrap();
        let r = Rotation3::from_euler_angles(0.2, -0.4, 0.1);
        let t = Vec3::new(0.3, -0.2, 0.5);
        let moved = PointCloud::with_normals(
            pc.points.iter().map(|p| r * p + t).collect(),
            pc.normals.iter().map(|n| n.map(|n| r * n)).collect(),
        )
        .unwrap();
        let moved_plane = fit_floor_plane(&moved, &idx, &cfg).unwrap();
        let inliers = |pc: &PointCloud, pl: &Plane| -> Vec<usize> {
            (0..pc.len())
                .filter(|&i| pl.signed_distance(&pc.points[i]).abs() < cfg.inlier_threshold)
                .collect()
        };
        assert_eq!(inliers(&pc, &plane), inliers(&moved, &moved_plane));
        let expect = r * plane.normal;
        assert!(angle_deg(&expect, &moved_plane.normal).min(angle_deg(&expect, &-moved_plane.normal)) < 1e-6);
    }

    #[test]
    fn normals_veto_inliers() {
        // wall points that cross the floor line carry perpendicular normals
        let (mut pc, _) = floor_cloud(200, 0.0, 0.0, 5);
        for n in pc.normals.iter_mut().take(150) {
            *n = Some(Vec3::new(0.0, 0.0, -1.0));
        }
        let idx: Vec<usize> = (0..pc.len()).collect();
        let cfg = RansacConfig {
            min_inlier_fraction: 0.5,
            ..RansacConfig::plane_default()
        };
        assert!(matches!(fit_floor_plane(&pc, &idx, &cfg), Err(Error::NoConsensus { .. })));
    }
}
