//! Nearest-scene-point lookups under a varying scene scale.
//!
//! The scene is stored at its build scale `s0`. At scale `s` a scene point `p`
//! sits at `p * s / s0`, so a query `q` at scale `s` is answered by looking up
//! `q * s0 / s` in build coordinates.

use crate::error::{Error, Result};
use crate::geometry::{nearest_brute_force, Aabb, KdTree, PointCloud, Vec3};

pub const DEFAULT_RESOLUTION: usize = 128;
const AABB_INFLATION: f64 = 0.05;
/// Cells whose propagated candidate lies within this many voxel diagonals get
/// an exact search; farther cells keep the propagated candidate.
pub const EXACT_BAND_VOXELS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneHit {
    pub index: usize,
    /// The scene point at the queried scale.
    pub point: Vec3,
    pub distance: f64,
}

/// Nearest scene point for a query at scene scale `scale`.
pub trait NearestScene {
    fn cloud(&self) -> &PointCloud;
    fn build_scale(&self) -> f64;
    fn nearest(&self, q: &Vec3, scale: f64) -> SceneHit;

    fn hit(&self, index: usize, q: &Vec3, scale: f64) -> SceneHit {
        let point = self.cloud().points[index] * (scale / self.build_scale());
        SceneHit { index, point, distance: (q - point).norm() }
    }
}

/// Precomputed nearest point per cell centre; a query inspects a 3x3x3 block of cells.
#[derive(Debug, Clone)]
pub struct NearestPointGrid {
    resolution: usize,
    aabb: Aabb,
    cell_nearest: Vec<u32>,
    build_scale: f64,
    cloud: PointCloud,
}

impl NearestPointGrid {
    pub fn build(scene: &PointCloud, resolution: usize, build_scale: f64) -> Result<Self> {
        if scene.is_empty() {
            return Err(Error::EmptyScene);
        }
        if resolution == 0 || !(build_scale > 0.0) {
            return Err(Error::DegenerateConfiguration(format!(
                "grid resolution {resolution}, build scale {build_scale}"
            )));
        }
        let mut aabb = Aabb::from_points(&scene.points).ok_or(Error::EmptyScene)?;
        // a flat or single-point scene still needs a non-degenerate box
        let pad = (aabb.extent().max() * 1e-3).max(1e-3);
        for a in 0..3 {
            if aabb.max[a] - aabb.min[a] < pad {
                aabb.min[a] -= pad / 2.0;
                aabb.max[a] += pad / 2.0;
            }
        }
        let aabb = aabb.inflated(AABB_INFLATION);
        let tree = KdTree::new(&scene.points);
        let mut grid = Self {
            resolution,
            aabb,
            cell_nearest: vec![0; resolution * resolution * resolution],
            build_scale,
            cloud: scene.clone(),
        };
        grid.fill(&tree);
        Ok(grid)
    }

    fn fill(&mut self, tree: &KdTree) {
        let r = self.resolution;
        let id = |i: usize, j: usize, k: usize| (k * r + j) * r + i;
        let mut dist = vec![f64::INFINITY; r * r * r];
        // seed occupied cells with their own points
        for (pi, p) in self.cloud.points.iter().enumerate() {
            let (i, j, k) = self.cell_of(p);
            let d = (p - self.cell_center(i, j, k)).norm_squared();
            let c = id(i, j, k);
            if d < dist[c] || (d == dist[c] && (pi as u32) < self.cell_nearest[c]) {
                dist[c] = d;
                self.cell_nearest[c] = pi as u32;
            }
        }
        // forward then backward raster sweep, each cell adopting the best
        // candidate among its already-visited neighbours
        for forward in [true, false] {
            for step in 0..r * r * r {
                let c = if forward { step } else { r * r * r - 1 - step };
                let (i, j, k) = (c % r, (c / r) % r, c / (r * r));
                let center = self.cell_center(i, j, k);
                for dk in -1i64..=1 {
                    for dj in -1i64..=1 {
                        for di in -1i64..=1 {
                            let (a, b, e) = (i as i64 + di, j as i64 + dj, k as i64 + dk);
                            if a < 0 || b < 0 || e < 0 || a >= r as i64 || b >= r as i64 || e >= r as i64 {
                                continue;
                            }
                            let n = id(a as usize, b as usize, e as usize);
                            if !dist[n].is_finite() {
                                continue;
                            }
                            let cand = self.cell_nearest[n];
                            let d = (self.cloud.points[cand as usize] - center).norm_squared();
                            if d < dist[c] || (d == dist[c] && cand < self.cell_nearest[c]) {
                                dist[c] = d;
                                self.cell_nearest[c] = cand;
                            }
                        }
                    }
                }
            }
        }
        let band = EXACT_BAND_VOXELS * self.voxel_diagonal();
        let band_sq = band * band;
        for c in 0..r * r * r {
            if dist[c] <= band_sq {
                let (i, j, k) = (c % r, (c / r) % r, c / (r * r));
                let (idx, _) = tree.nearest_from(&self.cell_center(i, j, k), self.cell_nearest[c] as usize).expect("non-empty");
                self.cell_nearest[c] = idx as u32;
            }
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn aabb(&self) -> &Aabb {
        &self.aabb
    }

    pub fn cell_size(&self) -> Vec3 {
        self.aabb.extent() / self.resolution as f64
    }

    /// Voxel diagonal at the build scale.
    pub fn voxel_diagonal(&self) -> f64 {
        self.cell_size().norm()
    }

    pub fn cell_center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        let s = self.cell_size();
        self.aabb.min + Vec3::new((i as f64 + 0.5) * s.x, (j as f64 + 0.5) * s.y, (k as f64 + 0.5) * s.z)
    }

    /// Stored index for a cell, in `i, j, k` order.
    pub fn cell(&self, i: usize, j: usize, k: usize) -> usize {
        self.cell_nearest[(k * self.resolution + j) * self.resolution + i] as usize
    }

    /// Cell containing a build-scale point, clamped to the box.
    pub fn cell_of(&self, p: &Vec3) -> (usize, usize, usize) {
        let e = self.aabb.extent();
        let r = self.resolution as f64;
        let axis = |a: usize| {
            let t = ((p[a] - self.aabb.min[a]) / e[a] * r).floor();
            t.clamp(0.0, r - 1.0) as usize
        };
        (axis(0), axis(1), axis(2))
    }
}

impl NearestScene for NearestPointGrid {
    fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    fn build_scale(&self) -> f64 {
        self.build_scale
    }

    /// Best of the points stored in the query cell and its 26 neighbours.
    fn nearest(&self, q: &Vec3, scale: f64) -> SceneHit {
        let local = q * (self.build_scale / scale);
        let (i, j, k) = self.cell_of(&local);
        let last = self.resolution - 1;
        let mut best = (f64::INFINITY, usize::MAX);
        for c in k.saturating_sub(1)..=(k + 1).min(last) {
            for b in j.saturating_sub(1)..=(j + 1).min(last) {
                for a in i.saturating_sub(1)..=(i + 1).min(last) {
                    let idx = self.cell(a, b, c);
                    let d = (self.cloud.points[idx] - local).norm_squared();
                    if d < best.0 || (d == best.0 && idx < best.1) {
                        best = (d, idx);
                    }
                }
            }
        }
        self.hit(best.1, q, scale)
    }
}

/// Exact nearest point by KD-tree search.
#[derive(Debug, Clone)]
pub struct ExactScene {
    tree: KdTree,
    build_scale: f64,
    cloud: PointCloud,
}

impl ExactScene {
    pub fn new(scene: &PointCloud, build_scale: f64) -> Result<Self> {
        if scene.is_empty() {
            return Err(Error::EmptyScene);
        }
        Ok(Self { tree: KdTree::new(&scene.points), build_scale, cloud: scene.clone() })
    }
}

impl NearestScene for ExactScene {
    fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    fn build_scale(&self) -> f64 {
        self.build_scale
    }

    fn nearest(&self, q: &Vec3, scale: f64) -> SceneHit {
        let (idx, _) = self.tree.nearest(&(q * (self.build_scale / scale))).expect("non-empty");
        self.hit(idx, q, scale)
    }
}

/// Exact nearest point by linear scan.
#[derive(Debug, Clone)]
pub struct BruteForceScene {
    build_scale: f64,
    cloud: PointCloud,
}

impl BruteForceScene {
    pub fn new(scene: &PointCloud, build_scale: f64) -> Result<Self> {
        if scene.is_empty() {
            return Err(Error::EmptyScene);
        }
        Ok(Self { build_scale, cloud: scene.clone() })
    }
}

impl NearestScene for BruteForceScene {
    fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    fn build_scale(&self) -> f64 {
        self.build_scale
    }

    fn nearest(&self, q: &Vec3, scale: f64) -> SceneHit {
        let (idx, _) = nearest_brute_force(&self.cloud.points, &(q * (self.build_scale / scale))).expect("non-empty");
        self.hit(idx, q, scale)
    }
}
