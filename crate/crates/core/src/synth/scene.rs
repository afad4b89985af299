use crate::geometry::{Mat3, Vec3};

/// World frame: y up, floor at y = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    /// Infinite plane through `point` with outward `normal`.
    Plane { point: Vec3, normal: Vec3 },
    /// Axis-aligned solid box.
    Box { min: Vec3, max: Vec3 },
}

impl Primitive {
    /// Ray parameter of the first hit in front of the origin.
    pub fn intersect(&self, origin: &Vec3, dir: &Vec3) -> Option<f64> {
        match *self {
            Primitive::Plane { point, normal } => {
                let denom = normal.dot(dir);
                if denom >= 0.0 {
                    return None;
                }
                let t = normal.dot(&(point - origin)) / denom;
                (t > 1e-9).then_some(t)
            }
            Primitive::Box { min, max } => {
                let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
                for a in 0..3 {
                    if dir[a].abs() < 1e-15 {
                        if origin[a] < min[a] || origin[a] > max[a] {
                            return None;
                        }
                        continue;
                    }
                    let (mut ta, mut tb) = ((min[a] - origin[a]) / dir[a], (max[a] - origin[a]) / dir[a]);
                    if ta > tb {
                        std::mem::swap(&mut ta, &mut tb);
                    }
                    t0 = t0.max(ta);
                    t1 = t1.min(tb);
                }
                (t0 <= t1 && t0 > 1e-9).then_some(t0)
            }
        }
    }

    /// Surface samples inside `[lo, hi]` on a `spacing` lattice, with outward normals.
    pub fn sample(&self, lo: &Vec3, hi: &Vec3, spacing: f64) -> Vec<(Vec3, Vec3)> {
        let mut out = Vec::new();
        let range = |a: f64, b: f64| -> Vec<f64> {
            if b < a {
                return Vec::new();
            }
            let n = ((b - a) / spacing).floor() as usize;
            (0..=n).map(|i| a + i as f64 * spacing).collect()
        };
        match *self {
            Primitive::Plane { point, normal } => {
                // only axis-aligned planes are used by the fixtures
                let axis = normal.iamax();
                let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
                if point[axis] < lo[axis] || point[axis] > hi[axis] {
                    return out;
                }
                for a in range(lo[u], hi[u]) {
                    for b in range(lo[v], hi[v]) {
                        let mut p = Vec3::zeros();
                        p[axis] = point[axis];
                        p[u] = a;
                        p[v] = b;
                        out.push((p, normal));
                    }
                }
            }
            Primitive::Box { min, max } => {
                for axis in 0..3 {
                    let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
                    for (side, sign) in [(min[axis], -1.0), (max[axis], 1.0)] {
                        if side < lo[axis] || side > hi[axis] {
                            continue;
                        }
                        let mut n = Vec3::zeros();
                        n[axis] = sign;
                        for a in range(lo[u].max(min[u]), hi[u].min(max[u])) {
                            for b in range(lo[v].max(min[v]), hi[v].min(max[v])) {
                                let mut p = Vec3::zeros();
                                p[axis] = side;
                                p[u] = a;
                                p[v] = b;
                                out.push((p, n));
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Camera held at `center`, looking along +z (world) and pitched down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub center: Vec3,
    /// Rows are the camera axes (right, down, forward) in world coordinates.
    pub rotation: Mat3,
}

impl CameraPose {
    pub fn pitched(center: Vec3, pitch_down: f64) -> Self {
        let (s, c) = pitch_down.sin_cos();
        let forward = Vec3::new(0.0, -s, c);
        let down = Vec3::new(0.0, -c, -s);
        let right = down.cross(&forward);
        Self { center, rotation: Mat3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]) }
    }

    pub fn to_camera(&self, p: &Vec3) -> Vec3 {
        self.rotation * (p - self.center)
    }

    pub fn direction_to_camera(&self, d: &Vec3) -> Vec3 {
        self.rotation * d
    }

    pub fn to_world_direction(&self, d: &Vec3) -> Vec3 {
        self.rotation.transpose() * d
    }
}
