use crate::geometry::{CameraIntrinsics, Vec3};

/// Depth slack so a surface never hides its own vertices.
pub const SELF_OCCLUSION_TOLERANCE: f64 = 0.005;

const NO_PART: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Slot {
    depth: f64,
    part: usize,
}

const EMPTY: Slot = Slot { depth: f64::INFINITY, part: NO_PART };

/// Z-buffer keeping, per pixel, the nearest surface and the nearest surface of any other part.
///
/// With both, the nearest depth among parts other than `p` is available for every `p`.
#[derive(Debug, Clone)]
pub struct PartZBuffer {
    width: usize,
    height: usize,
    first: Vec<Slot>,
    second: Vec<Slot>,
}

impl PartZBuffer {
    pub fn render(vertices: &[Vec3], faces: &[[usize; 3]], part_labels: &[usize], cam: &CameraIntrinsics) -> Self {
        let n = cam.width * cam.height;
        let mut zb = Self { width: cam.width, height: cam.height, first: vec![EMPTY; n], second: vec![EMPTY; n] };
        for f in faces {
            let tri = [vertices[f[0]], vertices[f[1]], vertices[f[2]]];
            // a face straddling two parts is attributed to its first vertex's part
            zb.draw(&tri, part_labels[f[0]], cam);
        }
        zb
    }

    fn draw(&mut self, tri: &[Vec3; 3], part: usize, cam: &CameraIntrinsics) {
        let mut uv = [(0.0, 0.0); 3];
        for (k, p) in tri.iter().enumerate() {
            match cam.project_point(p) {
                Some(q) => uv[k] = (q.x, q.y),
                None => return,
            }
        }
        let area = edge(uv[0], uv[1], uv[2]);
        if area == 0.0 || !area.is_finite() {
            return;
        }
        let min_u = uv.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).ceil().max(0.0);
        let max_u = uv.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).floor().min(self.width as f64 - 1.0);
        let min_v = uv.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).ceil().max(0.0);
        let max_v = uv.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).floor().min(self.height as f64 - 1.0);
        if min_u > max_u || min_v > max_v {
            return;
        }
        let inv_z = [1.0 / tri[0].z, 1.0 / tri[1].z, 1.0 / tri[2].z];
        for v in min_v as usize..=max_v as usize {
            for u in min_u as usize..=max_u as usize {
                let p = (u as f64, v as f64);
                let w0 = edge(uv[1], uv[2], p) / area;
                let w1 = edge(uv[2], uv[0], p) / area;
                let w2 = edge(uv[0], uv[1], p) / area;
                if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                    continue;
                }
                // screen-space interpolation of 1/z is exact under perspective
                let depth = 1.0 / (w0 * inv_z[0] + w1 * inv_z[1] + w2 * inv_z[2]);
                self.insert(v * self.width + u, Slot { depth, part });
            }
        }
    }

    fn insert(&mut self, i: usize, s: Slot) {
        let (first, second) = (&mut self.first[i], &mut self.second[i]);
        if s.part == first.part {
            if s.depth < first.depth {
                first.depth = s.depth;
            }
        } else if s.depth < first.depth {
            *second = *first;
            *first = s;
        } else if s.depth < second.depth {
            *second = s;
        }
    }

    /// Nearest depth at a pixel over all parts.
    pub fn nearest(&self, u: usize, v: usize) -> Option<f64> {
        let d = self.first[v * self.width + u].depth;
        d.is_finite().then_some(d)
    }

    /// Nearest depth at a pixel over parts other than `part`.
    pub fn nearest_other(&self, u: usize, v: usize, part: usize) -> Option<f64> {
        let i = v * self.width + u;
        let slot = if self.first[i].part == part { self.second[i] } else { self.first[i] };
        slot.depth.is_finite().then_some(slot.depth)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }
}

#[inline]
fn edge(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}
