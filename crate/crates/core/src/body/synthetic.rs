//! Procedural capsule-limb humanoid with a 24-joint kinematic tree.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BodyTemplate, SparseRow};
use crate::geometry::Vec3;

pub const SYNTHETIC_PART_NAMES: [&str; 10] = [
    "head",
    "torso",
    "pelvis",
    "left_arm",
    "right_arm",
    "left_upper_leg",
    "right_upper_leg",
    "left_lower_leg",
    "right_lower_leg",
    "feet",
];

/// COCO-17 keypoint id to humanoid joint. Eyes and ears have no joint.
pub const COCO_KEYPOINT_MAP: [(usize, usize); 13] = [
    (0, 15),
    (5, 16),
    (6, 17),
    (7, 18),
    (8, 19),
    (9, 20),
    (10, 21),
    (11, 1),
    (12, 2),
    (13, 4),
    (14, 5),
    (15, 7),
    (16, 8),
];

const PARENTS: [i32; 24] = [-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21];
const HAND_JOINTS: [usize; 2] = [22, 23];
// left-side partner of every joint under x -> -x
const MIRROR: [usize; 24] = [0, 2, 1, 3, 5, 4, 6, 8, 7, 9, 11, 10, 12, 14, 13, 15, 17, 16, 19, 18, 21, 20, 23, 22];

fn rest_joints() -> [Vec3; 24] {
    let left: [(usize, [f64; 3]); 15] = [
        (0, [0.0, 0.95, 0.0]),
        (1, [0.09, 0.88, 0.0]),
        (3, [0.0, 1.05, 0.0]),
        (4, [0.09, 0.50, 0.0]),
        (6, [0.0, 1.18, 0.0]),
        (7, [0.09, 0.10, 0.0]),
        (9, [0.0, 1.32, 0.0]),
        (10, [0.09, 0.045, 0.10]),
        (12, [0.0, 1.50, 0.0]),
        (13, [0.07, 1.44, 0.0]),
        (15, [0.0, 1.62, 0.0]),
        (16, [0.18, 1.45, 0.0]),
        (18, [0.45, 1.45, 0.0]),
        (20, [0.70, 1.45, 0.0]),
        (22, [0.78, 1.45, 0.0]),
    ];
    let mut out = [Vec3::zeros(); 24];
    for (j, p) in left {
        out[j] = Vec3::from(p);
        let m = MIRROR[j];
        out[m] = Vec3::new(-p[0], p[1], p[2]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HumanoidOptions {
    /// Zero gives the canonical proportions; anything else jitters limb
    /// lengths and widths by up to 3%.
    pub seed: u64,
    pub ring_segments: usize,
    pub cap_rings: usize,
    /// Extra evenly spaced rings per limb, for denser meshes.
    pub extra_rings: usize,
}

impl Default for HumanoidOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            ring_segments: 12,
            cap_rings: 3,
            extra_rings: 0,
        }
    }
}

struct Segment {
    a: Vec3,
    b: Vec3,
    radius_u: f64,
    radius_w: f64,
    part: usize,
    /// `(t along a->b, joint)`; skinning interpolates linearly between knots.
    knots: Vec<(f64, usize)>,
    rings: Vec<f64>,
    segments_scale: usize,
}

fn left_segments(j: &[Vec3; 24]) -> Vec<Segment> {
    let seg = |a: Vec3, b: Vec3, r: f64, part: usize, knots: Vec<(f64, usize)>, rings: Vec<f64>| Segment {
        a,
        b,
        radius_u: r,
        radius_w: r,
        part,
        knots,
        rings,
        segments_scale: 1,
    };
    let t_along = |a: f64, b: f64, x: f64| (x - a) / (b - a);
    let hand_end = Vec3::new(j[20].x + 0.14, j[20].y, j[20].z);
    let t22 = t_along(j[20].x, hand_end.x, j[22].x);
    let foot_a = Vec3::new(j[10].x, j[10].y, -0.06);
    let foot_b = Vec3::new(j[10].x, j[10].y, 0.15);
    let t10 = t_along(foot_a.z, foot_b.z, j[10].z);
    vec![
        seg(j[13], j[16], 0.05, 1, vec![(0.0, 9), (0.3, 13)], vec![0.0, 1.0]),
        seg(j[16], j[18], 0.045, 3, vec![(0.0, 13), (0.2, 16)], vec![0.0, 0.5, 1.0]),
        seg(j[18], j[20], 0.04, 3, vec![(0.0, 16), (0.2, 18)], vec![0.0, 0.5, 1.0]),
        seg(j[20], hand_end, 0.035, 3, vec![(0.0, 18), (0.2, 20), (t22, 20), (t22 + 0.15, 22)], vec![0.0, t22, 1.0]),
        seg(j[1], j[4], 0.075, 5, vec![(0.0, 0), (0.2, 1)], vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]),
        seg(j[4], j[7], 0.055, 7, vec![(0.0, 1), (0.2, 4)], vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]),
        seg(foot_a, foot_b, 0.045, 9, vec![(0.0, 7), (t10, 7), (t10 + 0.1, 10)], vec![0.0, 0.5, t10, 1.0]),
    ]
}

fn central_segments(j: &[Vec3; 24]) -> Vec<Segment> {
    let torso_top = Vec3::new(0.0, 1.42, 0.0);
    let t_y = |y: f64| (y - j[3].y) / (torso_top.y - j[3].y);
    let (t6, t9) = (t_y(j[6].y), t_y(j[9].y));
    vec![
        Segment {
            a: Vec3::new(j[0].x - 0.08, j[0].y, j[0].z),
            b: Vec3::new(j[0].x + 0.08, j[0].y, j[0].z),
            radius_u: 0.10,
            radius_w: 0.11,
            part: 2,
            knots: vec![(0.0, 0)],
            rings: vec![0.0, 0.5, 1.0],
            segments_scale: 1,
        },
        Segment {
            a: j[3],
            b: torso_top,
            radius_u: 0.15,
            radius_w: 0.10,
            part: 1,
            knots: vec![(0.0, 0), (t6, 3), (t9, 6), (1.0, 9)],
            rings: vec![0.0, t6, t9, 1.0],
            segments_scale: 2,
        },
        Segment {
            a: j[12],
            b: j[15],
            radius_u: 0.05,
            radius_w: 0.05,
            part: 0,
            knots: vec![(0.0, 9), (0.3, 12)],
            rings: vec![0.0, 1.0],
            segments_scale: 1,
        },
        Segment {
            a: Vec3::new(0.0, j[15].y + 0.06, 0.0),
            b: Vec3::new(0.0, j[15].y + 0.12, 0.0),
            radius_u: 0.09,
            radius_w: 0.09,
            part: 0,
            knots: vec![(0.0, 15)],
            rings: vec![0.0, 0.5, 1.0],
            segments_scale: 2,
        },
    ]
}

fn mirrored(s: &Segment) -> Segment {
    let m = |p: Vec3| Vec3::new(-p.x, p.y, p.z);
    let part = match s.part {
        3 => 4,
        5 => 6,
        7 => 8,
        p => p,
    };
    Segment {
        a: m(s.a),
        b: m(s.b),
        radius_u: s.radius_u,
        radius_w: s.radius_w,
        part,
        knots: s.knots.iter().map(|&(t, j)| (t, MIRROR[j])).collect(),
        rings: s.rings.clone(),
        segments_scale: s.segments_scale,
    }
}

fn knot_weights(knots: &[(f64, usize)], t: f64) -> SparseRow {
    let (first, last) = (knots[0], knots[knots.len() - 1]);
    let pair = if t <= first.0 {
        vec![(first.1, 1.0)]
    } else if t >= last.0 {
        vec![(last.1, 1.0)]
    } else {
        let k = knots.windows(2).position(|w| t >= w[0].0 && t < w[1].0).unwrap();
        let ((t0, j0), (t1, j1)) = (knots[k], knots[k + 1]);
        let alpha = (t - t0) / (t1 - t0);
        let w1 = alpha as f32;
        let w0 = 1.0f32 - w1;
        vec![(j0, w0 as f64), (j1, w1 as f64)]
    };
    let mut row: SparseRow = Vec::new();
    for (j, w) in pair {
        if w == 0.0 {
            continue;
        }
        match row.iter_mut().find(|e| e.0 == j) {
            Some(e) => e.1 += w,
            None => row.push((j, w)),
        }
    }
    row.sort_by_key(|e| e.0);
    row
}

struct Ring {
    center: Vec3,
    indices: Vec<usize>,
}

#[derive(Default)]
struct Builder {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    skinning: Vec<SparseRow>,
    radial: Vec<Vec3>,
    parts: Vec<usize>,
    rings: Vec<Ring>,
}

impl Builder {
    fn add_segment(&mut self, s: &Segment, opts: &HumanoidOptions) {
        let axis = s.b - s.a;
        let len = axis.norm();
        let d = axis / len;
        let reference = if d.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let u = (reference - d * d.dot(&reference)).normalize();
        let w = d.cross(&u);
        let cap_r = s.radius_u.min(s.radius_w);
        let n_around = opts.ring_segments * s.segments_scale;

        let mut ring_ts: Vec<f64> = s.rings.clone();
        for k in 1..=opts.extra_rings {
            ring_ts.push(k as f64 / (opts.extra_rings + 1) as f64);
        }
        ring_ts.sort_by(f64::total_cmp);
        ring_ts.dedup_by(|x, y| (*x - *y).abs() < 1e-9);

        // (t along axis, center, ring scale)
        let mut profile: Vec<(f64, Vec3, f64)> = Vec::new();
        let caps = opts.cap_rings;
        for k in 1..=caps {
            let phi = k as f64 * std::f64::consts::FRAC_PI_2 / (caps + 1) as f64;
            let along = -cap_r * phi.cos();
            profile.push((along / len, s.a + d * along, phi.sin()));
        }
        for &t in &ring_ts {
            profile.push((t, s.a + axis * t, 1.0));
        }
        for k in (1..=caps).rev() {
            let phi = k as f64 * std::f64::consts::FRAC_PI_2 / (caps + 1) as f64;
            let along = cap_r * phi.cos();
            profile.push((1.0 + along / len, s.b + d * along, phi.sin()));
        }

        let push = |b: &mut Builder, p: Vec3, t: f64, radial: Vec3| -> usize {
            b.vertices.push(p);
            b.skinning.push(knot_weights(&s.knots, t));
            b.radial.push(radial);
            b.parts.push(s.part);
            b.vertices.len() - 1
        };

        let bottom = push(self, s.a - d * cap_r, -cap_r / len, Vec3::zeros());
        let mut ring_indices: Vec<Vec<usize>> = Vec::new();
        for &(t, center, scale) in &profile {
            let mut idx = Vec::with_capacity(n_around);
            for k in 0..n_around {
                let ang = 2.0 * std::f64::consts::PI * k as f64 / n_around as f64;
                let offset = (u * (s.radius_u * ang.cos()) + w * (s.radius_w * ang.sin())) * scale;
                idx.push(push(self, center + offset, t, offset));
            }
            if scale == 1.0 {
                self.rings.push(Ring {
                    center,
                    indices: idx.clone(),
                });
            }
            ring_indices.push(idx);
        }
        let top = push(self, s.b + d * cap_r, 1.0 + cap_r / len, Vec3::zeros());

        let mut tris: Vec<[usize; 3]> = Vec::new();
        let first = &ring_indices[0];
        let last = &ring_indices[ring_indices.len() - 1];
        for k in 0..n_around {
            let k1 = (k + 1) % n_around;
            tris.push([bottom, first[k1], first[k]]);
            tris.push([top, last[k], last[k1]]);
        }
        for r in ring_indices.windows(2) {
            for k in 0..n_around {
                let k1 = (k + 1) % n_around;
                tris.push([r[0][k], r[0][k1], r[1][k1]]);
                tris.push([r[0][k], r[1][k1], r[1][k]]);
            }
        }
        // outward winding: normal must point away from the capsule axis
        for tri in tris {
            let [p0, p1, p2] = tri.map(|i| self.vertices[i]);
            let centroid = (p0 + p1 + p2) / 3.0;
            let along = (centroid - s.a).dot(&d).clamp(0.0, len);
            let outward = centroid - (s.a + d * along);
            let normal = (p1 - p0).cross(&(p2 - p0));
            self.faces.push(if normal.dot(&outward) < 0.0 { [tri[0], tri[2], tri[1]] } else { tri });
        }
    }
}

#[inline]
fn quantize(v: f64) -> f64 {
    v as f32 as f64
}

pub fn make_synthetic_humanoid(seed: u64) -> BodyTemplate {
    make_synthetic_humanoid_with(&HumanoidOptions {
        seed,
        ..HumanoidOptions::default()
    })
}

pub fn make_synthetic_humanoid_with(opts: &HumanoidOptions) -> BodyTemplate {
    let (height_scale, width_scale) = if opts.seed == 0 {
        (1.0, 1.0)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        (rng.gen_range(0.97..1.03), rng.gen_range(0.97..1.03))
    };
    let scale = |p: Vec3| Vec3::new(p.x * width_scale, p.y * height_scale, p.z * width_scale);
    let joints = rest_joints().map(scale);

    let mut segments = central_segments(&joints);
    for s in left_segments(&joints) {
        let m = mirrored(&s);
        segments.push(s);
        segments.push(m);
    }
    let mut b = Builder::default();
    for s in &segments {
        b.add_segment(s, opts);
    }

    let n = b.vertices.len();
    let vertices: Vec<Vec3> = b.vertices.iter().map(|v| v.map(quantize)).collect();
    let joints_q: Vec<Vec3> = joints.iter().map(|j| j.map(quantize)).collect();

    // height grows linearly with y (feet stay on y = 0); girth scales the
    // offset from each limb axis
    let mut shape_dirs = Vec::with_capacity(n * 3 * 2);
    for i in 0..n {
        let height = Vec3::new(0.0, 0.08 * b.vertices[i].y, 0.0);
        let girth = b.radial[i] * 0.15;
        for axis in 0..3 {
            shape_dirs.push(quantize(height[axis]));
            shape_dirs.push(quantize(girth[axis]));
        }
    }

    let joint_regressor: Vec<SparseRow> = joints
        .iter()
        .map(|jp| {
            let ring = b
                .rings
                .iter()
                .min_by(|x, y| (x.center - jp).norm().total_cmp(&(y.center - jp).norm()))
                .expect("humanoid has rings");
            debug_assert!((ring.center - jp).norm() < 1e-9, "no ring centered on joint {jp:?}");
            let w = quantize(1.0 / ring.indices.len() as f64);
            let mut row: SparseRow = ring.indices.iter().map(|&v| (v, w)).collect();
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();

    BodyTemplate {
        vertices,
        faces: b.faces,
        joints: joints_q,
        parents: PARENTS.iter().map(|&p| (p >= 0).then_some(p as usize)).collect(),
        skinning: b.skinning,
        shape_dirs,
        num_betas: 2,
        joint_regressor,
        part_labels: b.parts,
        part_names: SYNTHETIC_PART_NAMES.iter().map(|s| s.to_string()).collect(),
        hand_joints: HAND_JOINTS.to_vec(),
        keypoint_map: COCO_KEYPOINT_MAP.to_vec(),
    }
}
