//! Procedural fixtures standing in for dataset images and neural frontends:
//! a small room, a pitched pinhole camera, posed humanoids and everything a
//! fit consumes, together with the ground truth it should recover.

mod scene;

use std::fmt;
use std::str::FromStr;

use nalgebra::Rotation3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};
use serde::{Deserialize, Serialize};

pub use scene::{CameraPose, Primitive};

use crate::body::{axis_angle_to_matrix, forward, make_synthetic_humanoid_with, BodyParams, HumanoidOptions, BodyTemplate, ContactSource, ContactVertexSet};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, CameraIntrinsics, DepthRaster, Mask, Mat3, PointCloud, PointMap, Vec3};
use crate::io::{InputBundle, PersonInput};
use crate::nn::ExactScene;
use crate::objective::{extract_contacts, ContactThresholds, Keypoints2D};
use crate::scene::Plane;
use crate::visibility::PartZBuffer;

/// Number of COCO-17 keypoints emitted per person.
pub const NUM_KEYPOINTS: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    Standing,
    Seated,
    OccludedLower,
    MultiHuman,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 4] = [Self::Standing, Self::Seated, Self::OccludedLower, Self::MultiHuman];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Standing => "standing",
            Self::Seated => "seated",
            Self::OccludedLower => "occluded-lower",
            Self::MultiHuman => "multi-human",
        }
    }

    fn salt(&self) -> u64 {
        match self {
            Self::Standing => 0x51,
            Self::Seated => 0x52,
            Self::OccludedLower => 0x53,
            Self::MultiHuman => 0x54,
        }
    }
}

impl fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FixtureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse { context: "fixture kind".into(), detail: format!("unknown kind {s:?}; expected standing, seated, occluded-lower or multi-human") })
    }
}

/// Knobs for fixture generation. Lengths in meters, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureOptions {
    pub width: usize,
    pub height: usize,
    pub focal: f64,
    pub camera_height: f64,
    pub camera_pitch: f64,
    /// Length of the random initial translation offset.
    pub trans_offset: f64,
    /// Upper bound of the per-joint initial rotation perturbation.
    pub joint_noise: f64,
    pub keypoint_noise_px: f64,
    /// Standard deviation of depth noise in both the metric and relative maps.
    pub depth_noise: f64,
    /// Distance below which a vertex counts as touching for the simulated
    /// contact detector. Ground-truth labels use the extraction threshold.
    pub touch_distance: f64,
    /// Fraction of touching vertices dropped from the predicted set.
    pub contact_dropout: f64,
    pub gt_scene_spacing: f64,
}

impl Default for FixtureOptions {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            focal: 560.0,
            camera_height: 1.4,
            camera_pitch: 10f64.to_radians(),
            trans_offset: 0.3,
            joint_noise: 0.15,
            keypoint_noise_px: 1.5,
            depth_noise: 0.002,
            touch_distance: 0.02,
            contact_dropout: 0.1,
            gt_scene_spacing: 0.005,
        }
    }
}

/// What the fixture was rendered from, in the camera frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub kind: FixtureKind,
    pub seed: u64,
    pub params: Vec<BodyParams>,
    /// Per-person, per-vertex contact labels.
    pub contacts: Vec<Vec<bool>>,
    pub floor: Plane,
    /// Scene surface sampled around every person, with normals.
    pub scene: PointCloud,
    pub cam: CameraIntrinsics,
    pub pose: CameraPose,
    pub primitives: Vec<Primitive>,
}

impl GroundTruth {
    pub fn contact_indices(&self, person: usize) -> Vec<usize> {
        self.contacts[person].iter().enumerate().filter(|(_, c)| **c).map(|(i, _)| i).collect()
    }
}

/// The template every fixture is posed with: the canonical humanoid at a
/// vertex count comparable to common full-body models.
pub fn fixture_template() -> BodyTemplate {
    make_synthetic_humanoid_with(&HumanoidOptions { seed: 0, ring_segments: 24, cap_rings: 6, extra_rings: 6 })
}

pub fn synth_fixture(kind: FixtureKind, seed: u64) -> (InputBundle, GroundTruth) {
    synth_fixture_with(kind, seed, &FixtureOptions::default())
}

struct Placement {
    /// World position of the root joint, with y filled in later.
    root_xz: (f64, f64),
    seated: bool,
    yaw: f64,
}

pub fn synth_fixture_with(kind: FixtureKind, seed: u64, opts: &FixtureOptions) -> (InputBundle, GroundTruth) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ kind.salt());
    let template = fixture_template();
    let cam = CameraIntrinsics::new(opts.focal, opts.focal, opts.width, opts.height).expect("fixture intrinsics");
    let pose = CameraPose::pitched(Vec3::new(0.0, opts.camera_height, 0.0), opts.camera_pitch);

    let mut primitives = vec![
        Primitive::Plane { point: Vec3::zeros(), normal: Vec3::y() },
        Primitive::Plane { point: Vec3::new(0.0, 0.0, 6.0), normal: -Vec3::z() },
        Primitive::Plane { point: Vec3::new(3.0, 0.0, 0.0), normal: -Vec3::x() },
        Primitive::Plane { point: Vec3::new(-3.0, 0.0, 0.0), normal: Vec3::x() },
        Primitive::Box { min: Vec3::new(1.3, 0.0, 4.4), max: Vec3::new(1.9, 0.7, 5.0) },
    ];
    let jitter = |rng: &mut ChaCha8Rng| rng.gen_range(-0.1..0.1);
    let placements = match kind {
        FixtureKind::Standing | FixtureKind::OccludedLower => {
            vec![Placement { root_xz: (jitter(&mut rng), 3.3 + jitter(&mut rng)), seated: false, yaw: jitter(&mut rng) }]
        }
        FixtureKind::Seated => {
            vec![Placement { root_xz: (jitter(&mut rng), 3.3 + jitter(&mut rng)), seated: true, yaw: 0.0 }]
        }
        FixtureKind::MultiHuman => [(-1.2, 3.7), (0.0, 3.3), (1.2, 3.7)]
            .into_iter()
            .map(|(x, z)| Placement { root_xz: (x + jitter(&mut rng), z + jitter(&mut rng)), seated: false, yaw: jitter(&mut rng) })
            .collect(),
    };

    let mut gt_params = Vec::new();
    let mut world_vertices = Vec::new();
    for pl in &placements {
        let beta: Vec<f64> = (0..template.num_betas).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let (params, verts) = place_body(&template, &pose, pl, beta);
        if pl.seated {
            primitives.push(seat_for(&template, &verts));
        }
        gt_params.push(params);
        world_vertices.push(verts);
    }
    if kind == FixtureKind::OccludedLower {
        let (x, z) = placements[0].root_xz;
        primitives.push(Primitive::Box { min: Vec3::new(x - 0.6, 0.0, z - 1.0), max: Vec3::new(x + 0.6, 0.85, z - 0.7) });
    }

    // ground-truth scene surface near each person
    let mut samples: Vec<(Vec3, Vec3)> = Vec::new();
    for verts in &world_vertices {
        let aabb = Aabb::from_points(verts.iter()).expect("posed body has vertices");
        let pad = Vec3::repeat(0.15);
        let (lo, hi) = (aabb.min - pad, aabb.max + pad);
        for prim in &primitives {
            samples.extend(prim.sample(&lo, &hi, opts.gt_scene_spacing));
        }
    }
    let gt_scene = PointCloud::with_normals(
        samples.iter().map(|(p, _)| pose.to_camera(p)).collect(),
        samples.iter().map(|(_, n)| Some(pose.direction_to_camera(n))).collect(),
    )
    .expect("normals match points");
    let exact = ExactScene::new(&gt_scene, 1.0).expect("fixture scene is non-empty");
    let thresholds = ContactThresholds::default();
    let posed: Vec<Vec<Vec3>> = gt_params.iter().map(|p| forward(&template, p).expect("valid params").vertices).collect();
    let reports: Vec<_> = posed.iter().map(|v| extract_contacts(v, &exact, 1.0, thresholds.extract)).collect();
    let gt_contacts: Vec<Vec<bool>> = reports.iter().map(|r| r.in_contact.clone()).collect();

    let (w, h) = (opts.width, opts.height);
    let noise = Normal::new(0.0, opts.depth_noise.max(1e-12)).expect("finite noise");
    let mut scene_z = vec![f64::INFINITY; w * h];
    let mut floor_bits = vec![false; w * h];
    for v in 0..h {
        for u in 0..w {
            let dir_c = Vec3::new((u as f64 - cam.cx()) / cam.fx, (v as f64 - cam.cy()) / cam.fy, 1.0);
            let dir = pose.to_world_direction(&dir_c);
            let mut best = (f64::INFINITY, usize::MAX);
            for (k, prim) in primitives.iter().enumerate() {
                if let Some(t) = prim.intersect(&pose.center, &dir) {
                    if t < best.0 {
                        best = (t, k);
                    }
                }
            }
            scene_z[v * w + u] = best.0;
            floor_bits[v * w + u] = best.1 == 0;
        }
    }

    let buffers: Vec<PartZBuffer> = posed.iter().map(|v| PartZBuffer::render(v, &template.faces, &template.part_labels, &cam)).collect();
    let mut full_z = scene_z.clone();
    let mut owner = vec![usize::MAX; w * h];
    for (i, buf) in buffers.iter().enumerate() {
        for v in 0..h {
            for u in 0..w {
                if let Some(z) = buf.nearest(u, v) {
                    if z < full_z[v * w + u] {
                        full_z[v * w + u] = z;
                        owner[v * w + u] = i;
                    }
                }
            }
        }
    }

    let (scene_s, scene_tz) = (rng.gen_range(0.6..0.9), rng.gen_range(-0.5..0.5));
    let (full_s, full_tz) = (rng.gen_range(0.6..0.9), rng.gen_range(-0.5..0.5));
    let mut depth = DepthRaster::invalid(w, h);
    let mut scene_rel = PointMap::invalid(w, h);
    let mut full_rel = PointMap::invalid(w, h);
    let relative = |p: Vec3, s: f64, tz: f64| Vec3::new(p.x / s, p.y / s, (p.z - tz) / s);
    for v in 0..h {
        for u in 0..w {
            let i = v * w + u;
            if scene_z[i].is_finite() {
                let z = scene_z[i] + noise.sample(&mut rng);
                depth.set(u, v, Some(z));
                let zr = scene_z[i] + noise.sample(&mut rng);
                scene_rel.set(u, v, Some(relative(cam.backproject_pixel(u as f64, v as f64, zr), scene_s, scene_tz)));
            }
            if full_z[i].is_finite() {
                let zr = full_z[i] + noise.sample(&mut rng);
                full_rel.set(u, v, Some(relative(cam.backproject_pixel(u as f64, v as f64, zr), full_s, full_tz)));
            }
        }
    }

    let kp_noise = Normal::new(0.0, opts.keypoint_noise_px.max(1e-12)).expect("finite noise");
    let mut people = Vec::new();
    for (i, params) in gt_params.iter().enumerate() {
        let mask = Mask::from_bits(w, h, owner.iter().map(|&o| o == i).collect()).expect("mask size");
        let joints = forward(&template, params).expect("valid params").joints;
        let mut points = vec![[0.0; 2]; NUM_KEYPOINTS];
        let mut confidence = vec![0.0; NUM_KEYPOINTS];
        for &(k, j) in &template.keypoint_map {
            let Some(uv) = cam.project_point(&joints[j]) else { continue };
            points[k] = [uv.x + kp_noise.sample(&mut rng), uv.y + kp_noise.sample(&mut rng)];
            let seen = cam.pixel_of(&joints[j]).is_some_and(|(pu, pv)| mask.get(pu, pv));
            confidence[k] = if seen { 0.9 } else { 0.3 };
        }
        let keypoints = Keypoints2D::new(points, confidence).expect("valid keypoints");
        let init_params = perturb(&template, params, opts, &mut rng);
        let kept: Vec<usize> = reports[i]
            .distances
            .iter()
            .enumerate()
            .filter(|(_, d)| **d < opts.touch_distance)
            .map(|(k, _)| k)
            .filter(|_| rng.gen::<f64>() >= opts.contact_dropout)
            .collect();
        let contacts = ContactVertexSet::new(kept, ContactSource::Predicted, template.num_vertices()).expect("valid contacts");
        people.push(PersonInput { mask, keypoints, init_params, contacts });
    }

    let floor_normal = pose.direction_to_camera(&Vec3::y());
    let floor = Plane { normal: floor_normal, offset: floor_normal.dot(&pose.to_camera(&Vec3::zeros())) };
    let bundle = InputBundle {
        scene_depth: depth,
        scene_relpoints: scene_rel,
        full_relpoints: full_rel,
        floor_mask: Some(Mask::from_bits(w, h, floor_bits).expect("mask size")),
        intrinsics_hint: cam,
        people,
        keypoint_map: Some(template.keypoint_map.clone()),
    };
    let gt = GroundTruth {
        kind,
        seed,
        params: gt_params,
        contacts: gt_contacts,
        floor,
        scene: gt_scene,
        cam,
        pose,
        primitives,
    };
    (bundle, gt)
}

fn rotation_vector(m: &Mat3) -> [f64; 3] {
    let v = Rotation3::from_matrix(m).scaled_axis();
    [v.x, v.y, v.z]
}

/// Poses the body in world coordinates, drops it onto the floor and returns
/// camera-frame parameters together with the world-frame vertices.
fn place_body(template: &BodyTemplate, pose: &CameraPose, pl: &Placement, beta: Vec<f64>) -> (BodyParams, Vec<Vec3>) {
    let mut p = BodyParams::zeros(template);
    p.beta = beta;
    // arms lowered from the template's spread pose
    p.theta_body[16] = [0.0, 0.0, -1.2];
    p.theta_body[17] = [0.0, 0.0, 1.2];
    if pl.seated {
        p.theta_body[1] = [-std::f64::consts::FRAC_PI_2, 0.0, 0.0];
        p.theta_body[2] = [-std::f64::consts::FRAC_PI_2, 0.0, 0.0];
        p.theta_body[4] = [std::f64::consts::FRAC_PI_2, 0.0, 0.0];
        p.theta_body[5] = [std::f64::consts::FRAC_PI_2, 0.0, 0.0];
    }
    // the template faces +z; turning it about y makes it face the camera
    let world_root = axis_angle_to_matrix(&Vec3::new(0.0, std::f64::consts::PI + pl.yaw, 0.0));
    p.theta_body[0] = rotation_vector(&(pose.rotation * world_root));
    let root_rest = forward(template, &p).expect("valid params").root;

    let to_world = |params: &BodyParams| -> Vec<Vec3> {
        let posed = forward(template, params).expect("valid params");
        posed.vertices.iter().map(|v| pose.rotation.transpose() * v + pose.center).collect()
    };
    let target = Vec3::new(pl.root_xz.0, 1.0, pl.root_xz.1);
    p.trans = (pose.to_camera(&target) - root_rest).into();
    let lowest = to_world(&p).iter().map(|v| v.y).fold(f64::INFINITY, f64::min);
    let target = Vec3::new(target.x, target.y - lowest, target.z);
    p.trans = (pose.to_camera(&target) - root_rest).into();
    let verts = to_world(&p);
    (p, verts)
}

/// Box under the thighs, ending short of the knees.
fn seat_for(template: &BodyTemplate, world: &[Vec3]) -> Primitive {
    let parts: Vec<usize> = ["pelvis", "left_upper_leg", "right_upper_leg"].iter().filter_map(|n| template.part_index(n)).collect();
    let seat: Vec<&Vec3> = world.iter().zip(&template.part_labels).filter(|(_, l)| parts.contains(l)).map(|(v, _)| v).collect();
    let top = seat.iter().map(|v| v.y).fold(f64::INFINITY, f64::min);
    let aabb = Aabb::from_points(seat.iter().copied()).expect("seat parts have vertices");
    // the body faces -z, so the knees sit at the low-z end
    Primitive::Box {
        min: Vec3::new(aabb.min.x - 0.1, 0.0, aabb.min.z + 0.12),
        max: Vec3::new(aabb.max.x + 0.1, top, aabb.max.z + 0.1),
    }
}

fn perturb(template: &BodyTemplate, gt: &BodyParams, opts: &FixtureOptions, rng: &mut ChaCha8Rng) -> BodyParams {
    let mut p = gt.clone();
    // articulated joints only; the root rotation is the global orientation
    let root = template.root();
    for (_, th) in p.theta_body.iter_mut().enumerate().filter(|(j, _)| *j != root) {
        let axis: [f64; 3] = UnitSphere.sample(rng);
        let angle = rng.gen_range(0.0..=opts.joint_noise);
        let noise = axis_angle_to_matrix(&(Vec3::from(axis) * angle));
        *th = rotation_vector(&(axis_angle_to_matrix(&Vec3::from(*th)) * noise));
    }
    let dir: [f64; 3] = UnitSphere.sample(rng);
    p.trans = (gt.trans_vec() + Vec3::from(dir) * opts.trans_offset).into();
    debug_assert!(p.check(template).is_ok());
    p
}
