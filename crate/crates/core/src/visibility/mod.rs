//! Camera-facing vertices, object occlusion and self-occlusion.

mod raster;

pub use raster::{PartZBuffer, SELF_OCCLUSION_TOLERANCE};

use crate::body::BodyTemplate;
use crate::geometry::{CameraIntrinsics, Mask, Vec3};

pub const CAMERA_FACING_DEGREES: f64 = 70.0;
/// A part is self-occluded when strictly more than this fraction of its vertices is hidden.
pub const PART_OCCLUSION_FRACTION: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisibilityMasks {
    pub camera_facing: Vec<bool>,
    pub occluded: Vec<bool>,
    pub per_part_occluded: Vec<bool>,
}

impl VisibilityMasks {
    /// No vertex facing, none occluded.
    pub fn empty(num_vertices: usize, num_parts: usize) -> Self {
        Self {
            camera_facing: vec![false; num_vertices],
            occluded: vec![false; num_vertices],
            per_part_occluded: vec![false; num_parts],
        }
    }

    pub fn facing_indices(&self) -> Vec<usize> {
        indices(&self.camera_facing)
    }

    pub fn occluded_indices(&self) -> Vec<usize> {
        indices(&self.occluded)
    }
}

fn indices(flags: &[bool]) -> Vec<usize> {
    flags.iter().enumerate().filter(|(_, f)| **f).map(|(i, _)| i).collect()
}

/// Area-weighted vertex normals; vertices touched only by degenerate faces get zero.
pub fn vertex_normals(vertices: &[Vec3], faces: &[[usize; 3]]) -> Vec<Vec3> {
    let mut acc = vec![Vec3::zeros(); vertices.len()];
    for f in faces {
        let (a, b, c) = (vertices[f[0]], vertices[f[1]], vertices[f[2]]);
        // cross product length is twice the area, so summing it weights by area
        let n = (b - a).cross(&(c - a));
        for &i in f {
            acc[i] += n;
        }
    }
    acc.into_iter()
        .map(|n| {
            let len = n.norm();
            if len > 0.0 {
                n / len
            } else {
                Vec3::zeros()
            }
        })
        .collect()
}

/// Flags vertices whose normal is within `max_degrees` of the direction toward the camera.
pub fn camera_facing_with(vertices: &[Vec3], faces: &[[usize; 3]], max_degrees: f64) -> Vec<bool> {
    let cos_limit = max_degrees.to_radians().cos();
    vertex_normals(vertices, faces)
        .iter()
        .zip(vertices)
        .map(|(n, v)| {
            let len = v.norm();
            if len == 0.0 || n.norm_squared() == 0.0 {
                return false;
            }
            let to_camera = -v / len;
            n.dot(&to_camera) > cos_limit
        })
        .collect()
}

pub fn camera_facing(vertices: &[Vec3], faces: &[[usize; 3]]) -> Vec<bool> {
    camera_facing_with(vertices, faces, CAMERA_FACING_DEGREES)
}

/// A vertex is object-occluded when it projects off-image or onto a pixel outside `human_mask`.
pub fn object_occlusion(vertices: &[Vec3], cam: &CameraIntrinsics, human_mask: &Mask) -> Vec<bool> {
    debug_assert_eq!((human_mask.width(), human_mask.height()), (cam.width, cam.height));
    vertices
        .iter()
        .map(|v| match cam.pixel_of(v) {
            Some((u, row)) => !human_mask.get(u, row),
            None => true,
        })
        .collect()
}

/// Per-vertex flags: covered by a face of another part closer than the vertex by the tolerance.
pub fn self_occluded_vertices(
    vertices: &[Vec3],
    faces: &[[usize; 3]],
    part_labels: &[usize],
    cam: &CameraIntrinsics,
) -> Vec<bool> {
    let zbuf = PartZBuffer::render(vertices, faces, part_labels, cam);
    vertices
        .iter()
        .zip(part_labels)
        .map(|(v, &part)| match cam.pixel_of(v) {
            Some((u, row)) => zbuf
                .nearest_other(u, row, part)
                .is_some_and(|z| z < v.z - SELF_OCCLUSION_TOLERANCE),
            None => false,
        })
        .collect()
}

/// Applies the strict fraction rule to per-vertex flags.
pub fn parts_over_fraction(flags: &[bool], part_labels: &[usize], num_parts: usize) -> Vec<bool> {
    let mut hidden = vec![0usize; num_parts];
    let mut total = vec![0usize; num_parts];
    for (&f, &p) in flags.iter().zip(part_labels) {
        total[p] += 1;
        hidden[p] += f as usize;
    }
    hidden
        .iter()
        .zip(&total)
        .map(|(&h, &t)| t > 0 && h as f64 > PART_OCCLUSION_FRACTION * t as f64)
        .collect()
}

pub fn self_occlusion(
    vertices: &[Vec3],
    faces: &[[usize; 3]],
    part_labels: &[usize],
    num_parts: usize,
    cam: &CameraIntrinsics,
) -> Vec<bool> {
    let flags = self_occluded_vertices(vertices, faces, part_labels, cam);
    parts_over_fraction(&flags, part_labels, num_parts)
}

/// Union of object occlusion and whole-part self-occlusion.
pub fn combine(vertex_object_occluded: &[bool], part_self_occluded: &[bool], part_labels: &[usize]) -> Vec<bool> {
    vertex_object_occluded
        .iter()
        .zip(part_labels)
        .map(|(&o, &p)| o || part_self_occluded[p])
        .collect()
}

/// Occlusion mask for a posed body. Without a human mask only self-occlusion applies.
pub fn occlusion_mask(
    vertices: &[Vec3],
    template: &BodyTemplate,
    cam: &CameraIntrinsics,
    human_mask: Option<&Mask>,
) -> (Vec<bool>, Vec<bool>) {
    let parts = self_occlusion(vertices, &template.faces, &template.part_labels, template.num_parts(), cam);
    let object = match human_mask {
        Some(m) => object_occlusion(vertices, cam, m),
        None => vec![false; vertices.len()],
    };
    (combine(&object, &parts, &template.part_labels), parts)
}

pub fn compute_visibility(
    vertices: &[Vec3],
    template: &BodyTemplate,
    cam: &CameraIntrinsics,
    human_mask: Option<&Mask>,
) -> VisibilityMasks {
    let (occluded, per_part_occluded) = occlusion_mask(vertices, template, cam, human_mask);
    VisibilityMasks {
        camera_facing: camera_facing(vertices, &template.faces),
        occluded,
        per_part_occluded,
    }
}
