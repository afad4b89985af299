use super::Plane;
use crate::geometry::{Aabb, PointCloud, Vec3};

/// In-plane orthonormal basis, chosen deterministically from the normal.
pub(crate) fn plane_basis(normal: &Vec3) -> (Vec3, Vec3) {
    let helper = Vec3::ith(normal.iamin(), 1.0);
    let e1 = (helper - normal * normal.dot(&helper)).normalize();
    let e2 = normal.cross(&e1);
    (e1, e2)
}

/// Regular grid of points on `plane` covering the projection of `extent`,
/// every point carrying the plane normal.
pub fn synthesize_floor(plane: &Plane, extent: &Aabb, spacing: f64) -> PointCloud {
    let empty = (0..3).any(|i| extent.min[i] > extent.max[i]);
    if empty || !(spacing > 0.0) {
        return PointCloud::default();
    }
    let n = plane.normal;
    let (e1, e2) = plane_basis(&n);
    let (mut a_lo, mut a_hi, mut b_lo, mut b_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for c in extent.corners() {
        let (a, b) = (e1.dot(&c), e2.dot(&c));
        a_lo = a_lo.min(a);
        a_hi = a_hi.max(a);
        b_lo = b_lo.min(b);
        b_hi = b_hi.max(b);
    }
    let steps = |lo: f64, hi: f64| ((hi - lo) / spacing + 1e-9).floor() as usize + 1;
    let (na, nb) = (steps(a_lo, a_hi), steps(b_lo, b_hi));
    let origin = n * plane.offset;
    let mut points = Vec::with_capacity(na * nb);
    for j in 0..nb {
        for i in 0..na {
            let p = origin + e1 * (a_lo + i as f64 * spacing) + e2 * (b_lo + j as f64 * spacing);
            // snap exactly onto the plane
            points.push(p - n * (n.dot(&p) - plane.offset));
        }
    }
    let normals = vec![Some(n); points.len()];
    PointCloud { points, normals }
}
