use super::{PointCloud, PointMap, Vec3};

/// Central-pixel normal from the grid stencil, or `None` when the pixel is
/// invalid, lacks valid neighbours on both sides of an axis, or the stencil
/// is degenerate.
pub(crate) fn grid_normal_at(pm: &PointMap, u: usize, v: usize) -> Option<Vec3> {
    let p = pm.get(u, v)?;
    let du = axis_difference(pm, p, u, v, true)?;
    let dv = axis_difference(pm, p, u, v, false)?;
    let n = du.cross(&dv);
    let scale = du.norm() * dv.norm();
    if !(scale > 0.0) || n.norm() <= 1e-9 * scale {
        return None;
    }
    let n = n.normalize();
    Some(if n.dot(&p) > 0.0 { -n } else { n })
}

// Forward difference when the next pixel is valid, backward difference otherwise.
fn axis_difference(pm: &PointMap, p: Vec3, u: usize, v: usize, horizontal: bool) -> Option<Vec3> {
    let (next, prev) = if horizontal {
        (
            (u + 1 < pm.width()).then(|| pm.get(u + 1, v)).flatten(),
            (u > 0).then(|| pm.get(u - 1, v)).flatten(),
        )
    } else {
        (
            (v + 1 < pm.height()).then(|| pm.get(u, v + 1)).flatten(),
            (v > 0).then(|| pm.get(u, v - 1)).flatten(),
        )
    };
    match (next, prev) {
        (Some(n), _) => Some(n - p),
        (None, Some(b)) => Some(p - b),
        (None, None) => None,
    }
}

/// Point cloud of every valid pixel (row-major order) with camera-facing
/// unit normals estimated from immediate grid neighbours.
pub fn estimate_grid_normals(pm: &PointMap) -> PointCloud {
    let mut points = Vec::with_capacity(pm.valid_count());
    let mut normals = Vec::with_capacity(points.capacity());
    for (i, p) in pm.valid_points() {
        points.push(p);
        normals.push(grid_normal_at(pm, i % pm.width(), i / pm.width()));
    }
    PointCloud { points, normals }
}
