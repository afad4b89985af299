use crate::geometry::{Mat3, Vec3};

#[inline]
pub(crate) fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rodrigues' formula.
pub fn axis_angle_to_matrix(theta: &Vec3) -> Mat3 {
    let angle = theta.norm();
    let k = skew(theta);
    if angle < 1e-12 {
        return Mat3::identity() + k;
    }
    let a2 = angle * angle;
    Mat3::identity() + k * (angle.sin() / angle) + k * k * ((1.0 - angle.cos()) / a2)
}

/// Partial derivatives of the rotation matrix with respect to each
/// axis-angle component.
pub fn axis_angle_jacobian(theta: &Vec3, r: &Mat3) -> [Mat3; 3] {
    let a2 = theta.norm_squared();
    if a2 < 1e-16 {
        return [skew(&Vec3::x()), skew(&Vec3::y()), skew(&Vec3::z())];
    }
    let k = skew(theta);
    let i_minus_r = Mat3::identity() - r;
    std::array::from_fn(|i| {
        let e = Vec3::ith(i, 1.0);
        let w = theta.cross(&(i_minus_r * e));
        (k * theta[i] + skew(&w)) * r / a2
    })
}
