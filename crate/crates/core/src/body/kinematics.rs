use super::rotation::{axis_angle_jacobian, axis_angle_to_matrix};
use super::{BodyParams, BodyTemplate, ParamLayout};
use crate::error::Result;
use crate::geometry::{Mat3, Vec3};

/// Output of the forward pass plus the intermediates the reverse pass needs.
#[derive(Debug, Clone)]
pub struct Posed {
    pub vertices: Vec<Vec3>,
    /// Joints regressed from the posed vertices.
    pub joints: Vec<Vec3>,
    /// World position of the kinematic root, translation included.
    pub root: Vec3,
    /// World position of every kinematic joint, translation included.
    pub kinematic_joints: Vec<Vec3>,
    shaped: Vec<Vec3>,
    rest_joints: Vec<Vec3>,
    axis_angles: Vec<Vec3>,
    local_rot: Vec<Mat3>,
    world_rot: Vec<Mat3>,
    joint_shape_dirs: Vec<f64>,
}

/// Upstream gradients for [`backward`].
#[derive(Debug, Clone, Default)]
pub struct BodyGradInput {
    /// Per posed vertex; empty means zero.
    pub vertices: Vec<Vec3>,
    /// Per regressed joint; empty means zero.
    pub joints: Vec<Vec3>,
    pub root: Vec3,
}

struct Chain {
    world_rot: Vec<Mat3>,
    world_pos: Vec<Vec3>,
}

fn compose(template: &BodyTemplate, order: &[usize], local_rot: &[Mat3], rest: &[Vec3]) -> Chain {
    let n = template.num_joints();
    let mut world_rot = vec![Mat3::identity(); n];
    let mut world_pos = vec![Vec3::zeros(); n];
    for &k in order {
        match template.parents[k] {
            None => {
                world_rot[k] = local_rot[k];
                world_pos[k] = rest[k];
            }
            Some(p) => {
                world_rot[k] = world_rot[p] * local_rot[k];
                world_pos[k] = world_pos[p] + world_rot[p] * (rest[k] - rest[p]);
            }
        }
    }
    Chain { world_rot, world_pos }
}

/// Shape blend, kinematic chain, linear blend skinning, translation, joint regression.
pub fn forward(template: &BodyTemplate, params: &BodyParams) -> Result<Posed> {
    params.check(template)?;
    let s = template.num_betas;
    let beta = &params.beta;
    let shaped: Vec<Vec3> = template
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut out = *v;
            for axis in 0..3 {
                let dir = template.shape_dir(i, axis);
                out[axis] += dir.iter().zip(beta).map(|(d, b)| d * b).sum::<f64>();
            }
            out
        })
        .collect();
    let joint_shape_dirs = template.joint_shape_dirs();
    let rest_joints: Vec<Vec3> = template
        .joints
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let mut out = *r;
            for axis in 0..3 {
                let dir = &joint_shape_dirs[(j * 3 + axis) * s..(j * 3 + axis + 1) * s];
                out[axis] += dir.iter().zip(beta).map(|(d, b)| d * b).sum::<f64>();
            }
            out
        })
        .collect();
    let axis_angles = params.joint_rotations(template);
    let local_rot: Vec<Mat3> = axis_angles.iter().map(axis_angle_to_matrix).collect();
    let order = template.topological_order();
    let chain = compose(template, &order, &local_rot, &rest_joints);
    let trans = params.trans_vec();

    let vertices: Vec<Vec3> = shaped
        .iter()
        .zip(&template.skinning)
        .map(|(v, row)| {
            let mut out = trans;
            for &(k, w) in row {
                out += (chain.world_rot[k] * (v - rest_joints[k]) + chain.world_pos[k]) * w;
            }
            out
        })
        .collect();
    let joints = template.regress_joints(&vertices);
    let root = chain.world_pos[template.root()] + trans;
    let kinematic_joints = chain.world_pos.iter().map(|p| p + trans).collect();
    Ok(Posed {
        vertices,
        joints,
        root,
        kinematic_joints,
        shaped,
        rest_joints,
        axis_angles,
        local_rot,
        world_rot: chain.world_rot,
        joint_shape_dirs,
    })
}

/// Reverse pass: gradient of a scalar loss with respect to the flat
/// parameter vector, given its gradient with respect to the forward outputs.
pub fn backward(template: &BodyTemplate, posed: &Posed, upstream: &BodyGradInput) -> Vec<f64> {
    let n = template.num_vertices();
    let nj = template.num_joints();
    let s = template.num_betas;
    let layout = ParamLayout::of(template);

    let mut gv: Vec<Vec3> = if upstream.vertices.is_empty() {
        vec![Vec3::zeros(); n]
    } else {
        upstream.vertices.clone()
    };
    for (row, gj) in template.joint_regressor.iter().zip(&upstream.joints) {
        for &(v, w) in row {
            gv[v] += gj * w;
        }
    }

    let mut g_trans = upstream.root;
    let mut g_world_rot = vec![Mat3::zeros(); nj];
    let mut g_world_pos = vec![Vec3::zeros(); nj];
    let mut g_rest = vec![Vec3::zeros(); nj];
    let mut g_shaped = vec![Vec3::zeros(); n];
    for i in 0..n {
        let g = gv[i];
        if g == Vec3::zeros() {
            continue;
        }
        g_trans += g;
        let v = posed.shaped[i];
        for &(k, w) in &template.skinning[i] {
            let wg = g * w;
            g_world_rot[k] += wg * (v - posed.rest_joints[k]).transpose();
            g_world_pos[k] += wg;
            let back = posed.world_rot[k].transpose() * wg;
            g_shaped[i] += back;
            g_rest[k] -= back;
        }
    }

    let root = template.root();
    g_rest[root] += upstream.root;
    let order = template.topological_order();
    let mut g_local = vec![Mat3::zeros(); nj];
    for &k in order.iter().rev() {
        match template.parents[k] {
            None => {
                g_local[k] = g_world_rot[k];
                g_rest[k] += g_world_pos[k];
            }
            Some(p) => {
                let wp = posed.world_rot[p];
                let gp = g_world_pos[k];
                let offset = posed.rest_joints[k] - posed.rest_joints[p];
                g_world_pos[p] += gp;
                let gwk = g_world_rot[k];
                g_world_rot[p] += gp * offset.transpose() + gwk * posed.local_rot[k].transpose();
                let back = wp.transpose() * gp;
                g_rest[k] += back;
                g_rest[p] -= back;
                g_local[k] = wp.transpose() * gwk;
            }
        }
    }

    let mut grad = vec![0.0; layout.len()];
    for b in 0..s {
        let mut acc = 0.0;
        for (i, g) in g_shaped.iter().enumerate() {
            for axis in 0..3 {
                acc += g[axis] * template.shape_dir(i, axis)[b];
            }
        }
        for (j, g) in g_rest.iter().enumerate() {
            for axis in 0..3 {
                acc += g[axis] * posed.joint_shape_dirs[(j * 3 + axis) * s + b];
            }
        }
        grad[b] = acc;
    }
    let theta_grad = |j: usize| -> [f64; 3] {
        let jac = axis_angle_jacobian(&posed.axis_angles[j], &posed.local_rot[j]);
        std::array::from_fn(|c| jac[c].component_mul(&g_local[j]).sum())
    };
    let body = template.body_joints();
    for (slot, &j) in body.iter().enumerate() {
        let g = theta_grad(j);
        grad[layout.theta_body().start + 3 * slot..][..3].copy_from_slice(&g);
    }
    for (slot, &j) in template.hand_joints.iter().enumerate() {
        let g = theta_grad(j);
        grad[layout.theta_hand().start + 3 * slot..][..3].copy_from_slice(&g);
    }
    grad[layout.trans()].copy_from_slice(g_trans.as_slice());
    grad
}
