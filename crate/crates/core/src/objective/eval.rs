use super::{HumanTerms, Keypoints2D, LossWeights, ObjectiveContext};
use crate::body::{backward, forward, BodyGradInput, BodyParams, BodyTemplate, ParamLayout, Posed};
use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, KdTree, RobustLoss, Vec3};
use crate::nn::NearestScene;
use crate::optim::OptimState;

/// Frozen correspondences and gates for one person.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Matching {
    /// `(camera-facing vertex, observed point)`.
    pub depth_forward: Vec<(usize, usize)>,
    /// `(observed point, camera-facing vertex)`.
    pub depth_backward: Vec<(usize, usize)>,
    /// Active contacts as `(vertex, scene point)`.
    pub contact: Vec<(usize, usize)>,
    /// Penetrating vertices as `(vertex, scene point)`.
    pub penetration: Vec<(usize, usize)>,
}

/// Unweighted term values.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TermValues {
    pub j2d: f64,
    pub depth: f64,
    pub contact: f64,
    pub penetration: f64,
    pub reg: f64,
}

#[derive(Debug, Clone)]
pub struct HumanEvaluation {
    pub terms: TermValues,
    /// Weighted total for this person, scale regulariser excluded.
    pub value: f64,
    /// Gradient of `value` in the flat parameter layout.
    pub grad: Vec<f64>,
    pub scale_grad: f64,
    pub matching: Matching,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: f64,
    pub humans: Vec<HumanEvaluation>,
    pub scale_grad: f64,
}

impl Evaluation {
    pub fn matchings(&self) -> Vec<Matching> {
        self.humans.iter().map(|h| h.matching.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactReport {
    pub in_contact: Vec<bool>,
    pub distances: Vec<f64>,
}

impl ContactReport {
    pub fn indices(&self) -> Vec<usize> {
        self.in_contact.iter().enumerate().filter(|(_, c)| **c).map(|(i, _)| i).collect()
    }
}

fn scene_point(scene: &dyn NearestScene, index: usize, scale: f64) -> Vec3 {
    scene.cloud().points[index] * (scale / scene.build_scale())
}

impl Matching {
    pub fn compute(ctx: &ObjectiveContext<'_>, human: &HumanTerms, posed: &Posed, scale: f64, weights: &LossWeights) -> Result<Self> {
        let mut m = Matching::default();
        if weights.d > 0.0 {
            let facing = human.masks.facing_indices();
            if facing.is_empty() || human.points.is_empty() {
                return Err(Error::EmptySet);
            }
            let facing_pts: Vec<Vec3> = facing.iter().map(|&i| posed.vertices[i]).collect();
            let facing_tree = KdTree::new(&facing_pts);
            for (&v, p) in facing.iter().zip(&facing_pts) {
                let (j, _) = human.points_tree().nearest(p).expect("non-empty");
                m.depth_forward.push((v, j));
            }
            for (j, p) in human.points.iter().enumerate() {
                let (k, _) = facing_tree.nearest(p).expect("non-empty");
                m.depth_backward.push((j, facing[k]));
            }
        }
        if weights.c > 0.0 {
            for &v in &human.contacts.indices {
                let hit = ctx.scene.nearest(&posed.vertices[v], scale);
                if hit.distance * hit.distance < ctx.thresholds.active_sq {
                    m.contact.push((v, hit.index));
                }
            }
        }
        if weights.i > 0.0 {
            for (v, p) in posed.vertices.iter().enumerate() {
                if human.masks.occluded[v] {
                    continue;
                }
                let hit = ctx.scene.nearest(p, scale);
                if let Some(n) = ctx.scene.cloud().normal(hit.index) {
                    if n.dot(&(p - hit.point)) < 0.0 {
                        m.penetration.push((v, hit.index));
                    }
                }
            }
        }
        Ok(m)
    }
}

struct Accum {
    up: BodyGradInput,
    trans: Vec3,
    scale: f64,
}

impl Accum {
    fn new(template: &BodyTemplate) -> Self {
        Self {
            up: BodyGradInput {
                vertices: vec![Vec3::zeros(); template.num_vertices()],
                joints: vec![Vec3::zeros(); template.num_joints()],
                root: Vec3::zeros(),
            },
            trans: Vec3::zeros(),
            scale: 0.0,
        }
    }
}

fn j2d_term(
    posed: &Posed,
    cam: &CameraIntrinsics,
    kp: &Keypoints2D,
    map: &[(usize, usize)],
    w: f64,
    acc: &mut Accum,
) -> Result<f64> {
    let diag = cam.diagonal();
    let mut value = 0.0;
    for &(k, j) in map {
        let p = posed.joints[j];
        if p.z <= 0.0 {
            return Err(Error::NonPositiveDepth { index: j, depth: p.z });
        }
        let conf = kp.confidence[k];
        if conf == 0.0 {
            continue;
        }
        let uv = cam.project_point(&p).expect("positive depth");
        let r = (uv - kp.point(k)) / diag;
        value += conf * r.norm_squared();
        let iz = 1.0 / p.z;
        let du = Vec3::new(cam.fx * iz, 0.0, -cam.fx * p.x * iz * iz);
        let dv = Vec3::new(0.0, cam.fy * iz, -cam.fy * p.y * iz * iz);
        acc.up.joints[j] += w * conf * 2.0 / diag * (r.x * du + r.y * dv);
    }
    Ok(value)
}

fn depth_term(posed: &Posed, human: &HumanTerms, m: &Matching, w: f64, acc: &mut Accum) -> f64 {
    let mut value = 0.0;
    let mut pair = |v: usize, p: usize| {
        let d = posed.vertices[v] - human.points[p];
        value += d.norm_squared();
        acc.up.vertices[v] += w * 2.0 * d;
    };
    for &(v, p) in &m.depth_forward {
        pair(v, p);
    }
    for &(p, v) in &m.depth_backward {
        pair(v, p);
    }
    value
}

fn scene_pairs_term(
    posed: &Posed,
    scene: &dyn NearestScene,
    pairs: &[(usize, usize)],
    loss: &RobustLoss,
    scale: f64,
    w: f64,
    acc: &mut Accum,
) -> f64 {
    let mut value = 0.0;
    for &(v, s) in pairs {
        let p = scene_point(scene, s, scale);
        let d = posed.vertices[v] - p;
        let x = d.norm_squared();
        value += loss.rho(x);
        let g = loss.derivative(x);
        acc.up.vertices[v] += w * g * 2.0 * d;
        // p moves with the scene scale as p0 * s / s0
        acc.scale -= w * g * 2.0 * d.dot(&p) / scale;
    }
    value
}

fn reg_term(posed: &Posed, params: &BodyParams, human: &HumanTerms, weights: &LossWeights, w: f64, acc: &mut Accum) -> f64 {
    let mut value = 0.0;
    for (v, (p, init)) in posed.vertices.iter().zip(&human.init_relative).enumerate() {
        let wv = if human.masks.occluded[v] { weights.reg_occluded_multiplier } else { 1.0 };
        let d = (p - posed.root) - init;
        value += wv * d.norm_squared();
        let g = w * wv * 2.0 * d;
        acc.up.vertices[v] += g;
        acc.up.root -= g;
    }
    let dt = params.trans_vec() - human.init.trans_vec();
    value += weights.trans_reg * dt.norm_squared();
    acc.trans += w * weights.trans_reg * 2.0 * dt;
    value
}

/// Weighted objective for one person. Pass `matching` to freeze correspondences.
pub fn evaluate_human(
    ctx: &ObjectiveContext<'_>,
    human: usize,
    params: &BodyParams,
    scale: f64,
    weights: &LossWeights,
    matching: Option<&Matching>,
) -> Result<HumanEvaluation> {
    let template = ctx.template;
    let h = &ctx.humans[human];
    let posed = forward(template, params)?;
    let matching = match matching {
        Some(m) => m.clone(),
        None => Matching::compute(ctx, h, &posed, scale, weights)?,
    };
    let mut acc = Accum::new(template);
    let mut t = TermValues::default();
    if weights.j2d > 0.0 {
        t.j2d = j2d_term(&posed, &ctx.cam, &h.keypoints, &h.keypoint_map, weights.j2d, &mut acc)?;
    }
    if weights.d > 0.0 {
        t.depth = depth_term(&posed, h, &matching, weights.d, &mut acc);
    }
    if weights.c > 0.0 {
        t.contact = scene_pairs_term(&posed, ctx.scene, &matching.contact, &ctx.contact_loss, scale, weights.c, &mut acc);
    }
    if weights.i > 0.0 {
        t.penetration =
            scene_pairs_term(&posed, ctx.scene, &matching.penetration, &ctx.penetration_loss, scale, weights.i, &mut acc);
    }
    if weights.reg > 0.0 {
        t.reg = reg_term(&posed, params, h, weights, weights.reg, &mut acc);
    }
    let value = weights.j2d * t.j2d + weights.d * t.depth + weights.c * t.contact + weights.i * t.penetration + weights.reg * t.reg;
    let mut grad = backward(template, &posed, &acc.up);
    let trans = ParamLayout::of(template).trans();
    for (a, g) in trans.zip(acc.trans.iter()) {
        grad[a] += g;
    }
    Ok(HumanEvaluation { terms: t, value, grad, scale_grad: acc.scale, matching })
}

fn evaluate_impl(
    ctx: &ObjectiveContext<'_>,
    state: &OptimState,
    weights: &LossWeights,
    matchings: Option<&[Matching]>,
) -> Result<Evaluation> {
    if state.humans.len() != ctx.humans.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} parameter sets for {} people",
            state.humans.len(),
            ctx.humans.len()
        )));
    }
    let mut humans = Vec::with_capacity(state.humans.len());
    for (i, params) in state.humans.iter().enumerate() {
        humans.push(evaluate_human(ctx, i, params, state.scale, weights, matchings.map(|m| &m[i]))?);
    }
    let ds = state.scale - ctx.init_scale;
    let mut value = weights.reg * weights.scale_reg * ds * ds;
    let mut scale_grad = weights.reg * weights.scale_reg * 2.0 * ds;
    for h in &humans {
        value += h.value;
        scale_grad += h.scale_grad;
    }
    Ok(Evaluation { value, humans, scale_grad })
}

/// Weighted sum over all people plus the shared scale regulariser.
pub fn evaluate(ctx: &ObjectiveContext<'_>, state: &OptimState, weights: &LossWeights) -> Result<Evaluation> {
    evaluate_impl(ctx, state, weights, None)
}

/// As [`evaluate`] with correspondences and gates held at `matchings`.
pub fn evaluate_with(
    ctx: &ObjectiveContext<'_>,
    state: &OptimState,
    weights: &LossWeights,
    matchings: &[Matching],
) -> Result<Evaluation> {
    evaluate_impl(ctx, state, weights, Some(matchings))
}

/// Confidence-weighted squared reprojection error in diagonal-normalised pixels.
pub fn loss_j2d(
    template: &BodyTemplate,
    params: &BodyParams,
    cam: &CameraIntrinsics,
    kp: &Keypoints2D,
    keypoint_map: &[(usize, usize)],
) -> Result<(f64, Vec<f64>)> {
    let posed = forward(template, params)?;
    let mut acc = Accum::new(template);
    let value = j2d_term(&posed, cam, kp, keypoint_map, 1.0, &mut acc)?;
    Ok((value, backward(template, &posed, &acc.up)))
}

fn single(ctx: &ObjectiveContext<'_>, human: usize, params: &BodyParams, scale: f64, w: LossWeights) -> Result<HumanEvaluation> {
    evaluate_human(ctx, human, params, scale, &w, None)
}

/// Chamfer between camera-facing vertices and the person's observed points.
pub fn loss_depth(ctx: &ObjectiveContext<'_>, human: usize, params: &BodyParams) -> Result<(f64, Vec<f64>)> {
    let e = single(ctx, human, params, ctx.init_scale, LossWeights { d: 1.0, ..LossWeights::zero() })?;
    Ok((e.terms.depth, e.grad))
}

/// Returns value, parameter gradient and scale gradient.
pub fn loss_contact(ctx: &ObjectiveContext<'_>, human: usize, params: &BodyParams, scale: f64) -> Result<(f64, Vec<f64>, f64)> {
    let e = single(ctx, human, params, scale, LossWeights { c: 1.0, ..LossWeights::zero() })?;
    Ok((e.terms.contact, e.grad, e.scale_grad))
}

/// Returns value, parameter gradient and scale gradient.
pub fn loss_interpenetration(
    ctx: &ObjectiveContext<'_>,
    human: usize,
    params: &BodyParams,
    scale: f64,
) -> Result<(f64, Vec<f64>, f64)> {
    let e = single(ctx, human, params, scale, LossWeights { i: 1.0, ..LossWeights::zero() })?;
    Ok((e.terms.penetration, e.grad, e.scale_grad))
}

/// Root-relative deviation from the initial mesh plus the translation term.
/// `weights` supplies the occlusion multiplier and translation weight.
pub fn loss_reg(ctx: &ObjectiveContext<'_>, human: usize, params: &BodyParams, weights: &LossWeights) -> Result<(f64, Vec<f64>)> {
    let w = LossWeights { reg: 1.0, ..LossWeights::zero() };
    let w = LossWeights { reg_occluded_multiplier: weights.reg_occluded_multiplier, trans_reg: weights.trans_reg, ..w };
    let e = single(ctx, human, params, ctx.init_scale, w)?;
    Ok((e.terms.reg, e.grad))
}

/// Vertices strictly closer than `threshold` to the scene at `scale`.
pub fn extract_contacts(vertices: &[Vec3], scene: &dyn NearestScene, scale: f64, threshold: f64) -> ContactReport {
    let distances: Vec<f64> = vertices.iter().map(|v| scene.nearest(v, scale).distance).collect();
    let in_contact = distances.iter().map(|&d| d < threshold).collect();
    ContactReport { in_contact, distances }
}
