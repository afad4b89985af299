use serde::{Deserialize, Serialize};

use super::{lbfgs, Adam, AdamConfig, LbfgsConfig, OptimState};
use crate::body::{forward, BodyParams, BodyTemplate, ParamLayout};
use crate::error::{Error, Result, Stage};
use crate::geometry::{CameraIntrinsics, Mask, PointMap, RobustLoss, Vec3};
use crate::io::InputBundle;
use crate::nn::{BruteForceScene, ExactScene, NearestPointGrid, NearestScene, DEFAULT_RESOLUTION};
use crate::objective::{
    evaluate, evaluate_human, extract_contacts, ContactReport, ContactThresholds, HumanTerms, LossWeights,
    ObjectiveContext,
};
use crate::scene::{align_scale_shift, build_scene, RansacConfig, SceneConfig, SceneInputs, SceneScaffold};
use crate::visibility::{camera_facing, occlusion_mask, VisibilityMasks};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schedule {
    pub stage2_j2d_iters: usize,
    pub stage2_lbfgs_iters: usize,
    pub stage3_iters: usize,
    pub adam_lr: f64,
    pub occ_refresh_every: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self { stage2_j2d_iters: 30, stage2_lbfgs_iters: 2, stage3_iters: 100, adam_lr: 1e-2, occ_refresh_every: 30 }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("schedule.stage2_j2d_iters", self.stage2_j2d_iters),
            ("schedule.stage2_lbfgs_iters", self.stage2_lbfgs_iters),
            ("schedule.stage3_iters", self.stage3_iters),
            ("schedule.occ_refresh_every", self.occ_refresh_every),
        ];
        for (name, n) in counts {
            if n < 1 {
                return Err(Error::invariant(name, "must be at least 1"));
            }
        }
        if !(self.adam_lr.is_finite() && self.adam_lr > 0.0) {
            return Err(Error::invariant("schedule.adam_lr", format!("must be > 0, got {}", self.adam_lr)));
        }
        Ok(())
    }
}

/// Nearest-scene-point backend for the joint stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NnBackend {
    Grid,
    KdTree,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub scene: SceneConfig,
    /// RANSAC settings for aligning the full image to the scene.
    pub human_align_ransac: RansacConfig,
    pub weights: LossWeights,
    pub align_weights: LossWeights,
    pub schedule: Schedule,
    pub lbfgs: LbfgsConfig,
    pub contacts: ContactThresholds,
    pub contact_loss: RobustLoss,
    pub penetration_loss: RobustLoss,
    pub grid_resolution: usize,
    /// When false, the occlusion mask is kept empty.
    pub occlusion_aware: bool,
    pub nn_backend: NnBackend,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            scene: SceneConfig::default(),
            human_align_ransac: RansacConfig::alignment_default(),
            weights: LossWeights::joint(),
            align_weights: LossWeights::alignment(),
            schedule: Schedule::default(),
            lbfgs: LbfgsConfig::default(),
            contacts: ContactThresholds::default(),
            contact_loss: RobustLoss::default(),
            penetration_loss: RobustLoss::default(),
            grid_resolution: DEFAULT_RESOLUTION,
            occlusion_aware: true,
            nn_backend: NnBackend::Grid,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        self.align_weights.validate()?;
        self.schedule.validate()?;
        self.contacts.validate()?;
        self.contact_loss.validate()?;
        self.penetration_loss.validate()?;
        self.scene.align_ransac.validate()?;
        self.scene.plane_ransac.validate()?;
        self.human_align_ransac.validate()?;
        if self.grid_resolution == 0 {
            return Err(Error::invariant("grid_resolution", "must be at least 1"));
        }
        Ok(())
    }

    /// Scene RANSAC streams derived from the top-level seed.
    pub fn scene_config(&self) -> SceneConfig {
        self.scene.with_seed(self.seed)
    }

    fn human_ransac(&self) -> RansacConfig {
        RansacConfig { seed: self.seed.wrapping_add(2), ..self.human_align_ransac }
    }
}

/// A person after the alignment stage.
#[derive(Debug, Clone)]
pub struct AlignedPerson {
    pub params: BodyParams,
    /// Observed metric points of this person.
    pub points: Vec<Vec3>,
    pub camera_facing: Vec<bool>,
}

fn masked_points(pm: &PointMap, mask: &Mask) -> Vec<Vec3> {
    pm.valid_points().filter(|(i, _)| mask.get_index(*i)).map(|(_, p)| p).collect()
}

fn keypoint_map(bundle: &InputBundle, template: &BodyTemplate) -> Vec<(usize, usize)> {
    bundle.keypoint_map.clone().unwrap_or_else(|| template.keypoint_map.clone())
}

fn terms_for(
    template: &BodyTemplate,
    bundle: &InputBundle,
    person: usize,
    params: &BodyParams,
    points: Vec<Vec3>,
    masks: VisibilityMasks,
) -> Result<HumanTerms> {
    let p = &bundle.people[person];
    HumanTerms::new(
        template,
        p.keypoints.clone(),
        keypoint_map(bundle, template),
        points,
        masks,
        p.contacts.clone(),
        Some(p.mask.clone()),
        params.clone(),
    )
}

/// Minimises a translation-only objective over the three translation entries.
fn translation_only<F>(params: &BodyParams, mut f: F) -> impl FnMut(&[f64]) -> Result<(f64, Vec<f64>)>
where
    F: FnMut(&BodyParams) -> Result<(f64, Vec<f64>)>,
{
    let base = params.clone();
    move |t: &[f64]| {
        let mut p = base.clone();
        p.trans = [t[0], t[1], t[2]];
        f(&p)
    }
}

/// L-BFGS on the alignment objective with only the translation free.
pub fn lbfgs_translate(
    ctx: &ObjectiveContext<'_>,
    human: usize,
    params: &BodyParams,
    weights: &LossWeights,
    steps: usize,
    cfg: &LbfgsConfig,
) -> Result<BodyParams> {
    let trans = ParamLayout::of(ctx.template).trans();
    let objective = translation_only(params, |p| {
        let e = evaluate_human(ctx, human, p, ctx.init_scale, weights, None)?;
        Ok((e.value, e.grad[trans.clone()].to_vec()))
    });
    let report = lbfgs(objective, &params.trans, steps, cfg)?;
    let mut out = params.clone();
    out.trans = [report.x[0], report.x[1], report.x[2]];
    Ok(out)
}

/// Places each person in the metric scene: observed points, keypoint-driven
/// translation, then translation alignment against the observed points.
pub fn run_stage2(
    bundle: &InputBundle,
    scaffold: &SceneScaffold,
    template: &BodyTemplate,
    cfg: &PipelineConfig,
) -> Result<Vec<AlignedPerson>> {
    let humans = bundle.human_union();
    let ss = align_scale_shift(&bundle.full_relpoints, &scaffold.point_map, Some(&humans), &cfg.human_ransac())?;
    let full = bundle.full_relpoints.map_valid(|p| ss.apply(p));
    let cam = scaffold.cam;
    let trans = ParamLayout::of(template).trans();
    let empty = VisibilityMasks::empty(template.num_vertices(), template.num_parts());
    let mut out = Vec::with_capacity(bundle.people.len());
    for (i, person) in bundle.people.iter().enumerate() {
        let points = masked_points(&full, &person.mask);
        let mut params = person.init_params.clone();

        // keypoints only, translation only
        let kp_terms = terms_for(template, bundle, i, &params, points.clone(), empty.clone())?;
        let scene = NoScene;
        let ctx = ObjectiveContext::new(template, &scene, cam, vec![kp_terms]);
        let kp_weights = LossWeights { j2d: cfg.align_weights.j2d, ..LossWeights::zero() };
        let mut adam = Adam::new(3, AdamConfig { lr: cfg.schedule.adam_lr, ..AdamConfig::default() });
        for _ in 0..cfg.schedule.stage2_j2d_iters {
            let e = evaluate_human(&ctx, 0, &params, 1.0, &kp_weights, None)?;
            if !e.value.is_finite() {
                return Err(Error::NonFiniteLoss);
            }
            adam.step(&mut params.trans, &e.grad[trans.clone()])?;
        }

        let posed = forward(template, &params)?;
        let facing = camera_facing(&posed.vertices, &template.faces);
        let masks = VisibilityMasks { camera_facing: facing.clone(), ..empty.clone() };
        let align_terms = terms_for(template, bundle, i, &params, points.clone(), masks)?;
        let ctx = ObjectiveContext::new(template, &scene, cam, vec![align_terms]);
        let weights = LossWeights { c: 0.0, i: 0.0, reg: 0.0, ..cfg.align_weights };
        if !points.is_empty() && facing.iter().any(|&f| f) {
            params = lbfgs_translate(&ctx, 0, &params, &weights, cfg.schedule.stage2_lbfgs_iters, &cfg.lbfgs)?;
        }
        out.push(AlignedPerson { params, points, camera_facing: facing });
    }
    Ok(out)
}

/// Placeholder scene for stages without scene terms.
struct NoScene;

impl NearestScene for NoScene {
    fn cloud(&self) -> &crate::geometry::PointCloud {
        unreachable!("scene terms are disabled before the joint stage")
    }

    fn build_scale(&self) -> f64 {
        1.0
    }

    fn nearest(&self, _: &Vec3, _: f64) -> crate::nn::SceneHit {
        unreachable!("scene terms are disabled before the joint stage")
    }
}

#[derive(Debug, Clone)]
pub struct Stage3Output {
    pub state: OptimState,
    /// Total objective before each iteration, then after the last.
    pub losses: Vec<f64>,
    /// True when a non-finite loss stopped the loop early.
    pub aborted: bool,
}

fn refresh_occlusion(ctx: &mut ObjectiveContext<'_>, state: &OptimState, aware: bool) -> Result<()> {
    for (h, params) in ctx.humans.iter_mut().zip(&state.humans) {
        if aware {
            let posed = forward(ctx.template, params)?;
            let (occluded, parts) = occlusion_mask(&posed.vertices, ctx.template, &ctx.cam, h.human_mask.as_ref());
            h.masks.occluded = occluded;
            h.masks.per_part_occluded = parts;
        } else {
            h.masks.occluded.iter_mut().for_each(|o| *o = false);
            h.masks.per_part_occluded.iter_mut().for_each(|o| *o = false);
        }
    }
    Ok(())
}

fn pack(state: &OptimState) -> Vec<f64> {
    let mut x: Vec<f64> = state.humans.iter().flat_map(|p| p.to_flat()).collect();
    x.push(state.scale);
    x
}

fn unpack(layout: &ParamLayout, x: &[f64]) -> Result<OptimState> {
    let n = layout.len();
    let humans = x[..x.len() - 1].chunks(n).map(|c| BodyParams::from_flat(layout, c)).collect::<Result<_>>()?;
    Ok(OptimState { humans, scale: x[x.len() - 1] })
}

/// Joint Adam over every person's parameters and the shared scene scale.
pub fn run_stage3(
    state: &OptimState,
    ctx: &mut ObjectiveContext<'_>,
    weights: &LossWeights,
    schedule: &Schedule,
    occlusion_aware: bool,
) -> Result<Stage3Output> {
    let layout = ParamLayout::of(ctx.template);
    let mut x = pack(state);
    let mut adam = Adam::new(x.len(), AdamConfig { lr: schedule.adam_lr, ..AdamConfig::default() });
    let mut current = state.clone();
    let mut losses = Vec::with_capacity(schedule.stage3_iters + 1);
    let mut aborted = false;
    for it in 0..schedule.stage3_iters {
        if it % schedule.occ_refresh_every == 0 {
            refresh_occlusion(ctx, &current, occlusion_aware)?;
        }
        let e = evaluate(ctx, &current, weights)?;
        let mut grad: Vec<f64> = e.humans.iter().flat_map(|h| h.grad.iter().copied()).collect();
        grad.push(e.scale_grad);
        if !e.value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            aborted = true;
            break;
        }
        losses.push(e.value);
        let mut next = x.clone();
        adam.step(&mut next, &grad)?;
        let candidate = unpack(&layout, &next)?;
        if !(candidate.scale > 0.0) {
            aborted = true;
            break;
        }
        x = next;
        current = candidate;
    }
    if !aborted {
        match evaluate(ctx, &current, weights) {
            Ok(e) if e.value.is_finite() => losses.push(e.value),
            Ok(_) => aborted = true,
            Err(e) => return Err(e),
        }
    }
    Ok(Stage3Output { state: current, losses, aborted })
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub scaffold: SceneScaffold,
    pub aligned: Vec<AlignedPerson>,
    pub state: OptimState,
    pub contacts: Vec<ContactReport>,
    pub losses: Vec<f64>,
    pub aborted: bool,
    /// Final occlusion masks per person.
    pub masks: Vec<VisibilityMasks>,
}

impl PipelineOutput {
    /// Scene points at the optimised scale.
    pub fn scaled_scene(&self) -> Vec<Vec3> {
        self.scaffold.points.points.iter().map(|p| p * self.state.scale).collect()
    }
}

/// Builds the nearest-point backend selected by `backend`.
pub fn scene_backend(
    scaffold: &SceneScaffold,
    backend: NnBackend,
    resolution: usize,
) -> Result<Box<dyn NearestScene + Send + Sync>> {
    Ok(match backend {
        NnBackend::Grid => Box::new(NearestPointGrid::build(&scaffold.points, resolution, 1.0)?),
        NnBackend::KdTree => Box::new(ExactScene::new(&scaffold.points, 1.0)?),
        NnBackend::BruteForce => Box::new(BruteForceScene::new(&scaffold.points, 1.0)?),
    })
}

/// Joint-stage context with occlusion masks computed at the aligned poses.
pub fn joint_context<'a>(
    bundle: &InputBundle,
    template: &'a BodyTemplate,
    scene: &'a dyn NearestScene,
    cam: CameraIntrinsics,
    aligned: &[AlignedPerson],
    cfg: &PipelineConfig,
) -> Result<ObjectiveContext<'a>> {
    let mut humans = Vec::with_capacity(aligned.len());
    for (i, a) in aligned.iter().enumerate() {
        let masks = VisibilityMasks {
            camera_facing: a.camera_facing.clone(),
            ..VisibilityMasks::empty(template.num_vertices(), template.num_parts())
        };
        humans.push(terms_for(template, bundle, i, &a.params, a.points.clone(), masks)?);
    }
    let mut ctx = ObjectiveContext::new(template, scene, cam, humans);
    ctx.thresholds = cfg.contacts;
    ctx.contact_loss = cfg.contact_loss;
    ctx.penetration_loss = cfg.penetration_loss;
    ctx.init_scale = 1.0;
    Ok(ctx)
}

/// Scene scaffold, per-person alignment, joint refinement, contact extraction.
pub fn run_pipeline(bundle: &InputBundle, template: &BodyTemplate, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    bundle.validate()?;
    cfg.validate()?;
    let scene_inputs = SceneInputs {
        depth: &bundle.scene_depth,
        relpoints: &bundle.scene_relpoints,
        floor_mask: bundle.floor_mask.as_ref(),
        depth_intrinsics: bundle.intrinsics_hint,
    };
    let scaffold = build_scene(&scene_inputs, &cfg.scene_config()).map_err(|e| e.in_stage(Stage::Scene))?;
    let aligned = run_stage2(bundle, &scaffold, template, cfg).map_err(|e| e.in_stage(Stage::Alignment))?;

    let joint = || -> Result<(Stage3Output, Vec<ContactReport>, Vec<VisibilityMasks>)> {
        let scene = scene_backend(&scaffold, cfg.nn_backend, cfg.grid_resolution)?;
        let mut ctx = joint_context(bundle, template, scene.as_ref(), scaffold.cam, &aligned, cfg)?;
        let state = OptimState { humans: aligned.iter().map(|a| a.params.clone()).collect(), scale: 1.0 };
        let out = run_stage3(&state, &mut ctx, &cfg.weights, &cfg.schedule, cfg.occlusion_aware)?;
        // contacts are read off with exact nearest neighbours
        let exact = ExactScene::new(&scaffold.points, 1.0)?;
        let mut reports = Vec::with_capacity(out.state.humans.len());
        for p in &out.state.humans {
            let v = forward(template, p)?.vertices;
            reports.push(extract_contacts(&v, &exact, out.state.scale, cfg.contacts.extract));
        }
        let masks = ctx.humans.iter().map(|h| h.masks.clone()).collect();
        Ok((out, reports, masks))
    };
    let (out, contacts, masks) = joint().map_err(|e| e.in_stage(Stage::Joint))?;
    Ok(PipelineOutput {
        scaffold,
        aligned,
        state: out.state,
        contacts,
        losses: out.losses,
        aborted: out.aborted,
        masks,
    })
}
