//! Acceptance report: one PASS/FAIL line per headline criterion.
//!
//! Runs as a plain binary (`harness = false`). Every check is computed, never
//! asserted, so a failing criterion is reported rather than aborting the run.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use hsi_core::body::{forward, make_synthetic_humanoid, static_contact_preset, BodyParams, BodyTemplate, ParamLayout};
use hsi_core::geometry::{
    chamfer, chamfer_brute_force, nearest_brute_force, CameraIntrinsics, DepthRaster, PointCloud, PointMap, Vec3,
};
use hsi_core::io::{load_bundle, save_bundle, snapshot_dir, write_outputs, InputBundle};
use hsi_core::metrics::ContactCounts;
use hsi_core::nn::{BruteForceScene, ExactScene, NearestPointGrid, NearestScene, DEFAULT_RESOLUTION};
use hsi_core::objective::{
    evaluate, evaluate_human, evaluate_with, extract_contacts, HumanTerms, Keypoints2D, LossWeights, ObjectiveContext,
};
use hsi_core::optim::{joint_context, run_pipeline, run_stage2, run_stage3, OptimState, PipelineConfig, PipelineOutput};
use hsi_core::scene::{
    adaptive_k, align_scale_shift, build_scene, fit_floor_plane, outlier_flags, recalibrate_intrinsics, OutlierConfig,
    RansacConfig, SceneInputs,
};
use hsi_core::synth::{fixture_template, synth_fixture, FixtureKind, GroundTruth};
use hsi_core::visibility::{compute_visibility, occlusion_mask, parts_over_fraction};

const SEED: u64 = 7;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(name: &str, run: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let o = run();
    println!(
        "{} {name}: {} [{:.1} s]",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        start.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------- gradients

const FLOOR_Y: f64 = 1.5;

fn small_cam() -> CameraIntrinsics {
    CameraIntrinsics::new(300.0, 300.0, 320, 240).unwrap()
}

fn floor_cloud(spacing: f64) -> PointCloud {
    let n = (3.0 / spacing) as usize;
    let pts: Vec<Vec3> = (0..=n)
        .flat_map(|i| (0..=n).map(move |k| Vec3::new(-1.5 + i as f64 * spacing, FLOOR_Y, 1.5 + k as f64 * spacing)))
        .collect();
    let normals = vec![Some(Vec3::new(0.0, -1.0, 0.0)); pts.len()];
    PointCloud::with_normals(pts, normals).unwrap()
}

fn upright(t: &BodyTemplate, rng: &mut ChaCha8Rng, noise: f64, lift: f64) -> BodyParams {
    let mut p = BodyParams::zeros(t);
    for th in p.theta_body.iter_mut().skip(1).chain(p.theta_hand.iter_mut()) {
        *th = [rng.gen_range(-noise..noise), rng.gen_range(-noise..noise), rng.gen_range(-noise..noise)];
    }
    p.theta_body[0] = [PI, 0.0, 0.0];
    p.beta = (0..t.num_betas).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let root = t.joints[t.root()];
    let sole = t.vertices.iter().map(|v| v.y).fold(f64::INFINITY, f64::min);
    p.trans = [0.0, FLOOR_Y - lift - (2.0 * root.y - sole), 3.0];
    p
}

fn human_terms(t: &BodyTemplate, truth: &BodyParams, init: &BodyParams, rng: &mut ChaCha8Rng) -> HumanTerms {
    let posed = forward(t, truth).unwrap();
    let mut masks = compute_visibility(&posed.vertices, t, &small_cam(), None);
    for (i, o) in masks.occluded.iter_mut().enumerate() {
        *o |= i % 7 == 0;
    }
    let points = masks
        .facing_indices()
        .iter()
        .step_by(3)
        .map(|&i| posed.vertices[i] + Vec3::new(rng.gen_range(-0.005..0.005), 0.0, rng.gen_range(-0.005..0.005)))
        .collect();
    let n = t.keypoint_map.iter().map(|k| k.0).max().unwrap() + 1;
    let mut kp = vec![[0.0; 2]; n];
    let mut conf = vec![0.0; n];
    for &(k, j) in &t.keypoint_map {
        let uv = small_cam().project_point(&posed.joints[j]).unwrap();
        kp[k] = [uv.x + rng.gen_range(-2.0..2.0), uv.y + rng.gen_range(-2.0..2.0)];
        conf[k] = rng.gen_range(0.5..1.0);
    }
    let keypoints = Keypoints2D::new(kp, conf).unwrap();
    HumanTerms::new(t, keypoints, t.keypoint_map.clone(), points, masks, static_contact_preset(t), None, init.clone()).unwrap()
}

fn central_differences(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let (mut a, mut b) = (x.to_vec(), x.to_vec());
            a[k] += h;
            b[k] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}

fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff = analytic.iter().zip(numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    diff / numeric.iter().map(|n| n * n).sum::<f64>().sqrt().max(1e-12)
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let t = make_synthetic_humanoid(0);
    let layout = ParamLayout::of(&t);
    let scene = NearestPointGrid::build(&floor_cloud(0.03), DEFAULT_RESOLUTION, 1.0).unwrap();
    let zero = LossWeights::zero();
    let cases: [(&str, LossWeights, f64, f64); 6] = [
        ("j2d", LossWeights { j2d: 1.0, ..zero }, 0.10, 1.0),
        ("depth", LossWeights { d: 1.0, ..zero }, 0.05, 1.0),
        ("contact", LossWeights { c: 1.0, ..zero }, 0.04, 1.05),
        ("penetration", LossWeights { i: 1.0, ..zero }, -0.04, 0.98),
        ("reg", LossWeights { reg: 1.0, trans_reg: 0.1, scale_reg: 1.0, reg_occluded_multiplier: 3.0, ..zero }, 0.02, 1.03),
        ("total", LossWeights::joint(), -0.04, 0.99),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    let mut inert = Vec::new();
    for (k, (name, w, lift, scale)) in cases.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
        let truth = upright(&t, &mut rng, 0.1, 0.0);
        let init = upright(&t, &mut rng, 0.1, *lift);
        let at = upright(&t, &mut rng, 0.15, *lift);
        let h = human_terms(&t, &truth, &init, &mut rng);
        let ctx = ObjectiveContext::new(&t, &scene, small_cam(), vec![h]);
        let state = OptimState { humans: vec![at.clone()], scale: *scale };
        let e = evaluate(&ctx, &state, w).unwrap();
        let m = e.matchings();
        let active = match *name {
            "contact" => !m[0].contact.is_empty(),
            "penetration" => !m[0].penetration.is_empty(),
            "total" => !m[0].contact.is_empty() && !m[0].penetration.is_empty(),
            _ => true,
        };
        if !active {
            inert.push(*name);
        }
        let mut x = at.to_flat();
        x.push(*scale);
        let numeric = central_differences(&x, 1e-5, |y| {
            let p = BodyParams::from_flat(&layout, &y[..layout.len()]).unwrap();
            evaluate_with(&ctx, &OptimState { humans: vec![p], scale: y[layout.len()] }, w, &m).unwrap().value
        });
        // the single-person entry point must agree with the joint one
        let single = evaluate_human(&ctx, 0, &at, *scale, w, Some(&m[0])).unwrap();
        let mut analytic = single.grad.clone();
        analytic.push(e.scale_grad);
        let err = relative_error(&analytic, &numeric);
        worst = worst.max(err);
        parts.push(format!("{name} {err:.1e}"));
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: worst < 1e-4 && secs < 60.0 && inert.is_empty(),
        detail: format!(
            "max relative error {worst:.2e} (< 1e-4) [{}]{}; {secs:.1} s (< 60 s)",
            parts.join(", "),
            if inert.is_empty() { String::new() } else { format!("; inactive terms: {}", inert.join(", ")) }
        ),
    }
}

// ----------------------------------------------------------------- oracles

fn room_cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..n)
        .map(|i| match i % 3 {
            0 => Vec3::new(rng.gen_range(-2.0..2.0), 1.4, rng.gen_range(1.0..6.0)),
            1 => Vec3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.4), 6.0),
            _ => Vec3::new(rng.gen_range(0.5..1.1), rng.gen_range(0.8..1.4), rng.gen_range(3.0..3.6)),
        })
        .collect();
    PointCloud::new(pts)
}

fn brute_knn_mean(points: &[Vec3], k: usize) -> Vec<f64> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut d: Vec<(f64, usize)> =
                points.iter().enumerate().filter(|(j, _)| *j != i).map(|(j, q)| ((p - q).norm_squared(), j)).collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d[..k].iter().map(|(d2, _)| d2.sqrt()).sum::<f64>() / k as f64
        })
        .collect()
}

/// Independent statement of the statistical cut: mean + 2 sd, floored at twice
/// the median, and never more than a fifth of the points (largest first).
fn brute_outlier_flags(stat: &[f64]) -> Vec<bool> {
    let n = stat.len() as f64;
    let mean = stat.iter().sum::<f64>() / n;
    let sd = (stat.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n).sqrt();
    let mut sorted = stat.to_vec();
    sorted.sort_by(f64::total_cmp);
    let len = sorted.len();
    let median = if len % 2 == 1 { sorted[len / 2] } else { 0.5 * (sorted[len / 2 - 1] + sorted[len / 2]) };
    let cut = (mean + 2.0 * sd).max(2.0 * median);
    let mut order: Vec<usize> = (0..len).filter(|&i| stat[i] > cut).collect();
    order.sort_by(|&a, &b| stat[b].total_cmp(&stat[a]).then(a.cmp(&b)));
    order.truncate((0.2 * n).floor() as usize);
    let mut flags = vec![false; len];
    for i in order {
        flags[i] = true;
    }
    flags
}

/// Exact-match rate and worst distance slack of grid queries against brute force,
/// over 1e4 queries uniform in the grid volume.
fn grid_agreement(cloud: &PointCloud, seed: u64) -> (f64, f64, f64) {
    let grid = NearestPointGrid::build(cloud, DEFAULT_RESOLUTION, 1.0).unwrap();
    let aabb = *grid.aabb();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut exact, mut worst) = (0, 0.0f64);
    let n = 10_000;
    for _ in 0..n {
        let q = Vec3::new(
            rng.gen_range(aabb.min.x..aabb.max.x),
            rng.gen_range(aabb.min.y..aabb.max.y),
            rng.gen_range(aabb.min.z..aabb.max.z),
        );
        let slack = grid.nearest(&q, 1.0).distance - nearest_brute_force(&cloud.points, &q).unwrap().1.sqrt();
        exact += (slack <= 1e-12) as usize;
        worst = worst.max(slack);
    }
    (exact as f64 / n as f64, worst, grid.voxel_diagonal())
}

fn oracle_check() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let a = room_cloud(20_000, 1).points;
    let b: Vec<Vec3> = room_cloud(20_000, 2).points.iter().map(|p| p + Vec3::new(0.01, -0.02, 0.015)).collect();
    let (fast, slow) = (chamfer(&a, &b).unwrap(), chamfer_brute_force(&a, &b).unwrap());
    let rel = (fast - slow).abs() / slow;
    pass &= rel <= 1e-12;
    notes.push(format!("chamfer 20k/20k rel diff {rel:.1e}"));

    let mut pts = room_cloud(8_000, 3).points;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        pts.push(Vec3::new(rng.gen_range(-4.0..4.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.5..9.0)));
    }
    let k = adaptive_k(640, 480);
    let flags = outlier_flags(&pts, k, &OutlierConfig::default());
    let oracle = brute_outlier_flags(&brute_knn_mean(&pts, k));
    let mismatched = flags.iter().zip(&oracle).filter(|(x, y)| x != y).count();
    pass &= mismatched == 0;
    notes.push(format!(
        "outlier filter {} pts, {} flagged, {mismatched} mismatches",
        pts.len(),
        flags.iter().filter(|f| **f).count()
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let scattered = PointCloud::new(
        (0..50_000).map(|_| Vec3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.5), rng.gen_range(1.0..6.0))).collect(),
    );
    let (frac, slack, diag) = grid_agreement(&scattered, 6);
    pass &= frac >= 0.95 && slack <= diag;
    // dense surface samplings put many points in each voxel, so the stored
    // nearest-to-centre point often differs from the true nearest
    let (surf_frac, surf_slack, surf_diag) = grid_agreement(&room_cloud(50_000, 5), 7);
    notes.push(format!(
        "grid 50k random pts, 1e4 queries: {:.1}% exact (>= 95%), worst slack {slack:.4} m vs voxel diagonal {diag:.4} m \
         (50k surface pts: {:.1}% exact, slack {surf_slack:.4} m vs {surf_diag:.4} m)",
        100.0 * frac,
        100.0 * surf_frac
    ));

    let (_, gt) = synth_fixture(FixtureKind::Seated, SEED);
    let t = fixture_template();
    let verts = forward(&t, &gt.params[0]).unwrap().vertices;
    let sub: Vec<usize> = (0..gt.scene.len()).step_by((gt.scene.len() / 50_000).max(1)).collect();
    let scene = gt.scene.select(&sub);
    let exact_scene = ExactScene::new(&scene, 1.0).unwrap();
    let report = extract_contacts(&verts, &exact_scene, 1.0, 0.05);
    let disagree = verts
        .iter()
        .zip(&report.in_contact)
        .filter(|(v, c)| (nearest_brute_force(&scene.points, v).unwrap().1.sqrt() < 0.05) != **c)
        .count();
    pass &= disagree == 0;
    notes.push(format!(
        "contact extraction {} verts x {} pts, {} contacts, {disagree} disagreements",
        verts.len(),
        scene.len(),
        report.in_contact.iter().filter(|c| **c).count()
    ));

    Outcome { pass, detail: notes.join("; ") }
}

// -------------------------------------------------------------- estimators

fn metric_map(w: usize, h: usize, seed: u64) -> PointMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cam = CameraIntrinsics::new(500.0, 500.0, w, h).unwrap();
    let depth = DepthRaster::from_values(w, h, (0..w * h).map(|_| rng.gen_range(1.0..6.0)).collect()).unwrap();
    cam.backproject(&depth).unwrap()
}

fn estimator_check() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let (s, tz) = (1.7, -0.4);

    let metric = metric_map(64, 48, 11);
    let rel = metric.map_valid(|p| Vec3::new(p.x / s, p.y / s, (p.z - tz) / s));
    let clean = align_scale_shift(&rel, &metric, None, &RansacConfig::alignment_default()).unwrap();
    let e_clean = (clean.s - s).abs().max((clean.tz - tz).abs());
    let mut corrupted = rel.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..64 * 48 {
        if rng.gen_bool(0.3) {
            let p = corrupted.get_index(i).unwrap();
            corrupted.set(i % 64, i / 64, Some(Vec3::new(p.x, p.y, p.z * rng.gen_range(0.3..3.0))));
        }
    }
    let robust = align_scale_shift(&corrupted, &metric, None, &RansacConfig::alignment_default()).unwrap();
    let e_robust = (robust.s - s).abs().max((robust.tz - tz).abs());
    pass &= e_clean < 1e-6 && e_robust < 1e-3;
    notes.push(format!("scale/shift error {e_clean:.1e} clean (< 1e-6), {e_robust:.1e} with 30% outliers (< 1e-3)"));

    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let tilt = nalgebra::Rotation3::from_axis_angle(&Vec3::x_axis(), 0.2);
    let up = tilt * Vec3::new(0.0, -1.0, 0.0);
    let gauss = Normal::new(0.0, 0.005).unwrap();
    let mut points = Vec::new();
    for _ in 0..4000 {
        let (x, z) = (rng.gen_range(-2.0..2.0), rng.gen_range(1.0..6.0));
        let p = if rng.gen_bool(0.2) {
            Vec3::new(x, rng.gen_range(-1.0..1.3), z)
        } else {
            Vec3::new(x, 1.3 + gauss.sample(&mut rng), z)
        };
        points.push(tilt * p);
    }
    let idx: Vec<usize> = (0..points.len()).collect();
    let plane = fit_floor_plane(&PointCloud::new(points), &idx, &RansacConfig::plane_default()).unwrap();
    let angle = plane.normal.dot(&up).abs().clamp(-1.0, 1.0).acos().to_degrees();
    pass &= angle < 1.0;
    notes.push(format!("floor normal error {angle:.3} deg (< 1 deg)"));

    let f = 523.0;
    let cam = CameraIntrinsics::new(f, f, 96, 72).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let depth = DepthRaster::from_values(96, 72, (0..96 * 72).map(|_| rng.gen_range(1.0..5.0)).collect()).unwrap();
    let pm = cam.backproject(&depth).unwrap();
    let exact = recalibrate_intrinsics(&pm).unwrap();
    let e_exact = ((exact.fx - f).abs()).max((exact.fy - f).abs()) / f;
    let mut noisy = pm.clone();
    for (i, p) in pm.valid_points() {
        noisy.set(i % 96, i / 96, Some(Vec3::new(p.x, p.y, p.z * (1.0 + rng.gen_range(-0.1..0.1)))));
    }
    let est = recalibrate_intrinsics(&noisy).unwrap();
    let e_noisy = ((est.fx - f).abs()).max((est.fy - f).abs()) / f;
    pass &= e_exact < 1e-9 && e_noisy < 0.01;
    notes.push(format!("focal rel error {e_exact:.1e} clean (exact), {:.2}% with 10% depth noise (< 1%)", 100.0 * e_noisy));

    Outcome { pass, detail: notes.join("; ") }
}

// -------------------------------------------------------------- end to end

struct RunStats {
    trans_err: f64,
    counts: ContactCounts,
    violations: usize,
    mpjpe_mm: f64,
    precision: f64,
    occluded_err: f64,
    occluded_drift: f64,
    secs: f64,
}

fn run_fixture(bundle: &InputBundle, gt: &GroundTruth, cfg: &PipelineConfig) -> (PipelineOutput, RunStats) {
    let t = fixture_template();
    let start = Instant::now();
    let out = run_pipeline(bundle, &t, cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut counts = ContactCounts::default();
    let (mut trans_err, mut violations, mut mpjpe, mut occ_err, mut occ_drift, mut occ_n) = (0.0f64, 0, 0.0, 0.0, 0.0, 0usize);
    for (i, (p, g)) in out.state.humans.iter().zip(&gt.params).enumerate() {
        trans_err = trans_err.max((p.trans_vec() - g.trans_vec()).norm());
        counts.add(ContactCounts::from_labels(&out.contacts[i].in_contact, &gt.contacts[i]).unwrap());
        let pp = forward(&t, p).unwrap();
        let gp = forward(&t, g).unwrap();
        let ip = forward(&t, &bundle.people[i].init_params).unwrap();
        violations += pp.vertices.iter().filter(|v| gt.floor.signed_distance(v) < -0.005).count();
        mpjpe += pp.joints.iter().zip(&gp.joints).map(|(a, b)| (a - b).norm()).sum::<f64>() / pp.joints.len() as f64;
        let (occ, _) = occlusion_mask(&gp.vertices, &t, &gt.cam, Some(&bundle.people[i].mask));
        let over = parts_over_fraction(&occ, &t.part_labels, t.num_parts());
        for (v, &part) in t.part_labels.iter().enumerate() {
            if over[part] {
                occ_err += ((pp.vertices[v] - pp.root) - (gp.vertices[v] - gp.root)).norm();
                occ_drift += ((pp.vertices[v] - pp.root) - (ip.vertices[v] - ip.root)).norm();
                occ_n += 1;
            }
        }
    }
    let stats = RunStats {
        trans_err,
        precision: counts.precision(),
        counts,
        violations,
        mpjpe_mm: 1000.0 * mpjpe / gt.params.len() as f64,
        occluded_err: if occ_n > 0 { occ_err / occ_n as f64 } else { f64::NAN },
        occluded_drift: if occ_n > 0 { occ_drift / occ_n as f64 } else { f64::NAN },
        secs,
    };
    (out, stats)
}

fn end_to_end_check(seated: &RunStats, standing: &RunStats) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, s) in [("standing", standing), ("seated", seated)] {
        let ok = s.trans_err < 0.03 && s.counts.f1() >= 0.8 && s.violations == 0 && s.secs < 60.0;
        pass &= ok;
        notes.push(format!(
            "{name}: trans {:.1} cm (< 3), F1 {:.3} (>= 0.8), floor violations {} (0), {:.1} s (< 60)",
            100.0 * s.trans_err,
            s.counts.f1(),
            s.violations,
            s.secs
        ));
    }
    Outcome { pass, detail: notes.join("; ") }
}

fn ablation_check() -> Outcome {
    let (bundle, gt) = synth_fixture(FixtureKind::OccludedLower, SEED);
    let base = PipelineConfig::default();
    let (_, aware) = run_fixture(&bundle, &gt, &base);
    let (_, blind) = run_fixture(&bundle, &gt, &PipelineConfig { occlusion_aware: false, ..base.clone() });
    let mut no_floor_cfg = base.clone();
    no_floor_cfg.scene.floor_enabled = false;
    let (_, no_floor) = run_fixture(&bundle, &gt, &no_floor_cfg);
    let occ_ok = aware.occluded_err < blind.occluded_err;
    let floor_ok = aware.counts.f1() > no_floor.counts.f1()
        || (aware.precision > no_floor.precision && aware.mpjpe_mm < no_floor.mpjpe_mm);
    Outcome {
        pass: occ_ok && floor_ok,
        detail: format!(
            "occluded-part error vs truth {:.2} mm aware vs {:.2} mm without occlusion mask (drift from init {:.2} vs {:.2} mm); floor on/off F1 {:.3}/{:.3}, precision {:.3}/{:.3}, MPJPE {:.1}/{:.1} mm",
            1000.0 * aware.occluded_err,
            1000.0 * blind.occluded_err,
            1000.0 * aware.occluded_drift,
            1000.0 * blind.occluded_drift,
            aware.counts.f1(),
            no_floor.counts.f1(),
            aware.precision,
            no_floor.precision,
            aware.mpjpe_mm,
            no_floor.mpjpe_mm
        ),
    }
}

fn robustness_check(bundle: &InputBundle, gt: &GroundTruth, predicted: &RunStats) -> Outcome {
    let t = fixture_template();
    let mut swapped = bundle.clone();
    for p in &mut swapped.people {
        p.contacts = static_contact_preset(&t);
    }
    let (_, preset) = run_fixture(&swapped, gt, &PipelineConfig::default());
    let df1 = (preset.counts.f1() - predicted.counts.f1()).abs();
    let dtrans = (preset.trans_err - predicted.trans_err).abs();
    Outcome {
        pass: df1 <= 0.1 && dtrans <= 0.02,
        detail: format!(
            "F1 {:.3} predicted vs {:.3} preset (|diff| {df1:.3} <= 0.1); trans {:.1} vs {:.1} cm (|diff| {:.1} <= 2 cm)",
            predicted.counts.f1(),
            preset.counts.f1(),
            100.0 * predicted.trans_err,
            100.0 * preset.trans_err,
            100.0 * dtrans
        ),
    }
}

// ------------------------------------------------------------ performance

fn performance_check() -> Outcome {
    let (bundle, _) = synth_fixture(FixtureKind::Standing, SEED);
    let t = fixture_template();
    let cfg = PipelineConfig::default();
    let inputs = SceneInputs {
        depth: &bundle.scene_depth,
        relpoints: &bundle.scene_relpoints,
        floor_mask: bundle.floor_mask.as_ref(),
        depth_intrinsics: bundle.intrinsics_hint,
    };
    let mut scaffold = build_scene(&inputs, &cfg.scene_config()).unwrap();
    let aligned = run_stage2(&bundle, &scaffold, &t, &cfg).unwrap();
    let target = 200_000;
    let keep: Vec<usize> = (0..target).map(|i| i * scaffold.points.len() / target).collect();
    scaffold.points = scaffold.points.select(&keep);
    let state = OptimState { humans: aligned.iter().map(|a| a.params.clone()).collect(), scale: 1.0 };

    let start = Instant::now();
    let grid = NearestPointGrid::build(&scaffold.points, cfg.grid_resolution, 1.0).unwrap();
    let mut ctx = joint_context(&bundle, &t, &grid, scaffold.cam, &aligned, &cfg).unwrap();
    let iters = cfg.schedule.stage3_iters;
    run_stage3(&state, &mut ctx, &cfg.weights, &cfg.schedule, true).unwrap();
    let grid_secs = start.elapsed().as_secs_f64();

    // the brute-force loop is timed over a few iterations and extrapolated
    let brute = BruteForceScene::new(&scaffold.points, 1.0).unwrap();
    let mut ctx = joint_context(&bundle, &t, &brute, scaffold.cam, &aligned, &cfg).unwrap();
    let sample = 2;
    let schedule = hsi_core::optim::Schedule { stage3_iters: sample, ..cfg.schedule };
    let start = Instant::now();
    run_stage3(&state, &mut ctx, &cfg.weights, &schedule, true).unwrap();
    // the loop evaluates once per iteration plus once after the last
    let per_eval = start.elapsed().as_secs_f64() / (sample + 1) as f64;
    let brute_secs = per_eval * (iters + 1) as f64;
    let speedup = brute_secs / grid_secs;
    Outcome {
        pass: speedup >= 5.0,
        detail: format!(
            "{} scene pts, {} body verts, {iters} iterations: grid {grid_secs:.1} s (build included) vs brute force ~{brute_secs:.0} s (extrapolated from {sample}); speedup {speedup:.1}x (>= 5x)",
            scaffold.points.len(),
            t.num_vertices()
        ),
    }
}

// ------------------------------------------------------------ determinism

fn determinism_check() -> Outcome {
    let (bundle, _) = synth_fixture(FixtureKind::Standing, SEED);
    let root = tempfile::tempdir().unwrap();
    let input = root.path().join("bundle");
    save_bundle(&bundle, &input).unwrap();
    let t = fixture_template();
    let cfg = PipelineConfig { seed: SEED, ..PipelineConfig::default() };
    let mut snapshots = Vec::new();
    for k in 0..3 {
        let b = load_bundle(&input).unwrap();
        let out = run_pipeline(&b, &t, &cfg).unwrap();
        let dir = root.path().join(format!("out{k}"));
        write_outputs(&dir, &out, &t, &cfg).unwrap();
        snapshots.push(snapshot_dir(&dir).unwrap());
    }
    let files = snapshots[0].len();
    let bytes: usize = snapshots[0].iter().map(|(_, b)| b.len()).sum();
    let same = snapshots.windows(2).all(|w| w[0] == w[1]);
    Outcome { pass: same && files > 0, detail: format!("3 runs, {files} files, {bytes} bytes each, identical: {same}") }
}

fn main() {
    println!("acceptance report (fixture seed {SEED})");
    report("gradient correctness", gradient_check);
    report("oracle equivalence", oracle_check);
    report("estimator recovery", estimator_check);

    let (standing_bundle, standing_gt) = synth_fixture(FixtureKind::Standing, SEED);
    let (_, standing) = run_fixture(&standing_bundle, &standing_gt, &PipelineConfig::default());
    let (seated_bundle, seated_gt) = synth_fixture(FixtureKind::Seated, SEED);
    let (_, seated) = run_fixture(&seated_bundle, &seated_gt, &PipelineConfig::default());
    report("end-to-end synthetic recovery", || end_to_end_check(&seated, &standing));
    report("ablation ordering", ablation_check);
    report("performance", performance_check);
    report("determinism", determinism_check);
    report("static-contact robustness", || robustness_check(&seated_bundle, &seated_gt, &seated));
}
