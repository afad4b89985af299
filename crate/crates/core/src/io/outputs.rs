//! Run configuration, optimisation outputs and ground-truth files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ply::Ply;
use super::write_atomic;
use crate::body::{forward, BodyParams, BodyTemplate};
use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::optim::{PipelineConfig, PipelineOutput};
use crate::scene::Plane;
use crate::synth::{FixtureKind, GroundTruth};

pub const SEED_ENV: &str = "PHYSIC_SEED";
pub const LOG_FILE: &str = "log.json";
pub const SCENE_FILE: &str = "scene.ply";
pub const GT_FILE: &str = "ground_truth.json";

pub(crate) fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s.into_bytes()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))
}

/// Parses a config document; absent fields take their defaults.
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let cfg: PipelineConfig = serde_json::from_str(text).map_err(|e| Error::parse("config", e))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Replaces the seed with `value` when one is given.
pub fn apply_seed_override(cfg: &mut PipelineConfig, value: Option<&str>) -> Result<()> {
    if let Some(v) = value {
        cfg.seed = v.trim().parse().map_err(|e| Error::parse(SEED_ENV, format!("`{v}`: {e}")))?;
    }
    Ok(())
}

/// Defaults when `path` is `None`, then the seed environment override.
pub fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            parse_config(&text)?
        }
        None => PipelineConfig::default(),
    };
    apply_seed_override(&mut cfg, std::env::var(SEED_ENV).ok().as_deref())?;
    Ok(cfg)
}

pub fn config_to_json(cfg: &PipelineConfig) -> String {
    String::from_utf8(json_bytes(cfg)).expect("utf-8")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactFile {
    pub num_vertices: usize,
    pub indices: Vec<usize>,
}

impl ContactFile {
    pub fn labels(&self) -> Vec<bool> {
        let mut l = vec![false; self.num_vertices];
        for &i in &self.indices {
            if let Some(x) = l.get_mut(i) {
                *x = true;
            }
        }
        l
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub seed: u64,
    pub people: usize,
    pub scene_scale: f64,
    pub scene_points: usize,
    pub floor: Option<Plane>,
    pub aborted: bool,
    /// Joint-stage total loss per iteration.
    pub losses: Vec<f64>,
}

pub fn params_file(i: usize) -> String {
    format!("person_{i}_params.json")
}

pub fn contacts_file(i: usize) -> String {
    format!("person_{i}_contacts.json")
}

pub fn mesh_file(i: usize) -> String {
    format!("person_{i}_mesh.ply")
}

/// Scene at the optimised scale with its normals, as written to `scene.ply`.
pub fn scene_ply(out: &PipelineOutput) -> Ply {
    Ply::points(PointCloud { points: out.scaled_scene(), normals: out.scaffold.points.normals.clone() })
}

pub fn write_outputs(dir: impl AsRef<Path>, out: &PipelineOutput, template: &BodyTemplate, cfg: &PipelineConfig) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let put = |name: &str, bytes: &[u8]| write_atomic(&dir.join(name), bytes);
    put(SCENE_FILE, scene_ply(out).encode().as_bytes())?;
    for (i, (p, c)) in out.state.humans.iter().zip(&out.contacts).enumerate() {
        put(&params_file(i), &json_bytes(p))?;
        let contacts = ContactFile { num_vertices: c.in_contact.len(), indices: c.indices() };
        put(&contacts_file(i), &json_bytes(&contacts))?;
        let mesh = Ply::mesh(forward(template, p)?.vertices, template.faces.clone());
        put(&mesh_file(i), mesh.encode().as_bytes())?;
    }
    let log = RunLog {
        seed: cfg.seed,
        people: out.state.humans.len(),
        scene_scale: out.state.scale,
        scene_points: out.scaffold.points.len(),
        floor: out.scaffold.floor,
        aborted: out.aborted,
        losses: out.losses.clone(),
    };
    put(LOG_FILE, &json_bytes(&log))
}

pub fn read_log(dir: impl AsRef<Path>) -> Result<RunLog> {
    read_json(&dir.as_ref().join(LOG_FILE))
}

pub fn read_params(dir: impl AsRef<Path>, person: usize) -> Result<BodyParams> {
    read_json(&dir.as_ref().join(params_file(person)))
}

pub fn read_contacts(dir: impl AsRef<Path>, person: usize) -> Result<ContactFile> {
    read_json(&dir.as_ref().join(contacts_file(person)))
}

/// What `metrics` compares against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFile {
    pub kind: FixtureKind,
    pub seed: u64,
    pub params: Vec<BodyParams>,
    pub contacts: Vec<ContactFile>,
    pub floor: Plane,
}

impl From<&GroundTruth> for GroundTruthFile {
    fn from(gt: &GroundTruth) -> Self {
        Self {
            kind: gt.kind,
            seed: gt.seed,
            params: gt.params.clone(),
            contacts: (0..gt.contacts.len())
                .map(|i| ContactFile { num_vertices: gt.contacts[i].len(), indices: gt.contact_indices(i) })
                .collect(),
            floor: gt.floor,
        }
    }
}

pub fn save_ground_truth(gt: &GroundTruthFile, dir: impl AsRef<Path>) -> Result<()> {
    write_atomic(&dir.as_ref().join(GT_FILE), &json_bytes(gt))
}

pub fn load_ground_truth(dir: impl AsRef<Path>) -> Result<GroundTruthFile> {
    let path = dir.as_ref().join(GT_FILE);
    if !path.exists() {
        return Err(Error::MissingComponent(format!("ground truth ({})", path.display())));
    }
    read_json(&path)
}
