//! Directory bundles described by `manifest.json`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::raster::{decode_depth, decode_pgm, decode_point_map, encode_depth, encode_pgm, encode_point_map};
use super::outputs::json_bytes;
use super::{write_atomic, InputBundle, PersonInput};
use crate::body::{load_template, save_template, BodyParams, BodyTemplate, ContactVertexSet};
use crate::error::{Error, Result};
use crate::geometry::CameraIntrinsics;
use crate::objective::Keypoints2D;

pub const MANIFEST: &str = "manifest.json";

/// File names are relative to the bundle directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub intrinsics: Option<CameraIntrinsics>,
    pub scene_depth: Option<String>,
    pub scene_relpoints: Option<String>,
    pub full_relpoints: Option<String>,
    #[serde(default)]
    pub floor_mask: Option<String>,
    /// `(keypoint id, joint index)` pairs.
    #[serde(default)]
    pub keypoint_map: Option<Vec<(usize, usize)>>,
    /// Body template JSON; the built-in fixture humanoid when absent.
    #[serde(default)]
    pub template: Option<String>,
    #[serde(default)]
    pub people: Vec<PersonEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonEntry {
    pub mask: Option<String>,
    pub keypoints: Option<String>,
    pub init_params: Option<String>,
    pub contacts: Option<String>,
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingComponent(format!("{}", path.display())),
        _ => Error::io(&path, e),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::parse(MANIFEST, e))
}

/// Loads one component, recording the failure instead of returning it.
struct Loader<'a> {
    dir: &'a Path,
    errors: Vec<Error>,
}

impl Loader<'_> {
    fn load<T>(&mut self, name: &str, file: Option<&String>, decode: impl FnOnce(&[u8]) -> Result<T>) -> Option<T> {
        let Some(file) = file else {
            self.errors.push(Error::MissingComponent(name.to_string()));
            return None;
        };
        let path = self.dir.join(file);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                self.errors.push(Error::MissingComponent(format!("{name} ({})", path.display())));
                return None;
            }
            Err(e) => {
                self.errors.push(Error::io(&path, e));
                return None;
            }
        };
        match decode(&bytes) {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(match e {
                    Error::Parse { detail, .. } => Error::parse(format!("{name} ({file})"), detail),
                    other => Error::parse(format!("{name} ({file})"), other),
                });
                None
            }
        }
    }
}

fn json<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| Error::parse("json", e))
}

fn flatten(errors: Vec<Error>) -> Vec<Error> {
    errors
        .into_iter()
        .flat_map(|e| match e {
            Error::Validation(inner) => inner,
            other => vec![other],
        })
        .collect()
}

/// Reads and validates a bundle, reporting every problem found.
pub fn load_bundle(dir: impl AsRef<Path>) -> Result<InputBundle> {
    let dir = dir.as_ref();
    let manifest = read_manifest(dir)?;
    let mut ld = Loader { dir, errors: Vec::new() };
    let scene_depth = ld.load("scene_depth", manifest.scene_depth.as_ref(), decode_depth);
    let scene_relpoints = ld.load("scene_relpoints", manifest.scene_relpoints.as_ref(), decode_point_map);
    let full_relpoints = ld.load("full_relpoints", manifest.full_relpoints.as_ref(), decode_point_map);
    let floor_mask = manifest.floor_mask.as_ref().and_then(|f| ld.load("floor_mask", Some(f), decode_pgm));
    if manifest.intrinsics.is_none() {
        ld.errors.push(Error::MissingComponent("intrinsics".into()));
    }
    if manifest.people.is_empty() {
        ld.errors.push(Error::MissingComponent("people".into()));
    }
    let mut people = Vec::with_capacity(manifest.people.len());
    for (i, p) in manifest.people.iter().enumerate() {
        let mask = ld.load(&format!("people[{i}].mask"), p.mask.as_ref(), decode_pgm);
        let keypoints = ld.load(&format!("people[{i}].keypoints"), p.keypoints.as_ref(), json::<Keypoints2D>);
        let init_params = ld.load(&format!("people[{i}].init_params"), p.init_params.as_ref(), json::<BodyParams>);
        let contacts = ld.load(&format!("people[{i}].contacts"), p.contacts.as_ref(), json::<ContactVertexSet>);
        if let (Some(mask), Some(keypoints), Some(init_params), Some(contacts)) = (mask, keypoints, init_params, contacts) {
            people.push(PersonInput { mask, keypoints, init_params, contacts });
        }
    }
    let mut errors = ld.errors;
    if let (Some(scene_depth), Some(scene_relpoints), Some(full_relpoints), Some(intrinsics_hint), true) = (
        scene_depth,
        scene_relpoints,
        full_relpoints,
        manifest.intrinsics,
        errors.is_empty(),
    ) {
        let bundle = InputBundle {
            scene_depth,
            scene_relpoints,
            full_relpoints,
            floor_mask,
            intrinsics_hint,
            people,
            keypoint_map: manifest.keypoint_map,
        };
        match bundle.validate() {
            Ok(()) => return Ok(bundle),
            Err(e) => errors.push(e),
        }
    }
    let mut errors = flatten(errors);
    Err(if errors.len() == 1 { errors.pop().unwrap() } else { Error::Validation(errors) })
}

/// Template named by the bundle's manifest, if any.
pub fn load_bundle_template(dir: impl AsRef<Path>) -> Result<Option<BodyTemplate>> {
    let dir = dir.as_ref();
    match read_manifest(dir)?.template {
        Some(file) => load_template(dir.join(file)).map(Some),
        None => Ok(None),
    }
}

/// Writes a bundle with canonical file names. Rasters are stored as float32,
/// so loading a saved bundle and saving it again reproduces every byte.
pub fn save_bundle(bundle: &InputBundle, dir: impl AsRef<Path>) -> Result<()> {
    save_bundle_with_template(bundle, None, dir)
}

pub fn save_bundle_with_template(bundle: &InputBundle, template: Option<&BodyTemplate>, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let put = |name: &str, bytes: &[u8]| write_atomic(&dir.join(name), bytes);
    put("scene_depth.rast", &encode_depth(&bundle.scene_depth))?;
    put("scene_relpoints.rast", &encode_point_map(&bundle.scene_relpoints))?;
    put("full_relpoints.rast", &encode_point_map(&bundle.full_relpoints))?;
    if let Some(m) = &bundle.floor_mask {
        put("floor_mask.pgm", &encode_pgm(m))?;
    }
    let mut people = Vec::with_capacity(bundle.people.len());
    for (i, p) in bundle.people.iter().enumerate() {
        let entry = PersonEntry {
            mask: Some(format!("person_{i}_mask.pgm")),
            keypoints: Some(format!("person_{i}_keypoints.json")),
            init_params: Some(format!("person_{i}_init_params.json")),
            contacts: Some(format!("person_{i}_contacts.json")),
        };
        put(entry.mask.as_ref().unwrap(), &encode_pgm(&p.mask))?;
        put(entry.keypoints.as_ref().unwrap(), &json_bytes(&p.keypoints))?;
        put(entry.init_params.as_ref().unwrap(), &json_bytes(&p.init_params))?;
        put(entry.contacts.as_ref().unwrap(), &json_bytes(&p.contacts))?;
        people.push(entry);
    }
    let template_file = match template {
        Some(t) => {
            save_template(t, dir.join("template.json"))?;
            Some("template.json".to_string())
        }
        None => None,
    };
    let manifest = Manifest {
        intrinsics: Some(bundle.intrinsics_hint),
        scene_depth: Some("scene_depth.rast".into()),
        scene_relpoints: Some("scene_relpoints.rast".into()),
        full_relpoints: Some("full_relpoints.rast".into()),
        floor_mask: bundle.floor_mask.as_ref().map(|_| "floor_mask.pgm".into()),
        keypoint_map: bundle.keypoint_map.clone(),
        template: template_file,
        people,
    };
    put(MANIFEST, &json_bytes(&manifest))
}

/// Every regular file in `dir`, sorted, with its contents.
pub fn snapshot_dir(dir: impl AsRef<Path>) -> Result<Vec<(PathBuf, Vec<u8>)>> {
    let dir = dir.as_ref();
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_file() {
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            out.push((PathBuf::from(entry.file_name()), bytes));
        }
    }
    out.sort();
    Ok(out)
}
