//! File formats, input bundles and on-disk layouts.

mod bundle;
mod manifest;
mod outputs;
pub mod ply;
pub mod raster;

pub use bundle::{InputBundle, PersonInput};
pub use manifest::{
    load_bundle, load_bundle_template, read_manifest, save_bundle, save_bundle_with_template, snapshot_dir, Manifest,
    PersonEntry, MANIFEST,
};
pub use outputs::{
    apply_seed_override, config_to_json, contacts_file, load_config, load_ground_truth, mesh_file, params_file,
    parse_config, read_contacts, read_log, read_params, save_ground_truth, scene_ply, write_outputs, ContactFile,
    GroundTruthFile, RunLog, GT_FILE, LOG_FILE, SCENE_FILE, SEED_ENV,
};
pub use ply::Ply;

use std::path::Path;

use crate::error::{Error, Result};

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = parent.join(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
