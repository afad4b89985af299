//! Single-file JSON body template with base64 little-endian float32 arrays.

use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{BodyTemplate, SparseRow};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::io::write_atomic;

const FORMAT_TAG: &str = "hsi-body-template/1";

#[derive(Serialize, Deserialize)]
struct TemplateFile {
    format: String,
    num_vertices: usize,
    num_joints: usize,
    num_betas: usize,
    /// `N x 3`
    vertices: String,
    /// `J x 3`
    joints: String,
    /// Dense `N x J`.
    skinning: String,
    /// `N x 3 x S`
    shape_dirs: String,
    /// Dense `J x N`.
    joint_regressor: String,
    faces: Vec<[usize; 3]>,
    parents: Vec<i64>,
    part_labels: Vec<usize>,
    part_names: Vec<String>,
    hand_joints: Vec<usize>,
    keypoint_map: Vec<[usize; 2]>,
}

fn encode(values: impl Iterator<Item = f64>) -> String {
    let bytes: Vec<u8> = values.flat_map(|v| (v as f32).to_le_bytes()).collect();
    B64.encode(bytes)
}

fn decode(field: &str, text: &str, expected: usize) -> Result<Vec<f64>> {
    let bytes = B64.decode(text).map_err(|e| Error::parse(format!("template.{field}"), e))?;
    if bytes.len() != expected * 4 {
        return Err(Error::invariant(
            field,
            format!("expected {expected} float32 values, found {} bytes", bytes.len()),
        ));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect())
}

fn dense(rows: &[SparseRow], cols: usize) -> impl Iterator<Item = f64> + '_ {
    rows.iter().flat_map(move |row| {
        let mut out = vec![0.0; cols];
        for &(c, w) in row {
            out[c] = w;
        }
        out
    })
}

fn sparse(values: &[f64], cols: usize) -> Vec<SparseRow> {
    values
        .chunks_exact(cols)
        .map(|r| r.iter().enumerate().filter(|(_, w)| **w != 0.0).map(|(c, w)| (c, *w)).collect())
        .collect()
}

fn to_vec3(values: &[f64]) -> Vec<Vec3> {
    values.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect()
}

pub fn template_to_json(t: &BodyTemplate) -> String {
    let file = TemplateFile {
        format: FORMAT_TAG.to_string(),
        num_vertices: t.num_vertices(),
        num_joints: t.num_joints(),
        num_betas: t.num_betas,
        vertices: encode(t.vertices.iter().flat_map(|v| [v.x, v.y, v.z])),
        joints: encode(t.joints.iter().flat_map(|v| [v.x, v.y, v.z])),
        skinning: encode(dense(&t.skinning, t.num_joints())),
        shape_dirs: encode(t.shape_dirs.iter().copied()),
        joint_regressor: encode(dense(&t.joint_regressor, t.num_vertices())),
        faces: t.faces.clone(),
        parents: t.parents.iter().map(|p| p.map_or(-1, |p| p as i64)).collect(),
        part_labels: t.part_labels.clone(),
        part_names: t.part_names.clone(),
        hand_joints: t.hand_joints.clone(),
        keypoint_map: t.keypoint_map.iter().map(|&(k, j)| [k, j]).collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("template serializes");
    text.push('\n');
    text
}

pub fn template_from_json(text: &str) -> Result<BodyTemplate> {
    let file: TemplateFile = serde_json::from_str(text).map_err(|e| Error::parse("body template", e))?;
    if file.format != FORMAT_TAG {
        return Err(Error::parse("body template", format!("unknown format tag `{}`", file.format)));
    }
    let (n, j, s) = (file.num_vertices, file.num_joints, file.num_betas);
    let parents = file
        .parents
        .iter()
        .map(|&p| match p {
            -1 => Ok(None),
            p if p >= 0 => Ok(Some(p as usize)),
            p => Err(Error::invariant("parents", format!("invalid parent {p}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let template = BodyTemplate {
        vertices: to_vec3(&decode("vertices", &file.vertices, n * 3)?),
        faces: file.faces,
        joints: to_vec3(&decode("joints", &file.joints, j * 3)?),
        parents,
        skinning: sparse(&decode("skinning", &file.skinning, n * j)?, j.max(1)),
        shape_dirs: decode("shape_dirs", &file.shape_dirs, n * 3 * s)?,
        num_betas: s,
        joint_regressor: sparse(&decode("joint_regressor", &file.joint_regressor, j * n)?, n.max(1)),
        part_labels: file.part_labels,
        part_names: file.part_names,
        hand_joints: file.hand_joints,
        keypoint_map: file.keypoint_map.iter().map(|p| (p[0], p[1])).collect(),
    };
    template.validate()?;
    Ok(template)
}

pub fn load_template(path: impl AsRef<Path>) -> Result<BodyTemplate> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    template_from_json(&text)
}

pub fn save_template(template: &BodyTemplate, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), template_to_json(template).as_bytes())
}
