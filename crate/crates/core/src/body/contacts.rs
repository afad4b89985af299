use serde::{Deserialize, Serialize};

use super::BodyTemplate;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactSource {
    Predicted,
    StaticPreset,
}

/// Vertices expected to touch the scene.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactVertexSet {
    pub indices: Vec<usize>,
    pub source: ContactSource,
}

impl ContactVertexSet {
    pub fn new(mut indices: Vec<usize>, source: ContactSource, num_vertices: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invariant("contacts", "duplicate vertex index"));
        }
        if let Some(&i) = indices.last().filter(|&&i| i >= num_vertices) {
            return Err(Error::invariant("contacts", format!("vertex {i} out of range ({num_vertices} vertices)")));
        }
        Ok(Self { indices, source })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn parts_matching(template: &BodyTemplate, keys: &[&str]) -> Vec<usize> {
    template
        .part_names
        .iter()
        .enumerate()
        .filter(|(_, name)| {
            let name = name.to_ascii_lowercase();
            keys.iter().any(|k| name.contains(k))
        })
        .map(|(i, _)| i)
        .collect()
}

/// Feet, buttocks and back: the body regions that commonly rest on the scene.
///
/// Parts are found by name (`foot`/`feet`, `pelvis`/`hip`, `torso`/`spine`);
/// the back is the torso half behind the torso centroid along +z.
pub fn static_contact_preset(template: &BodyTemplate) -> ContactVertexSet {
    let feet = parts_matching(template, &["foot", "feet"]);
    let bottom = parts_matching(template, &["pelvis", "hip"]);
    let torso = parts_matching(template, &["torso", "spine"]);
    let labels = &template.part_labels;

    let torso_vertices: Vec<usize> = (0..template.num_vertices()).filter(|&i| torso.contains(&labels[i])).collect();
    let torso_center_z = if torso_vertices.is_empty() {
        0.0
    } else {
        torso_vertices.iter().map(|&i| template.vertices[i].z).sum::<f64>() / torso_vertices.len() as f64
    };
    let bottom_center: Vec3 = {
        let idx: Vec<usize> = (0..template.num_vertices()).filter(|&i| bottom.contains(&labels[i])).collect();
        if idx.is_empty() {
            Vec3::zeros()
        } else {
            idx.iter().map(|&i| template.vertices[i]).sum::<Vec3>() / idx.len() as f64
        }
    };

    let indices = (0..template.num_vertices())
        .filter(|&i| {
            let l = labels[i];
            let v = template.vertices[i];
            feet.contains(&l)
                || (bottom.contains(&l) && (v.z < bottom_center.z || v.y < bottom_center.y))
                || (torso.contains(&l) && v.z < torso_center_z)
        })
        .collect();
    ContactVertexSet {
        indices,
        source: ContactSource::StaticPreset,
    }
}
