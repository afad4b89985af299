use crate::body::{BodyParams, ContactVertexSet};
use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, DepthRaster, Mask, PointMap};
use crate::objective::Keypoints2D;

/// Per-person inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonInput {
    pub mask: Mask,
    pub keypoints: Keypoints2D,
    pub init_params: BodyParams,
    pub contacts: ContactVertexSet,
}

/// Everything one fit consumes, pixel-aligned to a common image size.
#[derive(Debug, Clone, PartialEq)]
pub struct InputBundle {
    /// Metric depth of the human-free scene image.
    pub scene_depth: DepthRaster,
    /// Relative point map of the human-free scene image.
    pub scene_relpoints: PointMap,
    /// Relative point map of the original image, people included.
    pub full_relpoints: PointMap,
    pub floor_mask: Option<Mask>,
    /// Intrinsics that produced `scene_depth`.
    pub intrinsics_hint: CameraIntrinsics,
    pub people: Vec<PersonInput>,
    /// Overrides the template's keypoint map when present.
    pub keypoint_map: Option<Vec<(usize, usize)>>,
}

impl InputBundle {
    pub fn size(&self) -> (usize, usize) {
        (self.scene_depth.width(), self.scene_depth.height())
    }

    /// Collects every consistency failure rather than stopping at the first.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        let size = self.size();
        let mut check = |name: &str, w: usize, h: usize| {
            if (w, h) != size {
                errors.push(Error::AlignmentMismatch(format!(
                    "{name} is {w}x{h} but scene depth is {}x{}",
                    size.0, size.1
                )));
            }
        };
        check("scene relative points", self.scene_relpoints.width(), self.scene_relpoints.height());
        check("full relative points", self.full_relpoints.width(), self.full_relpoints.height());
        check("intrinsics", self.intrinsics_hint.width, self.intrinsics_hint.height);
        if let Some(m) = &self.floor_mask {
            check("floor mask", m.width(), m.height());
        }
        for (i, p) in self.people.iter().enumerate() {
            check(&format!("mask of person {i}"), p.mask.width(), p.mask.height());
        }
        if let Err(e) = self.intrinsics_hint.validate() {
            errors.push(e);
        }
        if self.people.is_empty() {
            errors.push(Error::MissingComponent("people".into()));
        }
        for (i, p) in self.people.iter().enumerate() {
            if let Err(e) = p.keypoints.validate() {
                errors.push(Error::invariant(format!("people[{i}].keypoints"), e.to_string()));
            }
        }
        match errors.len() {
            0 => Ok(()),
            1 => Err(errors.pop().unwrap()),
            _ => Err(Error::Validation(errors)),
        }
    }

    /// Union of all person masks.
    pub fn human_union(&self) -> Mask {
        let (w, h) = self.size();
        let mut bits = vec![false; w * h];
        for p in &self.people {
            for (b, &m) in bits.iter_mut().zip(p.mask.bits()) {
                *b |= m;
            }
        }
        Mask::from_bits(w, h, bits).expect("sizes match")
    }
}
