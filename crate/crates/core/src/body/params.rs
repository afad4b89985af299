use serde::{Deserialize, Serialize};

use super::BodyTemplate;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Shape, pose and translation of one body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyParams {
    pub beta: Vec<f64>,
    /// Axis-angle per body (non-hand) joint, in joint index order. Radians.
    pub theta_body: Vec<[f64; 3]>,
    /// Axis-angle per hand joint, in the template's hand-joint order. Radians.
    pub theta_hand: Vec<[f64; 3]>,
    /// Meters.
    pub trans: [f64; 3],
}

/// Offsets of each parameter group inside the flat parameter vector
/// `[beta | theta_body | theta_hand | trans]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamLayout {
    pub num_betas: usize,
    pub num_body: usize,
    pub num_hand: usize,
}

impl ParamLayout {
    pub fn of(template: &BodyTemplate) -> Self {
        Self {
            num_betas: template.num_betas,
            num_body: template.num_joints() - template.hand_joints.len(),
            num_hand: template.hand_joints.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.num_betas + 3 * (self.num_body + self.num_hand) + 3
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn beta(&self) -> std::ops::Range<usize> {
        0..self.num_betas
    }

    pub fn theta_body(&self) -> std::ops::Range<usize> {
        let s = self.num_betas;
        s..s + 3 * self.num_body
    }

    pub fn theta_hand(&self) -> std::ops::Range<usize> {
        let s = self.theta_body().end;
        s..s + 3 * self.num_hand
    }

    pub fn trans(&self) -> std::ops::Range<usize> {
        let s = self.theta_hand().end;
        s..s + 3
    }
}

impl BodyParams {
    pub fn zeros(template: &BodyTemplate) -> Self {
        let layout = ParamLayout::of(template);
        Self {
            beta: vec![0.0; layout.num_betas],
            theta_body: vec![[0.0; 3]; layout.num_body],
            theta_hand: vec![[0.0; 3]; layout.num_hand],
            trans: [0.0; 3],
        }
    }

    pub fn trans_vec(&self) -> Vec3 {
        Vec3::from(self.trans)
    }

    pub fn check(&self, template: &BodyTemplate) -> Result<()> {
        let layout = ParamLayout::of(template);
        if self.beta.len() != layout.num_betas
            || self.theta_body.len() != layout.num_body
            || self.theta_hand.len() != layout.num_hand
        {
            return Err(Error::DimensionMismatch(format!(
                "params have {} betas, {} body and {} hand rotations; template expects {}, {} and {}",
                self.beta.len(),
                self.theta_body.len(),
                self.theta_hand.len(),
                layout.num_betas,
                layout.num_body,
                layout.num_hand
            )));
        }
        let finite = self.beta.iter().chain(self.trans.iter()).all(|v| v.is_finite())
            && self.theta_body.iter().chain(&self.theta_hand).flatten().all(|v| v.is_finite());
        if !finite {
            return Err(Error::invariant("params", "non-finite value"));
        }
        Ok(())
    }

    /// Axis-angle rotation of every joint, indexed by joint.
    pub fn joint_rotations(&self, template: &BodyTemplate) -> Vec<Vec3> {
        let mut out = vec![Vec3::zeros(); template.num_joints()];
        for (theta, j) in self.theta_body.iter().zip(template.body_joints()) {
            out[j] = Vec3::from(*theta);
        }
        for (theta, &j) in self.theta_hand.iter().zip(&template.hand_joints) {
            out[j] = Vec3::from(*theta);
        }
        out
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.beta.clone();
        v.extend(self.theta_body.iter().flatten());
        v.extend(self.theta_hand.iter().flatten());
        v.extend(self.trans);
        v
    }

    pub fn from_flat(layout: &ParamLayout, flat: &[f64]) -> Result<Self> {
        if flat.len() != layout.len() {
            return Err(Error::DimensionMismatch(format!(
                "flat parameter vector has {} entries, layout needs {}",
                flat.len(),
                layout.len()
            )));
        }
        let triples = |r: std::ops::Range<usize>| -> Vec<[f64; 3]> {
            flat[r].chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
        };
        let t = &flat[layout.trans()];
        Ok(Self {
            beta: flat[layout.beta()].to_vec(),
            theta_body: triples(layout.theta_body()),
            theta_hand: triples(layout.theta_hand()),
            trans: [t[0], t[1], t[2]],
        })
    }
}
