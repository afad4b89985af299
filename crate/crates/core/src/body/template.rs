use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Sparse row as `(column, weight)` pairs with ascending columns.
pub type SparseRow = Vec<(usize, f64)>;

const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Rest-pose articulated mesh with linear shape space and skinning.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyTemplate {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    pub joints: Vec<Vec3>,
    /// Parent joint per joint; exactly one root with `None`.
    pub parents: Vec<Option<usize>>,
    /// Per-vertex skinning weights over joints.
    pub skinning: Vec<SparseRow>,
    /// Row-major `N x 3 x S` linear shape basis.
    pub shape_dirs: Vec<f64>,
    pub num_betas: usize,
    /// Per-joint weights over vertices.
    pub joint_regressor: Vec<SparseRow>,
    pub part_labels: Vec<usize>,
    pub part_names: Vec<String>,
    /// Joints whose rotations form the hand pose; the rest form the body pose.
    pub hand_joints: Vec<usize>,
    /// `(detector keypoint id, joint index)` pairs.
    pub keypoint_map: Vec<(usize, usize)>,
}

impl BodyTemplate {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_joints(&self) -> usize {
        self.joints.len()
    }

    pub fn num_parts(&self) -> usize {
        self.part_names.len()
    }

    pub fn root(&self) -> usize {
        self.parents.iter().position(|p| p.is_none()).unwrap_or(0)
    }

    /// Non-hand joints in index order.
    pub fn body_joints(&self) -> Vec<usize> {
        (0..self.num_joints()).filter(|j| !self.hand_joints.contains(j)).collect()
    }

    #[inline]
    pub fn shape_dir(&self, vertex: usize, axis: usize) -> &[f64] {
        let s = self.num_betas;
        let start = (vertex * 3 + axis) * s;
        &self.shape_dirs[start..start + s]
    }

    /// Joints ordered so every parent precedes its children.
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.num_joints();
        let mut children = vec![Vec::new(); n];
        for (j, p) in self.parents.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(j);
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![self.root()];
        while let Some(j) = stack.pop() {
            order.push(j);
            stack.extend(children[j].iter().rev());
        }
        order
    }

    /// Rest-pose shape offsets of the joints: `regressor * shape_dirs`, `J x 3 x S`.
    pub fn joint_shape_dirs(&self) -> Vec<f64> {
        let s = self.num_betas;
        let mut out = vec![0.0; self.num_joints() * 3 * s];
        for (j, row) in self.joint_regressor.iter().enumerate() {
            for &(v, w) in row {
                for axis in 0..3 {
                    let dst = &mut out[(j * 3 + axis) * s..(j * 3 + axis + 1) * s];
                    for (d, src) in dst.iter_mut().zip(self.shape_dir(v, axis)) {
                        *d += w * src;
                    }
                }
            }
        }
        out
    }

    /// Regressed joint locations for an arbitrary vertex set.
    pub fn regress_joints(&self, vertices: &[Vec3]) -> Vec<Vec3> {
        self.joint_regressor
            .iter()
            .map(|row| row.iter().map(|&(v, w)| vertices[v] * w).sum())
            .collect()
    }

    pub fn part_index(&self, name: &str) -> Option<usize> {
        self.part_names.iter().position(|p| p == name)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vertices();
        let j = self.num_joints();
        let finite = |v: &Vec3| v.iter().all(|c| c.is_finite());
        if n == 0 || j == 0 {
            return Err(Error::invariant("vertices", "template needs vertices and joints"));
        }
        if !self.vertices.iter().all(finite) {
            return Err(Error::invariant("vertices", "non-finite coordinate"));
        }
        if !self.joints.iter().all(finite) {
            return Err(Error::invariant("joints", "non-finite coordinate"));
        }
        if let Some(f) = self.faces.iter().find(|f| f.iter().any(|&i| i >= n)) {
            return Err(Error::invariant("faces", format!("face {f:?} references a missing vertex")));
        }
        if self.parents.len() != j {
            return Err(Error::invariant("parents", format!("{} parents for {j} joints", self.parents.len())));
        }
        let roots = self.parents.iter().filter(|p| p.is_none()).count();
        if roots != 1 {
            return Err(Error::invariant("parents", format!("expected one root, found {roots}")));
        }
        for start in 0..j {
            let mut cur = start;
            let mut steps = 0;
            while let Some(p) = self.parents[cur] {
                if p >= j {
                    return Err(Error::invariant("parents", format!("joint {cur} has parent {p} out of range")));
                }
                cur = p;
                steps += 1;
                if steps > j {
                    return Err(Error::invariant("parents", format!("cycle through joint {start}")));
                }
            }
        }
        if self.skinning.len() != n {
            return Err(Error::invariant("skinning", format!("{} rows for {n} vertices", self.skinning.len())));
        }
        for (i, row) in self.skinning.iter().enumerate() {
            if row.iter().any(|&(k, w)| k >= j || !w.is_finite()) {
                return Err(Error::invariant("skinning", format!("row {i} has an invalid entry")));
            }
            let sum: f64 = row.iter().map(|e| e.1).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::invariant("skinning", format!("row {i} sums to {sum}")));
            }
        }
        if self.shape_dirs.len() != n * 3 * self.num_betas {
            return Err(Error::invariant(
                "shape_dirs",
                format!("{} values for {n} vertices and {} betas", self.shape_dirs.len(), self.num_betas),
            ));
        }
        if !self.shape_dirs.iter().all(|v| v.is_finite()) {
            return Err(Error::invariant("shape_dirs", "non-finite value"));
        }
        if self.joint_regressor.len() != j {
            return Err(Error::invariant("joint_regressor", format!("{} rows for {j} joints", self.joint_regressor.len())));
        }
        if self.joint_regressor.iter().flatten().any(|&(v, w)| v >= n || !w.is_finite()) {
            return Err(Error::invariant("joint_regressor", "entry references a missing vertex"));
        }
        if self.part_labels.len() != n {
            return Err(Error::invariant("part_labels", format!("{} labels for {n} vertices", self.part_labels.len())));
        }
        if let Some(l) = self.part_labels.iter().find(|&&l| l >= self.part_names.len()) {
            return Err(Error::invariant("part_labels", format!("label {l} has no part name")));
        }
        let mut seen = vec![false; j];
        for &h in &self.hand_joints {
            if h >= j || std::mem::replace(&mut seen[h], true) {
                return Err(Error::invariant("hand_joints", format!("invalid or repeated joint {h}")));
            }
        }
        if let Some(&(k, jt)) = self.keypoint_map.iter().find(|&&(_, jt)| jt >= j) {
            return Err(Error::invariant("keypoint_map", format!("keypoint {k} maps to missing joint {jt}")));
        }
        Ok(())
    }
}
