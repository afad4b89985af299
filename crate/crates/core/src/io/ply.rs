//! ASCII PLY for point clouds and triangle meshes.
//!
//! Coordinates are written as doubles using the shortest representation that
//! parses back to the same value, so write-read-write is byte-stable. A point
//! without a normal is written with `NaN` normal components.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Vec3};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ply {
    pub cloud: PointCloud,
    pub faces: Vec<[usize; 3]>,
}

impl Ply {
    pub fn points(cloud: PointCloud) -> Self {
        Self { cloud, faces: Vec::new() }
    }

    pub fn mesh(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Self {
        Self { cloud: PointCloud::new(vertices), faces }
    }

    pub fn encode(&self) -> String {
        let normals = self.cloud.has_normals();
        let mut s = String::new();
        s.push_str("ply\nformat ascii 1.0\n");
        let _ = writeln!(s, "element vertex {}", self.cloud.len());
        for name in ["x", "y", "z"] {
            let _ = writeln!(s, "property double {name}");
        }
        if normals {
            for name in ["nx", "ny", "nz"] {
                let _ = writeln!(s, "property double {name}");
            }
        }
        if !self.faces.is_empty() {
            let _ = writeln!(s, "element face {}", self.faces.len());
            s.push_str("property list uchar int vertex_indices\n");
        }
        s.push_str("end_header\n");
        for (i, p) in self.cloud.points.iter().enumerate() {
            let _ = write!(s, "{} {} {}", p.x, p.y, p.z);
            if normals {
                let n = self.cloud.normals[i].unwrap_or(Vec3::repeat(f64::NAN));
                let _ = write!(s, " {} {} {}", n.x, n.y, n.z);
            }
            s.push('\n');
        }
        for f in &self.faces {
            let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
        }
        s
    }

    pub fn decode(text: &str) -> Result<Self> {
        let err = |detail: String| Error::parse("ply", detail);
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("ply") {
            return Err(err("missing `ply` magic".into()));
        }
        let mut vertex_count = None;
        let mut face_count = 0;
        let mut props: Vec<String> = Vec::new();
        let mut in_vertex = false;
        loop {
            let line = lines.next().ok_or_else(|| err("header has no end_header".into()))?.trim();
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                ["end_header"] => break,
                ["format", "ascii", _] => {}
                ["format", other, ..] => return Err(err(format!("unsupported format {other}"))),
                ["comment", ..] | ["obj_info", ..] => {}
                ["element", "vertex", n] => {
                    vertex_count = Some(n.parse::<usize>().map_err(|e| err(e.to_string()))?);
                    in_vertex = true;
                }
                ["element", "face", n] => {
                    face_count = n.parse::<usize>().map_err(|e| err(e.to_string()))?;
                    in_vertex = false;
                }
                ["element", other, _] => return Err(err(format!("unsupported element {other}"))),
                ["property", "list", ..] if !in_vertex => {}
                ["property", _, name] if in_vertex => props.push(name.to_string()),
                _ => return Err(err(format!("unexpected header line `{line}`"))),
            }
        }
        let n = vertex_count.ok_or_else(|| err("no vertex element".into()))?;
        let col = |name: &str| props.iter().position(|p| p == name);
        let xyz = [col("x"), col("y"), col("z")];
        let nxyz = [col("nx"), col("ny"), col("nz")];
        let [Some(ix), Some(iy), Some(iz)] = xyz else {
            return Err(err("vertex element lacks x, y or z".into()));
        };
        let normal_cols = match nxyz {
            [Some(a), Some(b), Some(c)] => Some([a, b, c]),
            [None, None, None] => None,
            _ => return Err(err("partial normal properties".into())),
        };
        let mut points = Vec::with_capacity(n);
        let mut normals = Vec::new();
        for k in 0..n {
            let line = lines.next().ok_or_else(|| err(format!("expected {n} vertices, found {k}")))?;
            let vals = line
                .split_whitespace()
                .map(|w| w.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| err(format!("vertex {k}: {e}")))?;
            if vals.len() != props.len() {
                return Err(err(format!("vertex {k} has {} values, expected {}", vals.len(), props.len())));
            }
            points.push(Vec3::new(vals[ix], vals[iy], vals[iz]));
            if let Some([a, b, c]) = normal_cols {
                let nrm = Vec3::new(vals[a], vals[b], vals[c]);
                normals.push(nrm.iter().all(|v| v.is_finite()).then_some(nrm));
            }
        }
        let mut faces = Vec::with_capacity(face_count);
        for k in 0..face_count {
            let line = lines.next().ok_or_else(|| err(format!("expected {face_count} faces, found {k}")))?;
            let idx = line
                .split_whitespace()
                .map(|w| w.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| err(format!("face {k}: {e}")))?;
            match idx.as_slice() {
                [3, a, b, c] if *a < n && *b < n && *c < n => faces.push([*a, *b, *c]),
                _ => return Err(err(format!("face {k} is not a valid triangle"))),
            }
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(err("trailing data after elements".into()));
        }
        // `validate` would reject normals that drifted from unit length
        // through a foreign writer; keep them as given.
        Ok(Self { cloud: PointCloud { points, normals }, faces })
    }
}
