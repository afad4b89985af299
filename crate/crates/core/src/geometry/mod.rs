//! Geometric primitives shared by every stage: rasters, point clouds,
//! pinhole projection, grid normals, Chamfer distance, rigid alignment and
//! the robust loss family.

mod camera;
mod chamfer;
mod cloud;
pub mod kdtree;
mod normals;
mod procrustes;
mod raster;
mod robust;

pub use camera::CameraIntrinsics;
pub use chamfer::{chamfer, chamfer_brute_force};
pub use cloud::{Aabb, PointCloud};
pub use kdtree::{nearest_brute_force, KdTree};
pub use normals::estimate_grid_normals;
pub use procrustes::{procrustes_align, RigidAlignment};
pub use raster::{DepthRaster, Mask, PointMap};
pub use robust::RobustLoss;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Vec2 = nalgebra::Vector2<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
