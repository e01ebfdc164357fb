//! Quantitative evaluation of 3D models against a reference model.
//!
//! The crate measures structural complexity of a single mesh and geometric
//! similarity between a generated mesh and a ground-truth mesh. Inputs are STL
//! files or a box-only OpenSCAD subset, which is evaluated exactly.

pub mod cli;
pub mod complexity;
pub mod fixtures;
pub mod geom;
pub mod registration;
pub mod report;
pub mod scad;
pub mod similarity;
pub mod stl;

pub use geom::{Aabb, PointCloud, Triangle, TriangleMesh, Vec3};
