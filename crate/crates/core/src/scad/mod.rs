//! The box-only OpenSCAD subset: parsing, exact evaluation and boundary meshing.

mod csg;
mod parser;
mod triangulate;

pub use csg::{
    evaluate, exact_area, exact_volume, extract_boundary_mesh, BoxOp, CsgError, CsgNode, CsgSolid,
    SignedBox, SlabGrid,
};
pub use parser::{parse_scad, Location, ScadAst, ScadError, ScadNode};
