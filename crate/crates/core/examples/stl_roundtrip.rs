// Write a mesh as ASCII and binary STL, read both back and weld them.

use cadfidelity::stl::{self, StlDocument, StlFormat};
use cadfidelity::{geom, Aabb, TriangleMesh, Vec3};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = TriangleMesh::cuboid(&Aabb::from_corners(Vec3::new(-1.0, 0.0, 2.0), Vec3::new(3.0, 0.5, 4.0)));
    let doc = StlDocument::from_mesh(&mesh, "slab");
    for format in [StlFormat::Ascii, StlFormat::Binary] {
        let bytes = stl::write_stl(&doc, format);
        let back = stl::parse_stl(&bytes)?;
        let welded = geom::weld_vertices(&back.to_soup(), geom::DEFAULT_WELD_TOLERANCE);
        println!(
            "{format:?}: {} bytes, {} facets, name {:?}, X={} volume={}",
            bytes.len(),
            back.facets.len(),
            back.name(),
            welded.vertices.len(),
            geom::mesh_volume(&welded)?
        );
        assert_eq!(back.facets, doc.facets);
    }
    match stl::parse_stl(&[0u8; 100]) {
        Err(e) => println!("100 zero bytes: {e}"),
        Ok(d) => println!("100 zero bytes parsed as {} facets", d.facets.len()),
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
