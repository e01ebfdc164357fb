// Evaluate a bundled box model and write it as binary STL.

use cadfidelity::{fixtures, geom, scad, stl};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let ast = scad::parse_scad(fixtures::MODEL_D)?;
    let solid = scad::evaluate(&ast)?;
    let mesh = scad::extract_boundary_mesh(&solid)?;
    let bytes = stl::write_stl(&stl::StlDocument::from_mesh(&mesh, "model_d"), stl::StlFormat::Binary);
    let path = std::env::temp_dir().join("cadfidelity_model_d.stl");
    std::fs::write(&path, &bytes)?;

    let back = stl::parse_stl(&std::fs::read(&path)?)?;
    let welded = geom::weld_vertices(&back.to_soup(), geom::DEFAULT_WELD_TOLERANCE);
    println!(
        "{}: {} facets, {} bytes, volume {:.3} mm^3 (exact {})",
        path.display(),
        back.facets.len(),
        bytes.len(),
        geom::mesh_volume(&welded)?,
        scad::exact_volume(&solid)
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
