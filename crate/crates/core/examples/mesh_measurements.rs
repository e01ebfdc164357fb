// Exact measures of each bundled model and of its boundary mesh.

use cadfidelity::{fixtures, geom, scad};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for (name, text) in fixtures::ALL {
        let solid = scad::evaluate(&scad::parse_scad(text)?)?;
        let mesh = scad::extract_boundary_mesh(&solid)?;
        let counts = geom::euler_counts(&mesh);
        let ext = geom::bounding_box(&mesh)?.extents();
        println!(
            "{name}: V={} A={} extents=({}, {}, {}) X={} E={} F={} chi={} watertight={}",
            scad::exact_volume(&solid),
            scad::exact_area(&solid),
            ext.x,
            ext.y,
            ext.z,
            counts.vertices,
            counts.edges,
            counts.faces,
            counts.characteristic(),
            geom::check_watertight(&mesh).is_ok()
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
