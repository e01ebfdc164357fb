// Complexity of a cube and of the ground-truth bracket, with custom weights.

use cadfidelity::complexity::{self, ComplexityWeights};
use cadfidelity::report::{self, EvalOptions};
use cadfidelity::{Aabb, TriangleMesh, Vec3};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cube = TriangleMesh::cuboid(&Aabb::from_corners(Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0)));
    let b = complexity::analyze(&cube, ComplexityWeights::default(), None)?;
    println!("cube: C_f={} C_s={} C_t={} C={}", b.feature, b.surface, b.topological, b.composite);
    let fine = complexity::analyze(&cube.subdivided(), ComplexityWeights::default(), None)?;
    println!("subdivided cube: C_f={} C={}", fine.feature, fine.composite);

    let truth = report::load_fixture("model_d.scad").ok_or("missing fixture")?;
    let options = EvalOptions {
        complexity_weights: ComplexityWeights {
            feature: 2.0,
            surface: 100.0,
            topological: 1.0,
        },
        ..EvalOptions::default()
    };
    print!("{}", report::complexity_report(&truth, &options)?.to_markdown());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
