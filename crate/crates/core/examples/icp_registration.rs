// Recover a known rotation of the ground-truth corner cloud with ICP.

use cadfidelity::registration::{self, IcpOptions, RigidTransform};
use cadfidelity::report;
use cadfidelity::{geom, Vec3};
use nalgebra::{Rotation3, Unit};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let truth = report::load_fixture("model_c.scad").ok_or("missing fixture")?;
    let cloud = geom::corner_point_cloud(&truth.mesh)?;
    let centre = cloud.centroid().ok_or("empty cloud")?;
    let rotation = Rotation3::from_axis_angle(&Unit::new_normalize(Vec3::new(0.2, 1.0, 0.4)), 20f64.to_radians());
    let known = RigidTransform {
        rotation: *rotation.matrix(),
        translation: centre - rotation * centre + Vec3::new(1.5, 0.0, -2.0),
    };
    let moved = known.transform_cloud(&cloud);

    let result = registration::icp_register(&cloud, &moved, &IcpOptions::default())?;
    println!(
        "rmse {:.3e} after {} iterations, recovered angle {:.4} deg (applied 20)",
        result.rmse,
        result.iterations,
        result.transform.rotation_angle().to_degrees()
    );
    println!("history: {:?}", result.rmse_history);

    let frame = registration::pca_frame(&cloud)?;
    println!("principal variances: {:?}", frame.eigenvalues);
    println!(
        "PCA score vs rotated copy: {:.4}",
        registration::pca_alignment_score(&moved, &cloud)?
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
