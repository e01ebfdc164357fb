// Score every bundled model against the ground truth.

use cadfidelity::report::{self, EvalOptions};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let truth = report::load_fixture("model_d.scad").ok_or("missing fixture")?;
    for name in ["model_a.scad", "model_b.scad", "model_c.scad"] {
        let model = report::load_fixture(name).ok_or("missing fixture")?;
        let r = report::compare(&model, &truth, &EvalOptions::default())?;
        let d = &r.display;
        println!(
            "{name}: final={} vol={} surf={} dim={} hausdorff={} icp_rmse={:.4}",
            d["final"], d["volumetric"], d["surface"], d["dimensional"], d["hausdorff"], r.icp.rmse
        );
    }
    let model = report::load_fixture("model_b.scad").ok_or("missing fixture")?;
    print!("{}", report::compare(&model, &truth, &EvalOptions::default())?.to_csv());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
