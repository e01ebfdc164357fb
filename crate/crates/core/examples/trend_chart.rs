// Trend of the four bundled models against the ground truth, as CSV and SVG.

use cadfidelity::report::{self, EvalOptions, TrendEntry, TrendSeries};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let truth = report::load_fixture("model_d.scad").ok_or("missing fixture")?;
    let mut entries = Vec::new();
    for (label, name) in [
        ("3 Views", "model_a.scad"),
        ("Isometric", "model_b.scad"),
        ("Structure", "model_c.scad"),
        ("Code", "model_d.scad"),
    ] {
        let model = report::load_fixture(name).ok_or("missing fixture")?;
        entries.push(TrendEntry {
            label: label.into(),
            path: name.into(),
            similarity: report::compare(&model, &truth, &EvalOptions::default())?.similarity,
        });
    }
    let series = TrendSeries::new("model_d.scad", entries)?;
    print!("{}", series.to_csv());
    let path = std::env::temp_dir().join("cadfidelity_trend.svg");
    std::fs::write(&path, series.to_svg())?;
    println!("chart written to {}", path.display());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
