// Rebuild the reference evaluation table and list every check.

use cadfidelity::report::{self, EvalOptions};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let repro = report::reproduce_table1(&EvalOptions::default())?;
    print!("{}", repro.to_markdown());
    for c in &repro.checks {
        println!("{:<5} {} / {}", if c.pass { "ok" } else { "FAIL" }, c.row, c.column);
    }
    if !repro.passed() {
        return Err("table mismatch".into());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
