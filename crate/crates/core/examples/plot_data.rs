// Per-beacon RSS columns with touch shading, ready for a plotting tool.

use ble_hri::plot::plot_data;
use ble_hri::scenario::parse_scenario;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = parse_scenario(
        "scenario = game\nduration_ms = 6000\nrng_seed = 3\ntx_power_dbm = 0, 0\ntouches = 2000-3200:2\n",
    )?;
    let csv = plot_data(&scenario.generate()?);
    // Rows around the start of the touch.
    println!("{}", csv.lines().next().unwrap_or_default());
    for line in csv.lines().skip(1) {
        let t: u64 = line.split(',').next().unwrap_or_default().parse()?;
        if (1_850..=2_200).contains(&t) {
            println!("{line}");
        }
    }
    let out = std::env::temp_dir().join("ble-hri-plot.csv");
    std::fs::write(&out, &csv)?;
    println!("{} rows written to {}", csv.lines().count() - 1, out.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
