// Frame-level touch detection from wristband RSS, scored against the
// robot's touch sensors.

use ble_hri::scenario::parse_scenario;
use ble_hri::touch::{evaluate_touch, extract_touch_sequences, render_touch_table, DEFAULT_MERGE_GAP_MS};

const SCENARIO: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/game.scenario"));

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let trace = parse_scenario(SCENARIO)?.generate()?;

    let reports = evaluate_touch(&trace, &[-38, -40, -41, -42, -45], 400)?;
    print!("{}", render_touch_table(&reports));

    let sequences = extract_touch_sequences(&trace, DEFAULT_MERGE_GAP_MS);
    let longest = sequences.iter().map(|s| s.end_ms - s.start_ms).max().unwrap_or(0);
    println!("{} touch sequences, longest {longest} ms", sequences.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
