// Who touched the robot? Strongest wristband wins, with and without a
// sliding max window to ride out hand occlusion.

use ble_hri::attribution::{attribute_frame, evaluate_attribution};
use ble_hri::scenario::parse_scenario;

const SCENARIO: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/game.scenario"));

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let trace = parse_scenario(SCENARIO)?.generate()?;

    let report = evaluate_attribution(&trace, &[0, 100, 300, 500, 1000])?;
    print!("{}", report.render_table());

    // First frame where the raw reading and the windowed one disagree.
    let persons: Vec<u8> = trace.persons().into_iter().collect();
    let disagreement = trace.frames().iter().find_map(|f| {
        let truth = trace.truth_at(f.t_ms)?;
        let raw = attribute_frame(&trace, f.t_ms, 0, &persons);
        let windowed = attribute_frame(&trace, f.t_ms, 300, &persons);
        (raw != windowed).then_some((f.t_ms, truth.person_id, raw, windowed))
    });
    if let Some((t, truth, raw, windowed)) = disagreement {
        println!("t={t} ms: person {truth} touching, raw says {raw:?}, 300 ms window says {windowed:?}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
