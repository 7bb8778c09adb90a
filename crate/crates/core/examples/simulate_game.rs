// Build a two-person game in code with a hand-written touch script and
// write it out in the trace text format.

use ble_hri::simulator::{simulate_two_person_game, GameParams, ScenarioConfig};
use ble_hri::{parse_trace, serialize_trace, GroundTruthTouch};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = ScenarioConfig {
        duration_ms: 8_000,
        tx_power_dbm: vec![0, 0],
        rng_seed: 2,
        ..ScenarioConfig::default()
    };
    let script = [
        GroundTruthTouch {
            start_ms: 1_500,
            end_ms: 2_700,
            person_id: 1,
        },
        GroundTruthTouch {
            start_ms: 4_000,
            end_ms: 4_600,
            person_id: 2,
        },
        GroundTruthTouch {
            start_ms: 6_000,
            end_ms: 7_000,
            person_id: 1,
        },
    ];
    let sim = simulate_two_person_game(&config, &GameParams::default(), &script)?;

    let sent = sim.log.len();
    let lost = sim.log.iter().filter(|a| a.rss_dbm.is_none()).count();
    let occluded = sim.log.iter().filter(|a| a.occluded).count();
    println!("{sent} advertisements, {lost} lost, {occluded} occluded");

    let text = serialize_trace(&sim.trace);
    for line in text.lines().filter(|l| !l.starts_with("frame")).take(8) {
        println!("{line}");
    }
    println!("... {} lines", text.lines().count());
    assert_eq!(parse_trace(&text)?, sim.trace);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
