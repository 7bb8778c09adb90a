// A wristband carried slowly away from the receiver, classified into
// Close / InRoom / Out under two threshold presets.

use ble_hri::proximity::{self, ProximityConfig, ProximityZone};
use ble_hri::simulator::{simulate_recede, RecedeParams, ScenarioConfig};
use ble_hri::BeaconIdentity;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = ScenarioConfig {
        duration_ms: 120_000,
        ..ScenarioConfig::noise_free()
    };
    let trace = simulate_recede(&config, &RecedeParams::default())?.trace;
    let beacon = BeaconIdentity::wrist(0)?;

    for (name, zones) in [
        ("default", ProximityConfig::default()),
        ("within half a meter", ProximityConfig::within_half_meter()),
    ] {
        let timeline = proximity::run(&trace, &zones, 50)?;
        println!("{name} (close >= {} dBm):", zones.close_threshold_dbm);
        for (t, zone) in timeline.segments(beacon) {
            println!("  {:>7.1} s  {zone}", *t as f64 / 1000.0);
        }
        println!(
            "  {:.1} s Close, {:.1} s InRoom",
            timeline.time_in(beacon, ProximityZone::Close) as f64 / 1000.0,
            timeline.time_in(beacon, ProximityZone::InRoom) as f64 / 1000.0
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
