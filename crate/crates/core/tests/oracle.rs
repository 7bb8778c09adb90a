//! Library evaluators against brute-force recounts on small random traces.

mod common;

use ble_hri::attribution::evaluate_attribution;
use ble_hri::touch::evaluate_touch;
use ble_hri::trace::windowed_max_rss;
use common::{oracle_attribution, oracle_touch, oracle_windowed_max, random_trace};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn windowed_max_matches(seed in any::<u64>(), t in 0u64..130_000, window in prop_oneof![Just(0u64), 1u64..2_000]) {
        let trace = random_trace(seed, 400);
        for beacon in trace.beacons() {
            prop_assert_eq!(
                windowed_max_rss(&trace, t, window, beacon),
                oracle_windowed_max(trace.advs(), t, window, beacon)
            );
        }
    }

    #[test]
    fn touch_counts_match(seed in any::<u64>(), vicinity in 0u64..1_000) {
        let trace = random_trace(seed, 600);
        let thresholds = [-30, -45, -50, -60, -80];
        match evaluate_touch(&trace, &thresholds, vicinity) {
            Ok(reports) => {
                let got: Vec<[i64; 6]> = reports
                    .iter()
                    .map(|r| [
                        r.threshold_dbm as i64,
                        r.touch_frames_total as i64,
                        r.touch_frames_above as i64,
                        r.notouch_frames_total as i64,
                        r.notouch_frames_above as i64,
                        r.notouch_above_within_vicinity as i64,
                    ])
                    .collect();
                prop_assert_eq!(got, oracle_touch(&trace, &thresholds, vicinity));
            }
            Err(_) => prop_assert!(trace.frames().is_empty()),
        }
    }

    #[test]
    fn attribution_counts_match(seed in any::<u64>()) {
        let trace = random_trace(seed, 600);
        let windows = [0, 1, 300, 500, 5_000];
        match evaluate_attribution(&trace, &windows) {
            Ok(report) => {
                let got: Vec<[u64; 7]> = report
                    .rows
                    .iter()
                    .map(|r| [
                        r.window_ms,
                        r.frames_total as u64,
                        r.frames_correct as u64,
                        r.frames_false as u64,
                        r.sequences_total as u64,
                        r.sequences_correct as u64,
                        r.sequences_false as u64,
                    ])
                    .collect();
                prop_assert_eq!(got, oracle_attribution(&trace, &windows));
            }
            Err(_) => prop_assert!(trace.truths().is_empty()),
        }
    }
}

#[test]
fn tie_goes_to_lower_person() {
    let trace = ble_hri::parse_trace("adv 0 3-wrist -50\nadv 0 1-ankle -50\nadv 0 2-chest -51\n").unwrap();
    assert_eq!(common::oracle_attribute(trace.advs(), 10, 0), Some(1));
    assert_eq!(
        ble_hri::attribution::attribute_frame(&trace, 10, 0, &[1, 2, 3]),
        Some(1)
    );
}
