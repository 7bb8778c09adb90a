//! Random trace generation and brute-force recounts shared by the
//! integration tests. The recounts scan the raw event lists and never touch
//! the library's indexes or evaluators.

#![allow(dead_code)]

use ble_hri::ibeacon::{Attachment, BeaconIdentity};
use ble_hri::trace::{AdvEvent, EventTrace, GroundTruthTouch, RobotFrame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DATA_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");
pub const SCENARIO_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios");

pub fn data(name: &str) -> String {
    std::fs::read_to_string(format!("{DATA_DIR}/{name}")).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn scenario(name: &str) -> String {
    std::fs::read_to_string(format!("{SCENARIO_DIR}/{name}")).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// A random trace with at most `max_events` advertisements plus frames.
///
/// RSS values are drawn from a narrow band so ties between beacons and
/// persons are common, and some beacons share a person.
pub fn random_trace(seed: u64, max_events: usize) -> EventTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = rng.random_range(1..=max_events);
    let n_advs = rng.random_range(0..=total);
    let n_frames = total - n_advs;
    let span = rng.random_range(1_000..=120_000u64);

    let n_beacons = rng.random_range(1..=6);
    let beacons: Vec<BeaconIdentity> = (0..n_beacons)
        .map(|_| {
            let person = rng.random_range(0..BeaconIdentity::MAX_PERSONS);
            let attachment = Attachment::ALL[rng.random_range(0..4)];
            BeaconIdentity::new(person, attachment).unwrap()
        })
        .collect();

    let advs = (0..n_advs)
        .map(|_| AdvEvent {
            t_ms: rng.random_range(0..=span),
            beacon: beacons[rng.random_range(0..beacons.len())],
            rss_dbm: rng.random_range(-75..=-30),
        })
        .collect();

    let touch_rate = rng.random_range(0.0..0.6);
    let frames = (0..n_frames)
        .map(|_| {
            let mut touch_sensors = [false; 4];
            if rng.random_bool(touch_rate) {
                for s in touch_sensors.iter_mut() {
                    *s = rng.random_bool(0.5);
                }
            }
            RobotFrame {
                t_ms: rng.random_range(0..=span),
                touch_sensors,
            }
        })
        .collect();

    let mut truths = Vec::new();
    let mut t = rng.random_range(0..2_000u64);
    while t < span {
        let len = rng.random_range(1..3_000);
        truths.push(GroundTruthTouch {
            start_ms: t,
            end_ms: t + len,
            person_id: rng.random_range(0..BeaconIdentity::MAX_PERSONS),
        });
        t += len + rng.random_range(0..4_000);
    }

    EventTrace::new(advs, frames, truths).unwrap()
}

/// Per-beacon value at `t`, indexed by the packed identity nibble: max RSS
/// over `(t - window, t]`, falling back to the latest sample at or before
/// `t`. One linear pass over every advertisement.
pub fn oracle_view(advs: &[AdvEvent], t: u64, window: u64) -> [Option<i32>; 16] {
    let lower = t as i128 - window as i128;
    let mut best = [None::<i32>; 16];
    let mut latest = [None::<(u64, i32)>; 16];
    for a in advs.iter().filter(|a| a.t_ms <= t) {
        let k = usize::from(a.beacon.pack());
        if window > 0 && (a.t_ms as i128) > lower {
            best[k] = Some(best[k].map_or(a.rss_dbm, |b: i32| b.max(a.rss_dbm)));
        }
        // Same-millisecond samples: the stronger one is held.
        if latest[k].is_none_or(|(lt, lr)| (a.t_ms, a.rss_dbm) > (lt, lr)) {
            latest[k] = Some((a.t_ms, a.rss_dbm));
        }
    }
    let mut out = [None; 16];
    for k in 0..16 {
        out[k] = best[k].or(latest[k].map(|(_, rss)| rss));
    }
    out
}

pub fn oracle_windowed_max(advs: &[AdvEvent], t: u64, window: u64, beacon: BeaconIdentity) -> Option<i32> {
    oracle_view(advs, t, window)[usize::from(beacon.pack())]
}

/// `[threshold, touch_total, touch_above, notouch_total, notouch_above,
/// notouch_above_vicinity]` per threshold.
pub fn oracle_touch(trace: &EventTrace, thresholds: &[i32], vicinity: u64) -> Vec<[i64; 6]> {
    let advs = trace.advs();
    let frames = trace.frames();
    let views: Vec<_> = frames.iter().map(|f| oracle_view(advs, f.t_ms, 0)).collect();
    thresholds
        .iter()
        .map(|&thr| {
            let mut row = [thr as i64, 0, 0, 0, 0, 0];
            for (f, view) in frames.iter().zip(&views) {
                let touched = f.touch_sensors.iter().any(|&s| s);
                let above = view.iter().flatten().any(|&rss| rss > thr);
                if touched {
                    row[1] += 1;
                    row[2] += i64::from(above);
                } else {
                    row[3] += 1;
                    if above {
                        row[4] += 1;
                        let near = frames
                            .iter()
                            .any(|g| g.touch_sensors.iter().any(|&s| s) && g.t_ms.abs_diff(f.t_ms) <= vicinity);
                        row[5] += i64::from(near);
                    }
                }
            }
            row
        })
        .collect()
}

pub fn oracle_attribute(advs: &[AdvEvent], t: u64, window: u64) -> Option<u8> {
    let view = oracle_view(advs, t, window);
    let mut best: Option<(i32, u8)> = None;
    for person in 0..BeaconIdentity::MAX_PERSONS {
        let value = Attachment::ALL
            .iter()
            .filter_map(|&a| view[usize::from(BeaconIdentity::new(person, a).unwrap().pack())])
            .max();
        if let Some(v) = value {
            // Ascending person order plus strict `>` keeps the lowest id on ties.
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, person));
            }
        }
    }
    best.map(|(_, p)| p)
}

/// `[window, frames_total, frames_correct, frames_false, seq_total,
/// seq_correct, seq_false]` per window.
pub fn oracle_attribution(trace: &EventTrace, windows: &[u64]) -> Vec<[u64; 7]> {
    let advs = trace.advs();
    windows
        .iter()
        .map(|&w| {
            let mut row = [w, 0, 0, 0, 0, 0, 0];
            for truth in trace.truths() {
                let inside: Vec<&RobotFrame> = trace
                    .frames()
                    .iter()
                    .filter(|f| truth.start_ms <= f.t_ms && f.t_ms < truth.end_ms)
                    .collect();
                if inside.is_empty() {
                    continue;
                }
                let votes: Vec<Option<u8>> = inside.iter().map(|f| oracle_attribute(advs, f.t_ms, w)).collect();
                let correct = votes.iter().filter(|&&v| v == Some(truth.person_id)).count() as u64;
                row[1] += votes.len() as u64;
                row[2] += correct;
                row[3] += votes.len() as u64 - correct;

                let cast: Vec<u8> = votes.iter().flatten().copied().collect();
                let verdict = (0..BeaconIdentity::MAX_PERSONS)
                    .find(|&p| 2 * cast.iter().filter(|&&v| v == p).count() > cast.len())
                    .or(cast.first().copied());
                row[4] += 1;
                if verdict == Some(truth.person_id) {
                    row[5] += 1;
                } else {
                    row[6] += 1;
                }
            }
            row
        })
        .collect()
}
