//! Time-ordered event traces and the windowed RSS query shared by every
//! classifier.
//!
//! Trace files are line oriented UTF-8, one record per line:
//!
//! ```text
//! adv   <t_ms> <person_id>-<attachment> <rss_dbm>
//! frame <t_ms> <s0><s1><s2><s3>
//! truth <start_ms> <end_ms> <person_id>
//! end   <t_ms>
//! ```
//!
//! `#` starts a comment line, blank lines are skipped. The optional `end`
//! record marks when recording stopped, which can be later than the last
//! event (a beacon that walked out of range leaves silence behind it).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::ibeacon::BeaconIdentity;

pub const MIN_RSS_DBM: i32 = -127;
pub const MAX_RSS_DBM: i32 = 20;

/// RSS per beacon at one instant; beacons without a value are absent.
pub type RssView = BTreeMap<BeaconIdentity, i32>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("ground truth intervals overlap: [{}, {}) and [{}, {})", .first.0, .first.1, .second.0, .second.1)]
    Overlap { first: (u64, u64), second: (u64, u64) },
    #[error("invalid event: {0}")]
    InvalidEvent(String),
}

/// One received advertisement: who sent it and how strong it arrived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdvEvent {
    pub t_ms: u64,
    pub beacon: BeaconIdentity,
    pub rss_dbm: i32,
}

/// Status message from the robot with its four capacitive sensor flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RobotFrame {
    pub t_ms: u64,
    pub touch_sensors: [bool; 4],
}

impl RobotFrame {
    pub fn is_touched(&self) -> bool {
        self.touch_sensors.iter().any(|&s| s)
    }
}

/// Labelled touch by `person_id`, covering `[start_ms, end_ms)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundTruthTouch {
    pub start_ms: u64,
    pub end_ms: u64,
    pub person_id: u8,
}

impl GroundTruthTouch {
    pub fn contains(&self, t_ms: u64) -> bool {
        self.start_ms <= t_ms && t_ms < self.end_ms
    }
}

/// Immutable, validated event trace.
///
/// Advertisements are ordered by `(t_ms, beacon)`, frames by `t_ms` and
/// truths by `start_ms`; sorting is stable so equal keys keep input order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventTrace {
    advs: Vec<AdvEvent>,
    frames: Vec<RobotFrame>,
    truths: Vec<GroundTruthTouch>,
    end_ms: Option<u64>,
    by_beacon: BTreeMap<BeaconIdentity, Vec<(u64, i32)>>,
}

impl EventTrace {
    pub fn new(
        mut advs: Vec<AdvEvent>,
        mut frames: Vec<RobotFrame>,
        mut truths: Vec<GroundTruthTouch>,
    ) -> Result<Self, TraceError> {
        for adv in &advs {
            if !(MIN_RSS_DBM..=MAX_RSS_DBM).contains(&adv.rss_dbm) {
                return Err(TraceError::InvalidEvent(format!(
                    "rss {} dBm at t={} outside [{MIN_RSS_DBM}, {MAX_RSS_DBM}]",
                    adv.rss_dbm, adv.t_ms
                )));
            }
        }
        for truth in &truths {
            if truth.start_ms >= truth.end_ms {
                return Err(TraceError::InvalidEvent(format!(
                    "truth interval [{}, {}) is empty",
                    truth.start_ms, truth.end_ms
                )));
            }
            if truth.person_id >= BeaconIdentity::MAX_PERSONS {
                return Err(TraceError::InvalidEvent(format!(
                    "truth person id {} out of range",
                    truth.person_id
                )));
            }
        }

        // Total orders, so the stored trace never depends on input order. Of
        // two samples from one beacon in the same millisecond the stronger
        // sorts last and is the one held.
        advs.sort_by_key(|a| (a.t_ms, a.beacon, a.rss_dbm));
        frames.sort_by_key(|f| (f.t_ms, f.touch_sensors));
        truths.sort_by_key(|t| (t.start_ms, t.end_ms, t.person_id));
        check_overlaps(&truths)?;

        let mut by_beacon: BTreeMap<BeaconIdentity, Vec<(u64, i32)>> = BTreeMap::new();
        for adv in &advs {
            by_beacon.entry(adv.beacon).or_default().push((adv.t_ms, adv.rss_dbm));
        }

        Ok(Self {
            advs,
            frames,
            truths,
            end_ms: None,
            by_beacon,
        })
    }

    /// Marks the recording end. Must not precede any event.
    pub fn with_end(mut self, end_ms: u64) -> Result<Self, TraceError> {
        let last = self.last_event_ms();
        if end_ms < last {
            return Err(TraceError::InvalidEvent(format!(
                "end {end_ms} precedes last event at {last}"
            )));
        }
        self.end_ms = Some(end_ms);
        Ok(self)
    }

    pub fn advs(&self) -> &[AdvEvent] {
        &self.advs
    }

    pub fn frames(&self) -> &[RobotFrame] {
        &self.frames
    }

    pub fn truths(&self) -> &[GroundTruthTouch] {
        &self.truths
    }

    pub fn explicit_end_ms(&self) -> Option<u64> {
        self.end_ms
    }

    pub fn is_empty(&self) -> bool {
        self.advs.is_empty() && self.frames.is_empty() && self.truths.is_empty()
    }

    fn last_event_ms(&self) -> u64 {
        let adv = self.advs.last().map(|a| a.t_ms);
        let frame = self.frames.last().map(|f| f.t_ms);
        let truth = self.truths.iter().map(|t| t.end_ms).max();
        adv.into_iter().chain(frame).chain(truth).max().unwrap_or(0)
    }

    /// End of the covered time span: the `end` record if present, else the
    /// latest event time.
    pub fn end_ms(&self) -> u64 {
        self.end_ms.unwrap_or_else(|| self.last_event_ms())
    }

    /// Beacons that advertised at least once, in identity order.
    pub fn beacons(&self) -> impl Iterator<Item = BeaconIdentity> + '_ {
        self.by_beacon.keys().copied()
    }

    /// Person ids seen either in advertisements or in ground truth.
    pub fn persons(&self) -> BTreeSet<u8> {
        self.beacons()
            .map(|b| b.person_id())
            .chain(self.truths.iter().map(|t| t.person_id))
            .collect()
    }

    /// Ground truth interval covering `t_ms`, if any.
    pub fn truth_at(&self, t_ms: u64) -> Option<&GroundTruthTouch> {
        let idx = self.truths.partition_point(|t| t.start_ms <= t_ms);
        self.truths[..idx].last().filter(|t| t.contains(t_ms))
    }

    /// Strongest RSS of `beacon` within `(t_ms - window_ms, t_ms]`.
    ///
    /// A zero window, or a window holding no sample, falls back to the most
    /// recent sample at or before `t_ms`. `None` until the beacon is first
    /// heard.
    pub fn windowed_max_rss(&self, t_ms: u64, window_ms: u64, beacon: BeaconIdentity) -> Option<i32> {
        let samples = self.by_beacon.get(&beacon)?;
        let upto = samples.partition_point(|&(t, _)| t <= t_ms);
        let held = samples[..upto].last()?.1;
        if window_ms == 0 {
            return Some(held);
        }
        let from = match t_ms.checked_sub(window_ms) {
            Some(lower) => samples[..upto].partition_point(|&(t, _)| t <= lower),
            None => 0,
        };
        samples[from..upto].iter().map(|&(_, rss)| rss).max().or(Some(held))
    }

    /// Per-beacon view at `t_ms`; beacons not yet heard are left out.
    pub fn rss_view(&self, t_ms: u64, window_ms: u64) -> RssView {
        self.beacons()
            .filter_map(|b| self.windowed_max_rss(t_ms, window_ms, b).map(|rss| (b, rss)))
            .collect()
    }
}

fn check_overlaps(sorted: &[GroundTruthTouch]) -> Result<(), TraceError> {
    for pair in sorted.windows(2) {
        if pair[0].end_ms > pair[1].start_ms {
            return Err(TraceError::Overlap {
                first: (pair[0].start_ms, pair[0].end_ms),
                second: (pair[1].start_ms, pair[1].end_ms),
            });
        }
    }
    Ok(())
}

pub fn windowed_max_rss(trace: &EventTrace, t_ms: u64, window_ms: u64, beacon: BeaconIdentity) -> Option<i32> {
    trace.windowed_max_rss(t_ms, window_ms, beacon)
}

fn schema(line: usize, message: impl Into<String>) -> TraceError {
    TraceError::Schema {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, field: &str, token: &str) -> Result<T, TraceError> {
    token
        .parse()
        .map_err(|_| schema(line, format!("invalid {field} `{token}`")))
}

/// Parses trace text. Records may appear in any order.
pub fn parse_trace(text: &str) -> Result<EventTrace, TraceError> {
    let mut advs = Vec::new();
    let mut frames = Vec::new();
    let mut truths = Vec::new();
    let mut end = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let expect = |n: usize| {
            if fields.len() == n {
                Ok(())
            } else {
                Err(schema(
                    line,
                    format!(
                        "`{}` record takes {} fields, found {}",
                        fields[0],
                        n - 1,
                        fields.len() - 1
                    ),
                ))
            }
        };
        match fields[0] {
            "adv" => {
                expect(4)?;
                let beacon = fields[2].parse().map_err(|e| schema(line, format!("{e}")))?;
                let rss_dbm: i32 = parse_num(line, "rss", fields[3])?;
                if !(MIN_RSS_DBM..=MAX_RSS_DBM).contains(&rss_dbm) {
                    return Err(schema(line, format!("rss {rss_dbm} outside [-127, 20]")));
                }
                advs.push(AdvEvent {
                    t_ms: parse_num(line, "time", fields[1])?,
                    beacon,
                    rss_dbm,
                });
            }
            "frame" => {
                expect(3)?;
                let flags = fields[2].as_bytes();
                if flags.len() != 4 || !flags.iter().all(|&b| b == b'0' || b == b'1') {
                    return Err(schema(
                        line,
                        format!("sensor flags `{}` must be four 0/1 digits", fields[2]),
                    ));
                }
                let mut touch_sensors = [false; 4];
                for (slot, &b) in touch_sensors.iter_mut().zip(flags) {
                    *slot = b == b'1';
                }
                frames.push(RobotFrame {
                    t_ms: parse_num(line, "time", fields[1])?,
                    touch_sensors,
                });
            }
            "truth" => {
                expect(4)?;
                let start_ms: u64 = parse_num(line, "start", fields[1])?;
                let end_ms: u64 = parse_num(line, "end", fields[2])?;
                let person_id: u8 = parse_num(line, "person id", fields[3])?;
                if start_ms >= end_ms {
                    return Err(schema(line, "truth start must precede end"));
                }
                if person_id >= BeaconIdentity::MAX_PERSONS {
                    return Err(schema(line, format!("person id {person_id} out of range")));
                }
                truths.push(GroundTruthTouch {
                    start_ms,
                    end_ms,
                    person_id,
                });
            }
            "end" => {
                expect(2)?;
                if end.is_some() {
                    return Err(schema(line, "duplicate `end` record"));
                }
                end = Some(parse_num::<u64>(line, "time", fields[1])?);
            }
            other => return Err(schema(line, format!("unknown record kind `{other}`"))),
        }
    }

    let trace = EventTrace::new(advs, frames, truths)?;
    match end {
        Some(end) => trace.with_end(end),
        None => Ok(trace),
    }
}

/// Canonical text form. Records are ordered by time, then kind
/// (adv, frame, truth, end), then beacon.
pub fn serialize_trace(trace: &EventTrace) -> String {
    let mut out = String::new();
    let (mut a, mut f, mut g) = (0, 0, 0);
    let (advs, frames, truths) = (trace.advs(), trace.frames(), trace.truths());
    loop {
        let next_adv = advs.get(a).map(|e| e.t_ms);
        let next_frame = frames.get(f).map(|e| e.t_ms);
        let next_truth = truths.get(g).map(|e| e.start_ms);
        let Some(t) = [next_adv, next_frame, next_truth].into_iter().flatten().min() else {
            break;
        };
        if next_adv == Some(t) {
            let e = &advs[a];
            let _ = writeln!(out, "adv {} {} {}", e.t_ms, e.beacon, e.rss_dbm);
            a += 1;
        } else if next_frame == Some(t) {
            let e = &frames[f];
            let flags: String = e.touch_sensors.iter().map(|&s| if s { '1' } else { '0' }).collect();
            let _ = writeln!(out, "frame {} {}", e.t_ms, flags);
            f += 1;
        } else {
            let e = &truths[g];
            let _ = writeln!(out, "truth {} {} {}", e.start_ms, e.end_ms, e.person_id);
            g += 1;
        }
    }
    if let Some(end) = trace.explicit_end_ms() {
        let _ = writeln!(out, "end {end}");
    }
    out
}
