//! RSS threshold touch detection and its evaluation against the robot's
//! capacitive sensors.

use std::fmt::Write as _;

use thiserror::Error;

use crate::trace::{EventTrace, RobotFrame, RssView};

pub const DEFAULT_THRESHOLDS_DBM: [i32; 3] = [-40, -41, -42];
pub const DEFAULT_VICINITY_MS: u64 = 400;
pub const DEFAULT_MERGE_GAP_MS: u64 = 400;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TouchError {
    #[error("trace has no robot frames")]
    EmptyTrace,
}

/// True iff some beacon in `view` is strictly stronger than `threshold_dbm`.
pub fn classify_touch_frame(view: &RssView, threshold_dbm: i32) -> bool {
    view.values().any(|&rss| rss > threshold_dbm)
}

/// A frame counts as touched when any of the four sensors fired.
pub fn ground_truth_touch(frame: &RobotFrame) -> bool {
    frame.is_touched()
}

/// Maximal run of touched frames; gaps up to the merge gap are bridged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TouchSequence {
    pub start_ms: u64,
    pub end_ms: u64,
    /// Indices into `EventTrace::frames` of the touched frames in this run.
    pub frame_indices: Vec<usize>,
}

pub fn extract_touch_sequences(trace: &EventTrace, merge_gap_ms: u64) -> Vec<TouchSequence> {
    let mut sequences: Vec<TouchSequence> = Vec::new();
    for (idx, frame) in trace.frames().iter().enumerate() {
        if !ground_truth_touch(frame) {
            continue;
        }
        match sequences.last_mut() {
            Some(seq) if frame.t_ms - seq.end_ms <= merge_gap_ms => {
                seq.end_ms = frame.t_ms;
                seq.frame_indices.push(idx);
            }
            _ => sequences.push(TouchSequence {
                start_ms: frame.t_ms,
                end_ms: frame.t_ms,
                frame_indices: vec![idx],
            }),
        }
    }
    sequences
}

/// Detection counts for one threshold, laid out like a received-frames
/// analysis table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TouchReport {
    pub threshold_dbm: i32,
    pub touch_frames_total: usize,
    pub touch_frames_above: usize,
    pub notouch_frames_total: usize,
    pub notouch_frames_above: usize,
    /// False positives within `vicinity_ms` of some touched frame.
    pub notouch_above_within_vicinity: usize,
    pub vicinity_ms: u64,
}

fn percent(part: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * part as f64 / total as f64
    }
}

impl TouchReport {
    pub const CSV_HEADER: &'static str =
        "threshold_dbm,touch_total,touch_above,notouch_total,notouch_above,notouch_above_vicinity";

    pub fn detection_percent(&self) -> f64 {
        percent(self.touch_frames_above, self.touch_frames_total)
    }

    pub fn false_positive_percent(&self) -> f64 {
        percent(self.notouch_frames_above, self.notouch_frames_total)
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.threshold_dbm,
            self.touch_frames_total,
            self.touch_frames_above,
            self.notouch_frames_total,
            self.notouch_frames_above,
            self.notouch_above_within_vicinity
        )
    }
}

pub fn evaluate_touch(
    trace: &EventTrace,
    thresholds_dbm: &[i32],
    vicinity_ms: u64,
) -> Result<Vec<TouchReport>, TouchError> {
    let frames = trace.frames();
    if frames.is_empty() {
        return Err(TouchError::EmptyTrace);
    }

    let touched_times: Vec<u64> = frames
        .iter()
        .filter(|f| ground_truth_touch(f))
        .map(|f| f.t_ms)
        .collect();
    let near_touch = |t: u64| {
        let from = touched_times.partition_point(|&tt| tt + vicinity_ms < t);
        touched_times.get(from).is_some_and(|&tt| tt <= t + vicinity_ms)
    };

    struct FrameView {
        touched: bool,
        near_touch: bool,
        view: RssView,
    }
    let views: Vec<FrameView> = frames
        .iter()
        .map(|f| {
            let touched = ground_truth_touch(f);
            FrameView {
                touched,
                near_touch: !touched && near_touch(f.t_ms),
                view: trace.rss_view(f.t_ms, 0),
            }
        })
        .collect();

    let touch_total = views.iter().filter(|v| v.touched).count();
    Ok(thresholds_dbm
        .iter()
        .map(|&threshold_dbm| {
            let mut report = TouchReport {
                threshold_dbm,
                touch_frames_total: touch_total,
                touch_frames_above: 0,
                notouch_frames_total: views.len() - touch_total,
                notouch_frames_above: 0,
                notouch_above_within_vicinity: 0,
                vicinity_ms,
            };
            for v in views.iter().filter(|v| classify_touch_frame(&v.view, threshold_dbm)) {
                if v.touched {
                    report.touch_frames_above += 1;
                } else {
                    report.notouch_frames_above += 1;
                    if v.near_touch {
                        report.notouch_above_within_vicinity += 1;
                    }
                }
            }
            report
        })
        .collect())
}

pub fn touch_reports_csv(reports: &[TouchReport]) -> String {
    let mut out = String::from(TouchReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn render_touch_table(reports: &[TouchReport]) -> String {
    let mut out = String::new();
    let (touch_total, notouch_total, vicinity) = reports.first().map_or((0, 0, DEFAULT_VICINITY_MS), |r| {
        (r.touch_frames_total, r.notouch_frames_total, r.vicinity_ms)
    });
    let _ = writeln!(
        out,
        "{:<14} | {:<18} | {:<18} | ",
        "RSS value", "Touch occurs", "No touch occurs"
    );
    let _ = writeln!(
        out,
        "{:<14} | {:<18} | {:<18} | within +-{} ms",
        "greater than:",
        format!("Total: {touch_total}"),
        format!("Total: {notouch_total}"),
        vicinity
    );
    let _ = writeln!(out, "{}", "-".repeat(72));
    for r in reports {
        let _ = writeln!(
            out,
            "{:<14} | {:<18} | {:<18} | {}",
            format!("{} dBm", r.threshold_dbm),
            format!("{} ({:.0}%)", r.touch_frames_above, r.detection_percent()),
            format!("{} ({:.0}%)", r.notouch_frames_above, r.false_positive_percent()),
            r.notouch_above_within_vicinity
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ibeacon::BeaconIdentity;
    use crate::trace::{parse_trace, AdvEvent, RobotFrame};

    fn view(entries: &[(u8, i32)]) -> RssView {
        entries
            .iter()
            .map(|&(p, rss)| (BeaconIdentity::wrist(p).unwrap(), rss))
            .collect()
    }

    fn frame(t_ms: u64, touched: bool) -> RobotFrame {
        RobotFrame {
            t_ms,
            touch_sensors: [false, touched, false, false],
        }
    }

    #[test]
    fn frame_classification() {
        assert!(classify_touch_frame(&view(&[(1, -40)]), -41));
        assert!(!classify_touch_frame(&view(&[(1, -41)]), -41));
        assert!(!classify_touch_frame(&view(&[]), -41));
        assert!(classify_touch_frame(&view(&[(1, -70), (2, -30)]), -41));
    }

    #[test]
    fn sensor_or() {
        let mk = |s: [bool; 4]| RobotFrame {
            t_ms: 0,
            touch_sensors: s,
        };
        assert!(!ground_truth_touch(&mk([false; 4])));
        assert!(ground_truth_touch(&mk([false, true, false, false])));
        assert!(ground_truth_touch(&mk([true; 4])));
    }

    fn touch_pattern_trace() -> EventTrace {
        let frames = (0..=20)
            .map(|k| {
                let t = k * 50;
                frame(t, t <= 200 || (700..=900).contains(&t))
            })
            .collect();
        EventTrace::new(vec![], frames, vec![]).unwrap()
    }

    #[test]
    fn sequences_split_by_gap() {
        let trace = touch_pattern_trace();
        let seqs = extract_touch_sequences(&trace, 100);
        assert_eq!(seqs.len(), 2);
        assert_eq!((seqs[0].start_ms, seqs[0].end_ms), (0, 200));
        assert_eq!((seqs[1].start_ms, seqs[1].end_ms), (700, 900));
        assert_eq!(seqs[1].frame_indices, vec![14, 15, 16, 17, 18]);
        let merged = extract_touch_sequences(&trace, 600);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].frame_indices.len(), 10);
    }

    #[test]
    fn no_touch_no_sequences() {
        let trace = EventTrace::new(vec![], vec![frame(0, false), frame(50, false)], vec![]).unwrap();
        assert!(extract_touch_sequences(&trace, 400).is_empty());
    }

    #[test]
    fn separable_trace_is_perfect() {
        let beacon = BeaconIdentity::wrist(1).unwrap();
        let mut advs = Vec::new();
        let mut frames = Vec::new();
        for k in 0..100u64 {
            let t = k * 50;
            let touched = (k / 10) % 2 == 1;
            frames.push(frame(t, touched));
            advs.push(AdvEvent {
                t_ms: t,
                beacon,
                rss_dbm: if touched { -35 } else { -80 },
            });
        }
        let trace = EventTrace::new(advs, frames, vec![]).unwrap();
        let reports = evaluate_touch(&trace, &[-41], 400).unwrap();
        let r = reports[0];
        assert_eq!(r.touch_frames_above, r.touch_frames_total);
        assert_eq!(r.detection_percent(), 100.0);
        assert_eq!(r.notouch_frames_above, 0);
        assert_eq!(r.false_positive_percent(), 0.0);
    }

    #[test]
    fn vicinity_counting() {
        // touch at 1000; strong signal held from 500 through 2000
        let trace = parse_trace(
            "adv 500 1-wrist -30\n\
             frame 500 0000\nframe 600 0000\nframe 1000 1000\nframe 1400 0000\nframe 1401 0000\nframe 2000 0000\n",
        )
        .unwrap();
        let r = evaluate_touch(&trace, &[-41], 400).unwrap()[0];
        assert_eq!(r.touch_frames_total, 1);
        assert_eq!(r.touch_frames_above, 1);
        assert_eq!(r.notouch_frames_total, 5);
        assert_eq!(r.notouch_frames_above, 5);
        // 600 and 1400 lie within +-400 ms, 500/1401/2000 do not
        assert_eq!(r.notouch_above_within_vicinity, 2);
    }

    #[test]
    fn empty_trace_error() {
        assert_eq!(
            evaluate_touch(&EventTrace::default(), &[-41], 400),
            Err(TouchError::EmptyTrace)
        );
    }

    #[test]
    fn report_shape_and_csv() {
        let trace = touch_pattern_trace();
        let reports = evaluate_touch(&trace, &DEFAULT_THRESHOLDS_DBM, DEFAULT_VICINITY_MS).unwrap();
        assert_eq!(
            reports.iter().map(|r| r.threshold_dbm).collect::<Vec<_>>(),
            vec![-40, -41, -42]
        );
        let csv = touch_reports_csv(&reports);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TouchReport::CSV_HEADER));
        assert_eq!(lines.next(), Some("-40,10,0,11,0,0"));
        assert_eq!(csv.lines().count(), 4);
        let table = render_touch_table(&reports);
        assert!(table.contains("Total: 10"));
        assert!(table.contains("-41 dBm"));
    }
}
