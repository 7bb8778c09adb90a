//! Who is touching the robot.
//!
//! During a touch the toucher's wristband is usually the strongest one the
//! robot hears. Occlusion by the touching hand can briefly bury that signal,
//! so the comparison can use each wristband's maximum over a trailing window
//! instead of its latest value. Occlusion only ever lowers RSS, which is why
//! a maximum is the right smoother here.

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::trace::EventTrace;

pub const DEFAULT_WINDOWS_MS: [u64; 3] = [0, 300, 500];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttributionError {
    #[error("touch sequence has no attributed frame")]
    EmptySequence,
    #[error("trace has no ground truth touch intervals")]
    NoGroundTruth,
}

/// Strongest windowed RSS among all beacons worn by `person_id`.
pub fn person_rss(trace: &EventTrace, t_ms: u64, window_ms: u64, person_id: u8) -> Option<i32> {
    trace
        .beacons()
        .filter(|b| b.person_id() == person_id)
        .filter_map(|b| trace.windowed_max_rss(t_ms, window_ms, b))
        .max()
}

/// Person with the strongest windowed RSS at `t_ms`. Ties go to the lowest
/// person id; `None` if nobody in `persons` has been heard yet.
pub fn attribute_frame(trace: &EventTrace, t_ms: u64, window_ms: u64, persons: &[u8]) -> Option<u8> {
    persons
        .iter()
        .filter_map(|&p| person_rss(trace, t_ms, window_ms, p).map(|rss| (rss, Reverse(p))))
        .max()
        .map(|(_, Reverse(p))| p)
}

/// Sequence verdict from its per-frame attributions: the strict majority
/// person, otherwise whoever the first frame was attributed to.
pub fn attribute_sequence(attributions: &[u8]) -> Result<u8, AttributionError> {
    let first = *attributions.first().ok_or(AttributionError::EmptySequence)?;
    let mut counts: BTreeMap<u8, usize> = BTreeMap::new();
    for &p in attributions {
        *counts.entry(p).or_default() += 1;
    }
    Ok(counts
        .into_iter()
        .find(|&(_, n)| 2 * n > attributions.len())
        .map_or(first, |(p, _)| p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttributionRow {
    pub window_ms: u64,
    pub frames_total: usize,
    pub frames_correct: usize,
    pub frames_false: usize,
    pub sequences_total: usize,
    pub sequences_correct: usize,
    pub sequences_false: usize,
}

impl AttributionRow {
    pub fn frame_accuracy(&self) -> f64 {
        ratio(self.frames_correct, self.frames_total)
    }

    pub fn sequence_accuracy(&self) -> f64 {
        ratio(self.sequences_correct, self.sequences_total)
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.window_ms,
            self.frames_total,
            self.frames_correct,
            self.frames_false,
            self.sequences_total,
            self.sequences_correct,
            self.sequences_false
        )
    }
}

fn ratio(part: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        part as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributionReport {
    pub rows: Vec<AttributionRow>,
}

impl AttributionReport {
    pub const CSV_HEADER: &'static str =
        "window_ms,frames_total,frames_correct,frames_false,seq_total,seq_correct,seq_false";

    pub fn row(&self, window_ms: u64) -> Option<&AttributionRow> {
        self.rows.iter().find(|r| r.window_ms == window_ms)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let (frames, seqs) = self
            .rows
            .first()
            .map_or((0, 0), |r| (r.frames_total, r.sequences_total));
        let _ = writeln!(
            out,
            "{:<8} || {:^27} || {:^27}",
            "", "Received frames", "Touch sequences"
        );
        let _ = writeln!(
            out,
            "{:<8} || {:^27} || {:^27}",
            "",
            format!("Total: {frames}"),
            format!("Total: {seqs}")
        );
        let _ = writeln!(
            out,
            "{:<8} || {:<16} | {:<8} || {:<16} | {:<8}",
            "Window", "Positive", "False", "Positive", "False"
        );
        let _ = writeln!(out, "{}", "=".repeat(72));
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<8} || {:<16} | {:<8} || {:<16} | {:<8}",
                format!("{} ms", r.window_ms),
                format!("{} ({:.0}%)", r.frames_correct, 100.0 * r.frame_accuracy()),
                r.frames_false,
                format!("{} ({:.0}%)", r.sequences_correct, 100.0 * r.sequence_accuracy()),
                r.sequences_false
            );
        }
        out
    }
}

/// Scores attribution inside every ground truth interval, once per window.
///
/// Each interval holding at least one frame is one touch sequence; a frame
/// nobody can be attributed to counts as false.
pub fn evaluate_attribution(trace: &EventTrace, windows_ms: &[u64]) -> Result<AttributionReport, AttributionError> {
    if trace.truths().is_empty() {
        return Err(AttributionError::NoGroundTruth);
    }
    let persons: Vec<u8> = trace.persons().into_iter().collect();
    let frames = trace.frames();

    let rows = windows_ms
        .iter()
        .map(|&window_ms| {
            let mut row = AttributionRow {
                window_ms,
                frames_total: 0,
                frames_correct: 0,
                frames_false: 0,
                sequences_total: 0,
                sequences_correct: 0,
                sequences_false: 0,
            };
            for truth in trace.truths() {
                let from = frames.partition_point(|f| f.t_ms < truth.start_ms);
                let to = frames.partition_point(|f| f.t_ms < truth.end_ms);
                if from == to {
                    continue;
                }
                let attributed: Vec<Option<u8>> = frames[from..to]
                    .iter()
                    .map(|f| attribute_frame(trace, f.t_ms, window_ms, &persons))
                    .collect();
                let correct = attributed.iter().filter(|&&a| a == Some(truth.person_id)).count();
                row.frames_total += attributed.len();
                row.frames_correct += correct;
                row.frames_false += attributed.len() - correct;

                let votes: Vec<u8> = attributed.into_iter().flatten().collect();
                row.sequences_total += 1;
                if attribute_sequence(&votes) == Ok(truth.person_id) {
                    row.sequences_correct += 1;
                } else {
                    row.sequences_false += 1;
                }
            }
            row
        })
        .collect();
    Ok(AttributionReport { rows })
}
