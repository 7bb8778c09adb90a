//! Plot-ready columns: per-beacon RSS over time with touch shading.

use std::fmt::Write as _;

use crate::trace::EventTrace;

/// CSV with one row per distinct advertisement or frame timestamp.
///
/// Columns: `t_ms`, one `rss_<beacon>` column per beacon (last value held,
/// empty before first reception), `touch` (sensor state of the latest frame,
/// 0/1) and, when the trace carries ground truth, `truth_person` (empty
/// outside labelled touches).
pub fn plot_data(trace: &EventTrace) -> String {
    let beacons: Vec<_> = trace.beacons().collect();
    let with_truth = !trace.truths().is_empty();

    let mut times: Vec<u64> = trace
        .advs()
        .iter()
        .map(|a| a.t_ms)
        .chain(trace.frames().iter().map(|f| f.t_ms))
        .collect();
    times.sort_unstable();
    times.dedup();

    let mut out = String::from("t_ms");
    for b in &beacons {
        let _ = write!(out, ",rss_{b}");
    }
    out.push_str(",touch");
    if with_truth {
        out.push_str(",truth_person");
    }
    out.push('\n');

    let frames = trace.frames();
    for t in times {
        let _ = write!(out, "{t}");
        for &b in &beacons {
            match trace.windowed_max_rss(t, 0, b) {
                Some(rss) => {
                    let _ = write!(out, ",{rss}");
                }
                None => out.push(','),
            }
        }
        let idx = frames.partition_point(|f| f.t_ms <= t);
        let touched = idx > 0 && frames[idx - 1].is_touched();
        let _ = write!(out, ",{}", u8::from(touched));
        if with_truth {
            match trace.truth_at(t) {
                Some(truth) => {
                    let _ = write!(out, ",{}", truth.person_id);
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::parse_trace;

    #[test]
    fn single_beacon_columns() {
        let trace = parse_trace("adv 0 0-wrist -50\nadv 100 0-wrist -52\n").unwrap();
        assert_eq!(plot_data(&trace), "t_ms,rss_0-wrist,touch\n0,-50,0\n100,-52,0\n");
    }

    #[test]
    fn shape_with_truth() {
        let trace = parse_trace(
            "adv 10 1-wrist -40\nadv 60 2-wrist -60\nframe 0 0000\nframe 50 0100\nframe 100 0000\ntruth 50 100 1\n",
        )
        .unwrap();
        let csv = plot_data(&trace);
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert_eq!(header, "t_ms,rss_1-wrist,rss_2-wrist,touch,truth_person");
        assert_eq!(header.split(',').count(), 2 + 2 + 1);
        let rows: Vec<&str> = lines.collect();
        assert_eq!(
            rows,
            vec![
                "0,,,0,",
                "10,-40,,0,",
                "50,-40,,1,1",
                "60,-40,-60,1,1",
                "100,-40,-60,0,"
            ]
        );
    }
}
