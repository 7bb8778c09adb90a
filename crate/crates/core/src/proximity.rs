//! Presence and proximity zones from advertisement RSS.
//!
//! Any received advertisement puts its wearer in the room. Strong signals
//! (at or above the close threshold) mean the wearer is right next to the
//! robot. A beacon not heard for `presence_timeout_ms` drops to `Out`.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::ibeacon::BeaconIdentity;
use crate::trace::{AdvEvent, EventTrace, MAX_RSS_DBM, MIN_RSS_DBM};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProximityError {
    #[error("event at {got} ms precedes already processed time {last} ms")]
    TimeRegression { last: u64, got: u64 },
    #[error("invalid proximity config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProximityZone {
    Close,
    InRoom,
    Out,
}

impl fmt::Display for ProximityZone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProximityZone::Close => "Close",
            ProximityZone::InRoom => "InRoom",
            ProximityZone::Out => "Out",
        })
    }
}

impl FromStr for ProximityZone {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Close" => Ok(ProximityZone::Close),
            "InRoom" => Ok(ProximityZone::InRoom),
            "Out" => Ok(ProximityZone::Out),
            other => Err(format!("unknown zone `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProximityConfig {
    pub close_threshold_dbm: i32,
    pub presence_timeout_ms: u64,
    /// Extra margin below the close threshold a `Close` beacon may fall to
    /// before it is demoted. Zero gives a plain threshold.
    pub hysteresis_db: i32,
}

impl ProximityConfig {
    pub const DEFAULT_CLOSE_THRESHOLD_DBM: i32 = -60;
    pub const DEFAULT_PRESENCE_TIMEOUT_MS: u64 = 2000;

    pub fn new(close_threshold_dbm: i32, presence_timeout_ms: u64) -> Result<Self, ProximityError> {
        let config = Self {
            close_threshold_dbm,
            presence_timeout_ms,
            hysteresis_db: 0,
        };
        config.validate()?;
        Ok(config)
    }

    /// -70 dBm marks a wearer within roughly half a meter.
    pub fn within_half_meter() -> Self {
        Self {
            close_threshold_dbm: -70,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ProximityError> {
        if !(MIN_RSS_DBM..=MAX_RSS_DBM).contains(&self.close_threshold_dbm) {
            return Err(ProximityError::InvalidConfig(format!(
                "close threshold {} dBm outside [-127, 20]",
                self.close_threshold_dbm
            )));
        }
        if self.presence_timeout_ms == 0 {
            return Err(ProximityError::InvalidConfig(
                "presence timeout must be positive".into(),
            ));
        }
        if self.hysteresis_db < 0 {
            return Err(ProximityError::InvalidConfig("hysteresis must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Room-scale default: -60 dBm close threshold, 2 s presence timeout.
impl Default for ProximityConfig {
    fn default() -> Self {
        Self {
            close_threshold_dbm: Self::DEFAULT_CLOSE_THRESHOLD_DBM,
            presence_timeout_ms: Self::DEFAULT_PRESENCE_TIMEOUT_MS,
            hysteresis_db: 0,
        }
    }
}

/// `Close` iff `rss_dbm >= close_threshold_dbm`, otherwise `InRoom`.
pub fn classify_zone(rss_dbm: i32, config: &ProximityConfig) -> ProximityZone {
    if rss_dbm >= config.close_threshold_dbm {
        ProximityZone::Close
    } else {
        ProximityZone::InRoom
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProximityInput {
    Adv(AdvEvent),
    Tick(u64),
}

impl ProximityInput {
    pub fn t_ms(&self) -> u64 {
        match self {
            ProximityInput::Adv(a) => a.t_ms,
            ProximityInput::Tick(t) => *t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeaconPresence {
    pub last_adv_ms: Option<u64>,
    pub zone: ProximityZone,
}

impl Default for BeaconPresence {
    fn default() -> Self {
        Self {
            last_adv_ms: None,
            zone: ProximityZone::Out,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZoneChange {
    pub t_ms: u64,
    pub beacon: BeaconIdentity,
    pub from: ProximityZone,
    pub to: ProximityZone,
}

/// Per-beacon presence state machine.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityState {
    config: ProximityConfig,
    beacons: BTreeMap<BeaconIdentity, BeaconPresence>,
    clock_ms: Option<u64>,
}

impl ProximityState {
    pub fn new(config: ProximityConfig) -> Result<Self, ProximityError> {
        config.validate()?;
        Ok(Self {
            config,
            beacons: BTreeMap::new(),
            clock_ms: None,
        })
    }

    pub fn config(&self) -> &ProximityConfig {
        &self.config
    }

    /// Registers a beacon ahead of its first advertisement; it starts `Out`.
    pub fn track(&mut self, beacon: BeaconIdentity) {
        self.beacons.entry(beacon).or_default();
    }

    pub fn zone(&self, beacon: BeaconIdentity) -> ProximityZone {
        self.beacons.get(&beacon).map_or(ProximityZone::Out, |p| p.zone)
    }

    pub fn presence(&self) -> &BTreeMap<BeaconIdentity, BeaconPresence> {
        &self.beacons
    }

    /// Advances the machine by one input and reports the zone changes it
    /// caused. Inputs must arrive in nondecreasing time order.
    pub fn step(&mut self, input: ProximityInput) -> Result<Vec<ZoneChange>, ProximityError> {
        let now = input.t_ms();
        if let Some(last) = self.clock_ms {
            if now < last {
                return Err(ProximityError::TimeRegression { last, got: now });
            }
        }
        self.clock_ms = Some(now);

        let mut changes = Vec::new();
        match input {
            ProximityInput::Adv(adv) => {
                let config = self.config;
                let presence = self.beacons.entry(adv.beacon).or_default();
                let mut zone = classify_zone(adv.rss_dbm, &config);
                if presence.zone == ProximityZone::Close
                    && zone == ProximityZone::InRoom
                    && adv.rss_dbm >= config.close_threshold_dbm - config.hysteresis_db
                {
                    zone = ProximityZone::Close;
                }
                presence.last_adv_ms = Some(now);
                if presence.zone != zone {
                    changes.push(ZoneChange {
                        t_ms: now,
                        beacon: adv.beacon,
                        from: presence.zone,
                        to: zone,
                    });
                    presence.zone = zone;
                }
            }
            ProximityInput::Tick(_) => {
                for (&beacon, presence) in self.beacons.iter_mut() {
                    let expired = presence
                        .last_adv_ms
                        .is_none_or(|last| now - last >= self.config.presence_timeout_ms);
                    if expired && presence.zone != ProximityZone::Out {
                        changes.push(ZoneChange {
                            t_ms: now,
                            beacon,
                            from: presence.zone,
                            to: ProximityZone::Out,
                        });
                        presence.zone = ProximityZone::Out;
                    }
                }
            }
        }
        Ok(changes)
    }
}

/// Piecewise-constant zone history per beacon over `[0, end_ms]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZoneTimeline {
    end_ms: u64,
    segments: BTreeMap<BeaconIdentity, Vec<(u64, ProximityZone)>>,
}

impl ZoneTimeline {
    pub fn end_ms(&self) -> u64 {
        self.end_ms
    }

    pub fn beacons(&self) -> impl Iterator<Item = BeaconIdentity> + '_ {
        self.segments.keys().copied()
    }

    /// Segment start times and zones; the first segment starts at 0.
    pub fn segments(&self, beacon: BeaconIdentity) -> &[(u64, ProximityZone)] {
        self.segments.get(&beacon).map_or(&[], Vec::as_slice)
    }

    pub fn zone_sequence(&self, beacon: BeaconIdentity) -> Vec<ProximityZone> {
        self.segments(beacon).iter().map(|&(_, z)| z).collect()
    }

    pub fn transition_count(&self, beacon: BeaconIdentity) -> usize {
        self.segments(beacon).len().saturating_sub(1)
    }

    pub fn zone_at(&self, beacon: BeaconIdentity, t_ms: u64) -> ProximityZone {
        let segs = self.segments(beacon);
        let idx = segs.partition_point(|&(start, _)| start <= t_ms);
        segs[..idx].last().map_or(ProximityZone::Out, |&(_, z)| z)
    }

    /// Total milliseconds `beacon` spent in `zone`.
    pub fn time_in(&self, beacon: BeaconIdentity, zone: ProximityZone) -> u64 {
        let segs = self.segments(beacon);
        segs.iter()
            .enumerate()
            .filter(|(_, &(_, z))| z == zone)
            .map(|(i, &(start, _))| {
                let stop = segs.get(i + 1).map_or(self.end_ms, |&(t, _)| t);
                stop - start
            })
            .sum()
    }

    /// Text form: `zone <t_ms> <beacon> <zone>` for each segment start,
    /// ordered by time then beacon.
    pub fn to_lines(&self) -> String {
        let mut rows: Vec<(u64, BeaconIdentity, ProximityZone)> = self
            .segments
            .iter()
            .flat_map(|(&b, segs)| segs.iter().map(move |&(t, z)| (t, b, z)))
            .collect();
        rows.sort_by_key(|&(t, b, _)| (t, b));
        let mut out = String::new();
        for (t, b, z) in rows {
            let _ = writeln!(out, "zone {t} {b} {z}");
        }
        out
    }

    fn record(&mut self, change: &ZoneChange) {
        let segs = self
            .segments
            .entry(change.beacon)
            .or_insert_with(|| vec![(0, ProximityZone::Out)]);
        if let Some(last) = segs.last_mut() {
            if last.0 == change.t_ms {
                last.1 = change.to;
                let n = segs.len();
                if n >= 2 && segs[n - 2].1 == change.to {
                    segs.pop();
                }
                return;
            }
        }
        segs.push((change.t_ms, change.to));
    }
}

/// Replays `trace` through the state machine with clock ticks every
/// `tick_ms` (plus one at the trace end). Every advertising beacon plus any
/// in `extra_beacons` gets a timeline.
pub fn run_with_beacons(
    trace: &EventTrace,
    config: &ProximityConfig,
    tick_ms: u64,
    extra_beacons: &[BeaconIdentity],
) -> Result<ZoneTimeline, ProximityError> {
    if tick_ms == 0 {
        return Err(ProximityError::InvalidConfig("tick interval must be positive".into()));
    }
    let mut state = ProximityState::new(*config)?;
    let end_ms = trace.end_ms();
    let mut timeline = ZoneTimeline {
        end_ms,
        segments: BTreeMap::new(),
    };
    for beacon in trace.beacons().chain(extra_beacons.iter().copied()) {
        state.track(beacon);
        timeline.segments.insert(beacon, vec![(0, ProximityZone::Out)]);
    }

    let mut advs = trace.advs().iter().peekable();
    let mut next_tick = 0u64;
    loop {
        let tick = next_tick.min(end_ms);
        while let Some(adv) = advs.next_if(|a| a.t_ms <= tick) {
            for change in state.step(ProximityInput::Adv(*adv))? {
                timeline.record(&change);
            }
        }
        for change in state.step(ProximityInput::Tick(tick))? {
            timeline.record(&change);
        }
        if tick >= end_ms {
            break;
        }
        next_tick += tick_ms;
    }
    Ok(timeline)
}

pub fn run(trace: &EventTrace, config: &ProximityConfig, tick_ms: u64) -> Result<ZoneTimeline, ProximityError> {
    run_with_beacons(trace, config, tick_ms, &[])
}
