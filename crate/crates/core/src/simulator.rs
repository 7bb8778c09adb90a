//! Seeded synthetic traces.
//!
//! RSS follows a log-distance path-loss model with Gaussian shadowing.
//! Hand or body occlusion is a run of additive attenuation that only ever
//! lowers the received value. Advertisements are jittered around a fixed
//! interval and dropped at a configurable packet loss rate or when they fall
//! below receiver sensitivity. Everything is driven by one ChaCha stream, so
//! a config plus a seed pins the trace down to the byte.

// Negated comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::ibeacon::{Attachment, BeaconIdentity};
use crate::trace::{AdvEvent, EventTrace, GroundTruthTouch, RobotFrame, TraceError, MAX_RSS_DBM, MIN_RSS_DBM};

/// Wearers in the two-person game.
pub const GAME_PERSONS: [u8; 2] = [1, 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("distance must be positive, got {0} m")]
    NonpositiveDistance(f64),
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("touch script intervals overlap: [{}, {}) and [{}, {})", .first.0, .first.1, .second.0, .second.1)]
    Overlap { first: (u64, u64), second: (u64, u64) },
    #[error(transparent)]
    Trace(#[from] TraceError),
}

fn invalid(msg: impl Into<String>) -> SimError {
    SimError::InvalidConfig(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    /// Expected RSS at one meter for a 0 dBm transmitter.
    pub rss_at_1m_dbm: f64,
    pub exponent_n: f64,
    pub shadowing_sigma_db: f64,
}

impl Default for PathLossModel {
    fn default() -> Self {
        Self {
            rss_at_1m_dbm: -59.0,
            exponent_n: 2.0,
            shadowing_sigma_db: 4.0,
        }
    }
}

impl PathLossModel {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.exponent_n >= 0.0) {
            return Err(invalid("path loss exponent must be nonnegative"));
        }
        if !(self.shadowing_sigma_db >= 0.0) {
            return Err(invalid("shadowing sigma must be nonnegative"));
        }
        if !self.rss_at_1m_dbm.is_finite() {
            return Err(invalid("rss at 1 m must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OcclusionModel {
    /// Chance that a toucher advertisement starts a new dip.
    pub dip_probability_per_adv: f64,
    pub dip_attenuation_db: f64,
    pub dip_min_duration_ms: u64,
    pub dip_max_duration_ms: u64,
}

impl Default for OcclusionModel {
    fn default() -> Self {
        Self {
            dip_probability_per_adv: 0.1,
            dip_attenuation_db: 15.0,
            dip_min_duration_ms: 100,
            dip_max_duration_ms: 300,
        }
    }
}

impl OcclusionModel {
    pub fn none() -> Self {
        Self {
            dip_probability_per_adv: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(0.0..=1.0).contains(&self.dip_probability_per_adv) {
            return Err(invalid("dip probability must be within [0, 1]"));
        }
        if !(self.dip_attenuation_db >= 0.0) {
            return Err(invalid("dip attenuation must be nonnegative"));
        }
        if self.dip_min_duration_ms == 0 || self.dip_min_duration_ms > self.dip_max_duration_ms {
            return Err(invalid("dip durations must be positive with min <= max"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub adv_interval_ms: u64,
    /// Maximum deviation of an advertisement from its nominal slot.
    pub jitter_ms: u64,
    pub frame_interval_ms: u64,
    pub packet_loss_rate: f64,
    pub frame_loss_rate: f64,
    /// Transmit power per beacon, in scenario beacon order. A missing entry
    /// reuses the first one.
    pub tx_power_dbm: Vec<i32>,
    /// Advertisements arriving weaker than this are not received.
    pub sensitivity_dbm: i32,
    pub duration_ms: u64,
    pub rng_seed: u64,
    pub path_loss: PathLossModel,
    pub occlusion: OcclusionModel,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            adv_interval_ms: 100,
            jitter_ms: 10,
            frame_interval_ms: 50,
            packet_loss_rate: 0.05,
            frame_loss_rate: 0.0,
            tx_power_dbm: vec![0],
            sensitivity_dbm: -93,
            duration_ms: 60_000,
            rng_seed: 0,
            path_loss: PathLossModel::default(),
            occlusion: OcclusionModel::default(),
        }
    }
}

impl ScenarioConfig {
    /// No shadowing, loss, jitter or occlusion.
    pub fn noise_free() -> Self {
        Self {
            jitter_ms: 0,
            packet_loss_rate: 0.0,
            path_loss: PathLossModel {
                shadowing_sigma_db: 0.0,
                ..PathLossModel::default()
            },
            occlusion: OcclusionModel::none(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.adv_interval_ms == 0 || self.frame_interval_ms == 0 {
            return Err(invalid("intervals must be positive"));
        }
        if 2 * self.jitter_ms >= self.adv_interval_ms {
            return Err(invalid("jitter must be below half the advertisement interval"));
        }
        for (name, rate) in [
            ("packet_loss_rate", self.packet_loss_rate),
            ("frame_loss_rate", self.frame_loss_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(invalid(format!("{name} must be within [0, 1]")));
            }
        }
        for &tx in &self.tx_power_dbm {
            if !(MIN_RSS_DBM..=MAX_RSS_DBM).contains(&tx) {
                return Err(invalid(format!("tx power {tx} dBm outside [-127, 20]")));
            }
        }
        if self.duration_ms == 0 {
            return Err(invalid("duration must be positive"));
        }
        self.path_loss.validate()?;
        self.occlusion.validate()
    }

    pub fn tx_power_for(&self, beacon_index: usize) -> i32 {
        self.tx_power_dbm
            .get(beacon_index)
            .or_else(|| self.tx_power_dbm.first())
            .copied()
            .unwrap_or(0)
    }
}

/// `rss_at_1m - 10 n log10(d)`.
pub fn expected_rss(distance_m: f64, model: &PathLossModel) -> Result<f64, SimError> {
    if !(distance_m > 0.0) {
        return Err(SimError::NonpositiveDistance(distance_m));
    }
    Ok(model.rss_at_1m_dbm - 10.0 * model.exponent_n * distance_m.log10())
}

/// Draws one reception of an advertisement whose noise-free RSS is
/// `expected_dbm`. `None` means lost or below sensitivity.
pub fn sample_adv<R: Rng + ?Sized>(
    expected_dbm: f64,
    occluded: bool,
    config: &ScenarioConfig,
    rng: &mut R,
) -> Option<i32> {
    let lost = rng.random::<f64>() < config.packet_loss_rate;
    let sigma = config.path_loss.shadowing_sigma_db;
    let shadowing = if sigma > 0.0 {
        Normal::new(0.0, sigma).map_or(0.0, |n| n.sample(rng))
    } else {
        0.0
    };
    if lost {
        return None;
    }
    let dip = if occluded {
        config.occlusion.dip_attenuation_db
    } else {
        0.0
    };
    let rss =
        ((expected_dbm + shadowing - dip).round() as i64).clamp(i64::from(MIN_RSS_DBM), i64::from(MAX_RSS_DBM)) as i32;
    (rss >= config.sensitivity_dbm).then_some(rss)
}

/// What the simulator did for every scheduled advertisement, received or not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedAdv {
    pub t_ms: u64,
    pub beacon: BeaconIdentity,
    pub expected_dbm: f64,
    pub occluded: bool,
    pub rss_dbm: Option<i32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub trace: EventTrace,
    pub log: Vec<SimulatedAdv>,
}

fn jittered<R: Rng + ?Sized>(nominal: u64, config: &ScenarioConfig, rng: &mut R) -> u64 {
    if config.jitter_ms == 0 {
        return nominal;
    }
    let j = config.jitter_ms as i64;
    let offset = rng.random_range(-j..=j);
    (nominal as i64 + offset).clamp(0, config.duration_ms as i64 - 1) as u64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecedeParams {
    pub speed_m_per_s: f64,
    pub start_m: f64,
}

impl Default for RecedeParams {
    fn default() -> Self {
        Self {
            speed_m_per_s: 0.05,
            start_m: 0.2,
        }
    }
}

/// Beacons carried away from the receiver at constant speed, one beacon per
/// `tx_power_dbm` entry (persons 0, 1, ...). All beacons share the same
/// nominal schedule, so equal times mean equal distances.
pub fn simulate_recede(config: &ScenarioConfig, params: &RecedeParams) -> Result<Simulation, SimError> {
    config.validate()?;
    if !(params.speed_m_per_s > 0.0) || !(params.start_m > 0.0) {
        return Err(invalid("recede speed and start distance must be positive"));
    }
    let beacon_count = config.tx_power_dbm.len().max(1);
    if beacon_count > usize::from(BeaconIdentity::MAX_PERSONS) {
        return Err(invalid("at most four recede beacons"));
    }
    let beacons: Vec<BeaconIdentity> = (0..beacon_count as u8)
        .map(|p| BeaconIdentity::new(p, Attachment::Wrist))
        .collect::<Result<_, _>>()
        .map_err(|e| invalid(e.to_string()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut log = Vec::new();
    let mut nominal = 0;
    while nominal < config.duration_ms {
        for (i, &beacon) in beacons.iter().enumerate() {
            let t_ms = jittered(nominal, config, &mut rng);
            let distance = params.start_m + params.speed_m_per_s * t_ms as f64 / 1000.0;
            let expected = expected_rss(distance, &config.path_loss)? + f64::from(config.tx_power_for(i));
            let rss_dbm = sample_adv(expected, false, config, &mut rng);
            log.push(SimulatedAdv {
                t_ms,
                beacon,
                expected_dbm: expected,
                occluded: false,
                rss_dbm,
            });
        }
        nominal += config.adv_interval_ms;
    }
    finish(log, vec![], vec![], config.duration_ms)
}

pub fn generate_recede_scenario(config: &ScenarioConfig, params: &RecedeParams) -> Result<EventTrace, SimError> {
    simulate_recede(config, params).map(|s| s.trace)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameParams {
    /// Resting distance of persons 1 and 2 from the robot.
    pub ambient_m: [f64; 2],
    pub contact_m: f64,
    /// Time spent moving the hand between ambient and contact range around
    /// each touch.
    pub approach_ms: u64,
}

impl Default for GameParams {
    fn default() -> Self {
        Self {
            ambient_m: [0.6, 0.8],
            contact_m: 0.05,
            approach_ms: 300,
        }
    }
}

impl GameParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.ambient_m.iter().chain([&self.contact_m]).any(|&d| !(d > 0.0)) {
            return Err(invalid("distances must be positive"));
        }
        Ok(())
    }

    fn distance(&self, person_idx: usize, t_ms: u64, own_touches: &[GroundTruthTouch]) -> f64 {
        let ambient = self.ambient_m[person_idx];
        let mut best = ambient;
        for touch in own_touches {
            let d = if touch.contains(t_ms) {
                self.contact_m
            } else {
                let away = if t_ms < touch.start_ms {
                    touch.start_ms - t_ms
                } else {
                    t_ms - touch.end_ms + 1
                };
                if away >= self.approach_ms {
                    continue;
                }
                let frac = away as f64 / self.approach_ms as f64;
                self.contact_m + frac * (ambient - self.contact_m)
            };
            best = best.min(d);
        }
        best
    }
}

fn validate_script(script: &[GroundTruthTouch], duration_ms: u64) -> Result<Vec<GroundTruthTouch>, SimError> {
    let mut sorted = script.to_vec();
    sorted.sort_by_key(|t| t.start_ms);
    for touch in &sorted {
        if touch.start_ms >= touch.end_ms {
            return Err(invalid(format!("empty touch [{}, {})", touch.start_ms, touch.end_ms)));
        }
        if touch.end_ms > duration_ms {
            return Err(invalid(format!("touch ending at {} exceeds duration", touch.end_ms)));
        }
        if !GAME_PERSONS.contains(&touch.person_id) {
            return Err(invalid(format!("touch by unknown person {}", touch.person_id)));
        }
    }
    for pair in sorted.windows(2) {
        if pair[0].end_ms > pair[1].start_ms {
            return Err(SimError::Overlap {
                first: (pair[0].start_ms, pair[0].end_ms),
                second: (pair[1].start_ms, pair[1].end_ms),
            });
        }
    }
    Ok(sorted)
}

/// Two wristband wearers (persons 1 and 2) taking turns touching the robot
/// according to `script`.
pub fn simulate_two_person_game(
    config: &ScenarioConfig,
    params: &GameParams,
    script: &[GroundTruthTouch],
) -> Result<Simulation, SimError> {
    config.validate()?;
    params.validate()?;
    let script = validate_script(script, config.duration_ms)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let sensor_masks: Vec<u8> = script.iter().map(|_| rng.random_range(1..16u8)).collect();
    let phases: Vec<u64> = GAME_PERSONS
        .iter()
        .map(|_| rng.random_range(0..config.adv_interval_ms))
        .collect();

    let mut log = Vec::new();
    for (idx, &person) in GAME_PERSONS.iter().enumerate() {
        let beacon = BeaconIdentity::wrist(person).map_err(|e| invalid(e.to_string()))?;
        let own: Vec<GroundTruthTouch> = script.iter().filter(|t| t.person_id == person).copied().collect();
        let tx = f64::from(config.tx_power_for(idx));
        let mut dip_until = 0u64;
        let mut last_clean = true;
        let mut nominal = phases[idx];
        while nominal < config.duration_ms {
            let t_ms = jittered(nominal, config, &mut rng);
            let touching = own.iter().any(|t| t.contains(t_ms));
            if touching
                && t_ms >= dip_until
                && last_clean
                && rng.random::<f64>() < config.occlusion.dip_probability_per_adv
            {
                let len = rng.random_range(config.occlusion.dip_min_duration_ms..=config.occlusion.dip_max_duration_ms);
                dip_until = t_ms + len;
            }
            let occluded = touching && t_ms < dip_until;
            let expected = expected_rss(params.distance(idx, t_ms, &own), &config.path_loss)? + tx;
            let rss_dbm = sample_adv(expected, occluded, config, &mut rng);
            last_clean = !occluded && rss_dbm.is_some();
            log.push(SimulatedAdv {
                t_ms,
                beacon,
                expected_dbm: expected,
                occluded,
                rss_dbm,
            });
            nominal += config.adv_interval_ms;
        }
    }

    let mut frames = Vec::new();
    let mut t_ms = 0;
    while t_ms < config.duration_ms {
        let dropped = rng.random::<f64>() < config.frame_loss_rate;
        if !dropped {
            let mask = script
                .iter()
                .position(|touch| touch.contains(t_ms))
                .map_or(0, |i| sensor_masks[i]);
            frames.push(RobotFrame {
                t_ms,
                touch_sensors: [mask & 1 != 0, mask & 2 != 0, mask & 4 != 0, mask & 8 != 0],
            });
        }
        t_ms += config.frame_interval_ms;
    }

    finish(log, frames, script, config.duration_ms)
}

pub fn generate_two_person_game(
    config: &ScenarioConfig,
    params: &GameParams,
    script: &[GroundTruthTouch],
) -> Result<EventTrace, SimError> {
    simulate_two_person_game(config, params, script).map(|s| s.trace)
}

fn finish(
    mut log: Vec<SimulatedAdv>,
    frames: Vec<RobotFrame>,
    truths: Vec<GroundTruthTouch>,
    duration_ms: u64,
) -> Result<Simulation, SimError> {
    log.sort_by_key(|a| (a.t_ms, a.beacon));
    let advs = log
        .iter()
        .filter_map(|a| {
            a.rss_dbm.map(|rss_dbm| AdvEvent {
                t_ms: a.t_ms,
                beacon: a.beacon,
                rss_dbm,
            })
        })
        .collect();
    let trace = EventTrace::new(advs, frames, truths)?.with_end(duration_ms)?;
    Ok(Simulation { trace, log })
}

/// Alternating-turn touch script: random gaps and touch lengths, random
/// toucher, leaving a quiet second at both ends of the session.
pub fn random_touch_script(duration_ms: u64, seed: u64) -> Vec<GroundTruthTouch> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_70c4);
    let mut script = Vec::new();
    let mut t = 1000u64;
    loop {
        let start_ms = t + rng.random_range(800..=3000u64);
        let end_ms = start_ms + rng.random_range(250..=1500u64);
        if end_ms + 1000 > duration_ms {
            break;
        }
        script.push(GroundTruthTouch {
            start_ms,
            end_ms,
            person_id: GAME_PERSONS[rng.random_range(0..GAME_PERSONS.len())],
        });
        t = end_ms;
    }
    script
}
