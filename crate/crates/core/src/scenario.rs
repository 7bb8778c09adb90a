//! Scenario files: flat `key = value` text describing one simulation.
//!
//! ```text
//! # two wristbands, random turn-taking
//! scenario = game
//! duration_ms = 120000
//! rng_seed = 7
//! touches = 2000-2600:1, 5000-5400:2
//! ```
//!
//! Every key is optional except `scenario`. Lists are comma separated.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::simulator::{
    random_touch_script, simulate_recede, simulate_two_person_game, GameParams, RecedeParams, ScenarioConfig, SimError,
    Simulation,
};
use crate::trace::{EventTrace, GroundTruthTouch};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    InvalidValue { line: usize, key: String, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioKind {
    Recede(RecedeParams),
    /// `script = None` draws a random turn-taking script from the seed.
    Game {
        params: GameParams,
        script: Option<Vec<GroundTruthTouch>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub config: ScenarioConfig,
}

impl Scenario {
    pub fn simulate(&self) -> Result<Simulation, SimError> {
        match &self.kind {
            ScenarioKind::Recede(params) => simulate_recede(&self.config, params),
            ScenarioKind::Game { params, script } => {
                let script = match script {
                    Some(s) => s.clone(),
                    None => random_touch_script(self.config.duration_ms, self.config.rng_seed),
                };
                simulate_two_person_game(&self.config, params, &script)
            }
        }
    }

    pub fn generate(&self) -> Result<EventTrace, SimError> {
        self.simulate().map(|s| s.trace)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.config.rng_seed = seed;
        self
    }
}

const KEYS: &[&str] = &[
    "scenario",
    "adv_interval_ms",
    "jitter_ms",
    "frame_interval_ms",
    "packet_loss_rate",
    "frame_loss_rate",
    "tx_power_dbm",
    "sensitivity_dbm",
    "duration_ms",
    "rng_seed",
    "rss_at_1m_dbm",
    "exponent_n",
    "shadowing_sigma_db",
    "dip_probability_per_adv",
    "dip_attenuation_db",
    "dip_min_duration_ms",
    "dip_max_duration_ms",
    "speed_m_per_s",
    "start_m",
    "ambient_m",
    "contact_m",
    "approach_ms",
    "touches",
];

struct Entries {
    values: BTreeMap<&'static str, (usize, String)>,
}

impl Entries {
    fn get<T: std::str::FromStr>(&self, key: &'static str, target: &mut T) -> Result<(), ScenarioError>
    where
        T::Err: std::fmt::Display,
    {
        if let Some((line, raw)) = self.values.get(key) {
            *target = raw.parse().map_err(|e: T::Err| ScenarioError::InvalidValue {
                line: *line,
                key: key.to_string(),
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    fn list<T: std::str::FromStr>(&self, key: &'static str) -> Result<Option<Vec<T>>, ScenarioError>
    where
        T::Err: std::fmt::Display,
    {
        let Some((line, raw)) = self.values.get(key) else {
            return Ok(None);
        };
        raw.split(',')
            .map(|item| {
                item.trim().parse().map_err(|e: T::Err| ScenarioError::InvalidValue {
                    line: *line,
                    key: key.to_string(),
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    fn invalid(&self, key: &'static str, message: impl Into<String>) -> ScenarioError {
        ScenarioError::InvalidValue {
            line: self.values.get(key).map_or(0, |(l, _)| *l),
            key: key.to_string(),
            message: message.into(),
        }
    }
}

fn parse_touch(item: &str) -> Result<GroundTruthTouch, String> {
    let (span, person) = item
        .split_once(':')
        .ok_or_else(|| format!("`{item}` is not <start>-<end>:<person>"))?;
    let (start, end) = span
        .split_once('-')
        .ok_or_else(|| format!("`{span}` is not <start>-<end>"))?;
    let num = |s: &str| s.trim().parse::<u64>().map_err(|e| format!("`{s}`: {e}"));
    Ok(GroundTruthTouch {
        start_ms: num(start)?,
        end_ms: num(end)?,
        person_id: person.trim().parse().map_err(|e| format!("`{person}`: {e}"))?,
    })
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut values = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ScenarioError::Syntax {
            line,
            message: format!("expected `key = value`, found `{content}`"),
        })?;
        let key = key.trim();
        let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
            return Err(ScenarioError::UnknownKey {
                line,
                key: key.to_string(),
            });
        };
        if values.insert(known, (line, value.trim().to_string())).is_some() {
            return Err(ScenarioError::Syntax {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    let e = Entries { values };

    let mut config = ScenarioConfig::default();
    e.get("adv_interval_ms", &mut config.adv_interval_ms)?;
    e.get("jitter_ms", &mut config.jitter_ms)?;
    e.get("frame_interval_ms", &mut config.frame_interval_ms)?;
    e.get("packet_loss_rate", &mut config.packet_loss_rate)?;
    e.get("frame_loss_rate", &mut config.frame_loss_rate)?;
    if let Some(tx) = e.list("tx_power_dbm")? {
        config.tx_power_dbm = tx;
    }
    e.get("sensitivity_dbm", &mut config.sensitivity_dbm)?;
    e.get("duration_ms", &mut config.duration_ms)?;
    e.get("rng_seed", &mut config.rng_seed)?;
    e.get("rss_at_1m_dbm", &mut config.path_loss.rss_at_1m_dbm)?;
    e.get("exponent_n", &mut config.path_loss.exponent_n)?;
    e.get("shadowing_sigma_db", &mut config.path_loss.shadowing_sigma_db)?;
    e.get("dip_probability_per_adv", &mut config.occlusion.dip_probability_per_adv)?;
    e.get("dip_attenuation_db", &mut config.occlusion.dip_attenuation_db)?;
    e.get("dip_min_duration_ms", &mut config.occlusion.dip_min_duration_ms)?;
    e.get("dip_max_duration_ms", &mut config.occlusion.dip_max_duration_ms)?;

    let mut kind_name = String::new();
    if !e.values.contains_key("scenario") {
        return Err(ScenarioError::MissingKey("scenario"));
    }
    e.get("scenario", &mut kind_name)?;

    let kind = match kind_name.as_str() {
        "recede" => {
            let mut params = RecedeParams::default();
            e.get("speed_m_per_s", &mut params.speed_m_per_s)?;
            e.get("start_m", &mut params.start_m)?;
            ScenarioKind::Recede(params)
        }
        "game" => {
            let mut params = GameParams::default();
            if let Some(ambient) = e.list::<f64>("ambient_m")? {
                params.ambient_m = match *ambient.as_slice() {
                    [d] => [d, d],
                    [a, b] => [a, b],
                    _ => return Err(e.invalid("ambient_m", "expected one or two distances")),
                };
            }
            e.get("contact_m", &mut params.contact_m)?;
            e.get("approach_ms", &mut params.approach_ms)?;
            let script = match e.values.get("touches") {
                None => None,
                Some((_, raw)) if raw == "random" => None,
                Some((_, raw)) if raw.is_empty() => Some(Vec::new()),
                Some((_, raw)) => Some(
                    raw.split(',')
                        .map(parse_touch)
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|m| e.invalid("touches", m))?,
                ),
            };
            ScenarioKind::Game { params, script }
        }
        other => {
            return Err(e.invalid(
                "scenario",
                format!("unknown scenario `{other}`, expected recede or game"),
            ))
        }
    };

    config.validate()?;
    Ok(Scenario { kind, config })
}
