//! Proximity, touch and toucher attribution from BLE advertisement RSS.
//!
//! A robot carries a scanning BLE central; people wear iBeacon wristbands.
//! Each received advertisement yields a sender identity and an RSS value.
//! From that stream alone this crate derives:
//!
//! * proximity zones (`Close` / `InRoom` / `Out`) per wearer, [`proximity`]
//! * touch events from an RSS threshold filter, [`touch`]
//! * which wearer is touching, by raw or windowed-max RSS, [`attribution`]
//!
//! [`simulator`] generates seeded synthetic traces with path loss, shadowing,
//! occlusion dips and packet loss so all of the above can be evaluated
//! without hardware.

pub mod attribution;
pub mod cli;
pub mod ibeacon;
pub mod plot;
pub mod proximity;
pub mod scenario;
pub mod simulator;
pub mod touch;
pub mod trace;

pub use ibeacon::{AdvertisementPayload, Attachment, BeaconIdentity};
pub use proximity::{ProximityConfig, ProximityZone};
pub use trace::{parse_trace, serialize_trace, AdvEvent, EventTrace, GroundTruthTouch, RobotFrame};
