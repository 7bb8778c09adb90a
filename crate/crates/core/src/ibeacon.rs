//! iBeacon advertisement framing.
//!
//! A beacon advertisement is 30 bytes on air: a flags AD structure followed by
//! Apple's manufacturer-specific AD structure carrying the proximity UUID,
//! major, minor and the calibrated tx power byte.
//!
//! ```text
//! 02 01 06 | 1A FF 4C 00 02 15 | UUID[16] | major[2] | minor[2] | txPower[1]
//! ```
//!
//! Deployment-wide fields (UUID, major, high bits of minor) are shared by every
//! beacon. The low nibble of `minor` identifies the wearer and the body part
//! the beacon is strapped to, see [`BeaconIdentity`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Total advertisement length in bytes.
pub const ADV_LEN: usize = 30;

/// Flags AD structure: LE General Discoverable, BR/EDR not supported.
pub const FLAGS_AD: [u8; 3] = [0x02, 0x01, 0x06];

/// Manufacturer specific AD header: length 0x1A, type 0xFF, company 0x004C
/// (little endian on air), iBeacon type 0x02, iBeacon length 0x15.
pub const MANUFACTURER_HEADER: [u8; 6] = [0x1A, 0xFF, 0x4C, 0x00, 0x02, 0x15];

pub const MIN_TX_POWER_DBM: i8 = -127;
pub const MAX_TX_POWER_DBM: i8 = 20;

const UUID_OFFSET: usize = 9;
const MAJOR_OFFSET: usize = UUID_OFFSET + 16;
const MINOR_OFFSET: usize = MAJOR_OFFSET + 2;
const TX_POWER_OFFSET: usize = MINOR_OFFSET + 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("advertisement truncated: expected {ADV_LEN} bytes, got {0}")]
    TruncatedPayload(usize),
    #[error("malformed advertisement prefix at byte {offset}: expected {expected:#04x}, found {found:#04x}")]
    MalformedPrefix { offset: usize, expected: u8, found: u8 },
    #[error("tx power {0} dBm outside [-127, 20]")]
    TxPowerOutOfRange(i8),
    #[error("person id {0} does not fit in two bits")]
    InvalidPersonId(u8),
    #[error("attachment code {0} does not fit in two bits")]
    InvalidAttachment(u8),
    #[error("unknown attachment `{0}`")]
    UnknownAttachment(String),
    #[error("malformed beacon identity `{0}`, expected <person>-<attachment>")]
    MalformedIdentity(String),
}

/// Body location a beacon is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Attachment {
    Wrist = 0,
    Ankle = 1,
    Chest = 2,
    Other = 3,
}

impl Attachment {
    pub const ALL: [Attachment; 4] = [
        Attachment::Wrist,
        Attachment::Ankle,
        Attachment::Chest,
        Attachment::Other,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<Self, CodecError> {
        Self::ALL
            .get(usize::from(code))
            .copied()
            .ok_or(CodecError::InvalidAttachment(code))
    }

    pub fn name(self) -> &'static str {
        match self {
            Attachment::Wrist => "wrist",
            Attachment::Ankle => "ankle",
            Attachment::Chest => "chest",
            Attachment::Other => "other",
        }
    }
}

impl FromStr for Attachment {
    type Err = CodecError;

    /// Accepts the lowercase name (any case) or the numeric code.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(code) = s.parse::<u8>() {
            return Self::from_code(code);
        }
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| CodecError::UnknownAttachment(s.to_string()))
    }
}

/// Who wears a beacon and where. Packs into exactly four bits:
/// `person_id` in bits 3..2, attachment code in bits 1..0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BeaconIdentity {
    person_id: u8,
    attachment: Attachment,
}

impl BeaconIdentity {
    pub const MAX_PERSONS: u8 = 4;

    pub fn new(person_id: u8, attachment: Attachment) -> Result<Self, CodecError> {
        if person_id >= Self::MAX_PERSONS {
            return Err(CodecError::InvalidPersonId(person_id));
        }
        Ok(Self { person_id, attachment })
    }

    /// Wrist beacon of `person_id`, the configuration used in the touch games.
    pub fn wrist(person_id: u8) -> Result<Self, CodecError> {
        Self::new(person_id, Attachment::Wrist)
    }

    pub fn person_id(&self) -> u8 {
        self.person_id
    }

    pub fn attachment(&self) -> Attachment {
        self.attachment
    }

    pub fn pack(&self) -> u8 {
        pack_identity(*self)
    }
}

impl fmt::Display for BeaconIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.person_id, self.attachment.name())
    }
}

impl FromStr for BeaconIdentity {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (person, attachment) = s
            .split_once('-')
            .ok_or_else(|| CodecError::MalformedIdentity(s.to_string()))?;
        let person_id = person
            .parse::<u8>()
            .map_err(|_| CodecError::MalformedIdentity(s.to_string()))?;
        Self::new(person_id, attachment.parse()?)
    }
}

pub fn pack_identity(identity: BeaconIdentity) -> u8 {
    (identity.person_id << 2) | identity.attachment.code()
}

/// Inverse of [`pack_identity`]. Only the low nibble of `nibble` is read.
pub fn unpack_identity(nibble: u8) -> BeaconIdentity {
    let nibble = nibble & 0x0F;
    BeaconIdentity {
        person_id: nibble >> 2,
        attachment: Attachment::ALL[usize::from(nibble & 0b11)],
    }
}

/// Decoded iBeacon fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AdvertisementPayload {
    proximity_uuid: [u8; 16],
    major: u16,
    minor: u16,
    measured_tx_power_dbm: i8,
}

impl AdvertisementPayload {
    pub fn new(
        proximity_uuid: [u8; 16],
        major: u16,
        minor: u16,
        measured_tx_power_dbm: i8,
    ) -> Result<Self, CodecError> {
        if !(MIN_TX_POWER_DBM..=MAX_TX_POWER_DBM).contains(&measured_tx_power_dbm) {
            return Err(CodecError::TxPowerOutOfRange(measured_tx_power_dbm));
        }
        Ok(Self {
            proximity_uuid,
            major,
            minor,
            measured_tx_power_dbm,
        })
    }

    /// Builds a payload whose minor keeps the shared high bits of `minor_base`
    /// and carries `identity` in the low nibble.
    pub fn for_identity(
        proximity_uuid: [u8; 16],
        major: u16,
        minor_base: u16,
        identity: BeaconIdentity,
        measured_tx_power_dbm: i8,
    ) -> Result<Self, CodecError> {
        let minor = (minor_base & !0x000F) | u16::from(identity.pack());
        Self::new(proximity_uuid, major, minor, measured_tx_power_dbm)
    }

    pub fn proximity_uuid(&self) -> [u8; 16] {
        self.proximity_uuid
    }

    pub fn major(&self) -> u16 {
        self.major
    }

    pub fn minor(&self) -> u16 {
        self.minor
    }

    pub fn measured_tx_power_dbm(&self) -> i8 {
        self.measured_tx_power_dbm
    }

    /// Wearer identity from the low nibble of `minor`.
    pub fn identity(&self) -> BeaconIdentity {
        unpack_identity((self.minor & 0x000F) as u8)
    }
}

pub fn encode_advertisement(payload: &AdvertisementPayload) -> [u8; ADV_LEN] {
    let mut out = [0u8; ADV_LEN];
    out[..3].copy_from_slice(&FLAGS_AD);
    out[3..UUID_OFFSET].copy_from_slice(&MANUFACTURER_HEADER);
    out[UUID_OFFSET..MAJOR_OFFSET].copy_from_slice(&payload.proximity_uuid);
    out[MAJOR_OFFSET..MINOR_OFFSET].copy_from_slice(&payload.major.to_be_bytes());
    out[MINOR_OFFSET..TX_POWER_OFFSET].copy_from_slice(&payload.minor.to_be_bytes());
    out[TX_POWER_OFFSET] = payload.measured_tx_power_dbm as u8;
    out
}

/// Decodes the first [`ADV_LEN`] bytes of `bytes`; anything after is ignored.
pub fn decode_advertisement(bytes: &[u8]) -> Result<AdvertisementPayload, CodecError> {
    if bytes.len() < ADV_LEN {
        return Err(CodecError::TruncatedPayload(bytes.len()));
    }
    let prefix = FLAGS_AD.iter().chain(MANUFACTURER_HEADER.iter());
    for (offset, (&expected, &found)) in prefix.zip(bytes).enumerate() {
        if expected != found {
            return Err(CodecError::MalformedPrefix {
                offset,
                expected,
                found,
            });
        }
    }

    let mut proximity_uuid = [0u8; 16];
    proximity_uuid.copy_from_slice(&bytes[UUID_OFFSET..MAJOR_OFFSET]);
    let major = u16::from_be_bytes([bytes[MAJOR_OFFSET], bytes[MAJOR_OFFSET + 1]]);
    let minor = u16::from_be_bytes([bytes[MINOR_OFFSET], bytes[MINOR_OFFSET + 1]]);
    AdvertisementPayload::new(proximity_uuid, major, minor, bytes[TX_POWER_OFFSET] as i8)
}
