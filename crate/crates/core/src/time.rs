//! Wall-clock timestamps for scan ages.

use alloc::string::String;
use core::fmt;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

pub const SECONDS_PER_DAY: f64 = 86_400.0;
pub const SECONDS_PER_WEEK: f64 = 7.0 * SECONDS_PER_DAY;

/// Seconds since the Unix epoch. Serialized as an RFC 3339 / ISO-8601 string.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Timestamp(pub f64);

impl Timestamp {
    pub fn from_secs(secs: f64) -> Self {
        Timestamp(secs)
    }

    pub fn secs(&self) -> f64 {
        self.0
    }

    pub fn parse(text: &str) -> Result<Self, chrono::ParseError> {
        let dt = DateTime::parse_from_rfc3339(text)?;
        Ok(Timestamp(
            dt.timestamp() as f64 + f64::from(dt.timestamp_subsec_nanos()) * 1e-9,
        ))
    }

    /// Seconds elapsed from `earlier` to `self`.
    pub fn since(&self, earlier: Timestamp) -> f64 {
        self.0 - earlier.0
    }

    pub fn plus_secs(&self, secs: f64) -> Self {
        Timestamp(self.0 + secs)
    }

    pub fn to_rfc3339(&self) -> String {
        let whole = libm::floor(self.0);
        let nanos = libm::round((self.0 - whole) * 1e9).min(999_999_999.0) as u32;
        match DateTime::<Utc>::from_timestamp(whole as i64, nanos) {
            Some(dt) => dt.to_rfc3339_opts(SecondsFormat::AutoSi, true),
            None => alloc::format!("{}", self.0),
        }
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_rfc3339())
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_rfc3339())
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Timestamp::parse(&text).map_err(|e| de::Error::custom(alloc::format!("invalid timestamp {text:?}: {e}")))
    }
}
