//! Electrode label parsing.
//!
//! Index matching compares two pieces of a label: the first character of its
//! alphabetic prefix (a hemisphere proxy, e.g. `MST1` → `M`) and the integer
//! value of its trailing digit run (the electrode number, `MST1` → 1).
//! Labels are normalized to uppercase with surrounding whitespace stripped so
//! matching is case-insensitive everywhere downstream.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Parsed electrode label.
///
/// `prefix` is the maximal leading run of alphabetic characters (may be
/// empty); `number` is the integer value of the maximal trailing digit run
/// with leading zeros dropped (`LAT07` → 7), absent when the label does not
/// end in a digit (`EKG`, `LAT2B`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelId {
    raw: String,
    prefix: String,
    number: Option<u64>,
}

impl Serialize for ChannelId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.raw)
    }
}

impl<'de> Deserialize<'de> for ChannelId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        ChannelId::parse(&raw).map_err(D::Error::custom)
    }
}

impl ChannelId {
    /// Parse a raw electrode label.
    ///
    /// Errors when the label is empty after trimming.
    pub fn parse(raw: &str) -> Result<Self> {
        let normalized = raw.trim().to_uppercase();
        if normalized.is_empty() {
            return Err(Error::EmptyChannelLabel);
        }
        let prefix: String = normalized
            .chars()
            .take_while(|c| c.is_alphabetic())
            .collect();
        let trailing_digits: Vec<char> = normalized
            .chars()
            .rev()
            .take_while(|c| c.is_ascii_digit())
            .collect();
        let number = if trailing_digits.is_empty() {
            None
        } else {
            let digits: String = trailing_digits.into_iter().rev().collect();
            // Digit runs beyond u64 range are treated as unnumbered.
            digits.parse::<u64>().ok()
        };
        Ok(ChannelId {
            raw: normalized,
            prefix,
            number,
        })
    }

    /// Normalized label (uppercase, trimmed).
    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// Leading alphabetic run; empty when the label starts with a non-letter.
    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    /// First character of the prefix, used as the hemisphere proxy.
    pub fn first_char(&self) -> Option<char> {
        self.prefix.chars().next()
    }

    /// Electrode number from the trailing digit run.
    pub fn number(&self) -> Option<u64> {
        self.number
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}
