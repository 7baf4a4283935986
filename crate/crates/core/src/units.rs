// SPDX-License-Identifier: Apache-2.0

//! Unit constants and parsing of unit-suffixed quantities (`100TB`, `900s`).

use std::str::FromStr;

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use thiserror::Error;

pub const KB: u64 = 1_000;
pub const MB: u64 = 1_000_000;
pub const GB: u64 = 1_000_000_000;
pub const TB: u64 = 1_000_000_000_000;

pub const KIB: u64 = 1 << 10;
pub const MIB: u64 = 1 << 20;
pub const GIB: u64 = 1 << 30;
pub const TIB: u64 = 1 << 40;

/// Thirty days.
pub const SECONDS_PER_MONTH: u64 = 2_592_000;
pub const HOURS_PER_MONTH: u64 = 720;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitSystem {
    /// Powers of 1000. This is what the pricing and shuffle arithmetic use.
    #[default]
    Decimal,
    /// Powers of 1024.
    Binary,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UnitError {
    #[error("invalid quantity `{0}`")]
    Malformed(String),
    #[error("unknown unit `{unit}` in `{input}`")]
    UnknownUnit { input: String, unit: String },
    #[error("quantity `{0}` is negative or out of range")]
    OutOfRange(String),
}

fn split_number(input: &str) -> Result<(Decimal, String), UnitError> {
    let trimmed = input.trim();
    let idx = trimmed
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '_' || c == '-' || c == '+'))
        .unwrap_or(trimmed.len());
    let (num, unit) = trimmed.split_at(idx);
    let num = num.replace('_', "");
    if num.is_empty() {
        return Err(UnitError::Malformed(input.to_string()));
    }
    let value =
        Decimal::from_str(&num).map_err(|_| UnitError::Malformed(input.to_string()))?;
    if value.is_sign_negative() && !value.is_zero() {
        return Err(UnitError::OutOfRange(input.to_string()));
    }
    Ok((value, unit.trim().to_string()))
}

/// Parses a byte size such as `100TB`, `3GB`, `4MB` or `512`.
///
/// Suffixes `KB/MB/GB/TB` follow `system`; explicit `KiB/MiB/GiB/TiB` are
/// always binary.
pub fn parse_bytes(input: &str, system: UnitSystem) -> Result<u64, UnitError> {
    let (value, unit) = split_number(input)?;
    let (dec_mult, bin_mult) = match unit.to_ascii_lowercase().as_str() {
        "" | "b" => (1, 1),
        "k" | "kb" => (KB, KIB),
        "m" | "mb" => (MB, MIB),
        "g" | "gb" => (GB, GIB),
        "t" | "tb" => (TB, TIB),
        "kib" => (KIB, KIB),
        "mib" => (MIB, MIB),
        "gib" => (GIB, GIB),
        "tib" => (TIB, TIB),
        _ => {
            return Err(UnitError::UnknownUnit {
                input: input.to_string(),
                unit,
            })
        }
    };
    let mult = match system {
        UnitSystem::Decimal => dec_mult,
        UnitSystem::Binary => bin_mult,
    };
    (value * Decimal::from(mult))
        .ceil()
        .to_u64()
        .ok_or_else(|| UnitError::OutOfRange(input.to_string()))
}

/// Parses a duration such as `900s`, `100ms`, `15m`, `1h` or a bare number of seconds.
pub fn parse_seconds(input: &str) -> Result<f64, UnitError> {
    let (value, unit) = split_number(input)?;
    let mult = match unit.to_ascii_lowercase().as_str() {
        "" | "s" | "sec" => Decimal::ONE,
        "ms" => Decimal::new(1, 3),
        "us" => Decimal::new(1, 6),
        "m" | "min" => Decimal::from(60),
        "h" => Decimal::from(3600),
        "d" => Decimal::from(86_400),
        _ => {
            return Err(UnitError::UnknownUnit {
                input: input.to_string(),
                unit,
            })
        }
    };
    (value * mult)
        .to_f64()
        .ok_or_else(|| UnitError::OutOfRange(input.to_string()))
}

pub fn bytes_to_gb(bytes: u64) -> Decimal {
    Decimal::from(bytes) / Decimal::from(GB)
}
