// SPDX-License-Identifier: Apache-2.0

//! Exact decimal currency and quantity helpers.
//!
//! Unit prices in this domain go well below one micro-dollar ($2e-7 per
//! billing unit, $4e-7 per read request), so amounts are carried as exact
//! decimals at full precision. Reports round to micro-dollars (JSON) or
//! cents (tables), half away from zero.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};
use std::str::FromStr;

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::{Decimal, RoundingStrategy};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Converts a float to the decimal it was most likely written as.
///
/// Goes through the shortest round-trip representation, so `0.1` becomes
/// exactly `0.1` rather than `0.1000000000000000055...`.
pub fn dec(value: f64) -> Decimal {
    if !value.is_finite() {
        return Decimal::ZERO;
    }
    Decimal::from_str(&format!("{value}"))
        .or_else(|_| Decimal::from_scientific(&format!("{value:e}")))
        .unwrap_or_else(|_| Decimal::from_f64_retain(value).unwrap_or(Decimal::ZERO))
}

pub fn dec_u64(value: u64) -> Decimal {
    Decimal::from(value)
}

/// Rounds a non-negative decimal up to the next integer.
pub fn ceil_to_u64(value: Decimal) -> u64 {
    value.ceil().to_u64().unwrap_or(u64::MAX)
}

/// An amount of US dollars.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Usd(Decimal);

impl Usd {
    pub const ZERO: Usd = Usd(Decimal::ZERO);

    pub fn new(amount: Decimal) -> Self {
        Usd(amount)
    }

    pub fn from_f64(amount: f64) -> Self {
        Usd(dec(amount))
    }

    pub fn amount(self) -> Decimal {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_negative(self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn round_dp(self, dp: u32) -> Usd {
        Usd(self
            .0
            .round_dp_with_strategy(dp, RoundingStrategy::MidpointAwayFromZero))
    }

    pub fn round_micros(self) -> Usd {
        self.round_dp(6)
    }

    pub fn round_cents(self) -> Usd {
        self.round_dp(2)
    }

    /// Whole micro-dollars, rounded half away from zero.
    pub fn micros(self) -> i128 {
        (self.round_micros().0 * Decimal::from(1_000_000))
            .to_i128()
            .unwrap_or(i128::MAX)
    }

    pub fn from_micros(micros: i128) -> Self {
        Usd(Decimal::from_i128_with_scale(micros, 6).normalize())
    }

    /// Fixed-point rendering with `dp` decimals, or the exact value when `dp` is `None`.
    pub fn format(self, dp: Option<u32>) -> String {
        match dp {
            Some(dp) => format!("{:.*}", dp as usize, self.round_dp(dp).0),
            None => self.0.normalize().to_string(),
        }
    }
}

impl fmt::Display for Usd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${}", self.0.normalize())
    }
}

impl Add for Usd {
    type Output = Usd;
    fn add(self, rhs: Usd) -> Usd {
        Usd(self.0 + rhs.0)
    }
}

impl AddAssign for Usd {
    fn add_assign(&mut self, rhs: Usd) {
        self.0 += rhs.0;
    }
}

impl Sub for Usd {
    type Output = Usd;
    fn sub(self, rhs: Usd) -> Usd {
        Usd(self.0 - rhs.0)
    }
}

impl Mul<Decimal> for Usd {
    type Output = Usd;
    fn mul(self, rhs: Decimal) -> Usd {
        Usd(self.0 * rhs)
    }
}

impl Mul<u64> for Usd {
    type Output = Usd;
    fn mul(self, rhs: u64) -> Usd {
        Usd(self.0 * Decimal::from(rhs))
    }
}

impl Sum for Usd {
    fn sum<I: Iterator<Item = Usd>>(iter: I) -> Usd {
        iter.fold(Usd::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Usd> for Usd {
    fn sum<I: Iterator<Item = &'a Usd>>(iter: I) -> Usd {
        iter.copied().sum()
    }
}

impl Serialize for Usd {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serde_decimal::serialize(&self.0, serializer)
    }
}

impl<'de> Deserialize<'de> for Usd {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        serde_decimal::deserialize(deserializer).map(Usd)
    }
}

/// Serde adapter writing decimals as JSON numbers.
///
/// Reading goes through `f64` and [`dec`], which recovers the literal as
/// written for anything with 15 or fewer significant digits.
pub mod serde_decimal {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Decimal, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(value.to_f64().unwrap_or(f64::NAN))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Decimal, D::Error> {
        let raw = f64::deserialize(deserializer)?;
        if !raw.is_finite() {
            return Err(serde::de::Error::custom("non-finite number"));
        }
        Ok(dec(raw))
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(
            value: &Option<Decimal>,
            serializer: S,
        ) -> Result<S::Ok, S::Error> {
            match value {
                Some(v) => super::serialize(v, serializer),
                None => serializer.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            deserializer: D,
        ) -> Result<Option<Decimal>, D::Error> {
            let raw = Option::<f64>::deserialize(deserializer)?;
            Ok(raw.map(dec))
        }
    }
}
