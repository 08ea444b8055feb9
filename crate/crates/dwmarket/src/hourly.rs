//! Fixed-length vectors over the scheduling horizon, one value per hour.
//!
//! Vectors carry a phantom unit marker so energies, prices, and
//! temperatures cannot be mixed up by accident. Constructors reject
//! non-finite values; binary operations reject length mismatches
//! instead of broadcasting.

use std::fmt;
use std::marker::PhantomData;
use std::ops::Index;

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Energy in kWh (per-hour quantities; with a 1-hour step, power in kW
/// and energy in kWh coincide numerically).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kwh;

/// Price in $ per kWh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DollarPerKwh;

/// Temperature in °C.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Celsius;

pub type DemandVector = HourlyVector<Kwh>;
pub type PriceVector = HourlyVector<DollarPerKwh>;
pub type TemperatureVector = HourlyVector<Celsius>;

/// One finite `f64` per hour of the horizon, tagged with a unit marker.
#[derive(Clone, PartialEq)]
pub struct HourlyVector<U> {
    values: Vec<f64>,
    _unit: PhantomData<U>,
}

impl<U> HourlyVector<U> {
    /// Wraps a raw vector, rejecting NaN and infinities.
    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        if let Some((h, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite value {v} at hour {h}"
            )));
        }
        Ok(Self { values, _unit: PhantomData })
    }

    pub fn zeros(horizon: usize) -> Self {
        Self { values: vec![0.0; horizon], _unit: PhantomData }
    }

    pub fn constant(horizon: usize, value: f64) -> Result<Self> {
        Self::from_vec(vec![value; horizon])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.values.clone()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return f64::NAN;
        }
        self.sum() / self.values.len() as f64
    }

    /// Checks the horizon of `other` against ours.
    fn check_len<V>(&self, other: &HourlyVector<V>) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: other.len() });
        }
        Ok(())
    }

    /// Inner product; the unit of the result is the product of the
    /// operand units (e.g. price · demand = dollars).
    pub fn dot<V>(&self, other: &HourlyVector<V>) -> Result<f64> {
        self.check_len(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn linf_distance(&self, other: &Self) -> Result<f64> {
        self.check_len(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn add_assign_checked(&mut self, other: &Self) -> Result<()> {
        self.check_len(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }

    /// `self += scale * other`, the accumulation step of weighted sums.
    pub fn add_scaled_assign(&mut self, scale: f64, other: &Self) -> Result<()> {
        self.check_len(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += scale * b;
        }
        Ok(())
    }

    pub fn scaled(&self, scale: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * scale).collect(),
            _unit: PhantomData,
        }
    }

    /// Reinterprets the values under a different unit. Used at module
    /// boundaries where the unit genuinely changes (e.g. 2aD turns
    /// demand into prices).
    pub fn retag<V>(&self) -> HourlyVector<V> {
        HourlyVector { values: self.values.clone(), _unit: PhantomData }
    }
}

impl<U> Index<usize> for HourlyVector<U> {
    type Output = f64;

    fn index(&self, hour: usize) -> &f64 {
        &self.values[hour]
    }
}

impl<U> fmt::Debug for HourlyVector<U> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HourlyVector{:?}", self.values)
    }
}

impl<U> Serialize for HourlyVector<U> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.values.len()))?;
        for v in &self.values {
            seq.serialize_element(v)?;
        }
        seq.end()
    }
}

impl<'de, U> Deserialize<'de> for HourlyVector<U> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct VecVisitor<U>(PhantomData<U>);

        impl<'de, U> Visitor<'de> for VecVisitor<U> {
            type Value = HourlyVector<U>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a sequence of finite numbers")
            }

            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut values = Vec::with_capacity(seq.size_hint().unwrap_or(0));
                while let Some(v) = seq.next_element::<f64>()? {
                    values.push(v);
                }
                HourlyVector::from_vec(values).map_err(serde::de::Error::custom)
            }
        }

        deserializer.deserialize_seq(VecVisitor(PhantomData))
    }
}
