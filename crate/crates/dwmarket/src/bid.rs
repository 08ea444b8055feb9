//! Demand bids and device identities shared across the market.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hourly::DemandVector;

/// Globally unique device identifier. All iteration over devices is in
/// ascending id order, which fixes every floating-point summation
/// order in the system.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct DeviceId(pub u32);

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A consumption plan offered at some price vector: hourly demand plus
/// the benefit (in $) the owner attaches to following that plan. Each
/// bid is an extreme point of the bidder's feasible set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bid {
    pub demand: DemandVector,
    pub benefit: f64,
}

impl Bid {
    pub fn new(demand: DemandVector, benefit: f64) -> Result<Self> {
        if demand.min() < 0.0 {
            return Err(Error::Domain(format!(
                "bid demand must be nonnegative, min is {}",
                demand.min()
            )));
        }
        if !benefit.is_finite() {
            return Err(Error::Domain(format!("bid benefit must be finite, got {benefit}")));
        }
        Ok(Self { demand, benefit })
    }

    pub fn horizon(&self) -> usize {
        self.demand.len()
    }

    /// L∞ distance between bids, taking the larger of the demand and
    /// benefit gaps. Used for duplicate-bid detection.
    pub fn linf_distance(&self, other: &Bid) -> Result<f64> {
        let d = self.demand.linf_distance(&other.demand)?;
        Ok(d.max((self.benefit - other.benefit).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_demand_and_non_finite_benefit() {
        let neg = DemandVector::from_vec(vec![1.0, -0.1]).unwrap();
        assert!(Bid::new(neg, 0.0).is_err());
        let ok = DemandVector::from_vec(vec![1.0, 0.0]).unwrap();
        assert!(Bid::new(ok.clone(), f64::NAN).is_err());
        assert!(Bid::new(ok, 3.0).is_ok());
    }

    #[test]
    fn distance_covers_both_fields() {
        let d1 = DemandVector::from_vec(vec![1.0, 2.0]).unwrap();
        let d2 = DemandVector::from_vec(vec![1.0, 2.5]).unwrap();
        let a = Bid::new(d1, 1.0).unwrap();
        let b = Bid::new(d2, 1.2).unwrap();
        assert!((a.linf_distance(&b).unwrap() - 0.5).abs() < 1e-15);
    }
}
