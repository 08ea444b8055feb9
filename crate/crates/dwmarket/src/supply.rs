//! Quadratic production-cost model and its marginal prices.
//!
//! The narrow interface (cost plus gradient) is all the master problem
//! needs, so a richer supply side with dual prices could later slot in
//! behind the same two calls. Non-dispatchable generation and fixed
//! load are out of scope; the model sees aggregate responsive demand
//! only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hourly::{DemandVector, PriceVector};

/// `C(D) = Σ_h a·D_h²` with `a > 0` ($/kWh²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupplyModel {
    a: f64,
}

impl SupplyModel {
    pub fn new(a: f64) -> Result<Self> {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::Domain(format!(
                "quadratic cost coefficient must be positive and finite, got {a}"
            )));
        }
        Ok(Self { a })
    }

    pub fn quadratic_coefficient(&self) -> f64 {
        self.a
    }

    fn check_nonnegative(demand: &DemandVector) -> Result<()> {
        if demand.min() < 0.0 {
            return Err(Error::Domain(format!(
                "negative demand {} not servable",
                demand.min()
            )));
        }
        Ok(())
    }

    /// Total production cost for serving `demand`.
    pub fn generation_cost(&self, demand: &DemandVector) -> Result<f64> {
        Self::check_nonnegative(demand)?;
        Ok(demand.iter().map(|d| self.a * d * d).sum())
    }

    /// Hourly marginal cost of serving one more unit: `p_h = 2·a·D_h`.
    /// This is the exact gradient of [`Self::generation_cost`].
    pub fn marginal_prices(&self, demand: &DemandVector) -> Result<PriceVector> {
        Self::check_nonnegative(demand)?;
        PriceVector::from_vec(demand.iter().map(|d| 2.0 * self.a * d).collect())
    }
}
