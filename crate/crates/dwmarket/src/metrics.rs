//! Aggregate load metrics: peak-to-average ratio, dispersion, cost and
//! payment totals reported once per iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hourly::{DemandVector, HourlyVector, PriceVector};

/// Peak-to-average ratio, `max / mean`. Exactly 1 for a flat profile.
///
/// Requires a nonnegative vector with positive mean.
pub fn par<U>(v: &HourlyVector<U>) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::Domain("par of empty vector".into()));
    }
    if v.min() < 0.0 {
        return Err(Error::Domain(format!(
            "par requires nonnegative values, min is {}",
            v.min()
        )));
    }
    let mean = v.mean();
    if mean <= 0.0 {
        return Err(Error::Domain("par requires positive mean".into()));
    }
    Ok(v.max() / mean)
}

/// Population standard deviation (the horizon is the whole population).
pub fn std_dev<U>(v: &HourlyVector<U>) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::Domain("std of empty vector".into()));
    }
    let mean = v.mean();
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64;
    Ok(var.sqrt())
}

/// Total payment `Σ_h p_h · D_h`.
pub fn user_payment(prices: &PriceVector, demand: &DemandVector) -> Result<f64> {
    prices.dot(demand)
}

/// Per-iteration metrics snapshot of an aggregate (price, demand) pair.
///
/// `par_*` are NaN when the underlying series is identically zero (the
/// ratio is undefined there); this only happens in empty markets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub par_demand: f64,
    pub par_price: f64,
    pub std_demand: f64,
    pub std_price: f64,
    pub generation_cost: f64,
    pub user_payment: f64,
}

impl MetricsRow {
    pub fn compute(
        prices: &PriceVector,
        demand: &DemandVector,
        generation_cost: f64,
    ) -> Result<Self> {
        Ok(Self {
            par_demand: par(demand).unwrap_or(f64::NAN),
            par_price: par(prices).unwrap_or(f64::NAN),
            std_demand: std_dev(demand)?,
            std_price: std_dev(prices)?,
            generation_cost,
            user_payment: user_payment(prices, demand)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dv(values: &[f64]) -> DemandVector {
        DemandVector::from_vec(values.to_vec()).unwrap()
    }

    #[test]
    fn par_of_flat_vector_is_one() {
        assert_eq!(par(&dv(&[5.0, 5.0, 5.0, 5.0])).unwrap(), 1.0);
    }

    #[test]
    fn par_of_single_spike() {
        assert_eq!(par(&dv(&[8.0, 0.0, 0.0, 0.0])).unwrap(), 4.0);
    }

    #[test]
    fn par_hand_value() {
        // max 8, mean 5
        assert!((par(&dv(&[2.0, 4.0, 6.0, 8.0])).unwrap() - 1.6).abs() < 1e-15);
    }

    #[test]
    fn par_rejects_zero_mean_and_negatives() {
        assert!(par(&dv(&[0.0, 0.0])).is_err());
        assert!(par(&dv(&[-1.0, 3.0])).is_err());
    }

    #[test]
    fn std_examples() {
        assert_eq!(std_dev(&dv(&[3.0, 3.0, 3.0])).unwrap(), 0.0);
        assert_eq!(std_dev(&dv(&[0.0, 2.0])).unwrap(), 1.0);
        // mean 2.5, population variance 1.25
        let s = std_dev(&dv(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert!((s - 1.118033988749895).abs() < 1e-12);
    }

    #[test]
    fn payment_examples() {
        let p24 = PriceVector::constant(24, 1.0).unwrap();
        let d24 = DemandVector::constant(24, 2.0).unwrap();
        assert_eq!(user_payment(&p24, &d24).unwrap(), 48.0);

        let zero = PriceVector::zeros(24);
        assert_eq!(user_payment(&zero, &d24).unwrap(), 0.0);

        let p = PriceVector::from_vec(vec![0.1, 0.2]).unwrap();
        let d = dv(&[10.0, 5.0]);
        assert!((user_payment(&p, &d).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn payment_rejects_mismatched_lengths() {
        let p = PriceVector::zeros(2);
        let d = DemandVector::zeros(3);
        assert!(user_payment(&p, &d).is_err());
    }

    proptest! {
        /// Any nonnegative nonconstant vector has PAR strictly above 1.
        #[test]
        fn par_above_one_unless_flat(values in proptest::collection::vec(0.0..100.0f64, 2..24)) {
            let v = dv(&values);
            if let Ok(ratio) = par(&v) {
                let flat = values.iter().all(|x| *x == values[0]);
                if flat {
                    prop_assert_eq!(ratio, 1.0);
                } else {
                    prop_assert!(ratio > 1.0);
                }
            }
        }

        /// Payment is bilinear: scaling prices scales the payment.
        #[test]
        fn payment_scales_with_prices(
            prices in proptest::collection::vec(0.0..10.0f64, 4),
            demand in proptest::collection::vec(0.0..10.0f64, 4),
            c in 0.0..5.0f64,
        ) {
            let p = PriceVector::from_vec(prices.clone()).unwrap();
            let ps = PriceVector::from_vec(prices.iter().map(|x| c * x).collect()).unwrap();
            let d = dv(&demand);
            let base = user_payment(&p, &d).unwrap();
            let scaled = user_payment(&ps, &d).unwrap();
            prop_assert!((scaled - c * base).abs() <= 1e-9 * (1.0 + base.abs() * c.abs()));
        }
    }
}
