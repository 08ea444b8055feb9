//! Round orchestration: announce prices, collect and aggregate bids,
//! solve the master problem, check the gap, and disaggregate the final
//! allocation back to devices.
//!
//! One iteration `k`: broadcast `p_k`, gather one best-response bid
//! per device, sum them into the aggregate extreme point, append it to
//! the collected set, re-solve the master, and price the next round at
//! the master's marginals. The run stops when the per-round gap closes,
//! when a bid repeats an existing extreme point (the master cannot
//! improve further), or at the iteration cap.

use crate::bid::{Bid, DeviceId};
use crate::error::{Error, Result};
use crate::hourly::{DemandVector, PriceVector};
use crate::master::{
    lower_bound, optimality_gap, solve_master_warm, ExtremePointSet, MasterSolution,
};
use crate::metrics::MetricsRow;
use crate::scenario::{InitialPriceRule, ScenarioConfig};
use crate::transport::Transport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    IterationLimit,
}

/// Everything observed in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Prices announced at the start of the round.
    pub prices: PriceVector,
    /// Aggregate bid the devices returned for those prices.
    pub bid: Bid,
    /// Master solution after folding the bid in (unchanged when the
    /// bid duplicated an existing extreme point).
    pub master: MasterSolution,
    /// Per-round optimality gap. Infinite in round 0, where no master
    /// solution existed when the prices went out.
    pub gap: f64,
    /// Net-cost lower bound derived from this round's bid (`-inf` in
    /// round 0).
    pub s_best: f64,
    pub metrics: MetricsRow,
}

/// Final per-device outcome of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// Final demand per device, ascending by id: `d_j* = Σ_k w_k d_{j,k}`.
    pub demands: Vec<(DeviceId, DemandVector)>,
    /// Weighted bid benefit per device: `b_j* = Σ_k w_k b_{j,k}`.
    pub benefits: Vec<(DeviceId, f64)>,
    /// Final prices (marginal cost at the final constructed demand).
    pub prices: PriceVector,
    /// Final master weights over the collected extreme points.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<IterationRecord>,
    pub allocation: Allocation,
    pub status: RunStatus,
}

impl RunOutcome {
    pub fn final_record(&self) -> &IterationRecord {
        self.records.last().expect("a run always has at least one record")
    }
}

/// Price estimate announced before any bids exist.
pub fn initial_prices(scenario: &ScenarioConfig) -> Result<PriceVector> {
    let h = scenario.horizon;
    match &scenario.dw.initial_price_rule {
        InitialPriceRule::FlatAverage => {
            let total = scenario.total_energy_requirement();
            let flat = total / h as f64;
            let a = scenario.supply.quadratic_coefficient();
            PriceVector::constant(h, 2.0 * a * flat)
        }
        InitialPriceRule::Zero => Ok(PriceVector::zeros(h)),
        InitialPriceRule::Explicit(values) => PriceVector::from_vec(values.clone()),
    }
}

/// Sums per-device bids into the system-wide extreme point. Bids must
/// arrive ascending by unique device id; summation runs in that order.
pub fn aggregate_bids(horizon: usize, bids: &[(DeviceId, Bid)]) -> Result<Bid> {
    let mut demand = DemandVector::zeros(horizon);
    let mut benefit = 0.0;
    let mut last: Option<DeviceId> = None;
    for (id, bid) in bids {
        if let Some(prev) = last {
            if *id == prev {
                return Err(Error::Protocol(format!("duplicate bid from device {id}")));
            }
            if *id < prev {
                return Err(Error::Protocol("bids not in ascending device order".into()));
            }
        }
        last = Some(*id);
        demand.add_assign_checked(&bid.demand)?;
        benefit += bid.benefit;
    }
    Bid::new(demand, benefit)
}

/// Applies the final weights to each device's bid history:
/// `d_j* = Σ_k w_k d_{j,k}`. History rows must match the collected
/// extreme points one-to-one.
pub fn disaggregate(
    weights: &[f64],
    history: &[Vec<(DeviceId, Bid)>],
    ids: &[DeviceId],
    prices: PriceVector,
) -> Result<Allocation> {
    if weights.len() != history.len() {
        return Err(Error::Protocol(format!(
            "{} weights but {} bid-history rows",
            weights.len(),
            history.len()
        )));
    }
    let horizon = prices.len();
    for (k, row) in history.iter().enumerate() {
        if row.len() != ids.len() || row.iter().zip(ids).any(|((id, _), want)| id != want) {
            return Err(Error::Protocol(format!(
                "bid-history row {k} does not cover the device set"
            )));
        }
    }
    let mut demands = Vec::with_capacity(ids.len());
    let mut benefits = Vec::with_capacity(ids.len());
    for (j, id) in ids.iter().enumerate() {
        let mut d = DemandVector::zeros(horizon);
        let mut b = 0.0;
        for (w, row) in weights.iter().zip(history) {
            d.add_scaled_assign(*w, &row[j].1.demand)?;
            b += w * row[j].1.benefit;
        }
        demands.push((*id, d));
        benefits.push((*id, b));
    }
    Ok(Allocation { demands, benefits, prices, weights: weights.to_vec() })
}

/// Runs the full iteration against whatever transport the devices live
/// behind. Termination: per-round gap at or below the tolerance, a
/// duplicate aggregate bid, or the iteration cap.
pub fn run_dw(scenario: &ScenarioConfig, transport: &mut dyn Transport) -> Result<RunOutcome> {
    let h = scenario.horizon;
    if transport.horizon() != h {
        return Err(Error::LengthMismatch { expected: h, got: transport.horizon() });
    }
    let ids: Vec<DeviceId> = scenario.device_list().iter().map(|(id, _)| *id).collect();
    if transport.device_ids() != ids.as_slice() {
        return Err(Error::Protocol(
            "transport device set does not match the scenario".into(),
        ));
    }
    let supply = scenario.supply;
    let empty_market = ids.is_empty();

    let mut kprime = ExtremePointSet::new(h);
    let mut history: Vec<Vec<(DeviceId, Bid)>> = Vec::new();
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut prior: Option<MasterSolution> = None;
    let mut prices = initial_prices(scenario)?;
    let mut gap_tol = scenario.dw.gap_tol;
    let mut status = RunStatus::IterationLimit;

    for k in 0..scenario.dw.max_iters {
        transport.broadcast_prices(k, &prices)?;
        let bids = transport.collect_bids(k)?;
        if bids.len() != ids.len() || bids.iter().zip(&ids).any(|((id, _), want)| id != want) {
            return Err(Error::Protocol(format!(
                "round {k} did not return one bid per device"
            )));
        }
        let aggregate = aggregate_bids(h, &bids)?;

        let gap = match &prior {
            Some(master) => optimality_gap(&aggregate, master)?,
            // An empty market has a single feasible point, so the very
            // first solve is exact.
            None if empty_market => 0.0,
            None => f64::INFINITY,
        };
        let s_best = match &prior {
            Some(master) => lower_bound(&aggregate, master)?,
            None => f64::NEG_INFINITY,
        };

        let duplicate = kprime.find_duplicate(&aggregate)?;
        let master = match duplicate {
            Some(_) => prior.clone().expect("a duplicate implies an earlier solve"),
            None => {
                let warm = match &prior {
                    Some(m) => {
                        let mut w = m.weights.clone();
                        w.push(0.0);
                        w
                    }
                    None => vec![1.0],
                };
                kprime.push(aggregate.clone())?;
                history.push(bids);
                solve_master_warm(&kprime, &supply, &warm)?
            }
        };
        let tol = *gap_tol
            .get_or_insert_with(|| 1e-6 * (1.0 + master.generation_cost()));

        let metrics = MetricsRow::compute(
            &master.prices,
            &master.constructed_demand,
            supply.generation_cost(&master.constructed_demand)?,
        )?;
        records.push(IterationRecord {
            iteration: k,
            prices: prices.clone(),
            bid: aggregate,
            master: master.clone(),
            gap,
            s_best,
            metrics,
        });

        let done = gap <= tol || duplicate.is_some();
        prices = master.prices.clone();
        prior = Some(master);
        if done {
            status = RunStatus::Converged;
            break;
        }
    }

    let final_master = prior.expect("max_iters ≥ 1 guarantees one solve");
    let allocation =
        disaggregate(&final_master.weights, &history, &ids, final_master.prices.clone())?;

    // Conservation: the device totals must reconstruct the master's
    // demand, converged or not.
    let mut total = DemandVector::zeros(h);
    for (_, d) in &allocation.demands {
        total.add_assign_checked(d)?;
    }
    let drift = total.linf_distance(&final_master.constructed_demand)?;
    if drift > 1e-9 {
        return Err(Error::Invariant(format!(
            "allocation totals drift {drift:e} from the constructed demand"
        )));
    }

    transport.send_allocations(&allocation.demands, &allocation.prices)?;
    transport.shutdown()?;
    Ok(RunOutcome { records, allocation, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::{DeviceSpec, EvSpec};
    use crate::scenario::{generate_scenario, DeviceEntry, DwSettings, Household};
    use crate::supply::SupplyModel;
    use crate::transport::InProcessTransport;

    fn bid(demand: &[f64], benefit: f64) -> Bid {
        Bid::new(DemandVector::from_vec(demand.to_vec()).unwrap(), benefit).unwrap()
    }

    fn one_ev_scenario(h: usize, cap: f64, e_des: f64, a: f64) -> ScenarioConfig {
        ScenarioConfig {
            horizon: h,
            supply: SupplyModel::new(a).unwrap(),
            households: vec![Household {
                id: 0,
                devices: vec![DeviceEntry {
                    id: DeviceId(0),
                    spec: DeviceSpec::Ev(EvSpec {
                        e_max: DemandVector::constant(h, cap).unwrap(),
                        e_des,
                    }),
                }],
            }],
            dw: DwSettings::default(),
            seed: 0,
        }
    }

    #[test]
    fn initial_prices_flat_average() {
        // one EV needing 12 kWh over 24 h at a = 0.5: p = 2·0.5·(12/24)
        let cfg = one_ev_scenario(24, 7.0, 12.0, 0.5);
        let p = initial_prices(&cfg).unwrap();
        assert_eq!(p, PriceVector::constant(24, 0.5).unwrap());
    }

    #[test]
    fn initial_prices_empty_and_zero_rule() {
        let mut cfg = one_ev_scenario(24, 7.0, 12.0, 0.5);
        cfg.households.clear();
        assert_eq!(initial_prices(&cfg).unwrap(), PriceVector::zeros(24));

        let mut cfg = one_ev_scenario(24, 7.0, 12.0, 0.5);
        cfg.dw.initial_price_rule = InitialPriceRule::Zero;
        assert_eq!(initial_prices(&cfg).unwrap(), PriceVector::zeros(24));
    }

    #[test]
    fn aggregate_examples() {
        let single = vec![(DeviceId(0), bid(&[1.0, 0.0], 2.0))];
        let agg = aggregate_bids(2, &single).unwrap();
        assert_eq!(agg, bid(&[1.0, 0.0], 2.0));

        let two = vec![
            (DeviceId(0), bid(&[1.0, 0.0], 2.0)),
            (DeviceId(1), bid(&[0.0, 1.0], 3.0)),
        ];
        let agg = aggregate_bids(2, &two).unwrap();
        assert_eq!(agg, bid(&[1.0, 1.0], 5.0));

        // n copies scale linearly
        let copies: Vec<(DeviceId, Bid)> =
            (0..5).map(|i| (DeviceId(i), bid(&[0.5, 1.5], 0.2))).collect();
        let agg = aggregate_bids(2, &copies).unwrap();
        assert!((agg.demand[0] - 2.5).abs() < 1e-12);
        assert!((agg.demand[1] - 7.5).abs() < 1e-12);
        assert!((agg.benefit - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aggregate_rejects_duplicates_and_disorder() {
        let dup = vec![
            (DeviceId(1), bid(&[1.0], 0.0)),
            (DeviceId(1), bid(&[1.0], 0.0)),
        ];
        assert!(matches!(aggregate_bids(1, &dup), Err(Error::Protocol(_))));
        let unsorted = vec![
            (DeviceId(2), bid(&[1.0], 0.0)),
            (DeviceId(1), bid(&[1.0], 0.0)),
        ];
        assert!(matches!(aggregate_bids(1, &unsorted), Err(Error::Protocol(_))));
    }

    #[test]
    fn disaggregate_examples() {
        let ids = [DeviceId(0)];
        let prices = PriceVector::zeros(2);

        // single weight hands each device its sole bid
        let history = vec![vec![(DeviceId(0), bid(&[2.0, 0.0], 1.0))]];
        let alloc = disaggregate(&[1.0], &history, &ids, prices.clone()).unwrap();
        assert_eq!(alloc.demands[0].1.as_slice(), &[2.0, 0.0]);
        assert_eq!(alloc.benefits[0].1, 1.0);

        // equal weights average the bids
        let history = vec![
            vec![(DeviceId(0), bid(&[2.0, 0.0], 1.0))],
            vec![(DeviceId(0), bid(&[0.0, 2.0], 3.0))],
        ];
        let alloc = disaggregate(&[0.5, 0.5], &history, &ids, prices).unwrap();
        assert_eq!(alloc.demands[0].1.as_slice(), &[1.0, 1.0]);
        assert_eq!(alloc.benefits[0].1, 2.0);
    }

    #[test]
    fn disaggregate_rejects_missing_history() {
        let ids = [DeviceId(0)];
        let history = vec![vec![(DeviceId(0), bid(&[1.0], 0.0))]];
        assert!(matches!(
            disaggregate(&[0.5, 0.5], &history, &ids, PriceVector::zeros(1)),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn disaggregation_reconstructs_the_aggregate() {
        // Σ_j d_j* = Σ_k w_k d_k by exchanging the summation order.
        let cfg = generate_scenario(4, 7);
        let mut transport = InProcessTransport::from_scenario(&cfg).unwrap();
        let outcome = run_dw(&cfg, &mut transport).unwrap();
        let mut total = DemandVector::zeros(cfg.horizon);
        for (_, d) in &outcome.allocation.demands {
            total.add_assign_checked(d).unwrap();
        }
        let last = outcome.final_record();
        assert!(
            total
                .linf_distance(&last.master.constructed_demand)
                .unwrap()
                <= 1e-9
        );
    }

    #[test]
    fn single_ev_converges_to_the_flat_spread() {
        // Capacity 2 kWh/h, requirement 4 kWh over 4 hours: the joint
        // optimum spreads the charge flat at 1 kWh/h.
        let cfg = one_ev_scenario(4, 2.0, 4.0, 0.5);
        let mut transport = InProcessTransport::from_scenario(&cfg).unwrap();
        let outcome = run_dw(&cfg, &mut transport).unwrap();
        assert_eq!(outcome.status, RunStatus::Converged);
        let last = outcome.final_record();
        for d in last.master.constructed_demand.iter() {
            assert!((d - 1.0).abs() < 1e-6, "demand not flat: {d}");
        }
        assert!(last.gap.abs() <= 1e-6 * (1.0 + last.master.generation_cost()));
        // the allocation is the EV's own flat plan
        assert_eq!(outcome.allocation.demands.len(), 1);
        for d in outcome.allocation.demands[0].1.iter() {
            assert!((d - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn empty_market_converges_in_one_iteration() {
        let mut cfg = one_ev_scenario(6, 2.0, 4.0, 0.5);
        cfg.households.clear();
        let mut transport = InProcessTransport::from_scenario(&cfg).unwrap();
        let outcome = run_dw(&cfg, &mut transport).unwrap();
        assert_eq!(outcome.status, RunStatus::Converged);
        assert_eq!(outcome.records.len(), 1);
        let last = outcome.final_record();
        assert_eq!(last.gap, 0.0);
        assert_eq!(last.master.constructed_demand, DemandVector::zeros(6));
        assert_eq!(last.metrics.generation_cost, 0.0);
        assert_eq!(last.metrics.user_payment, 0.0);
    }

    #[test]
    fn objective_monotone_and_gap_nonnegative() {
        let cfg = generate_scenario(3, 11);
        let mut transport = InProcessTransport::from_scenario(&cfg).unwrap();
        let outcome = run_dw(&cfg, &mut transport).unwrap();
        let mut last = f64::INFINITY;
        for rec in &outcome.records {
            assert!(rec.master.objective <= last + 1e-9);
            assert!(rec.gap >= -1e-9, "negative gap {}", rec.gap);
            last = rec.master.objective;
        }
    }

    #[test]
    fn iteration_limit_still_yields_feasible_allocation() {
        let mut cfg = generate_scenario(2, 3);
        cfg.dw.max_iters = 1;
        let mut transport = InProcessTransport::from_scenario(&cfg).unwrap();
        let outcome = run_dw(&cfg, &mut transport).unwrap();
        assert_eq!(outcome.status, RunStatus::IterationLimit);
        for ((id, demand), (want, spec)) in
            outcome.allocation.demands.iter().zip(cfg.device_list())
        {
            assert_eq!(*id, want);
            spec.check_allocation(demand, 1e-9).unwrap();
        }
    }

    #[test]
    fn traces_are_deterministic() {
        let cfg = generate_scenario(4, 5);
        let run = || {
            let mut transport = InProcessTransport::from_scenario(&cfg).unwrap();
            run_dw(&cfg, &mut transport).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.records.len(), b.records.len());
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra, rb);
        }
        assert_eq!(a.allocation, b.allocation);
    }
}
