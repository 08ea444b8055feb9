//! Independent ground truth for tests and audits: exhaustive joint
//! minimization on tiny discretized instances, and the no-deviation
//! certificate for completed runs. Never used inside the iteration
//! itself.

use crate::bid::DeviceId;
use crate::coordinator::Allocation;
use crate::devices::{ewh_benefit, simulate_ewh_plan, DeviceSpec};
use crate::error::{Error, Result};
use crate::hourly::DemandVector;
use crate::scenario::ScenarioConfig;

/// Upper limit on the number of joint plans the enumerator will walk.
pub const ENUMERATION_GUARD: u128 = 10_000_000;

/// All feasible plans of one device on a `delta`-spaced energy grid.
/// Equality constraints are resolved exactly, not discretized away: an
/// EV plan always sums to `e_des`, and water-heater temperatures and
/// shortfalls follow the recursion rather than a grid.
///
/// Returns `(demand, benefit)` pairs.
pub fn enumerate_device_plans(
    spec: &DeviceSpec,
    delta: f64,
) -> Result<Vec<(DemandVector, f64)>> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!("grid step must be positive, got {delta}")));
    }
    spec.validate()?;
    match spec {
        DeviceSpec::Ev(ev) => {
            let h = ev.horizon();
            let caps: Vec<f64> = ev.e_max.to_vec();
            let mut suffix = vec![0.0; h + 1];
            for i in (0..h).rev() {
                suffix[i] = suffix[i + 1] + caps[i];
            }
            let mut plans = Vec::new();
            let mut current = vec![0.0; h];
            ev_compose(&caps, &suffix, delta, ev.e_des, 0, &mut current, &mut plans)?;
            Ok(plans.into_iter().map(|d| (d, 0.0)).collect())
        }
        DeviceSpec::Ewh(ewh) => {
            let h = ewh.horizon();
            let mut levels: Vec<f64> = Vec::new();
            let mut k = 0u32;
            loop {
                let v = k as f64 * delta;
                if v > ewh.e_max + 1e-12 {
                    break;
                }
                levels.push(v.min(ewh.e_max));
                k += 1;
            }
            if levels.last().map(|v| ewh.e_max - v > 1e-12).unwrap_or(true) {
                levels.push(ewh.e_max);
            }
            let count = (levels.len() as u128).checked_pow(h as u32);
            match count {
                Some(c) if c <= ENUMERATION_GUARD => {}
                _ => {
                    return Err(Error::Domain(format!(
                        "water-heater grid would hold {}^{h} plans, over the {ENUMERATION_GUARD} guard",
                        levels.len()
                    )));
                }
            }
            let mut plans = Vec::new();
            let mut idx = vec![0usize; h];
            loop {
                let e_in = DemandVector::from_vec(
                    idx.iter().map(|&i| levels[i]).collect(),
                )?;
                let plan = simulate_ewh_plan(ewh, &e_in)?;
                let benefit = ewh_benefit(ewh, &plan);
                plans.push((e_in, benefit));
                let mut pos = 0;
                while pos < h {
                    idx[pos] += 1;
                    if idx[pos] < levels.len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if pos == h {
                    break;
                }
            }
            Ok(plans)
        }
    }
}

fn ev_compose(
    caps: &[f64],
    suffix: &[f64],
    delta: f64,
    remaining: f64,
    hour: usize,
    current: &mut Vec<f64>,
    out: &mut Vec<DemandVector>,
) -> Result<()> {
    if out.len() as u128 > ENUMERATION_GUARD {
        return Err(Error::Domain(format!(
            "charging-plan enumeration exceeded the {ENUMERATION_GUARD} guard"
        )));
    }
    if hour == caps.len() {
        if remaining.abs() <= 1e-9 {
            out.push(DemandVector::from_vec(current.clone())?);
        }
        return Ok(());
    }
    let cap = caps[hour];
    let top = cap.min(remaining);
    let mut options: Vec<f64> = Vec::new();
    let mut k = 0u32;
    loop {
        let v = k as f64 * delta;
        if v > top + 1e-9 {
            break;
        }
        options.push(v.min(top));
        k += 1;
    }
    // close the requirement exactly when the leftover fits this hour
    if remaining <= cap + 1e-9 && options.iter().all(|v| (v - remaining).abs() > 1e-9) {
        options.push(remaining.min(cap));
    }
    for v in options {
        let rest = remaining - v;
        if rest > suffix[hour + 1] + 1e-9 {
            continue; // later hours cannot absorb what is left
        }
        current[hour] = v;
        ev_compose(caps, suffix, delta, rest, hour + 1, current, out)?;
        current[hour] = 0.0;
    }
    Ok(())
}

/// Exhaustively minimizes `C(Σ_j d_j) − Σ_j b_j` over the Cartesian
/// product of the devices' discretized plan sets. Ties break on the
/// lexicographically smallest concatenated plan. Returns the best
/// aggregate demand and its net cost.
pub fn joint_enumerate(scenario: &ScenarioConfig, delta: f64) -> Result<(DemandVector, f64)> {
    let h = scenario.horizon;
    let devices = scenario.device_list();
    let mut plan_sets = Vec::with_capacity(devices.len());
    let mut total: u128 = 1;
    for (_, spec) in &devices {
        let plans = enumerate_device_plans(spec, delta)?;
        total = total.saturating_mul(plans.len().max(1) as u128);
        if total > ENUMERATION_GUARD {
            return Err(Error::Domain(format!(
                "joint enumeration would visit at least {total} plans, over the {ENUMERATION_GUARD} guard"
            )));
        }
        plan_sets.push(plans);
    }

    let mut best_net = f64::INFINITY;
    let mut best_demand = DemandVector::zeros(h);
    let mut best_key: Vec<f64> = Vec::new();

    let mut idx = vec![0usize; plan_sets.len()];
    loop {
        let mut demand = DemandVector::zeros(h);
        let mut benefit = 0.0;
        let mut key: Vec<f64> = Vec::with_capacity(plan_sets.len() * h);
        for (j, set) in plan_sets.iter().enumerate() {
            let (d, b) = &set[idx[j]];
            demand.add_assign_checked(d)?;
            benefit += b;
            key.extend(d.iter());
        }
        let net = scenario.supply.generation_cost(&demand)? - benefit;
        let better = net < best_net
            || (net == best_net && !best_key.is_empty() && lex_less(&key, &best_key));
        if better {
            best_net = net;
            best_demand = demand;
            best_key = key;
        }

        if plan_sets.is_empty() {
            break;
        }
        let mut pos = 0;
        while pos < plan_sets.len() {
            idx[pos] += 1;
            if idx[pos] < plan_sets[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == plan_sets.len() {
            break;
        }
    }

    if plan_sets.is_empty() {
        best_net = 0.0;
    }
    Ok((best_demand, best_net))
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// One device's entry in the certificate.
#[derive(Debug, Clone)]
pub struct NashDeviceCheck {
    pub id: DeviceId,
    /// Net cost of the allocated plan at final prices: `p·d* − b*`.
    pub allocated_value: f64,
    /// Net cost of a fresh best response at the same prices.
    pub best_value: f64,
    /// How much the device could improve by deviating.
    pub improvement: f64,
    pub ok: bool,
}

/// Certificate that no device wants to deviate from its allocation at
/// the final prices, and that those prices are the marginal cost of
/// the allocated total.
#[derive(Debug, Clone)]
pub struct NashCertificate {
    pub passed: bool,
    pub prices_consistent: bool,
    pub price_drift: f64,
    pub checks: Vec<NashDeviceCheck>,
}

pub fn nash_certificate(
    allocation: &Allocation,
    scenario: &ScenarioConfig,
    epsilon: f64,
) -> Result<NashCertificate> {
    let devices = scenario.device_list();
    if allocation.demands.len() != devices.len()
        || allocation
            .demands
            .iter()
            .zip(&devices)
            .any(|((id, _), (want, _))| id != want)
    {
        return Err(Error::Protocol(
            "allocation does not cover the scenario's device set".into(),
        ));
    }

    let prices = &allocation.prices;
    let mut checks = Vec::with_capacity(devices.len());
    let mut all_ok = true;
    for (((id, spec), (_, demand)), (_, benefit)) in devices
        .iter()
        .zip(&allocation.demands)
        .zip(&allocation.benefits)
    {
        let allocated_value = prices.dot(demand)? - benefit;
        let response = spec.best_response(prices)?;
        let best_value = prices.dot(&response.demand)? - response.benefit;
        let improvement = allocated_value - best_value;
        let ok = improvement <= epsilon * (1.0 + best_value.abs());
        all_ok &= ok;
        checks.push(NashDeviceCheck { id: *id, allocated_value, best_value, improvement, ok });
    }

    let mut total = DemandVector::zeros(scenario.horizon);
    for (_, d) in &allocation.demands {
        total.add_assign_checked(d)?;
    }
    let implied = scenario.supply.marginal_prices(&total)?;
    let price_drift = implied.linf_distance(prices)?;
    let prices_consistent = price_drift <= 1e-9;

    Ok(NashCertificate {
        passed: all_ok && prices_consistent,
        prices_consistent,
        price_drift,
        checks,
    })
}
