//! Best-response solvers for the two device classes: electric vehicles
//! (greedy cheapest-hours fill) and electric water heaters (a small
//! linear program over the tank thermodynamics).
//!
//! Both map a price vector to a [`Bid`]; both are pure functions of
//! `(prices, spec)` and may run concurrently.

use crate::bid::Bid;
use crate::error::{Error, Result};
use crate::hourly::{DemandVector, PriceVector, TemperatureVector};
use crate::lp::{LinearProgram, LpStatus, Relation, solve_lp};

/// Electric vehicle: `e_max[h]` is the charge cap per hour (0 while
/// the car is away), `e_des` the total energy that must be delivered
/// by the end of the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct EvSpec {
    pub e_max: DemandVector,
    pub e_des: f64,
}

impl EvSpec {
    pub fn horizon(&self) -> usize {
        self.e_max.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.e_max.min() < 0.0 {
            return Err(Error::Domain("ev e_max must be nonnegative".into()));
        }
        if !self.e_des.is_finite() || self.e_des < 0.0 {
            return Err(Error::Domain(format!("ev e_des must be finite and ≥ 0, got {}", self.e_des)));
        }
        let cap = self.e_max.sum();
        if self.e_des > cap + 1e-9 * (1.0 + cap) {
            return Err(Error::InfeasibleDevice(format!(
                "required energy {} exceeds total charging capacity {}",
                self.e_des, cap
            )));
        }
        Ok(())
    }
}

/// Electric water heater tank model.
///
/// The tank temperature follows
/// `T_h = T_{h-1} + (e_in_h - draw_h)/c_tank - r_loss·(T_{h-1} - t_amb_h)`,
/// shortfall below `t_min` is priced at `p_short` per kWh of
/// underheated draw.
#[derive(Debug, Clone, PartialEq)]
pub struct EwhSpec {
    /// Thermal capacitance, kWh/°C.
    pub c_tank: f64,
    /// Standby loss coefficient per hour, in [0, 1).
    pub r_loss: f64,
    /// Heating element capacity, kWh per hour.
    pub e_max: f64,
    /// Minimum acceptable delivery temperature, °C.
    pub t_min: f64,
    /// Inlet water temperature per hour, °C.
    pub t_in: TemperatureVector,
    /// Ambient temperature per hour, °C.
    pub t_amb: TemperatureVector,
    /// Forecast hot-water energy withdrawal per hour, kWh.
    pub draw: DemandVector,
    /// Shortfall penalty, $/kWh.
    pub p_short: f64,
    /// Tank temperature entering hour 0, °C.
    pub t0: f64,
}

impl EwhSpec {
    pub fn horizon(&self) -> usize {
        self.draw.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_tank.is_finite() && self.c_tank > 0.0) {
            return Err(Error::Domain(format!("ewh c_tank must be positive, got {}", self.c_tank)));
        }
        if !(0.0..1.0).contains(&self.r_loss) {
            return Err(Error::Domain(format!("ewh r_loss must be in [0, 1), got {}", self.r_loss)));
        }
        if !(self.e_max.is_finite() && self.e_max >= 0.0) {
            return Err(Error::Domain(format!("ewh e_max must be ≥ 0, got {}", self.e_max)));
        }
        if self.t_in.len() != self.horizon() || self.t_amb.len() != self.horizon() {
            return Err(Error::LengthMismatch { expected: self.horizon(), got: self.t_in.len().max(self.t_amb.len()) });
        }
        if !(self.t_min.is_finite() && self.t_min > self.t_in.max()) {
            return Err(Error::Domain(format!(
                "ewh t_min ({}) must exceed every inlet temperature (max {})",
                self.t_min,
                self.t_in.max()
            )));
        }
        if self.draw.min() < 0.0 {
            return Err(Error::Domain("ewh draw must be nonnegative".into()));
        }
        if !(self.p_short.is_finite() && self.p_short >= 0.0) {
            return Err(Error::Domain(format!("ewh p_short must be ≥ 0, got {}", self.p_short)));
        }
        if !self.t0.is_finite() {
            return Err(Error::Domain("ewh t0 must be finite".into()));
        }
        Ok(())
    }

    /// Shortfall conversion factor `draw_h / (t_min - t_in_h)` per hour
    /// (kWh of underheated draw per °C below t_min).
    fn kappa(&self, h: usize) -> f64 {
        self.draw[h] / (self.t_min - self.t_in[h])
    }
}

/// Full operating plan of a water heater: energy input plus the tank
/// state it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct EwhPlan {
    pub e_in: DemandVector,
    pub t_tank: TemperatureVector,
    pub t_short: TemperatureVector,
    pub e_short: DemandVector,
}

impl EwhPlan {
    /// Total underheated draw over the horizon, kWh.
    pub fn total_shortfall(&self) -> f64 {
        self.e_short.sum()
    }
}

/// Runs the tank recursion forward for a given input plan, deriving
/// temperatures and shortfalls exactly. This is the single definition
/// of the thermodynamics; the LP must agree with it.
pub fn simulate_ewh_plan(spec: &EwhSpec, e_in: &DemandVector) -> Result<EwhPlan> {
    spec.validate()?;
    let h = spec.horizon();
    if e_in.len() != h {
        return Err(Error::LengthMismatch { expected: h, got: e_in.len() });
    }
    let mut t_tank = Vec::with_capacity(h);
    let mut t_short = Vec::with_capacity(h);
    let mut e_short = Vec::with_capacity(h);
    let mut prev = spec.t0;
    for i in 0..h {
        let t = prev + (e_in[i] - spec.draw[i]) / spec.c_tank
            - spec.r_loss * (prev - spec.t_amb[i]);
        let short = (spec.t_min - t).max(0.0);
        t_tank.push(t);
        t_short.push(short);
        e_short.push(spec.kappa(i) * short);
        prev = t;
    }
    Ok(EwhPlan {
        e_in: e_in.clone(),
        t_tank: TemperatureVector::from_vec(t_tank)?,
        t_short: TemperatureVector::from_vec(t_short)?,
        e_short: DemandVector::from_vec(e_short)?,
    })
}

/// Benefit reported for a plan: the shortfall penalty rate times the
/// hot-water energy actually delivered.
pub fn ewh_benefit(spec: &EwhSpec, plan: &EwhPlan) -> f64 {
    spec.p_short * (spec.draw.sum() - plan.total_shortfall())
}

/// Cheapest-hours greedy charge schedule: hours with capacity are
/// sorted by price (earliest hour wins ties) and filled until the
/// required energy is reached. This solves the EV's linear program
/// exactly. The benefit is zero: the car always ends up fully charged,
/// so no plan is worth more than any other.
pub fn ev_best_response(prices: &PriceVector, spec: &EvSpec) -> Result<Bid> {
    spec.validate()?;
    let h = spec.horizon();
    if prices.len() != h {
        return Err(Error::LengthMismatch { expected: h, got: prices.len() });
    }
    let mut hours: Vec<usize> = (0..h).filter(|&i| spec.e_max[i] > 0.0).collect();
    hours.sort_by(|&i, &j| prices[i].total_cmp(&prices[j]).then(i.cmp(&j)));

    let mut demand = vec![0.0; h];
    let mut remaining = spec.e_des;
    for &hr in &hours {
        if remaining <= 0.0 {
            break;
        }
        let amount = spec.e_max[hr].min(remaining);
        demand[hr] = amount;
        remaining -= amount;
    }
    if remaining > 1e-9 * (1.0 + spec.e_des) {
        return Err(Error::InfeasibleDevice(format!(
            "greedy fill left {remaining} kWh unscheduled"
        )));
    }
    Bid::new(DemandVector::from_vec(demand)?, 0.0)
}

/// Cost-vs-discomfort optimum of the water heater at the given prices:
/// minimizes `Σ_h p_h·e_in_h + p_short·e_short_h` subject to the tank
/// recursion, the element capacity, and the shortfall definition.
///
/// Always feasible: the shortfall variables absorb any demand the tank
/// cannot meet, so a solver failure here indicates a numerical problem
/// rather than an impossible device.
pub fn ewh_best_response(prices: &PriceVector, spec: &EwhSpec) -> Result<(Bid, EwhPlan)> {
    spec.validate()?;
    let h = spec.horizon();
    if prices.len() != h {
        return Err(Error::LengthMismatch { expected: h, got: prices.len() });
    }

    // Columns: e_in[0..h), t_tank[h..2h), t_short[2h..3h), e_short[3h..4h).
    let n = 4 * h;
    let mut objective = vec![0.0; n];
    for i in 0..h {
        objective[i] = prices[i];
        objective[3 * h + i] = spec.p_short;
    }
    let mut lp = LinearProgram::new(objective);
    for i in 0..h {
        lp.set_bounds(i, 0.0, spec.e_max);
        lp.set_bounds(h + i, f64::NEG_INFINITY, f64::INFINITY);
        // t_short, e_short keep the default lower bound of zero; the
        // explicit T_short ≥ 0 side keeps the penalty from being gamed
        // negative.
    }

    for i in 0..h {
        // Tank recursion as an equality row.
        let mut row = vec![0.0; n];
        row[h + i] = 1.0;
        row[i] = -1.0 / spec.c_tank;
        let rhs = if i == 0 {
            spec.t0 - spec.draw[0] / spec.c_tank - spec.r_loss * (spec.t0 - spec.t_amb[0])
        } else {
            row[h + i - 1] = -(1.0 - spec.r_loss);
            -spec.draw[i] / spec.c_tank + spec.r_loss * spec.t_amb[i]
        };
        lp.add_row(row, Relation::Eq, rhs);

        // t_tank + t_short ≥ t_min
        let mut row = vec![0.0; n];
        row[h + i] = 1.0;
        row[2 * h + i] = 1.0;
        lp.add_row(row, Relation::Ge, spec.t_min);

        // e_short = kappa · t_short
        let mut row = vec![0.0; n];
        row[3 * h + i] = 1.0;
        row[2 * h + i] = -spec.kappa(i);
        lp.add_row(row, Relation::Eq, 0.0);
    }

    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "water-heater plan reported {:?} on an always-feasible program",
            sol.status
        )));
    }

    let mut e_in = Vec::with_capacity(h);
    for i in 0..h {
        let v = sol.x[i];
        if v < -1e-7 || v > spec.e_max + 1e-7 {
            return Err(Error::SolverFailure(format!(
                "input plan leaves bounds at hour {i}: {v}"
            )));
        }
        e_in.push(v.clamp(0.0, spec.e_max));
    }

    // Re-derive the tank state from the chosen inputs so the reported
    // plan satisfies the recursion exactly and ties in the shortfall
    // variables are resolved deterministically.
    let plan = simulate_ewh_plan(spec, &DemandVector::from_vec(e_in)?)?;
    let bid = Bid::new(plan.e_in.clone(), ewh_benefit(spec, &plan))?;
    Ok((bid, plan))
}

/// A device of either class. Best responses go through here so the
/// rest of the system never matches on the class itself.
#[derive(Debug, Clone, PartialEq)]
pub enum DeviceSpec {
    Ev(EvSpec),
    Ewh(EwhSpec),
}

impl DeviceSpec {
    pub fn horizon(&self) -> usize {
        match self {
            DeviceSpec::Ev(s) => s.horizon(),
            DeviceSpec::Ewh(s) => s.horizon(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DeviceSpec::Ev(s) => s.validate(),
            DeviceSpec::Ewh(s) => s.validate(),
        }
    }

    pub fn best_response(&self, prices: &PriceVector) -> Result<Bid> {
        match self {
            DeviceSpec::Ev(s) => ev_best_response(prices, s),
            DeviceSpec::Ewh(s) => ewh_best_response(prices, s).map(|(bid, _)| bid),
        }
    }

    /// Total energy the device needs over the day, used for the
    /// flat-average price initializer.
    pub fn energy_requirement(&self) -> f64 {
        match self {
            DeviceSpec::Ev(s) => s.e_des,
            DeviceSpec::Ewh(s) => s.draw.sum(),
        }
    }

    /// Checks that an allocated demand vector is feasible for this
    /// device. Convexity of each feasible set means any convex mix of
    /// bids must pass.
    pub fn check_allocation(&self, demand: &DemandVector, tol: f64) -> Result<()> {
        if demand.len() != self.horizon() {
            return Err(Error::LengthMismatch { expected: self.horizon(), got: demand.len() });
        }
        match self {
            DeviceSpec::Ev(s) => {
                for (h, d) in demand.iter().enumerate() {
                    if d < -tol || d > s.e_max[h] + tol {
                        return Err(Error::Domain(format!(
                            "allocated {d} kWh at hour {h} violates ev cap {}",
                            s.e_max[h]
                        )));
                    }
                }
                let total = demand.sum();
                if (total - s.e_des).abs() > tol * (1.0 + s.e_des.abs()) {
                    return Err(Error::Domain(format!(
                        "allocated total {total} kWh misses required {}",
                        s.e_des
                    )));
                }
                Ok(())
            }
            DeviceSpec::Ewh(s) => {
                for (h, d) in demand.iter().enumerate() {
                    if d < -tol || d > s.e_max + tol {
                        return Err(Error::Domain(format!(
                            "allocated {d} kWh at hour {h} violates ewh cap {}",
                            s.e_max
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}
