//! Scenario files: ingestion, validation, defaults, and deterministic
//! generation of randomized households.
//!
//! The JSON schema mirrors the model parameters one-to-one (`e_max`,
//! `e_des`, `c_tank`, `r_loss`, `t_min`, `t_in`, `t_amb`, `draw`,
//! `p_short`, `t0`, `a`). Hourly fields accept either a scalar
//! (broadcast over the horizon) or a full-length array. Validation is
//! total: any byte input yields either a config or a structured error
//! listing every violation with a path-like locator.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bid::DeviceId;
use crate::devices::{DeviceSpec, EvSpec, EwhSpec};
use crate::error::{Error, Result};
use crate::hourly::{DemandVector, TemperatureVector};
use crate::supply::SupplyModel;

/// How the coordinator seeds prices before the first round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialPriceRule {
    /// Marginal cost of the day's total energy spread flat over the
    /// horizon: `p_h = 2a·(E_total/H)`.
    FlatAverage,
    /// All-zero prices.
    Zero,
    /// A caller-supplied price vector.
    Explicit(Vec<f64>),
}

/// Iteration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct DwSettings {
    pub max_iters: usize,
    /// Absolute gap tolerance; `None` selects the relative default
    /// `1e-6·(1 + C(D₀))` at run time.
    pub gap_tol: Option<f64>,
    pub initial_price_rule: InitialPriceRule,
}

impl Default for DwSettings {
    fn default() -> Self {
        Self { max_iters: 24, gap_tol: None, initial_price_rule: InitialPriceRule::FlatAverage }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceEntry {
    pub id: DeviceId,
    pub spec: DeviceSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Household {
    pub id: u32,
    pub devices: Vec<DeviceEntry>,
}

/// A fully validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub horizon: usize,
    pub supply: SupplyModel,
    pub households: Vec<Household>,
    pub dw: DwSettings,
    pub seed: u64,
}

impl ScenarioConfig {
    /// All devices across households, ascending by device id. This is
    /// the canonical processing order everywhere.
    pub fn device_list(&self) -> Vec<(DeviceId, DeviceSpec)> {
        let mut out: Vec<(DeviceId, DeviceSpec)> = self
            .households
            .iter()
            .flat_map(|h| h.devices.iter().map(|d| (d.id, d.spec.clone())))
            .collect();
        out.sort_by_key(|(id, _)| *id);
        out
    }

    pub fn device_count(&self) -> usize {
        self.households.iter().map(|h| h.devices.len()).sum()
    }

    /// Sum of every device's daily energy requirement, kWh.
    pub fn total_energy_requirement(&self) -> f64 {
        self.device_list().iter().map(|(_, s)| s.energy_requirement()).sum()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        validate(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let file = ScenarioFile::from(self);
        serde_json::to_string_pretty(&file).expect("scenario serialization cannot fail")
    }

    /// The scenario shipped with the crate: eight households, one EV
    /// and one water heater each. Identical to
    /// `generate_scenario(8, 14)`.
    pub fn bundled_8households() -> Self {
        Self::from_json(BUNDLED_8_HOUSEHOLDS).expect("bundled scenario must validate")
    }
}

/// Raw JSON text of the bundled default scenario.
pub const BUNDLED_8_HOUSEHOLDS: &str = include_str!("../data/default_8households.json");

// --- file-level (serde) representation --------------------------------

fn default_horizon() -> usize {
    24
}

fn default_max_iters() -> usize {
    24
}

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioFile {
    #[serde(default = "default_horizon")]
    horizon: usize,
    supply: SupplyFile,
    #[serde(default)]
    dw: DwFile,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    households: Vec<HouseholdFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SupplyFile {
    a: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct DwFile {
    #[serde(default = "default_max_iters")]
    max_iters: usize,
    #[serde(default)]
    gap_tol: Option<f64>,
    #[serde(default)]
    initial_price_rule: Option<InitialPriceRule>,
}

impl Default for DwFile {
    fn default() -> Self {
        Self { max_iters: default_max_iters(), gap_tol: None, initial_price_rule: None }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct HouseholdFile {
    id: u32,
    #[serde(default)]
    devices: Vec<DeviceFile>,
}

/// A number broadcast over the horizon, or one value per hour.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Hourly {
    Scalar(f64),
    PerHour(Vec<f64>),
}

impl Hourly {
    fn expand(&self, horizon: usize) -> std::result::Result<Vec<f64>, String> {
        match self {
            Hourly::Scalar(v) => {
                if !v.is_finite() {
                    return Err(format!("must be finite, got {v}"));
                }
                Ok(vec![*v; horizon])
            }
            Hourly::PerHour(values) => {
                if values.len() != horizon {
                    return Err(format!(
                        "must have one value per hour ({horizon}), got {}",
                        values.len()
                    ));
                }
                if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                    return Err(format!("must be finite, got {v}"));
                }
                Ok(values.clone())
            }
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum DeviceFile {
    Ev {
        id: u32,
        e_max: Hourly,
        e_des: f64,
    },
    Ewh {
        id: u32,
        c_tank: f64,
        r_loss: f64,
        e_max: f64,
        t_min: f64,
        t_in: Hourly,
        t_amb: Hourly,
        draw: Hourly,
        p_short: f64,
        #[serde(default)]
        t0: Option<f64>,
    },
}

impl From<&ScenarioConfig> for ScenarioFile {
    fn from(cfg: &ScenarioConfig) -> Self {
        ScenarioFile {
            horizon: cfg.horizon,
            supply: SupplyFile { a: cfg.supply.quadratic_coefficient() },
            dw: DwFile {
                max_iters: cfg.dw.max_iters,
                gap_tol: cfg.dw.gap_tol,
                initial_price_rule: Some(cfg.dw.initial_price_rule.clone()),
            },
            seed: cfg.seed,
            households: cfg
                .households
                .iter()
                .map(|h| HouseholdFile {
                    id: h.id,
                    devices: h
                        .devices
                        .iter()
                        .map(|d| match &d.spec {
                            DeviceSpec::Ev(s) => DeviceFile::Ev {
                                id: d.id.0,
                                e_max: Hourly::PerHour(s.e_max.to_vec()),
                                e_des: s.e_des,
                            },
                            DeviceSpec::Ewh(s) => DeviceFile::Ewh {
                                id: d.id.0,
                                c_tank: s.c_tank,
                                r_loss: s.r_loss,
                                e_max: s.e_max,
                                t_min: s.t_min,
                                t_in: Hourly::PerHour(s.t_in.to_vec()),
                                t_amb: Hourly::PerHour(s.t_amb.to_vec()),
                                draw: Hourly::PerHour(s.draw.to_vec()),
                                p_short: s.p_short,
                                t0: Some(s.t0),
                            },
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

// --- validation --------------------------------------------------------

struct Issues(Vec<String>);

impl Issues {
    fn push(&mut self, path: impl AsRef<str>, msg: impl AsRef<str>) {
        self.0.push(format!("{}: {}", path.as_ref(), msg.as_ref()));
    }
}

fn validate(file: ScenarioFile) -> Result<ScenarioConfig> {
    let mut issues = Issues(Vec::new());
    let horizon = file.horizon;
    if horizon == 0 {
        issues.push("horizon", "must be at least 1");
    }

    let supply = match SupplyModel::new(file.supply.a) {
        Ok(s) => Some(s),
        Err(e) => {
            issues.push("supply.a", e.to_string());
            None
        }
    };

    if file.dw.max_iters == 0 {
        issues.push("dw.max_iters", "must be at least 1");
    }
    if let Some(tol) = file.dw.gap_tol {
        if !(tol.is_finite() && tol >= 0.0) {
            issues.push("dw.gap_tol", format!("must be finite and ≥ 0, got {tol}"));
        }
    }
    let rule = file.dw.initial_price_rule.clone().unwrap_or(InitialPriceRule::FlatAverage);
    if let InitialPriceRule::Explicit(v) = &rule {
        if v.len() != horizon {
            issues.push(
                "dw.initial_price_rule.explicit",
                format!("must have one price per hour ({horizon}), got {}", v.len()),
            );
        }
        if v.iter().any(|p| !p.is_finite()) {
            issues.push("dw.initial_price_rule.explicit", "prices must be finite");
        }
    }

    // Track where each id first appeared so duplicates can name both.
    let mut household_ids: Vec<(u32, String)> = Vec::new();
    let mut device_ids: Vec<(u32, String)> = Vec::new();
    let mut households = Vec::new();

    for (hi, hf) in file.households.iter().enumerate() {
        let hpath = format!("households[{hi}]");
        if let Some((_, first)) = household_ids.iter().find(|(id, _)| *id == hf.id) {
            issues.push(format!("{hpath}.id"), format!("duplicate household id {} (also at {first})", hf.id));
        } else {
            household_ids.push((hf.id, format!("{hpath}.id")));
        }

        let mut devices = Vec::new();
        for (di, df) in hf.devices.iter().enumerate() {
            let dpath = format!("{hpath}.devices[{di}]");
            let raw_id = match df {
                DeviceFile::Ev { id, .. } | DeviceFile::Ewh { id, .. } => *id,
            };
            if let Some((_, first)) = device_ids.iter().find(|(id, _)| *id == raw_id) {
                issues.push(format!("{dpath}.id"), format!("duplicate device id {raw_id} (also at {first})"));
            } else {
                device_ids.push((raw_id, format!("{dpath}.id")));
            }

            if let Some(spec) = validate_device(df, horizon, &dpath, &mut issues) {
                devices.push(DeviceEntry { id: DeviceId(raw_id), spec });
            }
        }
        households.push(Household { id: hf.id, devices });
    }

    if !issues.0.is_empty() {
        return Err(Error::Validation(issues.0));
    }
    Ok(ScenarioConfig {
        horizon,
        supply: supply.expect("supply errors reported above"),
        households,
        dw: DwSettings { max_iters: file.dw.max_iters, gap_tol: file.dw.gap_tol, initial_price_rule: rule },
        seed: file.seed,
    })
}

fn validate_device(
    df: &DeviceFile,
    horizon: usize,
    path: &str,
    issues: &mut Issues,
) -> Option<DeviceSpec> {
    match df {
        DeviceFile::Ev { e_max, e_des, .. } => {
            let e_max = match e_max.expand(horizon) {
                Ok(v) => v,
                Err(msg) => {
                    issues.push(format!("{path}.e_max"), msg);
                    return None;
                }
            };
            if e_max.iter().any(|v| *v < 0.0) {
                issues.push(format!("{path}.e_max"), "hourly caps must be ≥ 0");
                return None;
            }
            if !(e_des.is_finite() && *e_des >= 0.0) {
                issues.push(format!("{path}.e_des"), format!("must be finite and ≥ 0, got {e_des}"));
                return None;
            }
            let cap: f64 = e_max.iter().sum();
            if *e_des > cap + 1e-9 * (1.0 + cap) {
                issues.push(
                    format!("{path}.e_des"),
                    format!("required energy {e_des} exceeds total charging capacity {cap}"),
                );
                return None;
            }
            Some(DeviceSpec::Ev(EvSpec {
                e_max: DemandVector::from_vec(e_max).ok()?,
                e_des: *e_des,
            }))
        }
        DeviceFile::Ewh { c_tank, r_loss, e_max, t_min, t_in, t_amb, draw, p_short, t0, .. } => {
            let mut ok = true;
            let mut field = |name: &str, good: bool, msg: String| {
                if !good {
                    issues.push(format!("{path}.{name}"), msg);
                    ok = false;
                }
            };
            field("c_tank", c_tank.is_finite() && *c_tank > 0.0, format!("must be positive, got {c_tank}"));
            field("r_loss", (0.0..1.0).contains(r_loss), format!("must be in [0, 1), got {r_loss}"));
            field("e_max", e_max.is_finite() && *e_max >= 0.0, format!("must be ≥ 0, got {e_max}"));
            field("p_short", p_short.is_finite() && *p_short >= 0.0, format!("must be ≥ 0, got {p_short}"));

            let expand = |name: &str, h: &Hourly, issues: &mut Issues, ok: &mut bool| match h
                .expand(horizon)
            {
                Ok(v) => Some(v),
                Err(msg) => {
                    issues.push(format!("{path}.{name}"), msg);
                    *ok = false;
                    None
                }
            };
            let t_in_v = expand("t_in", t_in, issues, &mut ok);
            let t_amb_v = expand("t_amb", t_amb, issues, &mut ok);
            let draw_v = expand("draw", draw, issues, &mut ok);

            if let Some(d) = &draw_v {
                if d.iter().any(|v| *v < 0.0) {
                    issues.push(format!("{path}.draw"), "withdrawals must be ≥ 0");
                    ok = false;
                }
            }
            if let Some(ti) = &t_in_v {
                let max_in = ti.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if !(t_min.is_finite() && *t_min > max_in) {
                    issues.push(
                        format!("{path}.t_min"),
                        format!("must exceed every inlet temperature (max {max_in}), got {t_min}"),
                    );
                    ok = false;
                }
            }
            let t0 = t0.unwrap_or(*t_min);
            if !t0.is_finite() {
                issues.push(format!("{path}.t0"), format!("must be finite, got {t0}"));
                ok = false;
            }
            if !ok {
                return None;
            }
            Some(DeviceSpec::Ewh(EwhSpec {
                c_tank: *c_tank,
                r_loss: *r_loss,
                e_max: *e_max,
                t_min: *t_min,
                t_in: TemperatureVector::from_vec(t_in_v?).ok()?,
                t_amb: TemperatureVector::from_vec(t_amb_v?).ok()?,
                draw: DemandVector::from_vec(draw_v?).ok()?,
                p_short: *p_short,
                t0,
            }))
        }
    }
}

// --- deterministic generation ------------------------------------------

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Deterministic randomized scenario: each household gets one EV on a
/// scheduled evening-to-morning charging window and one water heater
/// with morning/evening draw peaks. Same `(households, seed)` always
/// yields the same config.
///
/// Charging windows are deliberately short (owner-scheduled night
/// charging, wrapping midnight) and staggered across households. Short
/// windows keep each vehicle's feasible set low-dimensional, which is
/// what lets the iteration assemble the exact optimum from few bids
/// and stabilize within the default 24-round budget.
pub fn generate_scenario(households: u32, seed: u64) -> ScenarioConfig {
    let horizon = 24usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(households as usize);
    let mut next_device = 0u32;

    for hh in 0..households {
        // Charging allowed from `arrive` in the evening until `depart`
        // after midnight.
        let arrive = rng.gen_range(20..=23usize);
        let depart = rng.gen_range(1..=4usize);
        let window = (24 - arrive) + depart;
        let cap = 7.0 * window as f64;
        let e_des = round2(rng.gen_range(8.0..16.0f64).min(0.85 * cap));
        let e_max: Vec<f64> = (0..horizon)
            .map(|h| if h >= arrive || h < depart { 7.0 } else { 0.0 })
            .collect();
        let ev = DeviceSpec::Ev(EvSpec {
            e_max: DemandVector::from_vec(e_max).expect("finite by construction"),
            e_des,
        });

        // Hot-water use peaks in the morning and the evening,
        // totaling 6–10 kWh/day.
        let morning = rng.gen_range(6..=8usize);
        let evening = rng.gen_range(18..=21usize);
        let morning_total = rng.gen_range(3.0..5.0);
        let evening_total = rng.gen_range(3.0..5.0);
        let mut draw = vec![0.0; horizon];
        draw[morning] = round2(morning_total * 0.6);
        draw[morning + 1] = round2(morning_total * 0.4);
        draw[evening] = round2(evening_total * 0.55);
        draw[evening + 1] = round2(evening_total * 0.45);
        let ewh = DeviceSpec::Ewh(EwhSpec {
            c_tank: 0.2,
            r_loss: 0.02,
            e_max: 4.5,
            t_min: 45.0,
            t_in: TemperatureVector::constant(horizon, 15.0).expect("finite"),
            t_amb: TemperatureVector::constant(horizon, 20.0).expect("finite"),
            draw: DemandVector::from_vec(draw).expect("finite by construction"),
            p_short: 1.0,
            t0: 45.0,
        });

        out.push(Household {
            id: hh,
            devices: vec![
                DeviceEntry { id: DeviceId(next_device), spec: ev },
                DeviceEntry { id: DeviceId(next_device + 1), spec: ewh },
            ],
        });
        next_device += 2;
    }

    ScenarioConfig {
        horizon,
        supply: SupplyModel::new(0.005).expect("positive constant"),
        households: out,
        dw: DwSettings::default(),
        seed,
    }
}
