use dwmarket::bid::DeviceId;
use dwmarket::coordinator::{run_dw, RunStatus};
use dwmarket::devices::{DeviceSpec, EvSpec, EwhSpec};
use dwmarket::hourly::{DemandVector, TemperatureVector};
use dwmarket::metrics::par;
use dwmarket::scenario::{DeviceEntry, DwSettings, Household, ScenarioConfig};
use dwmarket::supply::SupplyModel;
use dwmarket::transport::InProcessTransport;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn round2(x: f64) -> f64 { (x * 100.0).round() / 100.0 }

fn gen_tight(households: u32, seed: u64) -> ScenarioConfig {
    let horizon = 24usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut next = 0u32;
    for hh in 0..households {
        // tight evening-to-morning window wrapping midnight
        let arrive = rng.gen_range(20..=23usize);   // EV home from this hour
        let depart = rng.gen_range(1..=4usize);     // gone from this hour
        let window = (24 - arrive) + depart;
        let cap = 7.0 * window as f64;
        let e_des = round2(rng.gen_range(8.0..16.0f64).min(0.85 * cap));
        let e_max: Vec<f64> = (0..horizon)
            .map(|h| if h >= arrive || h < depart { 7.0 } else { 0.0 })
            .collect();
        let ev = DeviceSpec::Ev(EvSpec {
            e_max: DemandVector::from_vec(e_max).unwrap(),
            e_des,
        });
        let morning = rng.gen_range(6..=8usize);
        let evening = rng.gen_range(18..=21usize);
        let m_total = rng.gen_range(3.0..5.0);
        let e_total = rng.gen_range(3.0..5.0);
        let mut draw = vec![0.0; horizon];
        draw[morning] = round2(m_total * 0.6);
        draw[morning + 1] = round2(m_total * 0.4);
        draw[evening] = round2(e_total * 0.55);
        draw[evening + 1] = round2(e_total * 0.45);
        let ewh = DeviceSpec::Ewh(EwhSpec {
            c_tank: 0.2, r_loss: 0.02, e_max: 4.5, t_min: 45.0,
            t_in: TemperatureVector::constant(horizon, 15.0).unwrap(),
            t_amb: TemperatureVector::constant(horizon, 20.0).unwrap(),
            draw: DemandVector::from_vec(draw).unwrap(),
            p_short: 1.0, t0: 45.0,
        });
        out.push(Household { id: hh, devices: vec![
            DeviceEntry { id: DeviceId(next), spec: ev },
            DeviceEntry { id: DeviceId(next + 1), spec: ewh },
        ]});
        next += 2;
    }
    ScenarioConfig { horizon, supply: SupplyModel::new(0.005).unwrap(), households: out, dw: DwSettings::default(), seed }
}

#[test]
fn tight_scan() {
    let mut hits = Vec::new();
    for seed in 0..60u64 {
        let cfg = gen_tight(8, seed);
        let mut transport = InProcessTransport::from_scenario(&cfg).unwrap();
        match run_dw(&cfg, &mut transport) {
            Ok(outcome) => {
                let last = outcome.records.last().unwrap();
                let c0 = outcome.records[0].master.generation_cost();
                let tol = 1e-6 * (1.0 + c0);
                let par0 = par(&outcome.records[0].master.constructed_demand).unwrap();
                let parf = par(&last.master.constructed_demand).unwrap();
                let conv = outcome.status == RunStatus::Converged && last.gap <= tol;
                if conv {
                    hits.push(seed);
                    println!("seed {seed}: CONV iters={} gap={:.2e} tol={:.2e} par {:.2}->{:.2} peak {:.1}->{:.1}",
                        outcome.records.len(), last.gap, tol, par0, parf,
                        outcome.records[0].master.constructed_demand.max(),
                        last.master.constructed_demand.max());
                } else {
                    println!("seed {seed}: {:?} iters={} gap={:.2e} tol={:.2e}", outcome.status, outcome.records.len(), last.gap, tol);
                }
            }
            Err(e) => println!("seed {seed}: ERROR {e}"),
        }
    }
    println!("HITS: {:?}", hits);
}
