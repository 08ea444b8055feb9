use dwmarket::coordinator::run_dw;
use dwmarket::scenario::{generate_scenario, ScenarioConfig};
use dwmarket::transport::InProcessTransport;

fn gap_tale(cfg: &ScenarioConfig, label: &str) {
    let mut transport = InProcessTransport::from_scenario(cfg).unwrap();
    let outcome = run_dw(cfg, &mut transport).unwrap();
    let last = outcome.records.last().unwrap();
    let c0 = outcome.records[0].master.generation_cost();
    let tol = 1e-6 * (1.0 + c0);
    println!(
        "{label}: status={:?} iters={} last_gap={:.3e} tol={:.3e} rate~{:.3}",
        outcome.status,
        outcome.records.len(),
        last.gap,
        tol,
        if outcome.records.len() > 3 {
            (last.gap / outcome.records[1].gap).powf(1.0 / (outcome.records.len() as f64 - 2.0))
        } else {
            f64::NAN
        }
    );
}

#[test]
fn bundled_and_seeds() {
    gap_tale(&ScenarioConfig::bundled_8households(), "bundled(8,42)");
    for seed in 0..10u64 {
        gap_tale(&generate_scenario(8, seed), &format!("gen(8,{seed})"));
    }
}
