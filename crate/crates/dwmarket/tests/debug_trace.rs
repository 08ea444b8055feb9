use dwmarket::coordinator::run_dw;
use dwmarket::scenario::generate_scenario;
use dwmarket::transport::InProcessTransport;

#[test]
fn trace() {
    let cfg = generate_scenario(3, 9);
    let mut transport = InProcessTransport::from_scenario(&cfg).unwrap();
    let outcome = run_dw(&cfg, &mut transport).unwrap();
    println!("status: {:?}", outcome.status);
    for rec in &outcome.records {
        println!(
            "k={:2} gap={:12.6e} s_known={:14.9} s_best={:14.9} peak={:8.4}",
            rec.iteration,
            rec.gap,
            rec.master.objective,
            rec.s_best,
            rec.master.constructed_demand.max(),
        );
    }
}
