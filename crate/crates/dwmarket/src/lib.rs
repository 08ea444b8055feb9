//! Market-based coordination of price-responsive devices.
//!
//! A central coordinator announces hourly prices, household devices (EV
//! chargers and electric water heaters) answer with demand bids, and a
//! bid-combination master problem picks the cheapest convex mix of all
//! bids seen so far. Iterating the two closes the optimality gap and
//! lands on an allocation no device wants to deviate from.
//!
//! Modules, bottom-up:
//!
//! * [`hourly`] / [`metrics`] — horizon vectors and load metrics
//! * [`lp`] — small dense linear-program solver
//! * [`supply`] — quadratic production cost and its marginal prices
//! * [`devices`] — per-device best-response solvers
//! * [`master`] — bid-combination problem and optimality gap
//! * [`scenario`] — scenario files, validation, generation
//! * [`transport`] — in-process and TCP price/bid message rounds
//! * [`coordinator`] — the iteration driver
//! * [`oracle`] — brute-force ground truth used by tests and audits

pub mod bid;
pub mod coordinator;
pub mod devices;
mod error;
pub mod hourly;
pub mod lp;
pub mod master;
pub mod metrics;
pub mod oracle;
pub mod scenario;
pub mod supply;
pub mod transport;

pub use bid::{Bid, DeviceId};
pub use error::{Error, Result};
pub use hourly::{DemandVector, HourlyVector, PriceVector, TemperatureVector};
