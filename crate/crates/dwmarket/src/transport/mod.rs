//! Message layer between the coordinator and device agents.
//!
//! Two implementations of the same round-based contract: an in-process
//! transport that solves device best responses directly, and a TCP
//! transport speaking newline-delimited JSON. Rounds are barrier
//! synchronized: broadcast prices, then collect exactly one bid per
//! registered device. The device set is fixed at registration; late
//! joiners are rejected.

mod inproc;
mod tcp;
mod wire;

pub use inproc::{AggregatorChild, AggregatorNode, InProcessTransport};
pub use tcp::{run_agent, AgentOutcome, TcpTransport, DEFAULT_ROUND_TIMEOUT};
pub use wire::{decode_line, encode_line, Message, WIRE_VERSION};

use crate::bid::{Bid, DeviceId};
use crate::error::Result;
use crate::hourly::{DemandVector, PriceVector};

/// A synchronous price/bid round channel to a fixed set of devices.
pub trait Transport {
    fn horizon(&self) -> usize;

    /// Registered device ids, ascending.
    fn device_ids(&self) -> &[DeviceId];

    /// Delivers the iteration's prices to every registered device and
    /// returns how many endpoints received them.
    fn broadcast_prices(&mut self, iteration: usize, prices: &PriceVector) -> Result<usize>;

    /// Blocks until every registered device has answered the
    /// iteration's prices; returns the bids ascending by device id.
    fn collect_bids(&mut self, iteration: usize) -> Result<Vec<(DeviceId, Bid)>>;

    /// Tells each device the demand vector it has purchased and the
    /// final prices.
    fn send_allocations(
        &mut self,
        demands: &[(DeviceId, DemandVector)],
        prices: &PriceVector,
    ) -> Result<()>;

    fn shutdown(&mut self) -> Result<()>;
}
