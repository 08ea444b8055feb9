//! Newline-delimited JSON wire format, version 1.
//!
//! One JSON object per line; the `type` field discriminates variants
//! and every line carries `"v":1`. Numbers print in shortest
//! round-trip form, so parse→print→parse is bit-exact and both
//! transports feed identical doubles into the coordinator.

use serde::{Deserialize, Serialize};

use crate::bid::DeviceId;
use crate::error::{Error, Result};

pub const WIRE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Message {
    /// Device → coordinator, once, before iteration 0.
    Register { device_id: DeviceId, horizon: usize },
    /// Coordinator → device, once per iteration.
    PriceAnnounce { iteration: usize, prices: Vec<f64> },
    /// Device → coordinator, echoing the iteration it answers.
    BidSubmit { iteration: usize, device_id: DeviceId, demand: Vec<f64>, benefit: f64 },
    /// Coordinator → device after the last iteration.
    FinalAllocate { device_id: DeviceId, demand: Vec<f64>, prices: Vec<f64> },
    /// Coordinator → device: the session is over.
    Shutdown,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    v: u32,
    #[serde(flatten)]
    msg: Message,
}

/// Encodes a message as a single line (no trailing newline).
pub fn encode_line(msg: &Message) -> Result<String> {
    let env = Envelope { v: WIRE_VERSION, msg: msg.clone() };
    let line = serde_json::to_string(&env)?;
    debug_assert!(!line.contains('\n'));
    Ok(line)
}

pub fn decode_line(line: &str) -> Result<Message> {
    let env: Envelope = serde_json::from_str(line.trim_end())
        .map_err(|e| Error::Protocol(format!("malformed message: {e}")))?;
    if env.v != WIRE_VERSION {
        return Err(Error::Protocol(format!(
            "unsupported wire version {} (expected {WIRE_VERSION})",
            env.v
        )));
    }
    Ok(env.msg)
}
