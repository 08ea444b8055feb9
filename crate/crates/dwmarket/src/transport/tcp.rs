//! TCP transport, one connection per device agent.
//!
//! The coordinator accepts registrations until the expected device set
//! is complete, then drives barrier-synchronized rounds over the
//! newline-delimited JSON protocol. Agents with unknown or duplicate
//! ids are disconnected during registration. No TLS, auth, or
//! reconnection: a vanished device fails the round loudly.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::time::{Duration, Instant};

use crate::bid::{Bid, DeviceId};
use crate::devices::DeviceSpec;
use crate::error::{Error, Result};
use crate::hourly::{DemandVector, PriceVector};
use crate::transport::wire::{decode_line, encode_line, Message};
use crate::transport::Transport;

pub const DEFAULT_ROUND_TIMEOUT: Duration = Duration::from_secs(30);

struct Conn {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Conn {
    fn send(&mut self, msg: &Message) -> std::io::Result<()> {
        let mut line = encode_line(msg).expect("wire encoding cannot fail on finite values");
        line.push('\n');
        self.writer.write_all(line.as_bytes())?;
        self.writer.flush()
    }

    fn recv(&mut self, timeout: Duration) -> Result<Option<Message>> {
        self.reader
            .get_ref()
            .set_read_timeout(Some(timeout.max(Duration::from_millis(1))))?;
        let mut line = String::new();
        match self.reader.read_line(&mut line) {
            Ok(0) => Err(Error::Protocol("connection closed".into())),
            Ok(_) => Ok(Some(decode_line(&line)?)),
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }
}

pub struct TcpTransport {
    horizon: usize,
    ids: Vec<DeviceId>,
    conns: BTreeMap<DeviceId, Conn>,
    timeout: Duration,
}

impl TcpTransport {
    /// Waits on `listener` until every expected device has registered.
    /// Connections claiming unknown or already-taken ids, or the wrong
    /// horizon, are dropped; the affected agent observes EOF.
    pub fn accept_devices(
        listener: TcpListener,
        expected: &[DeviceId],
        horizon: usize,
        timeout: Duration,
    ) -> Result<Self> {
        let mut remaining: BTreeSet<DeviceId> = expected.iter().copied().collect();
        if remaining.len() != expected.len() {
            return Err(Error::Protocol("expected device set contains duplicates".into()));
        }
        let mut conns: BTreeMap<DeviceId, Conn> = BTreeMap::new();
        let deadline = Instant::now() + timeout;
        listener.set_nonblocking(true)?;

        while !remaining.is_empty() {
            if Instant::now() >= deadline {
                let missing: Vec<String> = remaining.iter().map(|id| id.to_string()).collect();
                return Err(Error::Protocol(format!(
                    "registration timed out; missing devices: {}",
                    missing.join(", ")
                )));
            }
            match listener.accept() {
                Ok((stream, _peer)) => {
                    stream.set_nonblocking(false)?;
                    stream.set_nodelay(true)?;
                    let mut conn =
                        Conn { reader: BufReader::new(stream.try_clone()?), writer: stream };
                    let budget = deadline
                        .saturating_duration_since(Instant::now())
                        .min(Duration::from_secs(2));
                    match conn.recv(budget) {
                        Ok(Some(Message::Register { device_id, horizon: h }))
                            if h == horizon && remaining.remove(&device_id) =>
                        {
                            conns.insert(device_id, conn);
                        }
                        // Unknown id, duplicate claim, wrong horizon, or
                        // a malformed first message: reject by dropping
                        // the connection.
                        _ => drop(conn),
                    }
                }
                Err(e) if e.kind() == ErrorKind::WouldBlock => {
                    std::thread::sleep(Duration::from_millis(5));
                }
                Err(e) => return Err(e.into()),
            }
        }

        let ids: Vec<DeviceId> = conns.keys().copied().collect();
        Ok(Self { horizon, ids, conns, timeout })
    }
}

impl Transport for TcpTransport {
    fn horizon(&self) -> usize {
        self.horizon
    }

    fn device_ids(&self) -> &[DeviceId] {
        &self.ids
    }

    fn broadcast_prices(&mut self, iteration: usize, prices: &PriceVector) -> Result<usize> {
        if prices.len() != self.horizon {
            return Err(Error::LengthMismatch { expected: self.horizon, got: prices.len() });
        }
        let msg = Message::PriceAnnounce { iteration, prices: prices.to_vec() };
        for (id, conn) in self.conns.iter_mut() {
            conn.send(&msg)
                .map_err(|e| Error::Protocol(format!("failed to reach device {id}: {e}")))?;
        }
        Ok(self.conns.len())
    }

    fn collect_bids(&mut self, iteration: usize) -> Result<Vec<(DeviceId, Bid)>> {
        let deadline = Instant::now() + self.timeout;
        let mut out = Vec::with_capacity(self.conns.len());
        let mut missing: Vec<DeviceId> = Vec::new();
        for (&id, conn) in self.conns.iter_mut() {
            let budget = deadline.saturating_duration_since(Instant::now());
            if budget.is_zero() {
                missing.push(id);
                continue;
            }
            match conn.recv(budget) {
                Ok(Some(Message::BidSubmit { iteration: it, device_id, demand, benefit })) => {
                    if device_id != id {
                        return Err(Error::Protocol(format!(
                            "device {id} submitted a bid labeled {device_id}"
                        )));
                    }
                    if it != iteration {
                        return Err(Error::Protocol(format!(
                            "device {id} answered iteration {it}, expected {iteration}"
                        )));
                    }
                    if demand.len() != self.horizon {
                        return Err(Error::Protocol(format!(
                            "device {id} bid has {} hours, expected {}",
                            demand.len(),
                            self.horizon
                        )));
                    }
                    let demand = DemandVector::from_vec(demand)
                        .map_err(|e| Error::Protocol(format!("device {id} bid invalid: {e}")))?;
                    let bid = Bid::new(demand, benefit)
                        .map_err(|e| Error::Protocol(format!("device {id} bid invalid: {e}")))?;
                    out.push((id, bid));
                }
                Ok(Some(other)) => {
                    return Err(Error::Protocol(format!(
                        "device {id} sent {other:?} instead of a bid"
                    )));
                }
                Ok(None) => missing.push(id),
                Err(e) => {
                    return Err(Error::Protocol(format!("device {id}: {e}")));
                }
            }
        }
        if !missing.is_empty() {
            let list: Vec<String> = missing.iter().map(|id| id.to_string()).collect();
            return Err(Error::Protocol(format!(
                "timed out waiting for bids from devices: {}",
                list.join(", ")
            )));
        }
        Ok(out)
    }

    fn send_allocations(
        &mut self,
        demands: &[(DeviceId, DemandVector)],
        prices: &PriceVector,
    ) -> Result<()> {
        for (id, demand) in demands {
            let conn = self
                .conns
                .get_mut(id)
                .ok_or_else(|| Error::Protocol(format!("allocation for unknown device {id}")))?;
            let msg = Message::FinalAllocate {
                device_id: *id,
                demand: demand.to_vec(),
                prices: prices.to_vec(),
            };
            conn.send(&msg)
                .map_err(|e| Error::Protocol(format!("failed to reach device {id}: {e}")))?;
        }
        Ok(())
    }

    fn shutdown(&mut self) -> Result<()> {
        // Best effort: an agent that already hung up should not fail a
        // completed run.
        for conn in self.conns.values_mut() {
            let _ = conn.send(&Message::Shutdown);
        }
        self.conns.clear();
        Ok(())
    }
}

/// What an agent saw by the end of a session.
#[derive(Debug, Clone)]
pub struct AgentOutcome {
    pub device_id: DeviceId,
    pub rounds: usize,
    pub final_demand: Option<DemandVector>,
    pub final_prices: Option<PriceVector>,
}

/// Runs one device agent to completion: register, answer each price
/// announcement with a best response, accept the final allocation,
/// stop on shutdown.
pub fn run_agent(
    addr: impl ToSocketAddrs,
    device_id: DeviceId,
    spec: &DeviceSpec,
    timeout: Duration,
) -> Result<AgentOutcome> {
    spec.validate()?;
    let horizon = spec.horizon();
    let stream = TcpStream::connect(addr)?;
    stream.set_nodelay(true)?;
    let mut conn = Conn { reader: BufReader::new(stream.try_clone()?), writer: stream };
    conn.send(&Message::Register { device_id, horizon })
        .map_err(|e| Error::Protocol(format!("registration failed: {e}")))?;

    let mut outcome =
        AgentOutcome { device_id, rounds: 0, final_demand: None, final_prices: None };
    loop {
        match conn.recv(timeout)? {
            None => {
                return Err(Error::Protocol(format!(
                    "no message from coordinator within {timeout:?}"
                )));
            }
            Some(Message::PriceAnnounce { iteration, prices }) => {
                if prices.len() != horizon {
                    return Err(Error::Protocol(format!(
                        "price announcement has {} hours, expected {horizon}",
                        prices.len()
                    )));
                }
                let prices = PriceVector::from_vec(prices)
                    .map_err(|e| Error::Protocol(format!("invalid prices: {e}")))?;
                let bid = spec.best_response(&prices)?;
                outcome.rounds += 1;
                conn.send(&Message::BidSubmit {
                    iteration,
                    device_id,
                    demand: bid.demand.to_vec(),
                    benefit: bid.benefit,
                })
                .map_err(|e| Error::Protocol(format!("bid submission failed: {e}")))?;
            }
            Some(Message::FinalAllocate { device_id: fid, demand, prices }) => {
                if fid != device_id {
                    return Err(Error::Protocol(format!(
                        "received allocation for device {fid}"
                    )));
                }
                outcome.final_demand = Some(
                    DemandVector::from_vec(demand)
                        .map_err(|e| Error::Protocol(format!("invalid allocation: {e}")))?,
                );
                outcome.final_prices = Some(
                    PriceVector::from_vec(prices)
                        .map_err(|e| Error::Protocol(format!("invalid prices: {e}")))?,
                );
            }
            Some(Message::Shutdown) => return Ok(outcome),
            Some(other) => {
                return Err(Error::Protocol(format!("unexpected message {other:?}")));
            }
        }
    }
}
