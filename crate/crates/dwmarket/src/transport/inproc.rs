//! In-process transport: the coordinator and the devices share one
//! address space, and best responses are solved on demand.
//!
//! Devices may be grouped under aggregator nodes mirroring a feeder
//! hierarchy. Nodes relay the per-device bids of their subtree upward
//! (children visited in ascending id order) rather than pre-summing
//! them, so the system-wide aggregate is one fixed-order sum at the
//! coordinator and is bit-identical for every topology.

use std::collections::BTreeMap;

use crate::bid::{Bid, DeviceId};
use crate::devices::DeviceSpec;
use crate::error::{Error, Result};
use crate::hourly::{DemandVector, PriceVector};
use crate::scenario::ScenarioConfig;
use crate::transport::Transport;

#[derive(Debug, Clone)]
pub enum AggregatorChild {
    Device(DeviceId),
    Node(AggregatorNode),
}

/// One level of the feeder hierarchy.
#[derive(Debug, Clone, Default)]
pub struct AggregatorNode {
    pub children: Vec<AggregatorChild>,
}

impl AggregatorNode {
    pub fn flat(ids: impl IntoIterator<Item = DeviceId>) -> Self {
        Self { children: ids.into_iter().map(AggregatorChild::Device).collect() }
    }

    fn collect_ids(&self, out: &mut Vec<DeviceId>) {
        for child in &self.children {
            match child {
                AggregatorChild::Device(id) => out.push(*id),
                AggregatorChild::Node(node) => node.collect_ids(out),
            }
        }
    }

    /// Gathers the subtree's bids, children in ascending id order
    /// within this node.
    fn gather(
        &self,
        devices: &BTreeMap<DeviceId, DeviceSpec>,
        prices: &PriceVector,
        out: &mut Vec<(DeviceId, Bid)>,
    ) -> Result<()> {
        let mut order: Vec<usize> = (0..self.children.len()).collect();
        order.sort_by_key(|&i| match &self.children[i] {
            AggregatorChild::Device(id) => *id,
            AggregatorChild::Node(node) => {
                let mut ids = Vec::new();
                node.collect_ids(&mut ids);
                ids.into_iter().min().unwrap_or(DeviceId(u32::MAX))
            }
        });
        for i in order {
            match &self.children[i] {
                AggregatorChild::Device(id) => {
                    let spec = devices
                        .get(id)
                        .ok_or_else(|| Error::Protocol(format!("unknown device {id} in topology")))?;
                    let bid = spec
                        .best_response(prices)
                        .map_err(|e| Error::Protocol(format!("device {id} failed: {e}")))?;
                    out.push((*id, bid));
                }
                AggregatorChild::Node(node) => node.gather(devices, prices, out)?,
            }
        }
        Ok(())
    }
}

pub struct InProcessTransport {
    horizon: usize,
    devices: BTreeMap<DeviceId, DeviceSpec>,
    ids: Vec<DeviceId>,
    topology: AggregatorNode,
    pending: Option<(usize, PriceVector)>,
}

impl InProcessTransport {
    pub fn new(horizon: usize, devices: Vec<(DeviceId, DeviceSpec)>) -> Result<Self> {
        let ids: Vec<DeviceId> = {
            let mut v: Vec<DeviceId> = devices.iter().map(|(id, _)| *id).collect();
            v.sort();
            v
        };
        let topology = AggregatorNode::flat(ids.iter().copied());
        Self::with_topology(horizon, devices, topology)
    }

    /// Builds the transport with an explicit aggregator hierarchy. The
    /// topology must reference each configured device exactly once.
    pub fn with_topology(
        horizon: usize,
        devices: Vec<(DeviceId, DeviceSpec)>,
        topology: AggregatorNode,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (id, spec) in devices {
            if spec.horizon() != horizon {
                return Err(Error::LengthMismatch { expected: horizon, got: spec.horizon() });
            }
            spec.validate()?;
            if map.insert(id, spec).is_some() {
                return Err(Error::Protocol(format!("duplicate device id {id}")));
            }
        }
        let ids: Vec<DeviceId> = map.keys().copied().collect();

        let mut topo_ids = Vec::new();
        topology.collect_ids(&mut topo_ids);
        let mut sorted = topo_ids.clone();
        sorted.sort();
        sorted.dedup();
        if sorted != ids || topo_ids.len() != ids.len() {
            return Err(Error::Protocol(
                "aggregator topology must cover each device exactly once".into(),
            ));
        }

        Ok(Self { horizon, devices: map, ids, topology, pending: None })
    }

    pub fn from_scenario(scenario: &ScenarioConfig) -> Result<Self> {
        Self::new(scenario.horizon, scenario.device_list())
    }
}

impl Transport for InProcessTransport {
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
        self.pending = Some((iteration, prices.clone()));
        Ok(self.ids.len())
    }

    fn collect_bids(&mut self, iteration: usize) -> Result<Vec<(DeviceId, Bid)>> {
        let (announced, prices) = self
            .pending
            .as_ref()
            .ok_or_else(|| Error::Protocol("collect before any price broadcast".into()))?;
        if *announced != iteration {
            return Err(Error::Protocol(format!(
                "collect for iteration {iteration} but iteration {announced} was announced"
            )));
        }
        let prices = prices.clone();
        let mut out = Vec::with_capacity(self.ids.len());
        self.topology.gather(&self.devices, &prices, &mut out)?;
        out.sort_by_key(|(id, _)| *id);
        Ok(out)
    }

    fn send_allocations(
        &mut self,
        demands: &[(DeviceId, DemandVector)],
        _prices: &PriceVector,
    ) -> Result<()> {
        for (id, _) in demands {
            if !self.devices.contains_key(id) {
                return Err(Error::Protocol(format!("allocation for unknown device {id}")));
            }
        }
        Ok(())
    }

    fn shutdown(&mut self) -> Result<()> {
        Ok(())
    }
}
