use rand::Rng;

use super::Network;
use crate::rng::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flow {
    pub source: usize,
    pub destination: usize,
}

/// Source/destination pairs plus the allowed next hops of every node for
/// every destination.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSet {
    pub flows: Vec<Flow>,
    /// Distinct destinations in increasing order.
    pub destinations: Vec<usize>,
    /// `routing[d][i]` holds the link ids node `i` may use toward
    /// destinations[d]; empty for `i == destination`.
    pub routing: Vec<Vec<Vec<usize>>>,
}

impl FlowSet {
    /// Routing sets default to every outgoing link of a node.
    pub fn new(net: &Network, flows: Vec<Flow>) -> Self {
        let mut destinations: Vec<usize> = flows.iter().map(|f| f.destination).collect();
        destinations.sort_unstable();
        destinations.dedup();
        let routing = destinations
            .iter()
            .map(|&d| {
                (0..net.num_nodes())
                    .map(|i| if i == d { Vec::new() } else { net.out_links(i).to_vec() })
                    .collect()
            })
            .collect();
        Self {
            flows,
            destinations,
            routing,
        }
    }

    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn destination_index(&self, d: usize) -> Option<usize> {
        self.destinations.binary_search(&d).ok()
    }
}

/// Every node picks one uniformly random destination that is neither itself
/// nor a neighbor. Nodes without such a candidate are skipped.
pub fn assign_random_flows(net: &Network, seed: u64) -> FlowSet {
    let mut rng = seeded_rng(seed, 1);
    let mut flows = Vec::new();
    for i in 0..net.num_nodes() {
        let candidates: Vec<usize> = (0..net.num_nodes()).filter(|&d| d != i && !net.adjacent(i, d)).collect();
        if candidates.is_empty() {
            log::warn!("node {i} has no non-adjacent destination; no flow assigned");
            continue;
        }
        let d = candidates[rng.random_range(0..candidates.len())];
        flows.push(Flow {
            source: i,
            destination: d,
        });
    }
    FlowSet::new(net, flows)
}
