//! Synchronous round-based message passing with exact accounting.
//!
//! All cross-agent data movement in the solvers goes through
//! [`broadcast_round`]: every agent posts one payload, and each agent's
//! [`Mailbox`] then holds exactly the payloads of its neighborhood (which
//! includes itself). Mailboxes are rebuilt from scratch every round, so no
//! stale data can cross a round boundary, and reading a non-neighbor payload
//! is a hard error rather than silently empty.
//!
//! A round counts once globally in `comm_rounds` regardless of graph size;
//! `(i -> j)` and `(j -> i)` are distinct directed messages within that
//! round. Self-delivery is modeled but not counted as an edge message.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::Graph;

#[derive(Debug, Error, PartialEq)]
pub enum NetsimError {
    #[error("expected a payload for each of {want} agents, got {got}")]
    MissingPayload { want: usize, got: usize },
    #[error("agent {agent} attempted to read agent {from}'s payload outside its neighborhood")]
    NonNeighborAccess { agent: usize, from: usize },
    #[error("agent {agent} has no payload from neighbor {from} this round")]
    MissingNeighborPayload { agent: usize, from: usize },
}

/// Exact counters for communication rounds and local oracle work.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundLedger {
    pub comm_rounds: u64,
    /// Directed message counts keyed by 1-based `(from, to)`.
    #[serde(with = "edge_counts")]
    pub per_edge_messages: BTreeMap<(usize, usize), u64>,
    pub per_agent_subgrad_evals: Vec<u64>,
    pub per_agent_stoch_evals: Vec<u64>,
    pub per_agent_prox_solves: Vec<u64>,
}

/// JSON-friendly form for the directed edge counters: a list of
/// `[from, to, count]` triples (tuple map keys do not serialize to JSON).
mod edge_counts {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(usize, usize), u64>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        let rows: Vec<(usize, usize, u64)> =
            map.iter().map(|(&(a, b), &c)| (a, b, c)).collect();
        rows.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> Result<BTreeMap<(usize, usize), u64>, D::Error> {
        let rows = Vec::<(usize, usize, u64)>::deserialize(de)?;
        Ok(rows.into_iter().map(|(a, b, c)| ((a, b), c)).collect())
    }
}

impl RoundLedger {
    pub fn new(m: usize) -> Self {
        RoundLedger {
            comm_rounds: 0,
            per_edge_messages: BTreeMap::new(),
            per_agent_subgrad_evals: vec![0; m],
            per_agent_stoch_evals: vec![0; m],
            per_agent_prox_solves: vec![0; m],
        }
    }

    pub fn count_subgrad(&mut self, agent: usize) {
        self.per_agent_subgrad_evals[agent] += 1;
    }

    pub fn count_stoch(&mut self, agent: usize) {
        self.per_agent_stoch_evals[agent] += 1;
    }

    pub fn count_prox(&mut self, agent: usize) {
        self.per_agent_prox_solves[agent] += 1;
    }

    /// Exact and stochastic subgradient evaluations, summed over agents.
    pub fn total_oracle_evals(&self) -> u64 {
        self.per_agent_subgrad_evals.iter().sum::<u64>()
            + self.per_agent_stoch_evals.iter().sum::<u64>()
    }
}

/// One agent's inbound payloads for the current round only.
#[derive(Debug, Clone, PartialEq)]
pub struct Mailbox {
    agent: usize,
    in_neighborhood: Vec<bool>,
    payloads: BTreeMap<usize, Vec<f64>>,
}

impl Mailbox {
    pub fn agent(&self) -> usize {
        self.agent
    }

    /// Payload posted by `from` this round. Errors for any `from` outside
    /// the agent's neighborhood: locality is enforced, not advisory.
    pub fn payload(&self, from: usize) -> Result<&[f64], NetsimError> {
        if from >= self.in_neighborhood.len() || !self.in_neighborhood[from] {
            return Err(NetsimError::NonNeighborAccess { agent: self.agent, from });
        }
        self.payloads
            .get(&from)
            .map(|v| v.as_slice())
            .ok_or(NetsimError::MissingNeighborPayload { agent: self.agent, from })
    }
}

/// One synchronized broadcast: every agent posts `payloads[i]` to all of
/// `N_i`. Returns per-agent mailboxes and bumps the ledger by exactly one
/// round plus one message per directed edge.
pub fn broadcast_round(
    ledger: &mut RoundLedger,
    graph: &Graph,
    payloads: &[Vec<f64>],
) -> Result<Vec<Mailbox>, NetsimError> {
    let m = graph.agent_count();
    if payloads.len() != m {
        return Err(NetsimError::MissingPayload { want: m, got: payloads.len() });
    }
    ledger.comm_rounds += 1;
    for (a, b) in graph.edges() {
        // 1-based directed counters, both directions.
        *ledger.per_edge_messages.entry((a, b)).or_insert(0) += 1;
        *ledger.per_edge_messages.entry((b, a)).or_insert(0) += 1;
    }
    let mut boxes = Vec::with_capacity(m);
    for i in 0..m {
        let mut in_neighborhood = vec![false; m];
        let mut inbound = BTreeMap::new();
        for j in graph.neighbors(i) {
            in_neighborhood[j] = true;
            inbound.insert(j, payloads[j].clone());
        }
        boxes.push(Mailbox { agent: i, in_neighborhood, payloads: inbound });
    }
    Ok(boxes)
}

/// `sum_{j in N_i} L_ij * payload_j` for one agent, reading only through the
/// mailbox. Iterates the sparse row in column order so that stacking these
/// over all agents reproduces the block-wise Laplacian action bit for bit.
pub fn neighbor_weighted_sum(
    mailbox: &Mailbox,
    laplacian_row: &[(usize, f64)],
    d: usize,
) -> Result<Vec<f64>, NetsimError> {
    let mut out = vec![0.0; d];
    for &(j, coeff) in laplacian_row {
        let payload = mailbox.payload(j)?;
        for (o, p) in out.iter_mut().zip(payload) {
            *o += coeff * p;
        }
    }
    Ok(out)
}
