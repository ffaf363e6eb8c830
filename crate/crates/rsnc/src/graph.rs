//! The rate/deadline-aware coding graph.
//!
//! Vertices are live requests (destination `i`, wanted packet `j`) that can
//! still meet their deadlines at the destination's own maximum rate. An edge
//! joins two requests that one coded broadcast can serve together: distinct
//! destinations, XOR-decodable payloads (same packet, or each side already
//! holds the other's packet), and a rate window wide enough that both
//! deadlines survive the shared transmission.
//!
//! Any clique therefore converts into a feasible transmission: XOR the
//! members' packets and broadcast at the slowest member rate; every member
//! receives, decodes its wanted packet, and meets its deadline.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::bits::BitSet;
use crate::model::{leq, DestIdx, PacketIdx, RequestId, Scenario, Transmission, EPS};

/// One live request admitted into the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub dest: DestIdx,
    pub packet: PacketIdx,
    /// Benefit of the request; the vertex weight.
    pub weight: f64,
    /// Slowest rate that still meets the deadline: packet size / deadline.
    pub min_rate: f64,
}

impl Vertex {
    pub fn request(&self) -> RequestId {
        (self.dest, self.packet)
    }
}

/// A set of pairwise-adjacent vertices, stored as sorted vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Clique(Vec<usize>);

impl Clique {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Clique(members)
    }

    pub fn empty() -> Self {
        Clique(Vec::new())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex set is not a clique of the graph")]
    NotAClique,
    #[error("cannot form a transmission from an empty clique")]
    EmptyClique,
}

/// The coding graph over a scenario's live requests.
#[derive(Debug, Clone)]
pub struct CodingGraph {
    vertices: Vec<Vertex>,
    adj: Vec<BitSet>,
}

impl CodingGraph {
    /// Build the graph for `s`. Vertices are requests whose deadline is
    /// reachable at the destination's maximum rate; edges follow the
    /// distinct-destination, decodability, and mutual-rate conditions.
    pub fn build(s: &Scenario) -> CodingGraph {
        let mut vertices = Vec::new();
        for (i, d) in s.destinations.iter().enumerate() {
            for (&j, req) in &d.wants {
                if req.deadline <= EPS {
                    continue;
                }
                let min_rate = s.packet_size / req.deadline;
                if leq(min_rate, d.max_rate) {
                    vertices.push(Vertex {
                        dest: i,
                        packet: j,
                        weight: req.benefit,
                        min_rate,
                    });
                }
            }
        }

        let n = vertices.len();
        let mut adj = vec![BitSet::new(n); n];
        for u in 0..n {
            for v in (u + 1)..n {
                let (a, b) = (&vertices[u], &vertices[v]);
                if a.dest == b.dest {
                    continue;
                }
                let decodable = a.packet == b.packet
                    || (s.destinations[b.dest].has.contains(&a.packet)
                        && s.destinations[a.dest].has.contains(&b.packet));
                if !decodable {
                    continue;
                }
                let rates_ok = leq(a.min_rate, s.destinations[b.dest].max_rate)
                    && leq(b.min_rate, s.destinations[a.dest].max_rate);
                if !rates_ok {
                    continue;
                }
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
        CodingGraph { vertices, adj }
    }

    /// Assemble a graph from prebuilt parts; used by baseline policies that
    /// define their own admission conditions.
    pub(crate) fn from_parts(vertices: Vec<Vertex>, adj: Vec<BitSet>) -> CodingGraph {
        debug_assert_eq!(vertices.len(), adj.len());
        CodingGraph { vertices, adj }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        u != v && self.adj[u].contains(v)
    }

    pub(crate) fn neighbors(&self, u: usize) -> &BitSet {
        &self.adj[u]
    }

    pub fn vertex_index(&self, dest: DestIdx, packet: PacketIdx) -> Option<usize> {
        self.vertices
            .iter()
            .position(|v| v.dest == dest && v.packet == packet)
    }

    pub fn is_clique(&self, q: &Clique) -> bool {
        let m = q.members();
        m.iter().all(|&u| u < self.len())
            && m.iter()
                .enumerate()
                .all(|(k, &u)| m[k + 1..].iter().all(|&v| self.adjacent(u, v)))
    }

    /// Sum of member weights.
    pub fn clique_weight(&self, q: &Clique) -> f64 {
        q.members().iter().map(|&u| self.vertices[u].weight).sum()
    }

    /// Convert a clique into the transmission it stands for: XOR of the
    /// members' (distinct) packets at the slowest member rate, intended for
    /// every member request.
    pub fn clique_to_transmission(
        &self,
        s: &Scenario,
        q: &Clique,
    ) -> Result<Transmission, GraphError> {
        if q.is_empty() {
            return Err(GraphError::EmptyClique);
        }
        if !self.is_clique(q) {
            return Err(GraphError::NotAClique);
        }
        let coded_set: BTreeSet<PacketIdx> =
            q.members().iter().map(|&u| self.vertices[u].packet).collect();
        let rate = q
            .members()
            .iter()
            .map(|&u| s.destinations[self.vertices[u].dest].max_rate)
            .min_by(|a, b| a.partial_cmp(b).expect("rates are finite"))
            .expect("clique is nonempty");
        let intended: BTreeSet<RequestId> =
            q.members().iter().map(|&u| self.vertices[u].request()).collect();
        Ok(Transmission::new(coded_set, rate, intended, s.packet_size))
    }

    /// Edge list dump for debugging, one `i,j i',j'` line per edge in vertex
    /// order. Not a stability contract.
    pub fn edge_list_dump(&self) -> String {
        let mut out = String::new();
        for u in 0..self.len() {
            for v in self.adj[u].iter_ones().filter(|&v| v > u) {
                let (a, b) = (&self.vertices[u], &self.vertices[v]);
                out.push_str(&format!(
                    "{},{} {},{}\n",
                    a.dest, a.packet, b.dest, b.packet
                ));
            }
        }
        out
    }
}
