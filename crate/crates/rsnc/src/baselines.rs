//! Comparison algorithms: DSF coding, SIN-1, random linear network coding,
//! and deadline-oblivious index coding.
//!
//! DSF and index coding build a rate-oblivious coding graph (live requests,
//! edges requiring only distinct destinations and mutual decodability) and
//! broadcast the heaviest clique each round at a fixed rate every destination
//! can receive. DSF drops requests whose deadlines have already expired;
//! index coding never prunes and lets late requests miss in replay. SIN-1
//! sends uncoded packets ordered by urgency-per-requester. RLNC broadcasts
//! random linear combinations of all packets and a destination decodes only
//! once its received combinations plus held packets reach full rank.

use std::collections::BTreeSet;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bits::BitSet;
use crate::clique_search::{max_weight_clique_heuristic, Subgraph};
use crate::graph::CodingGraph;
use crate::model::{
    evaluate_schedule, leq, RequestId, Scenario, Schedule, SimState, Transmission, EPS,
};

/// Algorithm tags accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Rsnc,
    Dsf,
    Sin1,
    Rlnc,
    IndexCoding,
}

impl Algorithm {
    pub fn tag(&self) -> &'static str {
        match self {
            Algorithm::Rsnc => "rsnc",
            Algorithm::Dsf => "dsf",
            Algorithm::Sin1 => "sin1",
            Algorithm::Rlnc => "rlnc",
            Algorithm::IndexCoding => "index",
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rsnc" => Ok(Algorithm::Rsnc),
            "dsf" => Ok(Algorithm::Dsf),
            "sin1" => Ok(Algorithm::Sin1),
            "rlnc" => Ok(Algorithm::Rlnc),
            "index" => Ok(Algorithm::IndexCoding),
            other => Err(format!(
                "unknown algorithm {other:?}, expected one of rsnc, dsf, sin1, rlnc, index"
            )),
        }
    }
}

/// Knobs for the baseline runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineConfig {
    /// RNG seed for RLNC coefficient draws.
    pub seed: u64,
    /// RLNC coefficient field size; a power of two in 2..=256.
    pub field_size: u16,
    /// Send SIN-1 packets at the global minimum rate instead of the minimum
    /// over the packet's live requesters.
    pub sin1_global_min_rate: bool,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            seed: 0,
            field_size: 256,
            sin1_global_min_rate: false,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BaselineError {
    #[error("field size {0} is not a power of two in 2..=256")]
    InvalidFieldSize(u16),
}

/// Run any algorithm, including RSNC, against one scenario.
pub fn run_algorithm(
    s: &Scenario,
    algorithm: Algorithm,
    cfg: &BaselineConfig,
) -> Result<Schedule, BaselineError> {
    match algorithm {
        Algorithm::Rsnc => Ok(crate::scheduler::run_rsnc(s)),
        Algorithm::Dsf => Ok(run_dsf(s)),
        Algorithm::Sin1 => Ok(run_sin1(s, cfg)),
        Algorithm::Rlnc => run_rlnc(s, cfg),
        Algorithm::IndexCoding => Ok(run_index_coding(s)),
    }
}

// ---------------------------------------------------------------------------
// Rate-oblivious clique coding (DSF, index coding)
// ---------------------------------------------------------------------------

/// Coding graph with only the request and decodability conditions: every
/// outstanding want passing `admit` is a vertex; edges need distinct
/// destinations and XOR decodability, with no rate or deadline conditions.
fn build_rate_oblivious_graph(s: &Scenario, admit: impl Fn(f64) -> bool) -> CodingGraph {
    let mut vertices = Vec::new();
    for (i, d) in s.destinations.iter().enumerate() {
        for (&j, req) in &d.wants {
            if admit(req.deadline) {
                vertices.push(crate::graph::Vertex {
                    dest: i,
                    packet: j,
                    weight: req.benefit,
                    min_rate: if req.deadline > EPS {
                        s.packet_size / req.deadline
                    } else {
                        f64::INFINITY
                    },
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
            if decodable {
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
    }
    CodingGraph::from_parts(vertices, adj)
}

fn run_fixed_rate_clique_rounds(s: &Scenario, prune_expired: bool) -> Schedule {
    let Some(rate) = s.global_min_rate() else {
        return Schedule::empty();
    };
    let mut state = SimState::new(s);
    let mut txs: Vec<Transmission> = Vec::new();
    loop {
        let current = state.snapshot(s);
        let g = build_rate_oblivious_graph(&current, |deadline| {
            !prune_expired || deadline > EPS
        });
        if g.is_empty() {
            break;
        }
        let clique = max_weight_clique_heuristic(&Subgraph::full(&g));
        let coded: BTreeSet<usize> = clique
            .members()
            .iter()
            .map(|&u| g.vertices()[u].packet)
            .collect();
        let intended: BTreeSet<RequestId> = clique
            .members()
            .iter()
            .map(|&u| g.vertices()[u].request())
            .collect();
        let tx = Transmission::new(coded, rate, intended, s.packet_size);
        state
            .apply(s, &tx, txs.len())
            .expect("clique transmissions are well-formed");
        txs.push(tx);
    }
    let sched = evaluate_schedule(s, &txs).expect("replay of baseline output");
    debug_assert_eq!(sched.satisfied, state.satisfied);
    sched
}

/// DSF coding: max-weight clique per round on the rate-oblivious graph,
/// broadcast at the fixed global minimum rate; requests whose deadlines have
/// expired drop out of the graph.
pub fn run_dsf(s: &Scenario) -> Schedule {
    run_fixed_rate_clique_rounds(s, true)
}

/// Deadline-oblivious index coding: as DSF, but expired requests keep their
/// vertices and simply miss in replay.
pub fn run_index_coding(s: &Scenario) -> Schedule {
    run_fixed_rate_clique_rounds(s, false)
}

// ---------------------------------------------------------------------------
// SIN-1
// ---------------------------------------------------------------------------

/// SIN-1: every round scores each packet by its most urgent residual
/// deadline divided by its live requester count, and sends the
/// smallest-scored packet uncoded. A requester is live while its request can
/// still be met at the requester's own max rate; the session stops when no
/// live requester remains.
pub fn run_sin1(s: &Scenario, cfg: &BaselineConfig) -> Schedule {
    let mut state = SimState::new(s);
    let mut txs: Vec<Transmission> = Vec::new();
    loop {
        // live requesters per packet
        let mut per_packet: Vec<Vec<(usize, f64)>> = vec![Vec::new(); s.packets.len()];
        for (i, wants) in state.wants.iter().enumerate() {
            let d = &s.destinations[i];
            for (&j, req) in wants {
                let residual = req.deadline - state.elapsed;
                if leq(s.packet_size / d.max_rate, residual) {
                    per_packet[j].push((i, residual));
                }
            }
        }

        let mut choice: Option<(usize, f64)> = None;
        for (j, requesters) in per_packet.iter().enumerate() {
            if requesters.is_empty() {
                continue;
            }
            let urgency = requesters
                .iter()
                .map(|&(_, t)| t)
                .fold(f64::INFINITY, f64::min);
            let score = urgency / requesters.len() as f64;
            let better = match choice {
                None => true,
                Some((_, best)) => score < best - EPS, // ties keep the lower packet index
            };
            if better {
                choice = Some((j, score));
            }
        }
        let Some((j, _)) = choice else {
            break;
        };

        let rate = if cfg.sin1_global_min_rate {
            s.global_min_rate().expect("destinations exist")
        } else {
            per_packet[j]
                .iter()
                .map(|&(i, _)| s.destinations[i].max_rate)
                .fold(f64::INFINITY, f64::min)
        };
        let intended: BTreeSet<RequestId> = per_packet[j].iter().map(|&(i, _)| (i, j)).collect();
        let tx = Transmission::new([j].into_iter().collect(), rate, intended, s.packet_size);
        state
            .apply(s, &tx, txs.len())
            .expect("uncoded transmissions are well-formed");
        txs.push(tx);
    }
    let sched = evaluate_schedule(s, &txs).expect("replay of baseline output");
    debug_assert_eq!(sched.satisfied, state.satisfied);
    sched
}

// ---------------------------------------------------------------------------
// Random linear network coding
// ---------------------------------------------------------------------------

/// GF(2^w) arithmetic for coefficient fields of size 2..=256.
#[derive(Debug, Clone, Copy)]
struct Gf2w {
    bits: u32,
    /// Reduction polynomial with the leading term included.
    poly: u16,
}

impl Gf2w {
    fn new(field_size: u16) -> Result<Self, BaselineError> {
        // primitive polynomials for GF(2^w), w = 1..=8
        let poly = match field_size {
            2 => 0b11,
            4 => 0b111,
            8 => 0b1011,
            16 => 0b1_0011,
            32 => 0b10_0101,
            64 => 0b100_0011,
            128 => 0b1000_0011,
            256 => 0b1_0001_1011,
            other => return Err(BaselineError::InvalidFieldSize(other)),
        };
        Ok(Gf2w {
            bits: (field_size as u32).trailing_zeros(),
            poly,
        })
    }

    fn size(&self) -> u16 {
        1 << self.bits
    }

    fn mul(&self, a: u8, b: u8) -> u8 {
        let mut acc: u16 = 0;
        let mut a = a as u16;
        let mut b = b as u16;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a >> self.bits != 0 {
                a ^= self.poly;
            }
        }
        debug_assert!(acc >> self.bits == 0);
        acc as u8
    }

    fn inv(&self, a: u8) -> u8 {
        debug_assert!(a != 0);
        (1..self.size())
            .map(|b| b as u8)
            .find(|&b| self.mul(a, b) == 1)
            .expect("nonzero elements are invertible")
    }
}

/// Incremental row-echelon rank over GF(2^w). Rows are normalized to a
/// leading one at their pivot column.
struct RankTracker {
    gf: Gf2w,
    rows: Vec<Vec<u8>>,
    pivots: Vec<usize>,
}

impl RankTracker {
    fn with_known_packets(n: usize, known: impl Iterator<Item = usize>, gf: Gf2w) -> Self {
        let mut t = RankTracker {
            gf,
            rows: Vec::new(),
            pivots: Vec::new(),
        };
        for j in known {
            let mut unit = vec![0u8; n];
            unit[j] = 1;
            let innovative = t.absorb(unit);
            debug_assert!(innovative);
        }
        t
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `vec` against the basis; true iff it was innovative.
    fn absorb(&mut self, mut vec: Vec<u8>) -> bool {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let factor = vec[p];
            if factor != 0 {
                for (v, r) in vec.iter_mut().zip(row) {
                    *v ^= self.gf.mul(factor, *r);
                }
            }
        }
        let Some(pivot) = vec.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = self.gf.inv(vec[pivot]);
        for v in vec.iter_mut() {
            *v = self.gf.mul(inv, *v);
        }
        self.rows.push(vec);
        self.pivots.push(pivot);
        true
    }
}

/// RLNC: broadcast uniformly random linear combinations of all packets at
/// the global minimum rate. A destination decodes everything at the moment
/// its received combinations plus its held packets reach rank `n`; each of
/// its requests is then credited iff that moment beats the deadline. The
/// session ends when no unsatisfied request can still be met even if every
/// remaining reception were innovative.
pub fn run_rlnc(s: &Scenario, cfg: &BaselineConfig) -> Result<Schedule, BaselineError> {
    let gf = Gf2w::new(cfg.field_size)?;
    let n = s.packets.len();
    let Some(rate) = s.global_min_rate() else {
        return Ok(Schedule::empty());
    };
    let duration = s.packet_size / rate;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut trackers: Vec<RankTracker> = s
        .destinations
        .iter()
        .map(|d| RankTracker::with_known_packets(n, d.has.iter().copied(), gf))
        .collect();

    let mut txs: Vec<Transmission> = Vec::new();
    let mut satisfied = BTreeSet::new();
    let mut total_benefit = 0.0;
    let mut elapsed = 0.0;

    loop {
        let any_reachable = s.destinations.iter().enumerate().any(|(i, d)| {
            let deficit = n - trackers[i].rank();
            if deficit == 0 {
                return false; // already decoded; requests are decided
            }
            let earliest = elapsed + deficit as f64 * duration;
            d.wants.keys().any(|&j| leq(earliest, d.wants[&j].deadline))
        });
        if !any_reachable {
            break;
        }

        // uniformly random, not identically zero
        let mut coeffs = vec![0u8; n];
        loop {
            for c in coeffs.iter_mut() {
                *c = rng.random_range(0..gf.size()) as u8;
            }
            if coeffs.iter().any(|&c| c != 0) {
                break;
            }
        }
        elapsed += duration;

        let mut intended = BTreeSet::new();
        for (i, d) in s.destinations.iter().enumerate() {
            if trackers[i].rank() == n {
                continue;
            }
            trackers[i].absorb(coeffs.clone());
            if trackers[i].rank() == n {
                for (&j, req) in &d.wants {
                    if leq(elapsed, req.deadline) {
                        satisfied.insert((i, j));
                        total_benefit += req.benefit;
                        intended.insert((i, j));
                    }
                }
            }
        }

        let coded: BTreeSet<usize> = coeffs
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c != 0)
            .map(|(j, _)| j)
            .collect();
        txs.push(Transmission::new(coded, rate, intended, s.packet_size));
    }

    Ok(Schedule {
        transmissions: txs,
        satisfied,
        total_benefit,
    })
}

/// Seed mixer for deriving per-sample RLNC seeds; splitmix64 finalizer.
pub fn mix_seed(seed: u64, sample: u64) -> u64 {
    let mut z = seed ^ sample.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}
