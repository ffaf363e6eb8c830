//! The RSNC scheduler: joint coding and rate selection per transmission, and
//! the whole-session loop.
//!
//! Each transmission is scored by its net benefit: the benefit of requests it
//! delivers on time minus the benefit of requests its airtime renders
//! hopeless. The per-transmission selector sweeps the ladder of candidate
//! rates from slowest to fastest; at each rung it restricts the coding graph
//! to destinations that can receive that rate, finds a heavy clique there,
//! and scores the implied transmission. Lower rungs reach more receivers
//! (more coding), higher rungs finish sooner (less deadline risk); the best
//! net benefit wins, with losses as the tie-break.
//!
//! [`run_rsnc_exact`] is the testing oracle: it enumerates every ordered
//! partition of the coding graph into cliques and returns a benefit-maximal
//! schedule, which is exactly what the integer-program formulation of the
//! problem optimizes.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::clique_search::{max_weight_clique_heuristic_counted, Subgraph};
use crate::graph::{Clique, CodingGraph};
use crate::model::{
    evaluate_schedule, geq, leq, RequestId, Scenario, Schedule, SimState, Transmission,
    EPS,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchedulerError {
    #[error("coding graph has {vertices} vertices, exact search is capped at {limit}")]
    InstanceTooLarge { vertices: usize, limit: usize },
}

/// The distinct destination max-rates in ascending order: the candidate
/// transmission rates the selector sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct RateLadder {
    rates: Vec<f64>,
}

impl RateLadder {
    pub fn from_scenario(s: &Scenario) -> Self {
        let mut rates: Vec<f64> = s.destinations.iter().map(|d| d.max_rate).collect();
        rates.sort_by(|a, b| a.partial_cmp(b).expect("rates are finite"));
        rates.dedup();
        RateLadder { rates }
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }
}

/// Net benefit of broadcasting one coded set at one rate.
#[derive(Debug, Clone, PartialEq)]
pub struct NetBenefit {
    /// Benefit of requests delivered on time by this transmission.
    pub gain: f64,
    /// Benefit of graph requests that will definitely miss their deadlines
    /// once this transmission's airtime has passed.
    pub loss: f64,
    /// `gain - loss`.
    pub value: f64,
    /// Requests delivered now.
    pub delivered: BTreeSet<RequestId>,
    /// Requests rendered hopeless.
    pub doomed: BTreeSet<RequestId>,
}

/// Score a candidate transmission: the clique's packets XOR-ed and sent at
/// `rate` against the current scenario state.
///
/// A clique member counts as delivered iff the destination can receive the
/// rate, still wants the packet, holds every other coded packet, and the
/// airtime beats its deadline. Every other graph vertex counts as doomed iff
/// this airtime plus the fastest possible follow-up transmission to its
/// destination overruns its deadline.
pub fn net_benefit(s: &Scenario, g: &CodingGraph, q: &Clique, rate: f64) -> NetBenefit {
    let airtime = s.packet_size / rate;
    let coded: BTreeSet<usize> = q.members().iter().map(|&u| g.vertices()[u].packet).collect();

    let mut delivered = BTreeSet::new();
    let mut gain = 0.0;
    for &u in q.members() {
        let v = &g.vertices()[u];
        let d = &s.destinations[v.dest];
        let Some(req) = d.wants.get(&v.packet) else {
            continue;
        };
        let receivable = leq(rate, d.max_rate);
        let decodable = coded
            .iter()
            .all(|&p| p == v.packet || d.has.contains(&p));
        if receivable && decodable && leq(airtime, req.deadline) {
            delivered.insert(v.request());
            gain += req.benefit;
        }
    }

    let mut doomed = BTreeSet::new();
    let mut loss = 0.0;
    for v in g.vertices() {
        if delivered.contains(&v.request()) {
            continue;
        }
        let d = &s.destinations[v.dest];
        let Some(req) = d.wants.get(&v.packet) else {
            continue;
        };
        if !leq(airtime + s.packet_size / d.max_rate, req.deadline) {
            doomed.insert(v.request());
            loss += req.benefit;
        }
    }

    NetBenefit {
        gain,
        loss,
        value: gain - loss,
        delivered,
        doomed,
    }
}

struct Candidate {
    clique: Clique,
    rate: f64,
    metric: NetBenefit,
    rung: usize,
}

/// `a` strictly preferable to `b`: higher value, then lower loss, then higher
/// rate, then lower ladder rung, then lexicographically smaller clique.
fn preferable(a: &Candidate, b: &Candidate) -> bool {
    if (a.metric.value - b.metric.value).abs() > EPS {
        return a.metric.value > b.metric.value;
    }
    if (a.metric.loss - b.metric.loss).abs() > EPS {
        return a.metric.loss < b.metric.loss;
    }
    if (a.rate - b.rate).abs() > EPS {
        return a.rate > b.rate;
    }
    if a.rung != b.rung {
        return a.rung < b.rung;
    }
    a.clique.members() < b.clique.members()
}

/// Choose the coded set and rate for the next broadcast, or `None` when the
/// graph offers no transmission.
pub fn select_transmission(
    s: &Scenario,
    g: &CodingGraph,
) -> Option<(Transmission, NetBenefit)> {
    select_transmission_counted(s, g).0
}

/// Like [`select_transmission`], also reporting clique-search work units for
/// scaling measurements.
pub fn select_transmission_counted(
    s: &Scenario,
    g: &CodingGraph,
) -> (Option<(Transmission, NetBenefit)>, u64) {
    let ladder = RateLadder::from_scenario(s);
    let mut work = 0u64;
    let mut best: Option<Candidate> = None;

    for (rung, &floor) in ladder.rates().iter().enumerate() {
        let sub = Subgraph::filtered(g, |v| geq(s.destinations[v.dest].max_rate, floor));
        let (clique, w) = max_weight_clique_heuristic_counted(&sub);
        work += w;
        if clique.is_empty() {
            continue;
        }
        let rate = clique
            .members()
            .iter()
            .map(|&u| s.destinations[g.vertices()[u].dest].max_rate)
            .min_by(|a, b| a.partial_cmp(b).expect("rates are finite"))
            .expect("clique is nonempty");
        let metric = net_benefit(s, g, &clique, rate);
        debug_assert!(metric.delivered.is_disjoint(&metric.doomed));
        let cand = Candidate {
            clique,
            rate,
            metric,
            rung,
        };
        if best.as_ref().is_none_or(|b| preferable(&cand, b)) {
            best = Some(cand);
        }
    }

    let picked = best.map(|c| {
        let tx = g
            .clique_to_transmission(s, &c.clique)
            .expect("selector cliques are graph cliques");
        debug_assert!((tx.rate - c.rate).abs() < 1e-12);
        (tx, c.metric)
    });
    (picked, work)
}

/// Run the whole RSNC session: rebuild the coding graph against the evolving
/// state (holdings grown, deadlines shortened, hopeless requests dropped),
/// pick one transmission at a time, and stop when nothing schedulable
/// remains. The returned schedule is the from-scratch replay of the emitted
/// transmissions.
pub fn run_rsnc(s: &Scenario) -> Schedule {
    let mut state = SimState::new(s);
    let mut txs: Vec<Transmission> = Vec::new();
    loop {
        let current = state.snapshot(s);
        let g = CodingGraph::build(&current);
        if g.is_empty() {
            break;
        }
        let Some((tx, _)) = select_transmission(&current, &g) else {
            break;
        };
        state
            .apply(s, &tx, txs.len())
            .expect("scheduler transmissions are well-formed");
        txs.push(tx);
    }
    let sched = evaluate_schedule(s, &txs).expect("replay of the scheduler's own output");
    debug_assert_eq!(sched.satisfied, state.satisfied);
    sched
}

/// Limits for [`run_rsnc_exact`].
#[derive(Debug, Clone, Copy)]
pub struct ExactLimits {
    pub max_vertices: usize,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits { max_vertices: 8 }
    }
}

/// Exact optimum over ordered clique partitions of the coding graph, by
/// exhaustive enumeration with dominance memoization. This realizes the
/// integer-program formulation directly: every vertex is scheduled in exactly
/// one clique, per-transmission delay is the clique's slowest-member airtime,
/// and a request is credited iff its cumulative arrival beats its deadline.
pub fn run_rsnc_exact(s: &Scenario, limits: ExactLimits) -> Result<Schedule, SchedulerError> {
    let g = CodingGraph::build(s);
    let n = g.len();
    if n > limits.max_vertices {
        return Err(SchedulerError::InstanceTooLarge {
            vertices: n,
            limit: limits.max_vertices,
        });
    }
    if n == 0 {
        return Ok(Schedule::empty());
    }
    assert!(n <= 60, "vertex masks are u64");

    // neighbor masks, then every nonempty clique as a mask
    let neighbor: Vec<u64> = (0..n)
        .map(|u| {
            (0..n)
                .filter(|&v| g.adjacent(u, v))
                .fold(0u64, |m, v| m | 1 << v)
        })
        .collect();
    let full: u64 = if n == 64 { u64::MAX } else { (1 << n) - 1 };
    let mut cliques: Vec<u64> = Vec::new();
    for mask in 1..=full {
        let ok = (0..n)
            .filter(|&u| mask >> u & 1 == 1)
            .all(|u| mask & !(1 << u) & !neighbor[u] == 0);
        if ok {
            cliques.push(mask);
        }
    }

    let duration = |mask: u64| -> f64 {
        let slowest = (0..n)
            .filter(|&u| mask >> u & 1 == 1)
            .map(|u| s.destinations[g.vertices()[u].dest].max_rate)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap();
        s.packet_size / slowest
    };
    let deadline = |u: usize| -> f64 {
        let v = &g.vertices()[u];
        s.destinations[v.dest].wants[&v.packet].deadline
    };
    // fastest conceivable arrival for a vertex scheduled next
    let own_airtime: Vec<f64> = (0..n)
        .map(|u| s.packet_size / s.destinations[g.vertices()[u].dest].max_rate)
        .collect();

    struct Search<'a> {
        cliques: &'a [u64],
        durations: &'a [f64],
        weights: &'a [f64],
        deadlines: &'a [f64],
        own_airtime: &'a [f64],
        n: usize,
        best_benefit: f64,
        best_seq: Vec<u64>,
        // Pareto states per remaining-vertex mask: (elapsed, benefit)
        seen: HashMap<u64, Vec<(f64, f64)>>,
    }

    impl Search<'_> {
        fn dominated(&mut self, remaining: u64, elapsed: f64, benefit: f64) -> bool {
            let states = self.seen.entry(remaining).or_default();
            if states
                .iter()
                .any(|&(e, b)| e <= elapsed + 1e-12 && b >= benefit - 1e-12)
            {
                return true;
            }
            states.retain(|&(e, b)| !(elapsed <= e + 1e-12 && benefit >= b - 1e-12));
            states.push((elapsed, benefit));
            false
        }

        fn upper_bound(&self, remaining: u64, elapsed: f64) -> f64 {
            (0..self.n)
                .filter(|&u| remaining >> u & 1 == 1)
                .filter(|&u| leq(elapsed + self.own_airtime[u], self.deadlines[u]))
                .map(|u| self.weights[u])
                .sum()
        }

        fn dfs(&mut self, remaining: u64, elapsed: f64, benefit: f64, seq: &mut Vec<u64>) {
            if remaining == 0 {
                if benefit > self.best_benefit {
                    self.best_benefit = benefit;
                    self.best_seq = seq.clone();
                }
                return;
            }
            if benefit + self.upper_bound(remaining, elapsed) <= self.best_benefit {
                return;
            }
            if self.dominated(remaining, elapsed, benefit) {
                return;
            }
            for ci in 0..self.cliques.len() {
                let c = self.cliques[ci];
                if c & remaining != c {
                    continue;
                }
                let end = elapsed + self.durations[ci];
                let gained: f64 = (0..self.n)
                    .filter(|&u| c >> u & 1 == 1)
                    .filter(|&u| leq(end, self.deadlines[u]))
                    .map(|u| self.weights[u])
                    .sum();
                seq.push(c);
                self.dfs(remaining & !c, end, benefit + gained, seq);
                seq.pop();
            }
        }
    }

    let durations: Vec<f64> = cliques.iter().map(|&c| duration(c)).collect();
    let weights: Vec<f64> = g.vertices().iter().map(|v| v.weight).collect();
    let deadlines: Vec<f64> = (0..n).map(deadline).collect();
    let mut search = Search {
        cliques: &cliques,
        durations: &durations,
        weights: &weights,
        deadlines: &deadlines,
        own_airtime: &own_airtime,
        n,
        best_benefit: f64::NEG_INFINITY,
        best_seq: Vec::new(),
        seen: HashMap::new(),
    };
    search.dfs(full, 0.0, 0.0, &mut Vec::new());

    // materialize the winning partition; outcomes follow the enumeration's
    // own on-time accounting
    let mut transmissions = Vec::new();
    let mut satisfied = BTreeSet::new();
    let mut total_benefit = 0.0;
    let mut elapsed = 0.0;
    for &mask in &search.best_seq {
        let members: Vec<usize> = (0..n).filter(|&u| mask >> u & 1 == 1).collect();
        let clique = Clique::new(members.clone());
        let tx = g
            .clique_to_transmission(s, &clique)
            .expect("enumerated masks are cliques");
        elapsed += tx.duration;
        for &u in &members {
            if leq(elapsed, deadlines[u]) {
                satisfied.insert(g.vertices()[u].request());
                total_benefit += weights[u];
            }
        }
        transmissions.push(tx);
    }
    Ok(Schedule {
        transmissions,
        satisfied,
        total_benefit,
    })
}
