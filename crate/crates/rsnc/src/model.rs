//! Domain types for broadcast problem instances and schedules.
//!
//! A [`Scenario`] describes one broadcast session: a source holds `n`
//! equal-size packets and must deliver them over a shared wireless channel to
//! `m` destinations. Each destination already holds some packets (side
//! information usable for XOR decoding), wants others, and attaches a
//! reception deadline and a benefit to every wanted packet. The link from the
//! source to each destination supports transmissions only up to that
//! destination's maximum rate.
//!
//! [`evaluate_schedule`] is the shared outcome oracle: it replays an ordered
//! transmission list against a scenario, growing side information as packets
//! decode, and reports which requests were delivered by their deadlines. All
//! scheduling algorithms in this crate are judged by this one replay.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for comparisons of generated real quantities
/// (rates, deadlines, arrival times) at boundaries.
pub const EPS: f64 = 1e-9;

/// `a <= b` within [`EPS`].
#[inline]
pub(crate) fn leq(a: f64, b: f64) -> bool {
    a <= b + EPS
}

/// `a >= b` within [`EPS`].
#[inline]
pub(crate) fn geq(a: f64, b: f64) -> bool {
    a + EPS >= b
}

/// Strictly positive and not NaN.
#[inline]
pub(crate) fn is_positive(x: f64) -> bool {
    x > 0.0
}

/// Destination index into [`Scenario::destinations`].
pub type DestIdx = usize;
/// Packet index into [`Scenario::packets`].
pub type PacketIdx = usize;
/// A (destination, wanted packet) request, the unit of benefit accounting.
pub type RequestId = (DestIdx, PacketIdx);

/// Deadline and benefit attached to one wanted packet at one destination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Request {
    /// Latest acceptable arrival time, seconds from session start.
    pub deadline: f64,
    /// Benefit credited if the packet arrives by the deadline.
    pub benefit: f64,
}

/// One receiver node.
#[derive(Debug, Clone, PartialEq)]
pub struct Destination {
    pub id: String,
    /// Maximum transmission rate this destination can receive, data units/s.
    pub max_rate: f64,
    /// Side information: packets already held, usable for XOR decoding.
    pub has: BTreeSet<PacketIdx>,
    /// Outstanding requests, keyed by packet index.
    pub wants: BTreeMap<PacketIdx, Request>,
}

/// A complete problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Size of every packet, data units.
    pub packet_size: f64,
    /// Packet identifiers; algorithms work with indices into this list.
    pub packets: Vec<String>,
    pub destinations: Vec<Destination>,
}

impl Scenario {
    /// Total number of (destination, packet) requests.
    pub fn request_count(&self) -> usize {
        self.destinations.iter().map(|d| d.wants.len()).sum()
    }

    /// All requests in (destination, packet) order.
    pub fn requests(&self) -> impl Iterator<Item = (RequestId, Request)> + '_ {
        self.destinations
            .iter()
            .enumerate()
            .flat_map(|(i, d)| d.wants.iter().map(move |(&j, &req)| ((i, j), req)))
    }

    /// Minimum max-rate over all destinations, the fixed broadcast rate used
    /// by rate-oblivious policies. `None` when there are no destinations.
    pub fn global_min_rate(&self) -> Option<f64> {
        self.destinations
            .iter()
            .map(|d| d.max_rate)
            .min_by(|a, b| a.partial_cmp(b).expect("rates are finite"))
    }
}

/// One broadcast: an XOR payload, the chosen rate, and the requests it is
/// meant to serve.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    /// Packets XOR-ed into the payload. Nonempty.
    pub coded_set: BTreeSet<PacketIdx>,
    /// Broadcast rate, data units/s.
    pub rate: f64,
    /// Airtime, seconds: packet size divided by rate.
    pub duration: f64,
    /// Requests this transmission is planned to satisfy.
    pub intended: BTreeSet<RequestId>,
}

impl Transmission {
    pub fn new(
        coded_set: BTreeSet<PacketIdx>,
        rate: f64,
        intended: BTreeSet<RequestId>,
        packet_size: f64,
    ) -> Self {
        Transmission {
            coded_set,
            rate,
            duration: packet_size / rate,
            intended,
        }
    }
}

/// An evaluated transmission sequence: outcomes are as determined by replay.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub transmissions: Vec<Transmission>,
    /// Requests delivered by their deadlines.
    pub satisfied: BTreeSet<RequestId>,
    /// Sum of benefits over `satisfied`.
    pub total_benefit: f64,
}

impl Schedule {
    pub fn empty() -> Self {
        Schedule {
            transmissions: Vec::new(),
            satisfied: BTreeSet::new(),
            total_benefit: 0.0,
        }
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Outcome of [`validate_scenario`]: hard invariant violations plus warnings
/// for degenerate-but-legal instances.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every [`Scenario`] invariant, reporting all violations with their
/// locations rather than stopping at the first.
pub fn validate_scenario(s: &Scenario) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = s.packets.len();

    if !is_positive(s.packet_size) {
        report
            .violations
            .push(format!("packet_size must be positive, got {}", s.packet_size));
    }

    let mut seen = BTreeSet::new();
    for p in &s.packets {
        if !seen.insert(p.as_str()) {
            report.violations.push(format!("duplicate packet id {p:?}"));
        }
    }
    let mut seen = BTreeSet::new();
    for d in &s.destinations {
        if !seen.insert(d.id.as_str()) {
            report
                .violations
                .push(format!("duplicate destination id {:?}", d.id));
        }
    }

    for d in &s.destinations {
        if !is_positive(d.max_rate) {
            report
                .violations
                .push(format!("max_rate must be positive at {}, got {}", d.id, d.max_rate));
        }
        for &j in &d.has {
            if j >= n {
                report
                    .violations
                    .push(format!("unknown packet index {j} in has at {}", d.id));
            }
        }
        for (&j, req) in &d.wants {
            if j >= n {
                report
                    .violations
                    .push(format!("unknown packet index {j} in wants at {}", d.id));
                continue;
            }
            if d.has.contains(&j) {
                report
                    .violations
                    .push(format!("overlap at ({},{})", d.id, s.packets[j]));
            }
            if !is_positive(req.deadline) {
                report.violations.push(format!(
                    "deadline must be positive at ({},{}), got {}",
                    d.id, s.packets[j], req.deadline
                ));
            }
            if !is_positive(req.benefit) {
                report.violations.push(format!(
                    "benefit must be positive at ({},{}), got {}",
                    d.id, s.packets[j], req.benefit
                ));
            }
        }
    }

    if s.request_count() == 0 {
        report.warnings.push("nothing to schedule".to_string());
    }

    report
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error("transmission {index} has an empty coded set")]
    EmptyCodedSet { index: usize },
    #[error("transmission {index} references unknown packet index {packet}")]
    UnknownPacket { index: usize, packet: usize },
}

/// Mutable per-destination state walked forward by the replay and by the
/// schedulers. Holdings grow as packets decode; wants shrink as requests are
/// delivered or become moot (the packet arrived, on time or not).
#[derive(Debug, Clone)]
pub(crate) struct SimState {
    pub has: Vec<BTreeSet<PacketIdx>>,
    pub wants: Vec<BTreeMap<PacketIdx, Request>>,
    /// Time consumed by transmissions applied so far.
    pub elapsed: f64,
    pub satisfied: BTreeSet<RequestId>,
    pub total_benefit: f64,
}

impl SimState {
    pub fn new(s: &Scenario) -> Self {
        SimState {
            has: s.destinations.iter().map(|d| d.has.clone()).collect(),
            wants: s.destinations.iter().map(|d| d.wants.clone()).collect(),
            elapsed: 0.0,
            satisfied: BTreeSet::new(),
            total_benefit: 0.0,
        }
    }

    /// Apply one broadcast. Every destination that can receive the rate and
    /// is missing exactly one packet of the coded set decodes that packet;
    /// decoded packets join the holdings, and outstanding requests for them
    /// are credited when the arrival beats the deadline.
    pub fn apply(
        &mut self,
        s: &Scenario,
        tx: &Transmission,
        tx_index: usize,
    ) -> Result<(), ReplayError> {
        if tx.coded_set.is_empty() {
            return Err(ReplayError::EmptyCodedSet { index: tx_index });
        }
        if let Some(&bad) = tx.coded_set.iter().find(|&&j| j >= s.packets.len()) {
            return Err(ReplayError::UnknownPacket {
                index: tx_index,
                packet: bad,
            });
        }
        debug_assert!((tx.duration - s.packet_size / tx.rate).abs() < 1e-6);

        self.elapsed += tx.duration;
        let arrival = self.elapsed;

        for (i, dest) in s.destinations.iter().enumerate() {
            if !leq(tx.rate, dest.max_rate) {
                continue;
            }
            let mut missing = tx.coded_set.iter().filter(|j| !self.has[i].contains(j));
            let decoded = match (missing.next(), missing.next()) {
                (Some(&j), None) => j,
                _ => continue, // nothing new, or more than one unknown
            };
            self.has[i].insert(decoded);
            if let Some(req) = self.wants[i].remove(&decoded) {
                if leq(arrival, req.deadline) {
                    self.satisfied.insert((i, decoded));
                    self.total_benefit += req.benefit;
                }
            }
        }
        Ok(())
    }

    /// Snapshot the current state as a scenario whose deadlines are the
    /// residual times `T - elapsed`. Outstanding requests whose residual is
    /// non-positive are retained; graph builders decide what to admit.
    pub fn snapshot(&self, base: &Scenario) -> Scenario {
        Scenario {
            packet_size: base.packet_size,
            packets: base.packets.clone(),
            destinations: base
                .destinations
                .iter()
                .enumerate()
                .map(|(i, d)| Destination {
                    id: d.id.clone(),
                    max_rate: d.max_rate,
                    has: self.has[i].clone(),
                    wants: self.wants[i]
                        .iter()
                        .map(|(&j, req)| {
                            (
                                j,
                                Request {
                                    deadline: req.deadline - self.elapsed,
                                    benefit: req.benefit,
                                },
                            )
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Replay `transmissions` in order against `s` and report the outcome.
///
/// A request (i, j) is satisfied iff, at some transmission, destination `i`
/// can receive the rate, holds every other coded packet, and the cumulative
/// arrival time does not exceed the deadline. Decoded packets join the
/// destination's holdings for subsequent transmissions.
pub fn evaluate_schedule(
    s: &Scenario,
    transmissions: &[Transmission],
) -> Result<Schedule, ReplayError> {
    let mut state = SimState::new(s);
    for (idx, tx) in transmissions.iter().enumerate() {
        state.apply(s, tx, idx)?;
    }
    Ok(Schedule {
        transmissions: transmissions.to_vec(),
        satisfied: state.satisfied,
        total_benefit: state.total_benefit,
    })
}

/// Fraction of requests not delivered by their deadlines; 0 by convention
/// when the scenario has no requests.
pub fn deadline_miss_ratio(sched: &Schedule, s: &Scenario) -> f64 {
    let total = s.request_count();
    if total == 0 {
        return 0.0;
    }
    (total - sched.satisfied.len()) as f64 / total as f64
}

// ---------------------------------------------------------------------------
// JSON interchange
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum ScenarioParseError {
    #[error("invalid scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("destination {dest} references unknown packet {packet:?}")]
    UnknownPacket { dest: String, packet: String },
    #[error("destination {dest} lists packet {packet:?} more than once")]
    DuplicateEntry { dest: String, packet: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    packet_size: f64,
    packets: Vec<String>,
    destinations: Vec<DestinationDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DestinationDoc {
    id: String,
    max_rate: f64,
    has: Vec<String>,
    wants: Vec<WantDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WantDoc {
    packet: String,
    deadline: f64,
    benefit: f64,
}

impl Scenario {
    /// Parse the scenario JSON document format. Field names are a contract;
    /// unknown fields are rejected.
    pub fn from_json(text: &str) -> Result<Scenario, ScenarioParseError> {
        let doc: ScenarioDoc = serde_json::from_str(text)?;
        let index: BTreeMap<&str, usize> = doc
            .packets
            .iter()
            .enumerate()
            .map(|(j, p)| (p.as_str(), j))
            .collect();
        let lookup = |dest: &str, packet: &str| -> Result<usize, ScenarioParseError> {
            index
                .get(packet)
                .copied()
                .ok_or_else(|| ScenarioParseError::UnknownPacket {
                    dest: dest.to_string(),
                    packet: packet.to_string(),
                })
        };

        let mut destinations = Vec::with_capacity(doc.destinations.len());
        for d in &doc.destinations {
            let mut has = BTreeSet::new();
            for p in &d.has {
                if !has.insert(lookup(&d.id, p)?) {
                    return Err(ScenarioParseError::DuplicateEntry {
                        dest: d.id.clone(),
                        packet: p.clone(),
                    });
                }
            }
            let mut wants = BTreeMap::new();
            for w in &d.wants {
                let j = lookup(&d.id, &w.packet)?;
                let req = Request {
                    deadline: w.deadline,
                    benefit: w.benefit,
                };
                if wants.insert(j, req).is_some() {
                    return Err(ScenarioParseError::DuplicateEntry {
                        dest: d.id.clone(),
                        packet: w.packet.clone(),
                    });
                }
            }
            destinations.push(Destination {
                id: d.id.clone(),
                max_rate: d.max_rate,
                has,
                wants,
            });
        }
        Ok(Scenario {
            packet_size: doc.packet_size,
            packets: doc.packets,
            destinations,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = ScenarioDoc {
            packet_size: self.packet_size,
            packets: self.packets.clone(),
            destinations: self
                .destinations
                .iter()
                .map(|d| DestinationDoc {
                    id: d.id.clone(),
                    max_rate: d.max_rate,
                    has: d.has.iter().map(|&j| self.packets[j].clone()).collect(),
                    wants: d
                        .wants
                        .iter()
                        .map(|(&j, req)| WantDoc {
                            packet: self.packets[j].clone(),
                            deadline: req.deadline,
                            benefit: req.benefit,
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("scenario serializes")
    }
}

/// Schedule export document: ordered transmissions with their time spans
/// plus the outcome summary.
#[derive(Debug, Serialize)]
pub struct ScheduleDoc {
    pub transmissions: Vec<TransmissionDoc>,
    pub satisfied: Vec<RequestRefDoc>,
    pub total_benefit: f64,
    pub miss_ratio: f64,
}

#[derive(Debug, Serialize)]
pub struct TransmissionDoc {
    pub coded: Vec<String>,
    pub rate: f64,
    pub start: f64,
    pub end: f64,
    pub intended: Vec<RequestRefDoc>,
}

#[derive(Debug, Serialize)]
pub struct RequestRefDoc {
    pub destination: String,
    pub packet: String,
}

/// Render a schedule in the export document format.
pub fn schedule_doc(s: &Scenario, sched: &Schedule) -> ScheduleDoc {
    let req_ref = |&(i, j): &RequestId| RequestRefDoc {
        destination: s.destinations[i].id.clone(),
        packet: s.packets[j].clone(),
    };
    let mut start = 0.0;
    let transmissions = sched
        .transmissions
        .iter()
        .map(|tx| {
            let end = start + tx.duration;
            let doc = TransmissionDoc {
                coded: tx.coded_set.iter().map(|&j| s.packets[j].clone()).collect(),
                rate: tx.rate,
                start,
                end,
                intended: tx.intended.iter().map(req_ref).collect(),
            };
            start = end;
            doc
        })
        .collect();
    ScheduleDoc {
        transmissions,
        satisfied: sched.satisfied.iter().map(req_ref).collect(),
        total_benefit: sched.total_benefit,
        miss_ratio: deadline_miss_ratio(sched, s),
    }
}
