//! Pairwise coding for a common deadline.
//!
//! When every request shares one deadline `T`, restricting payloads to at
//! most two packets turns scheduling into budgeted selection: enumerate every
//! clique of size one (a vertex) or two (an edge) of the coding graph, give
//! each a cost (its airtime at the slower member rate) and a weight (summed
//! member benefits), and choose pairwise-disjoint cliques of maximum total
//! weight whose costs fit within the budget `T`.
//!
//! [`greedy`] runs the ratio-greedy with residual substitution and a final
//! best-single-clique comparison; its total weight is within `1 - 1/e` of
//! [`exact`]. [`coverage_greedy`] is the plain budgeted set-coverage greedy
//! without the disjointness constraint, kept as a differential reference:
//! both greedies consider the same cliques and cover the same elements for as
//! long as both keep selecting.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::CodingGraph;
use crate::model::{leq, DestIdx, PacketIdx, RequestId, Scenario, Transmission, EPS};

/// Limit accepted by [`exact`] unless the caller raises it.
pub const DEFAULT_EXACT_CLIQUE_LIMIT: usize = 22;

#[derive(Debug, Error, PartialEq)]
pub enum PairwiseError {
    #[error("request ({dest},{packet}) has deadline {found}, expected the common deadline {expected}")]
    HeterogeneousDeadlines {
        dest: String,
        packet: String,
        expected: f64,
        found: f64,
    },
    #[error("instance has {cliques} cliques, exact search is capped at {limit}")]
    InstanceTooLarge { cliques: usize, limit: usize },
}

/// One element of the coverage universe: a live request.
#[derive(Debug, Clone, PartialEq)]
pub struct PairVertex {
    pub dest: DestIdx,
    pub packet: PacketIdx,
    pub weight: f64,
    /// Airtime of a transmission at this destination's max rate.
    pub airtime: f64,
    pub max_rate: f64,
}

/// A candidate transmission: one or two elements, a cost, and a weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PairClique {
    /// Sorted vertex indices; length 1 or 2.
    pub members: Vec<usize>,
    /// Transmission delay at the slower member rate, seconds.
    pub cost: f64,
    /// Sum of member weights.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseInstance {
    pub vertices: Vec<PairVertex>,
    pub cliques: Vec<PairClique>,
    /// The common deadline, which is also the cost budget.
    pub budget: f64,
    pub packet_size: f64,
}

impl PairwiseInstance {
    fn covered_weight(&self, covered: &BTreeSet<usize>) -> f64 {
        covered.iter().map(|&v| self.vertices[v].weight).sum()
    }
}

/// Enumerate the pairwise instance for a scenario whose requests all share
/// deadline `common_deadline`: one singleton clique per coding-graph vertex,
/// one pair clique per edge, dropping any clique costing more than the
/// budget.
pub fn enumerate(
    s: &Scenario,
    common_deadline: f64,
) -> Result<PairwiseInstance, PairwiseError> {
    for (i, d) in s.destinations.iter().enumerate() {
        for (&j, req) in &d.wants {
            if (req.deadline - common_deadline).abs() > EPS {
                return Err(PairwiseError::HeterogeneousDeadlines {
                    dest: d.id.clone(),
                    packet: s.packets[j].clone(),
                    expected: common_deadline,
                    found: req.deadline,
                });
            }
            let _ = i;
        }
    }

    let g = CodingGraph::build(s);
    let vertices: Vec<PairVertex> = g
        .vertices()
        .iter()
        .map(|v| {
            let max_rate = s.destinations[v.dest].max_rate;
            PairVertex {
                dest: v.dest,
                packet: v.packet,
                weight: v.weight,
                airtime: s.packet_size / max_rate,
                max_rate,
            }
        })
        .collect();

    let mut cliques = Vec::new();
    for (u, v) in vertices.iter().enumerate() {
        cliques.push(PairClique {
            members: vec![u],
            cost: v.airtime,
            weight: v.weight,
        });
    }
    for u in 0..vertices.len() {
        for v in (u + 1)..vertices.len() {
            if g.adjacent(u, v) {
                cliques.push(PairClique {
                    members: vec![u, v],
                    cost: vertices[u].airtime.max(vertices[v].airtime),
                    weight: vertices[u].weight + vertices[v].weight,
                });
            }
        }
    }
    cliques.retain(|c| leq(c.cost, common_deadline));

    Ok(PairwiseInstance {
        vertices,
        cliques,
        budget: common_deadline,
        packet_size: s.packet_size,
    })
}

// ---------------------------------------------------------------------------
// Greedy selection
// ---------------------------------------------------------------------------

/// What happened to the clique considered in one greedy iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterationAction {
    /// Taken as-is.
    Selected,
    /// The considered clique overlapped the covered set; its uncovered
    /// residual singleton was taken instead.
    SelectedResidual { residual: usize },
    /// Adding it would overrun the budget.
    BudgetSkip,
    /// Everything it covers was already covered.
    Exhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Clique index picked by the ratio rule this iteration.
    pub considered: usize,
    pub action: IterationAction,
    /// Element coverage after the iteration.
    pub covered_after: BTreeSet<usize>,
}

/// Full record of one greedy run.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyRun {
    /// Output selection, in selection order.
    pub selection: Vec<usize>,
    /// Weight of the output (covered-element weight).
    pub total_weight: f64,
    /// Selections made by the iteration phase, before the best-single-clique
    /// comparison.
    pub phase_selection: Vec<usize>,
    /// Covered-element weight of the iteration phase.
    pub phase_weight: f64,
    pub iterations: Vec<IterationRecord>,
    /// 1-based index of the last iteration that selected a clique.
    pub last_selection_iteration: Option<usize>,
}

/// Residual weight of `clique`: summed weight of its members not yet covered.
fn residual_weight(inst: &PairwiseInstance, clique: usize, covered: &BTreeSet<usize>) -> f64 {
    inst.cliques[clique]
        .members
        .iter()
        .filter(|v| !covered.contains(v))
        .map(|&v| inst.vertices[v].weight)
        .sum()
}

/// Pick the pooled clique maximizing residual weight / cost. Ties break to
/// larger residual weight, then smaller cost, then enumeration order; both
/// greedies share this rule so their considered sequences are comparable.
fn consider_next(
    inst: &PairwiseInstance,
    pool: &[bool],
    covered: &BTreeSet<usize>,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, f64)> = None; // (id, residual, ratio)
    for (h, &alive) in pool.iter().enumerate() {
        if !alive {
            continue;
        }
        let res = residual_weight(inst, h, covered);
        let ratio = res / inst.cliques[h].cost;
        let better = match best {
            None => true,
            Some((_, bres, bratio)) => {
                if (ratio - bratio).abs() > EPS {
                    ratio > bratio
                } else if (res - bres).abs() > EPS {
                    res > bres
                } else {
                    (inst.cliques[best.unwrap().0].cost - inst.cliques[h].cost) > EPS
                }
            }
        };
        if better {
            best = Some((h, res, ratio));
        }
    }
    best.map(|(h, res, _)| (h, res))
}

fn singleton_of(inst: &PairwiseInstance, vertex: usize) -> usize {
    // singletons are enumerated first, one per vertex, in vertex order
    debug_assert_eq!(inst.cliques[vertex].members, vec![vertex]);
    vertex
}

/// The pairwise-coding greedy: ratio-greedy selection with residual
/// substitution on overlap, then keep the better of the covered weight and
/// the single heaviest clique.
pub fn greedy(inst: &PairwiseInstance) -> GreedyRun {
    let mut pool = vec![true; inst.cliques.len()];
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    let mut selection: Vec<usize> = Vec::new();
    let mut spent = 0.0;
    let mut iterations = Vec::new();
    let mut last_selection = None;

    while let Some((h, _res)) = consider_next(inst, &pool, &covered) {
        let k = iterations.len() + 1;
        let clique = &inst.cliques[h];
        let action;
        if !leq(spent + clique.cost, inst.budget) {
            pool[h] = false;
            action = IterationAction::BudgetSkip;
        } else {
            let overlap: Vec<usize> = clique
                .members
                .iter()
                .copied()
                .filter(|v| covered.contains(v))
                .collect();
            if overlap.is_empty() {
                selection.push(h);
                covered.extend(clique.members.iter().copied());
                spent += clique.cost;
                pool[h] = false;
                last_selection = Some(k);
                action = IterationAction::Selected;
            } else {
                let residual: Vec<usize> = clique
                    .members
                    .iter()
                    .copied()
                    .filter(|v| !covered.contains(v))
                    .collect();
                if let [v] = residual[..] {
                    let sub = singleton_of(inst, v);
                    assert!(pool[sub], "residual singleton must still be unconsidered");
                    selection.push(sub);
                    covered.insert(v);
                    spent += inst.cliques[sub].cost;
                    pool[h] = false;
                    pool[sub] = false;
                    last_selection = Some(k);
                    action = IterationAction::SelectedResidual { residual: sub };
                } else {
                    debug_assert!(residual.is_empty());
                    pool[h] = false;
                    action = IterationAction::Exhausted;
                }
            }
        }
        iterations.push(IterationRecord {
            considered: h,
            action,
            covered_after: covered.clone(),
        });
    }

    let phase_weight = inst.covered_weight(&covered);
    let best_single = (0..inst.cliques.len()).max_by(|&a, &b| {
        inst.cliques[a]
            .weight
            .partial_cmp(&inst.cliques[b].weight)
            .unwrap()
            .then(b.cmp(&a)) // first index wins ties
    });

    let (out_selection, total_weight) = match best_single {
        Some(h) if inst.cliques[h].weight > phase_weight + EPS => {
            (vec![h], inst.cliques[h].weight)
        }
        _ => (selection.clone(), phase_weight),
    };

    GreedyRun {
        selection: out_selection,
        total_weight,
        phase_selection: selection,
        phase_weight,
        iterations,
        last_selection_iteration: last_selection,
    }
}

/// The budgeted set-coverage greedy: the same ratio rule and budget skips,
/// but overlapping selections are allowed and residuals are never
/// substituted. Zero-residual candidates are dropped rather than selected
/// since they contribute nothing. Returns covered-element weight.
pub fn coverage_greedy(inst: &PairwiseInstance) -> GreedyRun {
    let mut pool = vec![true; inst.cliques.len()];
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    let mut selection: Vec<usize> = Vec::new();
    let mut spent = 0.0;
    let mut iterations = Vec::new();
    let mut last_selection = None;

    while let Some((h, res)) = consider_next(inst, &pool, &covered) {
        let k = iterations.len() + 1;
        let action;
        if res <= EPS {
            pool[h] = false;
            action = IterationAction::Exhausted;
        } else if !leq(spent + inst.cliques[h].cost, inst.budget) {
            pool[h] = false;
            action = IterationAction::BudgetSkip;
        } else {
            selection.push(h);
            covered.extend(inst.cliques[h].members.iter().copied());
            spent += inst.cliques[h].cost;
            pool[h] = false;
            last_selection = Some(k);
            action = IterationAction::Selected;
        }
        iterations.push(IterationRecord {
            considered: h,
            action,
            covered_after: covered.clone(),
        });
    }

    let covered_weight = inst.covered_weight(&covered);
    GreedyRun {
        selection: selection.clone(),
        total_weight: covered_weight,
        phase_selection: selection,
        phase_weight: covered_weight,
        iterations,
        last_selection_iteration: last_selection,
    }
}

// ---------------------------------------------------------------------------
// Exact oracle
// ---------------------------------------------------------------------------

/// Exhaustive optimum: the disjoint, budget-feasible clique collection of
/// maximum total weight, by branch and bound over ratio-ordered cliques with
/// a remaining-weight bound.
pub fn exact(
    inst: &PairwiseInstance,
    max_cliques: usize,
) -> Result<(Vec<usize>, f64), PairwiseError> {
    if inst.cliques.len() > max_cliques {
        return Err(PairwiseError::InstanceTooLarge {
            cliques: inst.cliques.len(),
            limit: max_cliques,
        });
    }
    assert!(inst.vertices.len() <= 128, "element masks are u128");

    let mut order: Vec<usize> = (0..inst.cliques.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = inst.cliques[a].weight / inst.cliques[a].cost;
        let rb = inst.cliques[b].weight / inst.cliques[b].cost;
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let masks: Vec<u128> = order
        .iter()
        .map(|&h| {
            inst.cliques[h]
                .members
                .iter()
                .fold(0u128, |m, &v| m | 1 << v)
        })
        .collect();
    let mut suffix = vec![0.0; order.len() + 1];
    for k in (0..order.len()).rev() {
        suffix[k] = suffix[k + 1] + inst.cliques[order[k]].weight;
    }

    struct Search<'a> {
        inst: &'a PairwiseInstance,
        order: &'a [usize],
        masks: &'a [u128],
        suffix: &'a [f64],
        best: Vec<usize>,
        best_weight: f64,
    }

    impl Search<'_> {
        fn dfs(
            &mut self,
            k: usize,
            taken: &mut Vec<usize>,
            used: u128,
            spent: f64,
            weight: f64,
        ) {
            if weight > self.best_weight {
                self.best_weight = weight;
                self.best = taken.clone();
            }
            if k == self.order.len() || weight + self.suffix[k] <= self.best_weight {
                return;
            }
            let h = self.order[k];
            let c = &self.inst.cliques[h];
            if self.masks[k] & used == 0 && leq(spent + c.cost, self.inst.budget) {
                taken.push(h);
                self.dfs(k + 1, taken, used | self.masks[k], spent + c.cost, weight + c.weight);
                taken.pop();
            }
            self.dfs(k + 1, taken, used, spent, weight);
        }
    }

    let mut search = Search {
        inst,
        order: &order,
        masks: &masks,
        suffix: &suffix,
        best: Vec::new(),
        best_weight: 0.0,
    };
    search.dfs(0, &mut Vec::new(), 0, 0.0, 0.0);
    Ok((search.best, search.best_weight))
}

/// Turn a selection into broadcast transmissions in selection order, each at
/// the slowest member rate, for export through the schedule schema.
pub fn selection_to_transmissions(
    inst: &PairwiseInstance,
    selection: &[usize],
) -> Vec<Transmission> {
    selection
        .iter()
        .map(|&h| {
            let c = &inst.cliques[h];
            let coded: BTreeSet<PacketIdx> =
                c.members.iter().map(|&v| inst.vertices[v].packet).collect();
            let rate = c
                .members
                .iter()
                .map(|&v| inst.vertices[v].max_rate)
                .min_by(|a, b| a.partial_cmp(b).unwrap())
                .expect("cliques are nonempty");
            let intended: BTreeSet<RequestId> = c
                .members
                .iter()
                .map(|&v| (inst.vertices[v].dest, inst.vertices[v].packet))
                .collect();
            Transmission::new(coded, rate, intended, inst.packet_size)
        })
        .collect()
}
