//! Property tests over randomized scenarios: feasibility of clique
//! transmissions, replay accounting identities, clique-search soundness, and
//! the pairwise greedy's output constraints.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use rsnc::clique_search::{max_weight_clique_exact, max_weight_clique_heuristic, Subgraph};
use rsnc::graph::{Clique, CodingGraph};
use rsnc::model::{
    deadline_miss_ratio, evaluate_schedule, validate_scenario, Destination, Request,
    Scenario,
};
use rsnc::pairwise;
use rsnc::scheduler::{net_benefit, run_rsnc, select_transmission};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
struct DestSpec {
    wants: Vec<bool>,
    has: Vec<bool>,
    rate: f64,
    deadlines: Vec<f64>,
    benefits: Vec<f64>,
}

fn scenario_strategy(max_n: usize, max_m: usize) -> impl Strategy<Value = Scenario> {
    (1..=max_n, 1..=max_m, 1.0f64..20.0)
        .prop_flat_map(|(n, m, packet_size)| {
            let dest = (
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(any::<bool>(), n),
                0.5f64..20.0,
                prop::collection::vec(0.1f64..30.0, n),
                prop::collection::vec(0.1f64..5.0, n),
            )
                .prop_map(|(wants, has, rate, deadlines, benefits)| DestSpec {
                    wants,
                    has,
                    rate,
                    deadlines,
                    benefits,
                });
            (
                Just(n),
                prop::collection::vec(dest, m),
                Just(packet_size),
            )
        })
        .prop_map(|(n, specs, packet_size)| {
            let destinations = specs
                .into_iter()
                .enumerate()
                .map(|(i, spec)| {
                    let wants: BTreeMap<usize, Request> = (0..n)
                        .filter(|&j| spec.wants[j])
                        .map(|j| {
                            (
                                j,
                                Request {
                                    deadline: spec.deadlines[j],
                                    benefit: spec.benefits[j],
                                },
                            )
                        })
                        .collect();
                    let has: BTreeSet<usize> = (0..n)
                        .filter(|&j| !spec.wants[j] && spec.has[j])
                        .collect();
                    Destination {
                        id: format!("d{}", i + 1),
                        max_rate: spec.rate,
                        has,
                        wants,
                    }
                })
                .collect();
            Scenario {
                packet_size,
                packets: (1..=n).map(|j| format!("p{j}")).collect(),
                destinations,
            }
        })
}

proptest! {
    // every singleton, every edge, and the heuristic's pick are cliques, and
    // each converts into a transmission that the replay fully satisfies
    #[test]
    fn clique_transmissions_are_always_feasible(s in scenario_strategy(5, 5)) {
        prop_assert!(validate_scenario(&s).is_ok());
        let g = CodingGraph::build(&s);
        let mut cliques: Vec<Clique> = (0..g.len()).map(|u| Clique::new(vec![u])).collect();
        for u in 0..g.len() {
            for v in (u + 1)..g.len() {
                if g.adjacent(u, v) {
                    cliques.push(Clique::new(vec![u, v]));
                }
            }
        }
        let heur = max_weight_clique_heuristic(&Subgraph::full(&g));
        if !heur.is_empty() {
            cliques.push(heur);
        }
        for q in &cliques {
            let tx = g.clique_to_transmission(&s, q).unwrap();
            let sched = evaluate_schedule(&s, std::slice::from_ref(&tx)).unwrap();
            for id in &tx.intended {
                prop_assert!(sched.satisfied.contains(id), "unsatisfied member {id:?}");
            }
        }
    }

    // replay accounting: satisfied requests arrive by their deadlines, the
    // benefit equals the independent sum, and permuting the schedule never
    // breaks those invariants
    #[test]
    fn replay_accounting_is_consistent(s in scenario_strategy(5, 5), flip in any::<bool>()) {
        let mut txs = run_rsnc(&s).transmissions;
        if flip {
            txs.reverse();
        }
        let sched = evaluate_schedule(&s, &txs).unwrap();
        let direct: f64 = sched
            .satisfied
            .iter()
            .map(|&(i, j)| s.destinations[i].wants[&j].benefit)
            .sum();
        prop_assert!((sched.total_benefit - direct).abs() < 1e-9);

        // recompute arrival of each satisfied pair with a separate walk
        let mut holdings: Vec<BTreeSet<usize>> =
            s.destinations.iter().map(|d| d.has.clone()).collect();
        let mut decoded_at: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut now = 0.0;
        for tx in &sched.transmissions {
            now += tx.duration;
            for (i, d) in s.destinations.iter().enumerate() {
                if tx.rate > d.max_rate + EPS {
                    continue;
                }
                let missing: Vec<usize> = tx
                    .coded_set
                    .iter()
                    .copied()
                    .filter(|j| !holdings[i].contains(j))
                    .collect();
                if let [j] = missing[..] {
                    holdings[i].insert(j);
                    decoded_at.entry((i, j)).or_insert(now);
                }
            }
        }
        for id in &sched.satisfied {
            let (i, j) = *id;
            let deadline = s.destinations[i].wants[&j].deadline;
            let arrival = decoded_at.get(id).copied();
            prop_assert!(arrival.is_some(), "satisfied pair never decoded");
            prop_assert!(arrival.unwrap() <= deadline + EPS);
        }
        let ratio = deadline_miss_ratio(&sched, &s);
        prop_assert!((0.0..=1.0).contains(&ratio));
    }

    // the greedy clique is a valid maximal clique and never beats the exact
    // oracle
    #[test]
    fn heuristic_clique_is_sound(s in scenario_strategy(4, 4)) {
        let g = CodingGraph::build(&s);
        if g.len() > 18 {
            return Ok(());
        }
        let sub = Subgraph::full(&g);
        let heur = max_weight_clique_heuristic(&sub);
        prop_assert!(g.is_clique(&heur));
        let exact = max_weight_clique_exact(&sub, 20).unwrap();
        prop_assert!(g.clique_weight(&heur) <= g.clique_weight(&exact) + EPS);
    }

    // the selector's metric keeps delivered and doomed disjoint and its
    // value is exactly gain - loss; the chosen transmission is feasible as
    // the next broadcast
    #[test]
    fn selector_metric_is_coherent(s in scenario_strategy(5, 5)) {
        let g = CodingGraph::build(&s);
        if let Some((tx, m)) = select_transmission(&s, &g) {
            prop_assert!(m.delivered.is_disjoint(&m.doomed));
            prop_assert!((m.value - (m.gain - m.loss)).abs() < 1e-9);
            let sched = evaluate_schedule(&s, std::slice::from_ref(&tx)).unwrap();
            for id in &tx.intended {
                prop_assert!(sched.satisfied.contains(id));
            }
            // a hand re-evaluation of the metric on the winning clique
            let members: Vec<usize> = tx
                .intended
                .iter()
                .map(|&(i, j)| g.vertex_index(i, j).unwrap())
                .collect();
            let again = net_benefit(&s, &g, &Clique::new(members), tx.rate);
            prop_assert!((again.value - m.value).abs() < 1e-9);
        }
    }

    // pairwise greedy output: pairwise-disjoint cliques within budget, and
    // the coverage-greedy reference never covers more weight
    #[test]
    fn pairwise_selection_respects_constraints(s0 in scenario_strategy(4, 4), t in 0.5f64..40.0) {
        let mut s = s0;
        for d in &mut s.destinations {
            for req in d.wants.values_mut() {
                req.deadline = t;
            }
        }
        let inst = pairwise::enumerate(&s, t).unwrap();
        let run = pairwise::greedy(&inst);

        let mut covered = BTreeSet::new();
        let mut spent = 0.0;
        for &h in &run.selection {
            for &v in &inst.cliques[h].members {
                prop_assert!(covered.insert(v), "selection overlaps");
            }
            spent += inst.cliques[h].cost;
        }
        prop_assert!(spent <= inst.budget + EPS);

        let reference = pairwise::coverage_greedy(&inst);
        prop_assert!(reference.total_weight <= run.total_weight + EPS);

        if inst.cliques.len() <= 18 {
            let (_, opt) = pairwise::exact(&inst, 18).unwrap();
            let bound = (1.0 - (-1.0f64).exp()) * opt;
            prop_assert!(run.total_weight >= bound - 1e-9);
            prop_assert!(run.total_weight <= opt + 1e-9);
        }
    }

    // relaxing every deadline can only help a fixed schedule
    #[test]
    fn relaxed_deadlines_keep_schedules_feasible(s in scenario_strategy(5, 5), slack in 0.0f64..20.0) {
        let sched = run_rsnc(&s);
        let mut relaxed = s.clone();
        for d in &mut relaxed.destinations {
            for req in d.wants.values_mut() {
                req.deadline += slack;
            }
        }
        let replayed = evaluate_schedule(&relaxed, &sched.transmissions).unwrap();
        prop_assert!(sched.satisfied.is_subset(&replayed.satisfied));
        prop_assert!(replayed.total_benefit >= sched.total_benefit - 1e-9);
    }
}
