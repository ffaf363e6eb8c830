//! Deadline-constrained wireless broadcast with joint transmission-rate
//! selection and XOR network coding.
//!
//! A source must broadcast packets to destinations that hold side
//! information, want specific packets by specific deadlines, and differ in
//! the rates they can receive. Lower rates reach more receivers and open more
//! coding opportunities but burn airtime that later deadlines need; this
//! crate implements the RSNC scheduler that navigates that tradeoff, exact
//! oracles for testing it, the pairwise-coding greedy with its `1 - 1/e`
//! guarantee for the common-deadline case, baseline policies to compare
//! against (DSF, SIN-1, random linear network coding, deadline-oblivious
//! index coding), and a reproducible experiment harness.
//!
//! # Example
//!
//! One fast receiver with a tight deadline and two slow receivers with
//! complementary side information: coding everything at the slow rate would
//! blow the 4 s deadline, so the scheduler sends the urgent packet alone at
//! full rate, then codes the rest.
//!
//! ```
//! use rsnc::{deadline_miss_ratio, run_rsnc, Scenario};
//!
//! let scenario = Scenario::from_json(r#"{
//!     "packet_size": 10.0,
//!     "packets": ["p1", "p2", "p3"],
//!     "destinations": [
//!         {"id": "d1", "max_rate": 5.0, "has": ["p2", "p3"],
//!          "wants": [{"packet": "p1", "deadline": 4.0, "benefit": 1.0}]},
//!         {"id": "d2", "max_rate": 2.0, "has": ["p1", "p3"],
//!          "wants": [{"packet": "p2", "deadline": 7.0, "benefit": 1.0}]},
//!         {"id": "d3", "max_rate": 2.0, "has": ["p1", "p2"],
//!          "wants": [{"packet": "p3", "deadline": 7.0, "benefit": 1.0}]}
//!     ]
//! }"#).unwrap();
//!
//! let schedule = run_rsnc(&scenario);
//! assert_eq!(schedule.total_benefit, 3.0);
//! assert_eq!(deadline_miss_ratio(&schedule, &scenario), 0.0);
//! ```

pub mod baselines;
mod bits;
pub mod clique_search;
pub mod graph;
pub mod harness;
pub mod model;
pub mod pairwise;
pub mod scheduler;

#[cfg(test)]
pub(crate) mod testutil;

pub use baselines::{run_dsf, run_index_coding, run_rlnc, run_sin1, Algorithm, BaselineConfig};
pub use graph::{Clique, CodingGraph};
pub use model::{
    deadline_miss_ratio, evaluate_schedule, validate_scenario, Scenario, Schedule, Transmission,
};
pub use scheduler::{run_rsnc, run_rsnc_exact, ExactLimits};
