//! Shared fixtures for unit tests.

use crate::model::Scenario;

/// The three-receiver session used throughout the tests: one fast receiver
/// with a tight deadline, two slow receivers with loose deadlines and
/// complementary side information.
pub fn golden_scenario() -> Scenario {
    Scenario::from_json(include_str!("../tests/data/golden.json")).expect("fixture parses")
}
