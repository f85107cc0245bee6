//! Fixtures shared by the criterion benchmarks.

use vlcswarm::{generate_scenario, DroneState, Scenario, ScenarioParams};

/// Default-parameter scenario for `seed`.
pub fn default_scenario(seed: u64) -> Scenario {
    generate_scenario(seed, &ScenarioParams::default()).expect("defaults are feasible")
}

/// Tick-start states of a default scenario.
pub fn default_states(seed: u64) -> Vec<DroneState> {
    vlcswarm::simulator::initial_states(&default_scenario(seed))
}
