//! Discrete-time engine.
//!
//! A tick plans every drone from the same tick-start snapshot, then commits
//! the moves. Two drones that both move can still end up overlapping even
//! though each checked its own step against the other's old position; the
//! commit pass holds one of them in place (the farther one, unless only the
//! farther one has run out its wait timeout) until the tick is clean.

pub mod scenario;
pub mod trace;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry;
use crate::metrics::{DroneMetrics, RunMetrics};
use crate::planner::{self, Action, DroneState, PlannerConfig};

pub use scenario::{generate_scenario, Area, DroneSpec, Scenario, ScenarioParams};
pub use trace::{DroneSnapshot, TickRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trace: Vec<TickRecord>,
    pub metrics: RunMetrics,
}

pub fn initial_states(scenario: &Scenario) -> Vec<DroneState> {
    let mut states: Vec<DroneState> = scenario
        .drones
        .iter()
        .map(|d| DroneState::new(d.id, d.start, d.destination, scenario.d_r, scenario.speed))
        .collect();
    states.sort_by_key(|s| s.id);
    states
}

fn yields_in_commit(a: &DroneState, b: &DroneState, timeout: f64) -> bool {
    let timed_out = |s: &DroneState| s.wait_elapsed + 1e-9 >= timeout;
    let farther = a.position.y > b.position.y || (a.position.y == b.position.y && a.id > b.id);
    match (timed_out(a), timed_out(b)) {
        (true, false) => false,
        (false, true) => true,
        _ => farther,
    }
}

/// One simultaneous update of all drones.
pub fn step(states: &[DroneState], cfg: &PlannerConfig) -> Vec<DroneState> {
    let actions: Vec<Action> = states.iter().map(|s| planner::plan_step(s, states, cfg)).collect();
    let mut next: Vec<DroneState> = states.iter().zip(&actions).map(|(s, &a)| planner::advance(s, a, cfg.dt)).collect();

    let moved = |next: &[DroneState], k: usize| next[k].position != states[k].position;
    loop {
        let mut hold = vec![false; states.len()];
        for a in 0..states.len() {
            for b in a + 1..states.len() {
                if !moved(&next, a) && !moved(&next, b) {
                    continue;
                }
                let clash =
                    geometry::pair_overlaps(next[a].position, next[b].position, states[a].radius).unwrap_or(true);
                if !clash {
                    continue;
                }
                let victim = match (moved(&next, a), moved(&next, b)) {
                    (true, false) => a,
                    (false, true) => b,
                    _ if yields_in_commit(&states[a], &states[b], cfg.timeout) => a,
                    _ => b,
                };
                hold[victim] = true;
            }
        }
        if !hold.iter().any(|&h| h) {
            break;
        }
        for (k, _) in hold.iter().enumerate().filter(|(_, &h)| h) {
            next[k] = planner::advance(&states[k], Action::Wait, cfg.dt);
        }
    }
    next
}

fn check_safety(t: f64, states: &[DroneState]) -> Result<()> {
    for (k, a) in states.iter().enumerate() {
        for b in &states[k + 1..] {
            let c = geometry::clearance(a.position, b.position, a.radius)?;
            if geometry::pair_overlaps(a.position, b.position, a.radius)? {
                return Err(Error::SafetyViolation { t, i: a.id, j: b.id, signed: c.signed });
            }
        }
    }
    Ok(())
}

/// Simulate until every drone has arrived or `max_time` is reached.
pub fn run(scenario: &Scenario) -> Result<RunOutput> {
    scenario.validate()?;
    let cfg = scenario.planner_config()?;
    let mut states = initial_states(scenario);
    check_safety(0.0, &states)?;

    let max_ticks = (scenario.max_time / scenario.dt - 1e-9).ceil() as u64;
    let mut arrival_time: Vec<Option<f64>> = vec![None; states.len()];
    let mut trace = vec![TickRecord::capture(0.0, &states)];

    for tick in 1..=max_ticks {
        if states.iter().all(DroneState::is_arrived) {
            break;
        }
        let t = tick as f64 * scenario.dt;
        states = step(&states, &cfg);
        check_safety(t, &states)?;
        for (slot, s) in arrival_time.iter_mut().zip(&states) {
            if slot.is_none() && s.is_arrived() {
                *slot = Some(t);
            }
        }
        trace.push(TickRecord::capture(t, &states));
    }

    let start_of = |id: u32| scenario.drones.iter().find(|d| d.id == id).map(|d| d.start).expect("known id");
    let drones = states
        .iter()
        .zip(&arrival_time)
        .map(|(s, &arrival)| {
            let straight_line = start_of(s.id).distance(s.destination);
            DroneMetrics {
                id: s.id,
                straight_line,
                path_length: s.path_length,
                extra_distance: s.path_length - straight_line,
                wait_total: s.wait_total,
                avoided: s.avoided,
                waited: s.waited,
                arrived: s.is_arrived(),
                arrival_time: arrival,
            }
        })
        .collect();
    Ok(RunOutput { trace, metrics: RunMetrics { drones } })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub scenario: Scenario,
    pub output: RunOutput,
}

fn run_seed(seed: u64, params: &ScenarioParams) -> Result<SeedRun> {
    let scenario = generate_scenario(seed, params)?;
    let output = run(&scenario)?;
    Ok(SeedRun { seed, scenario, output })
}

/// Generate and run one scenario per seed. Results follow the input order;
/// `jobs > 1` runs seeds on a thread pool of that size.
pub fn batch(seeds: &[u64], params: &ScenarioParams, jobs: usize) -> Result<Vec<Result<SeedRun>>> {
    if seeds.is_empty() {
        return Err(invalid("no seeds given"));
    }
    if jobs <= 1 {
        return Ok(seeds.iter().map(|&s| run_seed(s, params)).collect());
    }
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(|| seeds.par_iter().map(|&s| run_seed(s, params)).collect()))
}
