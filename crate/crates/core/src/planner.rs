//! Per-drone, per-tick decision procedure.
//!
//! Each drone heads straight for its destination. When the next step would
//! bring it into another drone's no-entry area, the drone nearer the camera
//! (smaller `y`) bypasses the area while the farther one stops and waits.
//! A drone that has waited for `timeout` seconds starts to bypass as well.
//!
//! All decisions read a tick-start snapshot only, so the drones of one tick
//! can be planned in any order (or concurrently) with identical results.

use serde::{Deserialize, Serialize};

use crate::geometry::{self, Clearance, DetectableBand, Point3};

/// Slack on distance comparisons against `speed * dt`.
const STEP_EPS: f64 = 1e-9;

/// Heading increment of the fallback detour sweep, in degrees.
const SWEEP_STEP_DEG: f64 = 15.0;

/// Seconds of following one side of an obstacle before turning around.
const FOLLOW_LIMIT: f64 = 20.0;

/// Bookkeeping of an ongoing bypass.
///
/// A bypass keeps circling the nearest no-entry area on the side it started
/// on until the straight step is free again *and* gets the drone closer to
/// its destination than where the bypass began. Re-deciding the side every
/// tick makes a drone shuttle in and out of pockets formed by two areas that
/// almost touch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetourMemory {
    /// `+1` circles counter-clockwise in the x-z plane, `-1` clockwise.
    pub side: f64,
    /// Distance to the destination when the bypass began.
    pub hit_distance: f64,
    /// Seconds spent moving on this bypass.
    pub elapsed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Moving,
    Detouring,
    Waiting,
    Arrived,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Moving => "Moving",
            Mode::Detouring => "Detouring",
            Mode::Waiting => "Waiting",
            Mode::Arrived => "Arrived",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroneState {
    pub id: u32,
    pub position: Point3,
    pub destination: Point3,
    /// Sphere radius `d_r`.
    pub radius: f64,
    pub speed: f64,
    pub mode: Mode,
    /// Length of the current uninterrupted wait, seconds.
    pub wait_elapsed: f64,
    pub wait_total: f64,
    pub path_length: f64,
    /// Ever detoured.
    pub avoided: bool,
    /// Ever waited.
    pub waited: bool,
    pub detour: Option<DetourMemory>,
}

impl DroneState {
    pub fn new(id: u32, start: Point3, destination: Point3, radius: f64, speed: f64) -> Self {
        Self {
            id,
            position: start,
            destination,
            radius,
            speed,
            mode: Mode::Moving,
            wait_elapsed: 0.0,
            wait_total: 0.0,
            path_length: 0.0,
            avoided: false,
            waited: false,
            detour: None,
        }
    }

    pub fn step_length(&self, dt: f64) -> f64 {
        self.speed * dt
    }

    pub fn is_arrived(&self) -> bool {
        self.mode == Mode::Arrived
    }

    /// Arbitration order: the drone nearer the camera goes first; equal
    /// depths fall back to the lower id.
    fn has_priority_over(&self, opponent_y: f64, opponent_id: u32) -> bool {
        self.position.y < opponent_y || (self.position.y == opponent_y && self.id < opponent_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    /// Move (at most one step) toward `target`; `detour` is set on bypass moves.
    MoveToward {
        target: Point3,
        detour: Option<DetourMemory>,
    },
    Wait,
    /// Snap onto the destination.
    Arrive,
}

/// An opponent whose no-entry area the tentative step would enter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conflict {
    pub opponent_id: u32,
    /// Clearance of the tentative position against the opponent.
    pub clearance: Clearance,
    pub opponent_y: f64,
    /// Opponent's mode at the start of the tick.
    pub opponent_mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    pub dt: f64,
    /// Continuous wait after which a waiting drone starts to bypass.
    pub timeout: f64,
    /// Extra clearance (meters, in the mover's plane) kept around no-entry areas.
    pub margin: f64,
    /// When set, moves may not leave this band of camera distances.
    pub band: Option<DetectableBand>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self { dt: 0.1, timeout: 3.0, margin: 0.05, band: None }
    }
}

/// Whether moving `me` to `candidate` keeps it clear of `other`.
///
/// A position outside the margin is always fine. Inside the margin a move is
/// still accepted when it does not reduce the clearance, so a drone that was
/// squeezed by a neighbour can back out.
fn admissible_against(me: &DroneState, candidate: Point3, other: &DroneState, margin: f64) -> Option<Clearance> {
    let c = geometry::clearance(candidate, other.position, me.radius).ok()?;
    if c.signed > margin {
        return Some(c);
    }
    let now = geometry::clearance(me.position, other.position, me.radius).ok()?;
    (c.signed > 0.0 && c.signed >= now.signed).then_some(c)
}

fn band_admissible(me: &DroneState, candidate: Point3, band: Option<DetectableBand>) -> bool {
    match band {
        None => true,
        Some(b) => {
            b.contains(candidate)
                || (!b.contains(me.position)
                    && (candidate.norm() - b.center).abs() <= (me.position.norm() - b.center).abs())
        }
    }
}

fn opponents<'a>(me: &'a DroneState, others: &'a [DroneState]) -> impl Iterator<Item = &'a DroneState> + 'a {
    others.iter().filter(move |o| o.id != me.id)
}

/// Opponents that `candidate` would violate.
pub fn conflicts_at(me: &DroneState, candidate: Point3, others: &[DroneState], margin: f64) -> Vec<Conflict> {
    opponents(me, others)
        .filter_map(|o| match admissible_against(me, candidate, o, margin) {
            Some(_) => None,
            None => Some(Conflict {
                opponent_id: o.id,
                clearance: geometry::clearance(candidate, o.position, me.radius).unwrap_or(Clearance {
                    delta: 0.0,
                    threshold: 0.0,
                    signed: f64::NEG_INFINITY,
                }),
                opponent_y: o.position.y,
                opponent_mode: o.mode,
            }),
        })
        .collect()
}

fn admissible(me: &DroneState, candidate: Point3, others: &[DroneState], cfg: &PlannerConfig) -> bool {
    candidate.is_finite()
        && band_admissible(me, candidate, cfg.band)
        && opponents(me, others).all(|o| admissible_against(me, candidate, o, cfg.margin).is_some())
}

/// Straight-line step toward the destination, clamped onto it.
fn tentative_step(me: &DroneState, dt: f64) -> (Point3, bool) {
    let s = me.step_length(dt);
    let to_goal = me.destination - me.position;
    let dist = to_goal.norm();
    if dist <= s + STEP_EPS {
        (me.destination, true)
    } else {
        (me.position + to_goal * (s / dist), false)
    }
}

/// Decide this tick's action for `me` given the tick-start states of all drones.
/// `others` may include `me`; it is skipped by id.
pub fn plan_step(me: &DroneState, others: &[DroneState], cfg: &PlannerConfig) -> Action {
    if me.is_arrived() {
        return Action::Arrive;
    }
    let (tentative, arriving) = tentative_step(me, cfg.dt);
    let conflicts = conflicts_at(me, tentative, others, cfg.margin);
    let straight_ok = conflicts.is_empty() && band_admissible(me, tentative, cfg.band);
    let straight = if arriving { Action::Arrive } else { Action::MoveToward { target: tentative, detour: None } };
    if straight_ok && (arriving || !keeps_following(me, tentative, others, cfg)) {
        return straight;
    }

    // Only a drone that is under way will clear the path; arrived or standing
    // drones are bypassed like fixed obstacles.
    let must_yield = conflicts.iter().any(|c| {
        matches!(c.opponent_mode, Mode::Moving | Mode::Detouring) && !me.has_priority_over(c.opponent_y, c.opponent_id)
    });
    let timed_out = me.wait_elapsed + STEP_EPS >= cfg.timeout;
    if must_yield && !timed_out {
        return Action::Wait;
    }

    let (target, memory) = detour_step(me, &conflicts, others, cfg);
    if target != me.position {
        Action::MoveToward { target, detour: Some(memory) }
    } else if straight_ok {
        straight
    } else {
        Action::Wait
    }
}

/// Opponent with the smallest clearance from where `me` stands.
fn nearest_wall<'a>(me: &'a DroneState, others: &'a [DroneState]) -> Option<(&'a DroneState, Clearance)> {
    opponents(me, others)
        .filter_map(|o| geometry::clearance(me.position, o.position, me.radius).ok().map(|c| (o, c)))
        .min_by(|a, b| a.1.signed.total_cmp(&b.1.signed))
}

fn keeps_following(me: &DroneState, tentative: Point3, others: &[DroneState], cfg: &PlannerConfig) -> bool {
    let Some(memory) = me.detour else {
        return false;
    };
    if tentative.distance(me.destination) < memory.hit_distance - STEP_EPS {
        return false;
    }
    let reach = cfg.margin + 2.0 * me.step_length(cfg.dt);
    nearest_wall(me, others).is_some_and(|(_, c)| c.signed <= reach)
}

fn detour_step(
    me: &DroneState,
    conflicts: &[Conflict],
    others: &[DroneState],
    cfg: &PlannerConfig,
) -> (Point3, DetourMemory) {
    let here = me.position.distance(me.destination);
    let memory = me.detour.map(|m| {
        if m.elapsed < FOLLOW_LIMIT {
            m
        } else {
            DetourMemory { side: -m.side, hit_distance: here, elapsed: 0.0 }
        }
    });

    if let Some(m) = memory {
        if let Some((wall, _)) = nearest_wall(me, others) {
            if let Some(c) =
                follow_candidates(me, wall, m.side, cfg).into_iter().find(|&c| admissible(me, c, others, cfg))
            {
                return (c, m);
            }
        }
    }

    let target = compute_detour(me, conflicts, others, cfg);
    let memory = memory.unwrap_or_else(|| DetourMemory {
        side: side_of(me, target, conflicts, others),
        hit_distance: here,
        elapsed: 0.0,
    });
    (target, memory)
}

/// Which way around the most pressing conflict the move to `target` turns.
fn side_of(me: &DroneState, target: Point3, conflicts: &[Conflict], others: &[DroneState]) -> f64 {
    let center = conflicts
        .iter()
        .min_by(|a, b| a.clearance.signed.total_cmp(&b.clearance.signed))
        .and_then(|c| others.iter().find(|o| o.id == c.opponent_id))
        .and_then(|o| geometry::project_onto_plane(me.position.y, o.position).ok());
    let Some(center) = center else {
        return 1.0;
    };
    let r = me.position - center;
    let d = target - me.position;
    if r.x * d.z - r.z * d.x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Candidates that keep circling `wall` on `side`, best first.
///
/// The first two step along a circle just outside the wall's no-entry area
/// (with and without the straight step's depth change); the rest sweep the
/// x-z plane from the tangent outward.
fn follow_candidates(me: &DroneState, wall: &DroneState, side: f64, cfg: &PlannerConfig) -> Vec<Point3> {
    let s = me.step_length(cfg.dt);
    let (Ok(center), Ok(c)) = (
        geometry::project_onto_plane(me.position.y, wall.position),
        geometry::clearance(me.position, wall.position, me.radius),
    ) else {
        return Vec::new();
    };
    let (rx, rz) = (me.position.x - center.x, me.position.z - center.z);
    let rho = rx.hypot(rz);
    if rho <= 1e-12 {
        return Vec::new();
    }
    let want = c.threshold + cfg.margin + 0.2 * s;
    let phi = rz.atan2(rx);
    let (tentative, _) = tentative_step(me, cfg.dt);
    let vy = tentative.y - me.position.y;

    let mut out = Vec::with_capacity(26);
    for dy in [vy, 0.0] {
        let h = (s * s - dy * dy).max(0.25 * s * s).sqrt();
        let dy = dy.signum() * dy.abs().min((s * s - h * h).max(0.0).sqrt());
        let a = phi + side * h / want.max(rho);
        let (mut dx, mut dz) = (center.x + want * a.cos() - me.position.x, center.z + want * a.sin() - me.position.z);
        let len = dx.hypot(dz);
        if len > h {
            dx *= h / len;
            dz *= h / len;
        }
        out.push(me.position + Point3::new(dx, dy, dz));
    }

    let (tx, tz) = (-side * rz / rho, side * rx / rho);
    let n = (360.0 / SWEEP_STEP_DEG) as usize;
    for k in 0..n {
        let a = -side * (k as f64 * SWEEP_STEP_DEG).to_radians();
        let (sa, ca) = a.sin_cos();
        out.push(me.position + Point3::new(tx * ca - tz * sa, 0.0, tx * sa + tz * ca) * s);
    }
    out
}

/// Bypass position reachable within one step.
///
/// First tries tangent sliding: the part of the x-z motion that points into
/// a conflicting projected disk is removed and the step is rescaled to full
/// speed. If that is still blocked, headings in the plane orthogonal to the
/// camera ray are swept in 15 degree increments, nearest to the goal first,
/// followed by the two directions along the ray. Returns the current position when every candidate is blocked.
pub fn compute_detour(me: &DroneState, conflicts: &[Conflict], others: &[DroneState], cfg: &PlannerConfig) -> Point3 {
    let s = me.step_length(cfg.dt);
    let (tentative, _) = tentative_step(me, cfg.dt);

    if let Some(slid) = tangent_slide(me, tentative, conflicts, others, s) {
        if admissible(me, slid, others, cfg) {
            return slid;
        }
    }

    let mut candidates = sweep_candidates(me, s);
    candidates.sort_by(|a, b| a.distance(me.destination).total_cmp(&b.distance(me.destination)));
    candidates.extend(ray_candidates(me, s));
    candidates.into_iter().find(|&c| admissible(me, c, others, cfg)).unwrap_or(me.position)
}

fn tangent_slide(
    me: &DroneState,
    tentative: Point3,
    conflicts: &[Conflict],
    others: &[DroneState],
    step: f64,
) -> Option<Point3> {
    let v = tentative - me.position;
    let (mut vx, mut vz) = (v.x, v.z);
    let mut modified = false;
    for conflict in conflicts {
        let Some(other) = others.iter().find(|o| o.id == conflict.opponent_id) else {
            continue;
        };
        let Ok(center) = geometry::project_onto_plane(me.position.y, other.position) else {
            continue;
        };
        let (nx, nz) = (me.position.x - center.x, me.position.z - center.z);
        let len = nx.hypot(nz);
        if len <= 1e-12 {
            continue;
        }
        let (nx, nz) = (nx / len, nz / len);
        let inward = vx * nx + vz * nz;
        if inward < 0.0 {
            vx -= inward * nx;
            vz -= inward * nz;
            modified = true;
        }
    }
    if !modified {
        return Some(tentative);
    }
    let slid = Point3::new(vx, v.y, vz);
    if slid.norm() < 1e-3 * step {
        return None;
    }
    Some(me.position + slid.normalized()? * step)
}

/// One-step candidates on a circle orthogonal to the camera ray through `me`.
fn sweep_candidates(me: &DroneState, step: f64) -> Vec<Point3> {
    let Some(ray) = me.position.normalized() else {
        return Vec::new();
    };
    let goal = me.destination - me.position;
    let e1 = (goal - ray * goal.dot(ray))
        .normalized()
        .or_else(|| ray.cross(Point3::new(0.0, 0.0, 1.0)).normalized())
        .or_else(|| ray.cross(Point3::new(1.0, 0.0, 0.0)).normalized());
    let Some(e1) = e1 else {
        return Vec::new();
    };
    let e2 = ray.cross(e1);
    let n = (360.0 / SWEEP_STEP_DEG) as usize;
    (0..n)
        .map(|k| {
            let theta = (k as f64 * SWEEP_STEP_DEG).to_radians();
            me.position + (e1 * theta.cos() + e2 * theta.sin()) * step
        })
        .collect()
}

/// Last resort when boxed in: back away from (or toward) the camera along
/// the ray, which changes the drone's own projected size.
fn ray_candidates(me: &DroneState, step: f64) -> Vec<Point3> {
    me.position.normalized().map(|ray| vec![me.position + ray * step, me.position - ray * step]).unwrap_or_default()
}

/// Apply `action` for one tick of length `dt`.
pub fn advance(me: &DroneState, action: Action, dt: f64) -> DroneState {
    let mut next = me.clone();
    match action {
        Action::MoveToward { target, detour } => {
            let s = me.step_length(dt);
            let d = target - me.position;
            let n = d.norm();
            next.position = if n <= s { target } else { me.position + d * (s / n) };
            next.path_length += next.position.distance(me.position);
            next.wait_elapsed = 0.0;
            next.mode = if detour.is_some() { Mode::Detouring } else { Mode::Moving };
            next.avoided |= detour.is_some();
            next.detour = detour.map(|m| DetourMemory { elapsed: m.elapsed + dt, ..m });
        }
        Action::Wait => {
            next.wait_elapsed += dt;
            next.wait_total += dt;
            next.mode = Mode::Waiting;
            next.waited = true;
        }
        Action::Arrive => {
            next.path_length += me.destination.distance(me.position);
            next.position = me.destination;
            next.wait_elapsed = 0.0;
            next.mode = Mode::Arrived;
            next.detour = None;
        }
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    const DR: f64 = 0.12;

    fn drone(id: u32, pos: (f64, f64, f64), dest: (f64, f64, f64)) -> DroneState {
        DroneState::new(id, Point3::new(pos.0, pos.1, pos.2), Point3::new(dest.0, dest.1, dest.2), DR, 1.0)
    }

    fn cfg() -> PlannerConfig {
        PlannerConfig::default()
    }

    #[test]
    fn unobstructed_drone_moves_straight() {
        let me = drone(0, (0.0, 5.0, 0.0), (2.0, 5.0, 0.0));
        match plan_step(&me, std::slice::from_ref(&me), &cfg()) {
            Action::MoveToward { target, detour } => {
                assert!(detour.is_none());
                assert!(target.distance(Point3::new(0.1, 5.0, 0.0)) < 1e-12);
            }
            other => panic!("expected straight move, got {other:?}"),
        }
    }

    #[test]
    fn nearer_drone_detours() {
        let me = drone(0, (0.3, 5.0, 0.0), (-0.3, 5.0, 0.0));
        let opp = drone(1, (0.0, 10.0, 0.0), (0.0, 10.0, 3.0));
        // Straight step lands at delta 0.2 against threshold 0.18: inside the margin.
        let c = geometry::clearance(Point3::new(0.2, 5.0, 0.0), opp.position, DR).unwrap();
        assert!(c.signed <= cfg().margin);
        match plan_step(&me, &[me.clone(), opp.clone()], &cfg()) {
            Action::MoveToward { target, detour } => {
                assert!(detour.is_some());
                let c = geometry::clearance(target, opp.position, DR).unwrap();
                assert!(c.signed > cfg().margin, "detour clearance {}", c.signed);
                assert!(target.distance(me.position) <= 0.1 + 1e-12);
            }
            other => panic!("expected detour, got {other:?}"),
        }
    }

    #[test]
    fn farther_drone_waits_then_detours_after_timeout() {
        let mut me = drone(0, (0.4, 10.0, 0.0), (-0.6, 10.0, 0.0));
        let opp = drone(1, (0.0, 5.0, 0.0), (0.0, 5.0, 3.0));
        let world = [me.clone(), opp.clone()];
        assert_eq!(plan_step(&me, &world, &cfg()), Action::Wait);

        me.wait_elapsed = 3.0;
        me.wait_total = 3.0;
        match plan_step(&me, &world, &cfg()) {
            Action::MoveToward { target, detour: Some(_) } => {
                assert!(geometry::clearance(target, opp.position, DR).unwrap().signed > 0.0);
            }
            other => panic!("expected detour after timeout, got {other:?}"),
        }
    }

    #[test]
    fn equal_depth_lower_id_detours() {
        let a = drone(3, (0.3, 5.0, 0.0), (-0.6, 5.0, 0.0));
        let b = drone(7, (-0.05, 5.0, 0.0), (0.6, 5.0, 0.0));
        let world = [a.clone(), b.clone()];
        assert!(matches!(plan_step(&a, &world, &cfg()), Action::MoveToward { detour: Some(_), .. }));
        assert_eq!(plan_step(&b, &world, &cfg()), Action::Wait);
    }

    #[test]
    fn arrived_opponent_is_bypassed_not_waited_for() {
        let me = drone(0, (0.4, 10.0, 0.0), (-0.6, 10.0, 0.0));
        let mut opp = drone(1, (0.0, 5.0, 0.0), (0.0, 5.0, 0.0));
        opp.mode = Mode::Arrived;
        assert!(matches!(plan_step(&me, &[me.clone(), opp], &cfg()), Action::MoveToward { detour: Some(_), .. }));
    }

    #[test]
    fn arrives_within_one_step() {
        let me = drone(0, (0.0, 5.0, 0.0), (0.05, 5.0, 0.0));
        assert_eq!(plan_step(&me, &[], &cfg()), Action::Arrive);
        let same = drone(0, (1.0, 5.0, 1.0), (1.0, 5.0, 1.0));
        assert_eq!(plan_step(&same, &[], &cfg()), Action::Arrive);
    }

    #[test]
    fn blocked_destination_is_not_snapped_onto() {
        let me = drone(0, (0.0, 5.0, 0.0), (0.08, 5.0, 0.0));
        let mut opp = drone(1, (0.5, 10.0, 0.0), (0.5, 10.0, 0.0));
        opp.mode = Mode::Moving;
        let action = plan_step(&me, &[me.clone(), opp], &cfg());
        assert_ne!(action, Action::Arrive);
    }

    #[test]
    fn detour_deviates_laterally_around_conflict_ahead() {
        let me = drone(0, (0.3, 5.0, 0.0), (-0.3, 5.0, 0.0));
        let opp = drone(1, (0.0, 10.0, 0.0), (0.0, 10.0, 0.0));
        let world = [me.clone(), opp.clone()];
        let conflicts = conflicts_at(&me, Point3::new(0.2, 5.0, 0.0), &world, cfg().margin);
        assert_eq!(conflicts.len(), 1);
        let target = compute_detour(&me, &conflicts, &world, &cfg());
        assert!(target.z.abs() > 1e-3, "expected lateral deviation, got {target:?}");
        assert!(geometry::clearance(target, opp.position, DR).unwrap().signed > cfg().margin);
    }

    #[test]
    fn detour_keeps_step_when_conflict_is_behind() {
        let me = drone(0, (0.3, 5.0, 0.0), (1.0, 5.0, 0.0));
        let opp = drone(1, (0.0, 10.0, 0.0), (0.0, 10.0, 0.0));
        let world = [me.clone(), opp.clone()];
        let conflict = Conflict {
            opponent_id: 1,
            clearance: geometry::clearance(me.position, opp.position, DR).unwrap(),
            opponent_y: 10.0,
            opponent_mode: Mode::Moving,
        };
        let target = compute_detour(&me, &[conflict], &world, &cfg());
        assert_eq!(target, Point3::new(0.3 + 0.1, 5.0, 0.0));
    }

    fn ring_around(me: &DroneState) -> Vec<DroneState> {
        let mut world = vec![me.clone()];
        for k in 0..8 {
            let a = (k as f64 * 45.0_f64).to_radians();
            world.push(drone(k + 1, (0.27 * a.cos(), 5.0, 0.27 * a.sin()), (0.0, 5.0, 9.0)));
        }
        world
    }

    #[test]
    fn enclosed_drone_backs_off_along_its_ray() {
        let me = drone(0, (0.0, 5.0, 0.0), (1.0, 5.0, 0.0));
        let world = ring_around(&me);
        let conflicts = conflicts_at(&me, Point3::new(0.1, 5.0, 0.0), &world, cfg().margin);
        assert!(!conflicts.is_empty());
        let target = compute_detour(&me, &conflicts, &world, &cfg());
        assert!(target.distance(Point3::new(0.0, 5.1, 0.0)) < 1e-12, "got {target:?}");
    }

    #[test]
    fn enclosed_drone_inside_thin_band_stays_put() {
        let me = drone(0, (0.0, 5.0, 0.0), (1.0, 5.0, 0.0));
        let world = ring_around(&me);
        let c = PlannerConfig { band: Some(DetectableBand { center: 5.0, half_width: 0.05 }), ..cfg() };
        let conflicts = conflicts_at(&me, Point3::new(0.1, 5.0, 0.0), &world, c.margin);
        assert_eq!(compute_detour(&me, &conflicts, &world, &c), me.position);

        let mut timed_out = me.clone();
        timed_out.wait_elapsed = 10.0;
        assert_eq!(plan_step(&timed_out, &world, &c), Action::Wait);
    }

    #[test]
    fn band_blocks_straight_step_leaving_it() {
        let me = drone(0, (0.0, 5.0, 0.0), (0.0, 4.0, 0.0));
        let band = DetectableBand { center: 5.0, half_width: 0.05 };
        let c = PlannerConfig { band: Some(band), ..cfg() };
        match plan_step(&me, &[], &c) {
            Action::MoveToward { target, detour: Some(_) } => assert!(band.contains(target)),
            other => assert_eq!(other, Action::Wait),
        }
    }

    #[test]
    fn advance_wait_accumulates() {
        let mut d = drone(0, (0.0, 5.0, 0.0), (2.0, 5.0, 0.0));
        for _ in 0..3 {
            d = advance(&d, Action::Wait, 0.1);
        }
        assert!((d.wait_total - 0.3).abs() < 1e-12);
        assert!((d.wait_elapsed - 0.3).abs() < 1e-12);
        assert_eq!(d.position, Point3::new(0.0, 5.0, 0.0));
        assert_eq!(d.mode, Mode::Waiting);
        assert!(d.waited);
    }

    #[test]
    fn advance_clamps_final_step() {
        let d = drone(0, (0.0, 5.0, 0.0), (2.0, 5.0, 0.0));
        let target = Point3::new(0.05, 5.0, 0.0);
        let n = advance(&d, Action::MoveToward { target, detour: None }, 0.1);
        assert_eq!(n.position, target);
        assert!((n.path_length - 0.05).abs() < 1e-15);
    }

    #[test]
    fn advance_moves_at_constant_speed() {
        let mut d = drone(0, (0.0, 5.0, 0.0), (20.0, 5.0, 3.0));
        d.wait_elapsed = 1.0;
        let n = advance(
            &d,
            Action::MoveToward {
                target: d.destination,
                detour: Some(DetourMemory { side: 1.0, hit_distance: 1.0, elapsed: 0.0 }),
            },
            0.1,
        );
        assert!((n.position.distance(d.position) - 0.1).abs() < 1e-12);
        assert_eq!(n.wait_elapsed, 0.0);
        assert_eq!(n.mode, Mode::Detouring);
        assert!(n.avoided);
    }

    #[test]
    fn advance_arrive_snaps_and_counts_distance() {
        let d = drone(0, (0.0, 5.0, 0.0), (0.06, 5.0, 0.08));
        let n = advance(&d, Action::Arrive, 0.1);
        assert_eq!(n.position, d.destination);
        assert_eq!(n.mode, Mode::Arrived);
        assert!((n.path_length - 0.1).abs() < 1e-12);
    }
}
