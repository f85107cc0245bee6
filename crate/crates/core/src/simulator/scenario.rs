//! Experiment descriptions: random generation, validation and JSON I/O.
//!
//! World convention: the camera looks down +y from the origin. The square
//! flight area spans x (centred on the optical axis) and y (starting at a
//! depth offset in front of the camera); flying heights map to z.
//!
//! Random numbers come from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`; uniform reals take the top 53 bits of each `u64` draw.
//! Both are platform independent, so a seed always yields the same scenario.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{self, CameraModel, DetectableBand, Point3};
use crate::planner::PlannerConfig;

/// Placement attempts per point before giving up.
pub const MAX_ATTEMPTS: u32 = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneSpec {
    pub id: u32,
    pub start: Point3,
    pub destination: Point3,
}

/// Horizontal extent of the flight area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub drones: Vec<DroneSpec>,
    pub d_r: f64,
    pub speed: f64,
    pub area: Area,
    pub height_min: f64,
    pub height_max: f64,
    pub dt: f64,
    pub timeout: f64,
    pub margin: f64,
    pub max_time: f64,
    #[serde(with = "seed_string")]
    pub seed: u64,
    pub camera: CameraModel,
    pub enforce_band: bool,
    /// Explicit band overriding the one derived from the camera lens.
    #[serde(default)]
    pub band: Option<DetectableBand>,
}

mod seed_string {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&seed.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(|e| D::Error::custom(format!("seed {raw:?}: {e}")))
    }
}

/// Parameters for [`generate_scenario`]; defaults are the reference protocol
/// (8 drones, 0.12 m radius, 6 m square, 3 to 7 m heights, 1 m/s).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub n_drones: usize,
    pub d_r: f64,
    pub speed: f64,
    /// Side of the square flight area.
    pub area_size: f64,
    /// Distance from the camera to the near edge of the area along y.
    pub depth_offset: f64,
    pub height_min: f64,
    pub height_max: f64,
    pub dt: f64,
    pub timeout: f64,
    pub margin: f64,
    pub max_time: f64,
    pub camera: CameraModel,
    pub enforce_band: bool,
    pub band: Option<DetectableBand>,
}

pub const DEFAULT_DEPTH_OFFSET: f64 = 4.0;

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            n_drones: 8,
            d_r: 0.12,
            speed: 1.0,
            area_size: 6.0,
            depth_offset: DEFAULT_DEPTH_OFFSET,
            height_min: 3.0,
            height_max: 7.0,
            dt: 0.1,
            timeout: 3.0,
            margin: 0.05,
            max_time: 120.0,
            camera: CameraModel::default(),
            enforce_band: false,
            band: None,
        }
    }
}

impl ScenarioParams {
    pub fn area(&self) -> Area {
        let half = self.area_size / 2.0;
        Area { x_min: -half, x_max: half, y_min: self.depth_offset, y_max: self.depth_offset + self.area_size }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be > 0, got {v}")))
    }
}

fn check_non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be >= 0, got {v}")))
    }
}

fn check_range(name: &str, lo: f64, hi: f64) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo <= hi {
        Ok(())
    } else {
        Err(invalid(format!("{name} range [{lo}, {hi}] is empty")))
    }
}

/// Both planes see the pair clear by more than `margin`.
fn clear_of(a: Point3, b: Point3, d_r: f64, margin: f64) -> bool {
    let ab = geometry::clearance(a, b, d_r);
    let ba = geometry::clearance(b, a, d_r);
    matches!((ab, ba), (Ok(x), Ok(y)) if x.signed > margin && y.signed > margin)
}

impl Scenario {
    pub fn planner_config(&self) -> Result<PlannerConfig> {
        Ok(PlannerConfig { dt: self.dt, timeout: self.timeout, margin: self.margin, band: self.effective_band()? })
    }

    /// Band the drones must stay in, if enforcement is on.
    pub fn effective_band(&self) -> Result<Option<DetectableBand>> {
        if !self.enforce_band {
            return Ok(None);
        }
        let band = match self.band {
            Some(b) => b,
            None => self.camera.band()?,
        };
        band.validate()?;
        Ok(Some(band))
    }

    fn inside_volume(&self, p: Point3) -> bool {
        let a = &self.area;
        (a.x_min..=a.x_max).contains(&p.x)
            && (a.y_min..=a.y_max).contains(&p.y)
            && (self.height_min..=self.height_max).contains(&p.z)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.drones.is_empty() {
            return bad("scenario has no drones".into());
        }
        check_positive("d_r", self.d_r)?;
        check_positive("speed", self.speed)?;
        check_positive("dt", self.dt)?;
        check_non_negative("timeout", self.timeout)?;
        check_non_negative("margin", self.margin)?;
        check_positive("max_time", self.max_time)?;
        check_range("x", self.area.x_min, self.area.x_max)?;
        check_range("y", self.area.y_min, self.area.y_max)?;
        check_range("height", self.height_min, self.height_max)?;
        if self.area.y_min <= 0.0 {
            return bad(format!("area must lie in front of the camera (y_min = {})", self.area.y_min));
        }
        self.camera.validate()?;
        let band = self.effective_band()?;

        let mut ids: Vec<u32> = self.drones.iter().map(|d| d.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("duplicate drone ids".into());
        }
        for d in &self.drones {
            for (what, p) in [("start", d.start), ("destination", d.destination)] {
                if !p.is_finite() || !self.inside_volume(p) {
                    return bad(format!("drone {} {what} {p:?} is outside the flight volume", d.id));
                }
                if let Some(b) = band {
                    if !b.contains(p) {
                        return bad(format!("drone {} {what} is outside the detectable band", d.id));
                    }
                }
            }
        }
        for (k, a) in self.drones.iter().enumerate() {
            for b in &self.drones[k + 1..] {
                if !clear_of(a.start, b.start, self.d_r, self.margin) {
                    return bad(format!("starts of drones {} and {} overlap in the image", a.id, b.id));
                }
                if !clear_of(a.destination, b.destination, self.d_r, self.margin) {
                    return bad(format!("destinations of drones {} and {} overlap in the image", a.id, b.id));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

struct Sampler(ChaCha8Rng);

impl Sampler {
    fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
}

/// Rejection-sample starts and destinations uniformly in the flight volume.
pub fn generate_scenario(seed: u64, params: &ScenarioParams) -> Result<Scenario> {
    if params.n_drones == 0 {
        return Err(invalid("need at least one drone"));
    }
    check_positive("area size", params.area_size)?;
    check_positive("depth offset", params.depth_offset)?;

    let mut scenario = Scenario {
        drones: Vec::with_capacity(params.n_drones),
        d_r: params.d_r,
        speed: params.speed,
        area: params.area(),
        height_min: params.height_min,
        height_max: params.height_max,
        dt: params.dt,
        timeout: params.timeout,
        margin: params.margin,
        max_time: params.max_time,
        seed,
        camera: params.camera,
        enforce_band: params.enforce_band,
        band: params.band,
    };
    // Fail on bad scalar parameters before sampling.
    {
        let mut probe = scenario.clone();
        let mid = Point3::new(
            (probe.area.x_min + probe.area.x_max) / 2.0,
            (probe.area.y_min + probe.area.y_max) / 2.0,
            (probe.height_min + probe.height_max) / 2.0,
        );
        probe.drones.push(DroneSpec { id: 0, start: mid, destination: mid });
        match probe.validate() {
            Err(Error::InvalidScenario(msg)) if msg.contains("detectable band") => {}
            other => other?,
        }
    }
    let band = scenario.effective_band()?;

    let mut rng = Sampler::new(seed);
    let mut draw = |placed: &[Point3], what: &str| -> Result<Point3> {
        for _ in 0..MAX_ATTEMPTS {
            let p = Point3::new(
                rng.uniform(scenario.area.x_min, scenario.area.x_max),
                rng.uniform(scenario.area.y_min, scenario.area.y_max),
                rng.uniform(params.height_min, params.height_max),
            );
            if band.is_some_and(|b| !b.contains(p)) {
                continue;
            }
            if placed.iter().all(|&q| clear_of(p, q, params.d_r, params.margin)) {
                return Ok(p);
            }
        }
        Err(Error::Infeasible { what: what.to_string(), attempts: MAX_ATTEMPTS })
    };

    let mut starts = Vec::with_capacity(params.n_drones);
    for k in 0..params.n_drones {
        let p = draw(&starts, &format!("start of drone {k}"))?;
        starts.push(p);
    }
    let mut destinations = Vec::with_capacity(params.n_drones);
    for k in 0..params.n_drones {
        let p = draw(&destinations, &format!("destination of drone {k}"))?;
        destinations.push(p);
    }
    scenario.drones = starts
        .into_iter()
        .zip(destinations)
        .enumerate()
        .map(|(k, (start, destination))| DroneSpec { id: k as u32, start, destination })
        .collect();
    scenario.validate()?;
    Ok(scenario)
}
