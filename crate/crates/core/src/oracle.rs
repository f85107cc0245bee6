//! Independent checks used by tests and the `check` command.
//!
//! `brute_force_overlap` images each sphere through the pinhole model by
//! sampling its silhouette circle, and intersects disks derived from the
//! resulting convex footprints in pixel space. `audit_trace` re-evaluates
//! the no-overlap and band constraints on recorded trace data. Only geometry
//! primitives and trace records are used here; nothing from the planner or
//! the engine.

use std::io::BufRead;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{self, CameraModel, DetectableBand, Point3};
use crate::simulator::scenario::Scenario;
use crate::simulator::trace::{read_jsonl, TickRecord};

pub const MIN_SAMPLES: usize = 64;

type Pixel = (f64, f64);

/// Pixel-space outline of a sphere of radius `d_r` centred at `center`.
pub fn image_footprint(center: Point3, d_r: f64, camera: &CameraModel, samples: usize) -> Result<Vec<Pixel>> {
    let dist = center.norm();
    if center.y <= 0.0 || center.y.is_nan() || dist <= d_r {
        return Err(Error::DegenerateGeometry(format!("sphere at {center:?} is not fully in front of the camera")));
    }
    // Points where rays from the origin graze the sphere.
    let axis = center * (1.0 / dist);
    let circle_center = center * (1.0 - d_r * d_r / (dist * dist));
    let circle_radius = d_r * (dist * dist - d_r * d_r).sqrt() / dist;
    let helper = if axis.x.abs() <= axis.y.abs() && axis.x.abs() <= axis.z.abs() {
        Point3::new(1.0, 0.0, 0.0)
    } else if axis.y.abs() <= axis.z.abs() {
        Point3::new(0.0, 1.0, 0.0)
    } else {
        Point3::new(0.0, 0.0, 1.0)
    };
    let e1 = axis.cross(helper).normalized().expect("helper is not parallel to axis");
    let e2 = axis.cross(e1);

    let mut points = Vec::with_capacity(samples);
    for k in 0..samples {
        let phi = std::f64::consts::TAU * k as f64 / samples as f64;
        let p = circle_center + (e1 * phi.cos() + e2 * phi.sin()) * circle_radius;
        if p.y <= 0.0 || p.y.is_nan() {
            return Err(Error::DegenerateGeometry(format!(
                "silhouette of sphere at {center:?} crosses the camera plane"
            )));
        }
        let px = geometry::pixel_projection(p, 0.0, camera)?;
        points.push((px.u, px.v));
    }
    Ok(convex_hull(points))
}

fn cross(o: Pixel, a: Pixel, b: Pixel) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain; counter-clockwise, no repeated endpoint.
fn convex_hull(mut points: Vec<Pixel>) -> Vec<Pixel> {
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite pixels"));
    points.dedup();
    if points.len() < 3 {
        return points;
    }
    let mut lower: Vec<Pixel> = Vec::new();
    for &p in &points {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Pixel> = Vec::new();
    for &p in points.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn separated_along_edges_of(a: &[Pixel], b: &[Pixel]) -> bool {
    (0..a.len()).any(|k| {
        let (p, q) = (a[k], a[(k + 1) % a.len()]);
        let normal = (q.1 - p.1, p.0 - q.0);
        let project = |poly: &[Pixel]| {
            poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                let d = v.0 * normal.0 + v.1 * normal.1;
                (lo.min(d), hi.max(d))
            })
        };
        let (a_lo, a_hi) = project(a);
        let (b_lo, b_hi) = project(b);
        a_hi < b_lo || b_hi < a_lo
    })
}

/// Separating-axis test for two convex polygons; touching counts as intersecting.
pub fn convex_polygons_intersect(a: &[Pixel], b: &[Pixel]) -> bool {
    !(separated_along_edges_of(a, b) || separated_along_edges_of(b, a))
}

/// A disk standing in for a footprint polygon, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageDisk {
    pub u: f64,
    pub v: f64,
    pub radius: f64,
}

impl ImageDisk {
    /// Closed disks; touching counts as intersecting.
    pub fn intersects(&self, other: &ImageDisk) -> bool {
        (self.u - other.u).hypot(self.v - other.v) <= self.radius + other.radius
    }
}

/// Largest disk about the polygon's area centroid that fits inside it.
///
/// Off the optical axis a sphere images to an ellipse stretched along the
/// radial direction; the inscribed disk keeps the undistorted tangential
/// extent, which is what a disk-shaped image model describes.
pub fn hull_disk(hull: &[Pixel]) -> Option<ImageDisk> {
    if hull.len() < 3 {
        return None;
    }
    let (mut area2, mut cu, mut cv) = (0.0, 0.0, 0.0);
    for k in 0..hull.len() {
        let (p, q) = (hull[k], hull[(k + 1) % hull.len()]);
        let w = p.0 * q.1 - q.0 * p.1;
        area2 += w;
        cu += (p.0 + q.0) * w;
        cv += (p.1 + q.1) * w;
    }
    if area2.abs() <= f64::EPSILON {
        return None;
    }
    let (cu, cv) = (cu / (3.0 * area2), cv / (3.0 * area2));
    let radius = (0..hull.len())
        .map(|k| {
            let (p, q) = (hull[k], hull[(k + 1) % hull.len()]);
            let len = (q.0 - p.0).hypot(q.1 - p.1);
            ((q.0 - p.0) * (p.1 - cv) - (p.0 - cu) * (q.1 - p.1)).abs() / len
        })
        .fold(f64::INFINITY, f64::min);
    Some(ImageDisk { u: cu, v: cv, radius })
}

fn footprints(
    a: Point3,
    b: Point3,
    d_r: f64,
    camera: &CameraModel,
    samples: usize,
) -> Result<(Vec<Pixel>, Vec<Pixel>)> {
    if samples < MIN_SAMPLES {
        return Err(invalid(format!("need at least {MIN_SAMPLES} silhouette samples, got {samples}")));
    }
    Ok((image_footprint(a, d_r, camera, samples)?, image_footprint(b, d_r, camera, samples)?))
}

/// Whether two drones' image disks intersect, from sampled silhouettes.
///
/// Each silhouette is projected to pixels, wrapped in its convex hull and
/// reduced to [`hull_disk`].
pub fn brute_force_overlap(a: Point3, b: Point3, d_r: f64, camera: &CameraModel, samples: usize) -> Result<bool> {
    let (fa, fb) = footprints(a, b, d_r, camera, samples)?;
    let disk =
        |f: &[Pixel]| hull_disk(f).ok_or_else(|| Error::DegenerateGeometry("silhouette footprint has no area".into()));
    Ok(disk(&fa)?.intersects(&disk(&fb)?))
}

/// Stricter variant: intersects the full footprint polygons, including the
/// radial stretch of off-axis images.
pub fn brute_force_footprint_overlap(
    a: Point3,
    b: Point3,
    d_r: f64,
    camera: &CameraModel,
    samples: usize,
) -> Result<bool> {
    let (fa, fb) = footprints(a, b, d_r, camera, samples)?;
    Ok(convex_polygons_intersect(&fa, &fb))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationKind {
    Overlap,
    Band,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub t: f64,
    /// Drone ids; a band violation names the same drone twice.
    pub pair: (u32, u32),
    pub kind: ViolationKind,
    /// Signed clearance for overlaps; signed distance outside the band otherwise.
    pub signed: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct AuditReport {
    pub violations: Vec<Violation>,
    pub ticks_checked: usize,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-check every tick of a trace for image overlaps and, when `band` is
/// given, band membership.
pub fn audit_trace(trace: &[TickRecord], d_r: f64, band: Option<DetectableBand>) -> Result<AuditReport> {
    let mut report = AuditReport::default();
    for record in trace {
        for (k, a) in record.drones.iter().enumerate() {
            if let Some(b) = band {
                if !b.contains(a.position) {
                    report.violations.push(Violation {
                        t: record.t,
                        pair: (a.id, a.id),
                        kind: ViolationKind::Band,
                        signed: (a.position.norm() - b.center).abs() - b.half_width,
                    });
                }
            }
            for b in &record.drones[k + 1..] {
                let ab = geometry::clearance(a.position, b.position, d_r)?;
                let ba = geometry::clearance(b.position, a.position, d_r)?;
                if ab.overlapping() || ba.overlapping() {
                    report.violations.push(Violation {
                        t: record.t,
                        pair: (a.id, b.id),
                        kind: ViolationKind::Overlap,
                        signed: ab.signed.min(ba.signed),
                    });
                }
            }
        }
        report.ticks_checked += 1;
    }
    Ok(report)
}

pub fn audit_scenario_trace(trace: &[TickRecord], scenario: &Scenario) -> Result<AuditReport> {
    audit_trace(trace, scenario.d_r, scenario.effective_band()?)
}

/// Parse a JSON Lines trace and audit it against `scenario`.
pub fn audit_jsonl<R: BufRead>(reader: R, scenario: &Scenario) -> Result<AuditReport> {
    let trace = read_jsonl(reader)?;
    audit_scenario_trace(&trace, scenario)
}
