//! Lens model, central projection onto a drone's x-z plane, and the
//! analytic image-overlap predicate.
//!
//! Coordinates are camera-centred: the camera sits at the origin and looks
//! down the +y axis, so every valid drone position has `y > 0`. Drones are
//! modelled as spheres of a common radius `d_r`.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Point3) -> Point3 {
        Point3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Point3> {
        let n = self.norm();
        (n > 1e-15 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, k: f64) -> Point3 {
        Point3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// Thin-lens camera with a pinhole pixel mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    /// Focal length in meters.
    pub focal_length: f64,
    /// Optical zoom magnification.
    pub magnification: f64,
    /// Half width `l` of the detectable band around the focus distance.
    pub half_range: f64,
    pub resolution_u: u32,
    pub resolution_v: u32,
    /// Sensor meters per pixel.
    pub pixel_pitch: f64,
}

impl Default for CameraModel {
    /// 25 mm lens at unit magnification on a 1920x1080 sensor.
    fn default() -> Self {
        Self {
            focal_length: 0.025,
            magnification: 1.0,
            half_range: 0.01,
            resolution_u: 1920,
            resolution_v: 1080,
            pixel_pitch: 2.5e-5,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.focal_length > 0.0 && self.focal_length.is_finite()) {
            return Err(invalid(format!("focal length must be > 0, got {}", self.focal_length)));
        }
        if !(self.magnification > 0.0 && self.magnification.is_finite()) {
            return Err(invalid(format!("magnification must be > 0, got {}", self.magnification)));
        }
        if !(self.half_range >= 0.0 && self.half_range.is_finite()) {
            return Err(invalid(format!("half range must be >= 0, got {}", self.half_range)));
        }
        if self.resolution_u < 1 || self.resolution_v < 1 {
            return Err(invalid("resolution must be at least 1x1"));
        }
        if !(self.pixel_pitch > 0.0 && self.pixel_pitch.is_finite()) {
            return Err(invalid(format!("pixel pitch must be > 0, got {}", self.pixel_pitch)));
        }
        Ok(())
    }

    pub fn focus_distance(&self) -> Result<f64> {
        focus_distance(self.magnification, self.focal_length)
    }

    /// Band of camera distances in which a drone is recognizable.
    pub fn band(&self) -> Result<DetectableBand> {
        Ok(DetectableBand { center: self.focus_distance()?, half_width: self.half_range })
    }

    /// Focal length expressed in pixels.
    pub fn focal_pixels(&self) -> f64 {
        self.focal_length / self.pixel_pitch
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (self.resolution_u as f64 / 2.0, self.resolution_v as f64 / 2.0)
    }
}

/// Radial band `|r - center| <= half_width` of camera distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectableBand {
    pub center: f64,
    pub half_width: f64,
}

impl DetectableBand {
    pub fn contains(&self, position: Point3) -> bool {
        (position.norm() - self.center).abs() <= self.half_width
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center > 0.0 && self.center.is_finite()) {
            return Err(invalid(format!("band center must be > 0, got {}", self.center)));
        }
        if !(self.half_width >= 0.0 && self.half_width.is_finite()) {
            return Err(invalid(format!("band half width must be >= 0, got {}", self.half_width)));
        }
        Ok(())
    }
}

/// Another drone centrally projected onto an observer's plane `y = y_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedDisk {
    pub center: Point3,
    pub radius: f64,
}

/// Separation of two drones measured in the observer's x-z plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clearance {
    /// In-plane distance between the observer and the projected other drone.
    pub delta: f64,
    /// `d_r` plus the projected radius.
    pub threshold: f64,
    /// `delta - threshold`; non-positive means the two overlap in the image.
    pub signed: f64,
}

impl Clearance {
    pub fn overlapping(&self) -> bool {
        self.signed <= 0.0
    }

    /// `|signed| / threshold`, used to exclude marginal pairs from oracle checks.
    pub fn relative(&self) -> f64 {
        self.signed.abs() / self.threshold
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be > 0, got {value}")))
    }
}

fn in_front(what: &str, y: f64) -> Result<()> {
    if y > 0.0 && y.is_finite() {
        Ok(())
    } else {
        Err(Error::DegenerateGeometry(format!("{what} has y = {y}; must lie in front of the camera")))
    }
}

/// Imaged size of an object of size `d` under magnification `m`.
pub fn magnified_size(m: f64, d: f64) -> Result<f64> {
    positive("magnification", m)?;
    if !(d >= 0.0 && d.is_finite()) {
        return Err(invalid(format!("object size must be >= 0, got {d}")));
    }
    Ok(m * d)
}

/// Object distance `r` solving `1/r + 1/b = 1/f` with `b = M r`.
pub fn focus_distance(m: f64, f: f64) -> Result<f64> {
    positive("magnification", m)?;
    positive("focal length", f)?;
    Ok((m + 1.0) / m * f)
}

/// Object-to-image distance `L = r + b = (M + 1)^2 / M * f`.
pub fn imaging_distance(m: f64, f: f64) -> Result<f64> {
    let r = focus_distance(m, f)?;
    Ok(r + m * r)
}

/// Whether the drone's camera distance lies within `l` of the focus distance.
pub fn within_detectable_range(position: Point3, camera: &CameraModel) -> Result<bool> {
    in_front("position", position.y)?;
    Ok(camera.band()?.contains(position))
}

/// Central projection of `other` onto the plane `y = observer_y`.
pub fn project_onto_plane(observer_y: f64, other: Point3) -> Result<Point3> {
    in_front("observer", observer_y)?;
    in_front("projected drone", other.y)?;
    let k = observer_y / other.y;
    Ok(Point3::new(other.x * k, observer_y, other.z * k))
}

/// Radius of a drone of radius `d_r` at `other` after projection onto `y = observer_y`.
pub fn projected_radius(observer_y: f64, other: Point3, d_r: f64) -> Result<f64> {
    in_front("observer", observer_y)?;
    in_front("projected drone", other.y)?;
    positive("drone radius", d_r)?;
    Ok(observer_y * d_r / other.y)
}

pub fn project_disk(observer_y: f64, other: Point3, d_r: f64) -> Result<ProjectedDisk> {
    Ok(ProjectedDisk {
        center: project_onto_plane(observer_y, other)?,
        radius: projected_radius(observer_y, other, d_r)?,
    })
}

/// Clearance of `other` as seen from `observer`'s x-z plane.
pub fn clearance(observer: Point3, other: Point3, d_r: f64) -> Result<Clearance> {
    let disk = project_disk(observer.y, other, d_r)?;
    let delta = (disk.center.x - observer.x).hypot(disk.center.z - observer.z);
    let threshold = d_r + disk.radius;
    Ok(Clearance { delta, threshold, signed: delta - threshold })
}

/// True when the two drones would not be separable in the image.
/// Touching (`delta == threshold`) counts as overlapping.
pub fn overlaps(observer: Point3, other: Point3, d_r: f64) -> Result<bool> {
    Ok(clearance(observer, other, d_r)?.overlapping())
}

/// Overlap evaluated from both drones' planes.
///
/// The two signed clearances differ only by the positive factor `y_i / y_j`,
/// so the verdicts agree except for rounding at the exact boundary; taking the
/// union makes the pair check symmetric by construction.
pub fn pair_overlaps(a: Point3, b: Point3, d_r: f64) -> Result<bool> {
    Ok(overlaps(a, b, d_r)? || overlaps(b, a, d_r)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelProjection {
    pub u: f64,
    pub v: f64,
    pub radius: f64,
    /// Whether the projected centre falls inside the sensor.
    pub in_frame: bool,
}

/// Pinhole projection with square pixels and the principal point at the
/// image centre. `v` grows downwards. Out-of-frame points are not clipped.
pub fn pixel_projection(position: Point3, d_r: f64, camera: &CameraModel) -> Result<PixelProjection> {
    in_front("position", position.y)?;
    let (u, v) = project_point_pixels(position, camera);
    let radius = camera.focal_pixels() * d_r / position.y;
    let in_frame = (0.0..=camera.resolution_u as f64).contains(&u) && (0.0..=camera.resolution_v as f64).contains(&v);
    Ok(PixelProjection { u, v, radius, in_frame })
}

/// Pixel coordinates of a point; the caller guarantees `y > 0`.
pub(crate) fn project_point_pixels(p: Point3, camera: &CameraModel) -> (f64, f64) {
    let (cu, cv) = camera.principal_point();
    let fp = camera.focal_pixels();
    (cu + fp * p.x / p.y, cv - fp * p.z / p.y)
}
