//! Minimal planar geometry shared by the ingest and ontology stages.

use serde::{Deserialize, Serialize};

/// A point in the drawing plane. Units depend on context (drawing units
/// before scale recovery, inches after).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Axis-aligned bounding box given by its min/max corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bbox {
    pub min: Point2,
    pub max: Point2,
}

impl Bbox {
    pub fn from_points<I: IntoIterator<Item = Point2>>(points: I) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let mut min = first;
        let mut max = first;
        for p in iter {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Some(Self { min, max })
    }

    pub fn union(&self, other: &Bbox) -> Bbox {
        Bbox {
            min: Point2::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Point2::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }

    /// True when the boxes overlap or their gap along both axes is at most
    /// `tol`.
    pub fn touches(&self, other: &Bbox, tol: f64) -> bool {
        let gap_x = (self.min.x.max(other.min.x)) - (self.max.x.min(other.max.x));
        let gap_y = (self.min.y.max(other.min.y)) - (self.max.y.min(other.max.y));
        gap_x <= tol && gap_y <= tol
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// Normalize an angle in degrees to the range [0, 180).
pub fn normalize_angle_deg(angle: f64) -> f64 {
    let mut a = angle % 180.0;
    if a < 0.0 {
        a += 180.0;
    }
    // Collapse values that round to 180 back to 0.
    if (a - 180.0).abs() < 1e-9 {
        a = 0.0;
    }
    a
}

/// Smallest difference between two segment directions in degrees, treating
/// opposite directions as parallel. Result lies in [0, 90].
pub fn angle_diff_deg(a: f64, b: f64) -> f64 {
    let d = (normalize_angle_deg(a) - normalize_angle_deg(b)).abs();
    d.min(180.0 - d)
}

/// Corners of a rectangle described by center, length, width, and rotation
/// angle in degrees.
pub fn rect_corners(center: Point2, length: f64, width: f64, angle_deg: f64) -> [Point2; 4] {
    let theta = angle_deg.to_radians();
    let (sin, cos) = theta.sin_cos();
    let ux = Point2::new(cos * length / 2.0, sin * length / 2.0);
    let uy = Point2::new(-sin * width / 2.0, cos * width / 2.0);
    [
        Point2::new(center.x - ux.x - uy.x, center.y - ux.y - uy.y),
        Point2::new(center.x + ux.x - uy.x, center.y + ux.y - uy.y),
        Point2::new(center.x + ux.x + uy.x, center.y + ux.y + uy.y),
        Point2::new(center.x - ux.x + uy.x, center.y - ux.y + uy.y),
    ]
}
