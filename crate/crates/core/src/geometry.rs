//! Planar geometric primitives: local map projection, convex hull area,
//! disk-union area by rasterization, and greedy covering/packing estimators.
//!
//! All coordinates are metres in a local tangent frame unless a function
//! says otherwise. The equirectangular projection used here keeps the
//! distortion below 0.5% for extents up to ~50 km at mid latitudes, which
//! is sufficient at village scale.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Metres per degree of latitude (spherical Earth approximation).
pub const METERS_PER_DEGREE: f64 = 111_320.0;

/// A weighted point in the local planar frame.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarPoint {
    /// Easting in metres.
    pub x: f64,
    /// Northing in metres.
    pub y: f64,
    /// Nonnegative population weight carried by this point.
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_weight() -> f64 {
    1.0
}

impl PlanarPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y, weight: 1.0 }
    }

    pub fn weighted(x: f64, y: f64, weight: f64) -> Self {
        Self { x, y, weight }
    }

    pub fn distance_sq(&self, other: &PlanarPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: &PlanarPoint) -> f64 {
        self.distance_sq(other).sqrt()
    }
}

/// A weighted geographic coordinate (WGS-84 degrees).
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
    #[serde(default = "default_weight")]
    pub weight: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64, weight: f64) -> Self {
        Self { lat, lon, weight }
    }

    /// Coordinates inside the valid geographic ranges and a finite,
    /// nonnegative weight.
    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon)
            && self.weight.is_finite()
            && self.weight >= 0.0
    }
}

/// Greedy estimates of the covering and packing numbers at one radius.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringPackingResult {
    /// Upper estimate of the covering number N(eps, points).
    pub cover_count: usize,
    /// Lower estimate of the packing number P(eps, points).
    pub packing_count: usize,
    /// Radius the estimates were computed at, metres.
    pub epsilon: f64,
}

/// Projects geographic points onto a local plane around `reference` using an
/// equirectangular approximation. Weights are carried over unchanged.
pub fn project_to_plane(points: &[GeoPoint], reference: &GeoPoint) -> Vec<PlanarPoint> {
    let cos_lat0 = reference.lat.to_radians().cos();
    points
        .iter()
        .map(|p| PlanarPoint {
            x: (p.lon - reference.lon) * cos_lat0 * METERS_PER_DEGREE,
            y: (p.lat - reference.lat) * METERS_PER_DEGREE,
            weight: p.weight,
        })
        .collect()
}

/// Inverse of [`project_to_plane`] for a single coordinate pair.
/// Returns `(lat, lon)` in degrees.
pub fn plane_to_geo(x: f64, y: f64, reference: &GeoPoint) -> (f64, f64) {
    let cos_lat0 = reference.lat.to_radians().cos();
    let lat = y / METERS_PER_DEGREE + reference.lat;
    let lon = x / (cos_lat0 * METERS_PER_DEGREE) + reference.lon;
    (lat, lon)
}

/// Area of the 2-D convex hull in square metres. Fewer than 3 non-collinear
/// points give 0.
pub fn convex_hull_area(points: &[PlanarPoint]) -> f64 {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return 0.0;
    }
    // Shoelace over the hull polygon.
    let mut twice_area = 0.0;
    for i in 0..hull.len() {
        let (x1, y1) = hull[i];
        let (x2, y2) = hull[(i + 1) % hull.len()];
        twice_area += x1 * y2 - x2 * y1;
    }
    twice_area.abs() / 2.0
}

/// Andrew's monotone chain; returns hull vertices counter-clockwise with
/// collinear points dropped.
fn convex_hull(points: &[PlanarPoint]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let half_chain = |iter: &mut dyn Iterator<Item = (f64, f64)>| {
        let mut chain: Vec<(f64, f64)> = Vec::new();
        for p in iter {
            while chain.len() >= 2 && cross(chain[chain.len() - 2], chain[chain.len() - 1], p) <= 0.0
            {
                chain.pop();
            }
            chain.push(p);
        }
        chain.pop();
        chain
    };
    let mut hull = half_chain(&mut pts.iter().copied());
    hull.extend(half_chain(&mut pts.iter().rev().copied()));
    hull
}

/// Default raster cell size used for [`inflated_area`]: one fiftieth of the
/// disk radius.
pub fn default_raster_resolution(radius: f64) -> f64 {
    radius / 50.0
}

/// Area of the union of disks of `radius` centred at each point, estimated
/// by counting raster cells (of side `resolution`) whose centre falls inside
/// some disk. The error is bounded by one cell area per boundary cell.
pub fn inflated_area(points: &[PlanarPoint], radius: f64, resolution: f64) -> Result<f64> {
    if radius <= 0.0 || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "inflation radius must be positive and finite, got {radius}"
        )));
    }
    if resolution <= 0.0 || !resolution.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "raster resolution must be positive and finite, got {resolution}"
        )));
    }
    if points.is_empty() {
        return Ok(0.0);
    }

    let min_x = points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min) - radius;
    let min_y = points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min) - radius;
    let r_sq = radius * radius;

    // Visit only cells inside each disk's bounding box; the set removes
    // double counting where disks overlap.
    let mut covered: HashSet<(i64, i64)> = HashSet::new();
    for p in points {
        let i_lo = ((p.x - radius - min_x) / resolution).floor() as i64;
        let i_hi = ((p.x + radius - min_x) / resolution).ceil() as i64;
        let j_lo = ((p.y - radius - min_y) / resolution).floor() as i64;
        let j_hi = ((p.y + radius - min_y) / resolution).ceil() as i64;
        for i in i_lo..=i_hi {
            let cx = min_x + (i as f64 + 0.5) * resolution;
            let dx = cx - p.x;
            for j in j_lo..=j_hi {
                let cy = min_y + (j as f64 + 0.5) * resolution;
                let dy = cy - p.y;
                if dx * dx + dy * dy <= r_sq {
                    covered.insert((i, j));
                }
            }
        }
    }
    Ok(covered.len() as f64 * resolution * resolution)
}

/// Greedy upper bound on the covering number: repeatedly pick the
/// lowest-index uncovered point and mark everything within `eps` of it as
/// covered.
pub fn greedy_cover_number(points: &[PlanarPoint], eps: f64) -> usize {
    let eps_sq = eps * eps;
    let mut covered = vec![false; points.len()];
    let mut count = 0;
    for i in 0..points.len() {
        if covered[i] {
            continue;
        }
        count += 1;
        for j in i..points.len() {
            if !covered[j] && points[i].distance_sq(&points[j]) <= eps_sq {
                covered[j] = true;
            }
        }
    }
    count
}

/// Greedy lower bound on the packing number: scan points in index order and
/// keep those strictly farther than `eps` from every point kept so far.
pub fn greedy_packing_number(points: &[PlanarPoint], eps: f64) -> usize {
    let eps_sq = eps * eps;
    let mut kept: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if kept.iter().all(|&k| points[k].distance_sq(p) > eps_sq) {
            kept.push(i);
        }
    }
    kept.len()
}

/// Runs both greedy estimators at the same radius.
pub fn estimate_covering_packing(points: &[PlanarPoint], eps: f64) -> CoveringPackingResult {
    CoveringPackingResult {
        cover_count: greedy_cover_number(points, eps),
        packing_count: greedy_packing_number(points, eps),
        epsilon: eps,
    }
}

/// Isotropic mapping between a metre frame and the unit square: the longer
/// side of the bounding box spans [0, 1].
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitSquareTransform {
    pub min_x: f64,
    pub min_y: f64,
    /// Metres per unit-square coordinate unit.
    pub scale: f64,
}

impl UnitSquareTransform {
    /// Fits the transform to a set of coordinate pairs. Degenerate inputs
    /// (single point, all coincident) get scale 1 so the mapping stays
    /// invertible.
    pub fn fit<I: IntoIterator<Item = (f64, f64)>>(coords: I) -> Self {
        let mut min_x = f64::INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for (x, y) in coords {
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
        }
        if !min_x.is_finite() || !min_y.is_finite() {
            return Self {
                min_x: 0.0,
                min_y: 0.0,
                scale: 1.0,
            };
        }
        let extent = (max_x - min_x).max(max_y - min_y);
        Self {
            min_x,
            min_y,
            scale: if extent > 0.0 { extent } else { 1.0 },
        }
    }

    pub fn to_unit(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.min_x) / self.scale, (y - self.min_y) / self.scale)
    }

    pub fn to_meters(&self, u: f64, v: f64) -> (f64, f64) {
        (u * self.scale + self.min_x, v * self.scale + self.min_y)
    }
}
