//! End-to-end access-point planning: estimate an initial cluster count from
//! the covered area, refine it by counting overlapping coverage disks, then
//! search a window around the estimate for the count maximizing the
//! connectivity ratio.

use serde::{Deserialize, Serialize};

use crate::clustering::{
    connectivity_ratio, distinct_positive_positions, weighted_kmeans, ApSet,
};
use crate::error::{Error, Result};
use crate::geometry::{default_raster_resolution, inflated_area, PlanarPoint};

/// Default half-width of the cluster-count search window.
pub const DEFAULT_KAPPA: usize = 10;

/// Planner inputs besides the users themselves.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig {
    /// AP coverage radius in metres.
    pub radius: f64,
    /// Search half-width: counts from `k̂ − kappa` to `k̂ + kappa` are tried.
    #[serde(default = "default_kappa")]
    pub kappa: usize,
    /// Seed for the clustering RNG; each candidate count derives its own
    /// stream as `seed ^ k`.
    #[serde(default)]
    pub seed: u64,
    /// Skips the areal estimate and starts from this count instead.
    #[serde(default)]
    pub k0_override: Option<usize>,
    /// Cell size for the disk-union rasterization behind the initial
    /// estimate; defaults to one fiftieth of the disk radius.
    #[serde(default)]
    pub raster_resolution: Option<f64>,
}

fn default_kappa() -> usize {
    DEFAULT_KAPPA
}

impl PlanConfig {
    pub fn new(radius: f64) -> Self {
        Self {
            radius,
            kappa: DEFAULT_KAPPA,
            seed: 0,
            k0_override: None,
            raster_resolution: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.radius <= 0.0 || !self.radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coverage radius must be positive and finite, got {}",
                self.radius
            )));
        }
        if let Some(k0) = self.k0_override {
            if k0 == 0 {
                return Err(Error::InvalidParameter(
                    "k0 override must be at least 1".into(),
                ));
            }
        }
        if let Some(res) = self.raster_resolution {
            if res <= 0.0 || !res.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "raster resolution must be positive and finite, got {res}"
                )));
            }
        }
        Ok(())
    }
}

/// Record of one cluster-count search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    /// Count the search started from: the areal estimate in a full plan,
    /// or the refined count when the search is invoked directly.
    pub k0: usize,
    /// Count after overlap refinement; center of the search window.
    pub k_hat: usize,
    /// Every `(k, rho)` pair evaluated, ascending in `k`.
    pub evaluated: Vec<(usize, f64)>,
    /// Count achieving the best ratio; ties go to the smaller count.
    pub k_star: usize,
    /// Best connectivity ratio found.
    pub rho_star: f64,
}

/// Initial cluster-count estimate: the union of half-radius disks around
/// the users, scaled to full-radius disk areas, bounds how many APs the
/// settlement can keep apart. Clamped to `[1, distinct user positions]`.
pub fn initial_k0(
    users: &[PlanarPoint],
    radius: f64,
    raster_resolution: Option<f64>,
) -> Result<usize> {
    let distinct = distinct_positive_positions(users);
    if distinct == 0 {
        return Err(Error::InvalidParameter(
            "the initial estimate needs at least one user with positive weight".into(),
        ));
    }
    if radius <= 0.0 || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "coverage radius must be positive and finite, got {radius}"
        )));
    }
    let half = radius / 2.0;
    let resolution = raster_resolution.unwrap_or_else(|| default_raster_resolution(half));
    let occupied: Vec<PlanarPoint> = users.iter().filter(|u| u.weight > 0.0).copied().collect();
    let area = inflated_area(&occupied, half, resolution)?;
    let raw = (4.0 * area / (std::f64::consts::PI * radius * radius)).ceil() as usize;
    Ok(raw.clamp(1, distinct))
}

/// Overlap refinement: walks the centers in index order, permanently
/// removing each from the working set, and counts centers that still see a
/// remaining center within twice the radius. Returns `k₀ − N + 1`, at
/// least 1.
pub fn prune_overlaps(aps: &ApSet) -> usize {
    let two_r = 2.0 * aps.radius;
    let threshold_sq = two_r * two_r;
    let k0 = aps.k();
    let mut remaining = vec![true; k0];
    let mut overlaps = 0usize;
    for i in 0..k0 {
        remaining[i] = false;
        let sees_overlap = (0..k0).any(|j| {
            remaining[j] && aps.centers[i].distance_sq(&aps.centers[j]) <= threshold_sq
        });
        if sees_overlap {
            overlaps += 1;
        }
    }
    (k0 + 1).saturating_sub(overlaps).max(1)
}

/// Evaluates the connectivity ratio for every cluster count in the window
/// `[k̂ − κ, k̂ + κ]` (clamped to `[1, distinct user positions]`) and picks
/// the best, preferring smaller counts on ties. Each count clusters with
/// its own derived seed `seed ^ k`.
pub fn search_k_star(
    users: &[PlanarPoint],
    radius: f64,
    k_hat: usize,
    kappa: usize,
    seed: u64,
) -> Result<SearchTrace> {
    if k_hat == 0 {
        return Err(Error::InvalidParameter(
            "the refined count must be at least 1".into(),
        ));
    }
    let distinct = distinct_positive_positions(users);
    if distinct == 0 {
        return Err(Error::InvalidParameter(
            "the search needs at least one user with positive weight".into(),
        ));
    }
    let hi = k_hat.saturating_add(kappa).min(distinct);
    let lo = k_hat.saturating_sub(kappa).clamp(1, hi);

    let mut evaluated = Vec::with_capacity(hi - lo + 1);
    let mut k_star = lo;
    let mut rho_star = f64::NEG_INFINITY;
    for k in lo..=hi {
        let outcome = weighted_kmeans(users, k, seed ^ k as u64)?;
        let aps = ApSet::new(outcome.centers, radius)?;
        let rho = connectivity_ratio(&aps, users)?;
        evaluated.push((k, rho));
        if rho > rho_star {
            rho_star = rho;
            k_star = k;
        }
    }
    Ok(SearchTrace {
        k0: k_hat,
        k_hat,
        evaluated,
        k_star,
        rho_star,
    })
}

/// A finished plan: the selected AP positions and the search that chose
/// them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanOutcome {
    pub aps: ApSet,
    pub trace: SearchTrace,
}

/// Full planning pass: areal estimate (unless overridden) → clustering at
/// the estimate → overlap refinement → windowed ratio search → final
/// clustering at the winning count.
pub fn plan_aps(users: &[PlanarPoint], config: &PlanConfig) -> Result<PlanOutcome> {
    config.validate()?;
    let distinct = distinct_positive_positions(users);
    if distinct == 0 {
        return Err(Error::InvalidParameter(
            "planning needs at least one user with positive weight".into(),
        ));
    }
    let k0 = match config.k0_override {
        Some(k) => k.min(distinct),
        None => initial_k0(users, config.radius, config.raster_resolution)?,
    };
    let initial = weighted_kmeans(users, k0, config.seed)?;
    let initial_aps = ApSet::new(initial.centers, config.radius)?;
    let k_hat = prune_overlaps(&initial_aps);

    let mut trace = search_k_star(users, config.radius, k_hat, config.kappa, config.seed)?;
    trace.k0 = k0;

    let final_outcome = weighted_kmeans(users, trace.k_star, config.seed ^ trace.k_star as u64)?;
    let aps = ApSet::new(final_outcome.centers, config.radius)?;
    Ok(PlanOutcome { aps, trace })
}
