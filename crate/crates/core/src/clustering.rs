//! Weighted k-means placement of access points, coverage accounting, and
//! the connectivity ratio that drives the cluster-count search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PlanarPoint;

/// Maximum Lloyd iterations before k-means stops regardless of convergence.
const MAX_KMEANS_ITERATIONS: usize = 300;

/// A set of access-point positions sharing one coverage radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApSet {
    /// Access-point positions; the weight field is unused here.
    pub centers: Vec<PlanarPoint>,
    /// Coverage radius in metres: a user is served when within this
    /// distance of at least one center (boundary inclusive).
    pub radius: f64,
}

impl ApSet {
    pub fn new(centers: Vec<PlanarPoint>, radius: f64) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidParameter(
                "an access-point set needs at least one center".into(),
            ));
        }
        if radius <= 0.0 || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coverage radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self { centers, radius })
    }

    /// Number of access points.
    pub fn k(&self) -> usize {
        self.centers.len()
    }
}

/// Result of one weighted k-means run.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterOutcome {
    /// Final cluster centroids.
    pub centers: Vec<PlanarPoint>,
    /// Number of clusters actually used; equals the request unless it
    /// exceeded the number of distinct user positions.
    pub k: usize,
    /// True when the requested cluster count was reduced to the number of
    /// distinct positions.
    pub reduced: bool,
}

/// Which users an AP set reaches and the resulting connectivity ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Indices (into the user slice) of covered users, ascending.
    pub covered_indices: Vec<usize>,
    /// Summed weight of covered users.
    pub covered_weight: f64,
    /// Summed weight of all users.
    pub total_weight: f64,
    /// covered_weight² / (k · total_weight); 0 when there is no weight.
    pub rho: f64,
}

/// Deterministic cumulative-sum draw: returns the index selected with
/// probability proportional to its weight. Weights must sum to a positive
/// value.
fn sample_weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0);
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
            acc += w;
            if target < acc {
                return i;
            }
        }
    }
    // Float round-off can leave target marginally above the final
    // accumulator; fall back to the last eligible index.
    last_positive
}

/// Counts distinct positions among users carrying positive weight.
pub(crate) fn distinct_positive_positions(users: &[PlanarPoint]) -> usize {
    let mut positions: Vec<(f64, f64)> = users
        .iter()
        .filter(|u| u.weight > 0.0)
        .map(|u| (u.x, u.y))
        .collect();
    positions.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    positions.dedup();
    positions.len()
}

/// k-means++ seeding over weighted points: the first center is drawn with
/// probability proportional to weight, later ones proportional to
/// weight × squared distance to the nearest already-chosen center.
fn seed_centers(users: &[PlanarPoint], k: usize, rng: &mut ChaCha8Rng) -> Vec<PlanarPoint> {
    let mut centers: Vec<PlanarPoint> = Vec::with_capacity(k);
    let weights: Vec<f64> = users.iter().map(|u| u.weight.max(0.0)).collect();
    let first = sample_weighted(rng, &weights);
    centers.push(PlanarPoint::new(users[first].x, users[first].y));

    let mut nearest_sq: Vec<f64> = users.iter().map(|u| u.distance_sq(&centers[0])).collect();
    while centers.len() < k {
        let scores: Vec<f64> = users
            .iter()
            .zip(&nearest_sq)
            .map(|(u, &d)| u.weight.max(0.0) * d)
            .collect();
        let pick = sample_weighted(rng, &scores);
        let center = PlanarPoint::new(users[pick].x, users[pick].y);
        for (u, d) in users.iter().zip(nearest_sq.iter_mut()) {
            *d = d.min(u.distance_sq(&center));
        }
        centers.push(center);
    }
    centers
}

/// Index of the nearest center, ties broken toward the lower center index.
fn nearest_center(point: &PlanarPoint, centers: &[PlanarPoint]) -> usize {
    let mut best = 0;
    let mut best_sq = point.distance_sq(&centers[0]);
    for (c, center) in centers.iter().enumerate().skip(1) {
        let d = point.distance_sq(center);
        if d < best_sq {
            best_sq = d;
            best = c;
        }
    }
    best
}

/// Lloyd's algorithm over weighted points with k-means++ seeding.
///
/// Deterministic for identical `(users, k, seed)`: seeding uses a
/// [`ChaCha8Rng`] built from `seed`, assignments break ties toward the
/// lower center index, and centroid sums run in user-index order. Clusters
/// that end up with no weight are re-seeded to the positive-weight user
/// farthest from its current center. If `k` exceeds the number of distinct
/// user positions it is reduced and the outcome flagged.
pub fn weighted_kmeans(users: &[PlanarPoint], k: usize, seed: u64) -> Result<ClusterOutcome> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "cluster count must be at least 1".into(),
        ));
    }
    if users.iter().any(|u| {
        !u.x.is_finite() || !u.y.is_finite() || !u.weight.is_finite() || u.weight < 0.0
    }) {
        return Err(Error::InvalidParameter(
            "user points must have finite coordinates and nonnegative weights".into(),
        ));
    }
    let distinct = distinct_positive_positions(users);
    if distinct == 0 {
        return Err(Error::InvalidParameter(
            "clustering needs at least one user with positive weight".into(),
        ));
    }
    let k_eff = k.min(distinct);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = seed_centers(users, k_eff, &mut rng);
    let mut assignment: Vec<usize> = vec![usize::MAX; users.len()];

    for _ in 0..MAX_KMEANS_ITERATIONS {
        let mut changed = false;
        for (i, user) in users.iter().enumerate() {
            let c = nearest_center(user, &centers);
            if assignment[i] != c {
                assignment[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }

        let mut weight_sum = vec![0.0f64; k_eff];
        let mut x_sum = vec![0.0f64; k_eff];
        let mut y_sum = vec![0.0f64; k_eff];
        for (user, &c) in users.iter().zip(&assignment) {
            weight_sum[c] += user.weight;
            x_sum[c] += user.weight * user.x;
            y_sum[c] += user.weight * user.y;
        }

        let mut reseeded: Vec<usize> = Vec::new();
        for c in 0..k_eff {
            if weight_sum[c] > 0.0 {
                centers[c] = PlanarPoint::new(x_sum[c] / weight_sum[c], y_sum[c] / weight_sum[c]);
            } else {
                // Re-seed a weightless cluster to the positive-weight user
                // farthest from its own center, skipping users already
                // claimed by another re-seed this round.
                let mut far_idx = None;
                let mut far_sq = -1.0;
                for (i, user) in users.iter().enumerate() {
                    if user.weight <= 0.0 || reseeded.contains(&i) {
                        continue;
                    }
                    let d = user.distance_sq(&centers[assignment[i]]);
                    if d > far_sq {
                        far_sq = d;
                        far_idx = Some(i);
                    }
                }
                if let Some(i) = far_idx {
                    reseeded.push(i);
                    centers[c] = PlanarPoint::new(users[i].x, users[i].y);
                }
            }
        }
    }

    Ok(ClusterOutcome {
        centers,
        k: k_eff,
        reduced: k_eff < k,
    })
}

/// Marks each user covered when within the AP radius of at least one
/// center (boundary inclusive) and reports summed weights plus the
/// connectivity ratio.
pub fn covered_users(aps: &ApSet, users: &[PlanarPoint]) -> CoverageReport {
    let r_sq = aps.radius * aps.radius;
    let mut covered_indices = Vec::new();
    let mut covered_weight = 0.0;
    let mut total_weight = 0.0;
    for (i, user) in users.iter().enumerate() {
        total_weight += user.weight;
        if aps.centers.iter().any(|c| user.distance_sq(c) <= r_sq) {
            covered_indices.push(i);
            covered_weight += user.weight;
        }
    }
    let rho = if total_weight > 0.0 {
        covered_weight * covered_weight / (aps.k() as f64 * total_weight)
    } else {
        0.0
    };
    CoverageReport {
        covered_indices,
        covered_weight,
        total_weight,
        rho,
    }
}

/// Connectivity ratio covered_weight² / (k · total_weight): the product of
/// mean covered weight per AP and the covered fraction. With unit weights
/// this is the covered-count squared over (AP count × user count).
pub fn connectivity_ratio(aps: &ApSet, users: &[PlanarPoint]) -> Result<f64> {
    let report = covered_users(aps, users);
    if report.total_weight <= 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok(report.rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit_users(coords: &[(f64, f64)]) -> Vec<PlanarPoint> {
        coords.iter().map(|&(x, y)| PlanarPoint::new(x, y)).collect()
    }

    #[test]
    fn kmeans_two_points_two_clusters() {
        let users = unit_users(&[(0.0, 0.0), (10.0, 0.0)]);
        let out = weighted_kmeans(&users, 2, 42).unwrap();
        assert_eq!(out.k, 2);
        assert!(!out.reduced);
        let mut xs: Vec<f64> = out.centers.iter().map(|c| c.x).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(xs, vec![0.0, 10.0]);
    }

    #[test]
    fn kmeans_single_cluster_weighted_centroid() {
        let users = vec![
            PlanarPoint::weighted(0.0, 0.0, 3.0),
            PlanarPoint::weighted(1.0, 0.0, 1.0),
        ];
        let out = weighted_kmeans(&users, 1, 0).unwrap();
        assert_relative_eq!(out.centers[0].x, 0.25);
        assert_relative_eq!(out.centers[0].y, 0.0);
    }

    #[test]
    fn kmeans_square_corners_single_cluster() {
        let users = unit_users(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let out = weighted_kmeans(&users, 1, 7).unwrap();
        assert_relative_eq!(out.centers[0].x, 0.5);
        assert_relative_eq!(out.centers[0].y, 0.5);
    }

    #[test]
    fn kmeans_reduces_k_beyond_distinct_positions() {
        let users = unit_users(&[(0.0, 0.0), (0.0, 0.0), (5.0, 0.0)]);
        let out = weighted_kmeans(&users, 3, 1).unwrap();
        assert_eq!(out.k, 2);
        assert!(out.reduced);
    }

    #[test]
    fn kmeans_rejects_degenerate_input() {
        assert!(weighted_kmeans(&[], 1, 0).is_err());
        assert!(weighted_kmeans(&[PlanarPoint::new(0.0, 0.0)], 0, 0).is_err());
        let weightless = vec![PlanarPoint::weighted(0.0, 0.0, 0.0)];
        assert!(weighted_kmeans(&weightless, 1, 0).is_err());
    }

    #[test]
    fn kmeans_is_deterministic() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let users: Vec<PlanarPoint> = (0..60)
            .map(|_| {
                PlanarPoint::weighted(
                    rng.random_range(-100.0..100.0),
                    rng.random_range(-100.0..100.0),
                    rng.random_range(0.5..20.0),
                )
            })
            .collect();
        let a = weighted_kmeans(&users, 7, 1234).unwrap();
        let b = weighted_kmeans(&users, 7, 1234).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kmeans_separates_far_blobs() {
        let mut users = Vec::new();
        for i in 0..10 {
            users.push(PlanarPoint::new(i as f64 * 0.1, 0.0));
            users.push(PlanarPoint::new(1000.0 + i as f64 * 0.1, 0.0));
        }
        let out = weighted_kmeans(&users, 2, 5).unwrap();
        let mut xs: Vec<f64> = out.centers.iter().map(|c| c.x).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(xs[0] < 1.0 && xs[1] > 999.0);
    }

    #[test]
    fn coverage_distance_check() {
        let aps = ApSet::new(vec![PlanarPoint::new(0.0, 0.0)], 1.0).unwrap();
        let users = vec![
            PlanarPoint::weighted(0.0, 0.5, 2.0),
            PlanarPoint::weighted(0.0, 2.0, 7.0),
        ];
        let report = covered_users(&aps, &users);
        assert_eq!(report.covered_indices, vec![0]);
        assert_eq!(report.covered_weight, 2.0);
        assert_eq!(report.total_weight, 9.0);
    }

    #[test]
    fn coverage_boundary_is_inclusive() {
        let aps = ApSet::new(vec![PlanarPoint::new(0.0, 0.0)], 1.5).unwrap();
        let users = vec![PlanarPoint::new(1.5, 0.0)];
        let report = covered_users(&aps, &users);
        assert_eq!(report.covered_indices, vec![0]);
    }

    #[test]
    fn coverage_no_users() {
        let aps = ApSet::new(vec![PlanarPoint::new(0.0, 0.0)], 1.0).unwrap();
        let report = covered_users(&aps, &[]);
        assert_eq!(report.covered_weight, 0.0);
        assert_eq!(report.rho, 0.0);
    }

    #[test]
    fn ratio_full_coverage_single_ap() {
        let users: Vec<PlanarPoint> = (0..16)
            .map(|i| PlanarPoint::new((i % 4) as f64 * 0.1, (i / 4) as f64 * 0.1))
            .collect();
        let aps = ApSet::new(vec![PlanarPoint::new(0.15, 0.15)], 10.0).unwrap();
        let rho = connectivity_ratio(&aps, &users).unwrap();
        assert_relative_eq!(rho, 16.0);
    }

    #[test]
    fn ratio_zero_when_nothing_covered() {
        let users = unit_users(&[(100.0, 100.0), (101.0, 100.0)]);
        let aps = ApSet::new(vec![PlanarPoint::new(0.0, 0.0)], 1.0).unwrap();
        assert_eq!(connectivity_ratio(&aps, &users).unwrap(), 0.0);
    }

    #[test]
    fn ratio_partial_coverage() {
        // 2 APs covering 10 of 20 unit-weight users: 10²/(2·20) = 2.5.
        let mut users = Vec::new();
        for i in 0..10 {
            users.push(PlanarPoint::new(i as f64 * 0.01, 0.0));
        }
        for i in 0..10 {
            users.push(PlanarPoint::new(1000.0 + i as f64, 500.0));
        }
        let aps = ApSet::new(
            vec![PlanarPoint::new(0.05, 0.0), PlanarPoint::new(0.05, 2.0)],
            3.0,
        )
        .unwrap();
        assert_relative_eq!(connectivity_ratio(&aps, &users).unwrap(), 2.5);
    }

    #[test]
    fn ratio_errors_on_zero_total_weight() {
        let users = vec![PlanarPoint::weighted(0.0, 0.0, 0.0)];
        let aps = ApSet::new(vec![PlanarPoint::new(0.0, 0.0)], 1.0).unwrap();
        assert!(matches!(
            connectivity_ratio(&aps, &users),
            Err(Error::UndefinedRatio)
        ));
    }

    proptest! {
        // Adding centers can only grow coverage.
        #[test]
        fn coverage_is_monotone_in_centers(
            users in prop::collection::vec(((-50.0f64..50.0), (-50.0f64..50.0), (0.1f64..10.0)), 1..50),
            centers in prop::collection::vec(((-50.0f64..50.0), (-50.0f64..50.0)), 2..8),
            radius in 1.0f64..30.0,
            split in 1usize..7,
        ) {
            let users: Vec<PlanarPoint> =
                users.into_iter().map(|(x, y, w)| PlanarPoint::weighted(x, y, w)).collect();
            let centers: Vec<PlanarPoint> =
                centers.into_iter().map(|(x, y)| PlanarPoint::new(x, y)).collect();
            let split = split.min(centers.len());
            let small = ApSet::new(centers[..split].to_vec(), radius).unwrap();
            let large = ApSet::new(centers.clone(), radius).unwrap();
            prop_assert!(
                covered_users(&small, &users).covered_weight
                    <= covered_users(&large, &users).covered_weight
            );
        }

        // rho factors into (covered weight per AP) × (covered fraction).
        #[test]
        fn rho_decomposition_identity(
            users in prop::collection::vec(((-50.0f64..50.0), (-50.0f64..50.0), (0.1f64..10.0)), 1..50),
            centers in prop::collection::vec(((-50.0f64..50.0), (-50.0f64..50.0)), 1..8),
            radius in 1.0f64..50.0,
        ) {
            let users: Vec<PlanarPoint> =
                users.into_iter().map(|(x, y, w)| PlanarPoint::weighted(x, y, w)).collect();
            let centers: Vec<PlanarPoint> =
                centers.into_iter().map(|(x, y)| PlanarPoint::new(x, y)).collect();
            let aps = ApSet::new(centers, radius).unwrap();
            let report = covered_users(&aps, &users);
            let product = (report.covered_weight / aps.k() as f64)
                * (report.covered_weight / report.total_weight);
            prop_assert!((report.rho - product).abs() <= 1e-12 * product.max(1.0));
        }

        // With k fixed, more covered weight means a larger ratio; with
        // covered weight fixed, fewer APs means a larger ratio.
        #[test]
        fn rho_orderings(cw in 0.0f64..100.0, extra in 0.1f64..50.0, k in 1usize..10, total in 100.0f64..200.0) {
            let rho = |cw: f64, k: usize| cw * cw / (k as f64 * total);
            prop_assert!(rho(cw + extra, k) > rho(cw, k) || cw + extra == cw);
            if cw > 0.0 {
                prop_assert!(rho(cw, k) > rho(cw, k + 1));
            }
        }
    }
}
