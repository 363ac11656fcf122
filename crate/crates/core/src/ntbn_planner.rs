//! Placement of non-terrestrial backhaul nodes and regeneration of the
//! backhaul graph with them added to the initially infected set.

use serde::{Deserialize, Serialize};

use crate::analytics::{network_metrics, NetworkMetrics};
use crate::clustering::{weighted_kmeans, ApSet};
use crate::error::{Error, Result};
use crate::geometry::PlanarPoint;
use crate::infection::{
    run_infection, BackhaulGraph, BackhaulNode, BnKind, DynamicsTrace, InfectionParams,
};

/// How non-terrestrial node positions were chosen.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlacementStrategy {
    /// k-means over AP positions weighted by each AP's distance to its
    /// nearest terrestrial backhaul node, pulling nodes toward the APs
    /// that are hardest to reach terrestrially.
    WeightedFarthestKmeans,
    /// Caller-provided coordinates.
    Manual,
}

/// Proposed positions for `m` non-terrestrial backhaul nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NtbnPlan {
    pub positions: Vec<PlanarPoint>,
    pub m: usize,
    pub strategy: PlacementStrategy,
}

impl NtbnPlan {
    /// Plan from hand-picked coordinates.
    pub fn manual(positions: Vec<PlanarPoint>) -> Self {
        Self {
            m: positions.len(),
            positions,
            strategy: PlacementStrategy::Manual,
        }
    }

    /// The plan's nodes as backhaul-node inputs for the generator.
    pub fn nodes(&self) -> Vec<BackhaulNode> {
        self.positions
            .iter()
            .map(|p| BackhaulNode::non_terrestrial(p.x, p.y))
            .collect()
    }
}

/// Places `m` non-terrestrial nodes at centroids of the APs weighted by
/// distance to the nearest terrestrial node, so poorly served APs attract
/// them. `m = 0` yields an empty plan.
pub fn place_ntbns(
    aps: &ApSet,
    terrestrial_bns: &[BackhaulNode],
    m: usize,
    seed: u64,
) -> Result<NtbnPlan> {
    if m == 0 {
        return Ok(NtbnPlan {
            positions: Vec::new(),
            m: 0,
            strategy: PlacementStrategy::WeightedFarthestKmeans,
        });
    }
    if m > aps.k() {
        return Err(Error::InvalidParameter(format!(
            "cannot place {m} non-terrestrial nodes for only {} access points",
            aps.k()
        )));
    }
    if terrestrial_bns.is_empty() {
        return Err(Error::InvalidParameter(
            "placement needs at least one terrestrial backhaul node".into(),
        ));
    }

    let weighted: Vec<PlanarPoint> = aps
        .centers
        .iter()
        .map(|c| {
            let nearest = terrestrial_bns
                .iter()
                .map(|b| {
                    let dx = c.x - b.x;
                    let dy = c.y - b.y;
                    (dx * dx + dy * dy).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            PlanarPoint::weighted(c.x, c.y, nearest)
        })
        .collect();

    let outcome = weighted_kmeans(&weighted, m, seed)?;
    if outcome.k < m {
        return Err(Error::InvalidParameter(format!(
            "only {} distinct access-point positions away from terrestrial nodes; cannot place {m} non-terrestrial nodes",
            outcome.k
        )));
    }
    Ok(NtbnPlan {
        positions: outcome.centers,
        m,
        strategy: PlacementStrategy::WeightedFarthestKmeans,
    })
}

/// Regenerates the backhaul graph with the planned non-terrestrial nodes
/// joining the terrestrial ones in the initially infected set.
pub fn augmented_infection(
    aps: &ApSet,
    terrestrial_bns: &[BackhaulNode],
    plan: &NtbnPlan,
    params: &InfectionParams,
) -> Result<(BackhaulGraph, DynamicsTrace)> {
    let mut bns: Vec<BackhaulNode> = terrestrial_bns
        .iter()
        .map(|b| BackhaulNode {
            kind: BnKind::Terrestrial,
            ..*b
        })
        .collect();
    bns.extend(plan.nodes());
    run_infection(aps, &bns, params)
}

/// One row of a sweep over non-terrestrial node counts.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepEntry {
    pub m: usize,
    pub plan: NtbnPlan,
    pub graph: BackhaulGraph,
    pub metrics: NetworkMetrics,
    pub trace: DynamicsTrace,
}

/// Runs placement, graph generation, and metrics for each node count in
/// `m_values` (which must be non-decreasing). Entries come back in input
/// order.
pub fn ntbn_sweep(
    aps: &ApSet,
    terrestrial_bns: &[BackhaulNode],
    m_values: &[usize],
    params: &InfectionParams,
    seed: u64,
) -> Result<Vec<SweepEntry>> {
    if m_values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter(
            "non-terrestrial node counts must be non-decreasing".into(),
        ));
    }
    let mut entries = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let plan = place_ntbns(aps, terrestrial_bns, m, seed)?;
        let (graph, trace) = augmented_infection(aps, terrestrial_bns, &plan, params)?;
        let metrics = network_metrics(&graph)?;
        entries.push(SweepEntry {
            m,
            plan,
            graph,
            metrics,
            trace,
        });
    }
    Ok(entries)
}
