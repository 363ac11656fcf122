//! Topology metrics over a generated backhaul graph: hop counts, per-node
//! load, load fairness, and total link length.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infection::{BackhaulGraph, VertexKind};

/// Summary statistics for one backhaul graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkMetrics {
    /// Mean hop count over APs (0 when the graph has no APs).
    pub average_hop_count: f64,
    /// Largest AP hop count.
    pub max_hop_count: usize,
    /// APs attributed to each backhaul node, keyed by vertex id; idle
    /// nodes appear with 0.
    pub per_bn_ap_count: BTreeMap<usize, usize>,
    /// Jain fairness of the per-node loads.
    pub fairness: f64,
    /// Sum of edge lengths in metres.
    pub total_backhaul_length: f64,
}

/// Attribution of every AP to its backhaul node: breadth-first search from
/// all backhaul nodes at once over the undirected edge set. Returns, per
/// vertex, the rooting node id and hop distance. For forests the root is
/// the component's unique node; in general it is the hop-nearest one, ties
/// to the lower node id.
fn attribute_to_bns(graph: &BackhaulGraph) -> Result<Vec<Option<(usize, usize)>>> {
    let n = graph.vertices.len();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in &graph.edges {
        if e.from >= n || e.to >= n {
            return Err(Error::CorruptGraph(format!(
                "edge ({}, {}) references a missing vertex",
                e.from, e.to
            )));
        }
        adjacency[e.from].push(e.to);
        adjacency[e.to].push(e.from);
    }

    let mut label: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut queue = VecDeque::new();
    for v in &graph.vertices {
        if v.kind.is_bn() {
            label[v.id] = Some((v.id, 0));
            queue.push_back(v.id);
        }
    }
    while let Some(u) = queue.pop_front() {
        let (root, dist) = label[u].expect("queued vertices are labeled");
        for &w in &adjacency[u] {
            if label[w].is_none() {
                label[w] = Some((root, dist + 1));
                queue.push_back(w);
            }
        }
    }
    Ok(label)
}

/// Hop count per AP (vertex id → edges to its backhaul node) and the mean
/// over APs. Fails on any AP with no path to a backhaul node.
pub fn hop_counts(graph: &BackhaulGraph) -> Result<(BTreeMap<usize, usize>, f64)> {
    let labels = attribute_to_bns(graph)?;
    let mut hops = BTreeMap::new();
    for v in &graph.vertices {
        if v.kind != VertexKind::Ap {
            continue;
        }
        match labels[v.id] {
            Some((_, dist)) => {
                hops.insert(v.id, dist);
            }
            None => {
                return Err(Error::CorruptGraph(format!(
                    "access point {} has no path to a backhaul node",
                    v.id
                )));
            }
        }
    }
    let average = if hops.is_empty() {
        0.0
    } else {
        hops.values().map(|&h| h as f64).sum::<f64>() / hops.len() as f64
    };
    Ok((hops, average))
}

/// Number of APs rooted at each backhaul node; idle nodes report 0.
pub fn bn_loads(graph: &BackhaulGraph) -> Result<BTreeMap<usize, usize>> {
    let labels = attribute_to_bns(graph)?;
    let mut loads: BTreeMap<usize, usize> = graph
        .vertices
        .iter()
        .filter(|v| v.kind.is_bn())
        .map(|v| (v.id, 0))
        .collect();
    for v in &graph.vertices {
        if v.kind != VertexKind::Ap {
            continue;
        }
        let (root, _) = labels[v.id].ok_or_else(|| {
            Error::CorruptGraph(format!(
                "access point {} has no path to a backhaul node",
                v.id
            ))
        })?;
        *loads.get_mut(&root).expect("roots are backhaul nodes") += 1;
    }
    Ok(loads)
}

/// Jain's fairness index (Σx)² / (n·Σx²) over nonnegative loads: 1 for
/// perfectly balanced loads, 1/n when one node carries everything. All-zero
/// (and empty) inputs count as perfectly fair.
pub fn jain_fairness(loads: &[f64]) -> f64 {
    let sum: f64 = loads.iter().sum();
    let sum_sq: f64 = loads.iter().map(|&x| x * x).sum();
    if sum_sq == 0.0 {
        return 1.0;
    }
    sum * sum / (loads.len() as f64 * sum_sq)
}

/// Total edge length in metres.
pub fn total_backhaul_length(graph: &BackhaulGraph) -> f64 {
    graph.edges.iter().map(|e| e.length_m).sum()
}

/// Computes all metrics in one pass.
pub fn network_metrics(graph: &BackhaulGraph) -> Result<NetworkMetrics> {
    let (hops, average_hop_count) = hop_counts(graph)?;
    let max_hop_count = hops.values().copied().max().unwrap_or(0);
    let per_bn_ap_count = bn_loads(graph)?;
    let loads: Vec<f64> = per_bn_ap_count.values().map(|&c| c as f64).collect();
    Ok(NetworkMetrics {
        average_hop_count,
        max_hop_count,
        fairness: jain_fairness(&loads),
        total_backhaul_length: total_backhaul_length(graph),
        per_bn_ap_count,
    })
}
