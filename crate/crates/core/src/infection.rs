//! Backhaul graph generation by competing infection fronts, plus an exact
//! minimum-length forest oracle for benchmarking the heuristic.
//!
//! Every backhaul node starts "infected" and grows a circular front whose
//! speed decays with its radius. When a front strictly overtakes an
//! uninfected access point, that AP is captured: an edge to its infector is
//! created and the AP starts its own front one step later. The process ends
//! when every AP is connected, yielding a forest in which each tree is
//! rooted at exactly one backhaul node.
//!
//! The engine is unit-agnostic: positions may be metres or normalized
//! coordinates. Callers working in normalized space can map results back
//! with [`BackhaulGraph::to_meters`].

use serde::{Deserialize, Serialize};

use crate::clustering::ApSet;
use crate::error::{Error, Result};
use crate::geometry::{PlanarPoint, UnitSquareTransform};

/// Hard cap on retained dynamics rows; prevents a misconfigured long run
/// from exhausting memory before the step cap trips.
const MAX_TRACE_RECORDS: usize = 2_000_000;

/// Front-growth parameters.
///
/// An infected vertex at radius `r` expands at `alpha + beta / (1 + gamma·r²)`
/// distance units per time unit, advancing `delta` time units per step.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfectionParams {
    /// Asymptotic front speed; must be positive so every run terminates.
    pub alpha: f64,
    /// Additional speed of a fresh front (radius 0).
    pub beta: f64,
    /// Decay coefficient applied to the squared radius.
    pub gamma: f64,
    /// Time-step size.
    pub delta: f64,
    /// Safety cap on simulation steps.
    pub max_steps: u64,
}

impl Default for InfectionParams {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            beta: 0.15,
            gamma: 4.4e5,
            delta: 0.01,
            max_steps: 1_000_000,
        }
    }
}

impl InfectionParams {
    pub fn validate(&self) -> Result<()> {
        if self.alpha <= 0.0 || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive and finite, got {}",
                self.alpha
            )));
        }
        if self.beta < 0.0 || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must be nonnegative and finite, got {}",
                self.beta
            )));
        }
        if self.gamma < 0.0 || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma must be nonnegative and finite, got {}",
                self.gamma
            )));
        }
        if self.delta <= 0.0 || !self.delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive and finite, got {}",
                self.delta
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter(
                "max_steps must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Upper bound on the steps needed to capture a vertex at `distance`
    /// from the nearest initially infected vertex: even at the floor speed
    /// `alpha`, a front crosses it within this many steps.
    pub fn worst_case_steps(&self, distance: f64) -> u64 {
        (distance / (self.alpha * self.delta)).ceil() as u64 + 1
    }
}

/// Front speed at radius `r`: `alpha + beta / (1 + gamma·r²)`. Strictly
/// decreasing in `r` for positive `beta` and `gamma`, approaching `alpha`.
pub fn speed_of(r: f64, params: &InfectionParams) -> f64 {
    params.alpha + params.beta / (1.0 + params.gamma * r * r)
}

/// Kind of backhaul node supplied to the generator.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BnKind {
    Terrestrial,
    NonTerrestrial,
}

/// A backhaul node position with its kind.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackhaulNode {
    pub x: f64,
    pub y: f64,
    pub kind: BnKind,
}

impl BackhaulNode {
    pub fn terrestrial(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            kind: BnKind::Terrestrial,
        }
    }

    pub fn non_terrestrial(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            kind: BnKind::NonTerrestrial,
        }
    }
}

/// Role of a vertex in the generated graph.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VertexKind {
    Ap,
    TerrestrialBn,
    NonTerrestrialBn,
}

impl VertexKind {
    pub fn is_bn(&self) -> bool {
        matches!(self, VertexKind::TerrestrialBn | VertexKind::NonTerrestrialBn)
    }
}

/// A graph vertex; `id` indexes into [`BackhaulGraph::vertices`].
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphVertex {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub kind: VertexKind,
}

/// An undirected backhaul link; `from` is the infector side when the edge
/// came from a capture. `length` is in the generator's input units;
/// `length_m` is in metres (equal to `length` until a unit-square run is
/// mapped back with [`BackhaulGraph::to_meters`]).
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub length: f64,
    pub length_m: f64,
}

/// The generated backhaul topology: a forest over APs and backhaul nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackhaulGraph {
    pub vertices: Vec<GraphVertex>,
    pub edges: Vec<GraphEdge>,
}

impl BackhaulGraph {
    pub fn ap_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.kind == VertexKind::Ap).count()
    }

    pub fn bn_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.kind.is_bn()).count()
    }

    /// Maps vertex positions from normalized coordinates back to metres and
    /// fills metre edge lengths. `length` keeps the normalized value.
    pub fn to_meters(&self, transform: &UnitSquareTransform) -> BackhaulGraph {
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                let (x, y) = transform.to_meters(v.x, v.y);
                GraphVertex { x, y, ..*v }
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| GraphEdge {
                length_m: e.length * transform.scale,
                ..*e
            })
            .collect();
        BackhaulGraph { vertices, edges }
    }
}

/// Per-vertex infection dynamics at the current step.
///
/// Vertices infected at step `j₀` keep radius 0 until step `j₀`, carry a
/// fresh-front speed from the capture step onward, and advance their radius
/// from step `j₀ + 1`. Uninfected vertices hold radius and speed 0.
#[derive(Clone, Debug, PartialEq)]
pub struct InfectionState {
    /// Last completed step.
    pub step: u64,
    pub infected: Vec<bool>,
    /// Capture step j₀ per vertex; meaningful only where `infected`.
    pub infection_step: Vec<u64>,
    pub radius: Vec<f64>,
    pub speed: Vec<f64>,
    /// Capturing vertex per vertex; `None` for backhaul nodes and the
    /// still-uninfected.
    pub infector: Vec<Option<usize>>,
}

impl InfectionState {
    /// Starts a run with vertices `0..n_bns` infected at step 0 and the
    /// remaining `n_aps` vertices susceptible.
    pub fn new(n_bns: usize, n_aps: usize, params: &InfectionParams) -> Self {
        let n = n_bns + n_aps;
        let mut state = Self {
            step: 0,
            infected: vec![false; n],
            infection_step: vec![0; n],
            radius: vec![0.0; n],
            speed: vec![0.0; n],
            infector: vec![None; n],
        };
        for i in 0..n_bns {
            state.infected[i] = true;
            state.speed[i] = speed_of(0.0, params);
        }
        state
    }

    pub fn all_infected(&self) -> bool {
        self.infected.iter().all(|&f| f)
    }

    pub fn uninfected(&self) -> Vec<usize> {
        (0..self.infected.len()).filter(|&i| !self.infected[i]).collect()
    }
}

/// Advances the simulation one step: grows every established front, applies
/// captures, then refreshes speeds. Returns the edges created this step,
/// ordered by captured-vertex index.
///
/// A capture requires the target strictly inside a front. When several
/// fronts reach one target in the same step, the front overshooting it the
/// most wins (closest to the continuous-time first arrival); remaining ties
/// go to the lower vertex index.
pub fn step(
    state: &mut InfectionState,
    positions: &[PlanarPoint],
    params: &InfectionParams,
) -> Vec<GraphEdge> {
    let n = positions.len();
    debug_assert_eq!(state.infected.len(), n);
    let j = state.step + 1;

    // Radius advance uses the previous step's speed; fronts captured last
    // step (j₀ = j − 1) start moving now.
    for i in 0..n {
        if state.infected[i] && state.infection_step[i] < j {
            state.radius[i] += params.delta * state.speed[i];
        }
    }

    let mut edges = Vec::new();
    for a in 0..n {
        if state.infected[a] {
            continue;
        }
        // Best = largest overshoot; scanning infectors in ascending index
        // with a strict improvement test breaks ties toward lower index.
        let mut best: Option<(f64, usize, f64)> = None;
        for i in 0..n {
            if !state.infected[i] || state.infection_step[i] >= j {
                continue;
            }
            let dist = positions[i].distance(&positions[a]);
            if dist < state.radius[i] {
                let overshoot = state.radius[i] - dist;
                if best.is_none_or(|(b, _, _)| overshoot > b) {
                    best = Some((overshoot, i, dist));
                }
            }
        }
        if let Some((_, infector, dist)) = best {
            state.infected[a] = true;
            state.infection_step[a] = j;
            state.radius[a] = 0.0;
            state.infector[a] = Some(infector);
            edges.push(GraphEdge {
                from: infector,
                to: a,
                length: dist,
                length_m: dist,
            });
        }
    }

    for i in 0..n {
        if state.infected[i] {
            state.speed[i] = speed_of(state.radius[i], params);
        }
    }
    state.step = j;
    edges
}

/// One sampled row of the dynamics trace.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsRecord {
    pub step: u64,
    pub vertex: usize,
    pub radius: f64,
    pub speed: f64,
    pub infected: bool,
}

/// Per-step (radius, speed) history of a run. Step 0 lists every vertex;
/// later steps list infected vertices only (uninfected ones stay at zero).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DynamicsTrace {
    pub records: Vec<DynamicsRecord>,
    /// Set when the row cap was hit and later steps were dropped.
    pub truncated: bool,
}

impl DynamicsTrace {
    fn push_step(&mut self, state: &InfectionState, initial: bool) {
        if self.truncated {
            return;
        }
        for i in 0..state.infected.len() {
            if !initial && !state.infected[i] {
                continue;
            }
            if self.records.len() >= MAX_TRACE_RECORDS {
                self.truncated = true;
                return;
            }
            self.records.push(DynamicsRecord {
                step: state.step,
                vertex: i,
                radius: state.radius[i],
                speed: state.speed[i],
                infected: state.infected[i],
            });
        }
    }

    /// Chronological (radius, speed) series for one vertex.
    pub fn vertex_series(&self, vertex: usize) -> Vec<&DynamicsRecord> {
        self.records.iter().filter(|r| r.vertex == vertex).collect()
    }
}

/// Grows a backhaul forest connecting every AP to some backhaul node.
///
/// Backhaul nodes come first in the vertex numbering (in input order),
/// followed by APs in input order; ties between fronts therefore favour
/// backhaul nodes and earlier-listed vertices.
pub fn run_infection(
    aps: &ApSet,
    bns: &[BackhaulNode],
    params: &InfectionParams,
) -> Result<(BackhaulGraph, DynamicsTrace)> {
    params.validate()?;
    if bns.is_empty() {
        return Err(Error::InvalidParameter(
            "infection needs at least one backhaul node".into(),
        ));
    }

    let mut vertices = Vec::with_capacity(bns.len() + aps.k());
    for bn in bns {
        let kind = match bn.kind {
            BnKind::Terrestrial => VertexKind::TerrestrialBn,
            BnKind::NonTerrestrial => VertexKind::NonTerrestrialBn,
        };
        vertices.push(GraphVertex {
            id: vertices.len(),
            x: bn.x,
            y: bn.y,
            kind,
        });
    }
    for c in &aps.centers {
        vertices.push(GraphVertex {
            id: vertices.len(),
            x: c.x,
            y: c.y,
            kind: VertexKind::Ap,
        });
    }
    let positions: Vec<PlanarPoint> =
        vertices.iter().map(|v| PlanarPoint::new(v.x, v.y)).collect();

    let mut state = InfectionState::new(bns.len(), aps.k(), params);
    let mut trace = DynamicsTrace::default();
    trace.push_step(&state, true);

    let mut edges = Vec::new();
    while !state.all_infected() {
        if state.step >= params.max_steps {
            return Err(Error::NonTermination {
                max_steps: params.max_steps,
                uninfected: state.uninfected(),
            });
        }
        edges.extend(step(&mut state, &positions, params));
        trace.push_step(&state, false);
    }

    Ok((BackhaulGraph { vertices, edges }, trace))
}

/// Union-find with path halving, used by the forest oracle.
struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Exact minimum-total-length forest in which every AP connects, possibly
/// through other APs, to some backhaul node: Kruskal on the complete graph
/// with all backhaul nodes contracted into one super-vertex. Quadratic in
/// the vertex count; meant for desk-scale gap reports, not production runs.
///
/// Vertex numbering matches [`run_infection`]: backhaul nodes first, then
/// APs. Returns the edge set and its total length.
pub fn optimal_forest(aps: &ApSet, bns: &[BackhaulNode]) -> Result<(Vec<GraphEdge>, f64)> {
    if bns.is_empty() {
        return Err(Error::InvalidParameter(
            "the forest oracle needs at least one backhaul node".into(),
        ));
    }
    let n_bns = bns.len();
    let mut positions: Vec<PlanarPoint> = bns
        .iter()
        .map(|b| PlanarPoint::new(b.x, b.y))
        .collect();
    positions.extend(aps.centers.iter().map(|c| PlanarPoint::new(c.x, c.y)));
    let n = positions.len();

    // BN–BN edges are useless once the BNs are contracted, so enumerate
    // only pairs touching at least one AP.
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1).max(n_bns)..n {
            candidates.push((positions[i].distance(&positions[j]), i, j));
        }
    }
    candidates.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("finite edge lengths")
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut sets = DisjointSets::new(n);
    for b in 1..n_bns {
        sets.union(0, b);
    }
    let mut edges = Vec::with_capacity(n - n_bns);
    let mut total = 0.0;
    for (length, i, j) in candidates {
        if sets.union(i, j) {
            edges.push(GraphEdge {
                from: i,
                to: j,
                length,
                length_m: length,
            });
            total += length;
            if edges.len() == n - n_bns {
                break;
            }
        }
    }
    Ok((edges, total))
}
