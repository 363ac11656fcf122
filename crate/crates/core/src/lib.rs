//! Planning algorithms for rural wireless deployments: weighted clustering
//! to place access points, an expanding-infection process that grows a
//! backhaul forest from backbone nodes, non-terrestrial node placement, and
//! topology metrics.
//!
//! The typical flow mirrors the CLI pipeline:
//!
//! 1. project user locations onto a local plane ([`geometry`]),
//! 2. choose access-point count and positions by searching the connectivity
//!    ratio over cluster counts ([`ap_planner`]),
//! 3. grow a backhaul graph from backbone nodes ([`infection`]),
//! 4. optionally add non-terrestrial backbone nodes and rerun ([`ntbn_planner`]),
//! 5. score the result ([`analytics`]).
//!
//! Everything is deterministic given a seed: random state is confined to
//! explicit [`rand_chacha::ChaCha8Rng`] arguments.

pub mod analytics;
pub mod ap_planner;
pub mod clustering;
pub mod error;
pub mod geometry;
pub mod infection;
pub mod ntbn_planner;

pub use analytics::{network_metrics, NetworkMetrics};
pub use ap_planner::{plan_aps, PlanConfig, PlanOutcome, SearchTrace};
pub use clustering::{connectivity_ratio, weighted_kmeans, ApSet, ClusterOutcome, CoverageReport};
pub use error::{Error, Result};
pub use geometry::{GeoPoint, PlanarPoint, UnitSquareTransform};
pub use infection::{
    optimal_forest, run_infection, BackhaulGraph, BackhaulNode, BnKind, DynamicsTrace, GraphEdge,
    GraphVertex, InfectionParams, InfectionState, VertexKind,
};
pub use ntbn_planner::{ntbn_sweep, place_ntbns, NtbnPlan, PlacementStrategy, SweepEntry};
