//! Stage orchestration behind the CLI subcommands.
//!
//! Planning works in metres. Backhaul generation, whose default growth
//! parameters suit unit-square distances, runs in a normalized frame:
//! positions are mapped isotropically onto the unit square, the growth
//! process runs there, and the resulting graph is mapped back to metres
//! before analysis and export. All outputs are deterministic for a fixed
//! scenario and seed, byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use ruralnet_core::geometry::UnitSquareTransform;
use ruralnet_core::ntbn_planner::augmented_infection;
use ruralnet_core::{
    network_metrics, optimal_forest, place_ntbns, plan_aps, ApSet, BackhaulGraph, BackhaulNode,
    DynamicsTrace, GeoPoint, GraphEdge, NetworkMetrics, NtbnPlan, PlanOutcome, PlanarPoint,
};
use serde::Serialize;

use crate::error::{in_stage, io_config, CliError};
use crate::export::{graph_to_dot, write_atomic, write_dynamics_csv, write_json};
use crate::geojson::{aps_to_geojson, graph_from_geojson, graph_to_geojson};
use crate::scenario::{NtbnStrategy, Scenario};

/// Vertex-count ceiling for the exact-forest comparison in reports; beyond
/// this the all-pairs edge sort gets noticeably slow.
const ORACLE_VERTEX_LIMIT: usize = 1000;

/// One row of `metrics.json`: a sweep position and its network metrics.
#[derive(Serialize)]
struct MetricsEntry {
    m: usize,
    #[serde(flatten)]
    metrics: NetworkMetrics,
}

/// Contents of `oracle.json`: generated-graph length against the exact
/// minimum for the same vertices.
#[derive(Serialize)]
struct OracleSummary {
    m: usize,
    optimal_length_m: f64,
    heuristic_length_m: f64,
    ratio: f64,
}

/// Everything produced for one node count in the sweep.
struct SweepResult {
    plan: NtbnPlan,
    norm_graph: BackhaulGraph,
    meters_graph: BackhaulGraph,
    metrics: NetworkMetrics,
    trace: DynamicsTrace,
}

/// The unit-square frame shared by every sweep entry.
struct NormalizedFrame {
    transform: UnitSquareTransform,
    aps: ApSet,
    tbns: Vec<BackhaulNode>,
    pool: Vec<PlanarPoint>,
}

fn print_warnings(scenario: &Scenario) {
    for w in &scenario.warnings {
        eprintln!("warning: {w}");
    }
}

/// Plans access points and writes `aps.geojson` and `search_trace.json`.
fn plan_stage(scenario: &Scenario, out: &Path) -> Result<PlanOutcome, CliError> {
    let outcome = in_stage("plan", plan_aps(&scenario.users, &scenario.plan_config))?;
    let t = &outcome.trace;
    println!(
        "planned {} access points (k0={}, k_hat={}, rho*={:.6})",
        t.k_star, t.k0, t.k_hat, t.rho_star
    );
    let reference = scenario.geo_reference.as_ref();
    let aps_path = out.join("aps.geojson");
    write_json(&aps_path, &aps_to_geojson(&outcome.aps, reference))
        .map_err(|e| e.into_stage("plan"))?;
    println!("wrote {}", aps_path.display());
    let trace_path = out.join("search_trace.json");
    write_json(&trace_path, t).map_err(|e| e.into_stage("plan"))?;
    println!("wrote {}", trace_path.display());
    Ok(outcome)
}

/// Maps the planned APs, terrestrial nodes, and any manual pool onto the
/// unit square.
fn normalize(scenario: &Scenario, aps: &ApSet) -> Result<NormalizedFrame, CliError> {
    let pool: &[PlanarPoint] = match &scenario.ntbn_strategy {
        NtbnStrategy::Manual(pool) => pool,
        NtbnStrategy::Weighted => &[],
    };
    let coords = aps
        .centers
        .iter()
        .map(|c| (c.x, c.y))
        .chain(scenario.terrestrial_bns.iter().map(|b| (b.x, b.y)))
        .chain(pool.iter().map(|p| (p.x, p.y)));
    let transform = UnitSquareTransform::fit(coords);
    let centers = aps
        .centers
        .iter()
        .map(|c| {
            let (x, y) = transform.to_unit(c.x, c.y);
            PlanarPoint::new(x, y)
        })
        .collect();
    let aps = in_stage(
        "backhaul",
        ApSet::new(centers, aps.radius / transform.scale),
    )?;
    let tbns = scenario
        .terrestrial_bns
        .iter()
        .map(|b| {
            let (x, y) = transform.to_unit(b.x, b.y);
            BackhaulNode::terrestrial(x, y)
        })
        .collect();
    let pool = pool
        .iter()
        .map(|p| {
            let (x, y) = transform.to_unit(p.x, p.y);
            PlanarPoint::new(x, y)
        })
        .collect();
    Ok(NormalizedFrame {
        transform,
        aps,
        tbns,
        pool,
    })
}

/// Places `m` extra nodes, grows the backhaul graph, and maps it back to
/// metres.
fn run_sweep_entry(
    frame: &NormalizedFrame,
    scenario: &Scenario,
    m: usize,
) -> Result<SweepResult, CliError> {
    let plan = match &scenario.ntbn_strategy {
        NtbnStrategy::Weighted => in_stage(
            "backhaul",
            place_ntbns(&frame.aps, &frame.tbns, m, scenario.seed),
        )?,
        NtbnStrategy::Manual(_) => NtbnPlan::manual(frame.pool[..m].to_vec()),
    };
    let (norm_graph, trace) = in_stage(
        "backhaul",
        augmented_infection(&frame.aps, &frame.tbns, &plan, &scenario.infection_params),
    )?;
    let meters_graph = norm_graph.to_meters(&frame.transform);
    let metrics = in_stage("analyze", network_metrics(&meters_graph))?;
    println!(
        "m={m}: {} vertices, {} edges, avg hops {:.2}, fairness {:.3}",
        meters_graph.vertices.len(),
        meters_graph.edges.len(),
        metrics.average_hop_count,
        metrics.fairness,
    );
    Ok(SweepResult {
        plan,
        norm_graph,
        meters_graph,
        metrics,
        trace,
    })
}

fn write_graph_files(
    out: &Path,
    m: usize,
    graph: &BackhaulGraph,
    reference: Option<&GeoPoint>,
) -> Result<(), CliError> {
    let geo_path = out.join(format!("graph_m{m}.geojson"));
    write_json(&geo_path, &graph_to_geojson(graph, reference))
        .map_err(|e| e.into_stage("backhaul"))?;
    println!("wrote {}", geo_path.display());
    let dot_path = out.join(format!("graph_m{m}.dot"));
    write_atomic(&dot_path, graph_to_dot(graph).as_bytes())
        .map_err(|e| e.into_stage("backhaul"))?;
    println!("wrote {}", dot_path.display());
    Ok(())
}

fn write_dynamics(out: &Path, trace: &DynamicsTrace) -> Result<(), CliError> {
    let path = out.join("dynamics.csv");
    write_dynamics_csv(&path, trace).map_err(|e| e.into_stage("backhaul"))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Exact minimum forest for the entry's vertex set, in normalized units:
/// `(optimal_length, heuristic_length, optimal_edges)`.
fn oracle_lengths(
    frame: &NormalizedFrame,
    entry: &SweepResult,
) -> Result<(f64, f64, Vec<GraphEdge>), CliError> {
    let mut bns = frame.tbns.clone();
    bns.extend(entry.plan.nodes());
    let (edges, optimal) = in_stage("oracle", optimal_forest(&frame.aps, &bns))?;
    let heuristic: f64 = entry.norm_graph.edges.iter().map(|e| e.length).sum();
    Ok((optimal, heuristic, edges))
}

fn length_ratio(heuristic: f64, optimal: f64) -> f64 {
    if optimal > 0.0 {
        heuristic / optimal
    } else {
        1.0
    }
}

/// Renders `report.md`.
fn render_report(
    scenario: &Scenario,
    outcome: &PlanOutcome,
    rows: &[(usize, NetworkMetrics, Option<f64>)],
    dynamics_m: usize,
    dynamics_truncated: bool,
) -> String {
    let mut md = String::new();
    let total_weight: f64 = scenario.users.iter().map(|u| u.weight).sum();
    let coord_line = match &scenario.geo_reference {
        Some(r) => format!(
            "geographic, projected onto a local plane around ({:.5}, {:.5})",
            r.lat, r.lon
        ),
        None => "planar metres".to_string(),
    };
    writeln!(md, "# Deployment plan").unwrap();
    writeln!(md).unwrap();
    writeln!(md, "Generated with seed {}.", scenario.seed).unwrap();
    writeln!(md).unwrap();
    writeln!(md, "## Inputs").unwrap();
    writeln!(md).unwrap();
    writeln!(
        md,
        "- users: {} positions, total demand {:.1}",
        scenario.users.len(),
        total_weight
    )
    .unwrap();
    writeln!(
        md,
        "- terrestrial backhaul nodes: {}",
        scenario.terrestrial_bns.len()
    )
    .unwrap();
    writeln!(
        md,
        "- coverage radius: {} m",
        scenario.plan_config.radius
    )
    .unwrap();
    writeln!(md, "- coordinates: {coord_line}").unwrap();
    writeln!(md).unwrap();

    let t = &outcome.trace;
    let lo = t.evaluated.first().map_or(t.k_star, |e| e.0);
    let hi = t.evaluated.last().map_or(t.k_star, |e| e.0);
    writeln!(md, "## Access-point plan").unwrap();
    writeln!(md).unwrap();
    writeln!(md, "- initial areal estimate: k0 = {}", t.k0).unwrap();
    writeln!(md, "- after overlap refinement: k_hat = {}", t.k_hat).unwrap();
    writeln!(
        md,
        "- searched {} candidate counts in [{lo}, {hi}]",
        t.evaluated.len()
    )
    .unwrap();
    writeln!(
        md,
        "- selected k* = {} access points, connectivity ratio rho* = {:.6}",
        t.k_star, t.rho_star
    )
    .unwrap();
    writeln!(md).unwrap();

    writeln!(md, "## Backhaul sweep").unwrap();
    writeln!(md).unwrap();
    writeln!(
        md,
        "| extra nodes (m) | avg hops | max hops | fairness | total length (m) | vs optimal |"
    )
    .unwrap();
    writeln!(
        md,
        "|----------------:|---------:|---------:|---------:|-----------------:|-----------:|"
    )
    .unwrap();
    for (m, metrics, ratio) in rows {
        let ratio_cell = match ratio {
            Some(r) => format!("{r:.4}"),
            None => "n/a".to_string(),
        };
        writeln!(
            md,
            "| {m} | {:.2} | {} | {:.4} | {:.1} | {ratio_cell} |",
            metrics.average_hop_count,
            metrics.max_hop_count,
            metrics.fairness,
            metrics.total_backhaul_length,
        )
        .unwrap();
    }
    writeln!(md).unwrap();
    writeln!(
        md,
        "The `vs optimal` column compares each graph's total length with the \
         exact minimum-length forest on the same vertices (1.0000 means \
         optimal); it is omitted for graphs with more than {ORACLE_VERTEX_LIMIT} \
         vertices."
    )
    .unwrap();
    writeln!(md).unwrap();
    writeln!(
        md,
        "`dynamics.csv` records the growth history of the m = {dynamics_m} run \
         in normalized unit-square coordinates."
    )
    .unwrap();

    let mut warnings: Vec<String> = scenario.warnings.clone();
    if dynamics_truncated {
        warnings.push("the growth history hit its row cap; later steps were dropped".into());
    }
    if !warnings.is_empty() {
        writeln!(md).unwrap();
        writeln!(md, "## Warnings").unwrap();
        writeln!(md).unwrap();
        for w in &warnings {
            writeln!(md, "- {w}").unwrap();
        }
    }
    md
}

/// `plan-aps`: access-point planning only.
pub fn run_plan_aps(scenario: &Scenario) -> Result<(), CliError> {
    print_warnings(scenario);
    plan_stage(scenario, &scenario.output_dir)?;
    Ok(())
}

/// `gen-backhaul`: plan, then grow the terrestrial-only (m = 0) graph.
pub fn run_gen_backhaul(scenario: &Scenario) -> Result<(), CliError> {
    print_warnings(scenario);
    let out = scenario.output_dir.clone();
    let outcome = plan_stage(scenario, &out)?;
    let frame = normalize(scenario, &outcome.aps)?;
    let entry = run_sweep_entry(&frame, scenario, 0)?;
    write_graph_files(&out, 0, &entry.meters_graph, scenario.geo_reference.as_ref())?;
    write_dynamics(&out, &entry.trace)
}

/// `add-ntbn`: plan, then sweep every configured node count.
pub fn run_add_ntbn(scenario: &Scenario) -> Result<(), CliError> {
    print_warnings(scenario);
    let out = scenario.output_dir.clone();
    let outcome = plan_stage(scenario, &out)?;
    let frame = normalize(scenario, &outcome.aps)?;
    let mut entries = Vec::new();
    for &m in &scenario.ntbn_counts {
        let entry = run_sweep_entry(&frame, scenario, m)?;
        write_graph_files(&out, m, &entry.meters_graph, scenario.geo_reference.as_ref())?;
        entries.push(MetricsEntry {
            m,
            metrics: entry.metrics,
        });
    }
    let metrics_path = out.join("metrics.json");
    write_json(&metrics_path, &entries).map_err(|e| e.into_stage("analyze"))?;
    println!("wrote {}", metrics_path.display());
    Ok(())
}

/// `analyze`: recompute metrics for a previously written graph file.
pub fn run_analyze(graph_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let text = io_config(graph_path, std::fs::read_to_string(graph_path))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", graph_path.display())))?;
    let graph = graph_from_geojson(&value)
        .map_err(|e| CliError::config(format!("{}: {e}", graph_path.display())))?;
    let metrics = in_stage("analyze", network_metrics(&graph))?;
    match out {
        Some(dir) => {
            let path = dir.join("metrics.json");
            write_json(&path, &metrics).map_err(|e| e.into_stage("analyze"))?;
            println!("wrote {}", path.display());
        }
        None => {
            let text = in_stage("analyze", serde_json::to_string_pretty(&metrics))?;
            println!("{text}");
        }
    }
    Ok(())
}

/// `oracle`: compare the generated graph with the exact minimum forest for
/// the first configured node count.
pub fn run_oracle(scenario: &Scenario) -> Result<(), CliError> {
    print_warnings(scenario);
    let out = scenario.output_dir.clone();
    let outcome = plan_stage(scenario, &out)?;
    let frame = normalize(scenario, &outcome.aps)?;
    let m = scenario.ntbn_counts[0];
    let entry = run_sweep_entry(&frame, scenario, m)?;
    let (optimal, heuristic, edges) = oracle_lengths(&frame, &entry)?;
    let summary = OracleSummary {
        m,
        optimal_length_m: optimal * frame.transform.scale,
        heuristic_length_m: heuristic * frame.transform.scale,
        ratio: length_ratio(heuristic, optimal),
    };
    println!(
        "m={m}: generated length {:.1} m vs optimal {:.1} m (ratio {:.4})",
        summary.heuristic_length_m, summary.optimal_length_m, summary.ratio
    );
    let json_path = out.join("oracle.json");
    write_json(&json_path, &summary).map_err(|e| e.into_stage("oracle"))?;
    println!("wrote {}", json_path.display());

    // The optimal forest over the same vertices, exported for comparison.
    let optimal_graph = BackhaulGraph {
        vertices: entry.meters_graph.vertices.clone(),
        edges: edges
            .into_iter()
            .map(|e| GraphEdge {
                length_m: e.length * frame.transform.scale,
                ..e
            })
            .collect(),
    };
    let geo_path = out.join("oracle.geojson");
    write_json(
        &geo_path,
        &graph_to_geojson(&optimal_graph, scenario.geo_reference.as_ref()),
    )
    .map_err(|e| e.into_stage("oracle"))?;
    println!("wrote {}", geo_path.display());
    Ok(())
}

/// `pipeline`: every stage, plus `report.md`.
pub fn run_pipeline(scenario: &Scenario) -> Result<(), CliError> {
    print_warnings(scenario);
    let out = scenario.output_dir.clone();
    let outcome = plan_stage(scenario, &out)?;
    let frame = normalize(scenario, &outcome.aps)?;
    let reference = scenario.geo_reference.as_ref();

    let mut metric_entries = Vec::new();
    let mut report_rows = Vec::new();
    let mut dynamics: Option<(usize, DynamicsTrace)> = None;
    for &m in &scenario.ntbn_counts {
        let entry = run_sweep_entry(&frame, scenario, m)?;
        write_graph_files(&out, m, &entry.meters_graph, reference)?;
        let ratio = if entry.meters_graph.vertices.len() <= ORACLE_VERTEX_LIMIT {
            let (optimal, heuristic, _) = oracle_lengths(&frame, &entry)?;
            Some(length_ratio(heuristic, optimal))
        } else {
            None
        };
        if dynamics.is_none() {
            dynamics = Some((m, entry.trace.clone()));
        }
        report_rows.push((m, entry.metrics.clone(), ratio));
        metric_entries.push(MetricsEntry {
            m,
            metrics: entry.metrics,
        });
    }

    let (dynamics_m, trace) = dynamics.expect("at least one node count");
    write_dynamics(&out, &trace)?;

    let metrics_path = out.join("metrics.json");
    write_json(&metrics_path, &metric_entries).map_err(|e| e.into_stage("analyze"))?;
    println!("wrote {}", metrics_path.display());

    let report = render_report(scenario, &outcome, &report_rows, dynamics_m, trace.truncated);
    let report_path = out.join("report.md");
    write_atomic(&report_path, report.as_bytes()).map_err(|e| e.into_stage("report"))?;
    println!("wrote {}", report_path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ruralnet_core::{InfectionParams, PlanConfig};
    use std::path::PathBuf;

    fn test_scenario(out: PathBuf) -> Scenario {
        let mut users = Vec::new();
        for i in 0..6 {
            users.push(PlanarPoint::weighted(
                (i % 3) as f64 * 40.0,
                (i / 3) as f64 * 40.0,
                5.0,
            ));
        }
        for i in 0..6 {
            users.push(PlanarPoint::weighted(
                3000.0 + (i % 3) as f64 * 40.0,
                500.0 + (i / 3) as f64 * 40.0,
                2.0,
            ));
        }
        Scenario {
            users,
            terrestrial_bns: vec![BackhaulNode::terrestrial(1500.0, 250.0)],
            plan_config: PlanConfig {
                radius: 150.0,
                kappa: 3,
                seed: 7,
                k0_override: None,
                raster_resolution: None,
            },
            infection_params: InfectionParams {
                delta: 0.2,
                gamma: 10.0,
                ..InfectionParams::default()
            },
            ntbn_counts: vec![0, 1],
            ntbn_strategy: NtbnStrategy::Weighted,
            output_dir: out,
            seed: 7,
            geo_reference: None,
            warnings: Vec::new(),
        }
    }

    const PIPELINE_FILES: &[&str] = &[
        "aps.geojson",
        "search_trace.json",
        "graph_m0.geojson",
        "graph_m0.dot",
        "graph_m1.geojson",
        "graph_m1.dot",
        "dynamics.csv",
        "metrics.json",
        "report.md",
    ];

    #[test]
    fn pipeline_writes_every_output() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = test_scenario(dir.path().to_path_buf());
        run_pipeline(&scenario).unwrap();
        for name in PIPELINE_FILES {
            assert!(dir.path().join(name).is_file(), "missing {name}");
        }
        let metrics: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap())
                .unwrap();
        let entries = metrics.as_array().unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0]["m"], 0);
        assert_eq!(entries[1]["m"], 1);
        assert!(entries[0]["fairness"].is_number());
        let report = std::fs::read_to_string(dir.path().join("report.md")).unwrap();
        assert!(report.contains("## Backhaul sweep"));
        assert!(report.contains("| 0 |"));
        assert!(report.contains("| 1 |"));
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        run_pipeline(&test_scenario(dir_a.path().to_path_buf())).unwrap();
        run_pipeline(&test_scenario(dir_b.path().to_path_buf())).unwrap();
        for name in PIPELINE_FILES {
            let a = std::fs::read(dir_a.path().join(name)).unwrap();
            let b = std::fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between reruns");
        }
    }

    #[test]
    fn analyze_matches_pipeline_metrics() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = test_scenario(dir.path().to_path_buf());
        run_pipeline(&scenario).unwrap();
        let out = tempfile::tempdir().unwrap();
        run_analyze(&dir.path().join("graph_m0.geojson"), Some(out.path())).unwrap();
        let recomputed: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(out.path().join("metrics.json")).unwrap(),
        )
        .unwrap();
        let pipeline: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("metrics.json")).unwrap(),
        )
        .unwrap();
        let entry = &pipeline.as_array().unwrap()[0];
        for field in [
            "average_hop_count",
            "max_hop_count",
            "fairness",
            "total_backhaul_length",
        ] {
            assert_eq!(recomputed[field], entry[field], "{field} differs");
        }
    }

    #[test]
    fn gen_backhaul_writes_base_graph_and_dynamics() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = test_scenario(dir.path().to_path_buf());
        run_gen_backhaul(&scenario).unwrap();
        for name in ["aps.geojson", "graph_m0.geojson", "graph_m0.dot", "dynamics.csv"] {
            assert!(dir.path().join(name).is_file(), "missing {name}");
        }
        assert!(!dir.path().join("metrics.json").exists());
    }

    #[test]
    fn oracle_reports_ratio_at_least_one() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = test_scenario(dir.path().to_path_buf());
        run_oracle(&scenario).unwrap();
        let summary: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("oracle.json")).unwrap(),
        )
        .unwrap();
        let ratio = summary["ratio"].as_f64().unwrap();
        assert!(ratio >= 1.0 - 1e-9, "ratio {ratio} below 1");
        let optimal = summary["optimal_length_m"].as_f64().unwrap();
        let heuristic = summary["heuristic_length_m"].as_f64().unwrap();
        assert!(optimal <= heuristic + 1e-9);
        assert!(dir.path().join("oracle.geojson").is_file());
    }

    #[test]
    fn manual_strategy_uses_pool_positions() {
        let dir = tempfile::tempdir().unwrap();
        let mut scenario = test_scenario(dir.path().to_path_buf());
        scenario.ntbn_strategy = NtbnStrategy::Manual(vec![PlanarPoint::new(2000.0, 400.0)]);
        scenario.ntbn_counts = vec![1];
        run_pipeline(&scenario).unwrap();
        let graph: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("graph_m1.geojson")).unwrap(),
        )
        .unwrap();
        let features = graph["features"].as_array().unwrap();
        let placed = features
            .iter()
            .find(|f| f["properties"]["kind"] == "non-terrestrial-bn")
            .expect("placed node present");
        let coords = placed["geometry"]["coordinates"].as_array().unwrap();
        assert!((coords[0].as_f64().unwrap() - 2000.0).abs() < 1e-6);
        assert!((coords[1].as_f64().unwrap() - 400.0).abs() < 1e-6);
    }
}
