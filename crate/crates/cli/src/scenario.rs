//! Scenario configuration: a TOML file describing users, terrestrial
//! backhaul nodes, planner and front-growth parameters, and the
//! non-terrestrial node counts to sweep. CLI flags override the seed and
//! output directory.
//!
//! Coordinates may be geographic (`lat`/`lon` in degrees) or planar
//! (`x`/`y` in metres), but the mode must be consistent across users,
//! backhaul nodes, and manual placements. Geographic input is projected
//! onto a local plane around the users' unweighted centroid.

use std::path::{Path, PathBuf};

use ruralnet_core::geometry::project_to_plane;
use ruralnet_core::{BackhaulNode, GeoPoint, InfectionParams, PlanConfig, PlanarPoint};
use serde::Deserialize;

use crate::error::{io_config, CliError};
use crate::ingest::{ingest_population, Format};

/// One point in either coordinate mode, as written in TOML.
#[derive(Copy, Clone, Debug, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PointSpec {
    Geo {
        lat: f64,
        lon: f64,
        #[serde(default = "one")]
        weight: f64,
    },
    Planar {
        x: f64,
        y: f64,
        #[serde(default = "one")]
        weight: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    population: PopulationSection,
    backhaul: BackhaulSection,
    plan: PlanSection,
    #[serde(default)]
    infection: InfectionSection,
    #[serde(default)]
    ntbn: NtbnSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PopulationSection {
    path: Option<PathBuf>,
    format: Option<String>,
    users: Option<Vec<PointSpec>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BackhaulSection {
    #[serde(default)]
    nodes: Vec<PointSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanSection {
    radius: f64,
    kappa: Option<usize>,
    k0_override: Option<usize>,
    raster_resolution: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InfectionSection {
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
    delta: Option<f64>,
    max_steps: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NtbnSection {
    counts: Option<Vec<usize>>,
    strategy: Option<String>,
    manual_positions: Option<Vec<PointSpec>>,
}

/// How non-terrestrial node positions are chosen during the sweep.
#[derive(Clone, Debug, PartialEq)]
pub enum NtbnStrategy {
    /// Distance-weighted k-means over the planned APs.
    Weighted,
    /// First `m` positions from a fixed pool, already in metres.
    Manual(Vec<PlanarPoint>),
}

/// A fully resolved scenario: everything in planar metres, parameters
/// validated, seed and output directory settled.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub users: Vec<PlanarPoint>,
    pub terrestrial_bns: Vec<BackhaulNode>,
    pub plan_config: PlanConfig,
    pub infection_params: InfectionParams,
    pub ntbn_counts: Vec<usize>,
    pub ntbn_strategy: NtbnStrategy,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Projection reference when the input was geographic; planar outputs
    /// are mapped back through it.
    pub geo_reference: Option<GeoPoint>,
    /// Human-readable notes gathered while loading (dropped rows etc.).
    pub warnings: Vec<String>,
}

enum Mode {
    Geo,
    Planar,
}

fn classify(points: &[PointSpec], what: &str) -> Result<Option<Mode>, CliError> {
    let mut mode = None;
    for p in points {
        let this = match p {
            PointSpec::Geo { .. } => Mode::Geo,
            PointSpec::Planar { .. } => Mode::Planar,
        };
        match (&mode, &this) {
            (None, _) => mode = Some(this),
            (Some(Mode::Geo), Mode::Planar) | (Some(Mode::Planar), Mode::Geo) => {
                return Err(CliError::config(format!(
                    "{what}: cannot mix lat/lon and x/y coordinates"
                )));
            }
            _ => {}
        }
    }
    Ok(mode)
}

fn as_geo(points: &[PointSpec], what: &str) -> Result<Vec<GeoPoint>, CliError> {
    points
        .iter()
        .map(|p| match *p {
            PointSpec::Geo { lat, lon, weight } => {
                let point = GeoPoint::new(lat, lon, weight);
                if !point.is_valid() {
                    return Err(CliError::config(format!(
                        "{what}: invalid geographic point ({lat}, {lon}, weight {weight})"
                    )));
                }
                Ok(point)
            }
            PointSpec::Planar { .. } => Err(CliError::config(format!(
                "{what}: expected lat/lon coordinates"
            ))),
        })
        .collect()
}

fn as_planar(points: &[PointSpec], what: &str) -> Result<Vec<PlanarPoint>, CliError> {
    points
        .iter()
        .map(|p| match *p {
            PointSpec::Planar { x, y, weight } => {
                if !x.is_finite() || !y.is_finite() || !weight.is_finite() || weight < 0.0 {
                    return Err(CliError::config(format!(
                        "{what}: invalid planar point ({x}, {y}, weight {weight})"
                    )));
                }
                Ok(PlanarPoint::weighted(x, y, weight))
            }
            PointSpec::Geo { .. } => Err(CliError::config(format!(
                "{what}: expected x/y coordinates"
            ))),
        })
        .collect()
}

/// Unweighted centroid of geographic points, used as projection reference.
fn geo_centroid(points: &[GeoPoint]) -> GeoPoint {
    let n = points.len() as f64;
    let lat = points.iter().map(|p| p.lat).sum::<f64>() / n;
    let lon = points.iter().map(|p| p.lon).sum::<f64>() / n;
    GeoPoint::new(lat, lon, 1.0)
}

/// Loads and validates a scenario file. `seed` and `out` from the command
/// line take precedence over values in the file.
pub fn load_scenario(
    path: &Path,
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
) -> Result<Scenario, CliError> {
    let text = io_config(path, std::fs::read_to_string(path))?;
    let file: ScenarioFile = toml::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));

    let mut warnings = Vec::new();

    // --- population ---------------------------------------------------
    let pop = &file.population;
    let (mut geo_users, mut planar_users): (Vec<GeoPoint>, Vec<PlanarPoint>) =
        (Vec::new(), Vec::new());
    let users_mode = match (&pop.path, &pop.users) {
        (Some(_), Some(_)) => {
            return Err(CliError::config(
                "population: set either 'path' or inline 'users', not both",
            ));
        }
        (None, None) => {
            return Err(CliError::config(
                "population: one of 'path' or inline 'users' is required",
            ));
        }
        (Some(rel), None) => {
            let file_path = base_dir.join(rel);
            let format = Format::detect(pop.format.as_deref(), &file_path)?;
            let ingested = ingest_population(&file_path, format)?;
            if ingested.dropped > 0 {
                warnings.push(format!(
                    "dropped {} population row(s) with non-positive population",
                    ingested.dropped
                ));
            }
            geo_users = ingested.points;
            Mode::Geo
        }
        (None, Some(users)) => {
            let mode = classify(users, "population.users")?
                .ok_or_else(|| CliError::config("population.users: empty list"))?;
            match mode {
                Mode::Geo => geo_users = as_geo(users, "population.users")?,
                Mode::Planar => planar_users = as_planar(users, "population.users")?,
            }
            mode
        }
    };

    // Drop weightless inline users the same way file ingestion does.
    let drop_count = match users_mode {
        Mode::Geo => {
            let before = geo_users.len();
            geo_users.retain(|u| u.weight > 0.0);
            before - geo_users.len()
        }
        Mode::Planar => {
            let before = planar_users.len();
            planar_users.retain(|u| u.weight > 0.0);
            before - planar_users.len()
        }
    };
    if drop_count > 0 {
        warnings.push(format!(
            "dropped {drop_count} inline user(s) with non-positive weight"
        ));
    }

    // --- backhaul nodes -----------------------------------------------
    if file.backhaul.nodes.is_empty() {
        return Err(CliError::config(
            "backhaul: at least one terrestrial backhaul node is required",
        ));
    }

    // --- resolve coordinates into metres --------------------------------
    let manual_specs = file.ntbn.manual_positions.clone().unwrap_or_default();
    let (users, terrestrial_bns, manual_pool, geo_reference) = match users_mode {
        Mode::Geo => {
            if geo_users.is_empty() {
                return Err(CliError::config("population: no users left after filtering"));
            }
            let reference = geo_centroid(&geo_users);
            let users = project_to_plane(&geo_users, &reference);
            let bn_geo = as_geo(&file.backhaul.nodes, "backhaul.nodes")?;
            let bns = project_to_plane(&bn_geo, &reference)
                .into_iter()
                .map(|p| BackhaulNode::terrestrial(p.x, p.y))
                .collect();
            let pool_geo = as_geo(&manual_specs, "ntbn.manual_positions")?;
            let pool = project_to_plane(&pool_geo, &reference);
            (users, bns, pool, Some(reference))
        }
        Mode::Planar => {
            if planar_users.is_empty() {
                return Err(CliError::config("population: no users left after filtering"));
            }
            let bns = as_planar(&file.backhaul.nodes, "backhaul.nodes")?
                .into_iter()
                .map(|p| BackhaulNode::terrestrial(p.x, p.y))
                .collect();
            let pool = as_planar(&manual_specs, "ntbn.manual_positions")?;
            (planar_users, bns, pool, None)
        }
    };

    // --- parameters -----------------------------------------------------
    let seed = seed_override.or(file.seed).unwrap_or(0);
    let plan_config = PlanConfig {
        radius: file.plan.radius,
        kappa: file.plan.kappa.unwrap_or(ruralnet_core::ap_planner::DEFAULT_KAPPA),
        seed,
        k0_override: file.plan.k0_override,
        raster_resolution: file.plan.raster_resolution,
    };
    plan_config
        .validate()
        .map_err(|e| CliError::config(format!("plan: {e}")))?;

    let defaults = InfectionParams::default();
    let infection_params = InfectionParams {
        alpha: file.infection.alpha.unwrap_or(defaults.alpha),
        beta: file.infection.beta.unwrap_or(defaults.beta),
        gamma: file.infection.gamma.unwrap_or(defaults.gamma),
        delta: file.infection.delta.unwrap_or(defaults.delta),
        max_steps: file.infection.max_steps.unwrap_or(defaults.max_steps),
    };
    infection_params
        .validate()
        .map_err(|e| CliError::config(format!("infection: {e}")))?;

    // --- non-terrestrial sweep -------------------------------------------
    let ntbn_counts = file.ntbn.counts.unwrap_or_else(|| vec![0]);
    if ntbn_counts.is_empty() {
        return Err(CliError::config("ntbn.counts: must not be empty"));
    }
    if ntbn_counts.windows(2).any(|w| w[0] > w[1]) {
        return Err(CliError::config("ntbn.counts: must be non-decreasing"));
    }
    let strategy = match file.ntbn.strategy.as_deref() {
        None | Some("weighted-farthest-kmeans") => {
            if !manual_pool.is_empty() {
                return Err(CliError::config(
                    "ntbn.manual_positions: only meaningful with strategy = \"manual\"",
                ));
            }
            NtbnStrategy::Weighted
        }
        Some("manual") => {
            let max_m = ntbn_counts.iter().copied().max().unwrap_or(0);
            if manual_pool.len() < max_m {
                return Err(CliError::config(format!(
                    "ntbn.manual_positions: {} position(s) provided but counts go up to {max_m}",
                    manual_pool.len()
                )));
            }
            NtbnStrategy::Manual(manual_pool)
        }
        Some(other) => {
            return Err(CliError::config(format!(
                "ntbn.strategy: unknown strategy '{other}' (expected weighted-farthest-kmeans or manual)"
            )));
        }
    };

    let output_dir = out_override
        .or(file.output_dir)
        .ok_or_else(|| CliError::config("no output directory: pass --out or set output_dir"))?;

    Ok(Scenario {
        users,
        terrestrial_bns,
        plan_config,
        infection_params,
        ntbn_counts,
        ntbn_strategy: strategy,
        output_dir,
        seed,
        geo_reference,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_scenario(contents: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.toml");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        (dir, path)
    }

    const PLANAR_MINIMAL: &str = r#"
        output_dir = "out"

        [population]
        users = [ { x = 0.0, y = 0.0, weight = 5.0 }, { x = 100.0, y = 0.0 } ]

        [backhaul]
        nodes = [ { x = -50.0, y = 0.0 } ]

        [plan]
        radius = 80.0
    "#;

    #[test]
    fn minimal_planar_scenario_loads() {
        let (_dir, path) = write_scenario(PLANAR_MINIMAL);
        let s = load_scenario(&path, Some(7), None).unwrap();
        assert_eq!(s.users.len(), 2);
        assert_eq!(s.users[0].weight, 5.0);
        assert_eq!(s.users[1].weight, 1.0);
        assert_eq!(s.terrestrial_bns.len(), 1);
        assert_eq!(s.seed, 7);
        assert_eq!(s.plan_config.seed, 7);
        assert_eq!(s.ntbn_counts, vec![0]);
        assert!(s.geo_reference.is_none());
        assert_eq!(s.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn geographic_scenario_projects_to_meters() {
        let (_dir, path) = write_scenario(
            r#"
            output_dir = "out"
            seed = 3

            [population]
            users = [ { lat = 0.0, lon = 0.0 }, { lat = 0.0, lon = 1.0 } ]

            [backhaul]
            nodes = [ { lat = 0.0, lon = 0.5 } ]

            [plan]
            radius = 500.0
            "#,
        );
        let s = load_scenario(&path, None, None).unwrap();
        assert_eq!(s.seed, 3);
        let reference = s.geo_reference.unwrap();
        assert_eq!(reference.lat, 0.0);
        assert_eq!(reference.lon, 0.5);
        // One degree of longitude at the equator, centred on the reference.
        assert!((s.users[0].x + 55_660.0).abs() < 1.0);
        assert!((s.users[1].x - 55_660.0).abs() < 1.0);
        assert!(s.terrestrial_bns[0].x.abs() < 1e-9);
    }

    #[test]
    fn mixed_coordinate_modes_rejected() {
        let (_dir, path) = write_scenario(
            r#"
            output_dir = "out"

            [population]
            users = [ { x = 0.0, y = 0.0 }, { lat = 1.0, lon = 2.0 } ]

            [backhaul]
            nodes = [ { x = 0.0, y = 0.0 } ]

            [plan]
            radius = 100.0
            "#,
        );
        let err = load_scenario(&path, None, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("mix"));
    }

    #[test]
    fn bn_mode_must_match_users() {
        let (_dir, path) = write_scenario(
            r#"
            output_dir = "out"

            [population]
            users = [ { x = 0.0, y = 0.0 } ]

            [backhaul]
            nodes = [ { lat = 1.0, lon = 2.0 } ]

            [plan]
            radius = 100.0
            "#,
        );
        assert!(load_scenario(&path, None, None).is_err());
    }

    #[test]
    fn zero_backhaul_nodes_is_a_config_error() {
        let (_dir, path) = write_scenario(
            r#"
            output_dir = "out"

            [population]
            users = [ { x = 0.0, y = 0.0 } ]

            [backhaul]
            nodes = []

            [plan]
            radius = 100.0
            "#,
        );
        let err = load_scenario(&path, None, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let (_dir, path) = write_scenario(
            r#"
            output_dir = "out"
            radiuss = 3.0

            [population]
            users = [ { x = 0.0, y = 0.0 } ]

            [backhaul]
            nodes = [ { x = 0.0, y = 0.0 } ]

            [plan]
            radius = 100.0
            "#,
        );
        assert!(load_scenario(&path, None, None).is_err());
    }

    #[test]
    fn decreasing_ntbn_counts_rejected() {
        let (_dir, path) = write_scenario(
            r#"
            output_dir = "out"

            [population]
            users = [ { x = 0.0, y = 0.0 } ]

            [backhaul]
            nodes = [ { x = 5.0, y = 0.0 } ]

            [plan]
            radius = 100.0

            [ntbn]
            counts = [2, 1]
            "#,
        );
        assert!(load_scenario(&path, None, None).is_err());
    }

    #[test]
    fn manual_strategy_needs_enough_positions() {
        let (_dir, path) = write_scenario(
            r#"
            output_dir = "out"

            [population]
            users = [ { x = 0.0, y = 0.0 } ]

            [backhaul]
            nodes = [ { x = 5.0, y = 0.0 } ]

            [plan]
            radius = 100.0

            [ntbn]
            counts = [0, 2]
            strategy = "manual"
            manual_positions = [ { x = 1.0, y = 1.0 } ]
            "#,
        );
        let err = load_scenario(&path, None, None).unwrap_err();
        assert!(err.to_string().contains("counts go up to 2"));
    }

    #[test]
    fn inline_weightless_users_are_dropped_with_warning() {
        let (_dir, path) = write_scenario(
            r#"
            output_dir = "out"

            [population]
            users = [ { x = 0.0, y = 0.0, weight = 0.0 }, { x = 1.0, y = 1.0 } ]

            [backhaul]
            nodes = [ { x = 5.0, y = 0.0 } ]

            [plan]
            radius = 100.0
            "#,
        );
        let s = load_scenario(&path, None, None).unwrap();
        assert_eq!(s.users.len(), 1);
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn population_file_is_resolved_relative_to_scenario() {
        let (dir, path) = write_scenario(
            r#"
            output_dir = "out"

            [population]
            path = "pop.csv"

            [backhaul]
            nodes = [ { lat = -1.0, lon = 37.0 } ]

            [plan]
            radius = 500.0
            "#,
        );
        std::fs::write(
            dir.path().join("pop.csv"),
            "lat,lon,population\n-1.1,37.2,120\n-1.2,37.3,0\n",
        )
        .unwrap();
        let s = load_scenario(&path, None, None).unwrap();
        assert_eq!(s.users.len(), 1);
        assert_eq!(s.warnings.len(), 1);
        assert!(s.geo_reference.is_some());
    }

    #[test]
    fn missing_scenario_file_is_config_error() {
        let err = load_scenario(Path::new("/nonexistent/s.toml"), None, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
