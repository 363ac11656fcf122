//! Population readers: CSV (`lat,lon,population` with a header) and GeoJSON
//! Point collections carrying a `population` property. Rows or features
//! with zero or negative population are dropped and counted so callers can
//! warn about them.

use std::path::Path;

use ruralnet_core::GeoPoint;
use serde_json::Value;

use crate::error::{io_config, CliError};

/// Outcome of reading a population file.
#[derive(Clone, Debug)]
pub struct Ingested {
    pub points: Vec<GeoPoint>,
    /// Rows/features discarded for non-positive population.
    pub dropped: usize,
}

/// Supported population file formats.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    GeoJson,
}

impl Format {
    /// Parses a format name, or guesses from the file extension.
    pub fn detect(name: Option<&str>, path: &Path) -> Result<Format, CliError> {
        if let Some(name) = name {
            return match name.to_ascii_lowercase().as_str() {
                "csv" => Ok(Format::Csv),
                "geojson" | "json" => Ok(Format::GeoJson),
                other => Err(CliError::config(format!(
                    "unknown population format '{other}' (expected csv or geojson)"
                ))),
            };
        }
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
            Some(ext) if ext == "csv" => Ok(Format::Csv),
            Some(ext) if ext == "geojson" || ext == "json" => Ok(Format::GeoJson),
            _ => Err(CliError::config(format!(
                "cannot infer population format from '{}'; set population.format",
                path.display()
            ))),
        }
    }
}

/// Reads a population file in the given format.
pub fn ingest_population(path: &Path, format: Format) -> Result<Ingested, CliError> {
    let ingested = match format {
        Format::Csv => ingest_csv(path)?,
        Format::GeoJson => ingest_geojson(path)?,
    };
    if ingested.points.is_empty() {
        return Err(CliError::config(format!(
            "{}: no rows with positive population",
            path.display()
        )));
    }
    Ok(ingested)
}

fn ingest_csv(path: &Path) -> Result<Ingested, CliError> {
    let mut reader = io_config(
        path,
        csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(std::io::Error::other),
    )?;

    let headers = reader
        .headers()
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                CliError::config(format!(
                    "{}: missing required column '{name}' (header must include lat, lon, population)",
                    path.display()
                ))
            })
    };
    let (lat_col, lon_col, pop_col) = (column("lat")?, column("lon")?, column("population")?);

    let mut points = Vec::new();
    let mut dropped = 0;
    for record in reader.records() {
        let record =
            record.map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |col: usize, name: &str| -> Result<f64, CliError> {
            record
                .get(col)
                .ok_or_else(|| {
                    CliError::config(format!(
                        "{}: line {line}: missing {name} value",
                        path.display()
                    ))
                })?
                .parse::<f64>()
                .map_err(|_| {
                    CliError::config(format!(
                        "{}: line {line}: invalid {name} value '{}'",
                        path.display(),
                        record.get(col).unwrap_or("")
                    ))
                })
        };
        let point = GeoPoint::new(field(lat_col, "lat")?, field(lon_col, "lon")?, field(pop_col, "population")?);
        if !point.lat.is_finite() || !(-90.0..=90.0).contains(&point.lat) {
            return Err(CliError::config(format!(
                "{}: line {line}: latitude {} out of range",
                path.display(),
                point.lat
            )));
        }
        if !point.lon.is_finite() || !(-180.0..=180.0).contains(&point.lon) {
            return Err(CliError::config(format!(
                "{}: line {line}: longitude {} out of range",
                path.display(),
                point.lon
            )));
        }
        if !point.weight.is_finite() {
            return Err(CliError::config(format!(
                "{}: line {line}: population must be finite",
                path.display()
            )));
        }
        if point.weight <= 0.0 {
            dropped += 1;
            continue;
        }
        points.push(point);
    }
    Ok(Ingested { points, dropped })
}

fn ingest_geojson(path: &Path) -> Result<Ingested, CliError> {
    let text = io_config(path, std::fs::read_to_string(path))?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: invalid JSON: {e}", path.display())))?;

    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(CliError::config(format!(
            "{}: expected a GeoJSON FeatureCollection",
            path.display()
        )));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| {
            CliError::config(format!("{}: missing 'features' array", path.display()))
        })?;

    let mut points = Vec::new();
    let mut dropped = 0;
    for (index, feature) in features.iter().enumerate() {
        let geometry = feature.get("geometry").ok_or_else(|| {
            CliError::config(format!(
                "{}: feature {index}: missing geometry",
                path.display()
            ))
        })?;
        let geom_type = geometry.get("type").and_then(Value::as_str).unwrap_or("");
        if geom_type != "Point" {
            return Err(CliError::config(format!(
                "{}: feature {index}: expected Point geometry, found '{geom_type}'",
                path.display()
            )));
        }
        let coords = geometry
            .get("coordinates")
            .and_then(Value::as_array)
            .filter(|c| c.len() >= 2)
            .ok_or_else(|| {
                CliError::config(format!(
                    "{}: feature {index}: malformed Point coordinates",
                    path.display()
                ))
            })?;
        let lon = coords[0].as_f64().ok_or_else(|| {
            CliError::config(format!(
                "{}: feature {index}: non-numeric longitude",
                path.display()
            ))
        })?;
        let lat = coords[1].as_f64().ok_or_else(|| {
            CliError::config(format!(
                "{}: feature {index}: non-numeric latitude",
                path.display()
            ))
        })?;
        let population = feature
            .get("properties")
            .and_then(|p| p.get("population"))
            .and_then(Value::as_f64)
            .ok_or_else(|| {
                CliError::config(format!(
                    "{}: feature {index}: missing numeric 'population' property",
                    path.display()
                ))
            })?;
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(CliError::config(format!(
                "{}: feature {index}: coordinates out of range",
                path.display()
            )));
        }
        if !population.is_finite() {
            return Err(CliError::config(format!(
                "{}: feature {index}: population must be finite",
                path.display()
            )));
        }
        if population <= 0.0 {
            dropped += 1;
            continue;
        }
        points.push(GeoPoint::new(lat, lon, population));
    }
    Ok(Ingested { points, dropped })
}
