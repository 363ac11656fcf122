//! GeoJSON serialization for access-point sets and backhaul graphs.
//!
//! The files are hand-assembled through `serde_json` so the member order
//! and numeric formatting stay byte-stable across runs. Scenarios defined
//! in planar metres are written with `"coordinate_mode": "planar"` and the
//! raw x/y values as coordinates; geographic scenarios are de-projected
//! back to lon/lat degrees.

use ruralnet_core::geometry::plane_to_geo;
use ruralnet_core::{ApSet, BackhaulGraph, GeoPoint, GraphEdge, GraphVertex, VertexKind};
use serde_json::{json, Map, Value};

use crate::error::CliError;

/// Converts a planar position to GeoJSON `[x, y]` coordinates, de-projecting
/// to `[lon, lat]` when a geographic reference is present.
fn coords(x: f64, y: f64, reference: Option<&GeoPoint>) -> Value {
    match reference {
        Some(r) => {
            let (lat, lon) = plane_to_geo(x, y, r);
            json!([lon, lat])
        }
        None => json!([x, y]),
    }
}

fn coordinate_mode(reference: Option<&GeoPoint>) -> &'static str {
    if reference.is_some() {
        "geographic"
    } else {
        "planar"
    }
}

fn feature(geometry: Value, properties: Value) -> Value {
    json!({
        "type": "Feature",
        "geometry": geometry,
        "properties": properties,
    })
}

fn collection(features: Vec<Value>, reference: Option<&GeoPoint>) -> Value {
    json!({
        "type": "FeatureCollection",
        "coordinate_mode": coordinate_mode(reference),
        "features": features,
    })
}

/// Renders planned access points as a FeatureCollection of points. Each
/// feature carries a `population` of 1.0 so the file itself is a valid
/// population input.
pub fn aps_to_geojson(aps: &ApSet, reference: Option<&GeoPoint>) -> Value {
    let features = aps
        .centers
        .iter()
        .enumerate()
        .map(|(id, c)| {
            feature(
                json!({"type": "Point", "coordinates": coords(c.x, c.y, reference)}),
                json!({"id": id, "kind": "ap", "population": 1.0, "radius_m": aps.radius}),
            )
        })
        .collect();
    collection(features, reference)
}

/// Renders a backhaul graph: one point feature per vertex, one line feature
/// per edge. Edge features carry both the planar length and the length in
/// metres.
pub fn graph_to_geojson(graph: &BackhaulGraph, reference: Option<&GeoPoint>) -> Value {
    let mut features = Vec::with_capacity(graph.vertices.len() + graph.edges.len());
    for v in &graph.vertices {
        let kind = serde_json::to_value(v.kind).expect("vertex kind serializes");
        features.push(feature(
            json!({"type": "Point", "coordinates": coords(v.x, v.y, reference)}),
            json!({"id": v.id, "kind": kind}),
        ));
    }
    for e in &graph.edges {
        let from = &graph.vertices[e.from];
        let to = &graph.vertices[e.to];
        features.push(feature(
            json!({"type": "LineString", "coordinates": [
                coords(from.x, from.y, reference),
                coords(to.x, to.y, reference),
            ]}),
            json!({"from": e.from, "to": e.to, "length": e.length, "length_m": e.length_m}),
        ));
    }
    collection(features, reference)
}

fn get_f64(value: &Value, what: &str) -> Result<f64, CliError> {
    value
        .as_f64()
        .ok_or_else(|| CliError::config(format!("{what}: expected a number")))
}

fn get_usize(props: &Map<String, Value>, key: &str, what: &str) -> Result<usize, CliError> {
    props
        .get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| CliError::config(format!("{what}: missing or invalid '{key}'")))
}

/// Parses a graph GeoJSON file back into a [`BackhaulGraph`]. Geographic
/// files are re-projected onto a local plane around the stated reference
/// so the vertex coordinates come back in metres.
pub fn graph_from_geojson(value: &Value) -> Result<BackhaulGraph, CliError> {
    let features = value
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::config("graph file: missing 'features' array"))?;
    let geographic = match value.get("coordinate_mode").and_then(Value::as_str) {
        Some("geographic") => true,
        Some("planar") => false,
        Some(other) => {
            return Err(CliError::config(format!(
                "graph file: unknown coordinate_mode '{other}'"
            )));
        }
        None => false,
    };

    struct RawVertex {
        id: usize,
        lonx: f64,
        laty: f64,
        kind: VertexKind,
    }
    let mut raw_vertices = Vec::new();
    let mut raw_edges = Vec::new();

    for (index, f) in features.iter().enumerate() {
        let what = format!("graph file: feature {index}");
        let geometry = f
            .get("geometry")
            .ok_or_else(|| CliError::config(format!("{what}: missing geometry")))?;
        let props = f
            .get("properties")
            .and_then(Value::as_object)
            .ok_or_else(|| CliError::config(format!("{what}: missing properties")))?;
        let coords = geometry
            .get("coordinates")
            .and_then(Value::as_array)
            .ok_or_else(|| CliError::config(format!("{what}: missing coordinates")))?;
        match geometry.get("type").and_then(Value::as_str) {
            Some("Point") => {
                if coords.len() != 2 {
                    return Err(CliError::config(format!("{what}: malformed point")));
                }
                let kind: VertexKind = props
                    .get("kind")
                    .and_then(|k| serde_json::from_value(k.clone()).ok())
                    .ok_or_else(|| CliError::config(format!("{what}: missing or invalid 'kind'")))?;
                raw_vertices.push(RawVertex {
                    id: get_usize(props, "id", &what)?,
                    lonx: get_f64(&coords[0], &what)?,
                    laty: get_f64(&coords[1], &what)?,
                    kind,
                });
            }
            Some("LineString") => {
                let length_m = props
                    .get("length_m")
                    .map(|v| get_f64(v, &what))
                    .transpose()?;
                let length = props.get("length").map(|v| get_f64(v, &what)).transpose()?;
                raw_edges.push(GraphEdge {
                    from: get_usize(props, "from", &what)?,
                    to: get_usize(props, "to", &what)?,
                    length: length.or(length_m).unwrap_or(0.0),
                    length_m: length_m.or(length).unwrap_or(0.0),
                });
            }
            _ => {
                return Err(CliError::config(format!(
                    "{what}: expected Point or LineString geometry"
                )));
            }
        }
    }

    raw_vertices.sort_by_key(|v| v.id);
    for (expected, v) in raw_vertices.iter().enumerate() {
        if v.id != expected {
            return Err(CliError::config(format!(
                "graph file: vertex ids must be contiguous from 0 (found {} at position {expected})",
                v.id
            )));
        }
    }

    // Geographic vertices come back as lon/lat; re-project around their
    // unweighted centroid to recover planar metres for analysis.
    let vertices: Vec<GraphVertex> = if geographic && !raw_vertices.is_empty() {
        let n = raw_vertices.len() as f64;
        let lat0 = raw_vertices.iter().map(|v| v.laty).sum::<f64>() / n;
        let lon0 = raw_vertices.iter().map(|v| v.lonx).sum::<f64>() / n;
        let reference = GeoPoint::new(lat0, lon0, 1.0);
        let geo: Vec<GeoPoint> = raw_vertices
            .iter()
            .map(|v| GeoPoint::new(v.laty, v.lonx, 1.0))
            .collect();
        let planar = ruralnet_core::geometry::project_to_plane(&geo, &reference);
        raw_vertices
            .iter()
            .zip(planar)
            .map(|(v, p)| GraphVertex {
                id: v.id,
                x: p.x,
                y: p.y,
                kind: v.kind,
            })
            .collect()
    } else {
        raw_vertices
            .iter()
            .map(|v| GraphVertex {
                id: v.id,
                x: v.lonx,
                y: v.laty,
                kind: v.kind,
            })
            .collect()
    };

    for e in &raw_edges {
        if e.from >= vertices.len() || e.to >= vertices.len() {
            return Err(CliError::config(format!(
                "graph file: edge ({}, {}) references a missing vertex",
                e.from, e.to
            )));
        }
    }

    Ok(BackhaulGraph {
        vertices,
        edges: raw_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ruralnet_core::{ApSet, BackhaulNode, InfectionParams, PlanarPoint};

    fn sample_graph() -> BackhaulGraph {
        let bns = vec![BackhaulNode::terrestrial(0.0, 0.0)];
        let aps = ApSet::new(
            vec![
                PlanarPoint::new(30.0, 0.0),
                PlanarPoint::new(0.0, 45.0),
                PlanarPoint::new(60.0, 10.0),
            ],
            25.0,
        )
        .unwrap();
        let params = InfectionParams {
            gamma: 0.0,
            delta: 1.0,
            ..InfectionParams::default()
        };
        ruralnet_core::run_infection(&aps, &bns, &params).unwrap().0
    }

    #[test]
    fn ap_collection_shape() {
        let aps = ApSet::new(vec![PlanarPoint::new(1.0, 2.0)], 10.0).unwrap();
        let v = aps_to_geojson(&aps, None);
        assert_eq!(v["type"], "FeatureCollection");
        assert_eq!(v["coordinate_mode"], "planar");
        assert_eq!(v["features"][0]["geometry"]["coordinates"], json!([1.0, 2.0]));
        assert_eq!(v["features"][0]["properties"]["kind"], "ap");
        assert_eq!(v["features"][0]["properties"]["population"], 1.0);
    }

    #[test]
    fn planar_graph_round_trips_exactly() {
        let graph = sample_graph();
        let v = graph_to_geojson(&graph, None);
        let back = graph_from_geojson(&v).unwrap();
        assert_eq!(back.vertices.len(), graph.vertices.len());
        assert_eq!(back.edges.len(), graph.edges.len());
        for (a, b) in graph.vertices.iter().zip(&back.vertices) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.kind, b.kind);
            assert_eq!(a.x, b.x);
            assert_eq!(a.y, b.y);
        }
        for (a, b) in graph.edges.iter().zip(&back.edges) {
            assert_eq!((a.from, a.to), (b.from, b.to));
            assert_eq!(a.length_m, b.length_m);
        }
    }

    #[test]
    fn geographic_graph_round_trips_within_tolerance() {
        let graph = sample_graph();
        let reference = GeoPoint::new(-1.5, 36.9, 1.0);
        let v = graph_to_geojson(&graph, Some(&reference));
        assert_eq!(v["coordinate_mode"], "geographic");
        let back = graph_from_geojson(&v).unwrap();
        // Recovered planar coordinates are relative to a different local
        // origin (and a very slightly different latitude scale), so compare
        // pairwise distances instead of raw positions.
        for i in 0..graph.vertices.len() {
            for j in (i + 1)..graph.vertices.len() {
                let (a1, a2) = (&graph.vertices[i], &graph.vertices[j]);
                let (b1, b2) = (&back.vertices[i], &back.vertices[j]);
                let da = ((a1.x - a2.x).powi(2) + (a1.y - a2.y).powi(2)).sqrt();
                let db = ((b1.x - b2.x).powi(2) + (b1.y - b2.y).powi(2)).sqrt();
                assert!((da - db).abs() < 1e-3, "distance {i}-{j}: {da} vs {db}");
            }
        }
    }

    #[test]
    fn vertex_kinds_survive_round_trip() {
        let v = json!({
            "type": "FeatureCollection",
            "coordinate_mode": "planar",
            "features": [
                {"type": "Feature",
                 "geometry": {"type": "Point", "coordinates": [0.0, 0.0]},
                 "properties": {"id": 0, "kind": "terrestrial-bn"}},
                {"type": "Feature",
                 "geometry": {"type": "Point", "coordinates": [5.0, 0.0]},
                 "properties": {"id": 1, "kind": "non-terrestrial-bn"}},
                {"type": "Feature",
                 "geometry": {"type": "Point", "coordinates": [9.0, 0.0]},
                 "properties": {"id": 2, "kind": "ap"}},
            ],
        });
        let g = graph_from_geojson(&v).unwrap();
        assert_eq!(g.vertices[0].kind, VertexKind::TerrestrialBn);
        assert_eq!(g.vertices[1].kind, VertexKind::NonTerrestrialBn);
        assert_eq!(g.vertices[2].kind, VertexKind::Ap);
        assert_eq!(g.bn_count(), 2);
    }

    #[test]
    fn non_contiguous_vertex_ids_rejected() {
        let v = json!({
            "type": "FeatureCollection",
            "features": [
                {"type": "Feature",
                 "geometry": {"type": "Point", "coordinates": [0.0, 0.0]},
                 "properties": {"id": 1, "kind": "ap"}},
            ],
        });
        assert!(graph_from_geojson(&v).is_err());
    }

    #[test]
    fn dangling_edge_rejected() {
        let v = json!({
            "type": "FeatureCollection",
            "features": [
                {"type": "Feature",
                 "geometry": {"type": "Point", "coordinates": [0.0, 0.0]},
                 "properties": {"id": 0, "kind": "terrestrial-bn"}},
                {"type": "Feature",
                 "geometry": {"type": "LineString",
                              "coordinates": [[0.0, 0.0], [1.0, 1.0]]},
                 "properties": {"from": 0, "to": 7, "length": 1.0, "length_m": 1.0}},
            ],
        });
        assert!(graph_from_geojson(&v).is_err());
    }
}
