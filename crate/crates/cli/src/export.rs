//! File writers for pipeline outputs: pretty JSON, Graphviz DOT, and the
//! per-step dynamics CSV. Everything goes through an atomic write (temp
//! file + rename) so a crash mid-run never leaves a half-written file, and
//! all formats are deterministic so identical runs produce identical bytes.

use std::io::Write;
use std::path::Path;

use ruralnet_core::{BackhaulGraph, DynamicsTrace, VertexKind};

use crate::error::CliError;

/// Writes `bytes` to `path` atomically via a sibling temp file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let to_config = |e: std::io::Error| CliError::config(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(to_config)?;
    }
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or_else(|| Path::new(".")))
        .map_err(to_config)?;
    tmp.write_all(bytes).map_err(to_config)?;
    tmp.persist(path)
        .map_err(|e| CliError::config(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

/// Serializes `value` as pretty JSON with a trailing newline and writes it.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn dot_attrs(kind: VertexKind) -> &'static str {
    match kind {
        VertexKind::Ap => "shape=circle",
        VertexKind::TerrestrialBn => "shape=box, style=filled, fillcolor=gray80",
        VertexKind::NonTerrestrialBn => "shape=diamond, style=filled, fillcolor=lightblue",
    }
}

/// Renders a backhaul graph in Graphviz DOT. Vertices carry positions in
/// kilometres (via the `pos` attribute) so `neato -n` reproduces the layout.
pub fn graph_to_dot(graph: &BackhaulGraph) -> String {
    let mut out = String::from("graph backhaul {\n");
    for v in &graph.vertices {
        out.push_str(&format!(
            "    v{} [{}, pos=\"{:.3},{:.3}!\"];\n",
            v.id,
            dot_attrs(v.kind),
            v.x / 1000.0,
            v.y / 1000.0,
        ));
    }
    for e in &graph.edges {
        out.push_str(&format!(
            "    v{} -- v{} [label=\"{:.1}\"];\n",
            e.from, e.to, e.length_m,
        ));
    }
    out.push_str("}\n");
    out
}

/// Writes the growth history as CSV with columns
/// `step,vertex_id,radius,speed,infected_flag`.
pub fn write_dynamics_csv(path: &Path, trace: &DynamicsTrace) -> Result<(), CliError> {
    let to_config = |e: csv::Error| CliError::config(format!("{}: {e}", path.display()));
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["step", "vertex_id", "radius", "speed", "infected_flag"])
        .map_err(to_config)?;
    for r in &trace.records {
        writer
            .write_record([
                r.step.to_string(),
                r.vertex.to_string(),
                r.radius.to_string(),
                r.speed.to_string(),
                u8::from(r.infected).to_string(),
            ])
            .map_err(to_config)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    write_atomic(path, &bytes)
}
