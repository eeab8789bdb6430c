//! Deterministic result emission.
//!
//! Every run produces a machine-readable artifact plus a one-line summary
//! on stdout. CSV cells carry 17 significant digits; JSON documents follow
//! the stable `{meta, data, checks}` layout with alphabetically ordered
//! keys, so identical configurations produce identical bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Map, Value};

use fracdiff_core::{ScalarSeq, VecSeq};

/// Fixed float formatting: 17 significant digits, scientific.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One verified identity with its measured deviation.
#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckEntry {
    pub fn new(name: &str, measured: f64, tolerance: f64) -> Self {
        CheckEntry {
            name: name.to_string(),
            measured,
            tolerance,
            passed: measured.is_finite() && measured <= tolerance,
        }
    }

    /// A boolean condition reported in the same shape (measured is 0/1
    /// against tolerance 0.5).
    pub fn flag(name: &str, ok: bool) -> Self {
        CheckEntry { name: name.to_string(), measured: if ok { 0.0 } else { 1.0 }, tolerance: 0.5, passed: ok }
    }
}

/// Writes a CSV table; the first column is the index.
pub fn write_csv(path: &Path, header: &[&str], rows: &[(usize, Vec<f64>)]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for (n, row) in rows {
        out.push_str(&n.to_string());
        for v in row {
            out.push(',');
            out.push_str(&format_float(*v));
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn scalar_rows(u: &ScalarSeq) -> Vec<(usize, Vec<f64>)> {
    u.values().iter().enumerate().map(|(n, &v)| (n, vec![v])).collect()
}

pub fn vecseq_rows(u: &VecSeq) -> Vec<(usize, Vec<f64>)> {
    (0..=u.horizon()).map(|n| (n, u.state(n).to_vec())).collect()
}

pub fn vecseq_header(dim: usize) -> Vec<String> {
    let mut h = vec!["n".to_string()];
    h.extend((0..dim).map(|c| format!("component_{c}")));
    h
}

/// Reads a solution/sequence CSV back (index column plus components).
pub fn read_csv_vecseq(path: &Path) -> Result<VecSeq> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().context("empty csv")?;
    let dim = header.split(',').count() - 1;
    let mut data = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let _n = fields.next().context("missing index column")?;
        let mut count = 0;
        for f in fields {
            data.push(f.trim().parse::<f64>().with_context(|| format!("row {i}"))?);
            count += 1;
        }
        anyhow::ensure!(count == dim, "row {i} has {count} components, expected {dim}");
    }
    Ok(VecSeq::from_flat(dim, data)?)
}

/// Assembles the stable top-level document.
pub fn document(meta: Value, data: Value, checks: &[CheckEntry]) -> Value {
    json!({
        "meta": meta,
        "data": data,
        "checks": checks,
    })
}

/// Serializes with sorted keys and a trailing newline.
pub fn write_json(path: &Path, doc: &Value) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(doc)?;
    bytes.push(b'\n');
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Prints the per-run summary line and returns whether every check passed.
pub fn summarize(command: &str, artifact: &Path, checks: &[CheckEntry]) -> bool {
    let passed = checks.iter().filter(|c| c.passed).count();
    let ok = passed == checks.len();
    let mut line = format!(
        "{command}: wrote {} ({} of {} checks passed)",
        artifact.display(),
        passed,
        checks.len()
    );
    if checks.is_empty() {
        line = format!("{command}: wrote {}", artifact.display());
    }
    println!("{line}");
    let mut stdout = std::io::stdout();
    let _ = stdout.flush();
    ok
}

/// Meta block shared by all commands.
pub fn meta(command: &str, params: Value) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), Value::String(command.into()));
    m.insert("params".into(), params);
    m.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
    Value::Object(m)
}
