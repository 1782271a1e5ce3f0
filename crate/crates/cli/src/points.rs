//! Point-cloud CSV input and coordinate signals.

use std::path::Path;

use anyhow::{bail, Context, Result};

/// Reads one point per row. A first row that does not parse as numbers is
/// taken as a header. All rows must have the same number of columns.
pub fn load_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: reading row {}", path.display(), i + 1))?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(p) => {
                if p.iter().any(|x| !x.is_finite()) {
                    bail!("{}: row {} has a non-finite coordinate", path.display(), i + 1);
                }
                if let Some(first) = points.first() {
                    if first.len() != p.len() {
                        bail!("{}: row {} has {} columns, expected {}", path.display(), i + 1, p.len(), first.len());
                    }
                }
                points.push(p);
            }
            Err(_) if i == 0 => continue,
            Err(e) => bail!("{}: row {}: {e}", path.display(), i + 1),
        }
    }
    if points.is_empty() {
        bail!("{}: no points", path.display());
    }
    Ok(points)
}

/// Column index for `x`, `y`, `z` or a literal index.
pub fn coordinate_index(name: &str) -> Option<usize> {
    match name {
        "x" | "X" => Some(0),
        "y" | "Y" => Some(1),
        "z" | "Z" => Some(2),
        other => other.parse().ok(),
    }
}

/// Affine map of `values` onto `[-1, 1]` (min to -1, max to 1).
pub fn rescale_unit(values: &[f64]) -> Option<Vec<f64>> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return None;
    }
    let mut out: Vec<f64> = values.iter().map(|v| 2.0 * (v - lo) / (hi - lo) - 1.0).collect();
    for (o, v) in out.iter_mut().zip(values) {
        if *v == lo {
            *o = -1.0;
        } else if *v == hi {
            *o = 1.0;
        }
    }
    Some(out)
}
