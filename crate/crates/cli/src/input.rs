//! Input loading: matrices from JSON or CSV, algebra presentations, states,
//! quantum spaces, and measures. All load failures map to exit code 2.

use std::path::Path;
use std::sync::Arc;

use ncg_core::convalg::BlockMeasure;
use ncg_core::qspace::FiniteQuantumSpace;
use ncg_core::states::{AlgebraPresentation, State};
use ncg_core::{Complex64, ComplexMatrix, Error, Tolerances};

use crate::Failure;

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))
}

/// Matrix JSON `{"dim": n, "entries": [[re, im], ...]}`, or CSV with n rows
/// of 2n interleaved re,im columns when the extension is `.csv`.
pub fn read_matrix(path: &Path) -> Result<ComplexMatrix, Failure> {
    let text = read_text(path)?;
    if path.extension().map(|e| e == "csv").unwrap_or(false) {
        parse_matrix_csv(&text).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
    } else {
        serde_json::from_str(&text).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
    }
}

fn parse_matrix_csv(text: &str) -> Result<ComplexMatrix, Error> {
    let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let n = rows.len();
    let mut entries = Vec::with_capacity(n * n);
    for row in &rows {
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() != 2 * n {
            return Err(Error::Parse(format!(
                "expected {} columns for {n} rows, got {}",
                2 * n,
                fields.len()
            )));
        }
        for pair in fields.chunks(2) {
            let re: f64 = pair[0]
                .parse()
                .map_err(|_| Error::Parse(format!("bad float {:?}", pair[0])))?;
            let im: f64 = pair[1]
                .parse()
                .map_err(|_| Error::Parse(format!("bad float {:?}", pair[1])))?;
            entries.push(Complex64::new(re, im));
        }
    }
    ComplexMatrix::new(n, entries)
}

/// Algebra JSON: `{"ambient_dim": n, "generators": [<matrix JSON>, ...]}`.
pub fn read_algebra(path: &Path, tol: &Tolerances) -> Result<Arc<AlgebraPresentation>, Failure> {
    #[derive(serde::Deserialize)]
    struct Raw {
        ambient_dim: usize,
        generators: Vec<ComplexMatrix>,
    }
    let text = read_text(path)?;
    let raw: Raw = serde_json::from_str(&text)
        .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    let algebra = AlgebraPresentation::generate(raw.ambient_dim, &raw.generators, *tol)
        .map_err(Failure::from)?;
    Ok(Arc::new(algebra))
}

/// State JSON: `{"density": <matrix JSON>}`, a list of such objects, or
/// `{"states": [...]}`.
pub fn read_states(path: &Path, algebra: &Arc<AlgebraPresentation>) -> Result<Vec<State>, Failure> {
    let text = read_text(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    let entries: Vec<serde_json::Value> = match value {
        serde_json::Value::Array(list) => list,
        serde_json::Value::Object(mut obj) => match obj.remove("states") {
            Some(serde_json::Value::Array(list)) => list,
            Some(_) => {
                return Err(Failure::parse(format!(
                    "{}: \"states\" must be an array",
                    path.display()
                )))
            }
            None => vec![serde_json::Value::Object(obj)],
        },
        _ => {
            return Err(Failure::parse(format!(
                "{}: expected a state object or list",
                path.display()
            )))
        }
    };
    let densities: Vec<ComplexMatrix> = entries
        .into_iter()
        .map(|entry| {
            let density = entry.get("density").cloned().ok_or_else(|| {
                Failure::parse(format!("{}: state lacks \"density\"", path.display()))
            })?;
            serde_json::from_value(density)
                .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
        })
        .collect::<Result<_, Failure>>()?;
    if densities.is_empty() {
        return Err(Failure::parse(format!(
            "{}: no states in file",
            path.display()
        )));
    }
    densities
        .into_iter()
        .map(|d| State::new(algebra.clone(), d).map_err(Failure::from))
        .collect()
}

/// Quantum-space JSON: `{"points": [...], "classes": {...}}`.
pub fn read_space(path: &Path) -> Result<FiniteQuantumSpace, Failure> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

/// Measures file: a JSON array whose entries are either full measure objects
/// (their embedded space must match the given one) or bare
/// `{"weights": [...]}` objects interpreted over the given space.
pub fn read_measures(
    path: &Path,
    space: &FiniteQuantumSpace,
) -> Result<Vec<BlockMeasure>, Failure> {
    let text = read_text(path)?;
    let raw: Vec<serde_json::Value> = serde_json::from_str(&text)
        .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    let mut measures = Vec::with_capacity(raw.len());
    for entry in raw {
        let value = if entry.get("space").is_some() {
            entry
        } else {
            let mut wrapped = serde_json::Map::new();
            wrapped.insert(
                "space".to_string(),
                serde_json::json!({
                    "points": space.points(),
                    "classes": space.assignments(),
                }),
            );
            wrapped.insert(
                "weights".to_string(),
                entry
                    .get("weights")
                    .cloned()
                    .ok_or_else(|| Failure::parse("measure entry lacks \"weights\""))?,
            );
            serde_json::Value::Object(wrapped)
        };
        let measure: BlockMeasure = serde_json::from_value(value)
            .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
        if measure.space() != space {
            return Err(Failure::from(Error::SpaceMismatch(
                "measure is defined over a different space".into(),
            )));
        }
        measures.push(measure);
    }
    Ok(measures)
}
