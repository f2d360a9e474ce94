//! JSON documents exchanged through files: problem instances and
//! witnesses.  Unknown fields are ignored so documents may carry
//! annotations.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::decision::Witness;
use crate::error::{Error, Result};
use crate::matrix::{StochasticMatrix, Tolerances};
use crate::matrix_set::MatrixSet;

#[derive(Debug, Serialize, Deserialize)]
struct MatrixDoc {
    name: String,
    rows: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceDoc {
    n: usize,
    clusters: Vec<Vec<usize>>,
    matrices: Vec<MatrixDoc>,
    #[serde(default)]
    tolerances: Option<Tolerances>,
}

/// Parses an instance document:
/// `{"n", "clusters", "matrices": [{"name", "rows"}], "tolerances"?}`.
pub fn parse_set(json: &str) -> Result<MatrixSet> {
    let doc: InstanceDoc = serde_json::from_str(json).map_err(|e| Error::Parse {
        context: "instance document".to_string(),
        detail: e.to_string(),
    })?;
    let tol = doc.tolerances.unwrap_or_default();
    tol.validate()?;
    let clustering = Clustering::new(doc.n, doc.clusters)?;
    let matrices = doc
        .matrices
        .into_iter()
        .map(|m| StochasticMatrix::from_rows(m.name, m.rows, tol))
        .collect::<Result<Vec<_>>>()?;
    MatrixSet::new(matrices, clustering)
}

pub fn set_to_json(set: &MatrixSet) -> String {
    let doc = InstanceDoc {
        n: set.n(),
        clusters: (0..set.clustering().k())
            .map(|k| set.clustering().members(k).to_vec())
            .collect(),
        matrices: set
            .matrices()
            .iter()
            .map(|p| MatrixDoc {
                name: p.name().to_string(),
                rows: (0..p.n()).map(|i| p.row(i).to_vec()).collect(),
            })
            .collect(),
        tolerances: Some(set.tol()),
    };
    serde_json::to_string_pretty(&doc).expect("instance serialization cannot fail")
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| io_error(path, e))
}

pub fn load_set(path: &Path) -> Result<MatrixSet> {
    parse_set(&read_text(path)?)
}

pub fn load_witness(path: &Path) -> Result<Witness> {
    Witness::from_json(&read_text(path)?)
}

pub fn save_witness(path: &Path, witness: &Witness) -> Result<()> {
    write_text(path, &witness.to_json())
}

#[cfg(test)]
mod tests {
    use super::*;

    const INSTANCE: &str = r#"{
        "n": 2,
        "clusters": [[0, 1]],
        "matrices": [
            {"name": "avg", "rows": [[0.5, 0.5], [0.5, 0.5]]}
        ]
    }"#;

    #[test]
    fn parses_a_minimal_instance() {
        let set = parse_set(INSTANCE).unwrap();
        assert_eq!(set.n(), 2);
        assert_eq!(set.names(), vec!["avg"]);
        assert_eq!(set.tol(), Tolerances::default());
    }

    #[test]
    fn unknown_fields_are_ignored() {
        let json = r#"{
            "n": 1,
            "clusters": [[0]],
            "matrices": [{"name": "one", "rows": [[1.0]], "comment": "x"}],
            "description": "annotated"
        }"#;
        assert!(parse_set(json).is_ok());
    }

    #[test]
    fn partial_tolerances_fall_back_to_defaults() {
        let json = r#"{
            "n": 1,
            "clusters": [[0]],
            "matrices": [{"name": "one", "rows": [[1.0]]}],
            "tolerances": {"row_sum_tol": 1e-8}
        }"#;
        let set = parse_set(json).unwrap();
        assert_eq!(set.tol().row_sum_tol, 1e-8);
        assert_eq!(set.tol().zero_tol, Tolerances::default().zero_tol);
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(
            parse_set("{"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn validation_errors_surface_from_parsing() {
        let json = r#"{
            "n": 2,
            "clusters": [[0, 1]],
            "matrices": [{"name": "bad", "rows": [[0.5, 0.4], [0.5, 0.5]]}]
        }"#;
        assert!(matches!(
            parse_set(json),
            Err(Error::RowSumViolation { .. })
        ));
    }

    #[test]
    fn instance_round_trip() {
        let set = parse_set(INSTANCE).unwrap();
        let json = set_to_json(&set);
        let back = parse_set(&json).unwrap();
        assert_eq!(back.n(), set.n());
        assert_eq!(back.names(), set.names());
        assert_eq!(back.get(0).rows(), set.get(0).rows());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("instance.json");
        write_text(&path, INSTANCE).unwrap();
        let set = load_set(&path).unwrap();
        assert_eq!(set.n(), 2);
        let missing = dir.path().join("absent.json");
        assert!(matches!(load_set(&missing), Err(Error::Io { .. })));
    }
}
