//! Model file format, report serialization, and run configuration.
//!
//! Models are stored as JSON with complex amplitudes written as `[re, im]`
//! pairs. Loading validates every domain invariant and reports the failing
//! field; parse errors carry serde's line/column diagnostics. Saving uses
//! shortest-roundtrip float formatting, so load → save → load is
//! bit-identical on all numeric fields.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{
    FiniteOnticSpace, FiniteOntologicalModel, PreparationMeasure, ResponseTable, DEFAULT_EPS,
    DEFAULT_PRODUCT_SPACE_CAP,
};
use crate::quantum::{ProjectiveMeasurement, PureState};
use crate::representation::FiberDecomposition;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("failed to read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("failed to write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("failed to parse {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("schema error at {field}: {message}")]
    Schema { field: String, message: String },
    #[error("invariant violation at {field}: {message}")]
    Invariant { field: String, message: String },
}

/// On-disk model representation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: String,
    pub dimension: usize,
    pub ontic_points: Vec<String>,
    pub preparations: Vec<PreparationRecord>,
    #[serde(default)]
    pub responses: Vec<ResponseRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreparationRecord {
    pub label: String,
    /// Amplitudes as `[re, im]` pairs.
    pub state: Vec<[f64; 2]>,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResponseRecord {
    /// Basis vectors, each a list of `[re, im]` pairs.
    pub basis: Vec<Vec<[f64; 2]>>,
    /// Outcome-major response probabilities: `xi[outcome][point]`.
    pub xi: Vec<Vec<f64>>,
}

/// Seeds, tolerances, and size limits shared by the command-line tools.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub eps: f64,
    pub mc_samples: usize,
    pub product_space_cap: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            eps: DEFAULT_EPS,
            mc_samples: 100_000,
            product_space_cap: DEFAULT_PRODUCT_SPACE_CAP,
        }
    }
}

fn state_from_pairs(pairs: &[[f64; 2]], field: &str) -> Result<PureState, IoError> {
    let amplitudes: Vec<Complex64> =
        pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    PureState::new(amplitudes)
        .map_err(|e| IoError::Invariant { field: field.to_owned(), message: e.to_string() })
}

fn pairs_from_state(state: &PureState) -> Vec<[f64; 2]> {
    state.amplitudes().iter().map(|a| [a.re, a.im]).collect()
}

/// Builds a validated model from its file representation. Every invariant
/// violation is rejected with the path of the offending field.
pub fn model_from_file(file: &ModelFile) -> Result<FiniteOntologicalModel, IoError> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(IoError::Schema {
            field: "schema_version".to_owned(),
            message: format!("unsupported version {:?}, expected {SCHEMA_VERSION:?}", file.schema_version),
        });
    }
    let space = FiniteOnticSpace::new(file.ontic_points.clone()).map_err(|e| IoError::Invariant {
        field: "ontic_points".to_owned(),
        message: e.to_string(),
    })?;

    let mut preparations = Vec::with_capacity(file.preparations.len());
    for (i, record) in file.preparations.iter().enumerate() {
        let state = state_from_pairs(&record.state, &format!("preparations[{i}].state"))?;
        let prep = PreparationMeasure::new(record.label.clone(), state, record.mu.clone())
            .map_err(|e| IoError::Invariant {
                field: format!("preparations[{i}].mu"),
                message: e.to_string(),
            })?;
        preparations.push(prep);
    }

    let mut responses = Vec::with_capacity(file.responses.len());
    for (i, record) in file.responses.iter().enumerate() {
        let mut basis = Vec::with_capacity(record.basis.len());
        for (k, vector) in record.basis.iter().enumerate() {
            basis.push(state_from_pairs(vector, &format!("responses[{i}].basis[{k}]"))?);
        }
        let measurement = ProjectiveMeasurement::new(basis).map_err(|e| IoError::Invariant {
            field: format!("responses[{i}].basis"),
            message: e.to_string(),
        })?;
        let table =
            ResponseTable::new(measurement, record.xi.clone()).map_err(|e| IoError::Invariant {
                field: format!("responses[{i}].xi"),
                message: e.to_string(),
            })?;
        responses.push(table);
    }

    FiniteOntologicalModel::new(file.dimension, space, preparations, responses).map_err(|e| {
        IoError::Invariant { field: "model".to_owned(), message: e.to_string() }
    })
}

/// File representation of a validated model.
pub fn model_to_file(model: &FiniteOntologicalModel) -> ModelFile {
    ModelFile {
        schema_version: SCHEMA_VERSION.to_owned(),
        dimension: model.dimension(),
        ontic_points: model.space().points().to_vec(),
        preparations: model
            .preparations()
            .iter()
            .map(|p| PreparationRecord {
                label: p.label().to_owned(),
                state: pairs_from_state(p.quantum_state()),
                mu: p.weights().to_vec(),
            })
            .collect(),
        responses: model
            .responses()
            .iter()
            .map(|r| ResponseRecord {
                basis: r.measurement().basis().iter().map(pairs_from_state).collect(),
                xi: r.xi().to_vec(),
            })
            .collect(),
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<FiniteOntologicalModel, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| IoError::Read { path: path.to_owned(), source })?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|source| IoError::Parse { path: path.to_owned(), source })?;
    model_from_file(&file)
}

pub fn save_model(model: &FiniteOntologicalModel, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let file = model_to_file(model);
    let text = serde_json::to_string_pretty(&file).expect("model file serialization is infallible");
    fs::write(path, text + "\n")
        .map_err(|source| IoError::Write { path: path.to_owned(), source })
}

/// On-disk representation of a fiber decomposition. Fibers are keyed by the
/// representative label of each state class and list ontic point names in
/// residual-coordinate order; `nu` holds each preparation's conditional
/// weights over its class fiber.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub fibers: BTreeMap<String, Vec<String>>,
    pub nu: BTreeMap<String, Vec<f64>>,
    pub default_label: String,
}

pub fn decomposition_to_file(
    decomposition: &FiberDecomposition,
    model: &FiniteOntologicalModel,
) -> DecompositionFile {
    let points = model.space().points();
    let fibers = decomposition
        .fibers()
        .iter()
        .map(|(label, indices)| {
            (label.clone(), indices.iter().map(|&i| points[i].clone()).collect())
        })
        .collect();
    DecompositionFile {
        fibers,
        nu: decomposition.conditional_measures().clone(),
        default_label: decomposition.default_label().to_owned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_model() -> FiniteOntologicalModel {
        let space = FiniteOnticSpace::from_names(["l0", "lp"]).unwrap();
        let states = [PureState::zero(), PureState::plus()];
        let response =
            ResponseTable::from_born(ProjectiveMeasurement::computational(2), &states).unwrap();
        FiniteOntologicalModel::new(
            2,
            space,
            vec![
                PreparationMeasure::new("zero", PureState::zero(), vec![1.0, 0.0]).unwrap(),
                PreparationMeasure::new("plus", PureState::plus(), vec![0.0, 1.0]).unwrap(),
            ],
            vec![response],
        )
        .unwrap()
    }

    #[test]
    fn load_save_load_roundtrips_bit_identically() {
        let dir = tempfile::tempdir().unwrap();
        let path_a = dir.path().join("a.json");
        let path_b = dir.path().join("b.json");
        save_model(&example_model(), &path_a).unwrap();
        let loaded = load_model(&path_a).unwrap();
        assert!(loaded.born_residual() < 1e-12);
        save_model(&loaded, &path_b).unwrap();
        assert_eq!(fs::read(&path_a).unwrap(), fs::read(&path_b).unwrap());
    }

    #[test]
    fn unnormalized_mu_names_the_preparation_field() {
        let mut file = model_to_file(&example_model());
        file.preparations[1].mu = vec![0.4, 0.5];
        let err = model_from_file(&file).unwrap_err();
        match err {
            IoError::Invariant { field, message } => {
                assert_eq!(field, "preparations[1].mu");
                assert!(message.contains("plus"), "message should name the label: {message}");
            }
            other => panic!("expected Invariant, got {other:?}"),
        }
    }

    #[test]
    fn skewed_basis_is_rejected_on_load() {
        let mut file = model_to_file(&example_model());
        let eps = 1e-3f64;
        file.responses[0].basis[1] = vec![[eps.sin(), 0.0], [eps.cos(), 0.0]];
        let err = model_from_file(&file).unwrap_err();
        match err {
            IoError::Invariant { field, .. } => assert_eq!(field, "responses[0].basis"),
            other => panic!("expected Invariant, got {other:?}"),
        }
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let mut file = model_to_file(&example_model());
        file.schema_version = "0".to_owned();
        assert!(matches!(model_from_file(&file), Err(IoError::Schema { .. })));
    }

    #[test]
    fn parse_error_reports_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.json");
        fs::write(&path, "{\"schema_version\": \"1\",").unwrap();
        let err = load_model(&path).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("line"), "parse diagnostics should mention a line: {message}");
    }

    #[test]
    fn decomposition_file_uses_point_names() {
        let model = example_model();
        let map = crate::representation::construct_label_map(&model, 1e-12).unwrap();
        let dec = crate::representation::fiber_decomposition(&model, &map).unwrap();
        let file = decomposition_to_file(&dec, &model);
        assert_eq!(file.fibers["zero"], vec!["l0".to_owned()]);
        assert_eq!(file.fibers["plus"], vec!["lp".to_owned()]);
        assert_eq!(file.default_label, "zero");
        assert_eq!(file.nu["plus"], vec![1.0]);
    }
}
