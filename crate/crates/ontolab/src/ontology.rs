//! Finite ontological models: ontic spaces, preparation measures, response
//! tables, Born-rule validation, support/overlap analysis, product
//! composition under preparation independence, and marginalization.
//!
//! All weight vectors are indexed consistently with the ontic space's point
//! order. Models are immutable after construction and every analysis is a
//! pure function, so shared read access is safe.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::numeric::compensated_sum;
use crate::quantum::{ProductState, ProjectiveMeasurement, PureState, QuantumError, ALGEBRAIC_TOL};

/// Default support threshold: weights at or below this are treated as zero.
pub const DEFAULT_EPS: f64 = 1e-12;

/// Default cap on the size of a composed product ontic space.
pub const DEFAULT_PRODUCT_SPACE_CAP: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("ontic space must be non-empty")]
    EmptySpace,
    #[error("duplicate ontic point {0:?}")]
    DuplicatePoint(String),
    #[error("duplicate preparation label {0:?}")]
    DuplicateLabel(String),
    #[error("preparation {label:?}: weight {value} at point index {index} is negative")]
    NegativeWeight { label: String, index: usize, value: f64 },
    #[error("preparation {label:?}: weights sum to {sum}, expected 1 within {tol}", tol = ALGEBRAIC_TOL)]
    WeightsNotNormalized { label: String, sum: f64 },
    #[error("preparation {label:?}: {got} weights for {expected} ontic points")]
    WeightLengthMismatch { label: String, expected: usize, got: usize },
    #[error("preparation {label:?}: state dimension {got}, model dimension {expected}")]
    StateDimensionMismatch { label: String, expected: usize, got: usize },
    #[error("response {index}: measurement dimension {got}, model dimension {expected}")]
    ResponseDimensionMismatch { index: usize, expected: usize, got: usize },
    #[error("response table row {outcome} has {got} entries for {expected} ontic points")]
    ResponseLengthMismatch { outcome: usize, expected: usize, got: usize },
    #[error("response entry for outcome {outcome}, point index {point} is {value}, outside [0, 1]")]
    ResponseEntryOutOfRange { outcome: usize, point: usize, value: f64 },
    #[error("response column at point index {point} sums to {sum}, expected 1 within {tol}", tol = ALGEBRAIC_TOL)]
    ResponseColumnNotNormalized { point: usize, sum: f64 },
    #[error("unknown preparation {0:?}")]
    UnknownPreparation(String),
    #[error("response index {index} out of range: model declares {len} responses")]
    UnknownResponse { index: usize, len: usize },
    #[error("product ontic space would have {size} points, exceeding the cap of {cap}")]
    SizeOverflow { size: usize, cap: usize },
    #[error("weight vector of length {got} does not match product space {n1}×{n2}")]
    DimensionMismatch { got: usize, n1: usize, n2: usize },
    #[error("composite space has {got} points, expected {expected} for the declared factor spaces")]
    NotProductSpace { expected: usize, got: usize },
    #[error("composite point {index} is named {got:?}, expected {expected:?} from the factor spaces")]
    PointNameMismatch { index: usize, expected: String, got: String },
    #[error("preparation {label:?} is not a product state across the declared factor split")]
    NotProductPreparation { label: String },
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// A finite ontic space: an ordered list of unique, opaque point names.
#[derive(Debug, Clone)]
pub struct FiniteOnticSpace {
    points: Vec<String>,
}

impl FiniteOnticSpace {
    pub fn new(points: Vec<String>) -> Result<Self, OntologyError> {
        if points.is_empty() {
            return Err(OntologyError::EmptySpace);
        }
        let mut seen = BTreeSet::new();
        for p in &points {
            if !seen.insert(p.clone()) {
                return Err(OntologyError::DuplicatePoint(p.clone()));
            }
        }
        Ok(Self { points })
    }

    /// Convenience constructor from string slices.
    pub fn from_names<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, OntologyError> {
        Self::new(names.into_iter().map(Into::into).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }
}

/// The probability measure over the ontic space induced by preparing a
/// quantum state, tagged with a label for lookup.
#[derive(Debug, Clone)]
pub struct PreparationMeasure {
    label: String,
    quantum_state: PureState,
    weights: Vec<f64>,
}

impl PreparationMeasure {
    /// Validates non-negativity and normalization of the weights.
    pub fn new(
        label: impl Into<String>,
        quantum_state: PureState,
        weights: Vec<f64>,
    ) -> Result<Self, OntologyError> {
        let label = label.into();
        for (index, &value) in weights.iter().enumerate() {
            if !(value >= 0.0) {
                return Err(OntologyError::NegativeWeight { label, index, value });
            }
        }
        let sum = compensated_sum(weights.iter().copied());
        if (sum - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(OntologyError::WeightsNotNormalized { label, sum });
        }
        Ok(Self { label, quantum_state, weights })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn quantum_state(&self) -> &PureState {
        &self.quantum_state
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Indices carrying weight strictly above `eps`.
    pub fn support(&self, eps: f64) -> BTreeSet<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > eps)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Outcome probabilities conditioned on the ontic state: `xi[outcome][point]`.
/// Columns are stochastic, so deterministic responses embed as 0/1 entries.
#[derive(Debug, Clone)]
pub struct ResponseTable {
    measurement: ProjectiveMeasurement,
    xi: Vec<Vec<f64>>,
}

impl ResponseTable {
    pub fn new(measurement: ProjectiveMeasurement, xi: Vec<Vec<f64>>) -> Result<Self, OntologyError> {
        let outcomes = measurement.dim();
        if xi.len() != outcomes {
            return Err(OntologyError::ResponseLengthMismatch {
                outcome: xi.len(),
                expected: outcomes,
                got: xi.len(),
            });
        }
        let n_points = xi.first().map_or(0, Vec::len);
        for (outcome, row) in xi.iter().enumerate() {
            if row.len() != n_points {
                return Err(OntologyError::ResponseLengthMismatch {
                    outcome,
                    expected: n_points,
                    got: row.len(),
                });
            }
            for (point, &value) in row.iter().enumerate() {
                if !(-ALGEBRAIC_TOL..=1.0 + ALGEBRAIC_TOL).contains(&value) {
                    return Err(OntologyError::ResponseEntryOutOfRange { outcome, point, value });
                }
            }
        }
        for point in 0..n_points {
            let sum = compensated_sum(xi.iter().map(|row| row[point]));
            if (sum - 1.0).abs() > ALGEBRAIC_TOL {
                return Err(OntologyError::ResponseColumnNotNormalized { point, sum });
            }
        }
        Ok(Self { measurement, xi })
    }

    /// A response table whose columns equal the Born probabilities of the
    /// given per-point quantum states. Used to build models that reproduce
    /// quantum statistics exactly.
    pub fn from_born(
        measurement: ProjectiveMeasurement,
        point_states: &[PureState],
    ) -> Result<Self, OntologyError> {
        let mut xi = vec![vec![0.0; point_states.len()]; measurement.dim()];
        for (point, state) in point_states.iter().enumerate() {
            let probs = measurement.born_probabilities(state)?;
            for (outcome, p) in probs.into_iter().enumerate() {
                xi[outcome][point] = p.min(1.0);
            }
        }
        Self::new(measurement, xi)
    }

    pub fn measurement(&self) -> &ProjectiveMeasurement {
        &self.measurement
    }

    pub fn xi(&self) -> &[Vec<f64>] {
        &self.xi
    }

    pub fn n_points(&self) -> usize {
        self.xi.first().map_or(0, Vec::len)
    }
}

/// Support-overlap classification of a preparation family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelClass {
    PsiOntic,
    PsiEpistemic,
}

/// Pairwise overlap analysis of a model's preparation measures.
///
/// `pair_overlaps[i][j] = Σ_λ min(μ_i(λ), μ_j(λ))` is the total-variation
/// overlap; `support_sets` are the eps-thresholded supports. The model is
/// classified psi-ontic iff supports are pairwise disjoint across every pair
/// of preparations with distinct quantum-state rays; ray-equal pairs are
/// exempt from the disjointness requirement.
#[derive(Debug, Clone, Serialize)]
pub struct OverlapReport {
    pub pair_overlaps: Vec<Vec<f64>>,
    pub support_sets: Vec<BTreeSet<usize>>,
    pub classification: ModelClass,
    /// Distinct-ray preparation pairs whose eps-supports intersect.
    pub overlapping_pairs: Vec<(usize, usize)>,
}

/// A finite ontological model: an ontic space, a family of preparation
/// measures, and optionally response tables for declared measurements.
#[derive(Debug, Clone)]
pub struct FiniteOntologicalModel {
    dimension: usize,
    space: FiniteOnticSpace,
    preparations: Vec<PreparationMeasure>,
    responses: Vec<ResponseTable>,
}

impl FiniteOntologicalModel {
    pub fn new(
        dimension: usize,
        space: FiniteOnticSpace,
        preparations: Vec<PreparationMeasure>,
        responses: Vec<ResponseTable>,
    ) -> Result<Self, OntologyError> {
        let n = space.len();
        let mut labels = BTreeSet::new();
        for prep in &preparations {
            if !labels.insert(prep.label().to_owned()) {
                return Err(OntologyError::DuplicateLabel(prep.label().to_owned()));
            }
            if prep.weights().len() != n {
                return Err(OntologyError::WeightLengthMismatch {
                    label: prep.label().to_owned(),
                    expected: n,
                    got: prep.weights().len(),
                });
            }
            if prep.quantum_state().dim() != dimension {
                return Err(OntologyError::StateDimensionMismatch {
                    label: prep.label().to_owned(),
                    expected: dimension,
                    got: prep.quantum_state().dim(),
                });
            }
        }
        for (index, response) in responses.iter().enumerate() {
            if response.measurement().dim() != dimension {
                return Err(OntologyError::ResponseDimensionMismatch {
                    index,
                    expected: dimension,
                    got: response.measurement().dim(),
                });
            }
            if response.n_points() != n {
                return Err(OntologyError::ResponseLengthMismatch {
                    outcome: 0,
                    expected: n,
                    got: response.n_points(),
                });
            }
        }
        Ok(Self { dimension, space, preparations, responses })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn space(&self) -> &FiniteOnticSpace {
        &self.space
    }

    pub fn preparations(&self) -> &[PreparationMeasure] {
        &self.preparations
    }

    pub fn responses(&self) -> &[ResponseTable] {
        &self.responses
    }

    /// Rebuilds the model with the given response tables.
    pub fn with_responses(self, responses: Vec<ResponseTable>) -> Result<Self, OntologyError> {
        Self::new(self.dimension, self.space, self.preparations, responses)
    }

    pub fn find_preparation(&self, label: &str) -> Option<&PreparationMeasure> {
        self.preparations.iter().find(|p| p.label() == label)
    }

    /// First preparation whose quantum state is ray-equal to `state`.
    pub fn find_preparation_by_ray(&self, state: &PureState) -> Option<&PreparationMeasure> {
        self.preparations.iter().find(|p| p.quantum_state().ray_equal(state))
    }

    /// `P(k) = Σ_λ μ(λ) ξ_k(λ)` for the named preparation and response table.
    pub fn predicted_distribution(
        &self,
        prep_label: &str,
        response_index: usize,
    ) -> Result<Vec<f64>, OntologyError> {
        let prep = self
            .find_preparation(prep_label)
            .ok_or_else(|| OntologyError::UnknownPreparation(prep_label.to_owned()))?;
        let response = self.responses.get(response_index).ok_or(OntologyError::UnknownResponse {
            index: response_index,
            len: self.responses.len(),
        })?;
        Ok(response
            .xi()
            .iter()
            .map(|row| {
                compensated_sum(prep.weights().iter().zip(row).map(|(&w, &x)| w * x))
            })
            .collect())
    }

    /// Worst-case deviation of the model's predictions from the Born rule,
    /// over all (preparation, response, outcome) triples. Zero (by the
    /// empty-maximum convention) when no responses are declared.
    pub fn born_residual(&self) -> f64 {
        let mut max = 0.0f64;
        for prep in &self.preparations {
            for response in &self.responses {
                let born = response
                    .measurement()
                    .born_probabilities(prep.quantum_state())
                    .expect("dimensions validated at construction");
                for (outcome, &b) in born.iter().enumerate() {
                    let predicted = compensated_sum(
                        prep.weights().iter().zip(&response.xi()[outcome]).map(|(&w, &x)| w * x),
                    );
                    max = max.max((predicted - b).abs());
                }
            }
        }
        max
    }

    /// Pairwise total-variation overlaps, eps-supports, and the resulting
    /// psi-ontic / psi-epistemic classification.
    pub fn overlap_matrix(&self, eps: f64) -> OverlapReport {
        let k = self.preparations.len();
        let support_sets: Vec<BTreeSet<usize>> =
            self.preparations.iter().map(|p| p.support(eps)).collect();
        let mut pair_overlaps = vec![vec![0.0; k]; k];
        let mut overlapping_pairs = Vec::new();
        for i in 0..k {
            for j in i..k {
                let overlap = compensated_sum(
                    self.preparations[i]
                        .weights()
                        .iter()
                        .zip(self.preparations[j].weights())
                        .map(|(&a, &b)| a.min(b)),
                );
                pair_overlaps[i][j] = overlap;
                pair_overlaps[j][i] = overlap;
                if i != j
                    && !self.preparations[i]
                        .quantum_state()
                        .ray_equal(self.preparations[j].quantum_state())
                    && !support_sets[i].is_disjoint(&support_sets[j])
                {
                    overlapping_pairs.push((i, j));
                }
            }
        }
        let classification = if overlapping_pairs.is_empty() {
            ModelClass::PsiOntic
        } else {
            ModelClass::PsiEpistemic
        };
        OverlapReport { pair_overlaps, support_sets, classification, overlapping_pairs }
    }
}

/// Which factor of a bipartite composition to keep when marginalizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    One,
    Two,
}

/// Sums a weight vector over the product space `space1 × space2` down to the
/// chosen factor. Points are ordered with subsystem 1 as the slow index.
pub fn marginalize(
    weights: &[f64],
    space1: &FiniteOnticSpace,
    space2: &FiniteOnticSpace,
    subsystem: Subsystem,
) -> Result<Vec<f64>, OntologyError> {
    let (n1, n2) = (space1.len(), space2.len());
    if weights.len() != n1 * n2 {
        return Err(OntologyError::DimensionMismatch { got: weights.len(), n1, n2 });
    }
    let out = match subsystem {
        Subsystem::One => (0..n1)
            .map(|i| compensated_sum((0..n2).map(|j| weights[i * n2 + j])))
            .collect(),
        Subsystem::Two => (0..n2)
            .map(|j| compensated_sum((0..n1).map(|i| weights[i * n2 + j])))
            .collect(),
    };
    Ok(out)
}

pub(crate) fn pair_name(a: &str, b: &str) -> String {
    format!("({a},{b})")
}

/// A model over a Cartesian-product ontic space that remembers its factor
/// structure: the two factor spaces and, per preparation, the tensor factors
/// of the prepared product state.
#[derive(Debug, Clone)]
pub struct CompositeModel {
    model: FiniteOntologicalModel,
    factor1_space: FiniteOnticSpace,
    factor2_space: FiniteOnticSpace,
    factor_labels: Vec<(String, String)>,
    products: Vec<ProductState>,
}

impl CompositeModel {
    pub fn model(&self) -> &FiniteOntologicalModel {
        &self.model
    }

    pub fn into_model(self) -> FiniteOntologicalModel {
        self.model
    }

    pub fn factor1_space(&self) -> &FiniteOnticSpace {
        &self.factor1_space
    }

    pub fn factor2_space(&self) -> &FiniteOnticSpace {
        &self.factor2_space
    }

    /// Per-preparation pair of factor labels, parallel to
    /// `model().preparations()`.
    pub fn factor_labels(&self) -> &[(String, String)] {
        &self.factor_labels
    }

    /// Per-preparation product state, parallel to `model().preparations()`.
    pub fn products(&self) -> &[ProductState] {
        &self.products
    }

    /// Wraps an existing model over a product space, recovering the factor
    /// structure. The composite points must be the row-major pairing of the
    /// declared factor points, and every preparation's quantum state must
    /// factorize across the split; entangled preparations are rejected with
    /// [`OntologyError::NotProductPreparation`].
    ///
    /// Factor labels are synthesized per distinct factor ray, so externally
    /// built composites (e.g. with correlated residual weights) can still be
    /// analyzed subsystem by subsystem.
    pub fn from_parts(
        model: FiniteOntologicalModel,
        factor1_space: FiniteOnticSpace,
        factor2_space: FiniteOnticSpace,
    ) -> Result<Self, OntologyError> {
        let (n1, n2) = (factor1_space.len(), factor2_space.len());
        if model.space().len() != n1 * n2 {
            return Err(OntologyError::NotProductSpace {
                expected: n1 * n2,
                got: model.space().len(),
            });
        }
        for (i1, p1) in factor1_space.points().iter().enumerate() {
            for (i2, p2) in factor2_space.points().iter().enumerate() {
                let index = i1 * n2 + i2;
                let expected = pair_name(p1, p2);
                if model.space().points()[index] != expected {
                    return Err(OntologyError::PointNameMismatch {
                        index,
                        expected,
                        got: model.space().points()[index].clone(),
                    });
                }
            }
        }
        let d = model.dimension();
        // Factor dimensions: the joint dimension must split as d1·d2. The
        // square split is the only case produced by this toolkit; anything
        // else must come in via pip_compose, which records its own structure.
        let d1 = (1..=d).find(|&c| c * c == d).ok_or_else(|| {
            OntologyError::NotProductPreparation {
                label: model
                    .preparations()
                    .first()
                    .map(|p| p.label().to_owned())
                    .unwrap_or_default(),
            }
        })?;
        let d2 = d / d1;

        let mut factor_labels = Vec::new();
        let mut products = Vec::new();
        let mut ray_classes1: Vec<PureState> = Vec::new();
        let mut ray_classes2: Vec<PureState> = Vec::new();
        for prep in model.preparations() {
            let (f1, f2) = crate::quantum::factor_product_state(prep.quantum_state(), d1, d2)
                .ok_or_else(|| OntologyError::NotProductPreparation {
                    label: prep.label().to_owned(),
                })?;
            let c1 = match ray_classes1.iter().position(|s| s.ray_equal(&f1)) {
                Some(c) => c,
                None => {
                    ray_classes1.push(f1.clone());
                    ray_classes1.len() - 1
                }
            };
            let c2 = match ray_classes2.iter().position(|s| s.ray_equal(&f2)) {
                Some(c) => c,
                None => {
                    ray_classes2.push(f2.clone());
                    ray_classes2.len() - 1
                }
            };
            factor_labels.push((format!("sub1#{c1}"), format!("sub2#{c2}")));
            products.push(crate::quantum::tensor(&f1, &f2));
        }
        Ok(Self { model, factor1_space, factor2_space, factor_labels, products })
    }
}

/// Composes two models under preparation independence: the composite ontic
/// space is the Cartesian product, and every pair of factor preparations
/// yields a composite preparation with product weights
/// `μ(λ₁,λ₂) = μ₁(λ₁)·μ₂(λ₂)` and the tensor of the factor states. Response
/// tables are left empty; measurement-side behavior on the composite is
/// supplied separately.
pub fn pip_compose(
    m1: &FiniteOntologicalModel,
    m2: &FiniteOntologicalModel,
) -> Result<CompositeModel, OntologyError> {
    pip_compose_capped(m1, m2, DEFAULT_PRODUCT_SPACE_CAP)
}

/// [`pip_compose`] with an explicit cap on the product space size.
pub fn pip_compose_capped(
    m1: &FiniteOntologicalModel,
    m2: &FiniteOntologicalModel,
    cap: usize,
) -> Result<CompositeModel, OntologyError> {
    let (n1, n2) = (m1.space().len(), m2.space().len());
    let size = n1.checked_mul(n2).ok_or(OntologyError::SizeOverflow { size: usize::MAX, cap })?;
    if size > cap {
        return Err(OntologyError::SizeOverflow { size, cap });
    }

    let mut points = Vec::with_capacity(size);
    for p1 in m1.space().points() {
        for p2 in m2.space().points() {
            points.push(pair_name(p1, p2));
        }
    }
    let space = FiniteOnticSpace::new(points)?;

    let mut preparations = Vec::with_capacity(m1.preparations().len() * m2.preparations().len());
    let mut factor_labels = Vec::new();
    let mut products = Vec::new();
    for p1 in m1.preparations() {
        for p2 in m2.preparations() {
            let mut weights = Vec::with_capacity(size);
            for &w1 in p1.weights() {
                for &w2 in p2.weights() {
                    weights.push(w1 * w2);
                }
            }
            let product = crate::quantum::tensor(p1.quantum_state(), p2.quantum_state());
            preparations.push(PreparationMeasure::new(
                pair_name(p1.label(), p2.label()),
                product.joint().clone(),
                weights,
            )?);
            factor_labels.push((p1.label().to_owned(), p2.label().to_owned()));
            products.push(product);
        }
    }

    let model = FiniteOntologicalModel::new(
        m1.dimension() * m2.dimension(),
        space,
        preparations,
        Vec::new(),
    )?;
    Ok(CompositeModel {
        model,
        factor1_space: m1.space().clone(),
        factor2_space: m2.space().clone(),
        factor_labels,
        products,
    })
}
