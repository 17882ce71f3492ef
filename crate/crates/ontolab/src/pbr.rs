//! The four-preparation product-state exclusion experiment.
//!
//! Four two-qubit product preparations are measured in an entangled basis in
//! which each preparation has exactly one outcome of Born probability zero.
//! Any ontic-space mass shared by all four preparation measures is
//! incompatible with those zeros: at a shared point the response
//! probabilities over the four outcomes sum to one, so some preparation must
//! assign at least a quarter of that mass to its forbidden outcome. The
//! harness reports the shared mass Δ and the resulting Δ/4 lower bound on the
//! worst-case Born deviation, rather than a bare impossibility verdict.

use serde::Serialize;
use thiserror::Error;

use crate::numeric::compensated_sum;
use crate::ontology::{pip_compose_capped, FiniteOntologicalModel, OntologyError};
use crate::quantum::{
    pbr_entangled_basis, pbr_preparations, ProductState, ProjectiveMeasurement, PureState,
    QuantumError, ALGEBRAIC_TOL,
};

/// Human-readable names for the four scenario preparations, in order.
pub const SCENARIO_PREPARATION_NAMES: [&str; 4] = ["0⊗0", "0⊗+", "+⊗0", "+⊗+"];

#[derive(Debug, Error)]
pub enum PbrError {
    #[error("composite model has no preparation matching scenario state {name} (slot {slot})")]
    ScenarioMismatch { slot: usize, name: &'static str },
    #[error("model has no preparation for the {name} qubit state")]
    MissingPreparation { name: &'static str },
    #[error("expected a qubit model (dimension 2), got dimension {dim}")]
    NotQubit { dim: usize },
    #[error(transparent)]
    Construction(#[from] QuantumError),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
}

/// The fixed experiment: four product preparations, the entangled basis, and
/// the computed forbidden outcome of each preparation.
#[derive(Debug, Clone)]
pub struct PbrScenario {
    preparations: [ProductState; 4],
    basis: ProjectiveMeasurement,
    forbidden_outcome: [usize; 4],
}

impl PbrScenario {
    pub fn preparations(&self) -> &[ProductState; 4] {
        &self.preparations
    }

    pub fn basis(&self) -> &ProjectiveMeasurement {
        &self.basis
    }

    /// Outcome index with zero Born probability for each preparation.
    pub fn forbidden_outcome(&self) -> [usize; 4] {
        self.forbidden_outcome
    }
}

/// Builds the scenario, computing the forbidden-outcome table from Born
/// probabilities rather than hard-coding it. Each preparation must have
/// exactly one forbidden outcome and the four forbidden outcomes must be
/// distinct (the Δ/4 bound relies on them exhausting the outcome set).
pub fn build_scenario() -> Result<PbrScenario, PbrError> {
    let preparations = pbr_preparations();
    let basis = pbr_entangled_basis()?;
    let mut forbidden_outcome = [usize::MAX; 4];
    for (slot, prep) in preparations.iter().enumerate() {
        let probs = basis.born_probabilities(prep.joint())?;
        let forbidden: Vec<usize> = probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p < ALGEBRAIC_TOL)
            .map(|(k, _)| k)
            .collect();
        if forbidden.len() != 1 {
            return Err(QuantumError::ConstructionInvalid(format!(
                "preparation {} has {} forbidden outcomes, expected exactly 1",
                SCENARIO_PREPARATION_NAMES[slot],
                forbidden.len()
            ))
            .into());
        }
        forbidden_outcome[slot] = forbidden[0];
    }
    let mut seen = [false; 4];
    for &k in &forbidden_outcome {
        if seen[k] {
            return Err(QuantumError::ConstructionInvalid(
                "forbidden outcomes are not distinct".to_owned(),
            )
            .into());
        }
        seen[k] = true;
    }
    Ok(PbrScenario { preparations, basis, forbidden_outcome })
}

/// Quantitative outcome of the exclusion analysis.
#[derive(Debug, Clone, Serialize)]
pub struct PbrReport {
    /// Δ: total mass shared by all four preparation measures,
    /// `Σ_λ min_i μ_i(λ)`.
    pub common_overlap_mass: f64,
    /// Composite ontic points where the pointwise minimum exceeds eps.
    pub witness_points: Vec<String>,
    /// Pigeonhole lower bound Δ/4 on the worst forbidden-outcome probability.
    pub min_deviation_bound: f64,
    /// `|predicted − Born|` per (preparation, outcome), present when the
    /// composite declares a response table for the scenario basis.
    pub per_prep_residuals: Option<Vec<Vec<f64>>>,
}

fn measurement_matches(basis: &ProjectiveMeasurement, other: &ProjectiveMeasurement) -> bool {
    basis.dim() == other.dim()
        && basis.basis().iter().zip(other.basis()).all(|(a, b)| a.ray_equal(b))
}

/// Computes the common-overlap mass of the four scenario preparations inside
/// `composite`, the witness points carrying it, and the Δ/4 deviation bound.
///
/// The composite must contain, for each scenario preparation, a preparation
/// whose quantum state is ray-equal to it (the first match is used). If the
/// composite declares a response table whose measurement is the scenario
/// basis (outcome-by-outcome, up to phase), per-preparation Born residuals
/// are included.
pub fn exclusion_witness(
    composite: &FiniteOntologicalModel,
    scenario: &PbrScenario,
    eps: f64,
) -> Result<PbrReport, PbrError> {
    let mut located = Vec::with_capacity(4);
    for (slot, prep) in scenario.preparations().iter().enumerate() {
        let found = composite
            .find_preparation_by_ray(prep.joint())
            .ok_or(PbrError::ScenarioMismatch { slot, name: SCENARIO_PREPARATION_NAMES[slot] })?;
        located.push(found);
    }

    let n = composite.space().len();
    let mut pointwise_min = vec![f64::INFINITY; n];
    for prep in &located {
        for (point, &w) in prep.weights().iter().enumerate() {
            pointwise_min[point] = pointwise_min[point].min(w);
        }
    }
    let common_overlap_mass = compensated_sum(pointwise_min.iter().copied());
    let witness_points: Vec<String> = pointwise_min
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > eps)
        .map(|(point, _)| composite.space().points()[point].clone())
        .collect();
    let min_deviation_bound =
        if common_overlap_mass > 0.0 { common_overlap_mass / 4.0 } else { 0.0 };

    let per_prep_residuals = composite
        .responses()
        .iter()
        .position(|r| measurement_matches(scenario.basis(), r.measurement()))
        .map(|response_index| {
            located
                .iter()
                .map(|prep| {
                    let predicted = composite
                        .predicted_distribution(prep.label(), response_index)
                        .expect("located preparation and response index are valid");
                    let born = scenario
                        .basis()
                        .born_probabilities(prep.quantum_state())
                        .expect("dimension validated");
                    predicted.iter().zip(&born).map(|(p, b)| (p - b).abs()).collect()
                })
                .collect()
        });

    Ok(PbrReport { common_overlap_mass, witness_points, min_deviation_bound, per_prep_residuals })
}

/// Runs the full experiment on a single-qubit model: composes the model with
/// itself under preparation independence, locates the four product
/// preparations, and reports the exclusion analysis. Any overlap between the
/// qubit model's `|0⟩` and `|+⟩` measures shows up as Δ > 0.
pub fn run_pbr_experiment(
    single_model: &FiniteOntologicalModel,
    eps: f64,
) -> Result<PbrReport, PbrError> {
    run_pbr_experiment_capped(single_model, eps, crate::ontology::DEFAULT_PRODUCT_SPACE_CAP)
}

/// [`run_pbr_experiment`] with an explicit product-space cap.
pub fn run_pbr_experiment_capped(
    single_model: &FiniteOntologicalModel,
    eps: f64,
    cap: usize,
) -> Result<PbrReport, PbrError> {
    if single_model.dimension() != 2 {
        return Err(PbrError::NotQubit { dim: single_model.dimension() });
    }
    if single_model.find_preparation_by_ray(&PureState::zero()).is_none() {
        return Err(PbrError::MissingPreparation { name: "|0⟩" });
    }
    if single_model.find_preparation_by_ray(&PureState::plus()).is_none() {
        return Err(PbrError::MissingPreparation { name: "|+⟩" });
    }
    let composite = pip_compose_capped(single_model, single_model, cap)?;
    let scenario = build_scenario()?;
    exclusion_witness(composite.model(), &scenario, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{FiniteOnticSpace, PreparationMeasure, ResponseTable};

    fn prep(label: &str, state: PureState, weights: &[f64]) -> PreparationMeasure {
        PreparationMeasure::new(label, state, weights.to_vec()).unwrap()
    }

    fn qubit_model(
        zero_weights: &[f64],
        plus_weights: &[f64],
        points: &[&str],
    ) -> FiniteOntologicalModel {
        let space = FiniteOnticSpace::from_names(points.iter().copied()).unwrap();
        FiniteOntologicalModel::new(
            2,
            space,
            vec![
                prep("zero", PureState::zero(), zero_weights),
                prep("plus", PureState::plus(), plus_weights),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn scenario_forbidden_outcomes_are_computed_and_distinct() {
        let scenario = build_scenario().unwrap();
        let forbidden = scenario.forbidden_outcome();
        let mut sorted = forbidden;
        sorted.sort_unstable();
        assert_eq!(sorted, [0, 1, 2, 3]);
        for (slot, prep) in scenario.preparations().iter().enumerate() {
            let probs = scenario.basis().born_probabilities(prep.joint()).unwrap();
            assert!(probs[forbidden[slot]] < 1e-12);
            for (k, &p) in probs.iter().enumerate() {
                if k != forbidden[slot] {
                    assert!(p > 1e-6, "non-forbidden outcome {k} should be strictly positive");
                }
            }
        }
    }

    #[test]
    fn psi_ontic_input_has_no_shared_mass() {
        let model = qubit_model(&[1.0, 0.0], &[0.0, 1.0], &["l0", "lp"]);
        let report = run_pbr_experiment(&model, 1e-12).unwrap();
        assert_eq!(report.common_overlap_mass, 0.0);
        assert!(report.witness_points.is_empty());
        assert_eq!(report.min_deviation_bound, 0.0);
    }

    #[test]
    fn shared_point_of_mass_one_tenth_yields_delta_one_hundredth() {
        let model = qubit_model(&[0.1, 0.9, 0.0], &[0.1, 0.0, 0.9], &["s", "l0", "lp"]);
        let report = run_pbr_experiment(&model, 1e-12).unwrap();
        assert!((report.common_overlap_mass - 0.01).abs() < 1e-12);
        assert!((report.min_deviation_bound - 0.0025).abs() < 1e-12);
        assert_eq!(report.witness_points, vec!["(s,s)".to_owned()]);
    }

    #[test]
    fn identical_measures_share_all_mass() {
        let model = qubit_model(&[0.5, 0.5], &[0.5, 0.5], &["a", "b"]);
        let report = run_pbr_experiment(&model, 1e-12).unwrap();
        assert!((report.common_overlap_mass - 1.0).abs() < 1e-12);
        assert!((report.min_deviation_bound - 0.25).abs() < 1e-12);
        assert_eq!(report.witness_points.len(), 4);
    }

    #[test]
    fn missing_preparation_is_reported() {
        let space = FiniteOnticSpace::from_names(["a"]).unwrap();
        let model = FiniteOntologicalModel::new(
            2,
            space,
            vec![prep("zero", PureState::zero(), &[1.0])],
            vec![],
        )
        .unwrap();
        assert!(matches!(
            run_pbr_experiment(&model, 1e-12),
            Err(PbrError::MissingPreparation { name: "|+⟩" })
        ));
    }

    #[test]
    fn non_qubit_model_is_rejected() {
        let space = FiniteOnticSpace::from_names(["a"]).unwrap();
        let model = FiniteOntologicalModel::new(
            3,
            space,
            vec![prep_dim3()],
            vec![],
        )
        .unwrap();
        assert!(matches!(run_pbr_experiment(&model, 1e-12), Err(PbrError::NotQubit { dim: 3 })));
    }

    fn prep_dim3() -> PreparationMeasure {
        PreparationMeasure::new("p", PureState::basis_state(3, 0), vec![1.0]).unwrap()
    }

    #[test]
    fn scenario_mismatch_when_preparations_absent() {
        let space = FiniteOnticSpace::from_names(["a"]).unwrap();
        let zz = crate::quantum::tensor(&PureState::zero(), &PureState::zero());
        let composite = FiniteOntologicalModel::new(
            4,
            space,
            vec![prep("only-00", zz.joint().clone(), &[1.0])],
            vec![],
        )
        .unwrap();
        let scenario = build_scenario().unwrap();
        assert!(matches!(
            exclusion_witness(&composite, &scenario, 1e-12),
            Err(PbrError::ScenarioMismatch { slot: 1, .. })
        ));
    }

    #[test]
    fn responses_expose_forbidden_outcome_probability_above_bound() {
        // Composite with fully overlapping measures (Δ = 1) and a uniform
        // response table: every forbidden outcome has predicted probability
        // 1/4 ≥ Δ/4.
        let model = qubit_model(&[0.5, 0.5], &[0.5, 0.5], &["a", "b"]);
        let composite = crate::ontology::pip_compose(&model, &model).unwrap().into_model();
        let scenario = build_scenario().unwrap();
        let n = composite.space().len();
        let xi = vec![vec![0.25; n]; 4];
        let response = ResponseTable::new(scenario.basis().clone(), xi).unwrap();
        let composite = composite.with_responses(vec![response]).unwrap();

        let report = exclusion_witness(&composite, &scenario, 1e-12).unwrap();
        let residuals = report.per_prep_residuals.as_ref().expect("responses were supplied");
        let forbidden = scenario.forbidden_outcome();
        let mut max_forbidden = 0.0f64;
        for (slot, row) in residuals.iter().enumerate() {
            // Born probability of a forbidden outcome is 0, so the residual
            // there equals the predicted probability itself.
            max_forbidden = max_forbidden.max(row[forbidden[slot]]);
        }
        assert!(max_forbidden >= report.min_deviation_bound - 1e-12);
    }
}
