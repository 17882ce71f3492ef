//! Reorganizing psi-ontic models around an explicit state label.
//!
//! When a model's preparation measures have pairwise disjoint supports, every
//! ontic point inside some support is compatible with exactly one quantum
//! state. This module builds that assignment as a label map, splits each
//! ontic point into (state label, residual coordinate) by decomposing the
//! space into fibers with normalized conditional measures, verifies that the
//! original weights are reproduced by the decomposition, and — for composite
//! models over product ontic spaces — checks that each subsystem's label
//! component is uniquely fixed under every product preparation.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::ontology::{CompositeModel, FiniteOntologicalModel, ModelClass, OntologyError};
use crate::quantum::{PureState, ALGEBRAIC_TOL};

#[derive(Debug, Error)]
pub enum RepresentationError {
    #[error(
        "preparations {label_a:?} and {label_b:?} have overlapping supports \
         (shared mass {overlap}); the model is psi-epistemic, so no state label map exists"
    )]
    PsiEpistemicInput { label_a: String, label_b: String, overlap: f64 },
    #[error("model declares no preparations; a state label map needs at least one")]
    NoPreparations,
    #[error("label map is inconsistent with the model: {0}")]
    InconsistentLabelMap(String),
    #[error(
        "subsystem-{subsystem} label marginal for preparation {label:?} is not a point mass"
    )]
    LabelMarginalNotPointMass { label: String, subsystem: usize },
    #[error(transparent)]
    Ontology(#[from] OntologyError),
}

/// Assignment of every ontic point to the preparation whose support contains
/// it. Preparations with ray-equal quantum states describe the same state and
/// therefore share one label class, represented by the first such preparation
/// in declaration order. Points outside all supports carry the default class
/// (that of the first preparation).
#[derive(Debug, Clone)]
pub struct StateLabelMap {
    /// Ray-class index per ontic point; `None` for points outside all supports.
    assignment: Vec<Option<usize>>,
    /// Representative preparation index per ray class, in first-appearance order.
    class_reps: Vec<usize>,
    /// Ray-class index per preparation.
    class_of_prep: Vec<usize>,
}

impl StateLabelMap {
    pub fn n_points(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_reps.len()
    }

    pub fn class_of_prep(&self, prep: usize) -> usize {
        self.class_of_prep[prep]
    }

    /// Representative preparation index of the given ray class.
    pub fn class_representative(&self, class: usize) -> usize {
        self.class_reps[class]
    }

    /// Ray class assigned to the point, falling back to the default class
    /// (class 0, the first preparation's) outside all supports.
    pub fn class_of_point(&self, point: usize) -> usize {
        self.assignment[point].unwrap_or(0)
    }

    pub fn is_assigned(&self, point: usize) -> bool {
        self.assignment[point].is_some()
    }

    /// Label carried by the point: the representative preparation's label.
    pub fn label_of_point<'m>(&self, model: &'m FiniteOntologicalModel, point: usize) -> &'m str {
        model.preparations()[self.class_reps[self.class_of_point(point)]].label()
    }

    pub fn default_label<'m>(&self, model: &'m FiniteOntologicalModel) -> &'m str {
        model.preparations()[self.class_reps[0]].label()
    }
}

/// Builds the state label map for a psi-ontic model: every point in some
/// eps-support is assigned the unique compatible preparation class, so that
/// each preparation's measure sits entirely inside its own class.
///
/// Fails with [`RepresentationError::PsiEpistemicInput`] when two
/// distinct-ray preparations share support, reporting the offending pair and
/// their total-variation overlap.
pub fn construct_label_map(
    model: &FiniteOntologicalModel,
    eps: f64,
) -> Result<StateLabelMap, RepresentationError> {
    let preps = model.preparations();
    if preps.is_empty() {
        return Err(RepresentationError::NoPreparations);
    }
    let report = model.overlap_matrix(eps);
    if report.classification == ModelClass::PsiEpistemic {
        let (i, j) = report.overlapping_pairs[0];
        return Err(RepresentationError::PsiEpistemicInput {
            label_a: preps[i].label().to_owned(),
            label_b: preps[j].label().to_owned(),
            overlap: report.pair_overlaps[i][j],
        });
    }

    // Group preparations into ray classes, first appearance first.
    let mut class_reps: Vec<usize> = Vec::new();
    let mut class_of_prep = vec![0usize; preps.len()];
    for (p, prep) in preps.iter().enumerate() {
        let class = class_reps
            .iter()
            .position(|&rep| preps[rep].quantum_state().ray_equal(prep.quantum_state()));
        match class {
            Some(c) => class_of_prep[p] = c,
            None => {
                class_reps.push(p);
                class_of_prep[p] = class_reps.len() - 1;
            }
        }
    }

    let mut assignment = vec![None; model.space().len()];
    for (p, support) in report.support_sets.iter().enumerate() {
        let class = class_of_prep[p];
        for &point in support {
            // Disjointness across classes was verified above, so any existing
            // assignment must come from the same ray class.
            debug_assert!(assignment[point].is_none() || assignment[point] == Some(class));
            assignment[point] = Some(class);
        }
    }
    Ok(StateLabelMap { assignment, class_reps, class_of_prep })
}

/// The fiber decomposition induced by a state label map: per ray class, the
/// list of ontic points carrying that label, and per preparation, the
/// normalized restriction of its measure to its class fiber. The position of
/// a point within its fiber's list is the residual coordinate.
#[derive(Debug, Clone)]
pub struct FiberDecomposition {
    /// Representative label → sorted point indices of the fiber.
    fibers: BTreeMap<String, Vec<usize>>,
    /// Preparation label → normalized conditional weights over its class fiber.
    conditional_measures: BTreeMap<String, Vec<f64>>,
    /// Preparation label → representative label of its class fiber.
    fiber_of: BTreeMap<String, String>,
    default_label: String,
}

impl FiberDecomposition {
    pub fn fibers(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.fibers
    }

    pub fn conditional_measures(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.conditional_measures
    }

    /// Representative label of the fiber a preparation belongs to.
    pub fn fiber_label(&self, prep_label: &str) -> Option<&str> {
        self.fiber_of.get(prep_label).map(String::as_str)
    }

    pub fn fiber_points(&self, prep_label: &str) -> Option<&[usize]> {
        self.fiber_label(prep_label).and_then(|rep| self.fibers.get(rep)).map(Vec::as_slice)
    }

    pub fn default_label(&self) -> &str {
        &self.default_label
    }

    /// Builds a decomposition from explicit parts; used for hand-crafted
    /// inputs in tests and for deserialization. No consistency with any model
    /// is checked here — that is `verify_delta_form`'s job.
    pub fn from_parts(
        fibers: BTreeMap<String, Vec<usize>>,
        conditional_measures: BTreeMap<String, Vec<f64>>,
        fiber_of: BTreeMap<String, String>,
        default_label: String,
    ) -> Self {
        Self { fibers, conditional_measures, fiber_of, default_label }
    }
}

/// Restricts each preparation's measure to its class fiber and renormalizes.
///
/// Fails with [`RepresentationError::InconsistentLabelMap`] when the label
/// map does not fit the model or some preparation has no mass inside its
/// fiber (so no conditional measure exists).
pub fn fiber_decomposition(
    model: &FiniteOntologicalModel,
    label_map: &StateLabelMap,
) -> Result<FiberDecomposition, RepresentationError> {
    let preps = model.preparations();
    if label_map.n_points() != model.space().len() || label_map.class_of_prep.len() != preps.len()
    {
        return Err(RepresentationError::InconsistentLabelMap(format!(
            "label map covers {} points and {} preparations, model has {} and {}",
            label_map.n_points(),
            label_map.class_of_prep.len(),
            model.space().len(),
            preps.len()
        )));
    }

    // Unassigned points belong to the default class's fiber.
    let mut class_points: Vec<Vec<usize>> = vec![Vec::new(); label_map.n_classes()];
    for point in 0..label_map.n_points() {
        class_points[label_map.class_of_point(point)].push(point);
    }

    let mut fibers = BTreeMap::new();
    for (class, points) in class_points.iter().enumerate() {
        let rep = preps[label_map.class_representative(class)].label().to_owned();
        fibers.insert(rep, points.clone());
    }

    let mut conditional_measures = BTreeMap::new();
    let mut fiber_of = BTreeMap::new();
    for (p, prep) in preps.iter().enumerate() {
        let class = label_map.class_of_prep(p);
        let points = &class_points[class];
        let mass: f64 = points.iter().map(|&pt| prep.weights()[pt]).sum();
        if mass <= 0.0 {
            return Err(RepresentationError::InconsistentLabelMap(format!(
                "preparation {:?} has zero mass on its fiber",
                prep.label()
            )));
        }
        let nu: Vec<f64> = points.iter().map(|&pt| prep.weights()[pt] / mass).collect();
        conditional_measures.insert(prep.label().to_owned(), nu);
        fiber_of.insert(
            prep.label().to_owned(),
            preps[label_map.class_representative(class)].label().to_owned(),
        );
    }

    let default_label = label_map.default_label(model).to_owned();
    Ok(FiberDecomposition { fibers, conditional_measures, fiber_of, default_label })
}

/// Result of checking a fiber decomposition against its model.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeltaFormReport {
    /// True iff every preparation's mass lies entirely inside its own fiber
    /// and the conditional measures rebuild the original weights, both within
    /// 1e-12.
    pub holds: bool,
    /// Largest pointwise difference between rebuilt and original weights.
    pub max_error: f64,
    /// Largest per-preparation mass found outside its own fiber.
    pub max_leaked_mass: f64,
}

/// Rebuilds every preparation measure from its fiber and conditional measure
/// and compares against the original weights. An empty preparation family
/// passes vacuously.
pub fn verify_delta_form(
    model: &FiniteOntologicalModel,
    decomposition: &FiberDecomposition,
) -> DeltaFormReport {
    let mut max_error = 0.0f64;
    let mut max_leaked_mass = 0.0f64;
    for prep in model.preparations() {
        let mut rebuilt = vec![0.0f64; model.space().len()];
        if let (Some(points), Some(nu)) = (
            decomposition.fiber_points(prep.label()),
            decomposition.conditional_measures.get(prep.label()),
        ) {
            for (&point, &v) in points.iter().zip(nu) {
                if point < rebuilt.len() {
                    rebuilt[point] = v;
                }
            }
            let in_fiber: f64 = points
                .iter()
                .filter(|&&pt| pt < prep.weights().len())
                .map(|&pt| prep.weights()[pt])
                .sum();
            max_leaked_mass = max_leaked_mass.max(1.0 - in_fiber);
        } else {
            max_leaked_mass = max_leaked_mass.max(1.0);
        }
        for (r, w) in rebuilt.iter().zip(prep.weights()) {
            max_error = max_error.max((r - w).abs());
        }
    }
    let holds = max_error <= ALGEBRAIC_TOL && max_leaked_mass <= ALGEBRAIC_TOL;
    DeltaFormReport { holds, max_error, max_leaked_mass }
}

/// The tensor split of one composite preparation's state label.
#[derive(Debug, Clone)]
pub struct ProductLabelSplit {
    pub prep_label: String,
    /// The unique subsystem-1 state label under this preparation.
    pub factor1: PureState,
    /// The unique subsystem-2 state label under this preparation.
    pub factor2: PureState,
}

/// ONTIC when every preparation pins the subsystem's label component to a
/// single value; VIOLATION reports two distinct labels seen under one
/// preparation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Onticity {
    Ontic,
    Violation,
}

/// Two distinct subsystem labels that both carry mass under one preparation.
#[derive(Debug, Clone, Serialize)]
pub struct OnticityWitness {
    pub prep_label: String,
    pub label_a: String,
    pub label_b: String,
    pub mass_a: f64,
    pub mass_b: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsystemOnticityVerdict {
    pub subsystem: usize,
    pub verdict: Onticity,
    pub witness: Option<OnticityWitness>,
}

/// Per-preparation mass carried by each subsystem label value.
#[derive(Debug, Clone, Serialize)]
pub struct PreparationLabelMarginals {
    pub prep_label: String,
    pub subsystem1: BTreeMap<String, f64>,
    pub subsystem2: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsystemOnticityReport {
    pub verdicts: [SubsystemOnticityVerdict; 2],
    pub marginals: Vec<PreparationLabelMarginals>,
}

impl SubsystemOnticityReport {
    pub fn is_ontic(&self) -> bool {
        self.verdicts.iter().all(|v| v.verdict == Onticity::Ontic)
    }
}

/// Core subsystem-onticity engine over an explicit per-point label
/// assignment: `point_labels[point] = (subsystem-1 label, subsystem-2 label)`.
///
/// For each preparation and each subsystem, accumulates the measure's mass
/// per label value; the subsystem is ONTIC iff every preparation's marginal
/// has a single label above `eps`. Externally supplied assignments need not
/// come from a label map, which is what makes an inconsistent labeling
/// detectable as a VIOLATION with its witness pair.
pub fn onticity_from_point_labels(
    model: &FiniteOntologicalModel,
    point_labels: &[(String, String)],
    eps: f64,
) -> Result<SubsystemOnticityReport, RepresentationError> {
    if point_labels.len() != model.space().len() {
        return Err(RepresentationError::InconsistentLabelMap(format!(
            "{} point labels for {} ontic points",
            point_labels.len(),
            model.space().len()
        )));
    }
    let mut marginals = Vec::with_capacity(model.preparations().len());
    let mut witnesses: [Option<OnticityWitness>; 2] = [None, None];
    for prep in model.preparations() {
        let mut per_subsystem: [BTreeMap<String, f64>; 2] = [BTreeMap::new(), BTreeMap::new()];
        for (point, &weight) in prep.weights().iter().enumerate() {
            if weight == 0.0 {
                continue;
            }
            let (l1, l2) = &point_labels[point];
            *per_subsystem[0].entry(l1.clone()).or_insert(0.0) += weight;
            *per_subsystem[1].entry(l2.clone()).or_insert(0.0) += weight;
        }
        for (s, marginal) in per_subsystem.iter().enumerate() {
            if witnesses[s].is_some() {
                continue;
            }
            let mut above: Vec<(&String, f64)> =
                marginal.iter().filter(|(_, &m)| m > eps).map(|(l, &m)| (l, m)).collect();
            if above.len() >= 2 {
                // Witness the two heaviest labels, deterministically.
                above.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(b.0)));
                witnesses[s] = Some(OnticityWitness {
                    prep_label: prep.label().to_owned(),
                    label_a: above[0].0.clone(),
                    label_b: above[1].0.clone(),
                    mass_a: above[0].1,
                    mass_b: above[1].1,
                });
            }
        }
        marginals.push(PreparationLabelMarginals {
            prep_label: prep.label().to_owned(),
            subsystem1: per_subsystem[0].clone(),
            subsystem2: per_subsystem[1].clone(),
        });
    }
    let [w1, w2] = witnesses;
    let verdict_of = |w: &Option<OnticityWitness>| {
        if w.is_some() {
            Onticity::Violation
        } else {
            Onticity::Ontic
        }
    };
    Ok(SubsystemOnticityReport {
        verdicts: [
            SubsystemOnticityVerdict { subsystem: 1, verdict: verdict_of(&w1), witness: w1 },
            SubsystemOnticityVerdict { subsystem: 2, verdict: verdict_of(&w2), witness: w2 },
        ],
        marginals,
    })
}

/// Per-point (subsystem-1, subsystem-2) labels induced by the composite's
/// state label map: each point inherits the factor labels of its assigned
/// preparation class.
fn point_labels_from_map(
    composite: &CompositeModel,
    label_map: &StateLabelMap,
) -> Vec<(String, String)> {
    let model = composite.model();
    (0..model.space().len())
        .map(|point| {
            let rep = label_map.class_representative(label_map.class_of_point(point));
            composite.factor_labels()[rep].clone()
        })
        .collect()
}

/// Splits each composite preparation's state label into its tensor factors
/// and verifies that both subsystem-label marginals are point masses.
///
/// The factors are taken from each preparation's declared product state; the
/// point-mass check runs through the label map constructed on the composite,
/// so the split is validated against the model rather than assumed.
pub fn product_label_coordinates(
    composite: &CompositeModel,
    eps: f64,
) -> Result<Vec<ProductLabelSplit>, RepresentationError> {
    let model = composite.model();
    let label_map = construct_label_map(model, eps)?;
    let report = onticity_from_point_labels(model, &point_labels_from_map(composite, &label_map), eps)?;
    for (v, verdict) in report.verdicts.iter().enumerate() {
        if verdict.verdict == Onticity::Violation {
            let witness = verdict.witness.as_ref().expect("violation carries witness");
            return Err(RepresentationError::LabelMarginalNotPointMass {
                label: witness.prep_label.clone(),
                subsystem: v + 1,
            });
        }
    }
    Ok(model
        .preparations()
        .iter()
        .zip(composite.products())
        .map(|(prep, product)| ProductLabelSplit {
            prep_label: prep.label().to_owned(),
            factor1: product.factor1().clone(),
            factor2: product.factor2().clone(),
        })
        .collect())
}

/// Checks that each subsystem's state-label component is uniquely fixed under
/// every preparation of a psi-ontic composite model, using labels derived
/// from the composite's own label map.
pub fn subsystem_onticity_check(
    composite: &CompositeModel,
    eps: f64,
) -> Result<SubsystemOnticityReport, RepresentationError> {
    let model = composite.model();
    let label_map = construct_label_map(model, eps)?;
    onticity_from_point_labels(model, &point_labels_from_map(composite, &label_map), eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{
        pip_compose, FiniteOnticSpace, FiniteOntologicalModel, PreparationMeasure,
    };
    use crate::quantum::{tensor, PureState};

    fn prep(label: &str, state: PureState, weights: &[f64]) -> PreparationMeasure {
        PreparationMeasure::new(label, state, weights.to_vec()).unwrap()
    }

    fn model(preps: Vec<PreparationMeasure>, points: &[&str]) -> FiniteOntologicalModel {
        let space = FiniteOnticSpace::from_names(points.iter().copied()).unwrap();
        FiniteOntologicalModel::new(2, space, preps, vec![]).unwrap()
    }

    #[test]
    fn label_map_assigns_supports_and_default() {
        let m = model(
            vec![
                prep("zero", PureState::zero(), &[0.5, 0.5, 0.0, 0.0]),
                prep("plus", PureState::plus(), &[0.0, 0.0, 1.0, 0.0]),
            ],
            &["a", "b", "c", "d"],
        );
        let map = construct_label_map(&m, 1e-12).unwrap();
        assert_eq!(map.label_of_point(&m, 0), "zero");
        assert_eq!(map.label_of_point(&m, 1), "zero");
        assert_eq!(map.label_of_point(&m, 2), "plus");
        assert_eq!(map.label_of_point(&m, 3), "zero"); // default
        assert!(!map.is_assigned(3));
        assert_eq!(map.default_label(&m), "zero");
    }

    #[test]
    fn label_map_single_preparation_is_constant() {
        let m = model(vec![prep("only", PureState::zero(), &[0.25, 0.75])], &["a", "b"]);
        let map = construct_label_map(&m, 1e-12).unwrap();
        assert_eq!(map.label_of_point(&m, 0), "only");
        assert_eq!(map.label_of_point(&m, 1), "only");
    }

    #[test]
    fn label_map_rejects_overlapping_supports() {
        let m = model(
            vec![
                prep("zero", PureState::zero(), &[0.5, 0.5]),
                prep("plus", PureState::plus(), &[0.0, 1.0]),
            ],
            &["a", "b"],
        );
        let err = construct_label_map(&m, 1e-12).unwrap_err();
        match err {
            RepresentationError::PsiEpistemicInput { label_a, label_b, overlap } => {
                assert_eq!(label_a, "zero");
                assert_eq!(label_b, "plus");
                assert!((overlap - 0.5).abs() < 1e-12);
            }
            other => panic!("expected PsiEpistemicInput, got {other:?}"),
        }
    }

    #[test]
    fn label_map_requires_a_preparation() {
        let m = model(vec![], &["a"]);
        assert!(matches!(construct_label_map(&m, 1e-12), Err(RepresentationError::NoPreparations)));
    }

    #[test]
    fn fiber_decomposition_restricts_and_normalizes() {
        let m = model(
            vec![
                prep("zero", PureState::zero(), &[0.5, 0.5, 0.0, 0.0]),
                prep("plus", PureState::plus(), &[0.0, 0.0, 1.0, 0.0]),
            ],
            &["a", "b", "c", "d"],
        );
        let map = construct_label_map(&m, 1e-12).unwrap();
        let dec = fiber_decomposition(&m, &map).unwrap();
        assert_eq!(dec.fiber_points("zero").unwrap(), &[0, 1, 3]);
        assert_eq!(dec.fiber_points("plus").unwrap(), &[2]);
        assert_eq!(dec.conditional_measures()["zero"], vec![0.5, 0.5, 0.0]);
        assert_eq!(dec.conditional_measures()["plus"], vec![1.0]);
        assert_eq!(dec.default_label(), "zero");
    }

    #[test]
    fn fiber_decomposition_rejects_foreign_label_map() {
        let m1 = model(vec![prep("p", PureState::zero(), &[1.0, 0.0])], &["a", "b"]);
        let m2 = model(vec![prep("p", PureState::zero(), &[1.0, 0.0, 0.0])], &["a", "b", "c"]);
        let map = construct_label_map(&m1, 1e-12).unwrap();
        assert!(matches!(
            fiber_decomposition(&m2, &map),
            Err(RepresentationError::InconsistentLabelMap(_))
        ));
    }

    #[test]
    fn delta_form_holds_for_valid_decomposition() {
        let m = model(
            vec![
                prep("zero", PureState::zero(), &[0.4, 0.6, 0.0]),
                prep("plus", PureState::plus(), &[0.0, 0.0, 1.0]),
            ],
            &["a", "b", "c"],
        );
        let map = construct_label_map(&m, 1e-12).unwrap();
        let dec = fiber_decomposition(&m, &map).unwrap();
        let report = verify_delta_form(&m, &dec);
        assert!(report.holds);
        assert!(report.max_error < 1e-12);
    }

    #[test]
    fn delta_form_detects_moved_point() {
        // Move point "b" (mass 0.5 under "zero") from zero's fiber into
        // plus's fiber; the reported error equals the moved mass.
        let m = model(
            vec![
                prep("zero", PureState::zero(), &[0.5, 0.5, 0.0]),
                prep("plus", PureState::plus(), &[0.0, 0.0, 1.0]),
            ],
            &["a", "b", "c"],
        );
        let mut fibers = BTreeMap::new();
        fibers.insert("zero".to_owned(), vec![0]);
        fibers.insert("plus".to_owned(), vec![1, 2]);
        let mut nu = BTreeMap::new();
        nu.insert("zero".to_owned(), vec![1.0]);
        nu.insert("plus".to_owned(), vec![0.0, 1.0]);
        let mut fiber_of = BTreeMap::new();
        fiber_of.insert("zero".to_owned(), "zero".to_owned());
        fiber_of.insert("plus".to_owned(), "plus".to_owned());
        let dec = FiberDecomposition::from_parts(fibers, nu, fiber_of, "zero".to_owned());
        let report = verify_delta_form(&m, &dec);
        assert!(!report.holds);
        assert!((report.max_error - 0.5).abs() < 1e-12);
    }

    #[test]
    fn delta_form_vacuous_on_empty_preparations() {
        let m = model(vec![], &["a"]);
        let dec = FiberDecomposition::from_parts(
            BTreeMap::new(),
            BTreeMap::new(),
            BTreeMap::new(),
            String::new(),
        );
        let report = verify_delta_form(&m, &dec);
        assert!(report.holds);
        assert_eq!(report.max_error, 0.0);
    }

    fn delta_qubit_model() -> FiniteOntologicalModel {
        model(
            vec![
                prep("zero", PureState::zero(), &[1.0, 0.0]),
                prep("plus", PureState::plus(), &[0.0, 1.0]),
            ],
            &["l0", "lp"],
        )
    }

    #[test]
    fn pip_composite_labels_split_per_preparation() {
        let m = delta_qubit_model();
        let composite = pip_compose(&m, &m).unwrap();
        let splits = product_label_coordinates(&composite, 1e-12).unwrap();
        assert_eq!(splits.len(), 4);
        for (split, product) in splits.iter().zip(composite.products()) {
            assert!(split.factor1.ray_equal(product.factor1()));
            assert!(split.factor2.ray_equal(product.factor2()));
        }
        // Four distinct (factor1, factor2) pairs over the 4-point space.
        let zero = PureState::zero();
        let plus = PureState::plus();
        let expected = [
            (&zero, &zero),
            (&zero, &plus),
            (&plus, &zero),
            (&plus, &plus),
        ];
        for (split, (f1, f2)) in splits.iter().zip(expected) {
            assert!(split.factor1.ray_equal(f1));
            assert!(split.factor2.ray_equal(f2));
        }
    }

    #[test]
    fn pip_composite_is_subsystem_ontic() {
        let m = delta_qubit_model();
        let composite = pip_compose(&m, &m).unwrap();
        let report = subsystem_onticity_check(&composite, 1e-12).unwrap();
        assert!(report.is_ontic());
        for marginal in &report.marginals {
            assert_eq!(marginal.subsystem1.len(), 1);
            assert_eq!(marginal.subsystem2.len(), 1);
            for mass in marginal.subsystem1.values().chain(marginal.subsystem2.values()) {
                assert!((mass - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn correlated_residuals_keep_point_mass_labels() {
        // Two residual points per (state, subsystem); the composite weights
        // correlate residuals perfectly while the joint supports of the four
        // preparations remain disjoint. Subsystem labels must still be sharp.
        use crate::ontology::CompositeModel;

        let factor_points = ["z0", "z1", "p0", "p1"];
        let factor_space = FiniteOnticSpace::from_names(factor_points).unwrap();
        let composite_points: Vec<String> = factor_points
            .iter()
            .flat_map(|a| factor_points.iter().map(move |b| format!("({a},{b})")))
            .collect();
        let space = FiniteOnticSpace::new(composite_points).unwrap();
        let n = 16;
        let zero = PureState::zero();
        let plus = PureState::plus();
        // Residual blocks: zero lives on {z0,z1} (indices 0,1), plus on
        // {p0,p1} (indices 2,3).
        let block = |s: &PureState| if s.ray_equal(&zero) { [0usize, 1] } else { [2, 3] };
        let mut preps = Vec::new();
        for (label, s1, s2) in [
            ("00", &zero, &zero),
            ("0+", &zero, &plus),
            ("+0", &plus, &zero),
            ("++", &plus, &plus),
        ] {
            let mut weights = vec![0.0; n];
            // Perfectly correlated residuals: only (r, r) pairs occur.
            for (i, &a) in block(s1).iter().enumerate() {
                let b = block(s2)[i];
                weights[a * 4 + b] = 0.5;
            }
            preps.push(prep(label, tensor(s1, s2).joint().clone(), &weights));
        }
        let m = FiniteOntologicalModel::new(4, space, preps, vec![]).unwrap();
        let composite =
            CompositeModel::from_parts(m, factor_space.clone(), factor_space).unwrap();
        let report = subsystem_onticity_check(&composite, 1e-12).unwrap();
        assert!(report.is_ontic());
        let splits = product_label_coordinates(&composite, 1e-12).unwrap();
        assert_eq!(splits.len(), 4);
    }

    #[test]
    fn externally_supplied_inconsistent_labels_yield_violation() {
        // A single preparation spread over two points that carry different
        // externally assigned subsystem-1 labels: the checker must witness
        // the two labels.
        let m = model(
            vec![prep("psi", PureState::zero(), &[0.5, 0.5])],
            &["(a,x)", "(b,x)"],
        );
        let labels = vec![
            ("A".to_owned(), "X".to_owned()),
            ("B".to_owned(), "X".to_owned()),
        ];
        let report = onticity_from_point_labels(&m, &labels, 1e-12).unwrap();
        assert_eq!(report.verdicts[0].verdict, Onticity::Violation);
        let witness = report.verdicts[0].witness.as_ref().unwrap();
        assert_eq!(witness.prep_label, "psi");
        assert!(
            (witness.label_a == "A" && witness.label_b == "B")
                || (witness.label_a == "B" && witness.label_b == "A")
        );
        assert_eq!(report.verdicts[1].verdict, Onticity::Ontic);
    }

    #[test]
    fn single_preparation_composite_is_ontic() {
        let space = FiniteOnticSpace::from_names(["a"]).unwrap();
        let m = FiniteOntologicalModel::new(
            2,
            space,
            vec![prep("zero", PureState::zero(), &[1.0])],
            vec![],
        )
        .unwrap();
        let composite = pip_compose(&m, &m).unwrap();
        let report = subsystem_onticity_check(&composite, 1e-12).unwrap();
        assert!(report.is_ontic());
    }
}
