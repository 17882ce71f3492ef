//! Finite ontological models of small quantum systems.
//!
//! The crate provides:
//!
//! - [`quantum`]: pure states, projective measurements, Born probabilities,
//!   tensor products, and the entangled basis of the four-preparation
//!   exclusion experiment;
//! - [`ontology`]: finite ontic spaces, preparation measures, stochastic
//!   response tables, support/overlap analysis, product composition under
//!   preparation independence, and marginalization;
//! - [`representation`]: the state label map and fiber decomposition of
//!   psi-ontic models, delta-form verification, and subsystem-onticity
//!   checks for composite models;
//! - [`pbr`]: the quantitative exclusion harness, reporting the mass shared
//!   by the four product preparations and the resulting deviation bound;
//! - [`lewis`]: a psi-epistemic qubit model with seeded Monte Carlo checks
//!   of its Born-rule reproduction and state overlaps;
//! - [`io`]: the JSON model format, decomposition files, and run
//!   configuration.

pub mod io;
pub mod lewis;
mod numeric;
pub mod ontology;
pub mod pbr;
pub mod quantum;
pub mod representation;

pub use io::{load_model, save_model, IoError, ModelFile, RunConfig};
pub use lewis::{LewisEpistemicState, LewisError, LewisOnticPoint, OrderedBasis};
pub use ontology::{
    marginalize, pip_compose, CompositeModel, FiniteOnticSpace, FiniteOntologicalModel,
    ModelClass, OntologyError, OverlapReport, PreparationMeasure, ResponseTable, Subsystem,
    DEFAULT_EPS,
};
pub use pbr::{build_scenario, exclusion_witness, run_pbr_experiment, PbrError, PbrReport, PbrScenario};
pub use quantum::{
    tensor, ProductState, ProjectiveMeasurement, PureState, QuantumError,
};
pub use representation::{
    construct_label_map, fiber_decomposition, subsystem_onticity_check, verify_delta_form,
    FiberDecomposition, RepresentationError, StateLabelMap,
};
