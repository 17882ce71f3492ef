//! `ontolab` — validate model files, classify preparation overlaps, extract
//! state-label decompositions, run the product-state exclusion experiment,
//! and exercise the psi-epistemic qubit model.
//!
//! All numeric output is JSON on stdout (optionally mirrored to `--report`).
//! Exit codes: 0 on success, 1 when a requested verdict is negative, 2 on
//! usage or input errors. Runs with identical inputs and seeds produce
//! byte-identical reports.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ontolab::io::{decomposition_to_file, RunConfig};
use ontolab::lewis::{
    born_check_sampled, from_bloch, order_basis, overlap_mc, LewisEpistemicState,
};
use ontolab::ontology::DEFAULT_PRODUCT_SPACE_CAP;
use ontolab::pbr::run_pbr_experiment_capped;
use ontolab::quantum::ProjectiveMeasurement;
use ontolab::representation::{construct_label_map, fiber_decomposition, verify_delta_form};
use ontolab::{load_model, ModelClass, DEFAULT_EPS};

#[derive(Parser)]
#[command(name = "ontolab", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ReportArgs {
    /// Also write the JSON report to this path.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Load a model file, check every invariant, and report its Born residual.
    Validate {
        model: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Classify a model as psi-ontic or psi-epistemic from its support overlaps.
    Onticity {
        model: PathBuf,
        /// Support threshold: weights at or below this count as zero.
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        /// Exit with code 1 unless the model is psi-ontic.
        #[arg(long)]
        require_ontic: bool,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Build the state label map and fiber decomposition of a psi-ontic model.
    Decompose {
        model: PathBuf,
        /// Where to write the decomposition JSON.
        #[arg(short, long, value_name = "PATH")]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Compose a qubit model with itself and run the four-preparation
    /// exclusion experiment.
    Pbr {
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        /// Cap on the composed product space size.
        #[arg(long, default_value_t = DEFAULT_PRODUCT_SPACE_CAP)]
        cap: usize,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Monte Carlo checks of the psi-epistemic qubit model.
    Lewis {
        #[command(subcommand)]
        command: LewisCommand,
    },
}

#[derive(Subcommand)]
enum LewisCommand {
    /// Estimate the favored-outcome probability for a state at polar angle
    /// --theta measured in the basis at polar angle --basis-angle (both in
    /// radians, azimuth 0) and compare with the Born value.
    BornCheck {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        basis_angle: f64,
        #[arg(long, default_value_t = RunConfig::default().mc_samples)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of independent sampling streams; counts merge by summation.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Use the delta-only fallback for states at or beyond the equator.
        #[arg(long)]
        allow_outside_hemisphere: bool,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Analytic overlap of two states at polar angles --theta1 and --theta2
    /// (azimuths 0 and π/2) alongside an independent Monte Carlo estimate.
    Overlap {
        #[arg(long)]
        theta1: f64,
        #[arg(long)]
        theta2: f64,
        #[arg(long, default_value_t = RunConfig::default().mc_samples)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        report: ReportArgs,
    },
}

/// Exit status of a successfully parsed command.
enum Verdict {
    Ok,
    Negative,
}

fn emit<T: Serialize>(value: &T, report: &ReportArgs) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).expect("report serialization is infallible");
    println!("{text}");
    if let Some(path) = &report.report {
        std::fs::write(path, format!("{text}\n"))
            .map_err(|e| format!("failed to write report {}: {e}", path.display()))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ValidateReport {
    path: String,
    dimension: usize,
    ontic_points: usize,
    preparations: usize,
    responses: usize,
    born_residual: f64,
    valid: bool,
}

#[derive(Serialize)]
struct OnticityReport {
    eps: f64,
    #[serde(flatten)]
    overlaps: ontolab::OverlapReport,
}

#[derive(Serialize)]
struct DecomposeReport {
    eps: f64,
    default_label: String,
    fibers: usize,
    delta_form_holds: bool,
    max_reconstruction_error: f64,
    output: String,
}

#[derive(Serialize)]
struct BornCheckReport {
    estimate: f64,
    stderr: f64,
    born: f64,
    deviation_sigmas: f64,
}

#[derive(Serialize)]
struct OverlapReportOut {
    analytic: f64,
    mc_estimate: f64,
    mc_stderr: f64,
    samples: usize,
}

fn run(cli: Cli) -> Result<Verdict, String> {
    match cli.command {
        Command::Validate { model, report } => {
            let loaded = load_model(&model).map_err(|e| e.to_string())?;
            let out = ValidateReport {
                path: model.display().to_string(),
                dimension: loaded.dimension(),
                ontic_points: loaded.space().len(),
                preparations: loaded.preparations().len(),
                responses: loaded.responses().len(),
                born_residual: loaded.born_residual(),
                valid: true,
            };
            emit(&out, &report)?;
            Ok(Verdict::Ok)
        }
        Command::Onticity { model, eps, require_ontic, report } => {
            let loaded = load_model(&model).map_err(|e| e.to_string())?;
            let overlaps = loaded.overlap_matrix(eps);
            let negative = require_ontic && overlaps.classification == ModelClass::PsiEpistemic;
            emit(&OnticityReport { eps, overlaps }, &report)?;
            Ok(if negative { Verdict::Negative } else { Verdict::Ok })
        }
        Command::Decompose { model, output, eps, report } => {
            let loaded = load_model(&model).map_err(|e| e.to_string())?;
            let label_map = match construct_label_map(&loaded, eps) {
                Ok(map) => map,
                Err(e @ ontolab::RepresentationError::PsiEpistemicInput { .. }) => {
                    // A psi-epistemic input is a negative verdict, not a
                    // usage error: no label map exists for it.
                    eprintln!("{e}");
                    return Ok(Verdict::Negative);
                }
                Err(e) => return Err(e.to_string()),
            };
            let decomposition =
                fiber_decomposition(&loaded, &label_map).map_err(|e| e.to_string())?;
            let delta = verify_delta_form(&loaded, &decomposition);
            let file = decomposition_to_file(&decomposition, &loaded);
            let text = serde_json::to_string_pretty(&file).expect("serializable");
            std::fs::write(&output, text + "\n")
                .map_err(|e| format!("failed to write {}: {e}", output.display()))?;
            let out = DecomposeReport {
                eps,
                default_label: decomposition.default_label().to_owned(),
                fibers: decomposition.fibers().len(),
                delta_form_holds: delta.holds,
                max_reconstruction_error: delta.max_error,
                output: output.display().to_string(),
            };
            emit(&out, &report)?;
            Ok(if delta.holds { Verdict::Ok } else { Verdict::Negative })
        }
        Command::Pbr { model, eps, cap, report } => {
            let loaded = load_model(&model).map_err(|e| e.to_string())?;
            let pbr_report =
                run_pbr_experiment_capped(&loaded, eps, cap).map_err(|e| e.to_string())?;
            emit(&pbr_report, &report)?;
            Ok(Verdict::Ok)
        }
        Command::Lewis { command } => run_lewis(command),
    }
}

fn run_lewis(command: LewisCommand) -> Result<Verdict, String> {
    match command {
        LewisCommand::BornCheck {
            theta,
            basis_angle,
            samples,
            seed,
            workers,
            allow_outside_hemisphere,
            report,
        } => {
            let psi = from_bloch(theta, 0.0);
            let state = if allow_outside_hemisphere {
                LewisEpistemicState::new(&psi)
                    .or_else(|_| LewisEpistemicState::delta_only(&psi))
            } else {
                LewisEpistemicState::new(&psi)
            }
            .map_err(|e| e.to_string())?;
            let basis = ProjectiveMeasurement::new(vec![
                from_bloch(basis_angle, 0.0),
                from_bloch(std::f64::consts::PI - basis_angle, std::f64::consts::PI),
            ])
            .map_err(|e| e.to_string())?;
            // Construction sanity: ordering must succeed for any qubit basis.
            order_basis(&basis).map_err(|e| e.to_string())?;
            let check = born_check_sampled(&state, &basis, samples, seed, workers)
                .map_err(|e| e.to_string())?;
            let out = BornCheckReport {
                estimate: check.estimate,
                stderr: check.std_error,
                born: check.born,
                deviation_sigmas: check.deviation_sigmas,
            };
            emit(&out, &report)?;
            Ok(Verdict::Ok)
        }
        LewisCommand::Overlap { theta1, theta2, samples, seed, report } => {
            let psi = from_bloch(theta1, 0.0);
            let phi = from_bloch(theta2, std::f64::consts::FRAC_PI_2);
            let estimate = overlap_mc(&psi, &phi, samples, seed).map_err(|e| e.to_string())?;
            let out = OverlapReportOut {
                analytic: estimate.analytic,
                mc_estimate: estimate.mc_estimate,
                mc_stderr: estimate.mc_std_error,
                samples: estimate.samples,
            };
            emit(&out, &report)?;
            Ok(Verdict::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Negative) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
