//! A psi-epistemic qubit model over the ontic space (Bloch direction, hidden
//! variable x ∈ [0,1]).
//!
//! A preferred axis through `|0⟩` singles out the open upper hemisphere
//! (polar angle θ < π/2). Inside it, the region E₀ collects the points with
//! `x < (1 − sin θ_λ)/2`. A state ψ in the hemisphere is prepared as a
//! mixture: with weight `1 − w_ψ` the delta branch (λ̂ = ψ̂, x uniform on
//! [w_ψ, 1]) and with weight `w_ψ = (1 − sin θ_ψ)/2` a draw from a fixed
//! distribution over E₀. Distinct states therefore share the E₀ component,
//! which makes the model psi-epistemic, while measurement responses ordered
//! relative to `|0⟩` still reproduce the Born rule: `(1 − sin θ_λ)/2` is
//! exactly the minimum of `|⟨λ|b₀⟩|²` over ordered bases, so every E₀ point
//! answers with the favored outcome no matter which basis is measured.
//!
//! Samplers take explicit seeded generators; the parallel estimator derives
//! one counter-mode stream per worker and merges counts by summation, so a
//! given (seed, sample count, worker count) is bit-reproducible.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::quantum::{ProjectiveMeasurement, PureState, ALGEBRAIC_TOL};
use num_complex::Complex64;

#[derive(Debug, Error)]
pub enum LewisError {
    #[error("expected a qubit state (dimension 2), got dimension {dim}")]
    NotQubit { dim: usize },
    #[error("polar angle {theta} outside the allowed domain {domain}")]
    DomainError { theta: f64, domain: &'static str },
    #[error("state at polar angle {theta} lies outside the open upper hemisphere (θ < π/2)")]
    OutsideHemisphere { theta: f64 },
    #[error("hidden variable x = {x} outside [0, 1]")]
    HiddenVariableOutOfRange { x: f64 },
    #[error("the two states are the same ray; overlap is defined for distinct states")]
    IdenticalRays,
}

/// Qubit state at polar angle `theta` from `|0⟩` and azimuth `phi`:
/// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`, so `|⟨λ|0⟩|² = cos²(θ/2)`.
pub fn from_bloch(theta: f64, phi: f64) -> PureState {
    let half = theta / 2.0;
    PureState::new(vec![
        Complex64::new(half.cos(), 0.0),
        Complex64::from_polar(half.sin(), phi),
    ])
    .expect("Bloch parameterization is normalized")
}

/// Polar angle from `|0⟩` in radians: `θ = 2·acos(|⟨0|λ⟩|)`.
pub fn polar_angle(state: &PureState) -> Result<f64, LewisError> {
    if state.dim() != 2 {
        return Err(LewisError::NotQubit { dim: state.dim() });
    }
    Ok(2.0 * state.amplitudes()[0].norm().clamp(0.0, 1.0).acos())
}

/// True iff the state lies strictly inside the upper hemisphere (θ < π/2).
pub fn in_upper_hemisphere(state: &PureState) -> Result<bool, LewisError> {
    Ok(polar_angle(state)? < FRAC_PI_2)
}

/// The E₀-region weight `w = (1 − sin θ)/2` for a polar angle in [0, π].
pub fn epistemic_weight(theta_psi: f64) -> Result<f64, LewisError> {
    if !(0.0..=PI).contains(&theta_psi) {
        return Err(LewisError::DomainError { theta: theta_psi, domain: "[0, π]" });
    }
    Ok((1.0 - theta_psi.sin()) / 2.0)
}

/// The minimum of `|⟨λ|b₀⟩|²` over all ordered bases, for an ontic direction
/// at polar angle `theta_lambda` inside the upper hemisphere. Equals
/// `(1 − sin θ_λ)/2`: the favored direction can be pushed at most to the
/// equator, a Bloch angle of θ_λ + π/2 away.
pub fn min_favored_probability(theta_lambda: f64) -> Result<f64, LewisError> {
    if !(0.0..FRAC_PI_2).contains(&theta_lambda) {
        return Err(LewisError::DomainError { theta: theta_lambda, domain: "[0, π/2)" });
    }
    Ok((1.0 - theta_lambda.sin()) / 2.0)
}

/// One ontic state: a Bloch direction plus the hidden variable x.
#[derive(Debug, Clone)]
pub struct LewisOnticPoint {
    lambda_hat: PureState,
    x: f64,
}

impl LewisOnticPoint {
    pub fn new(lambda_hat: PureState, x: f64) -> Result<Self, LewisError> {
        if lambda_hat.dim() != 2 {
            return Err(LewisError::NotQubit { dim: lambda_hat.dim() });
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(LewisError::HiddenVariableOutOfRange { x });
        }
        Ok(Self { lambda_hat, x })
    }

    pub fn lambda_hat(&self) -> &PureState {
        &self.lambda_hat
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn polar_angle(&self) -> f64 {
        polar_angle(&self.lambda_hat).expect("validated as qubit")
    }

    /// Membership in E₀: direction strictly inside the upper hemisphere and
    /// `x` strictly below `(1 − sin θ_λ)/2`.
    pub fn in_e0(&self) -> bool {
        let theta = self.polar_angle();
        theta < FRAC_PI_2 && self.x < (1.0 - theta.sin()) / 2.0
    }
}

/// Choice of the fixed distribution over E₀. The Born-rule argument only
/// needs the support to lie inside E₀, so this is a configuration knob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum E0Distribution {
    /// Solid-angle measure on the upper hemisphere times Lebesgue measure in
    /// x, restricted to E₀ and normalized.
    #[default]
    UniformSolidAngle,
    /// Same construction with the polar angle (rather than its cosine) drawn
    /// uniformly; a deliberately different measure for sensitivity checks.
    UniformPolarAngle,
}

/// Draws one point from the chosen E₀ distribution by rejection from the
/// enclosing product measure. Every returned point satisfies `in_e0`.
pub fn sample_e0<R: Rng + ?Sized>(distribution: E0Distribution, rng: &mut R) -> LewisOnticPoint {
    loop {
        let theta = match distribution {
            E0Distribution::UniformSolidAngle => {
                let cos_theta: f64 = rng.random();
                cos_theta.acos()
            }
            E0Distribution::UniformPolarAngle => rng.random::<f64>() * FRAC_PI_2,
        };
        let phi = rng.random::<f64>() * TAU;
        let x = rng.random::<f64>() * 0.5;
        if x < (1.0 - theta.sin()) / 2.0 {
            let point = LewisOnticPoint { lambda_hat: from_bloch(theta, phi), x };
            assert!(point.in_e0(), "rejection sampler produced a point outside its region");
            return point;
        }
    }
}

/// The epistemic state prepared for a qubit state in the upper hemisphere:
/// a delta branch at the state's own direction mixed with the shared E₀
/// component.
#[derive(Debug, Clone)]
pub struct LewisEpistemicState {
    psi: PureState,
    theta: f64,
    /// Probability of the E₀ branch; also the lower end of the delta
    /// branch's x-interval. Zero in the delta-only fallback.
    e0_weight: f64,
    e0_distribution: E0Distribution,
}

impl LewisEpistemicState {
    /// Standard construction; requires θ_ψ < π/2 strictly.
    pub fn new(psi: &PureState) -> Result<Self, LewisError> {
        Self::with_e0_distribution(psi, E0Distribution::default())
    }

    pub fn with_e0_distribution(
        psi: &PureState,
        e0_distribution: E0Distribution,
    ) -> Result<Self, LewisError> {
        let theta = polar_angle(psi)?;
        if theta >= FRAC_PI_2 {
            return Err(LewisError::OutsideHemisphere { theta });
        }
        let e0_weight = epistemic_weight(theta).expect("θ < π/2 is inside [0, π]");
        Ok(Self { psi: psi.clone(), theta, e0_weight, e0_distribution })
    }

    /// Fallback for states outside the upper hemisphere: a pure delta branch
    /// with x uniform on [0, 1]. Still reproduces the Born rule (the delta
    /// branch alone yields `P(favored) = |⟨ψ|b₀⟩|²` when its x-interval is
    /// the whole unit interval), but it is an extension beyond the standard
    /// construction and is never used implicitly.
    pub fn delta_only(psi: &PureState) -> Result<Self, LewisError> {
        let theta = polar_angle(psi)?;
        Ok(Self {
            psi: psi.clone(),
            theta,
            e0_weight: 0.0,
            e0_distribution: E0Distribution::default(),
        })
    }

    pub fn quantum_state(&self) -> &PureState {
        &self.psi
    }

    pub fn polar_angle(&self) -> f64 {
        self.theta
    }

    /// `w_ψ`, the weight of the E₀ branch.
    pub fn weight_e0(&self) -> f64 {
        self.e0_weight
    }

    /// Draws one ontic point from the epistemic state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LewisOnticPoint {
        if rng.random::<f64>() < self.e0_weight {
            sample_e0(self.e0_distribution, rng)
        } else {
            self.sample_delta_branch(rng)
        }
    }

    /// Draws from the delta branch only: λ̂ = ψ̂ and x uniform on [w_ψ, 1].
    pub fn sample_delta_branch<R: Rng + ?Sized>(&self, rng: &mut R) -> LewisOnticPoint {
        let x = self.e0_weight + rng.random::<f64>() * (1.0 - self.e0_weight);
        LewisOnticPoint { lambda_hat: self.psi.clone(), x }
    }
}

/// A qubit basis ordered relative to `|0⟩`: the outcome-0 direction is the
/// element with the larger `|⟨b|0⟩|²`. At equality within 1e-12 the tie is
/// broken toward the lexicographically larger phase-canonical amplitude
/// tuple, so the ordering never depends on input order.
#[derive(Debug, Clone)]
pub struct OrderedBasis {
    b0: PureState,
    b1: PureState,
}

impl OrderedBasis {
    /// Basis vector associated with outcome 0 (the favored outcome).
    pub fn outcome0(&self) -> &PureState {
        &self.b0
    }

    /// Basis vector associated with outcome 1.
    pub fn outcome1(&self) -> &PureState {
        &self.b1
    }
}

fn canonical_key(state: &PureState) -> [f64; 4] {
    let canon = state.phase_canonical();
    let a = canon.amplitudes();
    [a[0].re, a[0].im, a[1].re, a[1].im]
}

/// Orders a qubit measurement basis relative to `|0⟩`.
pub fn order_basis(measurement: &ProjectiveMeasurement) -> Result<OrderedBasis, LewisError> {
    if measurement.dim() != 2 {
        return Err(LewisError::NotQubit { dim: measurement.dim() });
    }
    let a = &measurement.basis()[0];
    let b = &measurement.basis()[1];
    let qa = a.amplitudes()[0].norm_sqr();
    let qb = b.amplitudes()[0].norm_sqr();
    let a_first = if (qa - qb).abs() <= ALGEBRAIC_TOL {
        canonical_key(a) > canonical_key(b)
    } else {
        qa > qb
    };
    let (b0, b1) = if a_first { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
    Ok(OrderedBasis { b0, b1 })
}

/// Deterministic response: outcome 0 iff `|⟨λ̂|b₀⟩|² − x > 0`, outcome 1
/// otherwise (ties go to outcome 1).
pub fn response(basis: &OrderedBasis, point: &LewisOnticPoint) -> usize {
    let favored = basis
        .b0
        .inner_product(point.lambda_hat())
        .expect("qubit dimensions validated")
        .norm_sqr();
    usize::from(favored - point.x() <= 0.0)
}

/// A Monte Carlo estimate of the favored-outcome probability against its
/// Born value.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BornCheck {
    /// Fraction of samples answering outcome 0.
    pub estimate: f64,
    /// Binomial standard error `√(p(1−p)/n)` at the Born value `p`.
    pub std_error: f64,
    /// `|⟨b₀|ψ⟩|²`.
    pub born: f64,
    pub deviation: f64,
    /// Deviation in units of the standard error; 0 when both vanish.
    pub deviation_sigmas: f64,
}

/// Estimates the favored-outcome probability for `psi` under `measurement`
/// by sampling the epistemic state and applying the response function.
pub fn born_check(
    psi: &PureState,
    measurement: &ProjectiveMeasurement,
    n_samples: usize,
    seed: u64,
) -> Result<BornCheck, LewisError> {
    let state = LewisEpistemicState::new(psi)?;
    born_check_sampled(&state, measurement, n_samples, seed, 1)
}

/// [`born_check`] over a prepared epistemic state, with `workers` independent
/// generator streams whose counts are merged by summation.
pub fn born_check_sampled(
    state: &LewisEpistemicState,
    measurement: &ProjectiveMeasurement,
    n_samples: usize,
    seed: u64,
    workers: usize,
) -> Result<BornCheck, LewisError> {
    assert!(n_samples > 0, "at least one sample is required");
    let workers = workers.clamp(1, n_samples);
    let basis = order_basis(measurement)?;
    let born = basis.outcome0().inner_product(state.quantum_state()).expect("qubits").norm_sqr();

    let count_outcome0 = |worker: u64, n: usize| -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(worker);
        let mut hits = 0u64;
        for _ in 0..n {
            let point = state.sample(&mut rng);
            if response(&basis, &point) == 0 {
                hits += 1;
            }
        }
        hits
    };

    let base = n_samples / workers;
    let extra = n_samples % workers;
    let chunk = |w: usize| base + usize::from(w < extra);
    let hits: u64 = if workers == 1 {
        count_outcome0(0, n_samples)
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| scope.spawn(move || count_outcome0(w as u64, chunk(w))))
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).sum()
        })
    };

    let estimate = hits as f64 / n_samples as f64;
    let std_error = (born * (1.0 - born) / n_samples as f64).max(0.0).sqrt();
    let deviation = (estimate - born).abs();
    let deviation_sigmas = if std_error > 0.0 {
        deviation / std_error
    } else if deviation == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(BornCheck { estimate, std_error, born, deviation, deviation_sigmas })
}

/// Analytic total-variation overlap of two distinct states strictly inside
/// the upper hemisphere: `min(w_ψ, w_φ)`. The two epistemic states share the
/// E₀ component scaled by their weights, while their delta branches are
/// mutually singular, so the shared mass is exactly the smaller E₀ weight.
pub fn overlap(psi: &PureState, phi: &PureState) -> Result<f64, LewisError> {
    let w_psi = LewisEpistemicState::new(psi)?.weight_e0();
    let w_phi = LewisEpistemicState::new(phi)?.weight_e0();
    if psi.ray_equal(phi) {
        return Err(LewisError::IdenticalRays);
    }
    Ok(w_psi.min(w_phi))
}

/// Analytic overlap alongside an independent Monte Carlo estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OverlapEstimate {
    pub analytic: f64,
    /// `min` of the two sampled E₀-hit frequencies.
    pub mc_estimate: f64,
    /// Binomial standard error of the binding (smaller) frequency.
    pub mc_std_error: f64,
    pub samples: usize,
}

/// Estimates the shared E₀ mass by sampling each epistemic state and counting
/// region membership through the E₀ predicate, independently of the analytic
/// weight formula.
pub fn overlap_mc(
    psi: &PureState,
    phi: &PureState,
    n_samples: usize,
    seed: u64,
) -> Result<OverlapEstimate, LewisError> {
    assert!(n_samples > 0, "at least one sample is required");
    let analytic = overlap(psi, phi)?;
    let hit_fraction = |state: &LewisEpistemicState, stream: u64| -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let hits = (0..n_samples).filter(|_| state.sample(&mut rng).in_e0()).count();
        hits as f64 / n_samples as f64
    };
    let f_psi = hit_fraction(&LewisEpistemicState::new(psi)?, 0);
    let f_phi = hit_fraction(&LewisEpistemicState::new(phi)?, 1);
    let mc_estimate = f_psi.min(f_phi);
    let mc_std_error = (mc_estimate * (1.0 - mc_estimate) / n_samples as f64).max(0.0).sqrt();
    Ok(OverlapEstimate { analytic, mc_estimate, mc_std_error, samples: n_samples })
}
