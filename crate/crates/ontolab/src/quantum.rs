//! Pure-state linear algebra for small finite dimensions.
//!
//! States are dense complex amplitude vectors compared up to global phase
//! (ray equality). Measurements are complete orthonormal projective bases.
//! The module also builds the entangled four-outcome basis used by the
//! product-state exclusion experiment, verifying its orthogonality pattern
//! at construction time instead of trusting the algebra.

use num_complex::Complex64;
use thiserror::Error;

/// Tolerance for algebraic identities (normalization, probability sums,
/// Kronecker-product reconstruction).
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// Tolerance for orthonormality and completeness of user-supplied bases.
pub const BASIS_TOL: f64 = 1e-10;

/// Tolerance below which `|⟨a|b⟩|` is considered equal to 1 for ray equality.
pub const RAY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("state of dimension 0 is not allowed")]
    EmptyState,
    #[error("state is not normalized: squared norm is {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },
    #[error("basis has {len} vectors but dimension {dim} requires exactly {dim}")]
    WrongBasisSize { len: usize, dim: usize },
    #[error("basis vectors {i} and {j} are not orthogonal: |⟨b{i}|b{j}⟩| = {overlap}")]
    NotOrthogonal { i: usize, j: usize, overlap: f64 },
    #[error("basis is not complete: max entrywise |Σ_k |b_k⟩⟨b_k| − I| = {residual}")]
    NotComplete { residual: f64 },
    #[error("construction failed validation: {0}")]
    ConstructionInvalid(String),
}

/// A normalized pure state, stored as given and compared up to global phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Validates `Σ |amplitudes_i|² = 1` within [`ALGEBRAIC_TOL`].
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        if amplitudes.is_empty() {
            return Err(QuantumError::EmptyState);
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(QuantumError::NotNormalized { norm_sqr });
        }
        Ok(Self { amplitudes })
    }

    /// Builds a state from arbitrary non-zero amplitudes by normalizing them.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sqr <= 0.0 {
            return Err(QuantumError::NotNormalized { norm_sqr });
        }
        let norm = norm_sqr.sqrt();
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    /// Computational basis state `|k⟩` in the given dimension.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut amplitudes = vec![Complex64::ZERO; dim];
        amplitudes[k] = Complex64::ONE;
        Self { amplitudes }
    }

    /// Qubit `|0⟩`.
    pub fn zero() -> Self {
        Self::basis_state(2, 0)
    }

    /// Qubit `|1⟩`.
    pub fn one() -> Self {
        Self::basis_state(2, 1)
    }

    /// Qubit `|+⟩ = (|0⟩ + |1⟩)/√2`.
    pub fn plus() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { amplitudes: vec![h, h] }
    }

    /// Qubit `|−⟩ = (|0⟩ − |1⟩)/√2`.
    pub fn minus() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { amplitudes: vec![h, -h] }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `⟨self|other⟩`, conjugating `self`.
    pub fn inner_product(&self, other: &PureState) -> Result<Complex64, QuantumError> {
        if self.dim() != other.dim() {
            return Err(QuantumError::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// True iff the two states are the same ray: `|⟨self|other⟩| = 1` within
    /// [`RAY_TOL`]. Global phase is ignored. States of different dimension are
    /// never ray-equal.
    pub fn ray_equal(&self, other: &PureState) -> bool {
        match self.inner_product(other) {
            Ok(ip) => ip.norm() >= 1.0 - RAY_TOL,
            Err(_) => false,
        }
    }

    /// Rotates the global phase so the first non-negligible amplitude is real
    /// and positive. Used for deterministic comparisons between rays.
    pub fn phase_canonical(&self) -> PureState {
        let pivot = self
            .amplitudes
            .iter()
            .find(|a| a.norm() > ALGEBRAIC_TOL)
            .copied()
            .unwrap_or(Complex64::ONE);
        let phase = pivot.conj() / pivot.norm();
        PureState { amplitudes: self.amplitudes.iter().map(|a| a * phase).collect() }
    }
}

/// A complete orthonormal projective measurement basis.
#[derive(Debug, Clone)]
pub struct ProjectiveMeasurement {
    basis: Vec<PureState>,
}

impl ProjectiveMeasurement {
    /// Validates pairwise orthogonality and completeness within [`BASIS_TOL`].
    pub fn new(basis: Vec<PureState>) -> Result<Self, QuantumError> {
        let dim = match basis.first() {
            Some(b) => b.dim(),
            None => return Err(QuantumError::WrongBasisSize { len: 0, dim: 0 }),
        };
        if basis.len() != dim {
            return Err(QuantumError::WrongBasisSize { len: basis.len(), dim });
        }
        for b in &basis {
            if b.dim() != dim {
                return Err(QuantumError::DimensionMismatch { left: dim, right: b.dim() });
            }
        }
        for i in 0..basis.len() {
            for j in (i + 1)..basis.len() {
                let overlap = basis[i].inner_product(&basis[j])?.norm();
                if overlap >= BASIS_TOL {
                    return Err(QuantumError::NotOrthogonal { i, j, overlap });
                }
            }
        }
        // Completeness: Σ_k |b_k⟩⟨b_k| = I entrywise.
        let mut residual = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                let sum: Complex64 = basis
                    .iter()
                    .map(|b| b.amplitudes[r] * b.amplitudes[c].conj())
                    .sum();
                let expected = if r == c { Complex64::ONE } else { Complex64::ZERO };
                residual = residual.max((sum - expected).norm());
            }
        }
        if residual > BASIS_TOL {
            return Err(QuantumError::NotComplete { residual });
        }
        Ok(Self { basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[PureState] {
        &self.basis
    }

    /// Outcome probabilities `P(k) = |⟨b_k|state⟩|²`.
    pub fn born_probabilities(&self, state: &PureState) -> Result<Vec<f64>, QuantumError> {
        if state.dim() != self.dim() {
            return Err(QuantumError::DimensionMismatch { left: self.dim(), right: state.dim() });
        }
        Ok(self
            .basis
            .iter()
            .map(|b| b.inner_product(state).expect("dims checked").norm_sqr())
            .collect())
    }

    /// The computational basis `{|0⟩, …, |dim−1⟩}`.
    pub fn computational(dim: usize) -> Self {
        let basis = (0..dim).map(|k| PureState::basis_state(dim, k)).collect();
        Self { basis }
    }
}

/// A bipartite product state together with its factors.
#[derive(Debug, Clone)]
pub struct ProductState {
    factor1: PureState,
    factor2: PureState,
    joint: PureState,
}

impl ProductState {
    pub fn factor1(&self) -> &PureState {
        &self.factor1
    }

    pub fn factor2(&self) -> &PureState {
        &self.factor2
    }

    pub fn joint(&self) -> &PureState {
        &self.joint
    }
}

pub(crate) fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &ai in a {
        for &bj in b {
            out.push(ai * bj);
        }
    }
    out
}

/// Kronecker product `a ⊗ b`, keeping the factors alongside the joint state.
pub fn tensor(a: &PureState, b: &PureState) -> ProductState {
    let joint = PureState { amplitudes: kron(a.amplitudes(), b.amplitudes()) };
    ProductState { factor1: a.clone(), factor2: b.clone(), joint }
}

/// Splits a joint state of dimension `d1·d2` into tensor factors, if it is a
/// product state across that cut. Returns `None` for entangled states.
///
/// The candidate factors are read off the dominant row and column of the
/// `d1 × d2` coefficient matrix and then verified by ray equality against the
/// joint state, so an accepted split is always a genuine factorization.
pub fn factor_product_state(
    joint: &PureState,
    d1: usize,
    d2: usize,
) -> Option<(PureState, PureState)> {
    if d1 == 0 || d2 == 0 || joint.dim() != d1 * d2 {
        return None;
    }
    let amps = joint.amplitudes();
    let (mut i0, mut j0, mut best) = (0, 0, -1.0f64);
    for i in 0..d1 {
        for j in 0..d2 {
            let m = amps[i * d2 + j].norm_sqr();
            if m > best {
                best = m;
                i0 = i;
                j0 = j;
            }
        }
    }
    let col: Vec<Complex64> = (0..d1).map(|i| amps[i * d2 + j0]).collect();
    let row: Vec<Complex64> = (0..d2).map(|j| amps[i0 * d2 + j]).collect();
    let f1 = PureState::normalized(col).ok()?;
    let f2 = PureState::normalized(row).ok()?;
    let rebuilt = PureState { amplitudes: kron(f1.amplitudes(), f2.amplitudes()) };
    if rebuilt.ray_equal(joint) {
        Some((f1, f2))
    } else {
        None
    }
}

/// The four two-qubit product preparations of the exclusion experiment:
/// `|0⊗0⟩, |0⊗+⟩, |+⊗0⟩, |+⊗+⟩`, in that order.
pub fn pbr_preparations() -> [ProductState; 4] {
    let zero = PureState::zero();
    let plus = PureState::plus();
    [
        tensor(&zero, &zero),
        tensor(&zero, &plus),
        tensor(&plus, &zero),
        tensor(&plus, &plus),
    ]
}

/// The entangled four-outcome basis paired with [`pbr_preparations`]: each
/// basis vector is a uniform superposition of two product terms chosen so it
/// is orthogonal to exactly one preparation.
///
/// The construction is machine-verified rather than assumed: orthonormality
/// and completeness are checked by [`ProjectiveMeasurement::new`], and the
/// one-forbidden-outcome-per-preparation pattern is checked against the Born
/// probabilities of all sixteen (vector, preparation) pairs.
pub fn pbr_entangled_basis() -> Result<ProjectiveMeasurement, QuantumError> {
    let zero = PureState::zero();
    let one = PureState::one();
    let plus = PureState::plus();
    let minus = PureState::minus();

    let superpose = |p: &ProductState, q: &ProductState| -> Result<PureState, QuantumError> {
        let amps = p
            .joint()
            .amplitudes()
            .iter()
            .zip(q.joint().amplitudes())
            .map(|(a, b)| a + b)
            .collect();
        PureState::normalized(amps)
    };

    let vectors = vec![
        superpose(&tensor(&zero, &one), &tensor(&one, &zero))?,
        superpose(&tensor(&zero, &minus), &tensor(&one, &plus))?,
        superpose(&tensor(&plus, &one), &tensor(&minus, &zero))?,
        superpose(&tensor(&plus, &minus), &tensor(&minus, &plus))?,
    ];
    let measurement = ProjectiveMeasurement::new(vectors)
        .map_err(|e| QuantumError::ConstructionInvalid(e.to_string()))?;

    for (p, prep) in pbr_preparations().iter().enumerate() {
        let probs = measurement.born_probabilities(prep.joint())?;
        let zeros = probs.iter().filter(|&&pr| pr < ALGEBRAIC_TOL).count();
        if zeros != 1 {
            return Err(QuantumError::ConstructionInvalid(format!(
                "preparation {p} has {zeros} forbidden outcomes, expected exactly 1"
            )));
        }
    }
    Ok(measurement)
}
