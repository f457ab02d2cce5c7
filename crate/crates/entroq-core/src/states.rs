//! Density-matrix construction, validation, random-state generation and
//! support tests.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result, StateViolations};
use crate::linalg::{
    hermitian_eig, support_defect, CMatrix, SpectralDecomposition, HERMITIAN_TOL, SUPPORT_TOL,
};

/// Tolerance on `|tr rho - 1|` for unit-trace states.
pub const TRACE_TOL: f64 = 1e-10;

/// Tolerance on the smallest eigenvalue of a state.
pub const PSD_TOL: f64 = 1e-10;

/// A quantum state: Hermitian, positive semidefinite, unit trace.
///
/// The spectral decomposition is computed once at construction (the PSD
/// check needs the spectrum anyway) and shared immutably afterwards. A
/// relaxed-trace variant ([`DensityMatrix::psd_operator`]) admits PSD
/// operators such as `I_A (x) sigma_B` whose trace is not 1.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: CMatrix,
    n_qubits: usize,
    unit_trace: bool,
    spectral: SpectralDecomposition,
}

fn qubits_of_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Validation(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

impl DensityMatrix {
    /// Validates and wraps a unit-trace state.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::build(matrix, true)
    }

    /// Validates and wraps a PSD operator with arbitrary trace.
    pub fn psd_operator(matrix: CMatrix) -> Result<Self> {
        Self::build(matrix, false)
    }

    fn build(matrix: CMatrix, unit_trace: bool) -> Result<Self> {
        let mut violations = StateViolations::default();
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(
                "state matrix must be square".into(),
            ));
        }
        let n_qubits = qubits_of_dim(matrix.dim())?;
        let defect = matrix.hermitian_defect();
        if defect > HERMITIAN_TOL {
            violations.hermiticity_defect = Some(defect);
            return Err(Error::InvalidState(violations));
        }
        let spectral = hermitian_eig(&matrix)?;
        let min_eig = *spectral.eigenvalues.last().unwrap();
        if min_eig < -PSD_TOL {
            violations.psd_defect = Some(min_eig.abs());
        }
        if unit_trace {
            let tr = matrix.trace().re;
            if (tr - 1.0).abs() > TRACE_TOL {
                violations.trace_defect = Some((tr - 1.0).abs());
            }
        }
        if violations != StateViolations::default() {
            return Err(Error::InvalidState(violations));
        }
        Ok(Self {
            matrix,
            n_qubits,
            unit_trace,
            spectral,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn unit_trace(&self) -> bool {
        self.unit_trace
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn rank(&self) -> usize {
        self.spectral.rank()
    }

    /// `tr rho^2`.
    pub fn purity(&self) -> f64 {
        self.spectral.eigenvalues.iter().map(|x| x * x).sum()
    }
}

/// A pure state vector on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
    n_qubits: usize,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubits_of_dim(amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "state vector norm {norm} is not 1"
            )));
        }
        Ok(Self {
            amplitudes,
            n_qubits,
        })
    }

    /// Computational basis state |index>.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let dim = 1usize << n_qubits;
        assert!(index < dim);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self {
            amplitudes,
            n_qubits,
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Density matrix |psi><psi|.
    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::new(CMatrix::outer(&self.amplitudes))
            .expect("a normalized pure state is always a valid density matrix")
    }
}

fn gaussian_complex_vector(len: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect()
}

/// Haar-random pure state on `n_qubits` qubits.
///
/// Amplitudes are independent standard complex Gaussians, normalized. The
/// generator is ChaCha8 seeded with `seed`, so results are identical across
/// platforms and runs.
pub fn random_pure_state(n_qubits: usize, seed: u64) -> PureState {
    let dim = 1usize << n_qubits;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amps = gaussian_complex_vector(dim, &mut rng);
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    PureState {
        amplitudes: amps,
        n_qubits,
    }
}

/// Random mixed state of the requested rank, obtained by tracing an
/// ancilla register of dimension `rank` out of a Haar-like random pure
/// state. Deterministic for a fixed seed.
pub fn random_mixed_state(n_qubits: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let dim = 1usize << n_qubits;
    if rank < 1 || rank > dim {
        return Err(Error::Validation(format!(
            "rank {rank} out of range 1..={dim} for {n_qubits} qubit(s)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut psi = gaussian_complex_vector(dim * rank, &mut rng);
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut psi {
        *a /= norm;
    }
    // rho[i][j] = sum_k psi[i, k] conj(psi[j, k]) over the rank-sized ancilla.
    let mut rho = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..rank {
                acc += psi[i * rank + k] * psi[j * rank + k].conj();
            }
            rho[(i, j)] = acc;
        }
    }
    DensityMatrix::new(rho)
}

/// Checks a candidate matrix against all state invariants, reporting every
/// measured defect on failure.
pub fn validate_state(matrix: &CMatrix) -> Result<DensityMatrix> {
    let mut violations = StateViolations::default();
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch(
            "state matrix must be square".into(),
        ));
    }
    let defect = matrix.hermitian_defect();
    if defect > HERMITIAN_TOL {
        violations.hermiticity_defect = Some(defect);
    }
    // A non-Hermitian candidate still gets PSD/trace diagnostics from its
    // Hermitian part.
    let herm = matrix.add(&matrix.adjoint()).scale_re(0.5);
    let spec = hermitian_eig(&herm)?;
    let min_eig = *spec.eigenvalues.last().unwrap();
    if min_eig < -PSD_TOL {
        violations.psd_defect = Some(min_eig.abs());
    }
    let tr = matrix.trace().re;
    if (tr - 1.0).abs() > TRACE_TOL {
        violations.trace_defect = Some((tr - 1.0).abs());
    }
    if violations != StateViolations::default() {
        return Err(Error::InvalidState(violations));
    }
    DensityMatrix::new(matrix.clone())
}

/// True iff supp(rho) is contained in supp(sigma), tested through the
/// projector defect `|(I - P_sigma) rho (I - P_sigma)| <= 1e-10`.
pub fn support_contained(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<bool> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "support test needs equal dimensions, got {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(support_defect(rho.matrix(), sigma.spectral()) <= SUPPORT_TOL)
}
