//! Pauli channels, coherent information and the channel-input state
//! preparation used by the superadditivity study.
//!
//! Register convention for `n`-use coherent information: the input circuit
//! acts on `2n` qubits with the reference system A on the high qubits
//! `n..2n` and the channel-input system A' (which becomes B) on the low
//! qubits `0..n`. The channel acts qubit-wise on A'.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuits::{compile_unitary, ParamCircuit};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, kron, partial_trace, rank_cutoff, CMatrix};
use crate::states::{DensityMatrix, PureState};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The four Pauli matrices sigma_0..sigma_3.
pub fn pauli_matrices() -> [CMatrix; 4] {
    [
        CMatrix::identity(2),
        CMatrix::from_data(2, 2, vec![ZERO, ONE, ONE, ZERO]),
        CMatrix::from_data(2, 2, vec![ZERO, -I, I, ZERO]),
        CMatrix::from_data(2, 2, vec![ONE, ZERO, ZERO, -ONE]),
    ]
}

/// A qubit Pauli channel `P(rho) = sum_i p_i sigma_i rho sigma_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliChannel {
    pub p: [f64; 4],
}

impl PauliChannel {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        let total: f64 = p.iter().sum();
        if p.iter().any(|&x| x < -1e-12) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "channel probabilities must form a simplex, got {p:?}"
            )));
        }
        Ok(Self { p })
    }

    /// Channel from the three error probabilities `(p1, p2, p3)`.
    pub fn from_error_probs(p1: f64, p2: f64, p3: f64) -> Result<Self> {
        Self::new([1.0 - p1 - p2 - p3, p1, p2, p3])
    }

    pub fn identity() -> Self {
        Self {
            p: [1.0, 0.0, 0.0, 0.0],
        }
    }
}

/// Applies the channel to a single-qubit state.
pub fn pauli_apply(ch: &PauliChannel, rho: &CMatrix) -> CMatrix {
    pauli_apply_on_qubit(ch, rho, 0)
}

/// Applies the channel to one qubit of a register state.
pub fn pauli_apply_on_qubit(ch: &PauliChannel, rho: &CMatrix, qubit: usize) -> CMatrix {
    let dim = rho.dim();
    let bit = 1usize << qubit;
    assert!(bit < dim, "qubit {qubit} out of range for dimension {dim}");
    let mut out = CMatrix::zeros(dim, dim);
    // sigma_i rho sigma_i expressed through index flips and sign factors:
    // X flips the bit, Z contributes (-1)^bit, Y = iXZ combines both.
    for (idx, &weight) in ch.p.iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        for r in 0..dim {
            for c in 0..dim {
                let (rr, cc, factor) = match idx {
                    0 => (r, c, 1.0),
                    1 => (r ^ bit, c ^ bit, 1.0),
                    2 => {
                        let sign = if (r ^ c) & bit != 0 { -1.0 } else { 1.0 };
                        (r ^ bit, c ^ bit, sign)
                    }
                    _ => {
                        let sign = if (r ^ c) & bit != 0 { -1.0 } else { 1.0 };
                        (r, c, sign)
                    }
                };
                out[(r, c)] += rho[(rr, cc)] * (weight * factor);
            }
        }
    }
    out
}

/// Applies the n-fold tensor power of the channel to an n-qubit state.
pub fn pauli_tensor_apply(ch: &PauliChannel, n: usize, rho: &CMatrix) -> CMatrix {
    assert_eq!(rho.dim(), 1 << n, "state dimension must be 2^n");
    let mut out = rho.clone();
    for q in 0..n {
        out = pauli_apply_on_qubit(ch, &out, q);
    }
    out
}

/// Closed-form coherent information of a Pauli channel in bits:
/// `I(P) = 1 + sum_i p_i log2 p_i` (with `0 log 0 = 0`).
pub fn pauli_coherent_info(ch: &PauliChannel) -> f64 {
    1.0 + ch
        .p
        .iter()
        .map(|&p| if p > 0.0 { p * p.log2() } else { 0.0 })
        .sum::<f64>()
}

/// Von Neumann entropy `-tr[rho log2 rho]` in bits (kernel skipped).
pub fn von_neumann_entropy(m: &CMatrix) -> Result<f64> {
    let spec = hermitian_eig(m)?;
    let cutoff = rank_cutoff(&spec.eigenvalues);
    Ok(spec
        .eigenvalues
        .iter()
        .filter(|&&x| x > cutoff)
        .map(|&x| -x * x.log2())
        .sum())
}

/// Exact coherent information `I(A>B) = S(sigma_B) - S(sigma_AB)` of the
/// state obtained by sending the A' half of `phi` through `apply_channel`.
///
/// `phi` lives on `2 n_low` qubits with A on the high half; `apply_channel`
/// maps the full `2 n_low`-qubit density matrix to the channel output.
pub fn coherent_info_exact<F>(apply_channel: F, phi: &PureState, n_low: usize) -> Result<f64>
where
    F: Fn(&CMatrix) -> CMatrix,
{
    if phi.n_qubits() != 2 * n_low {
        return Err(Error::DimensionMismatch(format!(
            "input must live on {} qubits, got {}",
            2 * n_low,
            phi.n_qubits()
        )));
    }
    let joint = apply_channel(&CMatrix::outer(phi.amplitudes()));
    let d_a = 1usize << n_low;
    let sigma_b = partial_trace(&joint, &[d_a, d_a], &[1])?;
    Ok(von_neumann_entropy(&sigma_b)? - von_neumann_entropy(&joint)?)
}

/// Prepares the divergence pair of the coherent-information objective:
/// `rho_L = N(phi(params))` and `rho_R = I_A (x) tr_A(rho_L)`.
///
/// The circuit acts on `2 n_uses` qubits; the channel acts on the low
/// `n_uses` qubits. `rho_R` is a PSD operator of trace `2^n_uses`.
pub fn build_rho_lr(
    ch: &PauliChannel,
    n_uses: usize,
    circuit: &ParamCircuit,
    params: &[f64],
) -> Result<(DensityMatrix, DensityMatrix)> {
    if circuit.n_qubits != 2 * n_uses {
        return Err(Error::DimensionMismatch(format!(
            "circuit must act on {} qubits, got {}",
            2 * n_uses,
            circuit.n_qubits
        )));
    }
    let u = compile_unitary(circuit, params)?;
    let dim = u.dim();
    let mut column = vec![ZERO; dim];
    for (i, a) in column.iter_mut().enumerate() {
        *a = u[(i, 0)];
    }
    let mut joint = CMatrix::outer(&column);
    for q in 0..n_uses {
        joint = pauli_apply_on_qubit(ch, &joint, q);
    }
    let d_a = 1usize << n_uses;
    let reduced = partial_trace(&joint, &[d_a, d_a], &[1])?;
    let rho_l = DensityMatrix::new(joint)?;
    let rho_r = DensityMatrix::psd_operator(kron(&CMatrix::identity(d_a), &reduced))?;
    Ok((rho_l, rho_r))
}
