//! The three probability families read out from states and parameterized
//! circuits, exactly (density-matrix arithmetic) or by finite-shot
//! simulation, plus the extended SWAP test.
//!
//! The exact values of the swap-test family come from the closed form
//! `p_chi(i) = (1 + Re tr[rho U |i><i| V]) / 2`; the explicit test circuit
//! (Hadamard on an ancilla, controlled V, controlled register swap,
//! controlled U, Hadamard) is compiled in [`swap_test_probs_circuit`] and
//! must agree with the closed form, which pins its gate ordering.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuits::{compile_unitary, Gate, GateKind, ParamCircuit};
use crate::error::{Error, Result};
use crate::linalg::{kron, CMatrix};
use crate::states::DensityMatrix;

/// A probability vector; `shots == 0` marks exact values, otherwise the
/// entries are empirical frequencies over that many draws.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProbVector {
    pub probs: Vec<f64>,
    pub shots: u64,
}

impl ProbVector {
    pub fn exact(probs: Vec<f64>) -> Self {
        Self { probs, shots: 0 }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

fn check_circuit_dim(state: &DensityMatrix, circuit: &ParamCircuit) -> Result<()> {
    if state.n_qubits() != circuit.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "circuit acts on {} qubit(s) but the state has {}",
            circuit.n_qubits,
            state.n_qubits()
        )));
    }
    Ok(())
}

fn clamped_diagonal(m: &CMatrix) -> Vec<f64> {
    (0..m.dim()).map(|i| m[(i, i)].re.max(0.0)).collect()
}

/// `p_beta(i) = tr[V rho V^dag |i><i|]`: diagonal of the evolved state.
pub fn prob_v_basis(rho: &DensityMatrix, v: &ParamCircuit, beta: &[f64]) -> Result<ProbVector> {
    check_circuit_dim(rho, v)?;
    let vm = compile_unitary(v, beta)?;
    let evolved = vm.mul(rho.matrix()).mul(&vm.adjoint());
    Ok(ProbVector::exact(clamped_diagonal(&evolved)))
}

/// `p_theta(i) = tr[U^dag sigma U |i><i|]`.
pub fn prob_u_dagger_basis(
    sigma: &DensityMatrix,
    u: &ParamCircuit,
    theta: &[f64],
) -> Result<ProbVector> {
    check_circuit_dim(sigma, u)?;
    let um = compile_unitary(u, theta)?;
    let evolved = um.adjoint().mul(sigma.matrix()).mul(&um);
    Ok(ProbVector::exact(clamped_diagonal(&evolved)))
}

/// Swap-test outcome-0 probabilities `p_chi(i) = (1 + Theta_i)/2` with
/// `Theta_i = Re tr[rho U |i><i| V]`, from the closed form.
pub fn swap_test_probs(
    rho: &DensityMatrix,
    u: &ParamCircuit,
    theta: &[f64],
    v: &ParamCircuit,
    beta: &[f64],
) -> Result<ProbVector> {
    check_circuit_dim(rho, u)?;
    check_circuit_dim(rho, v)?;
    let um = compile_unitary(u, theta)?;
    let vm = compile_unitary(v, beta)?;
    // Theta_i = Re (V rho U)_{ii}.
    let prod = vm.mul(rho.matrix()).mul(&um);
    let probs = (0..rho.dim())
        .map(|i| (1.0 + prod[(i, i)].re) / 2.0)
        .collect();
    Ok(ProbVector::exact(probs))
}

/// Builds the swap-test circuit on `2n + 1` qubits for `n`-qubit U and V.
///
/// Register layout (little-endian): index register J on qubits `0..n`, the
/// state register S on `n..2n`, the ancilla on qubit `2n`. Parameters are
/// the concatenation `theta ++ beta`. Gate order: H on the ancilla,
/// controlled V on S, controlled SWAP(S, J), controlled U on S, H.
pub fn build_chi_circuit(u: &ParamCircuit, v: &ParamCircuit) -> Result<ParamCircuit> {
    if u.n_qubits != v.n_qubits {
        return Err(Error::DimensionMismatch(
            "U and V must act on the same width".into(),
        ));
    }
    let n = u.n_qubits;
    let ancilla = 2 * n;
    let mut gates = vec![Gate::fixed(GateKind::H, vec![ancilla])];
    let shift_gate = |gate: &Gate, qubit_offset: usize, slot_offset: usize| -> Gate {
        Gate {
            kind: gate.kind.clone(),
            targets: gate.targets.iter().map(|&t| t + qubit_offset).collect(),
            slots: gate.slots.iter().map(|&s| s + slot_offset).collect(),
        }
    };
    for gate in &v.gates {
        gates.push(shift_gate(gate, n, u.n_params).controlled(ancilla));
    }
    for k in 0..n {
        gates.push(Gate::fixed(GateKind::SWAP, vec![n + k, k]).controlled(ancilla));
    }
    for gate in &u.gates {
        gates.push(shift_gate(gate, n, 0).controlled(ancilla));
    }
    gates.push(Gate::fixed(GateKind::H, vec![ancilla]));
    let mut chi = ParamCircuit::new(2 * n + 1, gates)?;
    chi.n_params = u.n_params + v.n_params;
    Ok(chi)
}

/// Swap-test probabilities through the compiled chi circuit: evolve
/// `|0><0| (x) rho (x) |i><i|` and read the ancilla-0 mass. Agrees with
/// [`swap_test_probs`] to numerical precision.
pub fn swap_test_probs_circuit(
    rho: &DensityMatrix,
    u: &ParamCircuit,
    theta: &[f64],
    v: &ParamCircuit,
    beta: &[f64],
) -> Result<ProbVector> {
    check_circuit_dim(rho, u)?;
    check_circuit_dim(rho, v)?;
    let chi = build_chi_circuit(u, v)?;
    let mut params = theta.to_vec();
    params.extend_from_slice(beta);
    let chi_m = compile_unitary(&chi, &params)?;
    let chi_dag = chi_m.adjoint();

    let n = rho.n_qubits();
    let d = rho.dim();
    let anc0 = CMatrix::diag_real(&[1.0, 0.0]); // |0><0| on the top qubit
    let mut probs = Vec::with_capacity(d);
    for i in 0..d {
        let mut basis = CMatrix::zeros(d, d);
        basis[(i, i)] = Complex64::new(1.0, 0.0);
        // Ancilla is the highest qubit, J the lowest: anc (x) rho (x) |i><i|.
        let input = kron(&kron(&anc0, rho.matrix()), &basis);
        let evolved = chi_m.mul(&input).mul(&chi_dag);
        // Sum the diagonal over all rows with the ancilla bit clear.
        let mask = 1usize << (2 * n);
        let p = (0..evolved.dim())
            .filter(|row| row & mask == 0)
            .map(|row| evolved[(row, row)].re)
            .sum::<f64>();
        probs.push(p.max(0.0));
    }
    Ok(ProbVector { probs, shots: 0 })
}

/// Cyclic left shift of `regs` registers of `reg_qubits` qubits each:
/// `|i_0, i_1, ..., i_p> -> |i_1, ..., i_p, i_0>` in register order, with
/// register 0 the high-order block. Built from adjacent register swaps.
fn cyclic_shift(regs: usize, reg_qubits: usize) -> CMatrix {
    let total = regs * reg_qubits;
    let dim = 1usize << total;
    let mut perm = CMatrix::identity(dim);
    // Register r occupies bits [(regs-1-r)*reg_qubits, ...) because
    // register 0 is the high-order block.
    let bits_of = |r: usize| (regs - 1 - r) * reg_qubits;
    let swap_regs = |m: &mut CMatrix, ra: usize, rb: usize| {
        let (a, b) = (bits_of(ra), bits_of(rb));
        for q in 0..reg_qubits {
            let (ba, bb) = (1usize << (a + q), 1usize << (b + q));
            for i in 0..dim {
                if i & ba != 0 && i & bb == 0 {
                    let j = (i & !ba) | bb;
                    for col in 0..dim {
                        let tmp = m[(i, col)];
                        m[(i, col)] = m[(j, col)];
                        m[(j, col)] = tmp;
                    }
                }
            }
        }
    };
    for r in 0..regs - 1 {
        swap_regs(&mut perm, r, r + 1);
    }
    perm
}

/// General-order extended SWAP test value
/// `Theta = Re tr[rho prod_k U_k |j_k><j_k| V_k]`, computed by assembling
/// the test circuit (Hadamard, controlled per-register unitaries, a
/// controlled cyclic register permutation, Hadamard) and reading the
/// ancilla statistics.
pub fn extended_swap_general(
    rho: &DensityMatrix,
    unitaries: &[(CMatrix, CMatrix)],
    j_tuple: &[usize],
) -> Result<f64> {
    let p = unitaries.len();
    if p == 0 || j_tuple.len() != p {
        return Err(Error::Validation(
            "need one basis index per unitary pair".into(),
        ));
    }
    let d = rho.dim();
    for (uk, vk) in unitaries {
        if uk.dim() != d || vk.dim() != d {
            return Err(Error::DimensionMismatch(
                "all unitaries must match the state".into(),
            ));
        }
    }
    if j_tuple.iter().any(|&j| j >= d) {
        return Err(Error::Validation("basis index out of range".into()));
    }

    // W = [U_1 on S (x) (V_1 U_2 on J_1) (x) ... (x) (V_p on J_p)] * C,
    // which satisfies tr[(rho (x) |j_1><j_1| (x) ...) W]
    //   = tr[rho U_1 |j_1><j_1| V_1 ... U_p |j_p><j_p| V_p].
    let n = rho.n_qubits();
    let shift = cyclic_shift(p + 1, n);
    let mut post = unitaries[0].0.clone(); // U_1 on S (register 0)
    for k in 0..p {
        let factor = if k + 1 < p {
            unitaries[k].1.mul(&unitaries[k + 1].0) // V_k U_{k+1}
        } else {
            unitaries[k].1.clone() // V_p
        };
        post = kron(&post, &factor);
    }
    let w = post.mul(&shift);

    // Hadamard-test sandwich around the controlled W.
    let dim_w = w.dim();
    let dim = 2 * dim_w;
    let mut chi = CMatrix::zeros(dim, dim);
    {
        // H (x) I . (|0><0| (x) I + |1><1| (x) W) . H (x) I, written out:
        // chi = 1/2 [[I + W, I - W], [I - W, I + W]].
        let eye = CMatrix::identity(dim_w);
        let plus = eye.add(&w).scale_re(0.5);
        let minus = eye.sub(&w).scale_re(0.5);
        for i in 0..dim_w {
            for j in 0..dim_w {
                chi[(i, j)] = plus[(i, j)];
                chi[(i, j + dim_w)] = minus[(i, j)];
                chi[(i + dim_w, j)] = minus[(i, j)];
                chi[(i + dim_w, j + dim_w)] = plus[(i, j)];
            }
        }
    }

    let mut input = rho.matrix().clone();
    for &j in j_tuple {
        let mut basis = CMatrix::zeros(d, d);
        basis[(j, j)] = Complex64::new(1.0, 0.0);
        input = kron(&input, &basis);
    }
    let input = kron(&CMatrix::diag_real(&[1.0, 0.0]), &input);
    let evolved = chi.mul(&input).mul(&chi.adjoint());
    let p0: f64 = (0..dim_w).map(|row| evolved[(row, row)].re).sum();
    Ok(2.0 * p0 - 1.0)
}

/// Direct arithmetic for the same quantity, used as the test oracle.
pub fn extended_swap_direct(
    rho: &DensityMatrix,
    unitaries: &[(CMatrix, CMatrix)],
    j_tuple: &[usize],
) -> Result<f64> {
    let p = unitaries.len();
    if p == 0 || j_tuple.len() != p {
        return Err(Error::Validation(
            "need one basis index per unitary pair".into(),
        ));
    }
    let d = rho.dim();
    let mut prod = rho.matrix().clone();
    for (k, (uk, vk)) in unitaries.iter().enumerate() {
        let j = j_tuple[k];
        let mut basis = CMatrix::zeros(d, d);
        basis[(j, j)] = Complex64::new(1.0, 0.0);
        prod = prod.mul(uk).mul(&basis).mul(vk);
    }
    Ok(prod.trace().re)
}

/// Per-index binomial sampling for families whose entries are independent
/// binary-outcome probabilities (the swap-test family: one ancilla
/// measurement per basis index, entries need not sum to 1).
pub fn sample_bernoulli_each(p: &ProbVector, shots: u64, seed: u64) -> Result<ProbVector> {
    if shots == 0 {
        return Err(Error::Validation("shot count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = p
        .probs
        .iter()
        .map(|&q| {
            let q = q.clamp(0.0, 1.0);
            let mut hits = 0u64;
            for _ in 0..shots {
                if rng.gen::<f64>() < q {
                    hits += 1;
                }
            }
            hits as f64 / shots as f64
        })
        .collect();
    Ok(ProbVector { probs, shots })
}

/// Multinomial sampling of an exact distribution. Deterministic per seed.
pub fn sample_shots(p: &ProbVector, shots: u64, seed: u64) -> Result<ProbVector> {
    if shots == 0 {
        return Err(Error::Validation("shot count must be at least 1".into()));
    }
    let total = p.total();
    if total <= 0.0 {
        return Err(Error::Validation(
            "cannot sample from a zero distribution".into(),
        ));
    }
    let mut cumulative = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for &q in &p.probs {
        acc += q.max(0.0) / total;
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; p.len()];
    for _ in 0..shots {
        let r: f64 = rng.gen();
        let idx = cumulative.partition_point(|&c| c < r).min(p.len() - 1);
        counts[idx] += 1;
    }
    let probs = counts.iter().map(|&c| c as f64 / shots as f64).collect();
    Ok(ProbVector { probs, shots })
}
