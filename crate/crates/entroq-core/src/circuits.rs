//! Parameterized quantum circuits: gate set, the four ansatz families,
//! compilation to unitary matrices and parameter-shift gradients.
//!
//! Conventions, fixed library-wide:
//!
//! - Qubit ordering is little-endian: qubit `k` is bit `k` of the basis
//!   index, so kets written `|q0 q1 ...>` put qubit 0 first.
//! - Rotations are `R_P(theta) = exp(-i theta P / 2)` for Pauli generator
//!   `P`, which makes the +-pi/2 parameter shift exact.
//! - `U3(theta, phi, lambda) = RZ(phi) RY(theta) RZ(lambda)`, with slots
//!   ordered `(theta, phi, lambda)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    RX,
    RY,
    RZ,
    U3,
    H,
    CNOT,
    CZ,
    SWAP,
    Controlled(Box<GateKind>),
}

impl GateKind {
    /// Number of parameter slots the gate consumes.
    pub fn slot_count(&self) -> usize {
        match self {
            GateKind::RX | GateKind::RY | GateKind::RZ => 1,
            GateKind::U3 => 3,
            GateKind::H | GateKind::CNOT | GateKind::CZ | GateKind::SWAP => 0,
            GateKind::Controlled(sub) => sub.slot_count(),
        }
    }

    /// Number of target qubits (the control of a controlled gate counts).
    pub fn target_count(&self) -> usize {
        match self {
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::U3 | GateKind::H => 1,
            GateKind::CNOT | GateKind::CZ | GateKind::SWAP => 2,
            GateKind::Controlled(sub) => 1 + sub.target_count(),
        }
    }
}

/// One gate instance: kind, target qubits and parameter-slot indices.
///
/// For controlled gates `targets[0]` is the control qubit and the rest are
/// the wrapped gate's targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    #[serde(default)]
    pub slots: Vec<usize>,
}

impl Gate {
    pub fn fixed(kind: GateKind, targets: Vec<usize>) -> Self {
        Self {
            kind,
            targets,
            slots: Vec::new(),
        }
    }

    pub fn parameterized(kind: GateKind, targets: Vec<usize>, slots: Vec<usize>) -> Self {
        Self {
            kind,
            targets,
            slots,
        }
    }

    /// Wraps the gate in a control on `control`.
    pub fn controlled(self, control: usize) -> Self {
        let mut targets = vec![control];
        targets.extend(self.targets);
        Self {
            kind: GateKind::Controlled(Box::new(self.kind)),
            targets,
            slots: self.slots,
        }
    }
}

/// An ordered gate sequence with parameter slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamCircuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub n_params: usize,
}

impl ParamCircuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let n_params = gates
            .iter()
            .flat_map(|g| g.slots.iter())
            .max()
            .map_or(0, |&m| m + 1);
        let circuit = Self {
            n_qubits,
            gates,
            n_params,
        };
        circuit.validate()?;
        Ok(circuit)
    }

    pub fn validate(&self) -> Result<()> {
        for gate in &self.gates {
            if gate.targets.len() != gate.kind.target_count() {
                return Err(Error::Validation(format!(
                    "gate {:?} expects {} target(s), got {}",
                    gate.kind,
                    gate.kind.target_count(),
                    gate.targets.len()
                )));
            }
            if gate.slots.len() != gate.kind.slot_count() {
                return Err(Error::Validation(format!(
                    "gate {:?} expects {} slot(s), got {}",
                    gate.kind,
                    gate.kind.slot_count(),
                    gate.slots.len()
                )));
            }
            for &t in &gate.targets {
                if t >= self.n_qubits {
                    return Err(Error::Validation(format!(
                        "target {t} out of range for {} qubit(s)",
                        self.n_qubits
                    )));
                }
            }
            for pair in 0..gate.targets.len() {
                for other in pair + 1..gate.targets.len() {
                    if gate.targets[pair] == gate.targets[other] {
                        return Err(Error::Validation("gate targets must be distinct".into()));
                    }
                }
            }
            for &s in &gate.slots {
                if s >= self.n_params {
                    return Err(Error::Validation(format!("slot {s} out of range")));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }
}

fn rx(theta: f64) -> [[Complex64; 2]; 2] {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    [
        [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
        [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
    ]
}

fn ry(theta: f64) -> [[Complex64; 2]; 2] {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

fn rz(theta: f64) -> [[Complex64; 2]; 2] {
    [
        [Complex64::from_polar(1.0, -theta / 2.0), ZERO],
        [ZERO, Complex64::from_polar(1.0, theta / 2.0)],
    ]
}

fn mat2_mul(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn single_qubit_matrix(kind: &GateKind, angles: &[f64]) -> [[Complex64; 2]; 2] {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::RX => rx(angles[0]),
        GateKind::RY => ry(angles[0]),
        GateKind::RZ => rz(angles[0]),
        GateKind::U3 => mat2_mul(rz(angles[1]), mat2_mul(ry(angles[0]), rz(angles[2]))),
        GateKind::H => [
            [Complex64::new(inv, 0.0), Complex64::new(inv, 0.0)],
            [Complex64::new(inv, 0.0), Complex64::new(-inv, 0.0)],
        ],
        other => unreachable!("{other:?} is not a single-qubit gate"),
    }
}

/// Applies `G * M` in place for a single-qubit gate on `qubit`, restricted
/// to rows whose `control_mask` bits are all set.
fn apply_1q_rows(m: &mut CMatrix, g: [[Complex64; 2]; 2], qubit: usize, control_mask: usize) {
    let dim = m.rows();
    let cols = m.cols();
    let bit = 1usize << qubit;
    for base in 0..dim {
        if base & bit != 0 || (base & control_mask) != control_mask {
            continue;
        }
        let hi = base | bit;
        if (hi & control_mask) != control_mask {
            continue;
        }
        for col in 0..cols {
            let a = m[(base, col)];
            let b = m[(hi, col)];
            m[(base, col)] = g[0][0] * a + g[0][1] * b;
            m[(hi, col)] = g[1][0] * a + g[1][1] * b;
        }
    }
}

fn swap_rows(m: &mut CMatrix, i: usize, j: usize) {
    let cols = m.cols();
    for col in 0..cols {
        let tmp = m[(i, col)];
        m[(i, col)] = m[(j, col)];
        m[(j, col)] = tmp;
    }
}

/// Applies one gate on the left of `m` (i.e. `m <- G m`).
fn apply_gate(m: &mut CMatrix, gate: &Gate, params: &[f64], control_mask: usize) -> Result<()> {
    let angles: Vec<f64> = gate.slots.iter().map(|&s| params[s]).collect();
    match &gate.kind {
        GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::U3 | GateKind::H => {
            let g = single_qubit_matrix(&gate.kind, &angles);
            apply_1q_rows(m, g, gate.targets[0], control_mask);
        }
        GateKind::CNOT => {
            let (control, target) = (1usize << gate.targets[0], 1usize << gate.targets[1]);
            for i in 0..m.rows() {
                if i & control != 0 && i & target == 0 && (i & control_mask) == control_mask {
                    swap_rows(m, i, i | target);
                }
            }
        }
        GateKind::CZ => {
            let (a, b) = (1usize << gate.targets[0], 1usize << gate.targets[1]);
            for i in 0..m.rows() {
                if i & a != 0 && i & b != 0 && (i & control_mask) == control_mask {
                    for col in 0..m.cols() {
                        m[(i, col)] = -m[(i, col)];
                    }
                }
            }
        }
        GateKind::SWAP => {
            let (a, b) = (1usize << gate.targets[0], 1usize << gate.targets[1]);
            for i in 0..m.rows() {
                if i & a != 0 && i & b == 0 && (i & control_mask) == control_mask {
                    swap_rows(m, i, (i & !a) | b);
                }
            }
        }
        GateKind::Controlled(sub) => {
            if matches!(**sub, GateKind::Controlled(_)) {
                return Err(Error::Validation(
                    "nested controlled gates are not supported".into(),
                ));
            }
            let inner = Gate {
                kind: (**sub).clone(),
                targets: gate.targets[1..].to_vec(),
                slots: gate.slots.clone(),
            };
            let mask = control_mask | (1usize << gate.targets[0]);
            apply_gate(m, &inner, params, mask)?;
        }
    }
    Ok(())
}

/// Compiles the circuit at the given parameters into its unitary matrix
/// (gates applied in list order: `U = g_L ... g_2 g_1`).
pub fn compile_unitary(circuit: &ParamCircuit, params: &[f64]) -> Result<CMatrix> {
    if params.len() != circuit.n_params {
        return Err(Error::Validation(format!(
            "expected {} parameter(s), got {}",
            circuit.n_params,
            params.len()
        )));
    }
    circuit.validate()?;
    let mut m = CMatrix::identity(circuit.dim());
    for gate in &circuit.gates {
        apply_gate(&mut m, gate, params, 0)?;
    }
    Ok(m)
}

/// Generic single-qubit rotation ansatz: one `U3` gate, 3 parameters.
pub fn ansatz_u3() -> ParamCircuit {
    ParamCircuit::new(
        1,
        vec![Gate::parameterized(GateKind::U3, vec![0], vec![0, 1, 2])],
    )
    .expect("static ansatz is valid")
}

/// Two-qubit ansatz: per layer RX, RY, RZ on each qubit followed by
/// CNOT(0 -> 1); 6 parameters per layer.
pub fn ansatz_two_qubit(layers: usize) -> ParamCircuit {
    assert!(layers >= 1);
    let mut gates = Vec::new();
    let mut slot = 0;
    for _ in 0..layers {
        for q in 0..2 {
            for kind in [GateKind::RX, GateKind::RY, GateKind::RZ] {
                gates.push(Gate::parameterized(kind, vec![q], vec![slot]));
                slot += 1;
            }
        }
        gates.push(Gate::fixed(GateKind::CNOT, vec![0, 1]));
    }
    ParamCircuit::new(2, gates).expect("static ansatz is valid")
}

/// Circuit-9 ansatz: per layer H on every qubit, a CZ chain over adjacent
/// pairs, then RX on every qubit; `n_qubits` parameters per layer.
pub fn ansatz_circuit9(n_qubits: usize, layers: usize) -> ParamCircuit {
    assert!(n_qubits >= 2);
    let mut gates = Vec::new();
    let mut slot = 0;
    for _ in 0..layers {
        for q in 0..n_qubits {
            gates.push(Gate::fixed(GateKind::H, vec![q]));
        }
        for q in 0..n_qubits - 1 {
            gates.push(Gate::fixed(GateKind::CZ, vec![q, q + 1]));
        }
        for q in 0..n_qubits {
            gates.push(Gate::parameterized(GateKind::RX, vec![q], vec![slot]));
            slot += 1;
        }
    }
    ParamCircuit::new(n_qubits, gates).expect("static ansatz is valid")
}

/// Complex entangled ansatz: per layer U3 on every qubit then a CNOT ring;
/// `3 n_qubits` parameters per layer.
pub fn ansatz_complex_entangled(n_qubits: usize, layers: usize) -> ParamCircuit {
    assert!(n_qubits >= 2);
    let mut gates = Vec::new();
    let mut slot = 0;
    for _ in 0..layers {
        for q in 0..n_qubits {
            gates.push(Gate::parameterized(
                GateKind::U3,
                vec![q],
                vec![slot, slot + 1, slot + 2],
            ));
            slot += 3;
        }
        for q in 0..n_qubits {
            gates.push(Gate::fixed(GateKind::CNOT, vec![q, (q + 1) % n_qubits]));
        }
    }
    ParamCircuit::new(n_qubits, gates).expect("static ansatz is valid")
}

/// Named ansatz descriptor used in configs and reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "ansatz")]
pub enum AnsatzSpec {
    U3,
    TwoQubit { layers: usize },
    Circuit9 { n_qubits: usize, layers: usize },
    ComplexEntangled { n_qubits: usize, layers: usize },
}

impl AnsatzSpec {
    pub fn build(&self) -> ParamCircuit {
        match *self {
            AnsatzSpec::U3 => ansatz_u3(),
            AnsatzSpec::TwoQubit { layers } => ansatz_two_qubit(layers),
            AnsatzSpec::Circuit9 { n_qubits, layers } => ansatz_circuit9(n_qubits, layers),
            AnsatzSpec::ComplexEntangled { n_qubits, layers } => {
                ansatz_complex_entangled(n_qubits, layers)
            }
        }
    }

    /// Default ansatz for states of the given width: U3 for one qubit,
    /// the 4-layer two-qubit ansatz for two, complex entangled otherwise.
    pub fn default_for(n_qubits: usize) -> Self {
        match n_qubits {
            1 => AnsatzSpec::U3,
            2 => AnsatzSpec::TwoQubit { layers: 4 },
            n => AnsatzSpec::ComplexEntangled {
                n_qubits: n,
                layers: 2,
            },
        }
    }
}

/// Parameter-shift gradient of a scalar function of Pauli-rotation angles:
/// `grad_k = (f(x + pi/2 e_k) - f(x - pi/2 e_k)) / 2`.
///
/// Exact for functions whose angle dependence has integer frequency, i.e.
/// expectation values in which each rotation enters through both `U` and
/// `U^dag` (the basis-measurement families and the global overlap loss).
pub fn param_shift_gradient<F: FnMut(&[f64]) -> f64>(mut f: F, params: &[f64]) -> Vec<f64> {
    let shift = std::f64::consts::FRAC_PI_2;
    let mut work = params.to_vec();
    (0..params.len())
        .map(|k| {
            work[k] = params[k] + shift;
            let plus = f(&work);
            work[k] = params[k] - shift;
            let minus = f(&work);
            work[k] = params[k];
            (plus - minus) / 2.0
        })
        .collect()
}

/// Four-term parameter-shift gradient, exact when the angle dependence
/// mixes frequencies 1/2 and 1.
///
/// The swap-test readout is linear in the controlled `U`, so its angle
/// dependence carries half-integer frequencies on top of the integer ones
/// from the basis families; the two-point rule is no longer the exact
/// derivative there. The classical four-term rule for controlled rotations
/// handles both components:
/// `d1 [f(x + pi/2) - f(x - pi/2)] - d2 [f(x + 3pi/2) - f(x - 3pi/2)]`
/// with `d1 = (sqrt(2)+1)/(4 sqrt(2))` and `d2 = (sqrt(2)-1)/(4 sqrt(2))`.
pub fn param_shift_gradient_mixed<F: FnMut(&[f64]) -> f64>(mut f: F, params: &[f64]) -> Vec<f64> {
    let sqrt2 = std::f64::consts::SQRT_2;
    let d1 = (sqrt2 + 1.0) / (4.0 * sqrt2);
    let d2 = (sqrt2 - 1.0) / (4.0 * sqrt2);
    let near = std::f64::consts::FRAC_PI_2;
    let far = 3.0 * std::f64::consts::FRAC_PI_2;
    let mut work = params.to_vec();
    (0..params.len())
        .map(|k| {
            let mut at = |x: f64| {
                work[k] = x;
                let y = f(&work);
                work[k] = params[k];
                y
            };
            d1 * (at(params[k] + near) - at(params[k] - near))
                - d2 * (at(params[k] + far) - at(params[k] - far))
        })
        .collect()
}
