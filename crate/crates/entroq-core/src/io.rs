//! JSON file formats for matrices and pure states.
//!
//! Matrices are stored as `{"dim": n, "re": [[..]], "im": [[..]]}` in
//! row-major order; pure states as `{"n": qubits, "re": [..], "im": [..]}`.
//! Declared states are validated on load.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::states::{validate_state, DensityMatrix, PureState};

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct PureStateJson {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    let n = m.dim();
    let mut re = vec![vec![0.0; n]; n];
    let mut im = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            re[i][j] = m[(i, j)].re;
            im[i][j] = m[(i, j)].im;
        }
    }
    MatrixJson { dim: n, re, im }
}

fn matrix_from_json(j: MatrixJson) -> Result<CMatrix> {
    let n = j.dim;
    if j.re.len() != n
        || j.im.len() != n
        || j.re.iter().any(|r| r.len() != n)
        || j.im.iter().any(|r| r.len() != n)
    {
        return Err(Error::Validation(
            "matrix rows do not match the declared dim".into(),
        ));
    }
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            m[(i, k)] = Complex64::new(j.re[i][k], j.im[i][k]);
        }
    }
    Ok(m)
}

pub fn save_matrix(path: &Path, m: &CMatrix) -> Result<()> {
    let json = serde_json::to_string_pretty(&matrix_to_json(m))?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_matrix(path: &Path) -> Result<CMatrix> {
    let data = std::fs::read_to_string(path)?;
    matrix_from_json(serde_json::from_str(&data)?)
}

/// Loads a matrix declared to be a density matrix, validating all state
/// invariants.
pub fn load_state(path: &Path) -> Result<DensityMatrix> {
    let m = load_matrix(path)?;
    validate_state(&m)
}

pub fn save_pure_state(path: &Path, psi: &PureState) -> Result<()> {
    let json = PureStateJson {
        n: psi.n_qubits(),
        re: psi.amplitudes().iter().map(|a| a.re).collect(),
        im: psi.amplitudes().iter().map(|a| a.im).collect(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&json)?)?;
    Ok(())
}

pub fn load_pure_state(path: &Path) -> Result<PureState> {
    let data = std::fs::read_to_string(path)?;
    let j: PureStateJson = serde_json::from_str(&data)?;
    if j.re.len() != 1 << j.n || j.im.len() != 1 << j.n {
        return Err(Error::Validation(
            "amplitude count does not match qubit count".into(),
        ));
    }
    let amps =
        j.re.iter()
            .zip(&j.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
    PureState::new(amps)
}
