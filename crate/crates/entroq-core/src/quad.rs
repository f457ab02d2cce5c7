//! Gauss-Radau-Jacobi quadrature on [0, 1] and the scalar approximants
//! built from it.
//!
//! Rules carry one node fixed at an endpoint of [0, 1] and integrate
//! against either the uniform weight or the Jacobi weight
//! `t^(alpha-1) (1-t)^(1-alpha)`. Weights are unnormalized: their sum is
//! the total mass of the weight function. Construction follows the
//! classical route: closed-form three-term recurrence coefficients of the
//! Jacobi polynomials on [-1, 1], an affine shift to [0, 1], the Radau
//! modification of the final diagonal recurrence entry, and nodes/weights
//! from the symmetric tridiagonal eigenproblem.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which endpoint of [0, 1] carries the fixed node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedEnd {
    Zero,
    One,
}

impl FixedEnd {
    pub fn value(self) -> f64 {
        match self {
            FixedEnd::Zero => 0.0,
            FixedEnd::One => 1.0,
        }
    }
}

impl std::fmt::Display for FixedEnd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FixedEnd::Zero => write!(f, "zero"),
            FixedEnd::One => write!(f, "one"),
        }
    }
}

/// Weight function of a rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    /// Weight 1 on [0, 1]; used for the logarithm approximant.
    Uniform,
    /// Weight `t^(alpha-1) (1-t)^(1-alpha)`; used for the power approximant.
    Jacobi { alpha: f64 },
}

/// `f_t(x) = (x - 1) / (t (x - 1) + 1)`.
///
/// The denominator is positive for every `x > 0` and `t` in [0, 1]; at
/// `t = 0` the formula reduces to `f_0(x) = x - 1`.
pub fn eval_ft(t: f64, x: f64) -> f64 {
    (x - 1.0) / (t * (x - 1.0) + 1.0)
}

/// A Gauss-Radau-Jacobi rule on [0, 1].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub m: usize,
    /// Strictly increasing nodes in [0, 1].
    pub nodes: Vec<f64>,
    /// Strictly positive weights summing to the weight function's mass.
    pub weights: Vec<f64>,
    pub fixed_end: FixedEnd,
    pub weight_kind: WeightKind,
}

impl QuadratureRule {
    pub fn alpha(&self) -> Option<f64> {
        match self.weight_kind {
            WeightKind::Uniform => None,
            WeightKind::Jacobi { alpha } => Some(alpha),
        }
    }

    /// Total mass `sum w_j`.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Monic three-term recurrence coefficients for the weight on [0, 1].
///
/// Returns `(a, b)` with diagonal entries `a[0..n]` and `b[0]` equal to the
/// total mass, `b[k]` (k >= 1) the squared off-diagonal entries. Exponents
/// on [-1, 1] are `cap_a` on (1 - x) and `cap_b` on (1 + x).
fn recurrence_01(n: usize, cap_a: f64, cap_b: f64, mass_01: f64) -> (Vec<f64>, Vec<f64>) {
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    let ab = cap_a + cap_b;
    a[0] = (cap_b - cap_a) / (ab + 2.0);
    for k in 1..n {
        let kf = k as f64;
        let den = 2.0 * kf + ab;
        a[k] = (cap_b * cap_b - cap_a * cap_a) / (den * (den + 2.0));
        b[k] = if k == 1 {
            4.0 * (1.0 + cap_a) * (1.0 + cap_b) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0))
        } else {
            4.0 * kf * (kf + cap_a) * (kf + cap_b) * (kf + ab)
                / (den * den * (den + 1.0) * (den - 1.0))
        };
    }
    // Shift x = 2t - 1 onto [0, 1].
    for ak in &mut a {
        *ak = (*ak + 1.0) / 2.0;
    }
    b[0] = mass_01;
    for bk in &mut b[1..] {
        *bk /= 4.0;
    }
    (a, b)
}

/// Symmetric tridiagonal eigenproblem by QL with implicit shifts, tracking
/// only the first eigenvector components (all that Golub-Welsch needs).
///
/// `d` holds the diagonal, `e` the sub-diagonal in `e[0..n-1]`. Returns
/// `(eigenvalues, first_components)` sorted by eigenvalue.
fn tridiag_eig_first_components(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = d.len();
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::Validation(
                    "tridiagonal QL failed to converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let vals = order.iter().map(|&i| d[i]).collect();
    let firsts = order.iter().map(|&i| z[i]).collect();
    Ok((vals, firsts))
}

/// Builds the m-point GRJ rule with one node fixed at an endpoint.
pub fn grj_rule(m: usize, fixed_end: FixedEnd, weight_kind: WeightKind) -> Result<QuadratureRule> {
    if m < 1 {
        return Err(Error::Validation("node count m must be at least 1".into()));
    }
    let (cap_a, cap_b, mass) = match weight_kind {
        WeightKind::Uniform => (0.0, 0.0, 1.0),
        WeightKind::Jacobi { alpha } => {
            if !(alpha > 0.0 && alpha < 2.0 && (alpha - 1.0).abs() > f64::EPSILON) {
                return Err(Error::Validation(format!(
                    "alpha must lie in (0,1) or (1,2), got {alpha}"
                )));
            }
            // Total mass: B(alpha, 2-alpha) = (1-alpha) pi / sin(alpha pi).
            let mass = (1.0 - alpha) * std::f64::consts::PI / (alpha * std::f64::consts::PI).sin();
            (1.0 - alpha, alpha - 1.0, mass)
        }
    };
    let end = fixed_end.value();
    let (a, b) = recurrence_01(m, cap_a, cap_b, mass);

    // Radau modification: evaluate the monic polynomials at the endpoint
    // and replace the last diagonal entry so the endpoint becomes a node.
    let mut p_prev = 0.0;
    let mut p_cur = 1.0;
    for k in 0..m - 1 {
        let p_next = (end - a[k]) * p_cur - b[k] * p_prev;
        p_prev = p_cur;
        p_cur = p_next;
    }
    let mut diag = a;
    diag[m - 1] = end - b[m - 1] * p_prev / p_cur;

    let off: Vec<f64> = b[1..m].iter().map(|&x| x.sqrt()).collect();
    let (nodes, firsts) = tridiag_eig_first_components(diag, off)?;
    let weights: Vec<f64> = firsts.iter().map(|&z| mass * z * z).collect();

    let rule = QuadratureRule {
        m,
        nodes,
        weights,
        fixed_end,
        weight_kind,
    };
    debug_assert!(
        rule.nodes.iter().any(|&t| (t - end).abs() <= 1e-13),
        "fixed node missing from {:?}",
        rule.nodes
    );
    Ok(rule)
}

/// Quadrature approximant `r_m(x)` of `log2(x)`.
///
/// `r_m(x) = (1/ln 2) sum_j w_j f_{t_j}(x)`; a node exactly at `t = 0`
/// enters through `f_0(x) = x - 1`, which the generic formula already
/// produces.
pub fn eval_rm(rule: &QuadratureRule, x: f64) -> Result<f64> {
    if rule.weight_kind != WeightKind::Uniform {
        return Err(Error::Validation("r_m needs a uniform-weight rule".into()));
    }
    let s: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| w * eval_ft(t, x))
        .sum();
    Ok(s / std::f64::consts::LN_2)
}

/// Quadrature approximant `h_m(x)` of `x^(1-alpha)`.
///
/// `h_m(x) = 1 + (sin(alpha pi)/pi) sum_j w_j f_{t_j}(x)`.
pub fn eval_hm(rule: &QuadratureRule, x: f64) -> Result<f64> {
    let alpha = rule
        .alpha()
        .ok_or_else(|| Error::Validation("h_m needs a Jacobi-weight rule".into()))?;
    let s: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| w * eval_ft(t, x))
        .sum();
    Ok(1.0 + (alpha * std::f64::consts::PI).sin() / std::f64::consts::PI * s)
}
