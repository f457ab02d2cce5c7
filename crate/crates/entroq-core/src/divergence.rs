//! Exact spectral oracles for the divergences, the closed-form variational
//! optimum, and the quadrature error-bound calculators.
//!
//! Everything here is classical ground truth: the estimators in [`crate::vqa`]
//! are tested against these values. Divergences are reported in bits, except
//! the quasi-relative entropy `Q_alpha` which is dimensionless.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    matrix_function_of, rank_cutoff, solve_sylvester, support_defect, CMatrix, SUPPORT_TOL,
};
use crate::quad::{eval_ft, QuadratureRule, WeightKind};
use crate::states::DensityMatrix;

/// Which functional a [`DivergenceValue`] carries.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DivergenceKind {
    FGeneric,
    Ft { t: f64 },
    Relative,
    PetzAlpha { alpha: f64 },
    QuasiAlpha { alpha: f64 },
}

/// A divergence value with support-failure signalling.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct DivergenceValue {
    pub value: f64,
    #[serde(flatten)]
    pub kind: DivergenceKind,
    /// False only when the support condition fails (value is then +inf).
    pub finite: bool,
}

impl DivergenceValue {
    fn finite(value: f64, kind: DivergenceKind) -> Self {
        Self {
            value,
            kind,
            finite: true,
        }
    }

    fn infinite(kind: DivergenceKind) -> Self {
        Self {
            value: f64::INFINITY,
            kind,
            finite: false,
        }
    }
}

/// Overlap table `tr[P_j Q_k] = |<v_j|w_k>|^2` per eigenvector pair.
fn overlaps(rho: &DensityMatrix, sigma: &DensityMatrix) -> Vec<Vec<f64>> {
    let n = rho.dim();
    let v = &rho.spectral().eigenvectors;
    let w = &sigma.spectral().eigenvectors;
    let mut table = vec![vec![0.0; n]; n];
    for j in 0..n {
        for k in 0..n {
            let mut ip = Complex64::new(0.0, 0.0);
            for i in 0..n {
                ip += v[(i, j)].conj() * w[(i, k)];
            }
            table[j][k] = ip.norm_sqr();
        }
    }
    table
}

fn check_dims(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "divergence needs equal dimensions, got {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(())
}

/// Standard quantum f-divergence from both spectral decompositions:
/// `sum_{j,k} eta_j f(mu_k / eta_j) tr[P_j Q_k] + f(0+) tr[rho (I - sigma^0)]`.
///
/// `f_zero_plus` is the right-hand limit of `f` at 0+; when it is infinite
/// and the kernel mass `tr[rho (I - sigma^0)]` is positive the result is
/// flagged not finite.
pub fn f_divergence<F: Fn(f64) -> f64>(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    f: F,
    f_zero_plus: f64,
) -> Result<DivergenceValue> {
    check_dims(rho, sigma)?;
    let eta = &rho.spectral().eigenvalues;
    let mu = &sigma.spectral().eigenvalues;
    let cut_rho = rank_cutoff(eta);
    let cut_sigma = rank_cutoff(mu);
    let ov = overlaps(rho, sigma);

    let mut sum = 0.0;
    let mut kernel_mass = 0.0;
    for (j, &ej) in eta.iter().enumerate() {
        if ej <= cut_rho {
            continue;
        }
        for (k, &mk) in mu.iter().enumerate() {
            if mk <= cut_sigma {
                kernel_mass += ej * ov[j][k];
            } else {
                sum += ej * f(mk / ej) * ov[j][k];
            }
        }
    }
    if kernel_mass > SUPPORT_TOL {
        if f_zero_plus.is_finite() {
            sum += f_zero_plus * kernel_mass;
        } else {
            return Ok(DivergenceValue::infinite(DivergenceKind::FGeneric));
        }
    }
    Ok(DivergenceValue::finite(sum, DivergenceKind::FGeneric))
}

/// Umegaki relative entropy `D(rho||sigma) = tr[rho (log2 rho - log2 sigma)]`
/// in bits, computed through matrix logarithms on the common support.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivergenceValue> {
    check_dims(rho, sigma)?;
    if support_defect(rho.matrix(), sigma.spectral()) > SUPPORT_TOL {
        return Ok(DivergenceValue::infinite(DivergenceKind::Relative));
    }
    let log_rho = matrix_function_of(rho.spectral(), f64::log2)?;
    let log_sigma = matrix_function_of(sigma.spectral(), f64::log2)?;
    let value = rho.matrix().mul(&log_rho.sub(&log_sigma)).trace().re;
    Ok(DivergenceValue::finite(value, DivergenceKind::Relative))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 && (alpha - 1.0).abs() > f64::EPSILON {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "alpha must lie in (0,1) or (1,2], got {alpha}"
        )))
    }
}

/// Quasi-relative entropy `Q_alpha = tr[rho^alpha sigma^(1-alpha)]` via
/// matrix powers on the respective supports.
pub fn quasi_entropy(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    alpha: f64,
) -> Result<DivergenceValue> {
    check_dims(rho, sigma)?;
    check_alpha(alpha)?;
    let kind = DivergenceKind::QuasiAlpha { alpha };
    if support_defect(rho.matrix(), sigma.spectral()) > SUPPORT_TOL {
        return Ok(DivergenceValue::infinite(kind));
    }
    let rho_a = matrix_function_of(rho.spectral(), |x| x.powf(alpha))?;
    let sigma_b = matrix_function_of(sigma.spectral(), |x| x.powf(1.0 - alpha))?;
    Ok(DivergenceValue::finite(
        rho_a.mul(&sigma_b).trace().re,
        kind,
    ))
}

/// Petz Renyi divergence `D_alpha = log2(Q_alpha) / (alpha - 1)` in bits.
pub fn petz_renyi(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    alpha: f64,
) -> Result<DivergenceValue> {
    let q = quasi_entropy(rho, sigma, alpha)?;
    let kind = DivergenceKind::PetzAlpha { alpha };
    if !q.finite {
        return Ok(DivergenceValue::infinite(kind));
    }
    Ok(DivergenceValue::finite(
        q.value.log2() / (alpha - 1.0),
        kind,
    ))
}

/// Exact `D_{f_t}` divergence. `t = 0` returns 0 by the equal-support
/// convention; `t` in (0, 1] evaluates the spectral double sum with `f_t`.
pub fn ft_divergence_exact(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    t: f64,
) -> Result<DivergenceValue> {
    check_dims(rho, sigma)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Validation(format!("t must lie in [0, 1], got {t}")));
    }
    let kind = DivergenceKind::Ft { t };
    if support_defect(rho.matrix(), sigma.spectral()) > SUPPORT_TOL {
        return Ok(DivergenceValue::infinite(kind));
    }
    if t == 0.0 {
        return Ok(DivergenceValue::finite(0.0, kind));
    }
    // f_t(0+) = -1/(1-t), infinite at t = 1; the support check above has
    // already ruled out kernel mass.
    let f0p = if t < 1.0 {
        -1.0 / (1.0 - t)
    } else {
        f64::NEG_INFINITY
    };
    let d = f_divergence(rho, sigma, |x| eval_ft(t, x), f0p)?;
    Ok(DivergenceValue { kind, ..d })
}

/// Closed-form optimizer of the variational expression for `D_{f_t}`.
///
/// Returns the Sylvester solution `Z` together with the objective value
/// `(1/t) (tr rho + tr[rho (Z + Z^dag)] + (1-t) tr[rho Z^dag Z]
///  + t tr[sigma Z Z^dag])`, which equals the exact divergence.
pub fn variational_optimum(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    t: f64,
) -> Result<(CMatrix, f64)> {
    check_dims(rho, sigma)?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Validation(format!("t must lie in (0, 1], got {t}")));
    }
    let z = solve_sylvester(t, rho.matrix(), sigma.matrix())?;
    let value = variational_objective(rho, sigma, t, &z);
    Ok((z, value))
}

/// Evaluates the variational objective at an arbitrary candidate `Z`.
pub fn variational_objective(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    t: f64,
    z: &CMatrix,
) -> f64 {
    let zd = z.adjoint();
    let tr_rho = rho.matrix().trace().re;
    let linear = rho.matrix().mul(&z.add(&zd)).trace().re;
    let quad_rho = rho.matrix().mul(&zd.mul(z)).trace().re;
    let quad_sigma = sigma.matrix().mul(&z.mul(&zd)).trace().re;
    (tr_rho + linear + (1.0 - t) * quad_rho + t * quad_sigma) / t
}

/// Which quantity a quadrature rule approximates at the operator level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadTarget {
    /// Relative entropy through `-sum_j (w_j / ln 2) D_{f_{t_j}}`.
    Relent,
    /// `Q_alpha` through `1 + (sin(alpha pi)/pi) sum_j w_j D_{f_{t_j}}`.
    QuasiAlpha,
}

/// Noise-free quadrature value of a divergence (estimator-independent).
pub fn quadrature_divergence(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    rule: &QuadratureRule,
    target: QuadTarget,
) -> Result<DivergenceValue> {
    check_dims(rho, sigma)?;
    let mut node_values = Vec::with_capacity(rule.m);
    for &t in &rule.nodes {
        // Clamp eigenvalue-level jitter around the fixed endpoints.
        let t = t.clamp(0.0, 1.0);
        let d = ft_divergence_exact(rho, sigma, t)?;
        if !d.finite {
            return Ok(DivergenceValue::infinite(match target {
                QuadTarget::Relent => DivergenceKind::Relative,
                QuadTarget::QuasiAlpha => DivergenceKind::QuasiAlpha {
                    alpha: rule.alpha().unwrap_or(f64::NAN),
                },
            }));
        }
        node_values.push(d.value);
    }
    match target {
        QuadTarget::Relent => {
            if rule.weight_kind != WeightKind::Uniform {
                return Err(Error::Validation(
                    "relative-entropy quadrature needs a uniform-weight rule".into(),
                ));
            }
            let value: f64 = rule
                .weights
                .iter()
                .zip(&node_values)
                .map(|(&w, &v)| -w / std::f64::consts::LN_2 * v)
                .sum();
            Ok(DivergenceValue::finite(value, DivergenceKind::Relative))
        }
        QuadTarget::QuasiAlpha => {
            let alpha = rule.alpha().ok_or_else(|| {
                Error::Validation("quasi-entropy quadrature needs a Jacobi rule".into())
            })?;
            let s: f64 = rule
                .weights
                .iter()
                .zip(&node_values)
                .map(|(&w, &v)| w * v)
                .sum();
            let value = 1.0 + (alpha * std::f64::consts::PI).sin() / std::f64::consts::PI * s;
            Ok(DivergenceValue::finite(
                value,
                DivergenceKind::QuasiAlpha { alpha },
            ))
        }
    }
}

/// Error-bound constant of the relative-entropy quadrature: bound
/// `C (1 + epsV) / m^2 + epsV` with `C = (Q_0 + Q_2) / (D ln 2)` and
/// `Q_0 = tr[rho^0 sigma]`.
pub fn prop1_bound(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    m: usize,
    eps_v: f64,
) -> Result<f64> {
    let d = relative_entropy(rho, sigma)?;
    if !d.finite || d.value <= 0.0 {
        return Err(Error::Validation(
            "error bound needs a finite positive relative entropy".into(),
        ));
    }
    let q0 = rho
        .spectral()
        .support_projector()
        .mul(sigma.matrix())
        .trace()
        .re;
    let q2 = quasi_entropy(rho, sigma, 2.0)?;
    if !q2.finite {
        return Err(Error::Validation("error bound needs finite Q_2".into()));
    }
    let c = (q0 + q2.value) / (d.value * std::f64::consts::LN_2);
    Ok(c * (1.0 + eps_v) / (m as f64 * m as f64) + eps_v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{grj_rule, FixedEnd};
    use crate::states::random_mixed_state;

    fn skewed_diagonal_pair() -> (DensityMatrix, DensityMatrix) {
        let rho = DensityMatrix::new(CMatrix::diag_real(&[0.025, 0.975])).unwrap();
        let sigma = DensityMatrix::new(CMatrix::diag_real(&[0.975, 0.025])).unwrap();
        (rho, sigma)
    }

    #[test]
    fn f_divergence_zero_on_equal_states() {
        let rho = random_mixed_state(1, 2, 17).unwrap();
        let d = f_divergence(&rho, &rho, |x| x.ln(), f64::NEG_INFINITY).unwrap();
        assert!(d.finite && d.value.abs() <= 1e-10);
    }

    #[test]
    fn f0_divergence_vanishes_on_common_support() {
        let rho = random_mixed_state(2, 4, 3).unwrap();
        let sigma = random_mixed_state(2, 4, 4).unwrap();
        let d = f_divergence(&rho, &sigma, |x| x - 1.0, -1.0).unwrap();
        assert!(d.value.abs() <= 1e-10);
    }

    #[test]
    fn quasi_entropy_reference_value() {
        let (rho, sigma) = skewed_diagonal_pair();
        let via_f = f_divergence(&rho, &sigma, |x| x.powf(-0.5), f64::INFINITY).unwrap();
        let via_powers = quasi_entropy(&rho, &sigma, 1.5).unwrap();
        assert!((via_f.value - 6.0929).abs() < 1e-4);
        assert!((via_powers.value - via_f.value).abs() <= 1e-10);
    }

    #[test]
    fn relative_entropy_values() {
        let rho = random_mixed_state(1, 2, 21).unwrap();
        assert!(relative_entropy(&rho, &rho).unwrap().value.abs() <= 1e-10);

        // Commuting case: KL of the diagonals, by scalar arithmetic.
        let (rho, sigma) = skewed_diagonal_pair();
        let kl = 0.025_f64 * (0.025_f64 / 0.975).log2() + 0.975 * (0.975_f64 / 0.025).log2();
        let d = relative_entropy(&rho, &sigma).unwrap();
        assert!((d.value - kl).abs() <= 1e-12);
        assert!((d.value - 5.0211).abs() < 1e-4);

        let zero = DensityMatrix::new(CMatrix::diag_real(&[1.0, 0.0])).unwrap();
        let one = DensityMatrix::new(CMatrix::diag_real(&[0.0, 1.0])).unwrap();
        assert!(!relative_entropy(&zero, &one).unwrap().finite);
    }

    #[test]
    fn relative_entropy_agrees_with_f_divergence_route() {
        for seed in 0..10u64 {
            let rho = random_mixed_state(2, 4, 100 + seed).unwrap();
            let sigma = random_mixed_state(2, 4, 200 + seed).unwrap();
            let a = relative_entropy(&rho, &sigma).unwrap().value;
            let b = f_divergence(&rho, &sigma, |x| -x.log2(), f64::INFINITY)
                .unwrap()
                .value;
            assert!((a - b).abs() <= 1e-9, "seed {seed}: {a} vs {b}");
        }
    }

    #[test]
    fn petz_values() {
        let rho = random_mixed_state(1, 2, 31).unwrap();
        assert!(petz_renyi(&rho, &rho, 1.5).unwrap().value.abs() <= 1e-10);

        let (rho, sigma) = skewed_diagonal_pair();
        let d = petz_renyi(&rho, &sigma, 1.5).unwrap();
        assert!((d.value - 5.2142).abs() < 1e-4);
    }

    #[test]
    fn petz_two_matches_f1_route() {
        let rho = random_mixed_state(1, 2, 41).unwrap();
        let sigma = random_mixed_state(1, 2, 42).unwrap();
        let q2 = quasi_entropy(&rho, &sigma, 2.0).unwrap().value;
        let df1 = ft_divergence_exact(&rho, &sigma, 1.0).unwrap().value;
        assert!((q2 - (1.0 - df1)).abs() <= 1e-9);
    }

    #[test]
    fn ft_exact_cases() {
        let (rho, sigma) = skewed_diagonal_pair();
        assert_eq!(ft_divergence_exact(&rho, &sigma, 0.0).unwrap().value, 0.0);
        let same = random_mixed_state(1, 2, 55).unwrap();
        for &t in &[0.2, 0.7, 1.0] {
            assert!(ft_divergence_exact(&same, &same, t).unwrap().value.abs() <= 1e-10);
        }
        // t = 1: 1 - Q_2 by diagonal arithmetic.
        let q2 = 0.025_f64.powi(2) / 0.975 + 0.975_f64.powi(2) / 0.025;
        let d1 = ft_divergence_exact(&rho, &sigma, 1.0).unwrap().value;
        assert!((d1 - (1.0 - q2)).abs() <= 1e-9);
    }

    #[test]
    fn variational_optimum_matches_oracle() {
        let (rho, sigma) = skewed_diagonal_pair();
        let (z, value) = variational_optimum(&rho, &rho, 0.5).unwrap();
        assert!(z.max_abs_diff(&CMatrix::identity(2).scale_re(-1.0)) <= 1e-9);
        assert!(value.abs() <= 1e-10);

        for &t in &[0.1, 0.5, 1.0] {
            let (_, v) = variational_optimum(&rho, &sigma, t).unwrap();
            let exact = ft_divergence_exact(&rho, &sigma, t).unwrap().value;
            assert!((v - exact).abs() <= 1e-8, "t={t}: {v} vs {exact}");
        }
    }

    #[test]
    fn quadrature_divergence_reference_values() {
        let (rho, sigma) = skewed_diagonal_pair();
        let m6 = grj_rule(6, FixedEnd::One, WeightKind::Jacobi { alpha: 1.5 }).unwrap();
        let q6 = quadrature_divergence(&rho, &sigma, &m6, QuadTarget::QuasiAlpha).unwrap();
        assert!((q6.value - 6.3508).abs() < 5e-4, "got {}", q6.value);

        let m16 = grj_rule(16, FixedEnd::One, WeightKind::Jacobi { alpha: 1.5 }).unwrap();
        let q16 = quadrature_divergence(&rho, &sigma, &m16, QuadTarget::QuasiAlpha).unwrap();
        assert!((q16.value - 6.0932).abs() < 5e-4, "got {}", q16.value);
    }

    #[test]
    fn quadrature_relent_zero_for_equal_states() {
        let rho = random_mixed_state(1, 2, 77).unwrap();
        for fixed in [FixedEnd::Zero, FixedEnd::One] {
            let rule = grj_rule(6, fixed, WeightKind::Uniform).unwrap();
            let d = quadrature_divergence(&rho, &rho, &rule, QuadTarget::Relent).unwrap();
            assert!(d.value.abs() <= 1e-10);
        }
    }

    #[test]
    fn prop1_bound_cases() {
        let (rho, sigma) = skewed_diagonal_pair();
        // Full-rank rho makes Q_0 = tr sigma = 1.
        let q2 = quasi_entropy(&rho, &sigma, 2.0).unwrap().value;
        let d = relative_entropy(&rho, &sigma).unwrap().value;
        let expected_c = (1.0 + q2) / (d * std::f64::consts::LN_2);
        let bound = prop1_bound(&rho, &sigma, 6, 0.0).unwrap();
        assert!((bound - expected_c / 36.0).abs() <= 1e-9);

        // Bound -> epsV as m -> infinity.
        let big = prop1_bound(&rho, &sigma, 100_000, 0.0).unwrap();
        assert!(big < 1e-5);

        let same = random_mixed_state(1, 2, 5).unwrap();
        assert!(prop1_bound(&same, &same, 6, 0.0).is_err());
    }

    #[test]
    fn prop1_bound_dominates_measured_error() {
        for seed in 0..5u64 {
            let rho = random_mixed_state(1, 2, 300 + seed).unwrap();
            let sigma = random_mixed_state(1, 2, 400 + seed).unwrap();
            let exact = relative_entropy(&rho, &sigma).unwrap().value;
            for m in 2..=8usize {
                let rule = grj_rule(m, FixedEnd::One, WeightKind::Uniform).unwrap();
                let approx =
                    quadrature_divergence(&rho, &sigma, &rule, QuadTarget::Relent).unwrap();
                let rel_err = (approx.value - exact).abs() / exact;
                let bound = prop1_bound(&rho, &sigma, m, 0.0).unwrap();
                assert!(rel_err <= bound, "seed {seed} m {m}: {rel_err} > {bound}");
            }
        }
    }
}
