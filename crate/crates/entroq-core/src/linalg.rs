//! Complex dense linear algebra: Hermitian eigendecomposition, matrix
//! functions, tensor products, partial trace and the Sylvester-equation
//! solver.
//!
//! Everything here targets small dense operators (dimension <= 64). The
//! eigensolver is a cyclic Jacobi sweep for complex Hermitian matrices,
//! which is simple and very accurate at these sizes.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative rank threshold shared library-wide: an eigenvalue below
/// `RANK_EPS_REL * lambda_max` counts as zero.
pub const RANK_EPS_REL: f64 = 1e-12;

/// Tolerance for declaring a matrix Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Tolerance on the support-containment defect.
pub const SUPPORT_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major complex entries.
    pub fn from_data(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows*cols");
        Self { rows, cols, data }
    }

    /// Builds a square matrix from real row-major entries.
    pub fn from_real(n: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), n * n);
        let data = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let v: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// Rank-one projector |v><v| from a (not necessarily normalized) vector.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Dimension of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert_eq!(self.rows, self.cols);
        self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        let data = self.data.iter().map(|&a| a * s).collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale_re(&self, s: f64) -> CMatrix {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |M_jk - conj(M_kj)|` over all entries.
    pub fn hermitian_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                defect = defect.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        defect
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_defect() <= tol
    }

    /// `max |U^dag U - I|`, zero for a unitary matrix.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint()
            .mul(self)
            .max_abs_diff(&CMatrix::identity(self.dim()))
    }
}

/// Kronecker product; `A` indexes the high-order factor.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for ia in 0..a.rows() {
        for ja in 0..a.cols() {
            let av = a[(ia, ja)];
            if av == ZERO {
                continue;
            }
            for ib in 0..b.rows() {
                for jb in 0..b.cols() {
                    out[(ia * b.rows() + ib, ja * b.cols() + jb)] = av * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Traces out the subsystems not listed in `keep`.
///
/// `dims` lists the tensor factors in Kronecker order (factor 0 is the
/// high-order block, matching [`kron`]); `keep` holds factor indices in
/// increasing order. The trace of the input is preserved.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.dim() != total {
        return Err(Error::DimensionMismatch(format!(
            "matrix dimension {} does not match product of subsystem dims {}",
            m.rows(),
            total
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Validation(
            "keep set must be increasing factor indices".into(),
        ));
    }
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let dk: usize = kept_dims.iter().product();
    let dt: usize = traced_dims.iter().product();

    // Global index from (kept multi-index, traced multi-index).
    let compose = |ik: usize, it: usize| -> usize {
        let mut digits = vec![0usize; dims.len()];
        let mut rem = ik;
        for (pos, &k) in keep.iter().enumerate().rev() {
            digits[k] = rem % kept_dims[pos];
            rem /= kept_dims[pos];
        }
        let mut rem = it;
        for (pos, &t) in traced.iter().enumerate().rev() {
            digits[t] = rem % traced_dims[pos];
            rem /= traced_dims[pos];
        }
        let mut idx = 0;
        for (d, &dim) in digits.iter().zip(dims) {
            idx = idx * dim + d;
        }
        idx
    };

    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = ZERO;
            for t in 0..dt {
                acc += m[(compose(i, t), compose(j, t))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    /// Real eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    /// Rebuilds `V diag(lambda) V^dag`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.eigenvalues.len();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += self.eigenvectors[(i, k)]
                        * self.eigenvalues[k]
                        * self.eigenvectors[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// Column `k` as a vector.
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        (0..self.eigenvalues.len())
            .map(|i| self.eigenvectors[(i, k)])
            .collect()
    }

    /// Indices of eigenvalues above the shared rank threshold.
    pub fn support_indices(&self) -> Vec<usize> {
        let cutoff = rank_cutoff(&self.eigenvalues);
        (0..self.eigenvalues.len())
            .filter(|&k| self.eigenvalues[k] > cutoff)
            .collect()
    }

    /// Projector onto the span of eigenvectors with nonzero eigenvalue.
    pub fn support_projector(&self) -> CMatrix {
        let n = self.eigenvalues.len();
        let mut p = CMatrix::zeros(n, n);
        for k in self.support_indices() {
            let v = self.eigenvector(k);
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        p
    }

    pub fn rank(&self) -> usize {
        self.support_indices().len()
    }
}

/// Absolute cutoff below which eigenvalues count as zero.
pub fn rank_cutoff(eigenvalues: &[f64]) -> f64 {
    let max = eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    RANK_EPS_REL * max
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues sorted descending with matching eigenvector columns.
/// Fails if the input is not Hermitian within [`HERMITIAN_TOL`].
pub fn hermitian_eig(m: &CMatrix) -> Result<SpectralDecomposition> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(
            "eigendecomposition needs a square matrix".into(),
        ));
    }
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    let n = m.dim();
    let mut a = m.clone();
    // Symmetrize exactly so rounding in the input cannot bias the sweep.
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let mut v = CMatrix::identity(n);
    let scale = a.max_abs().max(1e-300);
    let tol = 1e-15 * scale;

    for _sweep in 0..60 {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= tol * 1e-2 {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let spe = phase * s; // s * e^{i phi}

                // A <- R^dag A R with R_pp = c, R_pq = s e^{i phi},
                // R_qp = -s e^{-i phi}, R_qq = c.
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * spe.conj();
                    a[(k, q)] = akp * spe + akq * c;
                    a[(p, k)] = a[(k, p)].conj();
                    a[(q, k)] = a[(k, q)].conj();
                }
                let app_new = app * c * c + aqq * s * s - 2.0 * r * c * s;
                let aqq_new = app * s * s + aqq * c * c + 2.0 * r * c * s;
                a[(p, p)] = Complex64::new(app_new, 0.0);
                a[(q, q)] = Complex64::new(aqq_new, 0.0);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * spe.conj();
                    v[(k, q)] = vkp * spe + vkq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vec_sorted = CMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vec_sorted[(row, col)] = v[(row, src)];
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: vec_sorted,
    })
}

/// Applies a scalar function to the spectrum of a PSD Hermitian matrix.
///
/// Eigenvalues below the shared rank threshold are skipped (mapped to 0)
/// rather than passed to `f`, so negative powers and logarithms act on the
/// support only. An eigenvalue below -1e-10 is a domain error.
pub fn matrix_function<F: Fn(f64) -> f64>(m: &CMatrix, f: F) -> Result<CMatrix> {
    let spec = hermitian_eig(m)?;
    matrix_function_of(&spec, f)
}

/// Same as [`matrix_function`] but reusing a spectral decomposition.
pub fn matrix_function_of<F: Fn(f64) -> f64>(
    spec: &SpectralDecomposition,
    f: F,
) -> Result<CMatrix> {
    if let Some(&min) = spec.eigenvalues.last() {
        if min < -1e-10 {
            return Err(Error::Domain(format!(
                "matrix function needs a PSD input; min eigenvalue {min:.3e}"
            )));
        }
    }
    let cutoff = rank_cutoff(&spec.eigenvalues);
    let mapped: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&x| if x > cutoff { f(x) } else { 0.0 })
        .collect();
    Ok(SpectralDecomposition {
        eigenvalues: mapped,
        eigenvectors: spec.eigenvectors.clone(),
    }
    .reconstruct())
}

/// `max |(I - P_sigma) rho (I - P_sigma)|`: zero iff supp(rho) is contained
/// in supp(sigma).
pub fn support_defect(rho: &CMatrix, sigma_spec: &SpectralDecomposition) -> f64 {
    let n = rho.dim();
    let comp = CMatrix::identity(n).sub(&sigma_spec.support_projector());
    comp.mul(rho).mul(&comp).max_abs()
}

/// Solves a dense complex linear system by Gaussian elimination with
/// partial pivoting. `a` is consumed as workspace.
pub fn lu_solve(mut a: CMatrix, mut b: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    for col in 0..n {
        let (pivot, pmag) = (col..n)
            .map(|r| (r, a[(r, col)].norm()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if pmag < 1e-300 {
            return Err(Error::Domain("singular linear system".into()));
        }
        if pivot != col {
            for j in 0..n {
                let tmp = a[(col, j)];
                a[(col, j)] = a[(pivot, j)];
                a[(pivot, j)] = tmp;
            }
            b.swap(col, pivot);
        }
        let inv = ONE / a[(col, col)];
        for r in col + 1..n {
            let factor = a[(r, col)] * inv;
            if factor == ZERO {
                continue;
            }
            a[(r, col)] = ZERO;
            for j in col + 1..n {
                let v = a[(col, j)];
                a[(r, j)] -= factor * v;
            }
            let bv = b[col];
            b[r] -= factor * bv;
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for j in col + 1..n {
            acc -= a[(col, j)] * b[j];
        }
        b[col] = acc / a[(col, col)];
    }
    Ok(b)
}

/// Row-major vectorization |vec(M)>.
fn vec_of(m: &CMatrix) -> Vec<Complex64> {
    m.data().to_vec()
}

fn unvec(v: Vec<Complex64>, n: usize) -> CMatrix {
    CMatrix::from_data(n, n, v)
}

/// Solves `(1-t) Z rho + t sigma Z = -rho` for `t` in (0, 1].
///
/// The equation is vectorized row-major, `vec(AXB) = (A kron B^T) vec(X)`,
/// into a d^2 x d^2 system `[(1-t)(I kron rho^T) + t (sigma kron I)] vec(Z)
/// = vec(-rho)`. When either operator is full-rank the solution is unique
/// and solved directly; when both are rank-deficient the minimum-norm
/// least-squares solution is taken via normal equations with ridge 1e-14.
pub fn solve_sylvester(t: f64, rho: &CMatrix, sigma: &CMatrix) -> Result<CMatrix> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Validation(format!("t must lie in (0, 1], got {t}")));
    }
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(
            "rho and sigma must share a dimension".into(),
        ));
    }
    let rho_spec = hermitian_eig(rho)?;
    let sigma_spec = hermitian_eig(sigma)?;
    let defect = support_defect(rho, &sigma_spec);
    if defect > SUPPORT_TOL {
        return Err(Error::SupportViolation { defect });
    }

    let n = rho.dim();
    let eye = CMatrix::identity(n);
    let system = kron(&eye, &rho.transpose())
        .scale_re(1.0 - t)
        .add(&kron(sigma, &eye).scale_re(t));
    let rhs = vec_of(&rho.scale_re(-1.0));

    let full_rank = rho_spec.rank() == n || sigma_spec.rank() == n;
    let solution = if full_rank {
        lu_solve(system, rhs)?
    } else {
        // A solution exists but the system is singular; take the
        // least-squares solution through ridged normal equations.
        let sys_adj = system.adjoint();
        let mut normal = sys_adj.mul(&system);
        for i in 0..normal.dim() {
            normal[(i, i)] += Complex64::new(1e-14, 0.0);
        }
        lu_solve(normal, sys_adj.mul_vec(&rhs))?
    };
    Ok(unvec(solution, n))
}

/// Residual `max |(1-t) Z rho + t sigma Z + rho|` of a Sylvester candidate.
pub fn sylvester_residual(t: f64, rho: &CMatrix, sigma: &CMatrix, z: &CMatrix) -> f64 {
    z.mul(rho)
        .scale_re(1.0 - t)
        .add(&sigma.mul(z).scale_re(t))
        .add(rho)
        .max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in i + 1..n {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn identity_eig() {
        let spec = hermitian_eig(&CMatrix::identity(2)).unwrap();
        assert_eq!(spec.eigenvalues, vec![1.0, 1.0]);
        assert!(spec.eigenvectors.unitarity_defect() <= 1e-12);
    }

    #[test]
    fn diagonal_eig_sorted_descending() {
        let spec = hermitian_eig(&CMatrix::diag_real(&[0.025, 0.975])).unwrap();
        assert!((spec.eigenvalues[0] - 0.975).abs() < 1e-14);
        assert!((spec.eigenvalues[1] - 0.025).abs() < 1e-14);
    }

    #[test]
    fn eig_reconstruction_seed7() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_hermitian(4, &mut rng);
        let spec = hermitian_eig(&m).unwrap();
        assert!(spec.reconstruct().max_abs_diff(&m) <= 1e-10);
        assert!(spec.eigenvectors.unitarity_defect() <= 1e-10);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_data(2, 2, vec![ZERO, Complex64::new(1.0, 0.0), ZERO, ZERO]);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn matrix_function_identity_and_log() {
        let m = CMatrix::diag_real(&[0.5, 0.5]);
        let id = matrix_function(&m, |x| x).unwrap();
        assert!(id.max_abs_diff(&m) <= 1e-14);
        let lg = matrix_function(&m, f64::log2).unwrap();
        assert!(lg.max_abs_diff(&CMatrix::diag_real(&[-1.0, -1.0])) <= 1e-12);
    }

    #[test]
    fn matrix_function_skips_kernel() {
        let m = CMatrix::diag_real(&[4.0, 0.0]);
        let out = matrix_function(&m, |x| x.powf(-0.5)).unwrap();
        assert!(out.max_abs_diff(&CMatrix::diag_real(&[0.5, 0.0])) <= 1e-12);
    }

    #[test]
    fn matrix_function_rejects_negative() {
        let m = CMatrix::diag_real(&[1.0, -0.5]);
        assert!(matches!(matrix_function(&m, |x| x), Err(Error::Domain(_))));
    }

    #[test]
    fn kron_basics() {
        let i2 = CMatrix::identity(2);
        assert!(kron(&i2, &i2).max_abs_diff(&CMatrix::identity(4)) == 0.0);
        let a = CMatrix::diag_real(&[1.0, 0.0]);
        let b = CMatrix::diag_real(&[0.0, 1.0]);
        let expected = CMatrix::diag_real(&[0.0, 1.0, 0.0, 0.0]);
        assert!(kron(&a, &b).max_abs_diff(&expected) == 0.0);
    }

    #[test]
    fn kron_trace_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(3, &mut rng);
        let b = random_hermitian(2, &mut rng);
        let lhs = kron(&a, &b).trace();
        let rhs = a.trace() * b.trace();
        assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(2, &mut rng);
        let c = random_hermitian(2, &mut rng);
        let d = random_hermitian(2, &mut rng);
        let lhs = kron(&a, &b).mul(&kron(&c, &d));
        let rhs = kron(&a.mul(&c), &b.mul(&d));
        assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn partial_trace_bell_state() {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [
            Complex64::new(inv, 0.0),
            ZERO,
            ZERO,
            Complex64::new(inv, 0.0),
        ];
        let rho = CMatrix::outer(&bell);
        let reduced = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        assert!(reduced.max_abs_diff(&CMatrix::diag_real(&[0.5, 0.5])) <= 1e-14);
        assert!((reduced.trace() - rho.trace()).norm() <= 1e-12);
    }

    #[test]
    fn partial_trace_recovers_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let joint = kron(&a, &b);
        let got = partial_trace(&joint, &[2, 3], &[0]).unwrap();
        assert!(got.max_abs_diff(&a.scale(b.trace())) <= 1e-12);
        let got_b = partial_trace(&joint, &[2, 3], &[1]).unwrap();
        assert!(got_b.max_abs_diff(&b.scale(a.trace())) <= 1e-12);
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let m = CMatrix::identity(3);
        assert!(partial_trace(&m, &[2, 2], &[0]).is_err());
    }

    #[test]
    fn sylvester_equal_states_gives_minus_identity() {
        let rho = CMatrix::diag_real(&[0.3, 0.7]);
        for &t in &[0.2, 0.5, 1.0] {
            let z = solve_sylvester(t, &rho, &rho).unwrap();
            assert!(z.max_abs_diff(&CMatrix::identity(2).scale_re(-1.0)) <= 1e-10);
            assert!(sylvester_residual(t, &rho, &rho, &z) <= 1e-10);
        }
    }

    #[test]
    fn sylvester_t_one_closed_form() {
        let rho = CMatrix::diag_real(&[0.2, 0.8]);
        let sigma = CMatrix::diag_real(&[0.6, 0.4]);
        let z = solve_sylvester(1.0, &rho, &sigma).unwrap();
        let expected = CMatrix::diag_real(&[-0.2 / 0.6, -0.8 / 0.4]);
        assert!(z.max_abs_diff(&expected) <= 1e-10);
    }

    #[test]
    fn sylvester_support_violation() {
        let rho = CMatrix::diag_real(&[1.0, 0.0]);
        let sigma = CMatrix::diag_real(&[0.0, 1.0]);
        assert!(matches!(
            solve_sylvester(0.5, &rho, &sigma),
            Err(Error::SupportViolation { .. })
        ));
    }

    #[test]
    fn sylvester_singular_pair_minimum_residual() {
        // Both rank-deficient with common support on the first axis.
        let rho = CMatrix::diag_real(&[1.0, 0.0]);
        let z = solve_sylvester(0.5, &rho, &rho).unwrap();
        assert!(sylvester_residual(0.5, &rho, &rho, &z) <= 1e-6);
    }
}
