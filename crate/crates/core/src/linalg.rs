//! Hermitian linear algebra with an explicit tolerance policy.
//!
//! Everything here is a pure function of immutable inputs. Matrices are
//! dense `nalgebra` matrices of `Complex64`; composite spaces always use the
//! ordering encoding ⊗ probe ⊗ message, i.e. the standard Kronecker index
//! `(e * dim_p + p) * dim_m + m`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest absolute entry of `a - b`. Panics if shapes differ.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn real_diagonal(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| C64::new(v, 0.0)),
    ))
}

/// `|v⟩⟨v|` for a (not necessarily normalized) column vector.
pub fn outer(v: &DVector<C64>) -> CMatrix {
    v * v.adjoint()
}

/// Computational basis vector `|index⟩` in dimension `dim`.
pub fn basis_vector(dim: usize, index: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    v[index] = ONE;
    v
}

/// `|index⟩⟨index|` in dimension `dim`.
pub fn basis_projector(dim: usize, index: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(index, index)] = ONE;
    m
}

/// Real part of `trace(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

fn check_square_finite(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::DimensionMismatch {
            context: "matrix",
            expected: 1,
            found: 0,
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Hermitian operator, symmetrized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    /// Accepts `m` if `max |m - m^dag| <= hermiticity_tol`; stores `(m + m^dag)/2`.
    pub fn new(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_square_finite(&m)?;
        let asym = max_abs_diff(&m, &m.adjoint());
        if asym > tol.hermiticity_tol {
            return Err(Error::NotHermitian {
                max_asymmetry: asym,
                tol: tol.hermiticity_tol,
            });
        }
        Ok(Self::symmetrized(m))
    }

    /// Hermitian part of `m`, no tolerance check.
    pub fn symmetrized(m: CMatrix) -> Self {
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        Self(h)
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        Self(real_diagonal(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(&self.0 * C64::new(factor, 0.0))
    }

    /// Expectation value `trace(rho H)`; real for Hermitian arguments.
    pub fn expectation(&self, rho: &DensityMatrix) -> f64 {
        trace_product(rho.matrix(), &self.0).re
    }
}

/// Positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        let h = Hermitian::new(m, tol)?;
        let trace = h.matrix().trace().re;
        if (trace - 1.0).abs() > tol.trace_tol {
            return Err(Error::TraceNotOne {
                trace,
                tol: tol.trace_tol,
            });
        }
        let min = spectral_decompose(&h).values[0];
        if min < -tol.psd_tol {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
                tol: tol.psd_tol,
            });
        }
        Ok(Self(h.0))
    }

    /// Normalizes a PSD matrix by its trace. Used for states built internally.
    pub(crate) fn from_psd_unnormalized(m: CMatrix) -> Self {
        let h = Hermitian::symmetrized(m).0;
        let t = h.trace().re;
        Self(h / C64::new(t, 0.0))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(Hermitian::symmetrized(m).0)
    }

    /// Pure state `|psi⟩⟨psi|` from an unnormalized amplitude vector.
    pub fn pure(amplitudes: &[C64]) -> Self {
        let v = DVector::from_column_slice(amplitudes);
        let n = v.norm();
        Self(outer(&(v / C64::new(n, 0.0))))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(identity(dim) / C64::new(dim as f64, 0.0))
    }

    pub fn from_real_diagonal(probs: &[f64], tol: &Tolerances) -> Result<Self> {
        Self::new(real_diagonal(probs), tol)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn as_hermitian(&self) -> Hermitian {
        Hermitian(self.0.clone())
    }

    /// Von Neumann entropy in nats, `0 ln 0 := 0`.
    pub fn entropy(&self) -> f64 {
        let dec = spectral_decompose(&self.as_hermitian());
        dec.values
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| -l * l.ln())
            .sum()
    }
}

/// Eigenpairs of a Hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub values: Vec<f64>,
    /// Columns are orthonormal eigenvectors matching `values`.
    pub vectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(Λ) V^dag`.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let fl = f(l);
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= fl;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|l| C64::new(l, 0.0))
    }

    /// Orthonormal columns for the eigenvectors selected by `keep`.
    pub fn columns_where(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        let idx: Vec<usize> = (0..self.dim()).filter(|&j| keep(self.values[j])).collect();
        self.vectors.select_columns(idx.iter())
    }
}

pub fn spectral_decompose(h: &Hermitian) -> SpectralDecomposition {
    let eig = SymmetricEigen::new(h.0.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(order.iter());
    SpectralDecomposition { values, vectors }
}

/// `f(H)` applied to every eigenvalue.
pub fn spectral_apply(h: &Hermitian, f: impl Fn(f64) -> C64) -> CMatrix {
    spectral_decompose(h).apply(f)
}

/// Orthogonal projector with its rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: CMatrix,
    rank: usize,
}

impl Projector {
    /// Validates idempotence and hermiticity within `proj_tol`.
    pub fn new(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_square_finite(&m)?;
        let idempotence = max_abs_diff(&(&m * &m), &m);
        let hermiticity = max_abs_diff(&m, &m.adjoint());
        if idempotence > tol.proj_tol || hermiticity > tol.proj_tol {
            return Err(Error::NotProjector {
                idempotence,
                hermiticity,
            });
        }
        let rank = m.trace().re.round().max(0.0) as usize;
        Ok(Self {
            matrix: Hermitian::symmetrized(m).0,
            rank,
        })
    }

    /// `B B^dag` for a matrix `B` with orthonormal columns.
    pub fn from_orthonormal_columns(cols: &CMatrix) -> Self {
        Self {
            matrix: cols * cols.adjoint(),
            rank: cols.ncols(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
            rank: 0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: identity(dim),
            rank: dim,
        }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        Self {
            matrix: basis_projector(dim, index),
            rank: 1,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn complement(&self) -> Projector {
        Self {
            matrix: identity(self.dim()) - &self.matrix,
            rank: self.dim() - self.rank,
        }
    }

    /// Orthonormal basis of the range.
    pub fn range_basis(&self) -> CMatrix {
        let dec = spectral_decompose(&Hermitian::symmetrized(self.matrix.clone()));
        dec.columns_where(|l| l > 0.5)
    }

    pub fn kron(&self, other: &Projector) -> Projector {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
            rank: self.rank * other.rank,
        }
    }
}

/// Clusters eigenvalues whose consecutive gap is at most `degeneracy_tol`.
///
/// Each cluster's value is the mean of its members. The returned projectors
/// are mutually orthogonal and sum to the identity.
pub fn group_eigenspaces(
    dec: &SpectralDecomposition,
    degeneracy_tol: f64,
) -> Vec<(f64, Projector)> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for j in 0..dec.dim() {
        match groups.last_mut() {
            Some(g) if dec.values[j] - dec.values[*g.last().unwrap()] <= degeneracy_tol => {
                g.push(j)
            }
            _ => groups.push(vec![j]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let value = g.iter().map(|&j| dec.values[j]).sum::<f64>() / g.len() as f64;
            let cols = dec.vectors.select_columns(g.iter());
            (value, Projector::from_orthonormal_columns(&cols))
        })
        .collect()
}

/// Support threshold for a spectrum: `None` when the operator is
/// numerically zero (`lambda_max <= rank_tol`).
pub fn support_cutoff(values: &[f64], rank_tol: f64) -> Option<f64> {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (max > rank_tol).then(|| rank_tol * max)
}

/// Projector onto eigenvectors with eigenvalue above `rank_tol * lambda_max`.
pub fn support_projector(a: &Hermitian, rank_tol: f64) -> Projector {
    let dec = spectral_decompose(a);
    match support_cutoff(&dec.values, rank_tol) {
        None => Projector::zero(a.dim()),
        Some(cut) => Projector::from_orthonormal_columns(&dec.columns_where(|l| l > cut)),
    }
}

/// Applies `f` to the in-support eigenvalues of a PSD operator and assigns
/// `off_support_value` on the kernel.
pub fn func_on_support(
    a: &Hermitian,
    f: impl Fn(f64) -> f64,
    off_support_value: f64,
    rank_tol: f64,
) -> Result<Hermitian> {
    let dec = spectral_decompose(a);
    let cut = support_cutoff(&dec.values, rank_tol);
    let mut mapped = Vec::with_capacity(dec.dim());
    for &l in &dec.values {
        let v = match cut {
            Some(c) if l > c => {
                let v = f(l);
                if !v.is_finite() {
                    return Err(Error::NonFiniteFunctionValue { eigenvalue: l });
                }
                v
            }
            _ => off_support_value,
        };
        mapped.push(v);
    }
    let m = SpectralDecomposition {
        values: mapped,
        vectors: dec.vectors,
    }
    .reconstruct();
    Ok(Hermitian::symmetrized(m))
}

/// Spectrum of the compression of `f` to `range(I - n)`.
///
/// `vectors` are full-space columns spanning `range(I - n)`, each an
/// eigenvector of the compression; `values` are ascending.
#[derive(Debug, Clone)]
pub struct CompressedSpectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn compressed_spectrum(
    f: &Hermitian,
    n: &Projector,
    tol: &Tolerances,
) -> Result<CompressedSpectrum> {
    if f.dim() != n.dim() {
        return Err(Error::DimensionMismatch {
            context: "compressed exponential",
            expected: f.dim(),
            found: n.dim(),
        });
    }
    // Re-validate: callers may hand in projectors assembled from noisy data.
    Projector::new(n.matrix().clone(), tol)?;
    let basis = n.complement().range_basis();
    if basis.ncols() == 0 {
        return Ok(CompressedSpectrum {
            values: Vec::new(),
            vectors: CMatrix::zeros(f.dim(), 0),
        });
    }
    let compressed = Hermitian::symmetrized(basis.adjoint() * f.matrix() * &basis);
    let dec = spectral_decompose(&compressed);
    Ok(CompressedSpectrum {
        values: dec.values,
        vectors: basis * dec.vectors,
    })
}

/// Exponential of `f` with `-infinity` on `range(n)`.
///
/// Returns `Q exp(Q f Q) Q` with `Q = I - n`, the limit of
/// `exp(f - t n)` as `t -> infinity`.
pub fn compressed_exp(f: &Hermitian, n: &Projector, tol: &Tolerances) -> Result<Hermitian> {
    let spec = compressed_spectrum(f, n, tol)?;
    let mut scaled = spec.vectors.clone();
    for (j, &l) in spec.values.iter().enumerate() {
        let e = l.exp();
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= e;
        }
    }
    Ok(Hermitian::symmetrized(scaled * spec.vectors.adjoint()))
}

/// Projector onto the span of the union of the given ranges.
pub fn union_projector(parts: &[&Projector], dim: usize, rank_tol: f64) -> Projector {
    let mut sum = CMatrix::zeros(dim, dim);
    for p in parts {
        sum += p.matrix();
    }
    support_projector(&Hermitian::symmetrized(sum), rank_tol)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Partial trace keeping the factors listed in `keep` (ascending, no
/// duplicates) of a matrix on `dims[0] ⊗ dims[1] ⊗ ...`.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch {
            context: "partial trace",
            expected: total,
            found: m.nrows(),
        });
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch {
            context: "partial trace keep list",
            expected: dims.len(),
            found: keep.len(),
        });
    }
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let digits = |mut idx: usize| -> Vec<usize> {
        let mut out = vec![0; dims.len()];
        for f in (0..dims.len()).rev() {
            out[f] = idx % dims[f];
            idx /= dims[f];
        }
        out
    };
    let kept_index = |d: &[usize]| keep.iter().fold(0, |acc, &k| acc * dims[k] + d[k]);
    let traced: Vec<usize> = (0..dims.len()).filter(|f| !keep.contains(f)).collect();
    let all: Vec<Vec<usize>> = (0..total).map(digits).collect();

    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for r in 0..total {
        for c in 0..total {
            if traced.iter().all(|&f| all[r][f] == all[c][f]) {
                out[(kept_index(&all[r]), kept_index(&all[c]))] += m[(r, c)];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_hermitian, rng_from_seed};
    use std::f64::consts::{E, FRAC_1_SQRT_2, LN_2};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn sigma_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    #[test]
    fn diagonal_decomposition_sorted() {
        let dec = spectral_decompose(&Hermitian::from_real_diagonal(&[2.0, 1.0]));
        assert_eq!(dec.values, vec![1.0, 2.0]);
        assert!((dec.vectors[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((dec.vectors[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_x_eigenpairs() {
        let dec = spectral_decompose(&Hermitian::new(sigma_x(), &tol()).unwrap());
        assert!((dec.values[0] + 1.0).abs() < 1e-14);
        assert!((dec.values[1] - 1.0).abs() < 1e-14);
        let v = dec.vectors.column(0);
        assert!((v[0].norm() - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((v[0] + v[1]).norm() < 1e-14);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = rng_from_seed(11);
        let h = random_hermitian(&mut rng, 6);
        let dec = spectral_decompose(&h);
        assert!(max_abs_diff(&dec.reconstruct(), h.matrix()) < 1e-10);
        let gram = dec.vectors.adjoint() * &dec.vectors;
        assert!(max_abs_diff(&gram, &identity(6)) < 1e-12);
        assert!(dec.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn non_hermitian_rejected_with_diagnostic() {
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        match Hermitian::new(m, &tol()) {
            Err(Error::NotHermitian { max_asymmetry, .. }) => {
                assert!((max_asymmetry - 1.0).abs() < 1e-15)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grouping_exact_degeneracy() {
        let dec = spectral_decompose(&Hermitian::from_real_diagonal(&[1.0, 1.0, 2.0]));
        let groups = group_eigenspaces(&dec, 1e-9);
        assert_eq!(groups.len(), 2);
        assert_eq!((groups[0].0, groups[0].1.rank()), (1.0, 2));
        assert_eq!((groups[1].0, groups[1].1.rank()), (2.0, 1));
    }

    #[test]
    fn grouping_within_tolerance() {
        let dec = spectral_decompose(&Hermitian::from_real_diagonal(&[0.0, 1e-14, 1.0]));
        let groups = group_eigenspaces(&dec, 1e-12);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].1.rank(), 2);
    }

    #[test]
    fn grouping_nondegenerate_sums_to_identity() {
        let dec = spectral_decompose(&Hermitian::from_real_diagonal(&[1.0, 2.0, 3.0]));
        let groups = group_eigenspaces(&dec, 1e-9);
        assert_eq!(groups.len(), 3);
        let sum = groups
            .iter()
            .fold(CMatrix::zeros(3, 3), |acc, (_, p)| acc + p.matrix());
        assert!(max_abs_diff(&sum, &identity(3)) < 1e-14);
    }

    #[test]
    fn support_of_diagonal() {
        let p = support_projector(&Hermitian::from_real_diagonal(&[0.5, 0.5, 0.0]), 1e-12);
        assert_eq!(p.rank(), 2);
        assert!(max_abs_diff(p.matrix(), &real_diagonal(&[1.0, 1.0, 0.0])) < 1e-14);
    }

    #[test]
    fn support_of_pure_state_is_itself() {
        let plus = DensityMatrix::pure(&[ONE, ONE]);
        let p = support_projector(&plus.as_hermitian(), 1e-12);
        assert_eq!(p.rank(), 1);
        assert!(max_abs_diff(p.matrix(), plus.matrix()) < 1e-14);
    }

    #[test]
    fn support_of_average_of_zero_and_plus() {
        let zero = DensityMatrix::pure(&[ONE, ZERO]);
        let plus = DensityMatrix::pure(&[ONE, ONE]);
        let avg = (zero.matrix() + plus.matrix()) * C64::new(0.5, 0.0);
        let h = Hermitian::new(avg, &tol()).unwrap();
        // eigenvalues (1 ± 1/√2)/2
        let dec = spectral_decompose(&h);
        assert!((dec.values[0] - (1.0 - FRAC_1_SQRT_2) / 2.0).abs() < 1e-14);
        let p = support_projector(&h, 1e-12);
        assert_eq!(p.rank(), 2);
        assert!(max_abs_diff(p.matrix(), &identity(2)) < 1e-14);
    }

    #[test]
    fn zero_operator_has_empty_support() {
        let p = support_projector(&Hermitian::zeros(3), 1e-12);
        assert_eq!(p.rank(), 0);
        assert_eq!(max_abs(p.matrix()), 0.0);
    }

    #[test]
    fn pseudo_log_of_singular_diagonal() {
        let l = func_on_support(
            &Hermitian::from_real_diagonal(&[E, 0.0]),
            f64::ln,
            0.0,
            1e-12,
        )
        .unwrap();
        assert!(max_abs_diff(l.matrix(), &real_diagonal(&[1.0, 0.0])) < 1e-14);
    }

    #[test]
    fn pseudo_log_of_maximally_mixed_qubit() {
        let l = func_on_support(
            &DensityMatrix::maximally_mixed(2).as_hermitian(),
            f64::ln,
            0.0,
            1e-12,
        )
        .unwrap();
        assert!(max_abs_diff(l.matrix(), &(identity(2) * C64::new(-LN_2, 0.0))) < 1e-14);
    }

    #[test]
    fn non_finite_function_rejected() {
        let err = func_on_support(
            &Hermitian::from_real_diagonal(&[0.5, 0.5]),
            |_| f64::NAN,
            0.0,
            1e-12,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFiniteFunctionValue { .. }));
    }

    #[test]
    fn state_times_pseudo_inverse_is_support_projector() {
        let mut rng = rng_from_seed(5);
        for d in 1..=5 {
            for rank in 1..=d {
                let rho = random_density(&mut rng, d, rank);
                let inv = func_on_support(&rho.as_hermitian(), |x| 1.0 / x, 0.0, 1e-12).unwrap();
                let p = support_projector(&rho.as_hermitian(), 1e-12);
                assert_eq!(p.rank(), rank);
                assert!(max_abs_diff(&(rho.matrix() * inv.matrix()), p.matrix()) < 1e-9);
            }
        }
    }

    #[test]
    fn pseudo_log_then_exp_on_support_recovers_state() {
        let mut rng = rng_from_seed(6);
        for rank in 1..=4 {
            let rho = random_density(&mut rng, 4, rank);
            let l = func_on_support(&rho.as_hermitian(), f64::ln, 0.0, 1e-12).unwrap();
            let p = support_projector(&rho.as_hermitian(), 1e-12);
            let back = p.matrix() * spectral_apply(&l, |x| C64::new(x.exp(), 0.0)) * p.matrix();
            assert!(max_abs_diff(&back, rho.matrix()) < 1e-9);
        }
    }

    #[test]
    fn compressed_exp_of_zero_on_one_dim_complement() {
        let n = Projector::basis(2, 1);
        let e = compressed_exp(&Hermitian::zeros(2), &n, &tol()).unwrap();
        assert!(max_abs_diff(e.matrix(), &basis_projector(2, 0)) < 1e-15);
    }

    #[test]
    fn compressed_exp_without_suppression_is_plain_exp() {
        let (a, b) = (0.3, -1.7);
        let e = compressed_exp(
            &Hermitian::from_real_diagonal(&[a, b]),
            &Projector::zero(2),
            &tol(),
        )
        .unwrap();
        assert!(max_abs_diff(e.matrix(), &real_diagonal(&[a.exp(), b.exp()])) < 1e-14);
    }

    #[test]
    fn compressed_exp_matches_pade_exponential() {
        let mut rng = rng_from_seed(8);
        for d in 1..=6 {
            let f = random_hermitian(&mut rng, d);
            let e = compressed_exp(&f, &Projector::zero(d), &tol()).unwrap();
            let pade = f.matrix().clone().exp();
            assert!(max_abs_diff(e.matrix(), &pade) < 1e-10 * max_abs(&pade).max(1.0));
        }
    }

    #[test]
    fn compressed_exp_of_pauli_x_and_log_regularization() {
        let n = Projector::basis(2, 1);
        let fx = Hermitian::new(sigma_x(), &tol()).unwrap();
        let limit = compressed_exp(&fx, &n, &tol()).unwrap();
        assert!(max_abs_diff(limit.matrix(), &basis_projector(2, 0)) < 1e-15);

        // exp(σx + ln(ε)|e2⟩⟨e2|) approaches the limit as 1/|ln ε|: the
        // residual coupling of the suppressed direction shifts the surviving
        // eigenvalue by ~1/|ln ε|.
        let mut errors = Vec::new();
        for eps in [1e-4_f64, 1e-6, 1e-8] {
            let reg = sigma_x() + basis_projector(2, 1) * C64::new(eps.ln(), 0.0);
            errors.push((eps, max_abs_diff(&reg.exp(), limit.matrix())));
        }
        assert!(errors.windows(2).all(|w| w[1].1 < w[0].1));
        for (eps, err) in errors {
            let scaled = err * eps.ln().abs();
            assert!(
                (0.9..1.2).contains(&scaled),
                "eps {eps}: err*|ln eps| = {scaled}"
            );
        }
    }

    #[test]
    fn compressed_exp_rejects_non_projector() {
        let bad = Projector {
            matrix: real_diagonal(&[0.5, 0.0]),
            rank: 1,
        };
        assert!(matches!(
            compressed_exp(&Hermitian::zeros(2), &bad, &tol()),
            Err(Error::NotProjector { .. })
        ));
    }

    #[test]
    fn kron_examples() {
        assert_eq!(kron(&identity(2), &identity(3)), identity(6));
        let k = kron(&real_diagonal(&[1.0, 2.0]), &real_diagonal(&[1.0, 0.0]));
        assert_eq!(k, real_diagonal(&[1.0, 0.0, 2.0, 0.0]));
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = rng_from_seed(9);
        let m: Vec<CMatrix> = (0..4)
            .map(|_| crate::random::complex_gaussian(&mut rng, 2, 2))
            .collect();
        let lhs = kron(&m[0], &m[1]) * kron(&m[2], &m[3]);
        let rhs = kron(&(&m[0] * &m[2]), &(&m[1] * &m[3]));
        assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = rng_from_seed(10);
        let rho = random_density(&mut rng, 2, 2);
        let sigma = random_density(&mut rng, 3, 3);
        let joint = kron(rho.matrix(), sigma.matrix());
        let kept = partial_trace(&joint, &[2, 3], &[0]).unwrap();
        assert!(max_abs_diff(&kept, rho.matrix()) < 1e-14);
        let kept = partial_trace(&joint, &[2, 3], &[1]).unwrap();
        assert!(max_abs_diff(&kept, sigma.matrix()) < 1e-14);
    }

    #[test]
    fn partial_trace_over_everything_is_trace() {
        let mut rng = rng_from_seed(12);
        let m = crate::random::complex_gaussian(&mut rng, 6, 6);
        let t = partial_trace(&m, &[2, 3], &[]).unwrap();
        assert_eq!(t.shape(), (1, 1));
        assert!((t[(0, 0)] - m.trace()).norm() < 1e-13);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut rng = rng_from_seed(13);
        let m = crate::random::complex_gaussian(&mut rng, 12, 12);
        for keep in [&[0usize][..], &[1], &[2], &[0, 2], &[1, 2], &[0, 1, 2]] {
            let t = partial_trace(&m, &[2, 3, 2], keep).unwrap();
            assert!((t.trace() - m.trace()).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        assert!(matches!(
            partial_trace(&identity(5), &[2, 3], &[0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
