//! Projective measurements with back-action, observables whose spectrum
//! may contain `+infinity`, POVMs, and their Naimark dilation onto an
//! encoding ⊗ probe space.

use crate::error::{Error, Result};
use crate::linalg::{
    basis_projector, compressed_spectrum, group_eigenspaces, identity, kron, max_abs, max_abs_diff,
    spectral_decompose, trace_product, CMatrix, DensityMatrix, Hermitian, Projector,
    SpectralDecomposition, C64, ZERO,
};
use crate::tolerance::Tolerances;

fn check_orthogonal_complete(
    projectors: &[&CMatrix],
    dim: usize,
    context: &'static str,
    tol: &Tolerances,
) -> Result<()> {
    let mut sum = CMatrix::zeros(dim, dim);
    for (a, pa) in projectors.iter().enumerate() {
        if pa.nrows() != dim {
            return Err(Error::DimensionMismatch {
                context,
                expected: dim,
                found: pa.nrows(),
            });
        }
        sum += *pa;
        for pb in &projectors[a + 1..] {
            let overlap = max_abs(&(*pa * *pb));
            if overlap > tol.proj_tol {
                return Err(Error::NotOrthogonal { defect: overlap });
            }
        }
    }
    let defect = max_abs_diff(&sum, &identity(dim));
    if defect > tol.proj_tol {
        return Err(Error::Incomplete {
            context,
            defect,
            tol: tol.proj_tol,
        });
    }
    Ok(())
}

/// One spectral branch: value (finite or `+infinity`) and its eigenprojector.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub value: f64,
    pub projector: Projector,
}

impl Branch {
    pub fn is_infinite(&self) -> bool {
        self.value == f64::INFINITY
    }
}

/// Observable `Σ a_m Π_m` whose spectrum may include a single `+infinity`
/// branch, so that `exp(-A)` is bounded and vanishes on that branch.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedObservable {
    branches: Vec<Branch>,
    dim: usize,
}

impl ExtendedObservable {
    /// Validates orthogonality, completeness and distinctness. Several
    /// `+infinity` branches are merged into one.
    pub fn new(branches: Vec<(f64, Projector)>, tol: &Tolerances) -> Result<Self> {
        let dim = branches
            .first()
            .map(|b| b.1.dim())
            .ok_or_else(|| Error::InvalidObservable("no branches".into()))?;
        let refs: Vec<&CMatrix> = branches.iter().map(|b| b.1.matrix()).collect();
        check_orthogonal_complete(&refs, dim, "observable projectors", tol)?;

        let mut finite: Vec<Branch> = Vec::new();
        let mut infinite: Option<CMatrix> = None;
        for (value, projector) in branches {
            if value.is_nan() || value == f64::NEG_INFINITY {
                return Err(Error::InvalidObservable(format!("branch value {value}")));
            }
            if value == f64::INFINITY {
                let acc = infinite.get_or_insert_with(|| CMatrix::zeros(dim, dim));
                *acc += projector.matrix();
            } else if projector.rank() > 0 {
                finite.push(Branch { value, projector });
            }
        }
        finite.sort_by(|a, b| a.value.total_cmp(&b.value));
        for w in finite.windows(2) {
            if w[1].value - w[0].value <= tol.degeneracy_tol {
                return Err(Error::InvalidObservable(format!(
                    "branch values {} and {} are not distinct",
                    w[0].value, w[1].value
                )));
            }
        }
        if let Some(m) = infinite {
            let projector = Projector::new(m, tol)?;
            if projector.rank() > 0 {
                finite.push(Branch {
                    value: f64::INFINITY,
                    projector,
                });
            }
        }
        Ok(Self {
            branches: finite,
            dim,
        })
    }

    /// Grouped eigenspaces of `h`; no infinite branch.
    pub fn from_hermitian(h: &Hermitian, tol: &Tolerances) -> Self {
        Self::from_spectrum(&spectral_decompose(h), None, tol)
    }

    /// Observable equal to the compression of `h` on `range(I - infinite)`
    /// and `+infinity` on `range(infinite)`.
    pub fn with_infinite_part(
        h: &Hermitian,
        infinite: &Projector,
        tol: &Tolerances,
    ) -> Result<Self> {
        let spec = compressed_spectrum(h, infinite, tol)?;
        let dec = SpectralDecomposition {
            values: spec.values,
            vectors: spec.vectors,
        };
        Ok(Self::from_spectrum(&dec, Some(infinite), tol))
    }

    fn from_spectrum(
        dec: &SpectralDecomposition,
        infinite: Option<&Projector>,
        tol: &Tolerances,
    ) -> Self {
        let mut branches: Vec<Branch> = group_eigenspaces(dec, tol.degeneracy_tol)
            .into_iter()
            .map(|(value, projector)| Branch { value, projector })
            .collect();
        let dim = infinite
            .map(|p| p.dim())
            .unwrap_or_else(|| dec.vectors.nrows());
        if let Some(p) = infinite.filter(|p| p.rank() > 0) {
            branches.push(Branch {
                value: f64::INFINITY,
                projector: p.clone(),
            });
        }
        Self { branches, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Finite branches ascending, then the `+infinity` branch if present.
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn has_infinite_branch(&self) -> bool {
        self.branches.last().is_some_and(Branch::is_infinite)
    }

    pub fn infinite_projector(&self) -> Projector {
        self.branches
            .iter()
            .find(|b| b.is_infinite())
            .map(|b| b.projector.clone())
            .unwrap_or_else(|| Projector::zero(self.dim))
    }

    /// `Σ a_m Π_m` over the finite branches.
    pub fn finite_part(&self) -> Hermitian {
        let m = self
            .branches
            .iter()
            .filter(|b| !b.is_infinite())
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, b| {
                acc + b.projector.matrix() * C64::new(b.value, 0.0)
            });
        Hermitian::symmetrized(m)
    }

    pub fn measurement(&self) -> ProjectiveMeasurement {
        ProjectiveMeasurement {
            projectors: self.branches.iter().map(|b| b.projector.clone()).collect(),
        }
    }
}

/// `observable_from_hermitian`.
pub fn observable_from_hermitian(h: &Hermitian, tol: &Tolerances) -> ExtendedObservable {
    ExtendedObservable::from_hermitian(h, tol)
}

/// Complete set of mutually orthogonal projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    projectors: Vec<Projector>,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<Projector>, tol: &Tolerances) -> Result<Self> {
        let dim = projectors
            .first()
            .map(Projector::dim)
            .ok_or(Error::Incomplete {
                context: "projective measurement",
                defect: 1.0,
                tol: tol.proj_tol,
            })?;
        let refs: Vec<&CMatrix> = projectors.iter().map(Projector::matrix).collect();
        check_orthogonal_complete(&refs, dim, "projective measurement", tol)?;
        Ok(Self { projectors })
    }

    /// Measurement in the computational basis.
    pub fn computational(dim: usize) -> Self {
        Self {
            projectors: (0..dim).map(|i| Projector::basis(dim, i)).collect(),
        }
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    /// `Σ_m Π_m X Π_m` for an arbitrary operator `X`.
    pub fn dephase(&self, x: &CMatrix) -> CMatrix {
        self.projectors
            .iter()
            .fold(CMatrix::zeros(x.nrows(), x.ncols()), |acc, p| {
                acc + p.matrix() * x * p.matrix()
            })
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "measurement",
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }
}

/// Selective outcome of a projective measurement.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub probability: f64,
    /// `None` when `probability <= prob_floor`.
    pub post_state: Option<DensityMatrix>,
}

pub fn measure(
    rho: &DensityMatrix,
    m: &ProjectiveMeasurement,
    tol: &Tolerances,
) -> Result<Vec<Outcome>> {
    m.check_dim(rho.dim())?;
    Ok(m.projectors
        .iter()
        .map(|p| {
            let block = p.matrix() * rho.matrix() * p.matrix();
            let probability = block.trace().re.max(0.0);
            let post_state = (probability > tol.prob_floor)
                .then(|| DensityMatrix::from_matrix_unchecked(block / C64::new(probability, 0.0)));
            Outcome {
                probability,
                post_state,
            }
        })
        .collect())
}

/// Non-selective back-action `Σ_m Π_m ρ Π_m`.
pub fn measurement_channel(
    rho: &DensityMatrix,
    m: &ProjectiveMeasurement,
) -> Result<DensityMatrix> {
    m.check_dim(rho.dim())?;
    Ok(DensityMatrix::from_matrix_unchecked(
        m.dephase(rho.matrix()),
    ))
}

/// Positive operator valued measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<Hermitian>,
}

impl Povm {
    pub fn new(elements: Vec<Hermitian>, tol: &Tolerances) -> Result<Self> {
        let dim = elements
            .first()
            .map(Hermitian::dim)
            .ok_or(Error::Incomplete {
                context: "POVM",
                defect: 1.0,
                tol: tol.proj_tol,
            })?;
        let mut sum = CMatrix::zeros(dim, dim);
        for e in &elements {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "POVM element",
                    expected: dim,
                    found: e.dim(),
                });
            }
            let min = spectral_decompose(e).values[0];
            if min < -tol.psd_tol {
                return Err(Error::NotPsd {
                    min_eigenvalue: min,
                    tol: tol.psd_tol,
                });
            }
            sum += e.matrix();
        }
        let defect = max_abs_diff(&sum, &identity(dim));
        if defect > tol.proj_tol {
            return Err(Error::Incomplete {
                context: "POVM",
                defect,
                tol: tol.proj_tol,
            });
        }
        Ok(Self { elements })
    }

    pub(crate) fn from_elements_unchecked(elements: Vec<Hermitian>) -> Self {
        Self { elements }
    }

    /// Rank-one projective POVM onto the computational basis.
    pub fn computational(dim: usize) -> Self {
        Self {
            elements: (0..dim)
                .map(|i| Hermitian::symmetrized(basis_projector(dim, i)))
                .collect(),
        }
    }

    pub fn from_measurement(m: &ProjectiveMeasurement) -> Self {
        Self {
            elements: m
                .projectors()
                .iter()
                .map(|p| Hermitian::symmetrized(p.matrix().clone()))
                .collect(),
        }
    }

    pub fn elements(&self) -> &[Hermitian] {
        &self.elements
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }
}

/// `trace(ρ M_k)` with negative rounding noise clipped to zero.
pub fn povm_probabilities(rho: &DensityMatrix, p: &Povm) -> Result<Vec<f64>> {
    if rho.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            context: "POVM probabilities",
            expected: p.dim(),
            found: rho.dim(),
        });
    }
    Ok(p.elements
        .iter()
        .map(|m| trace_product(rho.matrix(), m.matrix()).re.max(0.0))
        .collect())
}

/// Orthogonal realization of a POVM on encoding ⊗ probe.
///
/// The probe starts in `|0⟩`; `Π_k = U^dag (I ⊗ |k⟩⟨k|) U` where `U` extends
/// the isometry `V|ψ⟩ = Σ_k √M_k|ψ⟩ ⊗ |k⟩`.
#[derive(Debug, Clone)]
pub struct NaimarkDilation {
    pub encoding_dim: usize,
    pub probe_dim: usize,
    pub probe_state_index: usize,
    pub projectors: Vec<Projector>,
    pub embedding_unitary: CMatrix,
}

impl NaimarkDilation {
    pub fn total_dim(&self) -> usize {
        self.encoding_dim * self.probe_dim
    }

    /// `|0⟩⟨0|` on the probe.
    pub fn probe_state(&self) -> CMatrix {
        basis_projector(self.probe_dim, self.probe_state_index)
    }

    /// `trace((ρ ⊗ |0⟩⟨0|) Π_k)` for every outcome.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.encoding_dim {
            return Err(Error::DimensionMismatch {
                context: "dilated measurement",
                expected: self.encoding_dim,
                found: rho.dim(),
            });
        }
        let joint = kron(rho.matrix(), &self.probe_state());
        Ok(self
            .projectors
            .iter()
            .map(|p| trace_product(&joint, p.matrix()).re.max(0.0))
            .collect())
    }

    /// `⟨0|Π_k|0⟩` as operators on the encoding space.
    pub fn reduced_elements(&self) -> Vec<CMatrix> {
        let (d, k, z) = (self.encoding_dim, self.probe_dim, self.probe_state_index);
        self.projectors
            .iter()
            .map(|p| CMatrix::from_fn(d, d, |a, b| p.matrix()[(a * k + z, b * k + z)]))
            .collect()
    }
}

/// Canonical square-root dilation with probe dimension `K`.
pub fn naimark_dilate(p: &Povm, tol: &Tolerances) -> Result<NaimarkDilation> {
    dilate_with_rotation(p, None, tol)
}

/// Same isometry as [`naimark_dilate`] but with the completion columns
/// mixed by `rotation`, a unitary of size `d(K-1)`. Every such choice is a
/// valid dilation of the same POVM.
pub fn naimark_dilate_rotated(
    p: &Povm,
    rotation: &CMatrix,
    tol: &Tolerances,
) -> Result<NaimarkDilation> {
    dilate_with_rotation(p, Some(rotation), tol)
}

fn dilate_with_rotation(
    p: &Povm,
    rotation: Option<&CMatrix>,
    tol: &Tolerances,
) -> Result<NaimarkDilation> {
    let p = Povm::new(p.elements.clone(), tol)?;
    let (d, k) = (p.dim(), p.outcomes());
    let n = d * k;

    // V[(i, k), a] = (√M_k)[i, a]
    let mut isometry = CMatrix::zeros(n, d);
    for (outcome, m) in p.elements.iter().enumerate() {
        let root = spectral_decompose(m).apply(|l| C64::new(l.max(0.0).sqrt(), 0.0));
        for i in 0..d {
            for a in 0..d {
                isometry[(i * k + outcome, a)] = root[(i, a)];
            }
        }
    }

    let mut basis: Vec<nalgebra::DVector<C64>> =
        (0..d).map(|a| isometry.column(a).into_owned()).collect();
    let needed = n - d;
    let mut completion = Vec::with_capacity(needed);
    let mut remaining: Vec<usize> = (0..n).collect();
    let project_out = |v: &mut nalgebra::DVector<C64>, against: &[nalgebra::DVector<C64>]| {
        for _ in 0..2 {
            for b in against {
                let c = b.dotc(v);
                *v -= b * c;
            }
        }
    };
    while completion.len() < needed {
        // Greedy: the canonical candidate with the largest residual, lowest index on ties.
        let mut best: Option<(usize, nalgebra::DVector<C64>, f64)> = None;
        for (pos, &i) in remaining.iter().enumerate() {
            let mut v = nalgebra::DVector::from_element(n, ZERO);
            v[i] = C64::new(1.0, 0.0);
            project_out(&mut v, &basis);
            let norm = v.norm();
            if best.as_ref().is_none_or(|b| norm > b.2) {
                best = Some((pos, v, norm));
            }
        }
        match best {
            Some((pos, v, norm)) if norm > tol.rank_tol => {
                remaining.remove(pos);
                let v = v / C64::new(norm, 0.0);
                basis.push(v.clone());
                completion.push(v);
            }
            _ => {
                return Err(Error::DilationCompletion {
                    found: completion.len(),
                    needed,
                })
            }
        }
    }

    if let Some(w) = rotation {
        if w.nrows() != needed || w.ncols() != needed {
            return Err(Error::DimensionMismatch {
                context: "dilation completion rotation",
                expected: needed,
                found: w.nrows(),
            });
        }
        let cols = CMatrix::from_columns(&completion);
        let rotated = cols * w;
        completion = (0..needed)
            .map(|j| rotated.column(j).into_owned())
            .collect();
    }

    let mut unitary = CMatrix::zeros(n, n);
    let mut extra = completion.iter();
    for a in 0..d {
        for b in 0..k {
            let col = if b == 0 {
                isometry.column(a).into_owned()
            } else {
                extra.next().expect("completion has d(K-1) columns").clone()
            };
            unitary.set_column(a * k + b, &col);
        }
    }

    // U^dag (I ⊗ |k⟩⟨k|) U = B B^dag with B the columns (i, k) of U^dag.
    let u_dag = unitary.adjoint();
    let projectors = (0..k)
        .map(|outcome| {
            let idx: Vec<usize> = (0..d).map(|i| i * k + outcome).collect();
            Projector::from_orthonormal_columns(&u_dag.select_columns(idx.iter()))
        })
        .collect();

    Ok(NaimarkDilation {
        encoding_dim: d,
        probe_dim: k,
        probe_state_index: 0,
        projectors,
        embedding_unitary: unitary,
    })
}
