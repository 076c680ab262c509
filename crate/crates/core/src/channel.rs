//! Trace-preserving completely positive maps in Kraus form.

use crate::error::{Error, Result};
use crate::linalg::{
    basis_projector, identity, kron, max_abs_diff, spectral_apply, spectral_decompose, CMatrix,
    DensityMatrix, Hermitian, C64, ONE, ZERO,
};
use crate::tolerance::Tolerances;

/// Square channel `ρ ↦ Σ_k K_k ρ K_k^dag` with `Σ_k K_k^dag K_k = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    kraus_ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(kraus_ops: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        let channel = Self::from_ops_unchecked(kraus_ops)?;
        let defect = channel.completeness_defect();
        if defect > tol.proj_tol {
            return Err(Error::KrausIncomplete { defect });
        }
        Ok(channel)
    }

    /// Shape checks only; completeness is left to [`validate_tcp`].
    pub fn from_ops_unchecked(kraus_ops: Vec<CMatrix>) -> Result<Self> {
        let dim = kraus_ops
            .first()
            .map(|k| k.nrows())
            .ok_or(Error::KrausIncomplete { defect: 1.0 })?;
        for k in &kraus_ops {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "Kraus operator",
                    expected: dim,
                    found: if k.nrows() != dim {
                        k.nrows()
                    } else {
                        k.ncols()
                    },
                });
            }
        }
        Ok(Self { kraus_ops })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus_ops: vec![identity(dim)],
        }
    }

    pub fn unitary(u: CMatrix) -> Self {
        Self { kraus_ops: vec![u] }
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus_ops
    }

    pub fn dim(&self) -> usize {
        self.kraus_ops[0].nrows()
    }

    pub fn completeness_defect(&self) -> f64 {
        let d = self.dim();
        let sum = self
            .kraus_ops
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        max_abs_diff(&sum, &identity(d))
    }

    /// Linear action on an arbitrary operator.
    pub fn apply_operator(&self, x: &CMatrix) -> CMatrix {
        self.kraus_ops
            .iter()
            .fold(CMatrix::zeros(x.nrows(), x.ncols()), |acc, k| {
                acc + k * x * k.adjoint()
            })
    }

    /// Conjugates every Kraus operator: `K ↦ U K U^dag`.
    pub fn conjugated(&self, u: &CMatrix) -> Self {
        Self {
            kraus_ops: self.kraus_ops.iter().map(|k| u * k * u.adjoint()).collect(),
        }
    }
}

pub fn apply(c: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if c.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "channel input",
            expected: c.dim(),
            found: rho.dim(),
        });
    }
    Ok(DensityMatrix::from_matrix_unchecked(
        c.apply_operator(rho.matrix()),
    ))
}

/// Outcome of [`validate_tcp`].
#[derive(Debug, Clone, PartialEq)]
pub struct TcpReport {
    /// `max |Σ K^dag K - I|`.
    pub completeness_defect: f64,
    /// Smallest eigenvalue of the Choi matrix.
    pub choi_min_eigenvalue: f64,
    pub trace_preserving: bool,
    pub completely_positive: bool,
}

impl TcpReport {
    pub fn is_tcp(&self) -> bool {
        self.trace_preserving && self.completely_positive
    }
}

/// Choi matrix `Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)` of a linear map given by its action.
pub fn choi_matrix(dim: usize, action: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let mut choi = CMatrix::zeros(dim * dim, dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut unit = CMatrix::zeros(dim, dim);
            unit[(i, j)] = ONE;
            let mut e_ij = CMatrix::zeros(dim, dim);
            e_ij[(i, j)] = ONE;
            choi += kron(&unit, &action(&e_ij));
        }
    }
    choi
}

pub fn choi_min_eigenvalue(dim: usize, action: impl Fn(&CMatrix) -> CMatrix) -> f64 {
    let choi = Hermitian::symmetrized(choi_matrix(dim, action));
    spectral_decompose(&choi).values[0]
}

pub fn validate_tcp(c: &KrausChannel, tol: &Tolerances) -> TcpReport {
    let completeness_defect = c.completeness_defect();
    let choi_min_eigenvalue = choi_min_eigenvalue(c.dim(), |x| c.apply_operator(x));
    TcpReport {
        completeness_defect,
        choi_min_eigenvalue,
        trace_preserving: completeness_defect <= tol.proj_tol,
        completely_positive: choi_min_eigenvalue >= -tol.psd_tol,
    }
}

/// Piecewise-constant Hamiltonian schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionProtocol {
    steps: Vec<(Hermitian, f64)>,
}

impl EvolutionProtocol {
    pub fn new(steps: Vec<(Hermitian, f64)>) -> Result<Self> {
        if let Some(dim) = steps.first().map(|s| s.0.dim()) {
            for (h, t) in &steps {
                if !(*t >= 0.0 && t.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name: "duration",
                        value: *t,
                    });
                }
                if h.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        context: "protocol Hamiltonian",
                        expected: dim,
                        found: h.dim(),
                    });
                }
            }
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[(Hermitian, f64)] {
        &self.steps
    }

    /// Hamiltonian in force at the end of the protocol.
    pub fn final_hamiltonian(&self) -> Option<&Hermitian> {
        self.steps.last().map(|s| &s.0)
    }

    /// `U = exp(-i H_n t_n) ··· exp(-i H_1 t_1)`; later steps act on the left.
    pub fn unitary(&self, dim: usize) -> CMatrix {
        self.steps.iter().fold(identity(dim), |u, (h, t)| {
            spectral_apply(h, |e| C64::from_polar(1.0, -e * t)) * u
        })
    }
}

pub fn unitary_from_protocol(p: &EvolutionProtocol, dim: usize) -> KrausChannel {
    KrausChannel::unitary(p.unitary(dim))
}

/// Standard test channels on a `dim`-level system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StandardChannel {
    Identity,
    /// `ρ ↦ (1 - q) ρ + q I/d`, Kraus form over the Weyl operators.
    Depolarizing(f64),
    /// `ρ ↦ (1 - q) ρ + q diag(ρ)`.
    Dephasing(f64),
    /// Cyclic shift `X` with probability `q`.
    BitFlip(f64),
    /// Every excited level decays to `|0⟩` with probability `q`.
    AmplitudeDamping(f64),
}

fn shift(dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |i, j| if i == (j + 1) % dim { ONE } else { ZERO })
}

fn clock(dim: usize) -> CMatrix {
    let w = 2.0 * std::f64::consts::PI / dim as f64;
    CMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::from_polar(1.0, w * i as f64)
        } else {
            ZERO
        }
    })
}

pub fn standard_channel(kind: StandardChannel, dim: usize) -> Result<KrausChannel> {
    let q = match kind {
        StandardChannel::Identity => 0.0,
        StandardChannel::Depolarizing(q)
        | StandardChannel::Dephasing(q)
        | StandardChannel::BitFlip(q)
        | StandardChannel::AmplitudeDamping(q) => q,
    };
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter {
            name: "q",
            value: q,
        });
    }
    let c = |x: f64| C64::new(x.sqrt(), 0.0);
    let ops = match kind {
        StandardChannel::Identity => vec![identity(dim)],
        StandardChannel::Depolarizing(q) => {
            let d2 = (dim * dim) as f64;
            let (x, z) = (shift(dim), clock(dim));
            let mut ops = Vec::with_capacity(dim * dim);
            let mut xa = identity(dim);
            for a in 0..dim {
                let mut zb = identity(dim);
                for b in 0..dim {
                    let weight = if a == 0 && b == 0 {
                        1.0 - q + q / d2
                    } else {
                        q / d2
                    };
                    ops.push(&xa * &zb * c(weight));
                    zb = &zb * &z;
                }
                xa = &xa * &x;
            }
            ops
        }
        StandardChannel::Dephasing(q) => {
            let mut ops = vec![identity(dim) * c(1.0 - q)];
            ops.extend((0..dim).map(|i| basis_projector(dim, i) * c(q)));
            ops
        }
        StandardChannel::BitFlip(q) => vec![identity(dim) * c(1.0 - q), shift(dim) * c(q)],
        StandardChannel::AmplitudeDamping(q) => {
            let mut k0 = identity(dim) * c(1.0 - q);
            k0[(0, 0)] = ONE;
            let mut ops = vec![k0];
            for i in 1..dim {
                let mut k = CMatrix::zeros(dim, dim);
                k[(0, i)] = c(q);
                ops.push(k);
            }
            ops
        }
    };
    Ok(KrausChannel { kraus_ops: ops })
}
