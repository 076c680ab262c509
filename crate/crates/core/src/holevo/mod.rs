//! Classical-quantum channels and the sharpened Holevo bound
//! `χ - I >= -ln γ >= 0`.
//!
//! The efficacy is obtained by running the two-time engine on the composite
//! space encoding ⊗ probe ⊗ message (dimension `d K J`) with the identity
//! channel:
//!
//! * `ρ₀ = Σ_j π_j ρ_j ⊗ |0⟩⟨0| ⊗ |j⟩⟨j|`
//! * `A^i = Σ_j ln(ρ_j^+) ⊗ |0⟩⟨0| ⊗ |j⟩⟨j|` (pseudo-inverse, `0` off support)
//! * `A^f = -ln(ρ̄ ⊗ |0⟩⟨0|) ⊗ I - Σ_kj I_kj Π_k ⊗ |j⟩⟨j|`, `+infinity` on the
//!   kernel of `ρ̄ ⊗ |0⟩⟨0|` and on every `Π_k ⊗ |j⟩⟨j|` with `π_{k|j} = 0`.

mod optimize;
mod random;

pub use optimize::{optimize_measurement, OptimizeConfig, OptimizeResult};
pub use random::{random_instance, random_instance_with, StateKind};

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::compressed_exp;
use crate::linalg::{
    basis_projector, func_on_support, identity, kron, max_abs, spectral_decompose,
    support_projector, trace_product, union_projector, CMatrix, DensityMatrix, Hermitian,
    Projector, C64,
};
use crate::measurement::{
    naimark_dilate, povm_probabilities, ExtendedObservable, NaimarkDilation, Povm,
};
use crate::tolerance::Tolerances;
use crate::ttm::{verify_ft, FtTolerance, TwoTimeProtocol};

/// Acceptance thresholds for the bound, chain, and identities.
pub const BOUND_TOL: f64 = 1e-8;
pub const GAMMA_TOL: f64 = 1e-9;
pub const ROUTE_TOL: f64 = 1e-8;

/// Code words with priors `π_j` and received states `ρ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    priors: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl Ensemble {
    /// Words with zero prior are dropped.
    pub fn new(priors: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if priors.len() != states.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} priors for {} states",
                priors.len(),
                states.len()
            )));
        }
        if priors.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidEnsemble("priors must be non-negative".into()));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidEnsemble(format!("priors sum to {total}")));
        }
        let (priors, states): (Vec<f64>, Vec<DensityMatrix>) = priors
            .into_iter()
            .zip(states)
            .filter(|(p, _)| *p > 0.0)
            .unzip();
        let dim = states[0].dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                context: "ensemble state",
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Self { priors, states })
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn words(&self) -> usize {
        self.priors.len()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// `ρ̄ = Σ_j π_j ρ_j`.
    pub fn average_state(&self) -> DensityMatrix {
        let d = self.dim();
        let m = self
            .priors
            .iter()
            .zip(&self.states)
            .fold(CMatrix::zeros(d, d), |acc, (p, s)| {
                acc + s.matrix() * C64::new(*p, 0.0)
            });
        DensityMatrix::from_matrix_unchecked(m)
    }

    /// Same ensemble with words reordered: new word `i` is old word `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            priors: order.iter().map(|&i| self.priors[i]).collect(),
            states: order.iter().map(|&i| self.states[i].clone()).collect(),
        }
    }
}

/// Ensemble plus the receiver's POVM.
#[derive(Debug, Clone, PartialEq)]
pub struct CqChannelInstance {
    pub ensemble: Ensemble,
    pub povm: Povm,
}

impl CqChannelInstance {
    pub fn new(ensemble: Ensemble, povm: Povm) -> Result<Self> {
        if ensemble.dim() != povm.dim() {
            return Err(Error::DimensionMismatch {
                context: "POVM on encoding space",
                expected: ensemble.dim(),
                found: povm.dim(),
            });
        }
        Ok(Self { ensemble, povm })
    }
}

/// `π_{k|j} = trace(ρ_j M_k)`, rows indexed by word.
pub fn conditional_probabilities(inst: &CqChannelInstance) -> Vec<Vec<f64>> {
    inst.ensemble
        .states
        .iter()
        .map(|s| povm_probabilities(s, &inst.povm).expect("dimensions checked at construction"))
        .collect()
}

/// `π_k = Σ_j π_j π_{k|j}`.
pub fn outcome_marginal(priors: &[f64], conditional: &[Vec<f64>]) -> Vec<f64> {
    let k = conditional[0].len();
    (0..k)
        .map(|o| {
            priors
                .iter()
                .zip(conditional)
                .map(|(p, row)| p * row[o])
                .sum()
        })
        .collect()
}

/// Shannon entropy in nats.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// `I = Σ_jk π_j π_{k|j} ln(π_{k|j}/π_k)` over terms with `π_j π_{k|j} > prob_floor`.
pub fn mutual_information(inst: &CqChannelInstance, tol: &Tolerances) -> f64 {
    let priors = inst.ensemble.priors();
    let cond = conditional_probabilities(inst);
    let marginal = outcome_marginal(priors, &cond);
    let mut info = 0.0;
    for (pj, row) in priors.iter().zip(&cond) {
        for (pkj, pk) in row.iter().zip(&marginal) {
            let w = pj * pkj;
            if w > tol.prob_floor {
                info += w * (pkj / pk).ln();
            }
        }
    }
    info.max(0.0)
}

/// `(S({π_j}), Σ_k π_k Σ_j π_{j|k} ln π_{j|k})`; the two terms sum to `I`.
pub fn mutual_information_decomposition(inst: &CqChannelInstance, tol: &Tolerances) -> (f64, f64) {
    let priors = inst.ensemble.priors();
    let cond = conditional_probabilities(inst);
    let marginal = outcome_marginal(priors, &cond);
    let mut conditional_term = 0.0;
    for (k, pk) in marginal.iter().enumerate() {
        for (pj, row) in priors.iter().zip(&cond) {
            let joint = pj * row[k];
            if joint > tol.prob_floor {
                let posterior = joint / pk;
                conditional_term += pk * posterior * posterior.ln();
            }
        }
    }
    (shannon_entropy(priors), conditional_term)
}

/// `χ = S(ρ̄) - Σ_j π_j S(ρ_j)` in nats.
pub fn holevo_chi(e: &Ensemble) -> f64 {
    let avg = e.average_state().entropy();
    let mixed: f64 = e
        .priors
        .iter()
        .zip(&e.states)
        .map(|(p, s)| p * s.entropy())
        .sum();
    avg - mixed
}

fn message_projector(words: usize, j: usize) -> CMatrix {
    basis_projector(words, j)
}

/// `Σ_j π_j ρ_j ⊗ |0⟩⟨0| ⊗ |j⟩⟨j|`.
pub fn build_joint_state(e: &Ensemble, dil: &NaimarkDilation) -> Result<DensityMatrix> {
    if dil.encoding_dim != e.dim() {
        return Err(Error::DimensionMismatch {
            context: "dilation encoding space",
            expected: e.dim(),
            found: dil.encoding_dim,
        });
    }
    let (n, words) = (dil.total_dim() * e.words(), e.words());
    let probe = dil.probe_state();
    let mut m = CMatrix::zeros(n, n);
    for (j, (p, s)) in e.priors.iter().zip(&e.states).enumerate() {
        m += kron(&kron(s.matrix(), &probe), &message_projector(words, j)) * C64::new(*p, 0.0);
    }
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// Everything the bound, chain, and residual computations share.
#[derive(Debug, Clone)]
pub struct HolevoConstruction {
    pub dilation: NaimarkDilation,
    pub average_state: DensityMatrix,
    /// `π_{k|j}` computed through the dilation.
    pub conditional: Vec<Vec<f64>>,
    pub marginal: Vec<f64>,
    /// `I_{k,j}` indexed `[j][k]`; `None` where `π_{k|j} <= prob_floor`.
    pub info_density: Vec<Vec<Option<f64>>>,
    /// `ρ̄ ⊗ |0⟩⟨0|` on encoding ⊗ probe.
    pub average_with_probe: Hermitian,
    pub joint_state: DensityMatrix,
    pub initial_observable: ExtendedObservable,
    pub final_observable: ExtendedObservable,
}

impl HolevoConstruction {
    /// Exponent `ln(ρ̄ ⊗ |0⟩⟨0|) + Σ_k I_kj Π_k` on encoding ⊗ probe and its
    /// `-infinity` subspace for word `j`.
    pub fn block_exponent(&self, j: usize, tol: &Tolerances) -> Result<(Hermitian, Projector)> {
        let dk = self.dilation.total_dim();
        let log_avg = func_on_support(&self.average_with_probe, f64::ln, 0.0, tol.rank_tol)?;
        let mut exponent = log_avg.into_matrix();
        let kernel = support_projector(&self.average_with_probe, tol.rank_tol).complement();
        let mut suppressed = vec![&kernel];
        for (k, info) in self.info_density[j].iter().enumerate() {
            match info {
                Some(v) => exponent += self.dilation.projectors[k].matrix() * C64::new(*v, 0.0),
                None => suppressed.push(&self.dilation.projectors[k]),
            }
        }
        let n = union_projector(&suppressed, dk, tol.rank_tol);
        Ok((Hermitian::symmetrized(exponent), n))
    }
}

fn check_support_containment(
    e: &Ensemble,
    avg_support: &Projector,
    tol: &Tolerances,
) -> Result<()> {
    let outside = avg_support.complement();
    for (j, s) in e.states.iter().enumerate() {
        let pj = support_projector(&s.as_hermitian(), tol.rank_tol);
        let defect = max_abs(&(outside.matrix() * pj.matrix()));
        if defect > 1e-6 {
            return Err(Error::SupportNotContained { word: j, defect });
        }
    }
    Ok(())
}

/// `(A^i, A^f)` on encoding ⊗ probe ⊗ message.
pub fn build_observables(
    e: &Ensemble,
    dil: &NaimarkDilation,
    tol: &Tolerances,
) -> Result<(ExtendedObservable, ExtendedObservable)> {
    let c = construct(e, dil, tol)?;
    Ok((c.initial_observable, c.final_observable))
}

/// Builds the composite state and both observables for a given dilation.
pub fn construct(
    e: &Ensemble,
    dil: &NaimarkDilation,
    tol: &Tolerances,
) -> Result<HolevoConstruction> {
    let joint_state = build_joint_state(e, dil)?;
    let (d, words) = (e.dim(), e.words());
    let dk = dil.total_dim();
    let n = dk * words;
    let probe = dil.probe_state();

    let average_state = e.average_state();
    check_support_containment(
        e,
        &support_projector(&average_state.as_hermitian(), tol.rank_tol),
        tol,
    )?;

    let conditional: Vec<Vec<f64>> = e
        .states
        .iter()
        .map(|s| dil.probabilities(s))
        .collect::<Result<_>>()?;
    let marginal = outcome_marginal(&e.priors, &conditional);
    let mut info_density = Vec::with_capacity(words);
    for (j, row) in conditional.iter().enumerate() {
        let mut info_row = Vec::with_capacity(row.len());
        for (k, &pkj) in row.iter().enumerate() {
            if pkj <= tol.prob_floor {
                info_row.push(None);
            } else if marginal[k] <= tol.prob_floor {
                return Err(Error::InconsistentMarginal {
                    outcome: k,
                    word: j,
                });
            } else {
                info_row.push(Some((pkj / marginal[k]).ln()));
            }
        }
        info_density.push(info_row);
    }

    // A^i, block diagonal in the message index.
    let mut initial = CMatrix::zeros(n, n);
    for (j, s) in e.states.iter().enumerate() {
        let log_inv = func_on_support(&s.as_hermitian(), |x| -x.ln(), 0.0, tol.rank_tol)?;
        initial += kron(
            &kron(log_inv.matrix(), &probe),
            &message_projector(words, j),
        );
    }
    let initial_observable =
        ExtendedObservable::from_hermitian(&Hermitian::symmetrized(initial), tol);

    // Finite part of A^f and its +infinity subspace.
    let average_with_probe = Hermitian::symmetrized(kron(average_state.matrix(), &probe));
    let log_avg = func_on_support(&average_with_probe, f64::ln, 0.0, tol.rank_tol)?;
    let mut final_finite = kron(log_avg.matrix(), &identity(words)) * C64::new(-1.0, 0.0);
    let kernel = support_projector(&average_with_probe, tol.rank_tol)
        .complement()
        .kron(&Projector::identity(words));
    let mut suppressed_parts = vec![kernel];
    for (j, info_row) in info_density.iter().enumerate() {
        let msg = Projector::basis(words, j);
        for (k, info) in info_row.iter().enumerate() {
            let block = dil.projectors[k].kron(&msg);
            match info {
                Some(v) => final_finite -= block.matrix() * C64::new(*v, 0.0),
                None => suppressed_parts.push(block),
            }
        }
    }
    let refs: Vec<&Projector> = suppressed_parts.iter().collect();
    let suppressed = union_projector(&refs, n, tol.rank_tol);
    let final_observable = ExtendedObservable::with_infinite_part(
        &Hermitian::symmetrized(final_finite),
        &suppressed,
        tol,
    )?;

    debug_assert_eq!(d * dil.probe_dim, dk);
    Ok(HolevoConstruction {
        dilation: dil.clone(),
        average_state,
        conditional,
        marginal,
        info_density,
        average_with_probe,
        joint_state,
        initial_observable,
        final_observable,
    })
}

/// `γ ≤ g₁ ≤ g₂ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtChain {
    pub gamma: f64,
    /// `Σ_j π_j trace exp(ln(ρ̄ ⊗ |0⟩⟨0|) + Σ_k I_kj Π_k)`.
    pub g1: f64,
    /// `Σ_j π_j trace((ρ̄ ⊗ |0⟩⟨0|) Σ_k (π_{k|j}/π_k) Π_k)`.
    pub g2: f64,
}

impl GtChain {
    pub fn holds(&self) -> bool {
        self.gamma <= self.g1 + BOUND_TOL
            && self.g1 <= self.g2 + BOUND_TOL
            && (self.g2 - 1.0).abs() <= GAMMA_TOL
    }
}

pub fn gt_chain(
    e: &Ensemble,
    c: &HolevoConstruction,
    gamma: f64,
    tol: &Tolerances,
) -> Result<GtChain> {
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    for (j, pj) in e.priors.iter().enumerate() {
        let (exponent, suppressed) = c.block_exponent(j, tol)?;
        g1 += pj
            * compressed_exp(&exponent, &suppressed, tol)?
                .matrix()
                .trace()
                .re;

        let dk = c.dilation.total_dim();
        let mut weighted = CMatrix::zeros(dk, dk);
        for (k, info) in c.info_density[j].iter().enumerate() {
            if info.is_some() {
                weighted += c.dilation.projectors[k].matrix()
                    * C64::new(c.conditional[j][k] / c.marginal[k], 0.0);
            }
        }
        g2 += pj * trace_product(c.average_with_probe.matrix(), &weighted).re;
    }
    Ok(GtChain { gamma, g1, g2 })
}

/// Largest spectral norm over words of the equality-condition defect
///
/// `R_j = ln ρ_j - P_j ln ρ̄ P_j - Σ_k I_kj P_j M_k P_j + ln(γ) P_j`
///
/// restricted to `supp(ρ_j)`. Zero iff the sharpened bound is saturated.
pub fn equality_residual(
    inst: &CqChannelInstance,
    c: &HolevoConstruction,
    gamma: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let e = &inst.ensemble;
    let log_avg = func_on_support(&c.average_state.as_hermitian(), f64::ln, 0.0, tol.rank_tol)?;
    let log_gamma = gamma.ln();
    let mut worst: f64 = 0.0;
    for (j, s) in e.states.iter().enumerate() {
        let support = support_projector(&s.as_hermitian(), tol.rank_tol);
        let basis = support.range_basis();
        if basis.ncols() == 0 {
            continue;
        }
        let compress = |m: &CMatrix| basis.adjoint() * m * &basis;
        // |M P|^2 <= trace(ρ M) / λ_min for the smallest in-support eigenvalue.
        let lambda_min =
            spectral_decompose(&Hermitian::symmetrized(compress(s.matrix()))).values[0];
        let overlap_bound = (tol.prob_floor / lambda_min).sqrt() * (1.0 + 1e-6) + 1e-12;
        let log_state = func_on_support(&s.as_hermitian(), f64::ln, 0.0, tol.rank_tol)?;
        let mut r = compress(log_state.matrix()) - compress(log_avg.matrix());
        for (k, info) in c.info_density[j].iter().enumerate() {
            let m = inst.povm.elements()[k].matrix();
            match info {
                Some(v) => r -= compress(m) * C64::new(*v, 0.0),
                None => {
                    let norm = spectral_norm(&(m * support.matrix()));
                    if norm > overlap_bound {
                        return Err(Error::SkippedOutcomeOverlap {
                            outcome: k,
                            word: j,
                            norm,
                        });
                    }
                }
            }
        }
        r += identity(basis.ncols()) * C64::new(log_gamma, 0.0);
        let dec = spectral_decompose(&Hermitian::symmetrized(r));
        let norm = dec.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        worst = worst.max(norm);
    }
    Ok(worst)
}

fn spectral_norm(m: &CMatrix) -> f64 {
    let gram = Hermitian::symmetrized(m.adjoint() * m);
    spectral_decompose(&gram)
        .values
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0)
        .sqrt()
}

/// Pass/fail of every bound and identity in a [`HolevoReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolevoChecks {
    /// `χ - I >= -ln γ - 1e-8`.
    pub sharpened_bound: bool,
    /// `-ln γ >= -1e-8` and `γ <= 1 + 1e-9`.
    pub efficacy_bound: bool,
    pub chain: bool,
    /// `|⟨Δa⟩ - (χ - I)| <= 1e-8`.
    pub mean_identity: bool,
    /// `0 <= I <= S({π_j}) + 1e-9`, `χ >= -1e-9`.
    pub classical_bounds: bool,
}

impl HolevoChecks {
    pub fn all(&self) -> bool {
        self.sharpened_bound
            && self.efficacy_bound
            && self.chain
            && self.mean_identity
            && self.classical_bounds
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolevoReport {
    pub mutual_information: f64,
    pub chi: f64,
    pub shannon: f64,
    /// Efficacy used throughout (the trace route).
    pub gamma: f64,
    pub gamma_distribution: f64,
    pub gamma_trace: f64,
    pub neg_log_gamma: f64,
    /// `⟨Δa⟩` from the enumerated distribution.
    pub mean_delta_a: f64,
    /// `trace(ρ₀ (A^f - A^i))` from the operators.
    pub mean_trace: f64,
    pub chain: GtChain,
    pub equality_residual: f64,
    /// `(χ - I) + ln γ`.
    pub bound_slack: f64,
    pub checks: HolevoChecks,
    pub conditional: Vec<Vec<f64>>,
    /// Probability left on `+infinity` final outcomes.
    pub infinite_mass: f64,
}

impl HolevoReport {
    pub fn passed(&self) -> bool {
        self.checks.all()
    }

    /// `|trace(ρ₀ (A^f - A^i)) - (χ - I)|`.
    pub fn mean_identity_error(&self) -> f64 {
        (self.mean_trace - (self.chi - self.mutual_information)).abs()
    }
}

/// Full analysis with the canonical dilation.
pub fn analyze(inst: &CqChannelInstance, tol: &Tolerances) -> Result<HolevoReport> {
    let dil = naimark_dilate(&inst.povm, tol)?;
    analyze_with_dilation(inst, &dil, tol)
}

pub fn analyze_with_dilation(
    inst: &CqChannelInstance,
    dil: &NaimarkDilation,
    tol: &Tolerances,
) -> Result<HolevoReport> {
    let e = &inst.ensemble;
    let c = construct(e, dil, tol)?;
    let protocol = TwoTimeProtocol::new(
        c.joint_state.clone(),
        c.initial_observable.clone(),
        KrausChannel::identity(c.joint_state.dim()),
        c.final_observable.clone(),
    )?;
    let ft = verify_ft(&protocol, FtTolerance::default(), tol)?;
    if (ft.lhs - ft.gamma).abs() > ROUTE_TOL * ft.gamma.abs().max(1.0) {
        return Err(Error::RouteDisagreement {
            distribution: ft.lhs,
            trace: ft.gamma,
        });
    }
    let infinite_mass = crate::ttm::joint_distribution(&protocol, tol)?.infinite_mass();

    let gamma = ft.gamma;
    let mutual_information = mutual_information(inst, tol);
    let chi = holevo_chi(e);
    let shannon = shannon_entropy(e.priors());
    let rho0 = c.joint_state.matrix();
    let mean_trace = trace_product(rho0, c.final_observable.finite_part().matrix()).re
        - trace_product(rho0, c.initial_observable.finite_part().matrix()).re;
    let chain = gt_chain(e, &c, gamma, tol)?;
    let equality_residual = equality_residual(inst, &c, gamma, tol)?;
    let neg_log_gamma = -gamma.ln();
    let bound_slack = (chi - mutual_information) - neg_log_gamma;

    let checks = HolevoChecks {
        sharpened_bound: bound_slack >= -BOUND_TOL,
        efficacy_bound: neg_log_gamma >= -BOUND_TOL && gamma <= 1.0 + GAMMA_TOL,
        chain: chain.holds(),
        mean_identity: (ft.mean_delta_a - (chi - mutual_information)).abs() <= BOUND_TOL
            && (mean_trace - (chi - mutual_information)).abs() <= BOUND_TOL,
        classical_bounds: mutual_information >= 0.0
            && mutual_information <= shannon + GAMMA_TOL
            && chi >= -GAMMA_TOL,
    };

    Ok(HolevoReport {
        mutual_information,
        chi,
        shannon,
        gamma,
        gamma_distribution: ft.lhs,
        gamma_trace: ft.gamma,
        neg_log_gamma,
        mean_delta_a: ft.mean_delta_a,
        mean_trace,
        chain,
        equality_residual,
        bound_slack,
        checks,
        conditional: c.conditional,
        infinite_mass,
    })
}

/// Efficacy under the canonical dilation and under one with a rotated
/// unitary completion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationComparison {
    pub gamma_canonical: f64,
    pub gamma_rotated: f64,
}

impl DilationComparison {
    pub fn difference(&self) -> f64 {
        (self.gamma_canonical - self.gamma_rotated).abs()
    }
}

pub fn compare_dilations(
    inst: &CqChannelInstance,
    rotation: &CMatrix,
    tol: &Tolerances,
) -> Result<DilationComparison> {
    let canonical = analyze(inst, tol)?;
    let dil = crate::measurement::naimark_dilate_rotated(&inst.povm, rotation, tol)?;
    let rotated = analyze_with_dilation(inst, &dil, tol)?;
    Ok(DilationComparison {
        gamma_canonical: canonical.gamma,
        gamma_rotated: rotated.gamma,
    })
}
