//! Two-time measurement statistics and the fluctuation theorem
//! `⟨exp(-Δa)⟩ = γ`.
//!
//! A protocol measures `A^i` on `ρ₀`, evolves the post-measurement state
//! with a channel `E`, then measures `A^f`. Two independent routes are kept
//! apart on purpose: the outcome distribution is enumerated from branch
//! projectors, while the efficacy is a single trace of operator
//! exponentials.

use num_complex::Complex64;

use crate::channel::{unitary_from_protocol, EvolutionProtocol, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{
    compressed_exp, spectral_apply, spectral_decompose, trace_product, DensityMatrix, Hermitian,
    C64,
};
use crate::measurement::ExtendedObservable;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone)]
pub struct TwoTimeProtocol {
    pub initial_state: DensityMatrix,
    pub initial_observable: ExtendedObservable,
    pub channel: KrausChannel,
    pub final_observable: ExtendedObservable,
}

impl TwoTimeProtocol {
    pub fn new(
        initial_state: DensityMatrix,
        initial_observable: ExtendedObservable,
        channel: KrausChannel,
        final_observable: ExtendedObservable,
    ) -> Result<Self> {
        let d = initial_state.dim();
        for (context, found) in [
            ("initial observable", initial_observable.dim()),
            ("channel", channel.dim()),
            ("final observable", final_observable.dim()),
        ] {
            if found != d {
                return Err(Error::DimensionMismatch {
                    context,
                    expected: d,
                    found,
                });
            }
        }
        if initial_observable.has_infinite_branch() {
            return Err(Error::InvalidObservable(
                "initial observable must have a finite spectrum".into(),
            ));
        }
        Ok(Self {
            initial_state,
            initial_observable,
            channel,
            final_observable,
        })
    }

    pub fn dim(&self) -> usize {
        self.initial_state.dim()
    }
}

/// `p_{m→n}` indexed by initial branch `m` and final branch `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub entries: Vec<Vec<f64>>,
    pub initial_values: Vec<f64>,
    /// May contain `+infinity`; those columns carry probability `<= prob_floor`.
    pub final_values: Vec<f64>,
}

impl JointDistribution {
    pub fn total(&self) -> f64 {
        self.entries.iter().flatten().sum()
    }

    /// `p_m = Σ_n p_{m→n}`.
    pub fn initial_marginal(&self) -> Vec<f64> {
        self.entries.iter().map(|row| row.iter().sum()).collect()
    }

    fn iter_finite(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.entries.iter().enumerate().flat_map(move |(m, row)| {
            row.iter().enumerate().filter_map(move |(n, &p)| {
                let af = self.final_values[n];
                af.is_finite().then(|| (af - self.initial_values[m], p))
            })
        })
    }

    /// Total probability on `+infinity` final outcomes.
    pub fn infinite_mass(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|row| row.iter().zip(&self.final_values))
            .filter(|(_, v)| v.is_infinite())
            .map(|(p, _)| *p)
            .sum()
    }
}

pub fn joint_distribution(p: &TwoTimeProtocol, tol: &Tolerances) -> Result<JointDistribution> {
    let rho = p.initial_state.matrix();
    let initial = p.initial_observable.branches();
    let finals = p.final_observable.branches();
    let mut entries = Vec::with_capacity(initial.len());
    for bi in initial {
        let pi = bi.projector.matrix();
        let evolved = p.channel.apply_operator(&(pi * rho * pi));
        let mut row = Vec::with_capacity(finals.len());
        for bf in finals {
            let mut prob = trace_product(bf.projector.matrix(), &evolved).re;
            if prob < -tol.prob_floor {
                return Err(Error::NegativeProbability { probability: prob });
            }
            prob = prob.max(0.0);
            if bf.is_infinite() && prob > tol.prob_floor {
                return Err(Error::IllPosed {
                    probability: prob,
                    floor: tol.prob_floor,
                });
            }
            row.push(prob);
        }
        entries.push(row);
    }
    Ok(JointDistribution {
        entries,
        initial_values: initial.iter().map(|b| b.value).collect(),
        final_values: finals.iter().map(|b| b.value).collect(),
    })
}

/// Distribution of `Δa = a_n^f - a_m^i` as merged atoms `(value, probability)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaDistribution {
    pub atoms: Vec<(f64, f64)>,
}

impl DeltaDistribution {
    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(x, p)| x * p).sum()
    }

    /// `⟨exp(-Δa)⟩`.
    pub fn mean_exp_neg(&self) -> f64 {
        self.atoms.iter().map(|(x, p)| p * (-x).exp()).sum()
    }

    /// `G(s) = Σ p exp(i s Δa)`.
    pub fn characteristic(&self, s: Complex64) -> Complex64 {
        self.atoms
            .iter()
            .map(|&(x, p)| (Complex64::i() * s * x).exp() * p)
            .sum()
    }

    /// Atoms with `Δa` divided by `beta`, e.g. work values from `βW`.
    pub fn rescaled(&self, beta: f64) -> DeltaDistribution {
        DeltaDistribution {
            atoms: self.atoms.iter().map(|&(x, p)| (x / beta, p)).collect(),
        }
    }
}

/// Aggregates coincident `Δa` values; atoms with probability `<= prob_floor`
/// (including every `+infinity` entry of a well-posed protocol) are dropped.
pub fn delta_a_distribution(j: &JointDistribution, tol: &Tolerances) -> DeltaDistribution {
    let mut raw: Vec<(f64, f64)> = j
        .iter_finite()
        .filter(|&(_, p)| p > tol.prob_floor)
        .collect();
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    // (weighted sum, probability) of the open cluster, plus its first value
    let mut open: Option<(f64, f64, f64)> = None;
    for (x, p) in raw {
        match open {
            Some((first, ws, ps))
                if (x - first).abs() <= tol.degeneracy_tol * first.abs().max(1.0) =>
            {
                open = Some((first, ws + x * p, ps + p));
            }
            _ => {
                if let Some((_, ws, ps)) = open {
                    atoms.push((ws / ps, ps));
                }
                open = Some((x, x * p, p));
            }
        }
    }
    if let Some((_, ws, ps)) = open {
        atoms.push((ws / ps, ps));
    }
    DeltaDistribution { atoms }
}

/// `G(s)`; `+infinity` outcomes must carry no probability.
pub fn characteristic_function(
    j: &JointDistribution,
    s: Complex64,
    tol: &Tolerances,
) -> Result<Complex64> {
    let mass = j.infinite_mass();
    if mass > tol.prob_floor {
        return Err(Error::IllPosed {
            probability: mass,
            floor: tol.prob_floor,
        });
    }
    Ok(delta_a_distribution(j, tol).characteristic(s))
}

/// `γ = trace(exp(-A^f) E(M^i(ρ₀) exp(A^i)))`.
pub fn efficacy(p: &TwoTimeProtocol, tol: &Tolerances) -> Result<f64> {
    let exp_initial = spectral_apply(&p.initial_observable.finite_part(), |a| {
        C64::new(a.exp(), 0.0)
    });
    let dephased = p
        .initial_observable
        .measurement()
        .dephase(p.initial_state.matrix());
    let evolved = p.channel.apply_operator(&(dephased * exp_initial));
    let neg_final = p.final_observable.finite_part().scale(-1.0);
    let exp_final = compressed_exp(&neg_final, &p.final_observable.infinite_projector(), tol)?;
    let gamma = trace_product(exp_final.matrix(), &evolved);
    if gamma.im.abs() > 1e-10 * gamma.re.abs().max(1.0) {
        return Err(Error::ComplexEfficacy { imag: gamma.im });
    }
    Ok(gamma.re)
}

/// Tolerances for [`verify_ft`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtTolerance {
    /// Relative: `|lhs - γ| <= identity * max(1, |γ|)`.
    pub identity: f64,
    /// `⟨Δa⟩ + ln γ >= -jensen`.
    pub jensen: f64,
}

impl Default for FtTolerance {
    fn default() -> Self {
        Self {
            identity: 1e-9,
            jensen: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FtReport {
    /// `⟨exp(-Δa)⟩` from the outcome distribution.
    pub lhs: f64,
    /// Trace formula.
    pub gamma: f64,
    pub mean_delta_a: f64,
    /// `⟨Δa⟩ + ln γ`.
    pub jensen_slack: f64,
    /// `|lhs - γ| / max(1, |γ|)`.
    pub identity_error: f64,
    pub max_violation: f64,
    pub identity_holds: bool,
    pub jensen_holds: bool,
    pub tolerance: FtTolerance,
    pub distribution: DeltaDistribution,
}

impl FtReport {
    pub fn passed(&self) -> bool {
        self.identity_holds && self.jensen_holds
    }
}

/// Evaluates both sides of the fluctuation theorem and the Jensen bound.
/// Violations are reported, not raised.
pub fn verify_ft(p: &TwoTimeProtocol, ft: FtTolerance, tol: &Tolerances) -> Result<FtReport> {
    let joint = joint_distribution(p, tol)?;
    let distribution = delta_a_distribution(&joint, tol);
    let lhs = distribution.mean_exp_neg();
    let gamma = efficacy(p, tol)?;
    let mean_delta_a = distribution.mean();
    let jensen_slack = mean_delta_a + gamma.ln();
    let identity_error = (lhs - gamma).abs() / gamma.abs().max(1.0);
    let max_violation = [identity_error - ft.identity, -jensen_slack - ft.jensen, 0.0]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(FtReport {
        lhs,
        gamma,
        mean_delta_a,
        jensen_slack,
        identity_error,
        max_violation,
        identity_holds: identity_error <= ft.identity,
        jensen_holds: jensen_slack >= -ft.jensen,
        tolerance: ft,
        distribution,
    })
}

/// Thermodynamic summary of a Jarzynski protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct JarzynskiReport {
    pub beta: f64,
    pub z_initial: f64,
    pub z_final: f64,
    /// `Z_τ / Z₀` from the spectra.
    pub partition_ratio: f64,
    /// `⟨exp(-βW)⟩` from the work distribution.
    pub mean_exp_work: f64,
    pub mean_work: f64,
    /// `ΔF = -ln(Z_τ/Z₀)/β`.
    pub free_energy_change: f64,
    pub ft: FtReport,
    pub work: DeltaDistribution,
}

impl JarzynskiReport {
    /// `|⟨exp(-βW)⟩ - Z_τ/Z₀|`.
    pub fn jarzynski_error(&self) -> f64 {
        (self.mean_exp_work - self.partition_ratio).abs()
    }

    /// `β⟨W⟩ - βΔF`, non-negative by the maximum work theorem.
    pub fn max_work_slack(&self) -> f64 {
        self.beta * (self.mean_work - self.free_energy_change)
    }
}

fn partition_function(h: &Hermitian, beta: f64) -> f64 {
    spectral_decompose(h)
        .values
        .iter()
        .map(|e| (-beta * e).exp())
        .sum()
}

/// Gibbs state of `h0`, energy measurements `βH(0)` and `βH(τ)`, unitary
/// evolution along `protocol`. An empty protocol means `H(τ) = H(0)`.
pub fn jarzynski_scenario(
    h0: &Hermitian,
    protocol: &EvolutionProtocol,
    beta: f64,
    tol: &Tolerances,
) -> Result<(TwoTimeProtocol, JarzynskiReport)> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
        });
    }
    let d = h0.dim();
    let h_final = protocol.final_hamiltonian().unwrap_or(h0);
    if h_final.dim() != d {
        return Err(Error::DimensionMismatch {
            context: "protocol Hamiltonian",
            expected: d,
            found: h_final.dim(),
        });
    }
    let z_initial = partition_function(h0, beta);
    let z_final = partition_function(h_final, beta);
    let gibbs = spectral_apply(h0, |e| C64::new((-beta * e).exp() / z_initial, 0.0));
    let ttm = TwoTimeProtocol::new(
        DensityMatrix::new(gibbs, tol)?,
        ExtendedObservable::from_hermitian(&h0.scale(beta), tol),
        unitary_from_protocol(protocol, d),
        ExtendedObservable::from_hermitian(&h_final.scale(beta), tol),
    )?;
    let ft = verify_ft(&ttm, FtTolerance::default(), tol)?;
    let work = ft.distribution.rescaled(beta);
    let partition_ratio = z_final / z_initial;
    let report = JarzynskiReport {
        beta,
        z_initial,
        z_final,
        partition_ratio,
        mean_exp_work: ft.lhs,
        mean_work: work.mean(),
        free_energy_change: -partition_ratio.ln() / beta,
        ft,
        work,
    };
    Ok((ttm, report))
}

/// Channel families drawn by [`random_protocol`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelFamily {
    Unitary,
    Depolarizing,
    Dephasing,
    AmplitudeDamping,
    BitFlip,
    /// Three Kraus operators cut from a Haar-random isometry.
    RandomKraus,
}

impl ChannelFamily {
    pub const ALL: [ChannelFamily; 6] = [
        ChannelFamily::Unitary,
        ChannelFamily::Depolarizing,
        ChannelFamily::Dephasing,
        ChannelFamily::AmplitudeDamping,
        ChannelFamily::BitFlip,
        ChannelFamily::RandomKraus,
    ];
}

/// Random protocol on `C^dim`: pure or mixed `ρ₀`, degenerate or
/// nondegenerate observables, a channel from `family`. When the evolved
/// back-acted state is rank deficient, `A^f` is given a `+infinity` branch on
/// its kernel half of the time.
pub fn random_protocol<R: rand::Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    family: ChannelFamily,
    tol: &Tolerances,
) -> Result<TwoTimeProtocol> {
    use crate::channel::{standard_channel, StandardChannel};
    use crate::random::{degenerate_hermitian, random_density, random_unitary};

    let rank = if rng.random_bool(0.3) {
        1
    } else {
        rng.random_range(1..=dim)
    };
    let rho = random_density(rng, dim, rank);
    let observable = |rng: &mut R| {
        let distinct = if rng.random_bool(0.5) {
            dim
        } else {
            rng.random_range(1..=dim)
        };
        degenerate_hermitian(rng, dim, distinct)
    };
    let a_initial = observable(rng);
    let a_final = observable(rng);
    let q: f64 = if rng.random_bool(0.2) {
        1.0
    } else {
        rng.random_range(0.0..1.0)
    };
    let channel = match family {
        ChannelFamily::Unitary => KrausChannel::unitary(random_unitary(rng, dim)),
        ChannelFamily::Depolarizing => standard_channel(StandardChannel::Depolarizing(q), dim)?,
        ChannelFamily::Dephasing => standard_channel(StandardChannel::Dephasing(q), dim)?,
        ChannelFamily::AmplitudeDamping => {
            standard_channel(StandardChannel::AmplitudeDamping(q), dim)?
        }
        ChannelFamily::BitFlip => standard_channel(StandardChannel::BitFlip(q), dim)?,
        ChannelFamily::RandomKraus => {
            let r = 3;
            let u = random_unitary(rng, dim * r);
            let ops = (0..r)
                .map(|i| u.view((i * dim, 0), (dim, dim)).into_owned())
                .collect();
            KrausChannel::from_ops_unchecked(ops)?
        }
    };
    let initial = ExtendedObservable::from_hermitian(&a_initial, tol);
    let evolved = channel.apply_operator(&initial.measurement().dephase(rho.matrix()));
    let kernel = crate::linalg::support_projector(&Hermitian::symmetrized(evolved), tol.rank_tol)
        .complement();
    let final_observable = if kernel.rank() > 0 && rng.random_bool(0.5) {
        ExtendedObservable::with_infinite_part(&a_final, &kernel, tol)?
    } else {
        ExtendedObservable::from_hermitian(&a_final, tol)
    };
    TwoTimeProtocol::new(rho, initial, channel, final_observable)
}
