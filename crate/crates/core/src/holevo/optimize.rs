//! Derivative-free search over POVMs for the accessible information.
//!
//! A POVM is parameterized by generators `B_k` (see
//! [`povm_from_generators`]). Each restart runs a (1+1) ascent: perturb every
//! generator by Gaussian noise of the current step size, keep the candidate
//! if `I` strictly improves, otherwise shrink the step geometrically.
//! Every restart draws from its own stream, so the achieved value can only
//! grow with the iteration budget.

use super::{mutual_information, CqChannelInstance, Ensemble};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::measurement::Povm;
use crate::random::{complex_gaussian, derive_seed, povm_from_generators, rng_from_seed};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeConfig {
    pub restarts: usize,
    /// Iterations per restart.
    pub iterations: usize,
    pub initial_step: f64,
    /// Step multiplier after a rejected candidate, in `(0, 1)`.
    pub decay: f64,
    /// A restart stops once its step falls below this.
    pub min_step: f64,
    pub seed: u64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            restarts: 4,
            iterations: 2000,
            initial_step: 0.3,
            decay: 0.95,
            min_step: 1e-9,
            seed: 0,
        }
    }
}

impl OptimizeConfig {
    fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, value: f64| Err(Error::InvalidParameter { name, value });
        if self.restarts == 0 {
            return bad("restarts", 0.0);
        }
        if !(self.initial_step.is_finite() && self.initial_step > 0.0) {
            return bad("initial_step", self.initial_step);
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return bad("decay", self.decay);
        }
        if !(self.min_step.is_finite() && self.min_step >= 0.0) {
            return bad("min_step", self.min_step);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub povm: Povm,
    pub mutual_information: f64,
    /// Best `I` among the restarts' starting points.
    pub best_initial: f64,
    /// Best `I` reached by each restart.
    pub per_restart: Vec<f64>,
    pub evaluations: usize,
}

fn normalize(generators: &mut [CMatrix]) {
    let norm: f64 = generators
        .iter()
        .map(|b| b.norm_squared())
        .sum::<f64>()
        .sqrt();
    if norm > 0.0 {
        for b in generators.iter_mut() {
            *b /= C64::new(norm, 0.0);
        }
    }
}

fn score(e: &Ensemble, generators: &[CMatrix], tol: &Tolerances) -> Option<(f64, Povm)> {
    let povm = povm_from_generators(generators);
    if povm.elements().iter().any(|m| {
        !m.matrix()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }) {
        return None;
    }
    let inst = CqChannelInstance {
        ensemble: e.clone(),
        povm,
    };
    let info = mutual_information(&inst, tol);
    Some((info, inst.povm))
}

/// Searches `outcomes`-element POVMs maximizing `I` for the ensemble.
pub fn optimize_measurement(
    e: &Ensemble,
    outcomes: usize,
    config: &OptimizeConfig,
    tol: &Tolerances,
) -> Result<OptimizeResult> {
    config.validate()?;
    if outcomes == 0 {
        return Err(Error::InvalidParameter {
            name: "outcomes",
            value: 0.0,
        });
    }
    let d = e.dim();
    let mut best: Option<(f64, Povm)> = None;
    let mut best_initial = f64::NEG_INFINITY;
    let mut per_restart = Vec::with_capacity(config.restarts);
    let mut evaluations = 0;

    for restart in 0..config.restarts {
        let mut rng = rng_from_seed(derive_seed(config.seed, restart as u64));
        let mut current: Vec<CMatrix> = (0..outcomes)
            .map(|_| complex_gaussian(&mut rng, d, d))
            .collect();
        normalize(&mut current);
        let (mut value, mut povm) = loop {
            evaluations += 1;
            if let Some(s) = score(e, &current, tol) {
                break s;
            }
            current = (0..outcomes)
                .map(|_| complex_gaussian(&mut rng, d, d))
                .collect();
            normalize(&mut current);
        };
        best_initial = best_initial.max(value);

        let mut step = config.initial_step;
        for _ in 0..config.iterations {
            if step < config.min_step {
                break;
            }
            let mut candidate: Vec<CMatrix> = current
                .iter()
                .map(|b| b + complex_gaussian(&mut rng, d, d) * C64::new(step, 0.0))
                .collect();
            normalize(&mut candidate);
            evaluations += 1;
            match score(e, &candidate, tol) {
                Some((v, p)) if v > value => {
                    value = v;
                    povm = p;
                    current = candidate;
                }
                _ => step *= config.decay,
            }
        }
        per_restart.push(value);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, povm));
        }
    }

    let (mutual_information, povm) = best.expect("at least one restart");
    Ok(OptimizeResult {
        povm,
        mutual_information,
        best_initial,
        per_restart,
        evaluations,
    })
}
