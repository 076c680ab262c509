use rand::Rng;

use super::{CqChannelInstance, Ensemble};
use crate::linalg::DensityMatrix;
use crate::random::{random_density, random_povm, rng_from_seed, uniform_simplex};

/// Which kind of states a random ensemble draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StateKind {
    /// Full rank.
    Mixed,
    Pure,
    /// Rank strictly between 1 and `d` (full rank for `d <= 2`, pure for `d = 1`).
    RankDeficient,
    /// Each state picks one of the above at random.
    #[default]
    Any,
}

/// Random ensemble of `words` states on `C^d` with Dirichlet priors and a
/// random `outcomes`-element POVM.
pub fn random_instance(d: usize, words: usize, outcomes: usize, seed: u64) -> CqChannelInstance {
    random_instance_with(d, words, outcomes, seed, StateKind::Any)
}

pub fn random_instance_with(
    d: usize,
    words: usize,
    outcomes: usize,
    seed: u64,
    kind: StateKind,
) -> CqChannelInstance {
    let mut rng = rng_from_seed(seed);
    let priors = uniform_simplex(&mut rng, words);
    let states: Vec<DensityMatrix> = (0..words)
        .map(|_| {
            let k = match kind {
                StateKind::Any => match rng.random_range(0..3) {
                    0 => StateKind::Mixed,
                    1 => StateKind::Pure,
                    _ => StateKind::RankDeficient,
                },
                other => other,
            };
            let rank = match k {
                StateKind::Pure => 1,
                StateKind::RankDeficient if d > 2 => rng.random_range(2..d),
                StateKind::RankDeficient if d == 2 => 1,
                _ => d,
            };
            random_density(&mut rng, d, rank)
        })
        .collect();
    let povm = random_povm(&mut rng, d, outcomes);
    let ensemble = Ensemble::new(priors, states).expect("simplex priors are valid");
    CqChannelInstance::new(ensemble, povm).expect("dimensions agree")
}
