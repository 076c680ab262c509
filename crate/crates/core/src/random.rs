//! Seeded random operators: Gaussian matrices, Haar unitaries, Wishart
//! states, and Gaussian-conditioned POVMs.
//!
//! All generators take an explicit RNG; `rng_from_seed` gives a ChaCha8
//! stream so results are reproducible across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::linalg::{spectral_decompose, CMatrix, DensityMatrix, Hermitian, C64};
use crate::measurement::Povm;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent per-task seed (splitmix64 of `base` and `index`).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Entries i.i.d. `(x + i y)/√2` with standard normal `x, y`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// GUE-style Hermitian matrix `(G + G^dag)/2`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Hermitian {
    Hermitian::symmetrized(complex_gaussian(rng, dim, dim))
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the phase
/// of `R`'s diagonal divided out.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let qr = complex_gaussian(rng, dim, dim).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Hermitian operator with exactly `distinct` distinct eigenvalues
/// (`distinct <= dim`), each drawn from a standard normal, in a Haar basis.
pub fn degenerate_hermitian<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    distinct: usize,
) -> Hermitian {
    let distinct = distinct.clamp(1, dim);
    let levels: Vec<f64> = (0..distinct).map(|_| rng.sample(StandardNormal)).collect();
    let mut diag: Vec<f64> = (0..dim).map(|i| levels[i % distinct]).collect();
    diag.rotate_left(rng.random_range(0..dim));
    let u = random_unitary(rng, dim);
    let d = crate::linalg::real_diagonal(&diag);
    Hermitian::symmetrized(&u * d * u.adjoint())
}

/// Wishart-style state `G G^dag / trace` with `G` of shape `dim x rank`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityMatrix {
    let g = complex_gaussian(rng, dim, rank.clamp(1, dim));
    DensityMatrix::from_psd_unnormalized(&g * g.adjoint())
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    random_density(rng, dim, 1)
}

/// `K`-outcome POVM `M_k = T^{-1/2} B_k^dag B_k T^{-1/2}`, `T = Σ B_k^dag B_k`.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> Povm {
    let bs: Vec<CMatrix> = (0..outcomes)
        .map(|_| complex_gaussian(rng, dim, dim))
        .collect();
    povm_from_generators(&bs)
}

/// Normalizes arbitrary generators `B_k` into a POVM. `T` must be invertible.
pub fn povm_from_generators(generators: &[CMatrix]) -> Povm {
    let dim = generators[0].nrows();
    let grams: Vec<CMatrix> = generators.iter().map(|b| b.adjoint() * b).collect();
    let t = grams
        .iter()
        .fold(CMatrix::zeros(dim, dim), |acc, g| acc + g);
    let t_inv_sqrt =
        spectral_decompose(&Hermitian::symmetrized(t)).apply(|l| C64::new(1.0 / l.sqrt(), 0.0));
    let elements = grams
        .iter()
        .map(|g| Hermitian::symmetrized(&t_inv_sqrt * g * &t_inv_sqrt))
        .collect();
    Povm::from_elements_unchecked(elements)
}

/// Symmetric Dirichlet(1) draw: normalized standard exponentials.
pub fn uniform_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}
