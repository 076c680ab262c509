//! Two-time measurement fluctuation theorems on finite-dimensional quantum
//! systems, and the sharpened Holevo bound they imply for classical-quantum
//! channels.

pub mod channel;
pub mod error;
pub mod holevo;
pub mod linalg;
pub mod measurement;
pub mod random;
pub mod tolerance;
pub mod ttm;

pub use channel::{
    apply, choi_matrix, standard_channel, unitary_from_protocol, validate_tcp, EvolutionProtocol,
    KrausChannel, StandardChannel, TcpReport,
};
pub use error::{Error, Result};
pub use holevo::{
    analyze, build_joint_state, build_observables, conditional_probabilities, equality_residual,
    gt_chain, holevo_chi, mutual_information, mutual_information_decomposition,
    optimize_measurement, random_instance, CqChannelInstance, Ensemble, GtChain, HolevoReport,
    OptimizeConfig, OptimizeResult,
};
pub use linalg::{
    compressed_exp, func_on_support, kron, partial_trace, spectral_apply, spectral_decompose,
    support_projector, CMatrix, DensityMatrix, Hermitian, Projector, SpectralDecomposition, C64,
};
pub use measurement::{
    measure, measurement_channel, naimark_dilate, observable_from_hermitian, povm_probabilities,
    ExtendedObservable, NaimarkDilation, Povm, ProjectiveMeasurement,
};
pub use tolerance::Tolerances;
pub use ttm::{
    characteristic_function, delta_a_distribution, efficacy, jarzynski_scenario,
    joint_distribution, random_protocol, verify_ft, ChannelFamily, DeltaDistribution, FtReport,
    FtTolerance, JarzynskiReport, JointDistribution, TwoTimeProtocol,
};
