use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("{context}: dimension mismatch (expected {expected}, found {found})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("operator is not Hermitian: max |H - H^dag| = {max_asymmetry:.3e} exceeds {tol:.1e}")]
    NotHermitian { max_asymmetry: f64, tol: f64 },

    #[error("operator is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e} below -{tol:.1e}")]
    NotPsd { min_eigenvalue: f64, tol: f64 },

    #[error("density matrix trace {trace} differs from 1 by more than {tol:.1e}")]
    TraceNotOne { trace: f64, tol: f64 },

    #[error("not an orthogonal projector: |P^2 - P| = {idempotence:.3e}, |P - P^dag| = {hermiticity:.3e}")]
    NotProjector { idempotence: f64, hermiticity: f64 },

    #[error("{context}: elements do not sum to the identity (completeness defect {defect:.3e}, tol {tol:.1e})")]
    Incomplete {
        context: &'static str,
        defect: f64,
        tol: f64,
    },

    #[error("measurement projectors are not mutually orthogonal (max |P_a P_b| = {defect:.3e})")]
    NotOrthogonal { defect: f64 },

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("function is not finite at in-support eigenvalue {eigenvalue:e}")]
    NonFiniteFunctionValue { eigenvalue: f64 },

    #[error("Kraus completeness defect: max |sum K^dag K - I| = {defect:.3e}")]
    KrausIncomplete { defect: f64 },

    #[error("parameter {name} = {value} is out of range")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("unitary completion of the dilation isometry failed: {found} of {needed} columns")]
    DilationCompletion { found: usize, needed: usize },

    #[error("ill-posed protocol: infinite final outcome has probability {probability:.3e} (floor {floor:.1e})")]
    IllPosed { probability: f64, floor: f64 },

    #[error("joint probability {probability:.3e} is negative beyond the floor")]
    NegativeProbability { probability: f64 },

    #[error("efficacy has imaginary part {imag:.3e}")]
    ComplexEfficacy { imag: f64 },

    #[error("outcome {outcome} has vanishing marginal but positive probability under word {word}")]
    InconsistentMarginal { outcome: usize, word: usize },

    #[error("support of state {word} is not contained in the support of the average state (defect {defect:.3e})")]
    SupportNotContained { word: usize, defect: f64 },

    #[error("outcome {outcome} skipped for word {word} but |M_k P_j| = {norm:.3e}; prob_floor too large")]
    SkippedOutcomeOverlap {
        outcome: usize,
        word: usize,
        norm: f64,
    },

    #[error("efficacy routes disagree: distribution {distribution}, trace {trace}")]
    RouteDisagreement { distribution: f64, trace: f64 },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid tolerance {name} = {value}; all tolerances must be strictly positive")]
    InvalidTolerance { name: &'static str, value: f64 },
}

impl Error {
    /// True for defects of the caller's input, false for internal
    /// consistency failures of a computation.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::ComplexEfficacy { .. }
                | Error::RouteDisagreement { .. }
                | Error::DilationCompletion { .. }
                | Error::SkippedOutcomeOverlap { .. }
        )
    }
}
