//! Scenario files.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "kind": "two_time",
//!   "seed": 7,
//!   "tolerances": { "prob_floor": 1e-12 },
//!   "initial_state": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]],
//!   "initial_observable": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]],
//!   "final_observable": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]],
//!   "channel": { "standard": { "kind": "bit_flip", "q": 0.5 } }
//! }
//! ```
//!
//! Complex numbers are `[re, im]` pairs; matrices are row-major nested
//! arrays of them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use twotime::channel::{standard_channel, EvolutionProtocol, KrausChannel, StandardChannel};
use twotime::holevo::{CqChannelInstance, Ensemble};
use twotime::linalg::{CMatrix, DensityMatrix, Hermitian, Projector, C64};
use twotime::measurement::{ExtendedObservable, Povm};
use twotime::ttm::TwoTimeProtocol;
use twotime::Tolerances;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl MatrixJson {
    pub fn to_matrix(&self, what: &str) -> Result<CMatrix, CliError> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(CliError::Invalid(format!("{what}: empty matrix")));
        }
        if let Some(i) = self.0.iter().position(|r| r.len() != cols) {
            return Err(CliError::Invalid(format!(
                "{what}: row {i} has {} entries, expected {cols}",
                self.0[i].len()
            )));
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            let [re, im] = self.0[i][j];
            C64::new(re, im)
        }))
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        Self(
            (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| [m[(i, j)].re, m[(i, j)].im])
                        .collect()
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableJson {
    Plain(MatrixJson),
    /// Finite part plus the projector onto the `+infinity` branch.
    Extended {
        finite: MatrixJson,
        infinite_projector: MatrixJson,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepJson {
    pub hamiltonian: MatrixJson,
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StandardJson {
    Identity,
    Depolarizing { q: f64 },
    Dephasing { q: f64 },
    BitFlip { q: f64 },
    AmplitudeDamping { q: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelJson {
    Kraus(Vec<MatrixJson>),
    Protocol(Vec<StepJson>),
    Standard(StandardJson),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoTimeJson {
    pub initial_state: MatrixJson,
    pub initial_observable: ObservableJson,
    pub channel: ChannelJson,
    pub final_observable: ObservableJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JarzynskiJson {
    pub hamiltonian: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default)]
    pub protocol: Vec<StepJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolevoJson {
    pub priors: Vec<f64>,
    pub states: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub povm: Option<Vec<MatrixJson>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioBody {
    TwoTime(TwoTimeJson),
    Jarzynski(JarzynskiJson),
    Holevo(HolevoJson),
}

impl ScenarioBody {
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioBody::TwoTime(_) => "two_time",
            ScenarioBody::Jarzynski(_) => "jarzynski",
            ScenarioBody::Holevo(_) => "holevo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Overrides on top of the default tolerance pack.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(flatten)]
    pub body: ScenarioBody,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let s: ScenarioFile =
            serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("scenario: {e}")))?;
        if s.schema != SCHEMA_VERSION {
            return Err(CliError::Invalid(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                s.schema
            )));
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// Defaults, then each override map in order. Unknown names are rejected.
pub fn resolve_tolerances(overrides: &[&BTreeMap<String, f64>]) -> Result<Tolerances, CliError> {
    let mut value = serde_json::to_value(Tolerances::default()).expect("tolerances serialize");
    let map = value.as_object_mut().expect("object");
    for layer in overrides {
        for (k, v) in layer.iter() {
            if !map.contains_key(k) {
                return Err(CliError::Invalid(format!("unknown tolerance {k:?}")));
            }
            map.insert(k.clone(), serde_json::json!(v));
        }
    }
    let tol: Tolerances =
        serde_json::from_value(value).map_err(|e| CliError::Invalid(format!("tolerances: {e}")))?;
    tol.validate()?;
    Ok(tol)
}

fn hermitian(m: &MatrixJson, what: &str, tol: &Tolerances) -> Result<Hermitian, CliError> {
    Ok(Hermitian::new(m.to_matrix(what)?, tol)?)
}

fn density(m: &MatrixJson, what: &str, tol: &Tolerances) -> Result<DensityMatrix, CliError> {
    Ok(DensityMatrix::new(m.to_matrix(what)?, tol)?)
}

pub fn observable(
    o: &ObservableJson,
    what: &str,
    tol: &Tolerances,
) -> Result<ExtendedObservable, CliError> {
    match o {
        ObservableJson::Plain(m) => Ok(ExtendedObservable::from_hermitian(
            &hermitian(m, what, tol)?,
            tol,
        )),
        ObservableJson::Extended {
            finite,
            infinite_projector,
        } => {
            let h = hermitian(finite, what, tol)?;
            let n = Projector::new(infinite_projector.to_matrix(what)?, tol)?;
            Ok(ExtendedObservable::with_infinite_part(&h, &n, tol)?)
        }
    }
}

pub fn evolution(steps: &[StepJson], tol: &Tolerances) -> Result<EvolutionProtocol, CliError> {
    let steps = steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            Ok((
                hermitian(&s.hamiltonian, &format!("protocol step {i}"), tol)?,
                s.duration,
            ))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(EvolutionProtocol::new(steps)?)
}

pub fn channel(c: &ChannelJson, dim: usize, tol: &Tolerances) -> Result<KrausChannel, CliError> {
    Ok(match c {
        ChannelJson::Kraus(ops) => {
            let ops = ops
                .iter()
                .enumerate()
                .map(|(i, m)| m.to_matrix(&format!("Kraus operator {i}")))
                .collect::<Result<Vec<_>, _>>()?;
            KrausChannel::new(ops, tol)?
        }
        ChannelJson::Protocol(steps) => {
            twotime::channel::unitary_from_protocol(&evolution(steps, tol)?, dim)
        }
        ChannelJson::Standard(s) => {
            let kind = match *s {
                StandardJson::Identity => StandardChannel::Identity,
                StandardJson::Depolarizing { q } => StandardChannel::Depolarizing(q),
                StandardJson::Dephasing { q } => StandardChannel::Dephasing(q),
                StandardJson::BitFlip { q } => StandardChannel::BitFlip(q),
                StandardJson::AmplitudeDamping { q } => StandardChannel::AmplitudeDamping(q),
            };
            standard_channel(kind, dim)?
        }
    })
}

pub fn two_time_protocol(s: &TwoTimeJson, tol: &Tolerances) -> Result<TwoTimeProtocol, CliError> {
    let rho = density(&s.initial_state, "initial_state", tol)?;
    let initial = observable(&s.initial_observable, "initial_observable", tol)?;
    let final_obs = observable(&s.final_observable, "final_observable", tol)?;
    let c = channel(&s.channel, rho.dim(), tol)?;
    Ok(TwoTimeProtocol::new(rho, initial, c, final_obs)?)
}

pub fn ensemble(s: &HolevoJson, tol: &Tolerances) -> Result<Ensemble, CliError> {
    let states = s
        .states
        .iter()
        .enumerate()
        .map(|(j, m)| density(m, &format!("state {j}"), tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Ensemble::new(s.priors.clone(), states)?)
}

pub fn povm(elements: &[MatrixJson], tol: &Tolerances) -> Result<Povm, CliError> {
    let elements = elements
        .iter()
        .enumerate()
        .map(|(k, m)| hermitian(m, &format!("POVM element {k}"), tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Povm::new(elements, tol)?)
}

pub fn cq_instance(s: &HolevoJson, tol: &Tolerances) -> Result<CqChannelInstance, CliError> {
    let e = ensemble(s, tol)?;
    let p = s
        .povm
        .as_ref()
        .ok_or_else(|| CliError::Invalid("holevo scenario needs a \"povm\" for analysis".into()))?;
    Ok(CqChannelInstance::new(e, povm(p, tol)?)?)
}
