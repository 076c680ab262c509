use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerance pack shared by every module.
///
/// `rank_tol` is relative: an eigenvalue belongs to the support of a PSD
/// operator iff it exceeds `rank_tol * lambda_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub hermiticity_tol: f64,
    pub psd_tol: f64,
    pub trace_tol: f64,
    pub degeneracy_tol: f64,
    pub rank_tol: f64,
    pub proj_tol: f64,
    pub ortho_tol: f64,
    pub recon_tol: f64,
    pub prob_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermiticity_tol: 1e-10,
            psd_tol: 1e-10,
            trace_tol: 1e-10,
            degeneracy_tol: 1e-9,
            rank_tol: 1e-12,
            proj_tol: 1e-10,
            ortho_tol: 1e-10,
            recon_tol: 1e-10,
            prob_floor: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("hermiticity_tol", self.hermiticity_tol),
            ("psd_tol", self.psd_tol),
            ("trace_tol", self.trace_tol),
            ("degeneracy_tol", self.degeneracy_tol),
            ("rank_tol", self.rank_tol),
            ("proj_tol", self.proj_tol),
            ("ortho_tol", self.ortho_tol),
            ("recon_tol", self.recon_tol),
            ("prob_floor", self.prob_floor),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidTolerance { name, value });
            }
        }
        Ok(())
    }
}
