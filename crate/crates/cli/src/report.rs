use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::LN_2;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use twotime::Tolerances;

pub const REPORT_VERSION: u32 = 1;

/// Non-finite numbers are written as `null` and read back as NaN.
mod nullable {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    fn wrap(v: f64) -> Option<f64> {
        v.is_finite().then_some(v)
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        wrap(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }

    pub mod map {
        use super::*;

        pub fn serialize<S: Serializer>(
            m: &BTreeMap<String, f64>,
            s: S,
        ) -> Result<S::Ok, S::Error> {
            m.iter()
                .map(|(k, v)| (k, wrap(*v)))
                .collect::<BTreeMap<_, _>>()
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<BTreeMap<String, f64>, D::Error> {
            let m = BTreeMap::<String, Option<f64>>::deserialize(d)?;
            Ok(m.into_iter()
                .map(|(k, v)| (k, v.unwrap_or(f64::NAN)))
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    #[serde(with = "nullable")]
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub command: String,
    /// SHA-256 of the scenario bytes, or of the canonical flag string for
    /// commands without a scenario.
    pub input_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    #[serde(with = "nullable::map")]
    pub scalars: BTreeMap<String, f64>,
    /// `(value, probability)` pairs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<[f64; 2]>,
    pub assertions: Vec<Assertion>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
    pub passed: bool,
    /// Scalars measured in nats; `--bits` divides these by `ln 2` for display.
    #[serde(skip)]
    information: BTreeSet<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl Report {
    pub fn new(command: &str, input: &[u8], seed: Option<u64>, tolerances: Tolerances) -> Self {
        Self {
            version: REPORT_VERSION,
            command: command.to_string(),
            input_sha256: sha256_hex(input),
            seed,
            tolerances,
            scalars: BTreeMap::new(),
            atoms: Vec::new(),
            assertions: Vec::new(),
            details: serde_json::Value::Null,
            passed: true,
            information: BTreeSet::new(),
        }
    }

    pub fn scalar(&mut self, name: &str, value: f64) -> &mut Self {
        self.scalars.insert(name.to_string(), value);
        self
    }

    /// Records an information quantity in nats.
    pub fn info(&mut self, name: &str, value: f64) -> &mut Self {
        self.information.insert(name.to_string());
        self.scalar(name, value)
    }

    /// Records a check; NaN values fail.
    pub fn check(&mut self, name: &str, passed: bool, value: f64, tolerance: f64) -> &mut Self {
        let passed = passed && !value.is_nan();
        self.passed &= passed;
        self.assertions.push(Assertion {
            name: name.to_string(),
            passed,
            value,
            tolerance,
        });
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Human-readable listing of scalars and assertions.
    pub fn summary(&self, bits: bool) -> String {
        let mut out = format!(
            "{}: {}\n",
            self.command,
            if self.passed { "PASS" } else { "FAIL" }
        );
        for (name, value) in &self.scalars {
            if self.information.contains(name) {
                let (v, unit) = if bits {
                    (value / LN_2, "bits")
                } else {
                    (*value, "nats")
                };
                let _ = writeln!(out, "  {name:<28} {v:>24.15e} {unit}");
            } else {
                let _ = writeln!(out, "  {name:<28} {value:>24.15e}");
            }
        }
        for a in &self.assertions {
            let _ = writeln!(
                out,
                "  [{}] {:<24} value {:.3e} tol {:.1e}",
                if a.passed { "ok" } else { "FAIL" },
                a.name,
                a.value,
                a.tolerance
            );
        }
        out
    }
}
