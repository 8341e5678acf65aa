use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Registry of named checks, in report order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    EigenResidual,
    StarOrthogonality,
    MarginalDelta,
    Normalization,
    IdentityResolution,
    EvolutionMatch,
    ComplexScalingMatch,
    KoopmanZeroMode,
    ConjugationSymmetry,
    PairTransformMatch,
    ClassicalLimit,
}

impl CheckId {
    pub const ALL: [CheckId; 11] = [
        CheckId::EigenResidual,
        CheckId::StarOrthogonality,
        CheckId::MarginalDelta,
        CheckId::Normalization,
        CheckId::IdentityResolution,
        CheckId::EvolutionMatch,
        CheckId::ComplexScalingMatch,
        CheckId::KoopmanZeroMode,
        CheckId::ConjugationSymmetry,
        CheckId::PairTransformMatch,
        CheckId::ClassicalLimit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::EigenResidual => "eigen_residual",
            CheckId::StarOrthogonality => "star_orthogonality",
            CheckId::MarginalDelta => "marginal_delta",
            CheckId::Normalization => "normalization",
            CheckId::IdentityResolution => "identity_resolution",
            CheckId::EvolutionMatch => "evolution_match",
            CheckId::ComplexScalingMatch => "complex_scaling_match",
            CheckId::KoopmanZeroMode => "koopman_zero_mode",
            CheckId::ConjugationSymmetry => "conjugation_symmetry",
            CheckId::PairTransformMatch => "pair_transform_match",
            CheckId::ClassicalLimit => "classical_limit",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown check {s:?}")))
    }
}

/// One verified identity instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: CheckId,
    pub params: BTreeMap<String, Value>,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub wall_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Residual reported for checks whose computation failed.
pub const FAILED_RESIDUAL: f64 = f64::MAX;

impl CheckEntry {
    pub fn new(name: CheckId, params: BTreeMap<String, Value>, residual: f64, tolerance: f64) -> Self {
        let residual = if residual.is_finite() { residual.abs() } else { FAILED_RESIDUAL };
        CheckEntry {
            name,
            params,
            residual,
            tolerance,
            passed: residual <= tolerance,
            wall_time: 0.0,
            diagnostic: None,
        }
    }

    pub fn failed(name: CheckId, params: BTreeMap<String, Value>, tolerance: f64, why: String) -> Self {
        CheckEntry {
            name,
            params,
            residual: FAILED_RESIDUAL,
            tolerance,
            passed: false,
            wall_time: 0.0,
            diagnostic: Some(why),
        }
    }

    /// Applies a new tolerance and recomputes `passed`.
    pub fn retolerance(&mut self, tolerance: f64) {
        self.tolerance = tolerance;
        self.passed = self.diagnostic.is_none() && self.residual <= tolerance;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckEntry>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn from_entries(checks: Vec<CheckEntry>) -> Self {
        let mut r = VerificationReport {
            checks,
            summary: Summary::default(),
        };
        r.resummarize();
        r
    }

    pub fn resummarize(&mut self) {
        let passed = self.checks.iter().filter(|c| c.passed).count();
        self.summary = Summary {
            passed,
            failed: self.checks.len() - passed,
        };
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.resummarize();
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn of(&self, name: CheckId) -> impl Iterator<Item = &CheckEntry> {
        self.checks.iter().filter(move |c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}
