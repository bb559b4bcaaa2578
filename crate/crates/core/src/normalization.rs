use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Convention used to scale mean squared errors and their bounds.
///
/// `PerMeasurement` multiplies the MSE by the number of measurements;
/// `PerQubit` multiplies by the number of qubits consumed, so for a two-copy
/// measurement it is twice the per-measurement value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    PerMeasurement,
    PerQubit,
}

impl Normalization {
    /// Factor converting a per-measurement quantity to this convention.
    pub fn factor(self, copies: usize) -> f64 {
        match self {
            Normalization::PerMeasurement => 1.0,
            Normalization::PerQubit => copies as f64,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::PerMeasurement => "per_measurement",
            Normalization::PerQubit => "per_qubit",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "per_measurement" => Ok(Normalization::PerMeasurement),
            "per_qubit" => Ok(Normalization::PerQubit),
            other => Err(Error::InvalidArgument(format!(
                "unknown normalization '{other}'"
            ))),
        }
    }
}
