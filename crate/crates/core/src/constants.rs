use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA value of the reduced Planck constant in J·s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;

/// Run-wide physical constants. Mass and frequency are absorbed into
/// dimensionless oscillator units, so only ℏ remains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    hbar: f64,
}

impl Constants {
    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::invalid(format!("hbar must be finite and > 0, got {hbar}")));
        }
        Ok(Self { hbar })
    }

    /// Natural units, ℏ = 1.
    pub fn natural() -> Self {
        Self { hbar: 1.0 }
    }

    pub fn si() -> Self {
        Self { hbar: HBAR_SI }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::natural()
    }
}
