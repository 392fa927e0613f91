//! Selection between the two matrix-function kernels.

use crate::eigen4::{self, EigenOptions};
use crate::error::Result;
use crate::linalg::{expm_pade_ss, logm_iss, ExpmConfig, Mat4};

/// Relative round-trip tolerance for logarithms on the squaring path.
const LOG_TOL: f64 = 1e-9;

/// Kernel used for `exp`, `log` and fractional powers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Backend {
    /// Padé scaling-and-squaring, with inverse scaling-and-squaring for logs.
    Squaring(ExpmConfig),
    /// Closed-form eigendecomposition.
    Eigen(EigenOptions),
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Squaring(ExpmConfig::default())
    }
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Squaring(_) => "squaring",
            Backend::Eigen(_) => "eigen",
        }
    }

    /// Principal logarithm of a homogeneous matrix.
    pub fn log(&self, t: &Mat4) -> Result<Mat4> {
        match self {
            Backend::Squaring(_) => logm_iss(t, LOG_TOL),
            Backend::Eigen(opts) => eigen4::logm_eig(&eigen4::eig_homogeneous(t, opts)?),
        }
    }

    /// Exponential of a generator (zero bottom row) or a general matrix.
    pub fn exp(&self, l: &Mat4) -> Result<Mat4> {
        match self {
            Backend::Squaring(cfg) => expm_pade_ss(l, cfg),
            Backend::Eigen(opts) => eigen4::expm_generator(&eigen4::eig_generator(l, opts)?, 1.0),
        }
    }

    /// `Tᵗ = exp(t·log T)`.
    pub fn power(&self, t: &Mat4, s: f64) -> Result<Mat4> {
        match self {
            Backend::Squaring(cfg) => expm_pade_ss(&logm_iss(t, LOG_TOL)?.scale(s), cfg),
            Backend::Eigen(opts) => eigen4::frac_power(&eigen4::eig_homogeneous(t, opts)?, s),
        }
    }
}
