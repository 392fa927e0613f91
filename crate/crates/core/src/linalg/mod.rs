//! Dense 4×4 matrix algebra and the reference matrix-function kernels.

pub mod expm;
pub mod logm;
pub mod mat;
pub mod roots;

pub use expm::{expm_pade_ss, expm_taylor, pade_coefficients, ExpmConfig, ScalingPolicy};
pub use logm::{logm_iss, sqrtm_db};
pub use mat::{cinv4, cnorm_2, cond_2, inv4, norm_2, norm_inf, solve4, CMat4, Mat4};
pub use roots::{cubic_roots, eigvals4};
