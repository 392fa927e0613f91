//! Principal matrix logarithm by inverse scaling and squaring.
//!
//! Square roots are taken until `‖X − I‖∞ < 1/2`, the logarithm of the
//! near-identity matrix is evaluated with the partial-fraction form of the
//! diagonal Padé approximant (Gauss–Legendre quadrature of
//! `∫₀¹ E (I + xE)⁻¹ dx`), and the result is multiplied by `2ᵏ`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::mat::{inv4, norm_inf, solve4, Mat4};
use crate::linalg::roots::eigvals4;

const PADE_POINTS: usize = 12;
const MAX_SQRTS: u32 = 64;
const MAX_DB_ITERS: usize = 100;

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`.
fn gauss_legendre_01() -> &'static [(f64, f64); PADE_POINTS] {
    static NODES: OnceLock<[(f64, f64); PADE_POINTS]> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = PADE_POINTS;
        let mut out = [(0.0, 0.0); PADE_POINTS];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // Legendre recurrence for P_n(x) and P_n'(x).
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = pk;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            *slot = ((1.0 + x) / 2.0, w / 2.0);
        }
        out
    })
}

/// Principal square root by the Denman–Beavers product iteration.
pub fn sqrtm_db(a: &Mat4) -> Result<Mat4> {
    let ident = Mat4::identity();
    let mut m = *a;
    let mut y = *a;
    let mut prev_err = f64::INFINITY;
    for _ in 0..MAX_DB_ITERS {
        let minv = inv4(&m).map_err(|_| Error::SqrtIterationFailed)?;
        y = (y * (ident + minv)).scale(0.5);
        m = (ident + (m + minv).scale(0.5)).scale(0.5);
        if !y.is_finite() || !m.is_finite() {
            return Err(Error::SqrtIterationFailed);
        }
        let err = norm_inf(&(m - ident));
        if err <= 1e-15 || (err < 1e-11 && err >= prev_err) {
            return Ok(y);
        }
        prev_err = err;
    }
    Err(Error::SqrtIterationFailed)
}

/// `log(I + E)` for `‖E‖∞ < 1/2`.
pub fn log_near_identity(e: &Mat4) -> Result<Mat4> {
    let ident = Mat4::identity();
    let mut acc = Mat4::zeros();
    for &(x, w) in gauss_legendre_01() {
        let term = solve4(&(ident + e.scale(x)), e)?;
        acc += term.scale(w);
    }
    Ok(acc)
}

/// Rejects matrices without a principal logarithm: any eigenvalue that is
/// zero or lies on the closed negative real axis.
pub fn check_principal_branch(t: &Mat4) -> Result<()> {
    let scale = t.max_abs().max(1.0);
    for lambda in eigvals4(t) {
        let mag = lambda.norm();
        if mag <= 1e-14 * scale {
            return Err(Error::NoPrincipalLog);
        }
        if lambda.re < 0.0 && lambda.im.abs() <= 1e-7 * mag {
            return Err(Error::NoPrincipalLog);
        }
    }
    Ok(())
}

/// Principal matrix logarithm by inverse scaling and squaring.
///
/// `tol` bounds `‖expm(L) − T‖∞` relative to `‖T‖∞`; a result outside it is
/// reported as a failed square-root iteration.
pub fn logm_iss(t: &Mat4, tol: f64) -> Result<Mat4> {
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    check_principal_branch(t)?;
    let ident = Mat4::identity();
    let mut x = *t;
    let mut k = 0u32;
    while norm_inf(&(x - ident)) >= 0.5 {
        if k >= MAX_SQRTS {
            return Err(Error::SqrtIterationFailed);
        }
        x = sqrtm_db(&x)?;
        k += 1;
    }
    let mut l = log_near_identity(&(x - ident))?.scale(2f64.powi(k as i32));
    if t.is_homogeneous() {
        l = l.with_bottom_row([0.0; 4]);
    }
    if tol > 0.0 {
        let back = crate::linalg::expm::expm_pade_ss(&l, &Default::default())?;
        if norm_inf(&(back - *t)) > tol * norm_inf(t).max(1.0) {
            return Err(Error::SqrtIterationFailed);
        }
    }
    Ok(l)
}
