//! Matrix exponential: truncated Taylor series and scaling-and-squaring with
//! a diagonal Padé approximant.

use crate::error::{Error, Result};
use crate::linalg::mat::{norm_inf, solve4, Mat4};

/// How the scaling exponent `s` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingPolicy {
    /// Always use this `s`.
    Fixed(u32),
    /// `s = max(min_s, ceil(log2 ‖M‖∞) + 1)`, so that ‖M/2ˢ‖∞ ≤ 1/2.
    NormAdaptive { min_s: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpmConfig {
    pub pade_degree: u32,
    pub scaling: ScalingPolicy,
}

impl Default for ExpmConfig {
    fn default() -> Self {
        ExpmConfig { pade_degree: 6, scaling: ScalingPolicy::NormAdaptive { min_s: 6 } }
    }
}

impl ExpmConfig {
    pub fn fixed(s: u32) -> Self {
        ExpmConfig { pade_degree: 6, scaling: ScalingPolicy::Fixed(s) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pade_degree == 0 || self.pade_degree > 13 {
            return Err(Error::InvalidArgument(format!("Padé degree must be in 1..=13, got {}", self.pade_degree)));
        }
        Ok(())
    }

    /// Scaling exponent this configuration uses for `m`.
    pub fn scaling_for(&self, m: &Mat4) -> u32 {
        match self.scaling {
            ScalingPolicy::Fixed(s) => s,
            ScalingPolicy::NormAdaptive { min_s } => {
                let n = norm_inf(m);
                if n <= 0.0 || !n.is_finite() {
                    return min_s;
                }
                let needed = n.log2().ceil() as i64 + 1;
                needed.max(min_s as i64).max(0) as u32
            }
        }
    }
}

/// `Σ_{n=0}^{n_terms} Mⁿ/n!`.
pub fn expm_taylor(m: &Mat4, n_terms: u32) -> Result<Mat4> {
    if n_terms == 0 {
        return Err(Error::InvalidArgument("n_terms must be at least 1".into()));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut sum = Mat4::identity();
    let mut term = Mat4::identity();
    for n in 1..=n_terms {
        term = (term * *m).scale(1.0 / n as f64);
        if !term.is_finite() || term.max_abs() > 1e300 {
            return Err(Error::SeriesDiverged);
        }
        sum += term;
    }
    if !sum.is_finite() {
        return Err(Error::SeriesDiverged);
    }
    Ok(sum)
}

/// Coefficients `c_i = (2m-i)! m! / ((2m)! (m-i)! i!)` of the [m/m] Padé numerator.
pub fn pade_coefficients(m: u32) -> Vec<f64> {
    let mut c = Vec::with_capacity(m as usize + 1);
    c.push(1.0);
    for i in 1..=m as u64 {
        let prev = c[i as usize - 1];
        let m = m as u64;
        // c_i / c_{i-1} = (m - i + 1) / ((2m - i + 1) i)
        c.push(prev * (m - i + 1) as f64 / ((2 * m - i + 1) as f64 * i as f64));
    }
    c
}

/// Numerator and denominator `(p_m(X), q_m(X))` with `q_m(X) = p_m(-X)`.
///
/// For degree 6 this uses the even/odd split with powers X², X⁴, X⁶
/// (three products) plus one product for the odd part.
pub fn pade_parts(x: &Mat4, degree: u32) -> (Mat4, Mat4) {
    let c = pade_coefficients(degree);
    if degree == 6 {
        let x2 = *x * *x;
        let x4 = x2 * x2;
        let x6 = x4 * x2;
        let ident = Mat4::identity();
        let u = *x * (ident.scale(c[1]) + x2.scale(c[3]) + x4.scale(c[5]));
        let v = ident.scale(c[0]) + x2.scale(c[2]) + x4.scale(c[4]) + x6.scale(c[6]);
        return (v + u, v - u);
    }
    let mut even = Mat4::zeros();
    let mut odd = Mat4::zeros();
    let mut pow = Mat4::identity();
    for (i, ci) in c.iter().enumerate() {
        if i > 0 {
            pow = pow * *x;
        }
        if i % 2 == 0 {
            even += pow.scale(*ci);
        } else {
            odd += pow.scale(*ci);
        }
    }
    (even + odd, even - odd)
}

/// Diagonal Padé approximant `r_m(X) = q_m(X)⁻¹ p_m(X)`.
pub fn pade_approximant(x: &Mat4, degree: u32) -> Result<Mat4> {
    let (p, q) = pade_parts(x, degree);
    solve4(&q, &p)
}

/// `e^M` by scaling and squaring: `(r_m(M/2ˢ))^(2ˢ)`.
pub fn expm_pade_ss(m: &Mat4, cfg: &ExpmConfig) -> Result<Mat4> {
    cfg.validate()?;
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let s = cfg.scaling_for(m);
    let scaled = m.scale(0.5f64.powi(s as i32));
    let mut r = pade_approximant(&scaled, cfg.pade_degree)?;
    for _ in 0..s {
        r = r * r;
    }
    if !r.is_finite() {
        return Err(Error::NonFinite);
    }
    if m.has_zero_bottom_row() {
        r = r.with_bottom_row([0.0, 0.0, 0.0, 1.0]);
    }
    Ok(r)
}
