//! Rigid transforms, Euler angles and closed-form interpolation.
//!
//! Rotations use the convention `R = Rx(θx)·Ry(θy)·Rz(θz)`.

use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::linalg::{inv4, norm_2, Mat4};

/// Default orthonormality tolerance.
pub const RIGID_TOL: f64 = 1e-9;
const GIMBAL_TOL: f64 = 1e-9;

/// A homogeneous matrix with an orthonormal, proper rotation block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Mat4", into = "Mat4")]
pub struct RigidTransform(Mat4);

impl TryFrom<Mat4> for RigidTransform {
    type Error = Error;

    fn try_from(m: Mat4) -> Result<Self> {
        RigidTransform::new(m)
    }
}

impl From<RigidTransform> for Mat4 {
    fn from(t: RigidTransform) -> Mat4 {
        t.0
    }
}

impl RigidTransform {
    pub fn new(m: Mat4) -> Result<Self> {
        Self::with_tolerance(m, RIGID_TOL)
    }

    /// Accepts `m` when `‖RᵀR − I‖` and `|det R − 1|` are within `tol`.
    pub fn with_tolerance(m: Mat4, tol: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        if !m.is_homogeneous() {
            return Err(Error::NotHomogeneous);
        }
        let r = m.block();
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                worst = worst.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        if worst > tol {
            return Err(Error::NotRigid(format!("rotation block not orthonormal (deviation {worst:.3e})")));
        }
        let det = crate::linalg::roots::det3(&r);
        if (det - 1.0).abs() > tol {
            return Err(Error::NotRigid(format!("rotation determinant {det}")));
        }
        Ok(RigidTransform(m))
    }

    pub fn identity() -> Self {
        RigidTransform(Mat4::identity())
    }

    pub fn from_parts(r: [[f64; 3]; 3], d: [f64; 3]) -> Result<Self> {
        Self::new(Mat4::from_block(r, d))
    }

    pub fn matrix(&self) -> Mat4 {
        self.0
    }

    pub fn rotation(&self) -> [[f64; 3]; 3] {
        self.0.block()
    }

    pub fn translation(&self) -> [f64; 3] {
        self.0.translation()
    }

    /// `[[Rᵀ, −Rᵀd], [0, 1]]`.
    pub fn inverse(&self) -> Self {
        let r = self.rotation();
        let d = self.translation();
        let mut rt = [[0.0; 3]; 3];
        let mut dt = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                rt[i][j] = r[j][i];
            }
            dt[i] = -(0..3).map(|k| r[k][i] * d[k]).sum::<f64>();
        }
        RigidTransform(Mat4::from_block(rt, dt))
    }

    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform(self.0 * other.0)
    }

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        self.0.transform_point(p)
    }
}

/// Per-axis rotation angles in radians, with their `atan2`-wrapped forms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub theta: [f64; 3],
    pub alpha: [f64; 3],
}

impl EulerAngles {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        let theta = [x, y, z];
        EulerAngles { theta, alpha: theta.map(|a| a.sin().atan2(a.cos())) }
    }

    pub fn from_degrees(x: f64, y: f64, z: f64) -> Self {
        Self::new(x.to_radians(), y.to_radians(), z.to_radians())
    }

    pub fn degrees(&self) -> [f64; 3] {
        self.theta.map(f64::to_degrees)
    }
}

/// Rotation block of `Rx(x)·Ry(y)·Rz(z)`, written out entrywise.
fn rotation_xyz(x: f64, y: f64, z: f64) -> [[f64; 3]; 3] {
    let (sx, cx) = x.sin_cos();
    let (sy, cy) = y.sin_cos();
    let (sz, cz) = z.sin_cos();
    [
        [cy * cz, -cy * sz, sy],
        [sx * sy * cz + cx * sz, -sx * sy * sz + cx * cz, -sx * cy],
        [-cx * sy * cz + sx * sz, cx * sy * sz + sx * cz, cx * cy],
    ]
}

pub fn from_euler(angles: &EulerAngles, d: [f64; 3]) -> RigidTransform {
    let [x, y, z] = angles.theta;
    RigidTransform(Mat4::from_block(rotation_xyz(x, y, z), d))
}

pub fn to_euler(t: &RigidTransform) -> Result<EulerAngles> {
    let r = t.rotation();
    if r[0][2].abs() >= 1.0 - GIMBAL_TOL {
        return Err(Error::GimbalLock);
    }
    let y = r[0][2].atan2(r[0][0].hypot(r[0][1]));
    let z = (-r[0][1]).atan2(r[0][0]);
    let x = (-r[1][2]).atan2(r[2][2]);
    Ok(EulerAngles::new(x, y, z))
}

/// Closed-form interpolation: each wrapped Euler angle scaled by `t` and the
/// translation scaled linearly.
///
/// This agrees with `exp(t·log T)` at the endpoints, for single-axis
/// rotations without translation and for pure translations. In general the
/// two paths differ; see [`trig_discrepancy`].
pub fn trig_interp(t: &RigidTransform, s: f64) -> Result<RigidTransform> {
    let angles = to_euler(t)?;
    let [ax, ay, az] = angles.alpha;
    let d = t.translation().map(|v| v * s);
    Ok(RigidTransform(Mat4::from_block(rotation_xyz(s * ax, s * ay, s * az), d)))
}

/// Largest `‖trig_interp(T, s) − exp(s·log T)‖₂` over the given samples.
pub fn trig_discrepancy(t: &RigidTransform, samples: &[f64], backend: &Backend) -> Result<f64> {
    let log = backend.log(&t.matrix())?;
    let mut worst = 0.0f64;
    for &s in samples {
        let closed = trig_interp(t, s)?.matrix();
        let exact = backend.exp(&log.scale(s))?;
        worst = worst.max(norm_2(&(closed - exact)));
    }
    Ok(worst)
}

/// Geodesic `exp(s·log(Tb·Ta⁻¹))·Ta` between two poses.
pub fn geodesic(ta: &RigidTransform, tb: &RigidTransform, s: f64, backend: &Backend) -> Result<RigidTransform> {
    let rel = tb.matrix() * ta.inverse().matrix();
    let step = backend.power(&rel, s)?;
    RigidTransform::with_tolerance(step * ta.matrix(), 1e-8)
}

/// `T⁻¹` through the general inverse, for cross-checks.
pub fn dense_inverse(t: &RigidTransform) -> Result<Mat4> {
    inv4(&t.matrix())
}
