//! Eigendecomposition of homogeneous 4×4 matrices.
//!
//! A homogeneous matrix `M = [[A, d], [0, h]]` (with `h = 1` for transforms
//! and `h = 0` for their generators) has the spectrum of its 3×3 block `A`
//! plus `h`. Block eigenvectors are `(x, 0)`; the eigenvector for `h` is
//! `(u, 1)` with `(A − hI) u = −d`.
//!
//! When `A` itself has an eigenvalue at `h` (the rigid case, where the
//! rotation fixes its axis) the eigenvalue `h` is double. The matrix is then
//! diagonalizable iff `d` has no component along the left null vector of
//! `A − hI`, i.e. the translation along the screw axis vanishes; `u` is then
//! the minimum-norm solution of the singular system and the axis vector
//! completes the basis. Screw motions are rejected.
//!
//! Matrix functions of a decomposition are evaluated in block form,
//!
//! ```text
//! f(M) = [[ f(h) I + Σ (f(λₖ) − f(h)) xₖ yₖᵀ ,  Σ (f(λₖ) − f(h))/(λₖ − h) xₖ cₖ ],
//!         [ 0                                ,  f(h)                            ]]
//! ```
//!
//! with `xₖ` the block eigenvectors, `yₖ` the rows of their inverse and
//! `c = X⁻¹ d`. This is exactly `P f(D) P⁻¹` for the block-triangular `P`,
//! but it never forms `u`, which grows without bound as `λₖ → h`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::mat::{cond_2, CMat4, Mat4};
use crate::linalg::roots::eig3_shifted;
use crate::se3::RigidTransform;

type C = Complex64;
type CVec3 = [C; 3];
type CMat3 = [[C; 3]; 3];

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Tolerances for the decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Largest translation along the rotation axis (mm) still treated as zero.
    pub pitch_tol: f64,
    /// Block eigenvalues closer than this to `h` are merged into a double root.
    pub repeat_tol: f64,
    /// `‖M − hI‖∞` below this bypasses the decomposition.
    pub near_identity_tol: f64,
    /// Largest accepted 2-norm condition number of `P`.
    pub cond_max: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { pitch_tol: 1e-6, repeat_tol: 1e-8, near_identity_tol: 1e-7, cond_max: 1e8 }
    }
}

/// Which construction produced the eigenbasis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// All block eigenvalues differ from `h`.
    Distinct,
    /// Double eigenvalue `h`; the axis vector and the non-unique fourth
    /// vector `(u, 1)` complete the basis.
    RepeatedUnit,
    /// The matrix is within `near_identity_tol` of `hI`; functions are
    /// evaluated by a short series instead of the eigenbasis.
    NearIdentity,
}

/// Whether the decomposed matrix is a transform (`h = 1`) or a generator (`h = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Transform,
    Generator,
}

impl Kind {
    fn h(self) -> f64 {
        match self {
            Kind::Transform => 1.0,
            Kind::Generator => 0.0,
        }
    }
}

/// Compact per-matrix storage sufficient to evaluate any function of the
/// decomposed matrix: shifted block eigenvalues, block eigenvectors, the rows
/// of their inverse and the translation expressed in the eigenbasis.
#[derive(Clone, Copy, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum EigenFactors {
    Spectral { shifted: CVec3, x: CMat3, y: CMat3, c: CVec3 },
    NearIdentity { delta: Mat4 },
}

/// Eigendecomposition `M = P D P⁻¹` of a homogeneous 4×4 matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomp4 {
    pub lambdas: [C; 4],
    pub p: CMat4,
    pub p_inv: CMat4,
    pub branch: Branch,
    pub kind: Kind,
    /// 2-norm condition number of `P`.
    pub cond: f64,
    factors: EigenFactors,
}

/// Screw decomposition of a rigid transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScrewReport {
    /// Unit rotation axis; zero when the rotation is negligible.
    pub axis: [f64; 3],
    /// Rotation angle in radians, in `[0, π)`.
    pub angle: f64,
    /// Translation along the axis (mm).
    pub pitch: f64,
    pub is_screw: bool,
    pub near_identity: bool,
    /// Euler–Rodrigues vector `tan(θ/2)·s`.
    pub rodrigues: [f64; 3],
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Axis-angle of a rotation block. The axis is oriented so that the angle
/// lies in `[0, π]`.
pub(crate) fn axis_angle(r: &[[f64; 3]; 3]) -> ([f64; 3], f64) {
    let w = [(r[2][1] - r[1][2]) / 2.0, (r[0][2] - r[2][0]) / 2.0, (r[1][0] - r[0][1]) / 2.0];
    let sin = norm3(w);
    let cos = ((r[0][0] + r[1][1] + r[2][2] - 1.0) / 2.0).clamp(-1.0, 1.0);
    let angle = sin.atan2(cos);
    if sin == 0.0 && cos > 0.0 {
        return ([0.0; 3], 0.0);
    }
    if angle < std::f64::consts::FRAC_PI_2 {
        return ([w[0] / sin, w[1] / sin, w[2] / sin], angle);
    }
    // Large angles: the symmetric part (1 − cos θ) s sᵀ is better conditioned.
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (r[i][j] + r[j][i]) / 2.0 - if i == j { cos } else { 0.0 };
        }
    }
    let k = (0..3).max_by(|&i, &j| b[i][i].total_cmp(&b[j][j])).unwrap();
    let mut s = b[k];
    let n = norm3(s);
    s.iter_mut().for_each(|v| *v /= n);
    if dot3(s, w) < 0.0 {
        s.iter_mut().for_each(|v| *v = -*v);
    }
    (s, angle)
}

/// Rotation axis, angle and pitch of a rigid transform.
pub fn classify_screw(t: &RigidTransform, pitch_tol: f64) -> Result<ScrewReport> {
    let r = t.rotation();
    let d = t.translation();
    let (axis, angle) = axis_angle(&r);
    if angle < 1e-8 {
        return Ok(ScrewReport { axis: [0.0; 3], angle, pitch: 0.0, is_screw: false, near_identity: true, rodrigues: [0.0; 3] });
    }
    if std::f64::consts::PI - angle < 1e-9 {
        return Err(Error::HalfTurn);
    }
    let pitch = dot3(axis, d);
    let half_tan = (angle / 2.0).tan();
    Ok(ScrewReport { axis, angle, pitch, is_screw: pitch.abs() > pitch_tol, near_identity: false, rodrigues: axis.map(|v| v * half_tan) })
}

fn ccross(a: CVec3, b: CVec3) -> CVec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn cnorm(a: &CVec3) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalized(a: CVec3) -> CVec3 {
    let n = cnorm(&a);
    a.map(|z| z / n)
}

fn complexify(a: &[[f64; 3]; 3]) -> CMat3 {
    a.map(|row| row.map(|v| C::new(v, 0.0)))
}

/// Unit null vector of a (numerically) rank-2 3×3 matrix: the largest cross
/// product of two of its rows.
fn null_vector(m: &CMat3) -> Option<CVec3> {
    let cands = [ccross(m[0], m[1]), ccross(m[0], m[2]), ccross(m[1], m[2])];
    let best = cands.into_iter().max_by(|a, b| cnorm(a).total_cmp(&cnorm(b)))?;
    let scale = m.iter().map(cnorm).fold(0.0, f64::max);
    if cnorm(&best) <= 1e-14 * scale * scale || cnorm(&best) == 0.0 {
        return None;
    }
    Some(normalized(best))
}

/// Orthonormal basis of the null space of a real rank-≤1 matrix, of the
/// requested dimension.
fn null_space_low_rank(m: &[[f64; 3]; 3], dim: usize, tol: f64) -> Result<Vec<[f64; 3]>> {
    let scale = m.iter().map(|r| norm3(*r)).fold(0.0, f64::max);
    if dim == 3 {
        if scale > tol {
            return Err(Error::Defective("triple block eigenvalue".into()));
        }
        return Ok(vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    }
    let row = *m.iter().max_by(|a, b| norm3(**a).total_cmp(&norm3(**b))).unwrap();
    let k = (0..3).min_by(|&i, &j| row[i].abs().total_cmp(&row[j].abs())).unwrap();
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let cross = |a: [f64; 3], b: [f64; 3]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let unit = |a: [f64; 3]| {
        let n = norm3(a);
        a.map(|v| v / n)
    };
    let v1 = unit(cross(row, e));
    let v2 = unit(cross(row, v1));
    for v in [v1, v2] {
        for r in m {
            if dot3(*r, v).abs() > tol.max(1e-12 * scale) {
                return Err(Error::Defective("double block eigenvalue".into()));
            }
        }
    }
    Ok(vec![v1, v2])
}

fn cdet3(m: &CMat3) -> C {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn cinv3(m: &CMat3) -> Result<CMat3> {
    let det = cdet3(m);
    if det.norm() < 1e-300 || !det.re.is_finite() {
        return Err(Error::Singular);
    }
    let mut inv = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    Ok(inv)
}

fn solve3(a: &[[f64; 3]; 3], b: [f64; 3]) -> Result<[f64; 3]> {
    let inv = cinv3(&complexify(a))?;
    let mut x = [0.0; 3];
    for i in 0..3 {
        x[i] = (0..3).map(|j| inv[i][j].re * b[j]).sum();
    }
    Ok(x)
}

fn log1p_c(z: C) -> C {
    let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
    C::new(re, z.im.atan2(1.0 + z.re))
}

fn expm1_c(z: C) -> C {
    let half = (z.im / 2.0).sin();
    C::new(z.re.exp_m1() * z.im.cos() - 2.0 * half * half, z.re.exp() * z.im.sin())
}

fn check_branch(delta: C) -> Result<()> {
    let lambda = ONE + delta;
    if lambda.norm() == 0.0 || (lambda.re <= 0.0 && lambda.im.abs() <= 1e-7 * lambda.norm()) {
        return Err(Error::NoPrincipalLog);
    }
    Ok(())
}

/// Scalar function pairs `(f(λ) − f(h), (f(λ) − f(h))/(λ − h))` of the
/// shifted eigenvalue `δ = λ − h`.
#[derive(Clone, Copy, Debug)]
enum ScalarFn {
    /// `λᵗ` around `h = 1`.
    Power(f64),
    /// `log λ` around `h = 1`.
    Log,
    /// `e^{tμ}` around `h = 0`.
    Exp(f64),
    /// `λ` itself.
    Identity,
}

impl ScalarFn {
    fn at_h(self, h: f64) -> f64 {
        match self {
            ScalarFn::Power(_) | ScalarFn::Exp(_) => 1.0,
            ScalarFn::Log => 0.0,
            ScalarFn::Identity => h,
        }
    }

    fn eval(self, delta: C) -> Result<(C, C)> {
        let tiny = delta.norm() < 1e-300;
        Ok(match self {
            ScalarFn::Power(t) => {
                check_branch(delta)?;
                if tiny {
                    (ZERO, C::new(t, 0.0))
                } else {
                    let f = expm1_c(log1p_c(delta) * t);
                    (f, f / delta)
                }
            }
            ScalarFn::Log => {
                check_branch(delta)?;
                if tiny {
                    (ZERO, ONE)
                } else {
                    let f = log1p_c(delta);
                    (f, f / delta)
                }
            }
            ScalarFn::Exp(t) => {
                if tiny {
                    (ZERO, C::new(t, 0.0))
                } else {
                    let f = expm1_c(delta * t);
                    (f, f / delta)
                }
            }
            ScalarFn::Identity => (delta, ONE),
        })
    }

    /// Second-order series of `f(hI + E)` for tiny `E`.
    fn series(self, h: f64, e: &Mat4) -> Result<Mat4> {
        let ident = Mat4::identity();
        let e2 = *e * *e;
        Ok(match self {
            ScalarFn::Power(t) => ident + e.scale(t) + e2.scale(t * (t - 1.0) / 2.0),
            ScalarFn::Log => *e - e2.scale(0.5),
            ScalarFn::Exp(t) => ident + e.scale(t) + e2.scale(t * t / 2.0),
            ScalarFn::Identity => ident.scale(h) + *e,
        })
    }
}

impl EigenFactors {
    /// Evaluate a scalar function on the decomposed matrix.
    fn apply(&self, f: ScalarFn, h: f64) -> Result<Mat4> {
        let (delta_x, y, c, shifted) = match self {
            EigenFactors::NearIdentity { delta } => {
                let mut m = f.series(h, delta)?;
                // The bottom row of `delta` is zero, so the series keeps the
                // homogeneous row up to the f(h) entry.
                m.0[3] = [0.0, 0.0, 0.0, f.at_h(h)];
                return Ok(m);
            }
            EigenFactors::Spectral { shifted, x, y, c } => (x, y, c, shifted),
        };
        let fh = f.at_h(h);
        let mut acc = [[ZERO; 4]; 3];
        for k in 0..3 {
            let (fk, gk) = f.eval(shifted[k])?;
            for i in 0..3 {
                let xi = delta_x[i][k];
                if fk != ZERO {
                    let fx = fk * xi;
                    for j in 0..3 {
                        acc[i][j] += fx * y[k][j];
                    }
                }
                acc[i][3] += gk * xi * c[k];
            }
        }
        let mut out = Mat4::zeros();
        let mut residue = 0.0f64;
        for i in 0..3 {
            for j in 0..4 {
                out.0[i][j] = acc[i][j].re + if i == j { fh } else { 0.0 };
                residue = residue.max(acc[i][j].im.abs());
            }
        }
        out.0[3] = [0.0, 0.0, 0.0, fh];
        if residue > 1e-9 * out.max_abs().max(1.0) {
            return Err(Error::ComplexResidue { residue });
        }
        Ok(out)
    }

    /// `exp(t·L)` for factors of a generator `L`.
    pub fn exp_scaled(&self, t: f64) -> Result<Mat4> {
        self.apply(ScalarFn::Exp(t), 0.0)
    }

    /// `Tᵗ` for factors of a transform `T`.
    pub fn power(&self, t: f64) -> Result<Mat4> {
        self.apply(ScalarFn::Power(t), 1.0)
    }
}

/// Decompose a homogeneous transform (bottom row exactly `[0, 0, 0, 1]`).
pub fn eig_homogeneous(t: &Mat4, opts: &EigenOptions) -> Result<EigenDecomp4> {
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    if !t.is_homogeneous() {
        return Err(Error::NotHomogeneous);
    }
    if let Ok(rigid) = RigidTransform::new(*t) {
        let (axis, angle) = axis_angle(&rigid.rotation());
        let pitch = dot3(axis, rigid.translation());
        if angle >= 1e-8 && pitch.abs() > opts.pitch_tol {
            return Err(Error::Screw { pitch });
        }
    }
    decompose(t, Kind::Transform, opts)
}

/// Decompose a generator (bottom row exactly zero), e.g. a fused velocity.
pub fn eig_generator(l: &Mat4, opts: &EigenOptions) -> Result<EigenDecomp4> {
    if !l.is_finite() {
        return Err(Error::NonFinite);
    }
    if !l.has_zero_bottom_row() {
        return Err(Error::NotHomogeneous);
    }
    decompose(l, Kind::Generator, opts)
}

fn decompose(m: &Mat4, kind: Kind, opts: &EigenOptions) -> Result<EigenDecomp4> {
    let h = kind.h();
    let a = m.block();
    let d = m.translation();
    let mut a_shift = a;
    for (i, row) in a_shift.iter_mut().enumerate() {
        row[i] -= h;
    }
    let shifted = eig3_shifted(&a, h);
    if shifted.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let hz = C::new(h, 0.0);
    let lambdas_raw = [shifted[0] + hz, shifted[1] + hz, shifted[2] + hz, hz];

    let mut delta = *m;
    for i in 0..4 {
        delta.0[i][i] -= h;
    }
    if crate::linalg::norm_inf(&delta) < opts.near_identity_tol {
        return Ok(EigenDecomp4 {
            lambdas: lambdas_raw,
            p: CMat4::identity(),
            p_inv: CMat4::identity(),
            branch: Branch::NearIdentity,
            kind,
            cond: 1.0,
            factors: EigenFactors::NearIdentity { delta },
        });
    }

    let is_pair = shifted[0].im != 0.0;
    let mut shifted = shifted;
    let mut x: CMat3 = [[ZERO; 3]; 3];
    let set_col = |x: &mut CMat3, k: usize, v: CVec3| {
        for i in 0..3 {
            x[i][k] = v[i];
        }
    };

    // Index of the block eigenvalue nearest h (always the real one for a pair).
    let near = if is_pair { 2 } else { (0..3).min_by(|&i, &j| shifted[i].norm().total_cmp(&shifted[j].norm())).unwrap() };
    let repeated = shifted[near].norm() < opts.repeat_tol;

    if is_pair {
        let mut mc = complexify(&a_shift);
        for (i, row) in mc.iter_mut().enumerate() {
            row[i] -= shifted[0];
        }
        let v = null_vector(&mc).ok_or_else(|| Error::Defective("complex pair".into()))?;
        set_col(&mut x, 0, v);
        set_col(&mut x, 1, v.map(|z| z.conj()));
        let mut mr = a_shift;
        for (i, row) in mr.iter_mut().enumerate() {
            row[i] -= shifted[2].re;
        }
        let v = null_vector(&complexify(&mr)).ok_or_else(|| Error::Defective("real block eigenvalue".into()))?;
        set_col(&mut x, 2, v);
    } else {
        // Three real block eigenvalues; group near-equal ones.
        let scale = shifted.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let cluster_tol = 1e-8 * scale;
        let mut assigned = [false; 3];
        for k in 0..3 {
            if assigned[k] {
                continue;
            }
            let group: Vec<usize> = (k..3).filter(|&j| !assigned[j] && (shifted[j].re - shifted[k].re).abs() < cluster_tol).collect();
            let mean = group.iter().map(|&j| shifted[j].re).sum::<f64>() / group.len() as f64;
            let mut mr = a_shift;
            for (i, row) in mr.iter_mut().enumerate() {
                row[i] -= mean;
            }
            if group.len() == 1 {
                let v = null_vector(&complexify(&mr)).ok_or_else(|| Error::Defective("real block eigenvalue".into()))?;
                set_col(&mut x, k, v);
            } else {
                if group.contains(&near) && repeated {
                    return Err(Error::Defective("eigenvalue h with multiplicity above two".into()));
                }
                let basis = null_space_low_rank(&mr, group.len(), 1e-7 * scale)?;
                for (&j, v) in group.iter().zip(basis) {
                    set_col(&mut x, j, v.map(|r| C::new(r, 0.0)));
                    shifted[j] = C::new(mean, 0.0);
                }
            }
            assigned[k] = true;
            for j in 0..3 {
                if !assigned[j] && (shifted[j].re - shifted[k].re).abs() < cluster_tol {
                    assigned[j] = true;
                }
            }
        }
    }

    // Fourth eigenvector (u, 1) and the translation used by the factors.
    let (u, d_eff, branch) = if repeated {
        shifted[near] = ZERO;
        let mut at = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                at[i][j] = a_shift[j][i];
            }
        }
        let left = null_vector(&complexify(&at)).ok_or_else(|| Error::Defective("eigenvalue h".into()))?;
        let left_re = [left[0].re, left[1].re, left[2].re];
        let lnorm = norm3(left_re);
        let left = left_re.map(|v| v / lnorm);
        let right = [x[0][near].re, x[1][near].re, x[2][near].re];
        let pitch = dot3(left, d);
        if pitch.abs() > opts.pitch_tol {
            return Err(Error::Screw { pitch });
        }
        let coupling = dot3(left, right);
        if coupling.abs() < 1e-8 {
            return Err(Error::Defective("eigenvalue h".into()));
        }
        let d_proj = [d[0] - pitch * left[0], d[1] - pitch * left[1], d[2] - pitch * left[2]];
        let mut bordered = a_shift;
        for i in 0..3 {
            for j in 0..3 {
                bordered[i][j] += left[i] * right[j];
            }
        }
        let u = solve3(&bordered, d_proj.map(|v| -v))?;
        (u, d_proj, Branch::RepeatedUnit)
    } else {
        let u = solve3(&a_shift, d.map(|v| -v))?;
        (u, d, Branch::Distinct)
    };

    let y = cinv3(&x)?;
    let d_c = d_eff.map(|v| C::new(v, 0.0));
    let mut c = [ZERO; 3];
    for k in 0..3 {
        c[k] = (0..3).map(|j| y[k][j] * d_c[j]).sum();
    }

    let nu = (u.iter().map(|v| v * v).sum::<f64>() + 1.0).sqrt();
    let mut p = CMat4::zeros();
    let mut p_inv = CMat4::zeros();
    for i in 0..3 {
        for k in 0..3 {
            p.0[i][k] = x[i][k];
            p_inv.0[k][i] = y[k][i];
        }
        p.0[i][3] = C::new(u[i] / nu, 0.0);
    }
    p.0[3][3] = C::new(1.0 / nu, 0.0);
    for k in 0..3 {
        p_inv.0[k][3] = -(0..3).map(|j| y[k][j] * u[j]).sum::<C>();
    }
    p_inv.0[3][3] = C::new(nu, 0.0);

    let cond = cond_2(&p, &p_inv);
    if !(cond <= opts.cond_max) {
        return Err(Error::IllConditioned { cond });
    }
    let mut lambdas = [shifted[0] + hz, shifted[1] + hz, shifted[2] + hz, hz];
    if is_pair {
        lambdas[1] = lambdas[0].conj();
    }
    Ok(EigenDecomp4 { lambdas, p, p_inv, branch, kind, cond, factors: EigenFactors::Spectral { shifted, x, y, c } })
}

impl EigenDecomp4 {
    pub fn factors(&self) -> &EigenFactors {
        &self.factors
    }

    /// `P·D·P⁻¹`, evaluated in block form.
    pub fn reconstruct(&self) -> Result<Mat4> {
        self.factors.apply(ScalarFn::Identity, self.kind.h())
    }

    /// `P·D·P⁻¹` as a dense complex product of the stored factors.
    pub fn dense_product(&self) -> CMat4 {
        self.p * CMat4::from_diag(self.lambdas) * self.p_inv
    }

    /// Whether the homogeneous eigenvalue is (numerically) double: the block
    /// eigenvalue nearest `h` lies within `tol` of it.
    pub fn has_repeated_unit(&self, tol: f64) -> bool {
        let h = C::new(self.kind.h(), 0.0);
        self.lambdas[..3].iter().any(|l| (*l - h).norm() < tol)
    }
}

fn require_transform(dec: &EigenDecomp4) -> Result<()> {
    if dec.kind != Kind::Transform {
        return Err(Error::InvalidArgument("decomposition of a generator, not a transform".into()));
    }
    Ok(())
}

/// Principal logarithm `P·diag(log λ)·P⁻¹`.
pub fn logm_eig(dec: &EigenDecomp4) -> Result<Mat4> {
    require_transform(dec)?;
    let mut l = dec.factors.apply(ScalarFn::Log, 1.0)?;
    l.0[3] = [0.0; 4];
    Ok(l)
}

/// `Tᵗ = P·diag(λᵗ)·P⁻¹` with principal scalar powers.
pub fn frac_power(dec: &EigenDecomp4, t: f64) -> Result<Mat4> {
    require_transform(dec)?;
    dec.factors.power(t)
}

/// `exp(t·L)` for the decomposition of a generator `L`.
pub fn expm_generator(dec: &EigenDecomp4, t: f64) -> Result<Mat4> {
    if dec.kind != Kind::Generator {
        return Err(Error::InvalidArgument("decomposition of a transform, not a generator".into()));
    }
    dec.factors.exp_scaled(t)
}
