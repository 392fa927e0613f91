//! Fixed-size 4×4 real and complex matrices.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major 4×4 real matrix.
#[derive(Clone, Copy, Debug, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Mat4(pub [[f64; 4]; 4]);

/// Row-major 4×4 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CMat4(pub [[Complex64; 4]; 4]);

/// Relative pivot threshold below which a matrix is reported singular.
const SINGULAR_RTOL: f64 = 1e-12;

impl Mat4 {
    pub const fn zeros() -> Self {
        Mat4([[0.0; 4]; 4])
    }

    pub const fn identity() -> Self {
        Mat4([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
    }

    pub const fn from_rows(rows: [[f64; 4]; 4]) -> Self {
        Mat4(rows)
    }

    pub fn from_diag(d: [f64; 4]) -> Self {
        let mut m = Mat4::zeros();
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    /// Homogeneous matrix `[[a, d], [0, 1]]`.
    pub fn from_block(a: [[f64; 3]; 3], d: [f64; 3]) -> Self {
        let mut m = Mat4::identity();
        for i in 0..3 {
            m.0[i][..3].copy_from_slice(&a[i]);
            m.0[i][3] = d[i];
        }
        m
    }

    pub fn rows(&self) -> [[f64; 4]; 4] {
        self.0
    }

    /// Upper-left 3×3 block.
    pub fn block(&self) -> [[f64; 3]; 3] {
        let mut a = [[0.0; 3]; 3];
        for i in 0..3 {
            a[i].copy_from_slice(&self.0[i][..3]);
        }
        a
    }

    /// First three entries of the last column.
    pub fn translation(&self) -> [f64; 3] {
        [self.0[0][3], self.0[1][3], self.0[2][3]]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                t.0[j][i] = self.0[i][j];
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|v| *v *= s);
        m
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Bottom row is exactly `[0, 0, 0, 1]`.
    pub fn is_homogeneous(&self) -> bool {
        self.0[3] == [0.0, 0.0, 0.0, 1.0]
    }

    /// Bottom row is exactly zero (a generator of homogeneous transforms).
    pub fn has_zero_bottom_row(&self) -> bool {
        self.0[3] == [0.0; 4]
    }

    pub fn with_bottom_row(mut self, row: [f64; 4]) -> Self {
        self.0[3] = row;
        self
    }

    /// Apply to the homogeneous point `(p, 1)` and drop the last coordinate.
    pub fn transform_point(&self, p: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = m[i][0] * p[0] + m[i][1] * p[1] + m[i][2] * p[2] + m[i][3];
        }
        out
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        let s0 = m[0][0] * m[1][1] - m[1][0] * m[0][1];
        let s1 = m[0][0] * m[1][2] - m[1][0] * m[0][2];
        let s2 = m[0][0] * m[1][3] - m[1][0] * m[0][3];
        let s3 = m[0][1] * m[1][2] - m[1][1] * m[0][2];
        let s4 = m[0][1] * m[1][3] - m[1][1] * m[0][3];
        let s5 = m[0][2] * m[1][3] - m[1][2] * m[0][3];
        let c5 = m[2][2] * m[3][3] - m[3][2] * m[2][3];
        let c4 = m[2][1] * m[3][3] - m[3][1] * m[2][3];
        let c3 = m[2][1] * m[3][2] - m[3][1] * m[2][2];
        let c2 = m[2][0] * m[3][3] - m[3][0] * m[2][3];
        let c1 = m[2][0] * m[3][2] - m[3][0] * m[2][2];
        let c0 = m[2][0] * m[3][1] - m[3][0] * m[2][1];
        s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
    }

    pub fn to_complex(&self) -> CMat4 {
        let mut c = CMat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                c.0[i][j] = Complex64::new(self.0[i][j], 0.0);
            }
        }
        c
    }
}

impl Index<(usize, usize)> for Mat4 {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.0[r][c]
    }
}

impl IndexMut<(usize, usize)> for Mat4 {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.0[r][c]
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    #[inline]
    fn mul(self, rhs: Mat4) -> Mat4 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j] + a[i][3] * b[3][j];
            }
        }
        Mat4(out)
    }
}

impl Mul<f64> for Mat4 {
    type Output = Mat4;
    fn mul(self, s: f64) -> Mat4 {
        self.scale(s)
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(mut self, rhs: Mat4) -> Mat4 {
        self += rhs;
        self
    }
}

impl AddAssign for Mat4 {
    fn add_assign(&mut self, rhs: Mat4) {
        for i in 0..4 {
            for j in 0..4 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(mut self, rhs: Mat4) -> Mat4 {
        for i in 0..4 {
            for j in 0..4 {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

impl Neg for Mat4 {
    type Output = Mat4;
    fn neg(self) -> Mat4 {
        self.scale(-1.0)
    }
}

impl CMat4 {
    pub fn zeros() -> Self {
        CMat4([[Complex64::new(0.0, 0.0); 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = CMat4::zeros();
        for i in 0..4 {
            m.0[i][i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(d: [Complex64; 4]) -> Self {
        let mut m = CMat4::zeros();
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    pub fn column(&self, c: usize) -> [Complex64; 4] {
        [self.0[0][c], self.0[1][c], self.0[2][c], self.0[3][c]]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Real part, plus the largest discarded imaginary magnitude.
    pub fn split_real(&self) -> (Mat4, f64) {
        let mut m = Mat4::zeros();
        let mut residue = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = self.0[i][j].re;
                residue = residue.max(self.0[i][j].im.abs());
            }
        }
        (m, residue)
    }

    pub fn conj_transpose(&self) -> Self {
        let mut t = CMat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                t.0[j][i] = self.0[i][j].conj();
            }
        }
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |a, z| a.max(z.norm()))
    }
}

impl Mul for CMat4 {
    type Output = CMat4;
    fn mul(self, rhs: CMat4) -> CMat4 {
        let mut out = CMat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..4 {
                    acc += self.0[i][k] * rhs.0[k][j];
                }
                out.0[i][j] = acc;
            }
        }
        out
    }
}

impl Sub for CMat4 {
    type Output = CMat4;
    fn sub(mut self, rhs: CMat4) -> CMat4 {
        for i in 0..4 {
            for j in 0..4 {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

/// Gauss-Jordan inverse with partial pivoting; generic over real/complex entries.
fn gauss_jordan<T>(m: [[T; 4]; 4], abs: impl Fn(&T) -> f64, zero: T, one: T) -> Result<[[T; 4]; 4]>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<Output = T> + std::ops::Div<Output = T>,
{
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(abs(v)));
    if !(scale.is_finite()) {
        return Err(Error::NonFinite);
    }
    if scale == 0.0 {
        return Err(Error::Singular);
    }
    let mut a = m;
    let mut inv = [[zero; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = one;
    }
    for col in 0..4 {
        let pivot = (col..4).max_by(|&r1, &r2| abs(&a[r1][col]).total_cmp(&abs(&a[r2][col]))).unwrap();
        if abs(&a[pivot][col]) <= SINGULAR_RTOL * scale {
            return Err(Error::Singular);
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..4 {
            a[col][j] = a[col][j] / p;
            inv[col][j] = inv[col][j] / p;
        }
        for r in 0..4 {
            if r == col {
                continue;
            }
            let f = a[r][col];
            for j in 0..4 {
                a[r][j] = a[r][j] - f * a[col][j];
                inv[r][j] = inv[r][j] - f * inv[col][j];
            }
        }
    }
    Ok(inv)
}

/// Inverse of a real 4×4 matrix.
pub fn inv4(m: &Mat4) -> Result<Mat4> {
    gauss_jordan(m.0, |v: &f64| v.abs(), 0.0, 1.0).map(Mat4)
}

/// Inverse of a complex 4×4 matrix.
pub fn cinv4(m: &CMat4) -> Result<CMat4> {
    gauss_jordan(m.0, |z: &Complex64| z.norm(), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)).map(CMat4)
}

/// Solve `a · x = b` for a 4×4 right-hand side (LU with partial pivoting).
pub fn solve4(a: &Mat4, b: &Mat4) -> Result<Mat4> {
    let mut lu = a.0;
    let mut rhs = b.0;
    let scale = a.max_abs();
    if !scale.is_finite() {
        return Err(Error::NonFinite);
    }
    for col in 0..4 {
        let mut pivot = col;
        for r in col + 1..4 {
            if lu[r][col].abs() > lu[pivot][col].abs() {
                pivot = r;
            }
        }
        if lu[pivot][col].abs() <= SINGULAR_RTOL * scale {
            return Err(Error::Singular);
        }
        lu.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in col + 1..4 {
            let f = lu[r][col] / lu[col][col];
            for j in col..4 {
                lu[r][j] -= f * lu[col][j];
            }
            for j in 0..4 {
                rhs[r][j] -= f * rhs[col][j];
            }
        }
    }
    for col in (0..4).rev() {
        for j in 0..4 {
            let mut acc = rhs[col][j];
            for k in col + 1..4 {
                acc -= lu[col][k] * rhs[k][j];
            }
            rhs[col][j] = acc / lu[col][col];
        }
    }
    Ok(Mat4(rhs))
}

/// Maximum absolute row sum.
pub fn norm_inf(m: &Mat4) -> f64 {
    m.0.iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Spectral norm: square root of the largest eigenvalue of MᵀM.
pub fn norm_2(m: &Mat4) -> f64 {
    let g = m.transpose() * *m;
    let mut a = [[0.0; 4]; 4];
    a.copy_from_slice(&g.0);
    let ev = sym_eigenvalues(a);
    ev.iter().fold(0.0f64, |x, &v| x.max(v)).max(0.0).sqrt()
}

/// Spectral norm of a complex matrix, via the real symmetric embedding of PᴴP.
pub fn cnorm_2(m: &CMat4) -> f64 {
    let g = m.conj_transpose() * *m;
    let mut a = [[0.0; 8]; 8];
    for i in 0..4 {
        for j in 0..4 {
            let z = g.0[i][j];
            a[i][j] = z.re;
            a[i + 4][j + 4] = z.re;
            a[i][j + 4] = -z.im;
            a[i + 4][j] = z.im;
        }
    }
    let ev = sym_eigenvalues(a);
    ev.iter().fold(0.0f64, |x, &v| x.max(v)).max(0.0).sqrt()
}

/// Eigenvalues of a small real symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eigenvalues<const N: usize>(mut a: [[f64; N]; N]) -> [f64; N] {
    for _sweep in 0..64 {
        let off: f64 = (0..N).flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let diag: f64 = (0..N).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-32 * diag || off == 0.0 {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = a[i][i];
    }
    out
}

/// 2-norm condition number of a complex matrix given its inverse.
pub fn cond_2(m: &CMat4, inv: &CMat4) -> f64 {
    cnorm_2(m) * cnorm_2(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_identity_and_diagonal() {
        assert_eq!(inv4(&Mat4::identity()).unwrap(), Mat4::identity());
        let inv = inv4(&Mat4::from_diag([2.0, 4.0, 5.0, 1.0])).unwrap();
        let expected = Mat4::from_diag([0.5, 0.25, 0.2, 1.0]);
        assert!((inv - expected).max_abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut m = Mat4::identity();
        m.0[2] = m.0[1];
        assert!(matches!(inv4(&m), Err(Error::Singular)));
        assert!(matches!(inv4(&Mat4::zeros()), Err(Error::Singular)));
        assert!(matches!(cinv4(&CMat4::zeros()), Err(Error::Singular)));
    }

    #[test]
    fn norms_of_simple_matrices() {
        assert_eq!(norm_inf(&Mat4::identity()), 1.0);
        assert_eq!(norm_2(&Mat4::zeros()), 0.0);
        assert!((norm_2(&Mat4::from_diag([3.0, 1.0, 1.0, 1.0])) - 3.0).abs() < 1e-14);
        let c = Mat4::from_diag([3.0, -1.0, 2.0, 1.0]).to_complex();
        assert!((cnorm_2(&c) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn norm_2_of_rank_one() {
        // u vᵀ with |u| = 5, |v| = 2 has spectral norm 10.
        let u = [3.0, 4.0, 0.0, 0.0];
        let v = [0.0, 0.0, 2.0, 0.0];
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = u[i] * v[j];
            }
        }
        assert!((norm_2(&m) - 10.0).abs() < 1e-13);
    }

    #[test]
    fn solve_matches_inverse() {
        let a = Mat4::from_rows([[4.0, 1.0, 0.5, 2.0], [1.0, 3.0, 0.0, -1.0], [0.0, 2.0, 5.0, 1.0], [1.0, 0.0, 1.0, 6.0]]);
        let b = Mat4::from_diag([1.0, 2.0, 3.0, 4.0]);
        let x = solve4(&a, &b).unwrap();
        assert!((a * x - b).max_abs() < 1e-13);
        assert!((a.det() - 1.0 / inv4(&a).unwrap().det()).abs() < 1e-10);
    }
}
