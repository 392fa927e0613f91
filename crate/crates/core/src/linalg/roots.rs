//! Closed-form eigenvalues of 3×3 matrices and a polynomial root finder for
//! general 4×4 spectra.

use num_complex::Complex64;

use crate::linalg::mat::Mat4;

/// Coefficients `(c2, c1, c0)` of `det(λI − A) = λ³ − c2 λ² + c1 λ − c0`.
pub fn char_poly3(a: &[[f64; 3]; 3]) -> (f64, f64, f64) {
    let tr = a[0][0] + a[1][1] + a[2][2];
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0] + a[1][1] * a[2][2] - a[1][2] * a[2][1];
    (tr, minors, det3(a))
}

pub fn det3(a: &[[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

fn newton_step(z: Complex64, c2: f64, c1: f64, c0: f64) -> Complex64 {
    let p = ((z - c2) * z + c1) * z - c0;
    let dp = (z * 3.0 - 2.0 * c2) * z + c1;
    if dp.norm() == 0.0 || !dp.re.is_finite() {
        return z;
    }
    let next = z - p / dp;
    let p_next = ((next - c2) * next + c1) * next - c0;
    if p_next.norm() <= p.norm() {
        next
    } else {
        z
    }
}

/// Roots of `λ³ − c2 λ² + c1 λ − c0` (Cardano, with a trigonometric branch
/// for three real roots), each polished by one Newton step.
///
/// Ordering: with a complex pair, `[λ, conj(λ), real]` with `Im λ > 0`;
/// with three real roots, descending.
pub fn cubic_roots(c2: f64, c1: f64, c0: f64) -> [Complex64; 3] {
    let a = -c2;
    let b = c1;
    let c = -c0;
    let shift = c2 / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);

    if disc > 0.0 {
        let sq = disc.sqrt();
        let big = -q / 2.0 - q.signum() * sq;
        let big = if q == 0.0 { -sq } else { big };
        let u = big.cbrt();
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        let real = newton_step(Complex64::new(u + v + shift, 0.0), c2, c1, c0).re;
        let re = -(u + v) / 2.0 + shift;
        let im = 3f64.sqrt() / 2.0 * (u - v).abs();
        if im == 0.0 {
            let z = Complex64::new(re, 0.0);
            return [z, z, Complex64::new(real, 0.0)];
        }
        let mut z = newton_step(Complex64::new(re, im), c2, c1, c0);
        if z.im < 0.0 {
            z = z.conj();
        }
        return [z, z.conj(), Complex64::new(real, 0.0)];
    }

    let mut roots = if p == 0.0 {
        [shift; 3]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (-4.0 * q / (m * m * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        [m * phi.cos() + shift, m * (phi - tau).cos() + shift, m * (phi + tau).cos() + shift]
    };
    for r in roots.iter_mut() {
        *r = newton_step(Complex64::new(*r, 0.0), c2, c1, c0).re;
    }
    roots.sort_by(|x, y| y.total_cmp(x));
    roots.map(|r| Complex64::new(r, 0.0))
}

/// Eigenvalues of `A − hI` (the block spectrum shifted by `h`). Subtracting
/// the shift before forming the polynomial keeps clustered spectra near `h`
/// accurate.
pub fn eig3_shifted(a: &[[f64; 3]; 3], h: f64) -> [Complex64; 3] {
    let mut s = *a;
    for (i, row) in s.iter_mut().enumerate() {
        row[i] -= h;
    }
    let (c2, c1, c0) = char_poly3(&s);
    cubic_roots(c2, c1, c0)
}

/// Eigenvalues of a general real 4×4 matrix.
///
/// Matrices whose bottom row is `[0, 0, 0, a]` are split into the 3×3 block
/// spectrum plus `a`; others go through the characteristic quartic.
pub fn eigvals4(m: &Mat4) -> [Complex64; 4] {
    if m.0[3][0] == 0.0 && m.0[3][1] == 0.0 && m.0[3][2] == 0.0 {
        let h = m.0[3][3];
        let block = eig3_shifted(&m.block(), h);
        let hz = Complex64::new(h, 0.0);
        return [block[0] + hz, block[1] + hz, block[2] + hz, hz];
    }
    quartic_eigvals(m)
}

/// Faddeev–LeVerrier coefficients, then Aberth–Ehrlich iteration.
fn quartic_eigvals(m: &Mat4) -> [Complex64; 4] {
    // det(λI − M) = λ⁴ + k[3] λ³ + k[2] λ² + k[1] λ + k[0]
    let mut k = [0.0; 4];
    let mut mk = Mat4::zeros();
    let ident = Mat4::identity();
    for step in 1..=4usize {
        let coeff_prev = if step == 1 { 1.0 } else { k[4 - step + 1] };
        mk = *m * (mk + ident.scale(coeff_prev));
        k[4 - step] = -mk.trace() / step as f64;
    }
    let poly = |z: Complex64| (((z + k[3]) * z + k[2]) * z + k[1]) * z + k[0];
    let dpoly = |z: Complex64| ((z * 4.0 + 3.0 * k[3]) * z + 2.0 * k[2]) * z + k[1];

    let radius = 1.0 + k.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut z: [Complex64; 4] = std::array::from_fn(|i| Complex64::from_polar(radius * 0.5, 0.4 + i as f64 * std::f64::consts::FRAC_PI_2));
    for _ in 0..200 {
        let mut max_step = 0.0f64;
        for i in 0..4 {
            let p = poly(z[i]);
            let dp = dpoly(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..4 {
                if j != i {
                    sum += (z[i] - z[j]).inv();
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if w.re.is_finite() && w.im.is_finite() {
                z[i] -= w;
                max_step = max_step.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-16 {
            break;
        }
    }
    z
}
