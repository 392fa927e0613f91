//! Pull-back resampling of scalar volumes through a deformation.
//!
//! Each output voxel `x` reads the source volume at the mapped point `Φ(x)`.
//! Deformations come either as displacements in mm (`Φ(x) = x + u(x)`) or
//! as per-voxel homogeneous matrices (`Φ(x) = M(x)·x̃`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Field, Grid3, MatField, ScalarField, VectorField};
use crate::error::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interp {
    #[default]
    Trilinear,
    CubicBspline,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WarpOptions {
    pub interp: Interp,
    /// Value written where the mapped point leaves the source grid.
    pub fill: f64,
}

impl Default for WarpOptions {
    fn default() -> Self {
        WarpOptions { interp: Interp::Trilinear, fill: 0.0 }
    }
}

impl From<Interp> for WarpOptions {
    fn from(interp: Interp) -> Self {
        WarpOptions { interp, ..Default::default() }
    }
}

/// Continuous-coordinate sampler over a source volume.
enum Sampler<'a> {
    Linear(&'a ScalarField),
    Spline(ScalarField),
}

impl Sampler<'_> {
    fn sample(&self, c: [f64; 3], fill: f64) -> f64 {
        let grid = match self {
            Sampler::Linear(f) => &f.grid,
            Sampler::Spline(f) => &f.grid,
        };
        for a in 0..3 {
            let hi = (grid.dims[a] - 1) as f64;
            if !(c[a] >= 0.0 && c[a] <= hi) {
                return fill;
            }
        }
        match self {
            Sampler::Linear(f) => trilinear(f, c),
            Sampler::Spline(coef) => bspline_eval(coef, c),
        }
    }
}

fn trilinear(f: &ScalarField, c: [f64; 3]) -> f64 {
    let dims = f.grid.dims;
    let mut base = [0usize; 3];
    let mut frac = [0.0; 3];
    for a in 0..3 {
        if dims[a] == 1 {
            continue;
        }
        let fl = c[a].floor().min((dims[a] - 2) as f64);
        base[a] = fl as usize;
        frac[a] = c[a] - fl;
    }
    let mut acc = 0.0;
    for corner in 0..8 {
        let mut w = 1.0;
        let mut idx = base;
        for a in 0..3 {
            let bit = (corner >> a) & 1;
            if bit == 1 {
                if dims[a] == 1 {
                    w = 0.0;
                    break;
                }
                idx[a] += 1;
                w *= frac[a];
            } else {
                w *= 1.0 - frac[a];
            }
        }
        if w != 0.0 {
            acc += w * f.get(idx[0], idx[1], idx[2]);
        }
    }
    acc
}

/// Mirror an integer index into `[0, n)` with whole-sample symmetry.
fn mirror(i: i64, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as i64 - 1);
    let mut m = i.rem_euclid(period);
    if m >= n as i64 {
        m = period - m;
    }
    m as usize
}

fn bspline_weights(t: f64) -> [f64; 4] {
    let u = 1.0 - t;
    [u * u * u / 6.0, (4.0 - 6.0 * t * t + 3.0 * t * t * t) / 6.0, (1.0 + 3.0 * t + 3.0 * t * t - 3.0 * t * t * t) / 6.0, t * t * t / 6.0]
}

fn bspline_eval(coef: &ScalarField, c: [f64; 3]) -> f64 {
    let dims = coef.grid.dims;
    let mut idx = [[0usize; 4]; 3];
    let mut w = [[0.0; 4]; 3];
    for a in 0..3 {
        let fl = c[a].floor();
        w[a] = bspline_weights(c[a] - fl);
        for (k, slot) in idx[a].iter_mut().enumerate() {
            *slot = mirror(fl as i64 - 1 + k as i64, dims[a]);
        }
    }
    let mut acc = 0.0;
    for (kz, &wz) in w[2].iter().enumerate() {
        for (ky, &wy) in w[1].iter().enumerate() {
            let wyz = wy * wz;
            for (kx, &wx) in w[0].iter().enumerate() {
                acc += wx * wyz * coef.get(idx[0][kx], idx[1][ky], idx[2][kz]);
            }
        }
    }
    acc
}

/// In-place conversion of samples to cubic B-spline coefficients along one
/// line (causal/anticausal recursive filtering, mirror boundaries).
fn prefilter_line(s: &mut [f64]) {
    let n = s.len();
    if n < 2 {
        return;
    }
    let z = 3f64.sqrt() - 2.0;
    let gain = (1.0 - z) * (1.0 - 1.0 / z);
    s.iter_mut().for_each(|v| *v *= gain);
    // Causal initialisation: mirror-symmetric sum truncated at machine precision.
    let horizon = ((f64::EPSILON.ln() / z.abs().ln()).ceil() as usize).min(n);
    let mut sum = s[0];
    let mut zk = z;
    if horizon < n {
        for v in s.iter().take(horizon).skip(1) {
            sum += zk * v;
            zk *= z;
        }
    } else {
        let zn = z.powi(n as i32 - 1);
        let mut z2n = zn * zn / z;
        sum += zn * s[n - 1];
        for v in s.iter().take(n - 1).skip(1) {
            sum += (zk + z2n) * v;
            zk *= z;
            z2n /= z;
        }
        sum /= 1.0 - zn * zn;
    }
    s[0] = sum;
    for k in 1..n {
        s[k] += z * s[k - 1];
    }
    s[n - 1] = (z / (z * z - 1.0)) * (z * s[n - 2] + s[n - 1]);
    for k in (0..n - 1).rev() {
        s[k] = z * (s[k + 1] - s[k]);
    }
}

/// Cubic B-spline coefficients interpolating the volume at voxel centres.
pub fn bspline_coefficients(volume: &ScalarField) -> ScalarField {
    let grid = volume.grid;
    let mut data = volume.data.clone();
    let dims = grid.dims;
    for axis in 0..3 {
        let n = dims[axis];
        let mut line = vec![0.0; n];
        let (a, b) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for jb in 0..dims[b] {
            for ja in 0..dims[a] {
                let at = |q: usize| {
                    let mut c = [0usize; 3];
                    c[a] = ja;
                    c[b] = jb;
                    c[axis] = q;
                    grid.index(c[0], c[1], c[2])
                };
                for (q, v) in line.iter_mut().enumerate() {
                    *v = data[at(q)];
                }
                prefilter_line(&mut line);
                for (q, v) in line.iter().enumerate() {
                    data[at(q)] = *v;
                }
            }
        }
    }
    Field { grid, data }
}

fn resample(volume: &ScalarField, grid: &Grid3, opts: WarpOptions, coord: impl Fn(usize) -> [f64; 3] + Sync) -> ScalarField {
    let sampler = match opts.interp {
        Interp::Trilinear => Sampler::Linear(volume),
        Interp::CubicBspline => Sampler::Spline(bspline_coefficients(volume)),
    };
    let data = (0..grid.len()).into_par_iter().map(|idx| sampler.sample(coord(idx), opts.fill)).collect();
    Field { grid: *grid, data }
}

/// Pull-back warp through a displacement field (mm).
pub fn warp(volume: &ScalarField, disp: &VectorField, opts: impl Into<WarpOptions>) -> Result<ScalarField> {
    volume.same_grid(disp)?;
    let grid = volume.grid;
    Ok(resample(volume, &grid, opts.into(), |idx| {
        let c = grid.coords(idx);
        let u = disp.data[idx];
        [0, 1, 2].map(|a| c[a] as f64 + u[a] / grid.spacing[a])
    }))
}

/// Pull-back warp through per-voxel homogeneous matrices.
pub fn warp_matrices(volume: &ScalarField, mats: &MatField, opts: impl Into<WarpOptions>) -> Result<ScalarField> {
    volume.same_grid(mats)?;
    let grid = volume.grid;
    Ok(resample(volume, &grid, opts.into(), |idx| {
        let c = grid.coords(idx);
        let x = grid.position(idx);
        let y = mats.data[idx].transform_point(x);
        [0, 1, 2].map(|a| c[a] as f64 + (y[a] - x[a]) / grid.spacing[a])
    }))
}
