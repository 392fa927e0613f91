//! Exact Euclidean distance transform by separable lower envelopes of
//! parabolas, one axis at a time.

use rayon::prelude::*;

use super::{Field, Grid3, MaskField, ScalarField};
use crate::error::{Error, Result};

/// Squared distance transform of one line. `f` holds squared distances
/// accumulated over earlier axes (`INFINITY` where no site exists yet);
/// `h` is the sample spacing along this axis.
fn envelope_1d(f: &[f64], h: f64, out: &mut [f64]) {
    let n = f.len();
    let mut v: Vec<usize> = Vec::with_capacity(n);
    let mut z: Vec<f64> = Vec::with_capacity(n + 1);
    let pos = |q: usize| q as f64 * h;
    for q in 0..n {
        if f[q].is_infinite() {
            continue;
        }
        loop {
            let Some(&top) = v.last() else {
                v.push(q);
                z.clear();
                z.push(f64::NEG_INFINITY);
                break;
            };
            let (pq, pt) = (pos(q), pos(top));
            let s = ((f[q] + pq * pq) - (f[top] + pt * pt)) / (2.0 * (pq - pt));
            if s <= *z.last().unwrap() {
                v.pop();
                z.pop();
                continue;
            }
            v.push(q);
            z.push(s);
            break;
        }
    }
    if v.is_empty() {
        out.fill(f64::INFINITY);
        return;
    }
    z.push(f64::INFINITY);
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        let p = pos(q);
        while z[k + 1] < p {
            k += 1;
        }
        let d = p - pos(v[k]);
        *o = d * d + f[v[k]];
    }
}

/// Squared distances (mm²) from every voxel centre to the nearest
/// foreground centre.
pub fn edt_squared(mask: &MaskField) -> Result<ScalarField> {
    if mask.count() == 0 {
        return Err(Error::EmptyMask);
    }
    let grid = mask.grid;
    let mut data: Vec<f64> = mask.data.iter().map(|&b| if b { 0.0 } else { f64::INFINITY }).collect();
    for axis in 0..3 {
        transform_axis(&grid, &mut data, axis);
    }
    Ok(Field { grid, data })
}

fn transform_axis(grid: &Grid3, data: &mut [f64], axis: usize) {
    let dims = grid.dims;
    let n = dims[axis];
    let (a, b) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let lines: Vec<(usize, usize)> = (0..dims[b]).flat_map(|jb| (0..dims[a]).map(move |ja| (ja, jb))).collect();
    let index = |ja: usize, jb: usize, q: usize| {
        let mut c = [0usize; 3];
        c[a] = ja;
        c[b] = jb;
        c[axis] = q;
        grid.index(c[0], c[1], c[2])
    };
    let results: Vec<Vec<f64>> = {
        let src = &*data;
        lines
            .par_iter()
            .map(|&(ja, jb)| {
                let f: Vec<f64> = (0..n).map(|q| src[index(ja, jb, q)]).collect();
                let mut out = vec![0.0; n];
                envelope_1d(&f, grid.spacing[axis], &mut out);
                out
            })
            .collect()
    };
    for (&(ja, jb), line) in lines.iter().zip(results) {
        for (q, v) in line.into_iter().enumerate() {
            data[index(ja, jb, q)] = v;
        }
    }
}

/// Euclidean distance (mm) to the nearest foreground voxel; zero on the mask.
pub fn edt(mask: &MaskField) -> Result<ScalarField> {
    let mut sq = edt_squared(mask)?;
    sq.data.iter_mut().for_each(|v| *v = v.sqrt());
    Ok(sq)
}
