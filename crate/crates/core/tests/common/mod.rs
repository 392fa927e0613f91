#![allow(dead_code)]

use polyexp::field::{Field, Grid3, MaskField, ScalarField};
use polyexp::linalg::{norm_2, Mat4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rodrigues rotation about a unit axis, built independently of the library.
pub fn rotation(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = axis.map(|v| v / n);
    let (s, c) = angle.sin_cos();
    let v = 1.0 - c;
    [
        [c + x * x * v, x * y * v - z * s, x * z * v + y * s],
        [y * x * v + z * s, c + y * y * v, y * z * v - x * s],
        [z * x * v - y * s, z * y * v + x * s, c + z * z * v],
    ]
}

pub fn rigid(axis: [f64; 3], angle: f64, d: [f64; 3]) -> Mat4 {
    Mat4::from_block(rotation(axis, angle), d)
}

pub fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|c| c / n)
}

pub fn random_axis(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n2: f64 = v.iter().map(|c| c * c).sum();
        if n2 > 0.01 && n2 <= 1.0 {
            return unit(v);
        }
    }
}

/// Random rigid motion with the translation perpendicular to the rotation
/// axis (zero pitch).
pub fn random_planar_rigid(rng: &mut impl Rng, max_angle: f64, max_trans: f64) -> Mat4 {
    let axis = random_axis(rng);
    let angle = rng.gen_range(0.05..max_angle);
    let raw = [0; 3].map(|_| rng.gen_range(-max_trans..max_trans));
    let along: f64 = (0..3).map(|a| raw[a] * axis[a]).sum();
    let d = [0, 1, 2].map(|a| raw[a] - along * axis[a]);
    rigid(axis, angle, d)
}

pub fn max_diff(a: &Mat4, b: &Mat4) -> f64 {
    norm_2(&(*a - *b))
}

pub fn random_mask(grid: Grid3, seed: u64, density: f64) -> MaskField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Field::from_fn(grid, |_| rng.gen_bool(density));
    if m.count() == 0 {
        m.data[0] = true;
    }
    m
}

/// Squared distance (mm²) to the nearest foreground voxel by exhaustive search.
pub fn brute_force_edt_squared(mask: &MaskField) -> ScalarField {
    let grid = mask.grid;
    let sites: Vec<[f64; 3]> = (0..grid.len()).filter(|&i| mask.data[i]).map(|i| grid.position(i)).collect();
    Field::from_fn(grid, |idx| {
        let p = grid.position(idx);
        sites.iter().map(|s| (0..3).map(|a| (p[a] - s[a]) * (p[a] - s[a])).sum::<f64>()).fold(f64::INFINITY, f64::min)
    })
}
