//! Regular 3-D grids and the fields defined on them.

pub mod edt;
pub mod io;
pub mod warp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat4;

pub use edt::{edt, edt_squared};
pub use io::{read_field, write_field, AnyField};
pub use warp::{warp, warp_matrices, Interp, WarpOptions};

/// Voxel lattice: `dims` voxels with `spacing` mm between centres, the first
/// centre at `origin`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
}

impl Grid3 {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidArgument("grid dimensions must be positive".into()));
        }
        if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidArgument("grid spacing must be positive".into()));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidArgument("grid origin must be finite".into()));
        }
        Ok(Grid3 { dims, spacing, origin })
    }

    /// `n³` grid with unit spacing at the origin.
    pub fn cube(n: usize) -> Self {
        Grid3 { dims: [n; 3], spacing: [1.0; 3], origin: [0.0; 3] }
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let j = (idx / self.dims[0]) % self.dims[1];
        let k = idx / (self.dims[0] * self.dims[1]);
        [i, j, k]
    }

    /// Physical position (mm) of a voxel centre.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        [0, 1, 2].map(|a| self.origin[a] + c[a] as f64 * self.spacing[a])
    }

    /// Continuous voxel coordinates of a physical point.
    pub fn to_index(&self, p: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|a| (p[a] - self.origin[a]) / self.spacing[a])
    }

    /// Physical centre of the grid.
    pub fn center(&self) -> [f64; 3] {
        [0, 1, 2].map(|a| self.origin[a] + (self.dims[a] - 1) as f64 * self.spacing[a] / 2.0)
    }
}

/// Per-voxel data over a grid, x-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    pub grid: Grid3,
    pub data: Vec<T>,
}

pub type ScalarField = Field<f64>;
pub type MaskField = Field<bool>;
pub type VectorField = Field<[f64; 3]>;
pub type MatField = Field<Mat4>;

impl<T: Clone> Field<T> {
    pub fn filled(grid: Grid3, value: T) -> Self {
        Field { data: vec![value; grid.len()], grid }
    }
}

impl<T> Field<T> {
    pub fn from_vec(grid: Grid3, data: Vec<T>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::MalformedField(format!("expected {} voxels, got {}", grid.len(), data.len())));
        }
        Ok(Field { grid, data })
    }

    pub fn from_fn(grid: Grid3, f: impl FnMut(usize) -> T) -> Self {
        Field { data: (0..grid.len()).map(f).collect(), grid }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &T {
        &self.data[self.grid.index(i, j, k)]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Field<U> {
        Field { grid: self.grid, data: self.data.iter().map(f).collect() }
    }

    pub fn same_grid<U>(&self, other: &Field<U>) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::IncompatibleGrids);
        }
        Ok(())
    }
}

impl MaskField {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

impl ScalarField {
    pub fn min_max(&self) -> (f64, f64) {
        self.data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Trilinear value at continuous voxel coordinates, clamped to the grid.
    pub fn sample_clamped(&self, c: [f64; 3]) -> f64 {
        let dims = self.grid.dims;
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let hi = (dims[a] - 1) as f64;
            let x = c[a].clamp(0.0, hi);
            let f = x.floor().min((dims[a].max(2) - 2) as f64).max(0.0);
            base[a] = f as usize;
            frac[a] = if dims[a] == 1 { 0.0 } else { x - f };
        }
        let mut acc = 0.0;
        for corner in 0..8 {
            let mut w = 1.0;
            let mut idx = [0usize; 3];
            for a in 0..3 {
                let bit = (corner >> a) & 1;
                idx[a] = (base[a] + bit).min(dims[a] - 1);
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            if w != 0.0 {
                acc += w * self.get(idx[0], idx[1], idx[2]);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let g = Grid3::new([3, 4, 5], [1.0, 2.0, 0.5], [1.0, 0.0, -1.0]).unwrap();
        for idx in 0..g.len() {
            let [i, j, k] = g.coords(idx);
            assert_eq!(g.index(i, j, k), idx);
        }
        assert_eq!(g.position(g.index(2, 1, 4)), [3.0, 2.0, 1.0]);
        assert_eq!(g.to_index([3.0, 2.0, 1.0]), [2.0, 1.0, 4.0]);
    }

    #[test]
    fn invalid_grids() {
        assert!(Grid3::new([0, 1, 1], [1.0; 3], [0.0; 3]).is_err());
        assert!(Grid3::new([1, 1, 1], [1.0, 0.0, 1.0], [0.0; 3]).is_err());
        assert!(Field::from_vec(Grid3::cube(2), vec![0.0; 7]).is_err());
    }

    #[test]
    fn clamped_sampling_interpolates() {
        let g = Grid3::cube(3);
        let f = Field::from_fn(g, |idx| g.coords(idx)[0] as f64 + 10.0 * g.coords(idx)[2] as f64);
        assert_eq!(f.sample_clamped([0.5, 1.0, 1.5]), 15.5);
        assert_eq!(f.sample_clamped([5.0, 0.0, -1.0]), 2.0);
    }
}
