//! Exponential-map accuracy and grid benchmarks with an analytic memory and
//! operation-count model.
//!
//! Memory model, bytes per voxel (a real 4×4 is 128 bytes):
//!
//! - squaring: 7 real 4×4 buffers (input, scaled input, X², X⁴, X⁶, odd and
//!   even Padé parts; the solve and the squarings reuse them in place), plus
//!   one output buffer per timepoint beyond the first;
//! - eigen: the input, 384 bytes of stored factors (3 complex eigenvalues,
//!   3×3 complex eigenvectors, their inverse and the translation in the
//!   eigenbasis), plus one output buffer per timepoint.
//!
//! Operation counts are in 4×4 matrix products: squaring spends 4 Padé
//! products, 1 solve and `s` squarings per timepoint; eigen spends one
//! decomposition (counted as 1) and 2 products per timepoint.

use std::fmt;
use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::eigen4::{eig_generator, EigenOptions};
use crate::error::{Error, Result};
use crate::linalg::{expm_pade_ss, norm_2, ExpmConfig, Mat4};

const MAT_BYTES: u64 = 128;
const SQUARING_BUFFERS: u64 = 7;
const EIGEN_FACTOR_BYTES: u64 = 384;
/// Default refusal threshold for a single grid run.
pub const DEFAULT_MEMORY_CAP: u64 = 2 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Squaring,
    Eigen,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Squaring => "squaring",
            Method::Eigen => "eigen",
        })
    }
}

/// One benchmark measurement; field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub method: Method,
    pub n: usize,
    pub s: u32,
    pub repeats: usize,
    pub wall_time_s: f64,
    pub modeled_peak_bytes: u64,
    pub max_error: f64,
}

pub const CSV_HEADER: &str = "method,n,s,repeats,wall_time_s,modeled_peak_bytes,max_error";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub sizes: Vec<usize>,
    #[serde(default = "default_s")]
    pub s: u32,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub memory_cap_bytes: Option<u64>,
    #[serde(default = "default_timepoints")]
    pub timepoints: usize,
}

fn default_s() -> u32 {
    6
}

fn default_repeats() -> usize {
    3
}

fn default_timepoints() -> usize {
    1
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            methods: vec![Method::Squaring, Method::Eigen],
            sizes: vec![30, 50, 70, 100],
            s: default_s(),
            repeats: default_repeats(),
            memory_cap_bytes: None,
            timepoints: default_timepoints(),
        }
    }
}

/// `‖exp(log T) − T‖₂` with both functions from `backend`.
pub fn expmap_error(t: &Mat4, backend: &Backend) -> Result<f64> {
    let l = backend.log(t)?;
    Ok(norm_2(&(backend.exp(&l)? - *t)))
}

/// Modeled peak workspace for `n³` voxels and `m` timepoints.
pub fn memory_model(method: Method, n: usize, _s: u32, m_timepoints: usize) -> u64 {
    let voxels = (n as u64).pow(3);
    let m = m_timepoints.max(1) as u64;
    let per_voxel = match method {
        Method::Squaring => SQUARING_BUFFERS * MAT_BYTES + (m - 1) * MAT_BYTES,
        Method::Eigen => MAT_BYTES + EIGEN_FACTOR_BYTES + m * MAT_BYTES,
    };
    voxels * per_voxel
}

/// Per-voxel operation counts in 4×4 matrix products.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OpCount {
    pub pade_products: u64,
    pub solves: u64,
    pub squarings: u64,
    pub decompositions: u64,
    pub eigen_products: u64,
}

impl OpCount {
    pub fn total(&self) -> u64 {
        self.pade_products + self.solves + self.squarings + self.decompositions + self.eigen_products
    }
}

pub fn op_count(method: Method, s: u32, m_timepoints: usize) -> OpCount {
    let m = m_timepoints as u64;
    match method {
        Method::Squaring => OpCount { pade_products: 4 * m, solves: m, squarings: s as u64 * m, decompositions: 0, eigen_products: 0 },
        Method::Eigen => OpCount { pade_products: 0, solves: 0, squarings: 0, decompositions: 1, eigen_products: 2 * m },
    }
}

/// z-rotation by π/4, the benchmark target.
pub fn quarter_turn() -> Mat4 {
    let (s, c) = std::f64::consts::FRAC_PI_4.sin_cos();
    Mat4::from_block([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]], [0.0; 3])
}

/// Its logarithm, written out.
pub fn quarter_turn_log() -> Mat4 {
    let mut l = Mat4::zeros();
    l.0[0][1] = -std::f64::consts::FRAC_PI_4;
    l.0[1][0] = std::f64::consts::FRAC_PI_4;
    l
}

fn exp_grid(method: Method, grid: &[Mat4], s: u32) -> Result<Vec<Mat4>> {
    match method {
        Method::Squaring => {
            let cfg = ExpmConfig::fixed(s);
            grid.par_iter().map(|l| expm_pade_ss(l, &cfg)).collect()
        }
        Method::Eigen => {
            let opts = EigenOptions::default();
            grid.par_iter().map(|l| eig_generator(l, &opts)?.factors().exp_scaled(1.0)).collect()
        }
    }
}

/// Exponentiate an `n³` grid filled with `log(T_{π/4})`. Records the median
/// wall time over `repeats` and the largest voxel error against the
/// analytic rotation.
pub fn bench_grid(n: usize, method: Method, s: u32, repeats: usize, memory_cap: u64) -> Result<BenchRecord> {
    if n == 0 || repeats == 0 {
        return Err(Error::InvalidArgument("grid size and repeats must be positive".into()));
    }
    let modeled = memory_model(method, n, s, 1);
    if modeled > memory_cap {
        return Err(Error::MemoryCap { required: modeled, cap: memory_cap });
    }
    let input = vec![quarter_turn_log(); n * n * n];
    let target = quarter_turn();
    let mut times = Vec::with_capacity(repeats);
    let mut max_error = None;
    for _ in 0..repeats {
        let start = Instant::now();
        let out = exp_grid(method, &input, s)?;
        times.push(start.elapsed().as_secs_f64());
        let err = out.par_iter().map(|m| norm_2(&(*m - target))).reduce(|| 0.0, f64::max);
        max_error = Some(max_error.map_or(err, |e: f64| e.max(err)));
    }
    times.sort_by(f64::total_cmp);
    Ok(BenchRecord {
        method,
        n,
        s,
        repeats,
        wall_time_s: times[times.len() / 2].max(f64::MIN_POSITIVE),
        modeled_peak_bytes: modeled,
        max_error: max_error.unwrap_or(0.0),
    })
}

/// All sizes × methods, sizes outermost.
pub fn run_sweep(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    let cap = cfg.memory_cap_bytes.unwrap_or(DEFAULT_MEMORY_CAP);
    for &n in &cfg.sizes {
        for &method in &cfg.methods {
            let required = memory_model(method, n, cfg.s, cfg.timepoints);
            if required > cap {
                return Err(Error::MemoryCap { required, cap });
            }
        }
    }
    let mut out = Vec::new();
    for &n in &cfg.sizes {
        for &method in &cfg.methods {
            out.push(bench_grid(n, method, cfg.s, cfg.repeats, cap)?);
        }
    }
    Ok(out)
}

pub fn emit_csv<W: Write>(records: &[BenchRecord], w: W) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(CSV_HEADER.split(','))?;
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<BenchRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::InvalidArgument(format!("unexpected CSV header {:?}", header.join(","))));
    }
    rd.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_no_error() {
        for b in [Backend::default(), Backend::Eigen(EigenOptions::default())] {
            assert!(expmap_error(&Mat4::identity(), &b).unwrap() < 1e-15);
        }
    }

    #[test]
    fn eigen_memory_grows_only_by_outputs() {
        let one = memory_model(Method::Eigen, 10, 6, 1);
        let eight = memory_model(Method::Eigen, 10, 6, 8);
        assert_eq!(eight - one, 1000 * 7 * 128);
        for n in [30, 50, 70, 100, 120, 150, 200] {
            assert!(memory_model(Method::Eigen, n, 6, 1) < memory_model(Method::Squaring, n, 6, 1));
        }
    }

    #[test]
    fn op_counts() {
        assert_eq!(op_count(Method::Squaring, 4, 1).squarings, 4);
        let d = op_count(Method::Squaring, 7, 1).total() - op_count(Method::Squaring, 6, 1).total();
        assert_eq!(d, 1);
        let e1 = op_count(Method::Eigen, 6, 1).total();
        let e8 = op_count(Method::Eigen, 6, 8).total();
        assert_eq!((e8 - e1) / 7, 2);
    }

    #[test]
    fn small_grid_and_cap() {
        for m in [Method::Squaring, Method::Eigen] {
            let r = bench_grid(4, m, 6, 2, DEFAULT_MEMORY_CAP).unwrap();
            assert!(r.max_error <= 1e-12);
            assert!(r.wall_time_s > 0.0);
        }
        assert!(matches!(bench_grid(30, Method::Squaring, 6, 1, 1 << 20), Err(Error::MemoryCap { .. })));
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        emit_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), format!("{CSV_HEADER}\n"));
        let recs = vec![
            BenchRecord { method: Method::Squaring, n: 3, s: 6, repeats: 1, wall_time_s: 0.5, modeled_peak_bytes: 100, max_error: 1e-16 },
            BenchRecord { method: Method::Eigen, n: 3, s: 6, repeats: 1, wall_time_s: 0.25, modeled_peak_bytes: 80, max_error: 2e-16 },
        ];
        let mut buf = Vec::new();
        emit_csv(&recs, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().count(), 3);
        assert_eq!(read_csv(&buf[..]).unwrap(), recs);
    }
}
