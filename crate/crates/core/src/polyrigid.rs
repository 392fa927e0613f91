//! Log-Euclidean fusion of rigid components into a stationary velocity
//! field, and evaluation of its flow `Φ(x, t) = exp(t·L(x))·x̃`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::eigen4::{eig_generator, EigenOptions};
use crate::error::{Error, Result};
use crate::field::{edt, read_field, Field, Grid3, MaskField, MatField, ScalarField, VectorField};
use crate::linalg::{expm_pade_ss, ExpmConfig, Mat4};

/// Spatial weight profile of a component as a function of the distance to
/// its mask.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightParams {
    /// `1 / (1 + α·dist^β)`.
    InverseDistance { alpha: f64, beta: f64 },
    /// `2 / (1 + exp(decay·dist))`, decay in 1/mm.
    Exponential { decay: f64 },
}

impl Default for WeightParams {
    fn default() -> Self {
        WeightParams::Exponential { decay: 0.1 }
    }
}

impl WeightParams {
    pub fn inverse_distance_default() -> Self {
        WeightParams::InverseDistance { alpha: 0.5, beta: 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            WeightParams::InverseDistance { alpha, beta } => alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite(),
            WeightParams::Exponential { decay } => decay > 0.0 && decay.is_finite(),
        };
        if !ok {
            return Err(Error::InvalidArgument(format!("weight parameters must be positive: {self:?}")));
        }
        Ok(())
    }

    /// `ln w(dist)`, accurate far into the tail.
    pub fn log_weight(&self, dist: f64) -> f64 {
        match *self {
            WeightParams::InverseDistance { alpha, beta } => -(alpha * dist.powf(beta)).ln_1p(),
            WeightParams::Exponential { decay } => std::f64::consts::LN_2 - softplus(decay * dist),
        }
    }
}

/// `ln(1 + eˣ)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn weight(params: &WeightParams, dist: f64) -> Result<f64> {
    if !(dist >= 0.0) {
        return Err(Error::InvalidArgument(format!("distance must be non-negative, got {dist}")));
    }
    params.validate()?;
    Ok(match *params {
        WeightParams::InverseDistance { alpha, beta } => 1.0 / (1.0 + alpha * dist.powf(beta)),
        WeightParams::Exponential { decay } => 2.0 / (1.0 + (decay * dist).exp()),
    })
}

/// One rigid piece: its transform, principal logarithm and distance map.
#[derive(Clone, Debug)]
pub struct Component {
    pub id: String,
    pub transform: Mat4,
    pub log: Mat4,
    pub dist_map: ScalarField,
    pub weight: WeightParams,
}

impl Component {
    pub fn new(id: impl Into<String>, transform: Mat4, dist_map: ScalarField, weight: WeightParams, backend: &Backend) -> Result<Self> {
        weight.validate()?;
        if dist_map.data.iter().any(|d| !(*d >= 0.0)) {
            return Err(Error::InvalidArgument("distance maps must be non-negative".into()));
        }
        let log = backend.log(&transform)?;
        Ok(Component { id: id.into(), transform, log, dist_map, weight })
    }

    pub fn from_mask(id: impl Into<String>, transform: Mat4, mask: &MaskField, weight: WeightParams, backend: &Backend) -> Result<Self> {
        Self::new(id, transform, edt(mask)?, weight, backend)
    }
}

/// Components over a shared grid, with their normalized weights once
/// [`normalize`] has run.
#[derive(Clone, Debug)]
pub struct FusionModel {
    pub grid: Grid3,
    pub components: Vec<Component>,
    /// `weights[i][voxel]`, summing to one over `i` when normalized.
    pub weights: Vec<Vec<f64>>,
    pub normalized: bool,
}

impl FusionModel {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        let first = components.first().ok_or_else(|| Error::InvalidArgument("no components".into()))?;
        let grid = first.dist_map.grid;
        for c in &components {
            if c.dist_map.grid != grid {
                return Err(Error::IncompatibleGrids);
            }
        }
        let weights = components.iter().map(|c| c.dist_map.data.iter().map(|&d| c.weight.log_weight(d).exp()).collect()).collect();
        Ok(FusionModel { grid, components, weights, normalized: false })
    }

    /// Normalized weights of every component at a single voxel.
    fn voxel_weights(&self, idx: usize) -> Vec<f64> {
        self.weights.iter().map(|w| w[idx]).collect()
    }

    fn require_normalized(&self) -> Result<()> {
        if !self.normalized {
            return Err(Error::InvalidArgument("fusion model is not normalized".into()));
        }
        Ok(())
    }
}

/// Per-voxel normalization `w̃ᵢ = wᵢ / Σⱼ wⱼ`, carried out on log-weights so
/// that far-field voxels whose raw weights underflow still sum to one.
pub fn normalize(mut model: FusionModel) -> FusionModel {
    let n = model.grid.len();
    let comps = &model.components;
    let per_voxel: Vec<Vec<f64>> =
        (0..n).into_par_iter().map(|idx| normalized_at(comps.iter().map(|c| c.weight.log_weight(c.dist_map.data[idx])))).collect();
    for (i, w) in model.weights.iter_mut().enumerate() {
        for (idx, v) in w.iter_mut().enumerate() {
            *v = per_voxel[idx][i];
        }
    }
    model.normalized = true;
    model
}

fn normalized_at(log_w: impl Iterator<Item = f64>) -> Vec<f64> {
    let log_w: Vec<f64> = log_w.collect();
    let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let rel: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = rel.iter().sum();
    rel.iter().map(|r| r / total).collect()
}

/// Log-Euclidean weighted mean `exp(Σ wᵢ log Tᵢ)`.
pub fn frechet_mean(transforms: &[Mat4], weights: &[f64], backend: &Backend) -> Result<Mat4> {
    if transforms.len() != weights.len() || transforms.is_empty() {
        return Err(Error::InvalidArgument("need one weight per transform".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("weights must sum to 1, got {total}")));
    }
    backend.exp(&log_sum(transforms, weights, backend)?)
}

/// `Σ wᵢ log Tᵢ`.
pub fn log_sum(transforms: &[Mat4], weights: &[f64], backend: &Backend) -> Result<Mat4> {
    let mut acc = Mat4::zeros();
    for (t, &w) in transforms.iter().zip(weights) {
        acc += backend.log(t)?.scale(w);
    }
    Ok(acc)
}

fn fuse(logs: &[Mat4], w: &[f64]) -> Mat4 {
    let mut l = Mat4::zeros();
    for (log, &wi) in logs.iter().zip(w) {
        l += log.scale(wi);
    }
    l.with_bottom_row([0.0; 4])
}

/// Stationary velocity `L(x) = Σᵢ w̃ᵢ(x) log Tᵢ`.
pub fn velocity_field(model: &FusionModel) -> Result<MatField> {
    model.require_normalized()?;
    let logs: Vec<Mat4> = model.components.iter().map(|c| c.log).collect();
    let data = (0..model.grid.len()).into_par_iter().map(|idx| fuse(&logs, &model.voxel_weights(idx))).collect();
    Ok(Field { grid: model.grid, data })
}

/// Flow matrices for several times, plus how many voxels left the eigen path.
#[derive(Clone, Debug)]
pub struct Flow {
    pub times: Vec<f64>,
    pub matrices: Vec<MatField>,
    pub fallback_voxels: usize,
}

impl Flow {
    /// Displacements `Φ(x, t) − x` (mm) for the `k`-th time.
    pub fn displacement(&self, k: usize) -> VectorField {
        to_displacement(&self.matrices[k])
    }
}

pub fn to_displacement(mats: &MatField) -> VectorField {
    let grid = mats.grid;
    let data = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let x = grid.position(idx);
            let y = mats.data[idx].transform_point(x);
            [y[0] - x[0], y[1] - x[1], y[2] - x[2]]
        })
        .collect();
    Field { grid, data }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("no times requested".into()));
    }
    if let Some(t) = times.iter().find(|t| !(t.abs() <= 1.0)) {
        return Err(Error::InvalidArgument(format!("time {t} outside [-1, 1]")));
    }
    Ok(())
}

fn fallback_config() -> ExpmConfig {
    ExpmConfig::fixed(6)
}

fn recoverable(e: &Error) -> bool {
    matches!(e, Error::Screw { .. } | Error::IllConditioned { .. } | Error::Defective(_) | Error::ComplexResidue { .. } | Error::Singular)
}

/// `exp(t·L)` at every requested time, and whether the squaring fallback ran.
fn voxel_flow(l: &Mat4, times: &[f64], backend: &Backend) -> Result<(Vec<Mat4>, bool)> {
    match backend {
        Backend::Squaring(cfg) => {
            let out = times.iter().map(|&t| expm_pade_ss(&l.scale(t), cfg)).collect::<Result<_>>()?;
            Ok((out, false))
        }
        Backend::Eigen(opts) => match eigen_voxel(l, times, opts) {
            Ok(out) => Ok((out, false)),
            Err(e) if recoverable(&e) => {
                let cfg = fallback_config();
                let out = times.iter().map(|&t| expm_pade_ss(&l.scale(t), &cfg)).collect::<Result<_>>()?;
                Ok((out, true))
            }
            Err(e) => Err(e),
        },
    }
}

fn eigen_voxel(l: &Mat4, times: &[f64], opts: &EigenOptions) -> Result<Vec<Mat4>> {
    let dec = eig_generator(l, opts)?;
    times.iter().map(|&t| dec.factors().exp_scaled(t)).collect()
}

/// Evaluate the flow at several times. On the eigen path each voxel is
/// decomposed once and every time reuses the stored factors; voxels whose
/// decomposition is rejected are computed by squaring with `s = 6`.
pub fn flow_many(model: &FusionModel, times: &[f64], backend: &Backend) -> Result<Flow> {
    model.require_normalized()?;
    check_times(times)?;
    let logs: Vec<Mat4> = model.components.iter().map(|c| c.log).collect();
    let per_voxel: Vec<(Vec<Mat4>, bool)> = (0..model.grid.len())
        .into_par_iter()
        .map(|idx| voxel_flow(&fuse(&logs, &model.voxel_weights(idx)), times, backend))
        .collect::<Result<_>>()?;
    let fallback_voxels = per_voxel.iter().filter(|(_, f)| *f).count();
    let matrices = (0..times.len()).map(|k| Field { grid: model.grid, data: per_voxel.iter().map(|(m, _)| m[k]).collect() }).collect();
    Ok(Flow { times: times.to_vec(), matrices, fallback_voxels })
}

pub fn flow(model: &FusionModel, t: f64, backend: &Backend) -> Result<(MatField, usize)> {
    let mut f = flow_many(model, &[t], backend)?;
    Ok((f.matrices.remove(0), f.fallback_voxels))
}

/// Path of a single point. Distances are interpolated trilinearly at the
/// point, then weighted and normalized as on the grid.
pub fn trajectory(model: &FusionModel, x: [f64; 3], times: &[f64], backend: &Backend) -> Result<Vec<[f64; 3]>> {
    model.require_normalized()?;
    check_times(times)?;
    let c = model.grid.to_index(x);
    let w = normalized_at(model.components.iter().map(|comp| comp.weight.log_weight(comp.dist_map.sample_clamped(c))));
    let logs: Vec<Mat4> = model.components.iter().map(|c| c.log).collect();
    let (mats, _) = voxel_flow(&fuse(&logs, &w), times, backend)?;
    Ok(mats.iter().map(|m| m.transform_point(x)).collect())
}

/// Scene description on disk: component transforms inline, masks as field
/// files relative to the scene file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SceneFile {
    pub components: Vec<SceneComponent>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SceneComponent {
    pub id: String,
    pub matrix: [[f64; 4]; 4],
    pub mask: String,
    #[serde(default)]
    pub weight: WeightParams,
}

/// Build a normalized model from a scene file.
pub fn load_scene(path: impl AsRef<Path>, backend: &Backend) -> Result<FusionModel> {
    let path = path.as_ref();
    let scene: SceneFile = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut comps = Vec::with_capacity(scene.components.len());
    for c in scene.components {
        let mask = read_field(base.join(&c.mask))?.into_mask()?;
        comps.push(Component::from_mask(c.id, Mat4(c.matrix), &mask, c.weight, backend)?);
    }
    Ok(normalize(FusionModel::new(comps)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::se3::{from_euler, EulerAngles};

    fn rot_z(theta: f64, d: [f64; 3]) -> Mat4 {
        from_euler(&EulerAngles::new(0.0, 0.0, theta), d).matrix()
    }

    #[test]
    fn weight_examples() {
        let inv = WeightParams::InverseDistance { alpha: 0.5, beta: 1.0 };
        assert_eq!(weight(&inv, 0.0).unwrap(), 1.0);
        assert_eq!(weight(&WeightParams::Exponential { decay: 0.1 }, 0.0).unwrap(), 1.0);
        let sq = WeightParams::InverseDistance { alpha: 0.5, beta: 2.0 };
        assert!((weight(&sq, 2.0).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        assert!(weight(&sq, -1.0).is_err());
        assert!(weight(&WeightParams::Exponential { decay: 0.0 }, 1.0).is_err());
    }

    #[test]
    fn log_weight_matches_weight() {
        for p in [WeightParams::Exponential { decay: 0.7 }, WeightParams::InverseDistance { alpha: 0.5, beta: 2.0 }] {
            for d in [0.0, 0.3, 2.0, 9.0] {
                assert!((p.log_weight(d).exp() - weight(&p, d).unwrap()).abs() < 1e-15);
            }
        }
        // Far tail stays finite where the raw weight underflows.
        let p = WeightParams::Exponential { decay: 10.0 };
        assert!(p.log_weight(200.0).is_finite());
    }

    #[test]
    fn normalization_in_far_field() {
        let w = normalized_at([-3000.0, -3001.0].into_iter());
        assert!((w[0] + w[1] - 1.0).abs() < 1e-15, "{w:?}");
        assert!((w[0] / w[1] - std::f64::consts::E).abs() < 1e-12);
    }

    fn line_model(transforms: &[Mat4], offsets: &[f64]) -> FusionModel {
        let grid = Grid3::new([6, 1, 1], [1.0; 3], [0.0; 3]).unwrap();
        let comps = transforms
            .iter()
            .zip(offsets)
            .enumerate()
            .map(|(i, (t, off))| {
                let dist = Field::from_fn(grid, |idx| (idx as f64 - off).abs());
                Component::new(format!("c{i}"), *t, dist, WeightParams::default(), &Backend::default()).unwrap()
            })
            .collect();
        normalize(FusionModel::new(comps).unwrap())
    }

    #[test]
    fn single_component_is_uniform() {
        let t = rot_z(0.4, [1.0, 2.0, 0.0]);
        let m = line_model(&[t], &[0.0]);
        assert!(m.weights[0].iter().all(|&w| w == 1.0));
        let v = velocity_field(&m).unwrap();
        assert!(v.data.iter().all(|l| *l == m.components[0].log));
        let (mats, _) = flow(&m, 1.0, &Backend::default()).unwrap();
        assert!(mats.data.iter().all(|mt| (*mt - t).max_abs() < 1e-12));
    }

    #[test]
    fn symmetric_components_share_weight() {
        let m = line_model(&[rot_z(0.1, [0.0; 3]), rot_z(-0.1, [0.0; 3])], &[2.0, 2.0]);
        assert!(m.weights.iter().all(|w| w.iter().all(|&v| v == 0.5)));
    }

    #[test]
    fn identity_transforms_give_zero_velocity() {
        let m = line_model(&[Mat4::identity(), Mat4::identity()], &[0.0, 5.0]);
        assert!(velocity_field(&m).unwrap().data.iter().all(|l| *l == Mat4::zeros()));
    }

    #[test]
    fn flow_at_zero_is_identity_and_backends_agree() {
        let m = line_model(&[rot_z(0.3, [1.0, 0.0, 0.0]), rot_z(-0.2, [0.0, 2.0, 0.0])], &[0.0, 5.0]);
        let eig = Backend::Eigen(EigenOptions::default());
        let f = flow_many(&m, &[0.0, 0.5, 1.0], &eig).unwrap();
        assert!(f.matrices[0].data.iter().all(|mt| *mt == Mat4::identity()));
        let sq = flow_many(&m, &[0.0, 0.5, 1.0], &Backend::default()).unwrap();
        for k in 0..3 {
            for (a, b) in f.matrices[k].data.iter().zip(&sq.matrices[k].data) {
                assert!((*a - *b).max_abs() < 1e-12);
            }
        }
        assert_eq!(f.fallback_voxels, 0);
    }

    #[test]
    fn screw_voxels_fall_back() {
        let screw =
            Mat4::from_block([[0.8f64.cos(), -0.8f64.sin(), 0.0], [0.8f64.sin(), 0.8f64.cos(), 0.0], [0.0, 0.0, 1.0]], [0.0, 0.0, 2.0]);
        let m = line_model(&[screw], &[0.0]);
        let f = flow_many(&m, &[0.5], &Backend::Eigen(EigenOptions::default())).unwrap();
        assert_eq!(f.fallback_voxels, 6);
        let sq = flow_many(&m, &[0.5], &Backend::default()).unwrap();
        assert!((f.matrices[0].data[0] - sq.matrices[0].data[0]).max_abs() < 1e-12);
    }

    #[test]
    fn trajectory_of_pure_translation() {
        let t = Mat4::from_block([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], [2.0, -4.0, 6.0]);
        let m = line_model(&[t], &[0.0]);
        let path = trajectory(&m, [1.0, 0.0, 0.0], &[0.0, 0.5, 1.0], &Backend::default()).unwrap();
        assert_eq!(path[0], [1.0, 0.0, 0.0]);
        for (p, e) in path[1..].iter().zip([[2.0, -2.0, 3.0], [3.0, -4.0, 6.0]]) {
            for a in 0..3 {
                assert!((p[a] - e[a]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_times_outside_range_and_unnormalized_models() {
        let m = line_model(&[Mat4::identity()], &[0.0]);
        assert!(flow(&m, 1.5, &Backend::default()).is_err());
        let raw = FusionModel { normalized: false, ..m };
        assert!(velocity_field(&raw).is_err());
    }

    #[test]
    fn frechet_mean_of_commuting_rotations() {
        let a = rot_z(20f64.to_radians(), [0.0; 3]);
        let b = rot_z(40f64.to_radians(), [0.0; 3]);
        let m = frechet_mean(&[a, b], &[0.5, 0.5], &Backend::default()).unwrap();
        assert!((m - rot_z(30f64.to_radians(), [0.0; 3])).max_abs() < 1e-12);
        assert!((frechet_mean(&[a], &[1.0], &Backend::default()).unwrap() - a).max_abs() < 1e-10);
        assert!(frechet_mean(&[a, b], &[0.5, 0.6], &Backend::default()).is_err());
    }
}
